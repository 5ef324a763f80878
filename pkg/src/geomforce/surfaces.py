"""Implicit surface specifications and the builtin catalog.

A SurfaceSpec bundles an expression f with its dimension, parameter
bindings, and a signed-distance flag (true when |grad f| = 1 holds
identically near the surface, which makes jets of f directly usable as
jets of the distance function).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import expr as ex
from . import jets


class UnknownSurfaceError(ValueError):
    """Requested catalog surface does not exist."""


class InvalidParametersError(ValueError):
    """Catalog surface parameters are out of range."""


@dataclass(frozen=True)
class SurfaceSpec:
    """An implicit surface f(x) = 0 with bound parameters."""

    name: str
    expression: ex.Node
    dimension: int
    params: dict = field(default_factory=dict)
    is_signed_distance: bool = False

    def __post_init__(self):
        axes = set()
        for alias_tuple in ex.VARIABLE_NAMES[self.dimension]:
            axes.update(alias_tuple)
        ex.check_bindings(self.expression, axes, self.params)
        # collapse coordinate aliases so downstream code sees one name per axis
        object.__setattr__(self, "expression",
                           ex.canonicalize_variables(self.expression, self.dimension))

    @cached_property
    def _value_fn(self):
        return ex.to_callable(self.expression, self._variables, self.params)

    @cached_property
    def _grad_fns(self):
        return tuple(
            ex.to_callable(ex.differentiate(self.expression, v), self._variables, self.params)
            for v in self._variables
        )

    @property
    def _variables(self):
        return ex.VARIABLE_NAMES[self.dimension][0]

    def f(self, points):
        """f at shape (N,) or (N, B) points."""
        return self._value_fn(np.asarray(points, dtype=float))

    def grad_f(self, points):
        """grad f, same shape as points."""
        points = np.asarray(points, dtype=float)
        return np.stack([g(points) for g in self._grad_fns])

    def jet(self, points, degree):
        """Exact jet of f at the point(s)."""
        return jets.evaluate_jet(self.expression, points, degree, self.params)

    def feature_scale(self):
        """Characteristic length for step sizes and merge tolerances."""
        positive = [v for v in self.params.values() if v > 0]
        return float(min(positive)) if positive else 1.0


def from_expression(text, dimension, params=None, is_signed_distance=False, name=None):
    """Build a spec from expression text, checking identifier bindings."""
    tree = ex.parse_expression(text)
    return SurfaceSpec(
        name=name or text,
        expression=tree,
        dimension=dimension,
        params=dict(params or {}),
        is_signed_distance=is_signed_distance,
    )


_CATALOG = {
    "circle": ("sqrt(x^2 + y^2) - a", 2, ("a",), True),
    "sphere": ("sqrt(x^2 + y^2 + z^2) - a", 3, ("a",), True),
    "cylinder": ("sqrt(x^2 + y^2) - a", 3, ("a",), True),
    "spheroid": ("(x^2 + y^2)/a^2 + z^2/b^2 - 1", 3, ("a", "b"), False),
    "torus": ("sqrt((sqrt(x^2 + y^2) - R)^2 + z^2) - r", 3, ("R", "r"), True),
    "plane": ("z", 3, (), True),
}


def builtin_surface(name, params=None):
    """Catalog surface by name.

    circle(a), sphere(a), cylinder(a), spheroid(a, b), torus(R, r) with
    r < R, and plane (z = 0).  All members except the spheroid are exact
    signed-distance expressions.
    """
    if name not in _CATALOG:
        raise UnknownSurfaceError(
            f"unknown surface '{name}'; catalog: {', '.join(sorted(_CATALOG))}"
        )
    text, dimension, wanted, signed = _CATALOG[name]
    params = dict(params or {})
    missing = set(wanted) - set(params)
    extra = set(params) - set(wanted)
    if missing or extra:
        raise InvalidParametersError(
            f"surface '{name}' takes parameters {wanted}; "
            f"missing {sorted(missing)}, unexpected {sorted(extra)}"
        )
    for key in wanted:
        if not params[key] > 0:
            raise InvalidParametersError(f"parameter {key} must be positive, got {params[key]}")
    if name == "torus" and not params["r"] < params["R"]:
        raise InvalidParametersError(
            f"torus tube radius r={params['r']} must be smaller than ring radius R={params['R']}"
        )
    return from_expression(text, dimension, params, is_signed_distance=signed, name=name)
