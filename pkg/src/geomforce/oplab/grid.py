"""Periodic parametric surface grids with per-node geometric coefficients.

Supported surfaces: circle(a) with angle theta, and torus(R, r) with
tube angle theta and azimuth phi (node (i, j) sits at theta_i, phi_j).
Geometric coefficient fields (n, shape tensor and its derivatives, M,
S2, lap M, ...) are pulled from the geometry module under the
SignedDistance extension, where the catalog expressions are exact.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .. import geometry as geo
from ..surfaces import builtin_surface


class UnsupportedSurfaceError(ValueError):
    """Operator lab grids exist for circle and torus only."""


def _check_size(n):
    if n < 16 or (n & (n - 1)) != 0:
        raise ValueError(f"grid size must be a power of two >= 16, got {n}")


@dataclass
class ParamSurfaceGrid:
    """Uniform periodic grid on a parametric surface.

    Grid-function arrays have shape `shape`; embedded quantities carry
    leading component axes.  weights are the quadrature weights
    sqrt(g) * du (positive; they sum to the surface area).
    """

    kind: str
    params: dict
    shape: tuple
    coords: tuple            # 1D coordinate arrays per axis
    points: np.ndarray       # (N,) + shape embedded nodes
    grad_coefs: np.ndarray   # (N, naxes) + shape: (grad_S)_i = sum_a c[i,a] d_a
    ginv_diag: np.ndarray    # (naxes,) + shape inverse metric diagonal
    sqrtg: np.ndarray        # shape
    weights: np.ndarray      # shape
    geo: dict = field(repr=False, default=None)
    spec: object = field(repr=False, default=None)

    @property
    def ndim_embed(self):
        return self.points.shape[0]

    @property
    def size(self):
        return int(np.prod(self.shape))

    @property
    def area(self):
        return float(np.sum(self.weights))

    def flat_points(self):
        return self.points.reshape(self.ndim_embed, -1)


def _geo_fields(spec, points_flat, shape):
    fields = geo.curvature_fields(spec, points_flat, geo.ExtensionPolicy.SIGNED_DISTANCE)
    out = {}
    for key, value in fields.items():
        if key == "error_bound":
            continue
        out[key] = value.reshape(value.shape[:-1] + shape)
    return out


def build_grid(kind, params, size):
    """Build a circle or torus grid; sizes must be powers of two >= 16.

    size is an int (circle: n nodes; torus: n x n) or a pair for the
    torus.  The quadrature invariant (sum of weights = closed-form area)
    is checked to 1e-10 relative.
    """
    if kind == "circle":
        if not isinstance(size, int):
            raise ValueError("circle grid size must be an int")
        _check_size(size)
        a = params["a"]
        spec = builtin_surface("circle", {"a": a})
        th = np.linspace(0.0, 2 * np.pi, size, endpoint=False)
        points = np.stack([a * np.cos(th), a * np.sin(th)])
        # (grad_S)_i = g^{tt} (x_t)_i d_t with x_t = a(-sin, cos)
        tangent = np.stack([-np.sin(th), np.cos(th)])
        grad_coefs = (tangent / a)[:, None, :]
        ginv = np.full((1, size), 1.0 / a ** 2)
        sqrtg = np.full(size, a)
        weights = sqrtg * (2 * np.pi / size)
        grid = ParamSurfaceGrid(
            kind=kind, params=dict(params), shape=(size,), coords=(th,),
            points=points, grad_coefs=grad_coefs, ginv_diag=ginv,
            sqrtg=sqrtg, weights=weights, spec=spec,
        )
        exact_area = 2 * np.pi * a
    elif kind == "torus":
        if isinstance(size, int):
            size = (size, size)
        nth, nph = size
        _check_size(nth)
        _check_size(nph)
        R, r = params["R"], params["r"]
        spec = builtin_surface("torus", {"R": R, "r": r})
        th = np.linspace(0.0, 2 * np.pi, nth, endpoint=False)
        ph = np.linspace(0.0, 2 * np.pi, nph, endpoint=False)
        TH, PH = np.meshgrid(th, ph, indexing="ij")
        rho = R + r * np.sin(TH)
        points = np.stack([rho * np.cos(PH), rho * np.sin(PH), r * np.cos(TH)])
        x_th = np.stack([r * np.cos(TH) * np.cos(PH), r * np.cos(TH) * np.sin(PH),
                         -r * np.sin(TH)])
        x_ph = np.stack([-rho * np.sin(PH), rho * np.cos(PH), np.zeros_like(PH)])
        grad_coefs = np.stack([x_th / r ** 2, x_ph / rho ** 2], axis=1)
        ginv = np.stack([np.full_like(rho, 1.0 / r ** 2), 1.0 / rho ** 2])
        sqrtg = r * rho
        weights = sqrtg * (2 * np.pi / nth) * (2 * np.pi / nph)
        grid = ParamSurfaceGrid(
            kind=kind, params=dict(params), shape=(nth, nph), coords=(th, ph),
            points=points, grad_coefs=grad_coefs, ginv_diag=ginv,
            sqrtg=sqrtg, weights=weights, spec=spec,
        )
        exact_area = 4 * np.pi ** 2 * R * r
    else:
        raise UnsupportedSurfaceError(f"no operator-lab grid for '{kind}'")

    if np.any(grid.weights <= 0):
        raise ValueError("quadrature weights must be positive")
    if abs(grid.area - exact_area) > 1e-10 * exact_area:
        raise ValueError(
            f"quadrature area {grid.area!r} deviates from {exact_area!r}"
        )
    grid.geo = _geo_fields(grid.spec, grid.flat_points(), grid.shape)
    return grid
