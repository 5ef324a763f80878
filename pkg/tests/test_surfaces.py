import numpy as np
import pytest

from geomforce import expr as ex
from geomforce.surfaces import (
    InvalidParametersError,
    UnknownSurfaceError,
    builtin_surface,
    from_expression,
)


def test_sphere_is_signed_distance_expression():
    spec = builtin_surface("sphere", {"a": 1.0})
    assert spec.is_signed_distance
    assert ex.unparse(spec.expression).startswith("sqrt(")
    assert spec.f(np.array([1.0, 0.0, 0.0])) == pytest.approx(0.0, abs=1e-15)


def test_torus_gradient_is_unit_near_surface():
    spec = builtin_surface("torus", {"R": 2.0, "r": 1.0})
    rng = np.random.default_rng(0)
    th = rng.uniform(0, 2 * np.pi, 100)
    ph = rng.uniform(0, 2 * np.pi, 100)
    rad = 1.0 + rng.uniform(-0.3, 0.3, 100)
    rho = 2.0 + rad * np.sin(th)
    pts = np.stack([rho * np.cos(ph), rho * np.sin(ph), rad * np.cos(th)])
    g = spec.grad_f(pts)
    assert np.abs(np.linalg.norm(g, axis=0) - 1.0).max() < 1e-12


def test_spheroid_is_not_signed_distance():
    spec = builtin_surface("spheroid", {"a": 1.0, "b": 2.0})
    assert not spec.is_signed_distance
    g = spec.grad_f(np.array([1.0, 0.0, 0.0]))
    assert abs(np.linalg.norm(g) - 1.0) > 0.1


def test_torus_requires_tube_inside_ring():
    with pytest.raises(InvalidParametersError):
        builtin_surface("torus", {"R": 1.0, "r": 2.0})
    with pytest.raises(InvalidParametersError):
        builtin_surface("torus", {"R": 1.0, "r": 1.0})


def test_unknown_surface():
    with pytest.raises(UnknownSurfaceError):
        builtin_surface("klein-bottle", {})


def test_parameters_validated():
    with pytest.raises(InvalidParametersError):
        builtin_surface("sphere", {"a": -1.0})
    with pytest.raises(InvalidParametersError):
        builtin_surface("sphere", {})
    with pytest.raises(InvalidParametersError):
        builtin_surface("sphere", {"a": 1.0, "extra": 2.0})


def test_circle_lives_in_the_plane():
    spec = builtin_surface("circle", {"a": 2.0})
    assert spec.dimension == 2
    assert spec.f(np.array([2.0, 0.0])) == pytest.approx(0.0, abs=1e-15)


def test_expression_surface_with_bindings():
    spec = from_expression("x^2/a^2 + y^2 - 1", 2, {"a": 2.0})
    assert spec.f(np.array([2.0, 0.0])) == pytest.approx(0.0)
    with pytest.raises(ex.UnknownIdentifierError):
        from_expression("x + missing", 2)


def test_x1_x2_aliases_accepted():
    spec = from_expression("x1^2 + x2^2 - 1", 2)
    assert spec.f(np.array([0.0, 1.0])) == pytest.approx(0.0)


def test_feature_scale_uses_smallest_parameter():
    spec = builtin_surface("torus", {"R": 2.0, "r": 0.5})
    assert spec.feature_scale() == 0.5
    assert builtin_surface("plane", {}).feature_scale() == 1.0
