import numpy as np
import pytest

from geomforce import geometry as geo
from geomforce import optim
from geomforce.geometry import ExtensionPolicy
from geomforce.surfaces import builtin_surface

import closed_forms as cf

GN = ExtensionPolicy.GRADIENT_NORMALIZED
SD = ExtensionPolicy.SIGNED_DISTANCE


def _locations(points):
    return np.array([p.location for p in points])


def test_prolate_spheroid_poles_found():
    spec = builtin_surface("spheroid", {"a": 1.0, "b": 2.0})
    points = optim.find_critical_points(
        spec, "lapM", GN, optim.SearchConfig(starts=24, seed=0))
    locs = _locations(points)
    for pole in ([0.0, 0.0, 2.0], [0.0, 0.0, -2.0]):
        dist = np.linalg.norm(locs - pole, axis=1).min()
        assert dist < 1e-6
    pole_records = [p for p in points if abs(abs(p.location[2]) - 2.0) < 1e-6]
    for rec in pole_records:
        assert rec.value == pytest.approx(cf.SPHEROID_LAP[(1.0, 2.0)]["pole"]["gn"],
                                          rel=1e-8)
        assert rec.grad_norm < 1e-8


def test_prolate_pole_is_the_magnitude_extremum_dense_sweep_oracle():
    # dense parametric sweep of the same field, independent of the optimizer
    spec = builtin_surface("spheroid", {"a": 1.0, "b": 2.0})
    t = np.linspace(-np.pi / 2 + 1e-3, np.pi / 2 - 1e-3, 2000)
    pts = np.stack([np.cos(t), np.zeros_like(t), 2.0 * np.sin(t)])
    fields = geo.curvature_fields(spec, pts, GN)
    sweep_max = np.abs(fields["lapM"]).max()
    points = optim.find_critical_points(
        spec, "lapM", GN, optim.SearchConfig(starts=16, seed=1))
    best = max(abs(p.value) for p in points)
    assert best >= sweep_max - 1e-6
    # the sweep extremum sits at the pole ends
    assert np.abs(fields["lapM"][[0, -1]]).max() == pytest.approx(sweep_max, rel=1e-3)


def test_oblate_spheroid_equator_orbit():
    spec = builtin_surface("spheroid", {"a": 2.0, "b": 1.0})
    points = optim.find_critical_points(
        spec, "lapM", GN, optim.SearchConfig(starts=24, seed=0))
    equator = [p for p in points
               if abs(p.location[2]) < 1e-6
               and abs(np.hypot(*p.location[:2]) - 2.0) < 1e-6]
    assert equator
    rec = equator[0]
    assert rec.value == pytest.approx(cf.SPHEROID_LAP[(2.0, 1.0)]["equator"]["gn"],
                                      rel=1e-8)
    assert rec.classification == "degenerate-orbit"
    assert rec.orbit and "rho=2" in rec.orbit


def test_torus_inner_circle_orbit():
    spec = builtin_surface("torus", {"R": 2.0, "r": 1.0})
    points = optim.find_critical_points(
        spec, "lapM", SD, optim.SearchConfig(starts=16, seed=5))
    inner = [p for p in points
             if abs(np.hypot(*p.location[:2]) - 1.0) < 1e-6
             and abs(p.location[2]) < 1e-6]
    assert inner
    rec = inner[0]
    assert rec.classification == "degenerate-orbit"
    assert rec.value == pytest.approx(-2.0, abs=1e-9)
    # dense sweep oracle: the inner circle is the magnitude extremum
    theta = np.linspace(0, 2 * np.pi, 4000, endpoint=False)
    sweep = cf.torus_lap_sd(2.0, 1.0, theta)
    assert np.abs(sweep).max() == pytest.approx(2.0, abs=1e-6)
    assert theta[np.argmax(np.abs(sweep))] == pytest.approx(3 * np.pi / 2, abs=1e-2)


def test_constant_field_on_sphere_returns_whole_surface_orbit():
    spec = builtin_surface("sphere", {"a": 1.0})
    points = optim.find_critical_points(
        spec, "lapM", SD, optim.SearchConfig(starts=8, seed=2))
    assert len(points) == 1
    assert points[0].classification == "degenerate-orbit"
    assert "entire surface" in points[0].orbit
    assert abs(points[0].value) < 1e-10


def test_plane_mean_curvature_degenerate():
    spec = builtin_surface("plane", {})
    label = optim.classify_critical_point(spec, np.array([0.2, -0.3, 0.0]),
                                          "M", SD)
    assert label == "degenerate-orbit"


def test_classification_labels_match_dense_sweep_signs():
    # prolate pole: lapM = 54 > values nearby, so it is a local max
    spec = builtin_surface("spheroid", {"a": 1.0, "b": 2.0})
    label = optim.classify_critical_point(spec, np.array([0.0, 0.0, 2.0]),
                                          "lapM", GN)
    assert label == "max"


def test_determinism_under_fixed_seed():
    spec = builtin_surface("torus", {"R": 2.0, "r": 1.0})
    cfg = optim.SearchConfig(starts=10, seed=9)
    a = optim.find_critical_points(spec, "lapM", SD, cfg)
    b = optim.find_critical_points(spec, "lapM", SD, cfg)
    assert len(a) == len(b)
    for pa, pb in zip(a, b):
        assert np.allclose(pa.location, pb.location)
        assert pa.value == pb.value
        assert pa.multiplicity == pb.multiplicity


def test_every_returned_point_satisfies_first_order_conditions():
    spec = builtin_surface("spheroid", {"a": 2.0, "b": 1.0})
    cfg = optim.SearchConfig(starts=12, seed=4, tol=1e-8)
    for rec in optim.find_critical_points(spec, "vg_geom", GN, cfg):
        assert abs(float(spec.f(rec.location))) < 1e-9
        assert rec.grad_norm < cfg.tol


def test_unknown_field_rejected():
    spec = builtin_surface("sphere", {"a": 1.0})
    with pytest.raises(ValueError):
        optim.find_critical_points(spec, "curvature", SD)


def test_report_has_signed_and_magnitude_orderings():
    spec = builtin_surface("torus", {"R": 2.0, "r": 1.0})
    points = optim.find_critical_points(
        spec, "lapM", SD, optim.SearchConfig(starts=10, seed=5))
    report = optim.to_report(points)
    values = [row["value"] for row in report["critical_points"]]
    assert values == sorted(values)
    magnitudes = [abs(row["value"]) for row in report["by_magnitude"]]
    assert magnitudes == sorted(magnitudes, reverse=True)
    for row in report["critical_points"]:
        assert set(row) == {"location", "value", "class", "grad_norm",
                            "multiplicity", "orbit"}
