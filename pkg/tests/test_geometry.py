import numpy as np
import pytest

from geomforce import geometry as geo
from geomforce.geometry import ExtensionPolicy
from geomforce.surfaces import builtin_surface, from_expression

import closed_forms as cf

GN = ExtensionPolicy.GRADIENT_NORMALIZED
SD = ExtensionPolicy.SIGNED_DISTANCE


@pytest.fixture(scope="module")
def torus():
    return builtin_surface("torus", {"R": 2.0, "r": 1.0})


@pytest.fixture(scope="module")
def sphere():
    return builtin_surface("sphere", {"a": 1.0})


@pytest.fixture(scope="module")
def circle():
    return builtin_surface("circle", {"a": 1.0})


def torus_point(theta, phi=0.0, R=2.0, r=1.0):
    rho = R + r * np.sin(theta)
    return np.array([rho * np.cos(phi), rho * np.sin(phi), r * np.cos(theta)])


# projections ------------------------------------------------------------------


def test_project_sphere_radially(sphere):
    assert np.allclose(geo.project_to_surface(sphere, np.array([2.0, 0.0, 0.0])),
                       [1.0, 0.0, 0.0], atol=1e-12)


def test_project_torus_to_tube_circle(torus):
    assert np.allclose(geo.project_to_surface(torus, np.array([4.0, 0.0, 0.0])),
                       [3.0, 0.0, 0.0], atol=1e-12)


def test_project_spheroid_axis_point_to_pole():
    spec = builtin_surface("spheroid", {"a": 1.0, "b": 2.0})
    got = geo.project_to_surface(spec, np.array([0.0, 0.0, 5.0]))
    assert np.allclose(got, [0.0, 0.0, 2.0], atol=1e-10)


def test_projection_failure_reports_iterations():
    spec = builtin_surface("sphere", {"a": 1.0})
    with pytest.raises(geo.NoConvergenceError) as err:
        geo.project_to_surface(spec, np.array([0.0, 0.0, 0.0]), max_iter=5)
    assert err.value.iterations == 5


# normal jets ------------------------------------------------------------------


def test_sphere_normal_jet_by_hand(sphere):
    nj = geo.normal_jet(sphere, np.array([1.0, 0.0, 0.0]), SD)
    assert np.allclose(nj.n, [1.0, 0.0, 0.0], atol=1e-14)
    assert np.allclose(nj.dn, np.diag([0.0, 1.0, 1.0]), atol=1e-12)


def test_circle_normal_trace(circle):
    for theta in (0.0, 0.7, 2.0):
        p = np.array([np.cos(theta), np.sin(theta)])
        nj = geo.normal_jet(circle, p, SD)
        assert np.allclose(nj.n, p, atol=1e-13)
        assert np.trace(nj.dn) == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("policy", [GN, SD])
def test_unit_norm_and_tangency_invariants(torus, policy):
    for theta in np.linspace(0, 2 * np.pi, 7):
        nj = geo.normal_jet(torus, torus_point(theta), policy)
        assert nj.unit_norm_defect() < 1e-10
        assert nj.tangency_defect() < 1e-8


def test_signed_distance_normals_are_straight(torus):
    # d_n n = n_j n_{i,j} = 0 under the signed-distance extension
    nj = geo.normal_jet(torus, torus_point(1.3), SD)
    assert np.max(np.abs(nj.dn @ nj.n)) < 1e-12


def test_normal_jet_requires_surface_point(sphere):
    with pytest.raises(ValueError, match="not on the surface"):
        geo.normal_jet(sphere, np.array([1.5, 0.0, 0.0]), SD)


def test_numeric_distance_jets_match_exact_for_sdf_surface(torus):
    # quadric-free check of the numeric path: rebuild the torus as a
    # plain expression without the signed-distance flag
    raw = from_expression("sqrt((sqrt(x^2 + y^2) - R)^2 + z^2) - r", 3,
                          {"R": 2.0, "r": 1.0})
    assert not raw.is_signed_distance
    p = torus_point(0.9)
    exact = geo.normal_jet(torus, p, SD)
    numeric = geo.normal_jet(raw, p, SD)
    assert numeric.error_bound is not None
    assert np.allclose(numeric.n, exact.n, atol=1e-9)
    assert np.allclose(numeric.dn, exact.dn, atol=1e-7)
    assert np.allclose(numeric.d3n, exact.d3n, atol=5e-2)


# curvature samples --------------------------------------------------------------


def test_circle_curvature_closed_forms(circle):
    want = cf.circle_fields(1.0)
    s = geo.curvature_sample(circle, np.array([np.cos(0.4), np.sin(0.4)]), SD)
    assert s.M == pytest.approx(want["M"], abs=1e-12)
    assert s.S2 == pytest.approx(want["S2"], abs=1e-12)
    assert s.vg_geom == pytest.approx(want["vg_geom"], abs=1e-12)
    assert s.lapM == pytest.approx(want["lapM"], abs=1e-11)
    assert s.lapLB_M == pytest.approx(0.0, abs=1e-11)
    assert s.kappa == pytest.approx([1.0])
    assert s.chi_geom == pytest.approx(1.0, abs=1e-11)


def test_sphere_quantum_force_vanishes(sphere):
    for point in ([1.0, 0.0, 0.0], [0.0, 0.6, 0.8]):
        for policy in (GN, SD):
            s = geo.curvature_sample(sphere, np.array(point), policy)
            assert abs(s.lapM) < 1e-10
            assert s.M == pytest.approx(-2.0, abs=1e-11)
            assert s.vg_geom == pytest.approx(0.0, abs=1e-11)


def test_torus_fields_match_parametric_oracle(torus):
    thetas = np.linspace(0, 2 * np.pi, 16, endpoint=False)
    for theta in thetas:
        s = geo.curvature_sample(torus, torus_point(theta), SD)
        h1, h2 = cf.torus_curvatures(2.0, 1.0, theta)
        assert s.M == pytest.approx(-(h1 + h2), abs=1e-11)
        assert s.S2 == pytest.approx(h1 ** 2 + h2 ** 2, abs=1e-11)
        assert s.lapM == pytest.approx(cf.torus_lap_sd(2.0, 1.0, theta), abs=1e-10)
        assert s.lapLB_M == pytest.approx(cf.torus_lap_lb(2.0, 1.0, theta), abs=1e-10)
        assert sorted(s.kappa) == pytest.approx(sorted([h1, h2]), abs=1e-10)


def test_torus_outer_equator_spot_values(torus):
    s = geo.curvature_sample(torus, torus_point(np.pi / 2), SD)
    assert s.lapM == pytest.approx(-10.0 / 27.0, abs=1e-12)
    assert s.lapLB_M == pytest.approx(2.0 / 9.0, abs=1e-12)


def test_lb_laplacian_is_extension_independent(torus):
    p = torus_point(0.8)
    lb_sd = geo.lb_laplacian_mean_curvature(torus, p, SD)
    lb_gn = geo.lb_laplacian_mean_curvature(torus, p, GN)
    assert lb_sd == pytest.approx(lb_gn, abs=1e-9)


def test_on_surface_mean_curvature_policy_independent():
    spec = builtin_surface("spheroid", {"a": 1.0, "b": 2.0})
    for point in (np.array([0.0, 0.0, 2.0]), np.array([1.0, 0.0, 0.0])):
        m_gn = geo.curvature_sample(spec, point, GN).M
        m_sd = geo.curvature_sample(spec, point, SD).M
        assert m_gn == pytest.approx(m_sd, abs=1e-8)


def test_vg_equals_minus_half_squared_curvature_difference(torus):
    # V_G consistency: M^2/2 - S2 = -(k1 - k2)^2 / 2 for two curvatures
    for theta in np.linspace(0, 2 * np.pi, 9):
        s = geo.curvature_sample(torus, torus_point(theta), SD)
        k1, k2 = s.kappa
        assert s.vg_geom == pytest.approx(-0.25 * (k1 - k2) ** 2 * 2, abs=1e-9)
        # equivalent da Costa surface form: V_G = -(hbar^2/2mu)(H^2 - K)
        h_mean = 0.5 * (k1 + k2)
        gauss = k1 * k2
        assert 0.25 * s.vg_geom == pytest.approx(-0.5 * (h_mean ** 2 - gauss),
                                                 abs=1e-9)


# split identity ------------------------------------------------------------------


def test_split_residual_sphere_vanishes(sphere):
    assert abs(geo.split_residual(sphere, np.array([0.0, 0.0, 1.0]), SD)) < 1e-10


def test_split_residual_circle_is_minus_two(circle):
    rep = geo.split_report(circle, np.array([1.0, 0.0]), SD)
    assert rep.lapM == pytest.approx(-1.0, abs=1e-11)
    assert rep.lapLB_M == pytest.approx(0.0, abs=1e-11)
    assert rep.normal_term == pytest.approx(1.0, abs=1e-11)
    assert rep.residual == pytest.approx(-2.0, abs=1e-10)
    assert rep.residual_flipped == pytest.approx(0.0, abs=1e-10)


def test_split_residual_torus_matches_oracle(torus):
    for theta in np.linspace(0, 2 * np.pi, 16, endpoint=False):
        rep = geo.split_report(torus, torus_point(theta), SD)
        assert rep.residual == pytest.approx(
            cf.torus_split_residual(2.0, 1.0, theta), abs=1e-9)
        assert rep.residual_flipped == pytest.approx(0.0, abs=1e-9)


# physical scale / force -----------------------------------------------------------


def test_physical_scale_validation():
    with pytest.raises(ValueError):
        geo.PhysicalScale(mass_kg=-1.0)
    with pytest.raises(ValueError):
        geo.PhysicalScale(mass_kg=1.0, hbar=0.0)


def test_force_scale_reproduces_order_of_magnitude():
    # hbar^2 / (mu a^3) at mu = 1e-30 kg, a = 10 nm
    assert geo.curvature_force_scale(1e-30, 1e-8) == pytest.approx(1.112e-2,
                                                                   rel=1e-2)


def test_si_force_zero_for_zero_laplacian(sphere):
    s = geo.curvature_sample(sphere, np.array([1.0, 0.0, 0.0]), SD)
    force = geo.si_force_magnitude(s, geo.PhysicalScale(mass_kg=1e-30,
                                                        length_unit_m=1e-8))
    assert force.magnitude_piconewton == pytest.approx(0.0, abs=1e-12)


def test_si_force_cubic_length_scaling(circle):
    s = geo.curvature_sample(circle, np.array([1.0, 0.0]), SD)
    f1 = geo.si_force_magnitude(s, geo.PhysicalScale(1e-30, length_unit_m=1e-8))
    f2 = geo.si_force_magnitude(s, geo.PhysicalScale(1e-30, length_unit_m=2e-8))
    assert f1.magnitude_piconewton == pytest.approx(8.0 * f2.magnitude_piconewton,
                                                    rel=1e-12)
    assert np.allclose(f1.vector_newton,
                       -0.25 * geo.HBAR_SI ** 2 / 1e-30 * s.lapM / 1e-24 * s.n)


# sampling -------------------------------------------------------------------------


def test_sample_field_deterministic(torus):
    s1 = geo.sample_field(torus, SD, sampling="random", count=10, seed=3)
    s2 = geo.sample_field(torus, SD, sampling="random", count=10, seed=3)
    assert all(np.allclose(a.x, b.x) for a, b in zip(s1, s2))
    s3 = geo.sample_field(torus, SD, sampling="random", count=10, seed=4)
    assert not np.allclose(s1[0].x, s3[0].x)


def test_sample_field_empty(torus):
    assert geo.sample_field(torus, SD, sampling="random", count=0) == []
    assert geo.sample_field(torus, SD, sampling="grid", resolution=0) == []


def test_sample_field_points_on_surface(torus):
    samples = geo.sample_field(torus, SD, sampling="random", count=25, seed=1)
    assert len(samples) == 25
    for s in samples:
        assert abs(float(torus.f(s.x))) < 1e-9


def test_tube_angle_grid_matches_closed_forms(torus):
    samples = geo.sample_field(torus, SD, sampling="grid", resolution=(64, 1))
    assert len(samples) == 64
    for s in samples:
        theta = np.arctan2(s.x[0] - 2.0 * s.x[0] / np.hypot(s.x[0], s.x[1]) * 0
                           + (np.hypot(s.x[0], s.x[1]) - 2.0), s.x[2])
        # recover tube angle from the embedding instead: sin t = rho - R
        sin_t = np.hypot(s.x[0], s.x[1]) - 2.0
        assert s.lapM == pytest.approx(
            float(-2.0 * (4.0 + 2.0 * sin_t - 1.0) / (2.0 + sin_t) ** 3), abs=1e-9)


def test_csv_serialization_schema(circle):
    samples = geo.sample_field(circle, SD, sampling="grid", resolution=4)
    text = geo.samples_to_csv(samples)
    header = text.splitlines()[0].split(",")
    assert header == ["x0", "x1", "n0", "n1", "M", "S2", "kappa0",
                      "lapM", "lapLB_M", "vg_geom", "chi_geom"]
    assert len(text.splitlines()) == 5


def test_sample_to_dict_schema(circle):
    s = geo.curvature_sample(circle, np.array([1.0, 0.0]), SD)
    d = s.to_dict()
    assert list(d.keys()) == ["x", "n", "M", "S2", "kappa", "lapM",
                              "lapLB_M", "vg_geom", "chi_geom"]


# spheroid numeric signed distance ---------------------------------------------------


def test_spheroid_numeric_sd_matches_symbolic_constants():
    spec = builtin_surface("spheroid", {"a": 1.0, "b": 2.0})
    want = cf.SPHEROID_LAP[(1.0, 2.0)]
    pole = geo.curvature_sample(spec, np.array([0.0, 0.0, 2.0]), SD)
    assert pole.error_bound is not None
    assert pole.lapM == pytest.approx(want["pole"]["sd"],
                                      rel=50 * pole.error_bound)
    gn_pole = geo.curvature_sample(spec, np.array([0.0, 0.0, 2.0]), GN)
    assert gn_pole.lapM == pytest.approx(want["pole"]["gn"], rel=1e-11)
    eq = geo.curvature_sample(spec, np.array([1.0, 0.0, 0.0]), SD)
    assert eq.lapM == pytest.approx(want["equator"]["sd"], abs=0.02)
    gn_eq = geo.curvature_sample(spec, np.array([1.0, 0.0, 0.0]), GN)
    assert gn_eq.lapM == pytest.approx(want["equator"]["gn"], rel=1e-11)


def test_precision_loss_guard_reports_estimate():
    spec = builtin_surface("spheroid", {"a": 1.0, "b": 2.0})
    with pytest.raises(geo.PrecisionLossError) as err:
        geo._numeric_distance_tables(spec, np.array([0.0, 0.0, 2.0]), 3,
                                     threshold=1e-12)
    assert err.value.estimate > 1e-12
