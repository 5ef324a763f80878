"""Curvature fields of implicit surfaces from jets of f.

Everything here is derived from the unit normal extension n and its
derivative tables n_{i,j}, n_{i,j,k}, n_{i,j,k,l}.  Two off-surface
extensions are supported:

* GradientNormalized: n = grad f / |grad f| for the given f, exact via
  jet arithmetic.
* SignedDistance: n = grad d for the signed distance d.  When f already
  is a signed distance its jets are used directly; otherwise d is
  differentiated numerically (central differences plus Richardson
  extrapolation around closest-point projections).

Sign conventions: M = -n_{i,i}, so a sphere of radius a with outward
normal has M = -2/a.  The quantum force density along n is
chi_geom = -lap M in units hbar^2 / (4 mu).

Internally all table computations carry a trailing batch axis so that
grids of thousands of points evaluate in vectorized numpy.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from . import jets

HBAR_SI = 1.054571817e-34  # J s

FIELD_NAMES = ("lapM", "vg_geom", "M")


class NoConvergenceError(RuntimeError):
    """Projection iteration failed; carries iteration count and residual."""

    def __init__(self, message, iterations, residual):
        self.iterations = iterations
        self.residual = residual
        super().__init__(f"{message} ({iterations} iterations, residual {residual:.3e})")


class PrecisionLossError(RuntimeError):
    """Richardson levels disagree beyond threshold; carries the estimate."""

    def __init__(self, message, estimate):
        self.estimate = estimate
        super().__init__(f"{message} (disagreement estimate {estimate:.3e})")


class ExtensionPolicy(enum.Enum):
    GRADIENT_NORMALIZED = "gn"
    SIGNED_DISTANCE = "sd"

    @classmethod
    def parse(cls, text):
        table = {
            "gn": cls.GRADIENT_NORMALIZED,
            "gradient-normalized": cls.GRADIENT_NORMALIZED,
            "sd": cls.SIGNED_DISTANCE,
            "signed-distance": cls.SIGNED_DISTANCE,
        }
        try:
            return table[text.lower()]
        except KeyError:
            raise ValueError(f"unknown extension policy '{text}'") from None


@dataclass(frozen=True)
class PhysicalScale:
    """SI scales attached to a model surface."""

    mass_kg: float
    hbar: float = HBAR_SI
    length_unit_m: float = 1.0

    def __post_init__(self):
        for name in ("mass_kg", "hbar", "length_unit_m"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")


# Closest-point projection ----------------------------------------------------


def project_to_surface(spec, point, tol=1e-12, max_iter=100, angle_tol=1e-6):
    """Closest point on f = 0, for one point (N,) or a batch (N, B).

    Alternates a Newton step along grad f with a tangential closest-point
    correction.  Convergence requires |f(y)| < tol and (y - point)
    parallel to grad f(y) within angle_tol.
    """
    point = np.asarray(point, dtype=float)
    single = point.ndim == 1
    pts = point[:, None] if single else point
    y = pts.copy()
    scale = spec.feature_scale()
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(max_iter):
            g = spec.grad_f(y)
            g2 = np.sum(g * g, axis=0)
            fv = spec.f(y)
            y = y - g * (fv / g2)
            g = spec.grad_f(y)
            ghat = g / np.linalg.norm(g, axis=0)
            r = pts - y
            r_tan = r - ghat * np.sum(ghat * r, axis=0)
            y = y + r_tan
            f_res = np.abs(spec.f(y))
            tan_res = np.linalg.norm(r_tan, axis=0)
            dist = np.linalg.norm(pts - y, axis=0)
            ok = (f_res < tol) & (tan_res <= angle_tol * dist + 1e-13 * scale)
            if np.all(ok):
                return y[:, 0] if single else y
    worst = float(np.max(np.abs(spec.f(y))))
    raise NoConvergenceError(
        f"projection to '{spec.name}' did not converge", max_iter, worst
    )


def signed_distance(spec, point, tol=1e-13, max_iter=100):
    """sign(f) * |x - project(x)| for point(s)."""
    point = np.asarray(point, dtype=float)
    y = project_to_surface(spec, point, tol=tol, max_iter=max_iter)
    d = np.linalg.norm(point - y, axis=0)
    return np.sign(spec.f(point)) * d


# Normal derivative tables -----------------------------------------------------


@lru_cache(maxsize=None)
def _unit_index_tensors(nvars, degree, depth):
    """Index tensors mapping derivative axes to jet table positions.

    Entry k of the returned list has shape (nvars,) * (k + 1) and holds
    the flat index of the multi-index e_{a_0} + ... + e_{a_k} in the jet
    space (nvars, degree).
    """
    space = jets.jet_space(nvars, degree)
    out = []
    for nd in range(1, depth + 1):
        t = np.empty((nvars,) * nd, dtype=np.intp)
        for axes in itertools.product(range(nvars), repeat=nd):
            alpha = [0] * nvars
            for a in axes:
                alpha[a] += 1
            t[axes] = space.index_of[tuple(alpha)]
        out.append(t)
    return out


def _tables_from_f_jet(fjet, order):
    """SignedDistance tables for an exact distance function: n_i = d_i f.

    Batched: fjet coeffs (T, B) give tables with trailing batch axis.
    """
    nvars = fjet.space.nvars
    tensors = _unit_index_tensors(nvars, fjet.degree, order + 1)
    tabs = [fjet.coeffs[t] for t in tensors]
    n, dn = tabs[0], tabs[1]
    d2n = tabs[2] if order >= 2 else None
    d3n = tabs[3] if order >= 3 else None
    return n, dn, d2n, d3n


def _tables_from_component_jets(njets, order):
    """Tables from one jet per normal component (GradientNormalized path)."""
    nvars = njets[0].space.nvars
    tensors = _unit_index_tensors(nvars, njets[0].degree, order)
    n = np.stack([j.coeffs[0] for j in njets])
    dn = np.stack([j.coeffs[tensors[0]] for j in njets])
    d2n = np.stack([j.coeffs[tensors[1]] for j in njets]) if order >= 2 else None
    d3n = np.stack([j.coeffs[tensors[2]] for j in njets]) if order >= 3 else None
    return n, dn, d2n, d3n


def _normalized_gradient_jets(spec, points, degree):
    """Jets of grad f / |grad f| components to the given degree."""
    fjet = spec.jet(points, degree + 1)
    g = [fjet.derivative(i) for i in range(spec.dimension)]
    norm2 = g[0] * g[0]
    for gi in g[1:]:
        norm2 = norm2 + gi * gi
    inv_norm = jets.apply_function("sqrt", norm2).reciprocal()
    return [gi * inv_norm for gi in g]


_FD_STENCILS = {
    0: {(0,): 1.0},
    1: {(-1,): -0.5, (1,): 0.5},
    2: {(-1,): 1.0, (0,): -2.0, (1,): 1.0},
    3: {(-2,): -0.5, (-1,): 1.0, (1,): -1.0, (2,): 0.5},
    4: {(-2,): 1.0, (-1,): -4.0, (0,): 6.0, (1,): -4.0, (2,): 1.0},
}


def _fd_partial(values, counts, h):
    """Tensor-product central difference for one multi-index (counts per axis)."""
    total = 0.0
    per_axis = [_FD_STENCILS[c].items() for c in counts]
    for combo in itertools.product(*per_axis):
        key = tuple(o[0] for o, _ in combo)
        weight = math.prod(w for _, w in combo)
        total += weight * values[key]
    return total / h ** sum(counts)


def _numeric_distance_tables(spec, point, order, threshold=0.5):
    """Richardson-extrapolated derivative tables of the signed distance.

    Central differences at steps h and h/2 with
    h = eps^(1/(order+3)) * feature scale; the per-entry disagreement of
    the two levels is the error estimate (kept as error_bound).
    """
    nvars = spec.dimension
    h = np.finfo(float).eps ** (1.0 / (order + 3)) * spec.feature_scale()
    offsets = list(itertools.product(range(-4, 5), repeat=nvars))
    lattice = np.array(offsets, dtype=float).T * (h / 2) + point[:, None]
    d = signed_distance(spec, lattice)
    fine = {off: d[i] for i, off in enumerate(offsets)}
    coarse = {
        tuple(k // 2 for k in off): v
        for off, v in fine.items()
        if all(k % 2 == 0 for k in off)
    }

    tables = []
    worst = 0.0
    for nd in range(1, order + 2):
        t = np.zeros((nvars,) * nd)
        for axes in itertools.product(range(nvars), repeat=nd):
            counts = [0] * nvars
            for a in axes:
                counts[a] += 1
            dh = _fd_partial(coarse, counts, h)
            dh2 = _fd_partial(fine, counts, h / 2)
            t[axes] = (4.0 * dh2 - dh) / 3.0
            worst = max(worst, abs(dh2 - dh) / (1.0 + abs(t[axes])))
        tables.append(t)
    if worst > threshold:
        raise PrecisionLossError(f"numeric distance jets unreliable at {point}", worst)
    n, dn = tables[0], tables[1]
    d2n = tables[2] if order >= 2 else None
    d3n = tables[3] if order >= 3 else None
    return n, dn, d2n, d3n, worst


@dataclass(frozen=True)
class NormalJet:
    """Derivative tables of the unit normal extension at a point.

    Arrays: n (N,), dn (N, N) with dn[i, j] = d n_i / d x_j, and when the
    order allows, d2n (N, N, N) and d3n (N, N, N, N) with trailing axes
    the derivative directions.  error_bound is None for exact jets and
    the worst Richardson disagreement for numeric distance jets.
    """

    point: np.ndarray
    policy: ExtensionPolicy
    order: int
    n: np.ndarray
    dn: np.ndarray
    d2n: np.ndarray | None
    d3n: np.ndarray | None
    error_bound: float | None = None

    def unit_norm_defect(self):
        return abs(float(np.sum(self.n * self.n)) - 1.0)

    def tangency_defect(self):
        """max_j |sum_i n_i n_{i,j}|, zero when |n| = 1 exactly."""
        return float(np.max(np.abs(self.n @ self.dn)))


def _tables_batch(spec, points, policy, order):
    """(n, dn, d2n, d3n, error_bound) with trailing batch axis."""
    if policy is ExtensionPolicy.SIGNED_DISTANCE and spec.is_signed_distance:
        fjet = spec.jet(points, order + 1)
        return _tables_from_f_jet(fjet, order) + (None,)
    if policy is ExtensionPolicy.GRADIENT_NORMALIZED:
        njets = _normalized_gradient_jets(spec, points, order)
        return _tables_from_component_jets(njets, order) + (None,)
    # numeric signed distance: per-point lattices
    cols = [
        _numeric_distance_tables(spec, points[:, b], order)
        for b in range(points.shape[1])
    ]
    n = np.stack([c[0] for c in cols], axis=-1)
    dn = np.stack([c[1] for c in cols], axis=-1)
    d2n = np.stack([c[2] for c in cols], axis=-1) if order >= 2 else None
    d3n = np.stack([c[3] for c in cols], axis=-1) if order >= 3 else None
    return n, dn, d2n, d3n, max(c[4] for c in cols)


def normal_jet(spec, point, policy, order=3):
    """Unit normal derivative tables at a surface point (|f| < 1e-9).

    order <= 3: tables hold n and its derivatives up to that order
    (dn always; d2n for order >= 2; d3n for order 3).
    """
    if order > 3:
        raise ValueError("normal jet order is capped at 3")
    point = np.asarray(point, dtype=float)
    if abs(float(spec.f(point))) > 1e-9:
        raise ValueError(
            f"point is not on the surface: |f| = {abs(float(spec.f(point))):.2e}"
        )
    n, dn, d2n, d3n, err = _tables_batch(spec, point[:, None], policy, order)
    squeeze = lambda a: None if a is None else a[..., 0]
    return NormalJet(point=point, policy=policy, order=order,
                     n=squeeze(n), dn=squeeze(dn), d2n=squeeze(d2n),
                     d3n=squeeze(d3n), error_bound=err)


# Curvature samples ------------------------------------------------------------


@dataclass(frozen=True)
class CurvatureSample:
    """Per-point geometric record.

    vg_geom = M^2/2 - S2 and chi_geom = -lap M are expressed in units of
    hbar^2 / (4 mu); kappa holds the N-1 principal curvatures.
    """

    x: np.ndarray
    n: np.ndarray
    shape: np.ndarray
    M: float
    S2: float
    kappa: np.ndarray
    lapM: float
    lapLB_M: float
    vg_geom: float
    chi_geom: float
    error_bound: float | None = None

    def to_dict(self):
        return {
            "x": [float(v) for v in self.x],
            "n": [float(v) for v in self.n],
            "M": self.M,
            "S2": self.S2,
            "kappa": [float(v) for v in self.kappa],
            "lapM": self.lapM,
            "lapLB_M": self.lapLB_M,
            "vg_geom": self.vg_geom,
            "chi_geom": self.chi_geom,
        }


def principal_curvatures_batch(n, dn):
    """Eigenvalues of the symmetrized shape tensor on the tangent space.

    n has shape (N, B), dn (N, N, B).  The eigenvector most parallel to
    n carries the spurious normal eigenvalue and is discarded; survivors
    come out sorted descending, shape (N-1, B).
    """
    nvars, batch = n.shape
    sym = 0.5 * (dn + dn.transpose(1, 0, 2))
    vals, vecs = np.linalg.eigh(np.moveaxis(sym, -1, 0))  # (B, N), (B, N, N)
    alignment = np.abs(np.einsum("bik,ib->bk", vecs, n))
    drop = np.argmax(alignment, axis=1)
    mask = np.ones((batch, nvars), dtype=bool)
    mask[np.arange(batch), drop] = False
    kept = vals[mask].reshape(batch, nvars - 1)
    return np.sort(kept, axis=1)[:, ::-1].T


def curvature_fields(spec, points, policy):
    """Vectorized curvature coefficient fields at on-surface points.

    Returns a dict of arrays keyed n, dn, d2n, d3n, M, S2, gradM, hessM,
    lapM, lapLB_M, gradS2, vg_geom, chi_geom (trailing batch axis), plus
    error_bound.  This is the bulk interface used by grid builders.
    """
    points = np.asarray(points, dtype=float)
    worst = float(np.max(np.abs(spec.f(points))))
    if worst > 1e-9:
        raise ValueError(f"points must lie on the surface; worst |f| = {worst:.2e}")
    n, dn, d2n, d3n, err = _tables_batch(spec, points, policy, order=3)
    m = -np.einsum("ii...->...", dn)
    s2 = np.einsum("ij...,ij...->...", dn, dn)
    grad_m = -np.einsum("iik...->k...", d2n)
    hess_m = -np.einsum("iijk...->jk...", d3n)
    lap_m = np.einsum("jj...->...", hess_m)
    grad_s2 = 2.0 * np.einsum("il...,ilk...->k...", dn, d2n)
    eye = np.eye(spec.dimension)[..., None]
    proj = eye - n[:, None, :] * n[None, :, :]
    ndg = np.einsum("i...,i...->...", n, grad_m)
    dG = (
        -np.einsum("ik...,...->ki...", dn, ndg)
        - np.einsum("lk...,l...,i...->ki...", dn, grad_m, n)
        + np.einsum("il...,lk...->ki...", proj, hess_m)
    )
    lap_lb = np.einsum("ik...,ki...->...", proj, dG)
    return {
        "n": n, "dn": dn, "d2n": d2n, "d3n": d3n,
        "M": m, "S2": s2, "gradM": grad_m, "hessM": hess_m,
        "lapM": lap_m, "lapLB_M": lap_lb, "gradS2": grad_s2,
        "vg_geom": m * m / 2.0 - s2, "chi_geom": -lap_m,
        "error_bound": err,
    }


def curvature_samples(spec, points, policy=ExtensionPolicy.SIGNED_DISTANCE):
    """CurvatureSample list for a batch of on-surface points (N, B)."""
    points = np.asarray(points, dtype=float)
    fields = curvature_fields(spec, points, policy)
    kappa = principal_curvatures_batch(fields["n"], fields["dn"])
    out = []
    for b in range(points.shape[1]):
        out.append(CurvatureSample(
            x=points[:, b],
            n=fields["n"][:, b],
            shape=fields["dn"][:, :, b],
            M=float(fields["M"][b]),
            S2=float(fields["S2"][b]),
            kappa=kappa[:, b],
            lapM=float(fields["lapM"][b]),
            lapLB_M=float(fields["lapLB_M"][b]),
            vg_geom=float(fields["vg_geom"][b]),
            chi_geom=float(fields["chi_geom"][b]),
            error_bound=fields["error_bound"],
        ))
    return out


def curvature_sample(spec, point, policy=ExtensionPolicy.SIGNED_DISTANCE):
    """Full curvature record at one surface point."""
    point = np.asarray(point, dtype=float)
    if abs(float(spec.f(point))) > 1e-9:
        raise ValueError(
            f"point is not on the surface: |f| = {abs(float(spec.f(point))):.2e}"
        )
    return curvature_samples(spec, point[:, None], policy)[0]


def lb_laplacian_mean_curvature(spec, point, policy=ExtensionPolicy.SIGNED_DISTANCE):
    """Laplace-Beltrami of M at the point (intrinsic surface Laplacian)."""
    return curvature_sample(spec, point, policy).lapLB_M


@dataclass(frozen=True)
class SplitReport:
    """Decomposition lap M = lap_LB M (+/-) d_n (M^2/2 - S2), both signs."""

    lapM: float
    lapLB_M: float
    normal_term: float
    residual: float          # lapM - lapLB_M - normal_term, as printed
    residual_flipped: float  # lapM - lapLB_M + normal_term


def split_report(spec, point, policy=ExtensionPolicy.SIGNED_DISTANCE):
    point = np.asarray(point, dtype=float)
    fields = curvature_fields(spec, point[:, None], policy)
    lap_m = float(fields["lapM"][0])
    lap_lb = float(fields["lapLB_M"][0])
    m = float(fields["M"][0])
    n = fields["n"][:, 0]
    normal_term = float(n @ (m * fields["gradM"][:, 0] - fields["gradS2"][:, 0]))
    return SplitReport(
        lapM=lap_m,
        lapLB_M=lap_lb,
        normal_term=normal_term,
        residual=lap_m - lap_lb - normal_term,
        residual_flipped=lap_m - lap_lb + normal_term,
    )


def split_residual(spec, point, policy=ExtensionPolicy.SIGNED_DISTANCE):
    """lapM - lapLB_M - n . grad(M^2/2 - S2).

    Zero confirms the printed normal/surface split; a stable nonzero
    value is a reportable finding, not a failure.
    """
    return split_report(spec, point, policy).residual


# SI force estimate ------------------------------------------------------------


@dataclass(frozen=True)
class ForceEstimate:
    vector_newton: np.ndarray
    magnitude_newton: float
    magnitude_piconewton: float


def si_force_magnitude(sample, scale):
    """Curvature-induced force chi = -(hbar^2 / 4 mu) lap M n in SI units.

    lapM is taken in model units and converted with the cube of the
    length unit.
    """
    lap_si = sample.lapM / scale.length_unit_m ** 3
    vector = -(scale.hbar ** 2 / (4.0 * scale.mass_kg)) * lap_si * sample.n
    magnitude = float(np.linalg.norm(vector))
    return ForceEstimate(vector, magnitude, magnitude * 1e12)


def curvature_force_scale(mass_kg, length_m, hbar=HBAR_SI):
    """Order-of-magnitude force hbar^2 / (mu a^3) in piconewtons."""
    return hbar ** 2 / (mass_kg * length_m ** 3) * 1e12


# Field sampling ----------------------------------------------------------------


def _parametric_points(spec, resolution):
    name = spec.name
    p = spec.params
    if isinstance(resolution, int):
        resolution = (resolution,) if name == "circle" else (resolution, resolution)
    if name == "circle":
        (n,) = resolution
        th = np.linspace(0.0, 2.0 * np.pi, n, endpoint=False)
        return np.stack([p["a"] * np.cos(th), p["a"] * np.sin(th)])
    if name in ("sphere", "spheroid"):
        nt, nph = resolution
        a = p["a"]
        b = p.get("b", a)
        t = np.linspace(-np.pi / 2, np.pi / 2, nt + 2)[1:-1]  # open: skip poles
        ph = np.linspace(0.0, 2.0 * np.pi, nph, endpoint=False)
        T, PH = np.meshgrid(t, ph, indexing="ij")
        rho = a * np.cos(T)
        return np.stack([rho * np.cos(PH), rho * np.sin(PH),
                         b * np.sin(T)]).reshape(3, -1)
    if name == "torus":
        nth, nph = resolution
        th = np.linspace(0.0, 2.0 * np.pi, nth, endpoint=False)
        ph = np.linspace(0.0, 2.0 * np.pi, nph, endpoint=False)
        TH, PH = np.meshgrid(th, ph, indexing="ij")
        rho = p["R"] + p["r"] * np.sin(TH)
        return np.stack([rho * np.cos(PH), rho * np.sin(PH),
                         p["r"] * np.cos(TH)]).reshape(3, -1)
    if name == "cylinder":
        nth, nz = resolution
        th = np.linspace(0.0, 2.0 * np.pi, nth, endpoint=False)
        z = np.linspace(-p["a"], p["a"], nz)
        TH, Z = np.meshgrid(th, z, indexing="ij")
        return np.stack([p["a"] * np.cos(TH), p["a"] * np.sin(TH), Z]).reshape(3, -1)
    if name == "plane":
        nx, ny = resolution
        u = np.linspace(-1.0, 1.0, nx)
        v = np.linspace(-1.0, 1.0, ny)
        U, V = np.meshgrid(u, v, indexing="ij")
        return np.stack([U, V, np.zeros_like(U)]).reshape(3, -1)
    raise ValueError(f"no parametric grid for surface '{spec.name}'")


def _random_surface_points(spec, count, seed):
    rng = np.random.default_rng(seed)
    p = spec.params
    if spec.name == "circle":
        th = rng.uniform(0, 2 * np.pi, count)
        pts = np.stack([np.cos(th), np.sin(th)]) * p["a"]
    elif spec.name in ("sphere", "spheroid"):
        a = p["a"]
        b = p.get("b", a)
        t = np.arcsin(rng.uniform(-1, 1, count))
        ph = rng.uniform(0, 2 * np.pi, count)
        pts = np.stack([a * np.cos(t) * np.cos(ph), a * np.cos(t) * np.sin(ph),
                        b * np.sin(t)])
    elif spec.name == "torus":
        th = rng.uniform(0, 2 * np.pi, count)
        ph = rng.uniform(0, 2 * np.pi, count)
        rho = p["R"] + p["r"] * np.sin(th)
        pts = np.stack([rho * np.cos(ph), rho * np.sin(ph), p["r"] * np.cos(th)])
    elif spec.name == "cylinder":
        th = rng.uniform(0, 2 * np.pi, count)
        z = rng.uniform(-p["a"], p["a"], count)
        pts = np.stack([p["a"] * np.cos(th), p["a"] * np.sin(th), z])
    elif spec.name == "plane":
        u = rng.uniform(-1, 1, (2, count))
        pts = np.stack([u[0], u[1], np.zeros(count)])
    else:
        raise ValueError(f"random sampling needs a catalog surface, got '{spec.name}'")
    # small normal offset, then projected back: exercises the projection
    offset = rng.uniform(-0.05, 0.05, count) * spec.feature_scale()
    pts = pts + spec.grad_f(pts) * offset
    return project_to_surface(spec, pts)


def sample_field(spec, policy, sampling="grid", resolution=None, count=None, seed=0):
    """Curvature samples over the surface; deterministic given the seed.

    sampling='grid' places points on the catalog parametric grid at the
    given resolution; sampling='random' draws `count` seeded random
    points and projects them to the surface.
    """
    if sampling == "grid":
        if not resolution:
            return []
        pts = _parametric_points(spec, resolution)
    elif sampling == "random":
        if not count:
            return []
        pts = _random_surface_points(spec, count, seed)
    else:
        raise ValueError(f"unknown sampling mode '{sampling}'")
    pts = project_to_surface(spec, pts, tol=1e-12)
    return curvature_samples(spec, pts, policy)


def samples_to_csv(samples):
    """Flat CSV text with one row per sample and a header row."""
    if not samples:
        return ""
    nvars = len(samples[0].x)
    nk = len(samples[0].kappa)
    header = (
        [f"x{i}" for i in range(nvars)]
        + [f"n{i}" for i in range(nvars)]
        + ["M", "S2"]
        + [f"kappa{i}" for i in range(nk)]
        + ["lapM", "lapLB_M", "vg_geom", "chi_geom"]
    )
    rows = [",".join(header)]
    for s in samples:
        cells = (
            list(s.x) + list(s.n) + [s.M, s.S2] + list(s.kappa)
            + [s.lapM, s.lapLB_M, s.vg_geom, s.chi_geom]
        )
        rows.append(",".join(format(float(c), ".17g") for c in cells))
    return "\n".join(rows) + "\n"


# Scalar fields for optimization -------------------------------------------------


def _field_jet(spec, point, policy, field):
    """Jet (degree >= 1) of the chosen curvature field at a point.

    Exact path only: GradientNormalized, or SignedDistance with a
    signed-distance f.
    """
    n_degree = {"M": 2, "vg_geom": 2, "lapM": 4}[field]
    if policy is ExtensionPolicy.SIGNED_DISTANCE and spec.is_signed_distance:
        fjet = spec.jet(point, n_degree + 1)
        njets = [fjet.derivative(i) for i in range(spec.dimension)]
    else:
        njets = _normalized_gradient_jets(spec, point, n_degree)
    m_jet = -sum(nj.derivative(i) for i, nj in enumerate(njets))
    if field == "M":
        return m_jet
    if field == "vg_geom":
        s2 = None
        for nj in njets:
            for axis in range(spec.dimension):
                term = nj.derivative(axis)
                term = term * term
                s2 = term if s2 is None else s2 + term
        return m_jet * m_jet / 2.0 - s2
    lap = None
    for j in range(spec.dimension):
        term = m_jet.derivative(j).derivative(j)
        lap = term if lap is None else lap + term
    return lap


def field_value(spec, point, policy, field):
    sample = curvature_sample(spec, point, policy)
    return float(getattr(sample, field))


def field_value_and_gradient(spec, point, policy, field):
    """Field value and its ambient gradient at a surface point.

    Uses exact jets when available; otherwise (SignedDistance on a
    non-distance f) tangent-frame central differences of projected
    samples, which is what the numeric extension admits.
    """
    point = np.asarray(point, dtype=float)
    exact = (policy is ExtensionPolicy.GRADIENT_NORMALIZED
             or (policy is ExtensionPolicy.SIGNED_DISTANCE and spec.is_signed_distance))
    if not exact:
        value = field_value(spec, point, policy, field)
        return value, _tangent_fd_gradient(spec, point, policy, field)
    fj = _field_jet(spec, point, policy, field)
    nvars = spec.dimension
    grad = np.array([
        jets.jet_partial(fj, tuple(1 if k == i else 0 for k in range(nvars)))
        for i in range(nvars)
    ])
    return float(fj.value), grad


def tangent_frame(n):
    """Orthonormal basis of the tangent space (rows), from the normal."""
    nvars = len(n)
    basis = []
    for k in range(nvars):
        e = np.zeros(nvars)
        e[k] = 1.0
        v = e - n * (n @ e)
        for b in basis:
            v = v - b * (b @ v)
        norm = np.linalg.norm(v)
        if norm > 1e-8:
            basis.append(v / norm)
        if len(basis) == nvars - 1:
            break
    return np.array(basis)


def _tangent_fd_gradient(spec, point, policy, field, step_factor=1e-4):
    nj = normal_jet(spec, point, policy, order=1)
    frame = tangent_frame(nj.n)
    h = step_factor * spec.feature_scale()
    grad = np.zeros(spec.dimension)
    for t in frame:
        plus = project_to_surface(spec, point + h * t)
        minus = project_to_surface(spec, point - h * t)
        df = (field_value(spec, plus, policy, field)
              - field_value(spec, minus, policy, field)) / (2 * h)
        grad += df * t
    return grad
