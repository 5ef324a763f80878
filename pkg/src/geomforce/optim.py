"""Extrema of curvature fields on the constraint surface f = 0.

Multistart projected ascent/descent with exact field gradients from
jets, tangential steps, re-projection each step, and a tangent-frame
Newton polish.  Axisymmetric catalog surfaces collapse hits that lie on
the same orbit into a single record with an orbit descriptor.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import geometry as geo
from .geometry import ExtensionPolicy

AXISYMMETRIC = ("sphere", "cylinder", "spheroid", "torus")


class NoCriticalPointFoundError(RuntimeError):
    """Every start diverged; carries per-start diagnostics."""

    def __init__(self, message, diagnostics):
        self.diagnostics = diagnostics
        super().__init__(message)


@dataclass
class CriticalPoint:
    location: np.ndarray
    value: float
    classification: str  # max | min | saddle | degenerate-orbit
    grad_norm: float
    multiplicity: int = 1
    orbit: str | None = None

    def to_dict(self):
        return {
            "location": [float(v) for v in self.location],
            "value": self.value,
            "class": self.classification,
            "grad_norm": self.grad_norm,
            "multiplicity": self.multiplicity,
            "orbit": self.orbit,
        }


@dataclass
class SearchConfig:
    starts: int = 24
    seed: int = 0
    tol: float = 1e-8
    max_iter: int = 200
    merge_tol: float = 1e-5  # times feature scale
    step0: float = 0.1       # times feature scale
    step_floor: float = 1e-12


def _tangential(spec, x, g):
    n = spec.grad_f(x)
    n = n / np.linalg.norm(n)
    return g - n * (n @ g)


def _ascend(spec, x0, field, policy, direction, cfg, scale):
    """Projected gradient walk; direction +1 climbs, -1 descends."""
    x = geo.project_to_surface(spec, np.asarray(x0, dtype=float))
    value, grad = geo.field_value_and_gradient(spec, x, policy, field)
    step = cfg.step0 * scale
    for _ in range(cfg.max_iter):
        g_tan = _tangential(spec, x, grad)
        gnorm = np.linalg.norm(g_tan)
        if gnorm < cfg.tol:
            return x, value, gnorm, True
        moved = False
        while step >= cfg.step_floor:
            trial = geo.project_to_surface(spec, x + direction * step * g_tan / gnorm)
            v_new, g_new = geo.field_value_and_gradient(spec, trial, policy, field)
            if direction * (v_new - value) > 0:
                x, value, grad = trial, v_new, g_new
                step = min(step * 2.0, cfg.step0 * scale)
                moved = True
                break
            step *= 0.5
        if not moved:
            break
    x, value, gnorm = _newton_polish(spec, x, field, policy, cfg, scale)
    return x, value, gnorm, gnorm < cfg.tol


def _newton_polish(spec, x, field, policy, cfg, scale, iterations=12):
    """Tangent-frame Newton steps on the projected gradient."""
    for _ in range(iterations):
        value, grad = geo.field_value_and_gradient(spec, x, policy, field)
        g_tan = _tangential(spec, x, grad)
        gnorm = np.linalg.norm(g_tan)
        if gnorm < 1e-3 * cfg.tol:
            break
        n = spec.grad_f(x)
        frame = geo.tangent_frame(n / np.linalg.norm(n))
        hess = _surface_hessian(spec, x, field, policy, frame, 1e-4 * scale)
        rhs = frame @ g_tan
        try:
            delta = np.linalg.solve(hess, -rhs)
        except np.linalg.LinAlgError:
            break
        if np.linalg.norm(delta) > 0.2 * scale:  # distrust huge Newton steps
            delta = delta * (0.2 * scale / np.linalg.norm(delta))
        x = geo.project_to_surface(spec, x + frame.T @ delta)
    value, grad = geo.field_value_and_gradient(spec, x, policy, field)
    gnorm = float(np.linalg.norm(_tangential(spec, x, grad)))
    return x, value, gnorm


def _surface_hessian(spec, x, field, policy, frame, h):
    """Second differences of the field in an orthonormal tangent frame."""
    dim = len(frame)

    def fval(p):
        return geo.field_value(spec, geo.project_to_surface(spec, p), policy, field)

    f0 = fval(x)
    hess = np.zeros((dim, dim))
    for i in range(dim):
        fp = fval(x + h * frame[i])
        fm = fval(x - h * frame[i])
        hess[i, i] = (fp - 2.0 * f0 + fm) / h ** 2
        for j in range(i + 1, dim):
            fpp = fval(x + h * (frame[i] + frame[j]))
            fpm = fval(x + h * (frame[i] - frame[j]))
            fmp = fval(x - h * (frame[i] - frame[j]))
            fmm = fval(x - h * (frame[i] + frame[j]))
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h ** 2)
    return hess


def classify_critical_point(spec, point, field, policy, eig_tol=1e-6):
    """max/min/saddle/degenerate-orbit from tangential second differences."""
    point = geo.project_to_surface(spec, np.asarray(point, dtype=float))
    n = spec.grad_f(point)
    frame = geo.tangent_frame(n / np.linalg.norm(n))
    h = 1e-4 * spec.feature_scale()
    hess = _surface_hessian(spec, point, field, policy, frame, h)
    eigs = np.linalg.eigvalsh(hess)
    if np.any(np.abs(eigs) <= eig_tol):
        return "degenerate-orbit"
    if np.all(eigs < 0):
        return "max"
    if np.all(eigs > 0):
        return "min"
    return "saddle"


def _orbit_signature(spec, location):
    """Rotational invariant for axisymmetric surfaces (rho, z)."""
    rho = float(np.linalg.norm(location[:2]))
    z = float(location[2]) if len(location) > 2 else 0.0
    return rho, z


def find_critical_points(spec, field, policy=ExtensionPolicy.GRADIENT_NORMALIZED,
                         config=None, initial_points=None):
    """Locate critical points of a curvature field on the surface.

    field is one of 'lapM', 'vg_geom', 'M'.  Deterministic for a fixed
    config seed.  Constant fields short-circuit to a single whole-surface
    degenerate-orbit record.
    """
    if field not in geo.FIELD_NAMES:
        raise ValueError(f"field must be one of {geo.FIELD_NAMES}")
    cfg = config or SearchConfig()
    scale = spec.feature_scale()
    if initial_points is None:
        starts = geo._random_surface_points(spec, cfg.starts, cfg.seed)
    else:
        starts = np.asarray(initial_points, dtype=float)
    values = np.array([
        geo.field_value(spec, geo.project_to_surface(spec, starts[:, i]), policy, field)
        for i in range(starts.shape[1])
    ])
    span = float(values.max() - values.min())
    if span < 1e-10 * (1.0 + float(np.abs(values).max())):
        return [CriticalPoint(
            location=starts[:, 0],
            value=float(values[0]),
            classification="degenerate-orbit",
            grad_norm=0.0,
            multiplicity=starts.shape[1],
            orbit="entire surface (constant field)",
        )]

    hits = []
    diagnostics = []
    for i in range(starts.shape[1]):
        for direction in (+1.0, -1.0):
            x, value, gnorm, ok = _ascend(spec, starts[:, i], field, policy,
                                          direction, cfg, scale)
            if ok:
                hits.append((x, value, gnorm))
            else:
                diagnostics.append({"start": i, "direction": direction,
                                    "grad_norm": gnorm, "value": value})
    if not hits:
        raise NoCriticalPointFoundError(
            f"no critical point of {field} found on '{spec.name}'", diagnostics
        )

    merged = []
    for x, value, gnorm in hits:
        for rec in merged:
            if np.linalg.norm(rec.location - x) < cfg.merge_tol * scale:
                rec.multiplicity += 1
                if gnorm < rec.grad_norm:
                    rec.location, rec.value, rec.grad_norm = x, value, gnorm
                break
        else:
            merged.append(CriticalPoint(location=x, value=value,
                                        classification="", grad_norm=gnorm))

    for rec in merged:
        rec.classification = classify_critical_point(spec, rec.location, field, policy)

    if spec.name in AXISYMMETRIC:
        merged = _collapse_orbits(spec, merged, cfg.merge_tol * scale)

    merged.sort(key=lambda r: (round(r.value, 10),
                               tuple(np.round(r.location, 8))))
    return merged


def _collapse_orbits(spec, records, tol):
    groups = []
    for rec in records:
        sig = _orbit_signature(spec, rec.location)
        for group in groups:
            gsig = _orbit_signature(spec, group[0].location)
            if (abs(sig[0] - gsig[0]) < 10 * tol and abs(sig[1] - gsig[1]) < 10 * tol
                    and abs(rec.value - group[0].value) < 1e-6 * (1 + abs(rec.value))):
                group.append(rec)
                break
        else:
            groups.append([rec])
    out = []
    for group in groups:
        best = min(group, key=lambda r: r.grad_norm)
        best.multiplicity = sum(r.multiplicity for r in group)
        rho, z = _orbit_signature(spec, best.location)
        # an orbit is real when several distinct hits share the signature
        # or the classifier saw a flat direction
        if len(group) > 1 and rho > 10 * tol:
            spread = max(np.linalg.norm(r.location - best.location) for r in group)
            if spread > 10 * tol or best.classification == "degenerate-orbit":
                best.classification = "degenerate-orbit"
                best.orbit = f"circle z={z:.6g}, rho={rho:.6g}"
        elif best.classification == "degenerate-orbit" and rho > 10 * tol:
            best.orbit = f"circle z={z:.6g}, rho={rho:.6g}"
        out.append(best)
    return out


def to_report(points):
    """JSON-ready report: signed ordering plus magnitude ranking."""
    signed = [p.to_dict() for p in sorted(points, key=lambda p: p.value)]
    by_magnitude = [p.to_dict() for p in
                    sorted(points, key=lambda p: -abs(p.value))]
    return {"critical_points": signed, "by_magnitude": by_magnitude}
