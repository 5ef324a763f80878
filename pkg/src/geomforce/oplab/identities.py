"""Numerical adjudication of momentum/Hamiltonian operator identities.

Each identity is built twice from independent ingredients (commutators
of discretized operators on one side, closed-form coefficient fields
from exact jets on the other) and compared on band-limited test states
across a family of grid refinements.  The outcome is a verdict, never an
assertion: confirmed needs a small residual at the finest grid plus a
non-increasing residual series, refuted needs residuals stably far above
tolerance, and anything else is inconclusive.

Identity ids:

* EQ3_MAIN      [p_j, H]/(i hbar) vs the symmetrized centripetal force
                plus the curvature-gradient quantum force.
* EQ8_PP        [p_i, p_j] vs its symmetrized first-order form.
* EQ10_SCALAR   [p_j, scalar] vs the printed +2 i hbar expression; also
                compared against -i hbar (grad_S)_j scalar to settle the
                sign question.
* EQ11_F_SIMPL  the four-term quartic F_j vs its printed simplification.
* EQ13_G_SIMPL  the four-term quartic G_j vs its printed simplification.
* H_FORMS       the two Hamiltonian forms.
* HERMITICITY   weighted symmetry of p_j and H.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .grid import build_grid
from .linops import LinOp, multiplication, norm_w, spectral_derivative
from .operators import (
    build_hamiltonian,
    build_momentum,
    centripetal_quadratic,
    commutator,
    hermiticity_defect,
    random_band_states,
    residual_on_testspace,
)

IDENTITY_IDS = (
    "EQ3_MAIN",
    "EQ8_PP",
    "EQ10_SCALAR",
    "EQ11_F_SIMPL",
    "EQ13_G_SIMPL",
    "H_FORMS",
    "HERMITICITY",
)


@dataclass
class IdentityVerdict:
    identity: str
    grids: list
    residuals: list
    slope: float
    verdict: str
    witness: dict | None = None
    notes: list = field(default_factory=list)

    def to_dict(self):
        return {
            "identity": self.identity,
            "grids": self.grids,
            "residuals": self.residuals,
            "slope": self.slope,
            "verdict": self.verdict,
            "witness": self.witness,
            "notes": self.notes,
        }


def _quartic(grid, ps, coef):
    """sum_{l,k} { c p_l p_k + p_l c p_k + p_k c p_l + p_k p_l c }.

    coef(l, k) returns the pointwise coefficient field c_{lk}.
    """
    nvars = grid.ndim_embed
    fields = [[coef(l, k) for k in range(nvars)] for l in range(nvars)]

    def apply_fn(psi):
        p_psi = [p(psi) for p in ps]
        out = np.zeros_like(psi)
        for l in range(nvars):
            acc2 = np.zeros_like(psi)
            for k in range(nvars):
                c = fields[l][k]
                out += c * ps[l](p_psi[k])      # c p_l p_k
                acc2 += c * p_psi[k]            # feeds p_l c p_k
                out += ps[k](c * p_psi[l])      # p_k c p_l
            out += ps[l](acc2)
        for k in range(nvars):
            acc4 = np.zeros_like(psi)
            for l in range(nvars):
                acc4 += ps[l](fields[l][k] * psi)
            out += ps[k](acc4)                  # p_k p_l c
        return out

    return LinOp(apply_fn, grid.shape, "quartic")


def _coefficients(grid):
    g = grid.geo
    n, dn, d2n, d3n = g["n"], g["dn"], g["d2n"], g["d3n"]
    w = 0.5 * g["gradS2"]  # W_j = n_{i,l} n_{i,l,j}
    n_dot_w = np.einsum("k...,k...->...", n, w)
    c4 = np.einsum("il...,iljk...,k...->j...", dn, d3n, n)  # n_k n_{il} n_{il,jk}
    n_iill = np.einsum("iill...->...", d3n)
    return {"n": n, "dn": dn, "d2n": d2n, "d3n": d3n, "W": w,
            "n_dot_W": n_dot_w, "C4": c4, "n_iill": n_iill,
            "M": g["M"], "S2": g["S2"], "lapM": g["lapM"]}


def _pairs_eq3(grid, hbar, mu):
    ps = build_momentum(grid, hbar)
    h = build_hamiltonian(grid, hbar, mu, form="momentum")
    q = centripetal_quadratic(grid, hbar)
    c = _coefficients(grid)
    pairs = []
    for j in range(grid.ndim_embed):
        nj = c["n"][j]
        lhs = (1.0 / (1j * hbar)) * commutator(ps[j], h)
        quantum = -(hbar ** 2 / (4.0 * mu)) * c["lapM"] * nj

        def rhs_apply(psi, nj=nj, quantum=quantum):
            return (-0.5 / mu) * (nj * q(psi) + q(nj * psi)) + quantum * psi

        pairs.append((lhs, LinOp(rhs_apply, grid.shape, f"rhs3_{j}")))
    return pairs


def _pairs_eq8(grid, hbar, mu):
    ps = build_momentum(grid, hbar)
    c = _coefficients(grid)
    n, dn = c["n"], c["dn"]
    pairs = []
    for i in range(grid.ndim_embed):
        for j in range(i + 1, grid.ndim_embed):
            lhs = commutator(ps[i], ps[j])
            coefs = [n[j] * dn[i, l] - n[i] * dn[j, l]
                     for l in range(grid.ndim_embed)]

            def rhs_apply(psi, coefs=coefs):
                out = np.zeros_like(psi)
                for l, cl in enumerate(coefs):
                    out += cl * ps[l](psi) + ps[l](cl * psi)
                return (1j * hbar / 2.0) * out

            pairs.append((lhs, LinOp(rhs_apply, grid.shape, f"rhs8_{i}{j}")))
    return pairs


def _eq10_operators(grid, hbar, mu):
    """(commutator, printed form, reference form) triples per component."""
    ps = build_momentum(grid, hbar)
    c = _coefficients(grid)
    scalar = (hbar ** 2 / (4.0 * mu)) * c["S2"]
    triples = []
    for j in range(grid.ndim_embed):
        lhs = commutator(ps[j], multiplication(scalar, "S2"))
        tangential_w = c["W"][j] - c["n"][j] * c["n_dot_W"]
        printed = multiplication(
            2j * hbar * (hbar ** 2 / (4.0 * mu)) * tangential_w, "printed10"
        )
        reference = multiplication(
            -2j * hbar * (hbar ** 2 / (4.0 * mu)) * tangential_w, "reference10"
        )
        triples.append((lhs, printed, reference))
    return triples


def _pairs_eq11(grid, hbar, mu):
    ps = build_momentum(grid, hbar)
    c = _coefficients(grid)
    n, dn = c["n"], c["dn"]
    pairs = []
    for j in range(grid.ndim_embed):
        quartic = _quartic(grid, ps, lambda l, k, j=j: dn[j, l] * n[k])
        f_def = (1j * hbar / 2.0) * quartic
        printed = multiplication(-1j * hbar ** 3 * c["W"][j], f"printed11_{j}")
        pairs.append((f_def, printed))
    return pairs


def _pairs_eq13(grid, hbar, mu):
    ps = build_momentum(grid, hbar)
    q = centripetal_quadratic(grid, hbar)
    c = _coefficients(grid)
    n, dn = c["n"], c["dn"]
    pairs = []
    for j in range(grid.ndim_embed):
        quartic = _quartic(grid, ps, lambda l, k, j=j: n[j] * dn[k, l])
        g_def = (-1j * hbar / 2.0) * quartic
        nj = n[j]
        cubic = c["W"][j] - 2.0 * nj * c["C4"][j] - nj * c["n_iill"]

        def rhs_apply(psi, nj=nj, cubic=cubic):
            return (-2j * hbar) * (nj * q(psi) + q(nj * psi)) \
                - 1j * hbar ** 3 * cubic * psi

        pairs.append((g_def, LinOp(rhs_apply, grid.shape, f"printed13_{j}")))
    return pairs


def _pairs_hforms(grid, hbar, mu):
    return [(build_hamiltonian(grid, hbar, mu, "lb"),
             build_hamiltonian(grid, hbar, mu, "momentum"))]


_BUILDERS = {
    "EQ3_MAIN": _pairs_eq3,
    "EQ8_PP": _pairs_eq8,
    "EQ11_F_SIMPL": _pairs_eq11,
    "EQ13_G_SIMPL": _pairs_eq13,
    "H_FORMS": _pairs_hforms,
}


def _fit_slope(sizes, residuals):
    """d log(residual) / d log(n); meaningless at the roundoff floor."""
    r = np.asarray(residuals, dtype=float)
    if r.max() < 1e-13:
        return 0.0
    x = np.log(np.asarray(sizes, dtype=float))
    y = np.log(np.maximum(r, 1e-16))
    if len(x) < 2:
        return 0.0
    return float(np.polyfit(x, y, 1)[0])


def _judge(residuals, tol):
    r = np.asarray(residuals, dtype=float)
    monotone = all(r[k + 1] <= r[k] * 1.25 + 1e-14 for k in range(len(r) - 1))
    if r[-1] < tol and monotone:
        return "confirmed"
    stable = (r > 100.0 * tol).all() and (r.max() / max(r.min(), 1e-300) < 10.0)
    if stable:
        return "refuted"
    return "inconclusive"


def check_identity(grids, identity_id, hbar=1.0, mu=1.0, tol=1e-10,
                   count=8, seed=0):
    """Adjudicate one identity over a family of at least 3 grids."""
    if len(grids) < 3:
        raise ValueError("need a grid family of at least 3 sizes")
    sizes = [g.shape[0] for g in grids]
    grid_labels = ["x".join(str(s) for s in g.shape) for g in grids]
    notes = []
    residuals = []
    witness = None

    if identity_id == "HERMITICITY":
        for g in grids:
            ops = build_momentum(g, hbar) + [build_hamiltonian(g, hbar, mu, "lb"),
                                             build_hamiltonian(g, hbar, mu, "momentum")]
            defect = max(hermiticity_defect(op, g, seed=seed) for op in ops)
            residuals.append(defect)
        verdict = _judge(residuals, tol)
        return IdentityVerdict("HERMITICITY", grid_labels, residuals,
                               _fit_slope(sizes, residuals), verdict,
                               {"seed": seed}, notes)

    if identity_id == "EQ10_SCALAR":
        pair_residuals = {"lhs_vs_printed": [], "lhs_vs_reference": [],
                          "printed_vs_reference": []}
        degenerate = True
        for g, label in zip(grids, grid_labels):
            triples = _eq10_operators(g, hbar, mu)
            worst = {k: 0.0 for k in pair_residuals}
            for lhs, printed, reference in triples:
                r1, w1 = residual_on_testspace(lhs, printed, g, count, seed)
                r2, _ = residual_on_testspace(lhs, reference, g, count, seed)
                r3, _ = residual_on_testspace(printed, reference, g, count, seed)
                if r1 >= worst["lhs_vs_printed"]:
                    witness = {"grid": label, "state_index": w1, "seed": seed}
                worst["lhs_vs_printed"] = max(worst["lhs_vs_printed"], r1)
                worst["lhs_vs_reference"] = max(worst["lhs_vs_reference"], r2)
                worst["printed_vs_reference"] = max(worst["printed_vs_reference"], r3)
                psi = random_band_states(g, 1, seed)[0]
                if norm_w(g.weights, lhs(psi)) > 1e-10 or \
                        norm_w(g.weights, printed(psi)) > 1e-10:
                    degenerate = False
            for k in pair_residuals:
                pair_residuals[k].append(worst[k])
        residuals = pair_residuals["lhs_vs_printed"]
        verdict = _judge(residuals, tol)
        if degenerate:
            notes.append(
                "degenerate on this surface: both sides vanish identically "
                "(scalar field is constant), so the sign question is not "
                "exercised here"
            )
        else:
            agree = min(pair_residuals, key=lambda k: pair_residuals[k][-1])
            notes.append(
                "sign adjudication: residuals at finest grid are "
                + ", ".join(f"{k}={v[-1]:.3e}" for k, v in pair_residuals.items())
                + f"; agreeing pair: {agree}"
            )
        notes.append(
            "reference form is -i*hbar*(grad_S)_j applied to the scalar; "
            "printed form has the opposite sign of the reference"
        )
        return IdentityVerdict("EQ10_SCALAR", grid_labels, residuals,
                               _fit_slope(sizes, residuals), verdict,
                               witness, notes)

    builder = _BUILDERS[identity_id]
    for g in grids:
        pairs = builder(g, hbar, mu)
        worst, worst_witness = 0.0, None
        for a, b in pairs:
            value, idx = residual_on_testspace(a, b, g, count, seed)
            if value >= worst:
                worst, worst_witness = value, idx
        residuals.append(worst)
        witness = {"grid": "x".join(str(s) for s in g.shape),
                   "state_index": worst_witness, "seed": seed}
    verdict = _judge(residuals, tol)

    if identity_id in ("EQ11_F_SIMPL", "EQ13_G_SIMPL"):
        notes.append(_construction_note(grids[-1], hbar, mu, count, seed))
    return IdentityVerdict(identity_id, grid_labels, residuals,
                           _fit_slope(sizes, residuals), verdict, witness, notes)


def _construction_note(grid, hbar, mu, count, seed):
    """Sanity: the two quartics add up to [p_j, p^2] by construction."""
    ps = build_momentum(grid, hbar)
    c = _coefficients(grid)
    n, dn = c["n"], c["dn"]

    def p_squared(psi):
        out = np.zeros_like(psi)
        for p in ps:
            out += p(p(psi))
        return out

    p2 = LinOp(p_squared, grid.shape, "p2")
    worst = 0.0
    for j in range(grid.ndim_embed):
        f_def = (1j * hbar / 2.0) * _quartic(grid, ps,
                                             lambda l, k, j=j: dn[j, l] * n[k])
        g_def = (-1j * hbar / 2.0) * _quartic(grid, ps,
                                              lambda l, k, j=j: n[j] * dn[k, l])
        lhs = commutator(ps[j], p2)
        value, _ = residual_on_testspace(lhs, f_def + g_def, grid, count, seed)
        worst = max(worst, value)
    return (f"construction check: [p_j, p^2] vs F_j + G_j (defined forms) "
            f"residual {worst:.3e} at finest grid")


# Circle anchors -----------------------------------------------------------------


def circle_anchor_report(grid, hbar=1.0, mu=1.0, n_eigs=10, seed=0):
    """Hard closed-form checks on the circle.

    Eigenvalues of H are compared against the closed-form spectrum
    hbar^2 m^2 / (2 mu a^2) + V_G; the excitation gaps against
    hbar^2 m^2 / (2 mu a^2); the p^2 action against
    (-d^2_theta + 1/4) * hbar^2 / a^2; and n.p against multiplication by
    -i hbar M / 2.
    """
    if grid.kind != "circle":
        raise ValueError("anchors are defined on the circle grid")
    a = grid.params["a"]
    vg = (hbar ** 2 / (4.0 * mu)) * float(grid.geo["vg_geom"][0])

    h_lb = build_hamiltonian(grid, hbar, mu, "lb")
    dense = h_lb.dense()
    dense = 0.5 * (dense + dense.conj().T)
    eigs = np.sort(np.linalg.eigvalsh(dense))
    ms = range(-n_eigs, n_eigs + 1)
    expected = np.sort([hbar ** 2 * m ** 2 / (2.0 * mu * a ** 2) + vg for m in ms])
    count = len(expected)
    eig_defect = float(np.max(np.abs(eigs[:count] - expected)))
    gaps = eigs[:count] - eigs[0]
    expected_gaps = expected - expected[0]
    gap_defect = float(np.max(np.abs(gaps - expected_gaps)))

    ps = build_momentum(grid, hbar)
    d_theta = spectral_derivative(grid.shape, 0)
    states = random_band_states(grid, 6, seed)
    p2_defect = 0.0
    ndotp_defect = 0.0
    m_field = grid.geo["M"]
    n_field = grid.geo["n"]
    for psi in states:
        p2_psi = sum(p(p(psi)) for p in ps)
        closed = (hbar ** 2 / a ** 2) * (-d_theta(d_theta(psi)) + 0.25 * psi)
        p2_defect = max(p2_defect,
                        norm_w(grid.weights, p2_psi - closed)
                        / norm_w(grid.weights, closed))
        np_psi = sum(n_field[j] * ps[j](psi) for j in range(2))
        closed_np = -1j * hbar * 0.5 * m_field * psi
        ndotp_defect = max(ndotp_defect,
                           norm_w(grid.weights, np_psi - closed_np)
                           / max(norm_w(grid.weights, closed_np), 1e-300))
    hform_res, _ = residual_on_testspace(
        build_hamiltonian(grid, hbar, mu, "lb"),
        build_hamiltonian(grid, hbar, mu, "momentum"), grid, 6, seed,
    )
    return {
        "eigenvalue_defect": eig_defect,
        "eigenvalue_gap_defect": gap_defect,
        "geometric_potential": vg,
        "p_squared_defect": p2_defect,
        "n_dot_p_defect": ndotp_defect,
        "h_forms_residual": hform_res,
    }


def run_identity_suite(kind, params, sizes, hbar=1.0, mu=1.0, tol=None,
                       identities=None, count=8, seed=0):
    """Run the full verdict suite on one surface across a grid family.

    Returns a JSON-ready report with one verdict per identity id, circle
    anchors when applicable, and a list of hard failures (construction
    -level properties that did not confirm).
    """
    if tol is None:
        tol = 1e-10 if kind == "circle" else 1e-8
    identities = list(identities or IDENTITY_IDS)
    grids = [build_grid(kind, params, s) for s in sizes]
    verdicts = [check_identity(grids, ident, hbar, mu, tol, count, seed)
                for ident in identities]
    report = {
        "surface": kind,
        "params": {k: float(v) for k, v in params.items()},
        "grids": ["x".join(str(s) for s in g.shape) for g in grids],
        "hbar": hbar,
        "mu": mu,
        "tol": tol,
        "identities": [v.to_dict() for v in verdicts],
    }
    hard = [v.identity for v in verdicts
            if v.identity in ("H_FORMS", "HERMITICITY") and v.verdict != "confirmed"]
    if kind == "circle":
        anchors = circle_anchor_report(grids[min(1, len(grids) - 1)], hbar, mu)
        report["anchors"] = anchors
        if (anchors["eigenvalue_defect"] > 1e-10
                or anchors["p_squared_defect"] > 1e-12
                or anchors["h_forms_residual"] > 1e-12
                or anchors["n_dot_p_defect"] > 1e-12):
            hard.append("CIRCLE_ANCHORS")
    report["hard_failures"] = hard
    flags = []
    for v in verdicts:
        if v.identity == "EQ10_SCALAR":
            flags.extend(v.notes)
    report["flags"] = flags
    return report
