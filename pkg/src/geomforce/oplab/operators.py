"""Geometric momentum and Hamiltonian operators on surface grids.

The Cartesian surface-gradient components are realized as
(grad_S)_i = sum_a g^{aa} (dx/du^a)_i * spectral d_a, the hermitian
momentum as p_j = -i hbar ((grad_S)_j + M n_j / 2), and the Hamiltonian
either in Laplace-Beltrami form (spectral divergence form plus the
geometric potential) or composed from the momentum components.
"""

from __future__ import annotations

import numpy as np

from .linops import LinOp, inner, norm_w, spectral_derivative


def build_surface_gradient(grid):
    """Cartesian components of grad_S as linear operators."""
    derivs = [spectral_derivative(grid.shape, a) for a in range(len(grid.shape))]

    def component(i):
        coefs = [np.ascontiguousarray(grid.grad_coefs[i, a])
                 for a in range(len(grid.shape))]

        def apply_fn(psi, coefs=coefs):
            out = coefs[0] * derivs[0](psi)
            for c, d in zip(coefs[1:], derivs[1:]):
                out += c * d(psi)
            return out

        return LinOp(apply_fn, grid.shape, f"gradS_{i}")

    return [component(i) for i in range(grid.ndim_embed)]


def build_momentum(grid, hbar=1.0):
    """p_j = -i hbar ((grad_S)_j + M n_j / 2), one operator per component."""
    grads = build_surface_gradient(grid)
    m_field = grid.geo["M"]
    out = []
    for j in range(grid.ndim_embed):
        half_mn = 0.5 * m_field * grid.geo["n"][j]
        gj = grads[j]

        def apply_fn(psi, gj=gj, half_mn=half_mn):
            return -1j * hbar * (gj(psi) + half_mn * psi)

        out.append(LinOp(apply_fn, grid.shape, f"p_{j}"))
    return out


def laplace_beltrami(grid):
    """Spectral (1/sqrt g) d_a (sqrt g g^{ab} d_b psi) for diagonal metrics."""
    naxes = len(grid.shape)
    derivs = [spectral_derivative(grid.shape, a) for a in range(naxes)]
    coefs = [grid.sqrtg * grid.ginv_diag[a] for a in range(naxes)]
    inv_sqrtg = 1.0 / grid.sqrtg

    def apply_fn(psi):
        out = np.zeros_like(psi)
        for a in range(naxes):
            out += derivs[a](coefs[a] * derivs[a](psi))
        return inv_sqrtg * out

    return LinOp(apply_fn, grid.shape, "lap_LB")


def build_hamiltonian(grid, hbar=1.0, mu=1.0, form="lb"):
    """Surface Hamiltonian, in 'lb' or 'momentum' form.

    lb:       -(hbar^2 / 2 mu) lap_LB + V_G
    momentum: sum_j p_j p_j / (2 mu) - (hbar^2 / 4 mu) S2
    """
    if form == "lb":
        lb = laplace_beltrami(grid)
        vg = (hbar ** 2 / (4.0 * mu)) * grid.geo["vg_geom"]
        coef = -(hbar ** 2) / (2.0 * mu)

        def apply_fn(psi):
            return coef * lb(psi) + vg * psi

        return LinOp(apply_fn, grid.shape, "H_lb")
    if form == "momentum":
        ps = build_momentum(grid, hbar)
        s2 = (hbar ** 2 / (4.0 * mu)) * grid.geo["S2"]
        inv_2mu = 1.0 / (2.0 * mu)

        def apply_fn(psi):
            out = -s2 * psi
            for p in ps:
                out += inv_2mu * p(p(psi))
            return out

        return LinOp(apply_fn, grid.shape, "H_p")
    raise ValueError(f"unknown Hamiltonian form '{form}'")


def centripetal_quadratic(grid, hbar=1.0):
    """Q = sum_{i,k} p_i n_{i,k} p_k (hermitian operator ordering)."""
    ps = build_momentum(grid, hbar)
    dn = grid.geo["dn"]
    nvars = grid.ndim_embed

    def apply_fn(psi):
        us = [p(psi) for p in ps]
        out = np.zeros_like(psi)
        for i in range(nvars):
            v = dn[i, 0] * us[0]
            for k in range(1, nvars):
                v += dn[i, k] * us[k]
            out += ps[i](v)
        return out

    return LinOp(apply_fn, grid.shape, "Q")


def commutator(a, b):
    """[A, B] = A B - B A as a linear operator."""
    return LinOp(lambda psi: a(b(psi)) - b(a(psi)), a.shape,
                 f"[{a.label},{b.label}]")


def random_band_states(grid, count=8, seed=0, band_fraction=1.0 / 3.0):
    """Unit-norm states with Fourier support on the lowest band of modes.

    Band fraction 1/3 keeps products with smooth coefficient fields free
    of aliasing at the tested grid sizes.
    """
    rng = np.random.default_rng(seed)
    states = []
    cut = [max(1, int((n // 2) * band_fraction)) for n in grid.shape]
    for _ in range(count):
        coeffs = np.zeros(grid.shape, dtype=complex)
        mesh = np.meshgrid(*[np.fft.fftfreq(n, d=1.0 / n) for n in grid.shape],
                           indexing="ij")
        mask = np.ones(grid.shape, dtype=bool)
        for m, c in zip(mesh, cut):
            mask &= np.abs(m) <= c
        values = rng.standard_normal(mask.sum()) + 1j * rng.standard_normal(mask.sum())
        coeffs[mask] = values
        psi = np.fft.ifftn(coeffs)
        psi /= norm_w(grid.weights, psi)
        states.append(psi)
    return states


def residual_on_testspace(a, b, grid, count=8, seed=0, band_fraction=1.0 / 3.0):
    """max over band-limited test states of ||(A - B) psi|| / ||B psi||.

    The denominator is floored at machine scale; when both actions are
    numerically zero the operators compare as equal (residual 0).
    Returns (residual, witness_index).
    """
    states = random_band_states(grid, count, seed, band_fraction)
    eps = np.finfo(float).eps
    worst, witness = 0.0, 0
    for idx, psi in enumerate(states):
        a_psi = a(psi)
        b_psi = b(psi)
        na = norm_w(grid.weights, a_psi)
        nb = norm_w(grid.weights, b_psi)
        num = norm_w(grid.weights, a_psi - b_psi)
        scale = max(na, nb, 1.0)
        if num <= 100.0 * eps * scale and nb <= 100.0 * eps * scale:
            value = 0.0
        else:
            value = num / max(nb, 100.0 * eps * scale)
        if value > worst:
            worst, witness = value, idx
    return worst, witness


def hermiticity_defect(op, grid, count=6, seed=0, band_fraction=1.0 / 3.0):
    """max |<phi, A psi> - <A phi, psi>| over unit test pairs, normalized."""
    states = random_band_states(grid, 2 * count, seed, band_fraction)
    worst = 0.0
    for k in range(count):
        phi, psi = states[2 * k], states[2 * k + 1]
        a_psi = op(psi)
        a_phi = op(phi)
        lhs = inner(grid.weights, phi, a_psi)
        rhs = inner(grid.weights, a_phi, psi)
        scale = max(norm_w(grid.weights, a_psi), norm_w(grid.weights, a_phi), 1.0)
        worst = max(worst, abs(lhs - rhs) / scale)
    return worst
