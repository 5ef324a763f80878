"""Unitary wave-packet evolution and Ehrenfest force bookkeeping.

On the circle the Hamiltonian is diagonal in the Fourier basis, so the
propagation is exact (eigen-decomposition propagation).  On the torus a
Strang splitting alternates the tube-angle part (dense weighted-unitary
exponential, same matrix for every azimuthal column) with the azimuthal
plus potential part (diagonal per row in the azimuthal Fourier basis).

The recorded trace checks the momentum force law in expectation:
d<p_j>/dt against the symmetrized centripetal term plus the
curvature-gradient quantum term.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import inner, norm_w, spectral_derivative
from .operators import build_momentum, centripetal_quadratic
from .identities import _quartic


class NormDriftError(RuntimeError):
    """State norm drifted more than the tolerance during evolution."""


@dataclass(frozen=True)
class WavePacket:
    center: float | tuple
    sigma: float
    mean_momentum: float
    azimuthal_momentum: float = 0.0  # torus only


@dataclass
class EhrenfestTrace:
    t: np.ndarray            # (K,)
    mean_p: np.ndarray       # (K, N)
    dmean_p_dt: np.ndarray   # (K-2, N), central differences at t[1:-1]
    centripetal: np.ndarray  # (K, N)
    quantum: np.ndarray      # (K, N)
    f_term: np.ndarray       # (K, N)
    norm_drift: float

    def closure_error(self):
        """Relative gap between d<p>/dt and the two recorded force terms."""
        rhs = (self.centripetal + self.quantum)[1:-1]
        gap = np.linalg.norm(self.dmean_p_dt - rhs, axis=1)
        scale = np.max(np.linalg.norm(rhs, axis=1))
        return float(gap.max() / max(scale, 1e-300))

    def to_csv(self):
        nvars = self.mean_p.shape[1]
        cols = (["t"]
                + [f"mean_p{j}" for j in range(nvars)]
                + [f"dmean_p_dt{j}" for j in range(nvars)]
                + [f"centripetal_term{j}" for j in range(nvars)]
                + [f"quantum_term{j}" for j in range(nvars)]
                + [f"f_term{j}" for j in range(nvars)])
        rows = [",".join(cols)]
        for k in range(len(self.t)):
            if 1 <= k < len(self.t) - 1:
                dp = list(self.dmean_p_dt[k - 1])
            else:
                dp = [float("nan")] * nvars
            cells = ([self.t[k]] + list(self.mean_p[k]) + dp
                     + list(self.centripetal[k]) + list(self.quantum[k])
                     + list(self.f_term[k]))
            rows.append(",".join(format(float(c), ".17g") for c in cells))
        return "\n".join(rows) + "\n"


def _circle_packet(grid, packet, hbar):
    """Band-limited wrapped Gaussian with integer mean angular mode."""
    n = grid.shape[0]
    a = grid.params["a"]
    modes = np.fft.fftfreq(n, d=1.0 / n)
    m0 = int(round(packet.mean_momentum * a / hbar))
    envelope = np.exp(-0.5 * packet.sigma ** 2 * (modes - m0) ** 2)
    coeffs = envelope * np.exp(-1j * (modes - m0) * packet.center)
    psi = np.fft.ifft(coeffs) * n
    return psi / norm_w(grid.weights, psi), m0


def _observables(grid, hbar, mu):
    ps = build_momentum(grid, hbar)
    q = centripetal_quadratic(grid, hbar)
    n = grid.geo["n"]
    lap_m = grid.geo["lapM"]
    dn = grid.geo["dn"]
    nvars = grid.ndim_embed
    f_defs = [
        (1j * hbar / 2.0) * _quartic(grid, ps, lambda l, k, j=j: dn[j, l] * n[k])
        for j in range(nvars)
    ]

    def measure(psi):
        mean_p = np.empty(nvars)
        cent = np.empty(nvars)
        quant = np.empty(nvars)
        fterm = np.empty(nvars)
        q_psi = q(psi)
        for j in range(nvars):
            mean_p[j] = np.real(inner(grid.weights, psi, ps[j](psi)))
            cent[j] = np.real(inner(
                grid.weights, psi,
                (-0.5 / mu) * (n[j] * q_psi + q(n[j] * psi))))
            quant[j] = np.real(inner(
                grid.weights, psi,
                -(hbar ** 2 / (4.0 * mu)) * lap_m * n[j] * psi))
            fterm[j] = np.real(inner(
                grid.weights, psi, f_defs[j](psi) / (2.0 * mu * 1j * hbar)))
        return mean_p, cent, quant, fterm

    return measure


def evolve_wavepacket(grid, packet, dt, steps, hbar=1.0, mu=1.0,
                      record_every=1, norm_tol=1e-6):
    """Evolve a packet under the surface Hamiltonian; return the trace.

    Circle grids propagate exactly in the Fourier eigenbasis; torus
    grids use Strang splitting (unitary factors, norm drift checked).
    The packet width must cover at least 4 grid spacings.
    """
    spacing = max(2 * np.pi / n for n in grid.shape)
    if packet.sigma < 4 * spacing:
        raise ValueError(
            f"packet sigma {packet.sigma} is below 4 grid spacings "
            f"({4 * spacing:.4f}); refine the grid or widen the packet"
        )
    if grid.kind == "circle":
        return _evolve_circle(grid, packet, dt, steps, hbar, mu,
                              record_every, norm_tol)
    if grid.kind == "torus":
        return _evolve_torus(grid, packet, dt, steps, hbar, mu,
                             record_every, norm_tol)
    raise ValueError(f"no evolution scheme for grid kind '{grid.kind}'")


def _evolve_circle(grid, packet, dt, steps, hbar, mu, record_every, norm_tol):
    n = grid.shape[0]
    a = grid.params["a"]
    psi0, _ = _circle_packet(grid, packet, hbar)
    modes = np.fft.fftfreq(n, d=1.0 / n)
    vg = (hbar ** 2 / (4.0 * mu)) * float(grid.geo["vg_geom"][0])
    energies = hbar ** 2 * modes ** 2 / (2.0 * mu * a ** 2) + vg
    coeffs0 = np.fft.fft(psi0)
    measure = _observables(grid, hbar, mu)

    times, mean_ps, cents, quants, fterms = [], [], [], [], []
    drift = 0.0
    for k in range(0, steps + 1, record_every):
        t = k * dt
        psi = np.fft.ifft(coeffs0 * np.exp(-1j * energies * t / hbar))
        drift = max(drift, abs(norm_w(grid.weights, psi) - 1.0))
        if drift > norm_tol:
            raise NormDriftError(f"norm drifted by {drift:.3e}")
        mp, ce, qu, ft = measure(psi)
        times.append(t)
        mean_ps.append(mp)
        cents.append(ce)
        quants.append(qu)
        fterms.append(ft)
    return _finish_trace(times, mean_ps, cents, quants, fterms, drift)


def _finish_trace(times, mean_ps, cents, quants, fterms, drift):
    t = np.asarray(times)
    mean_p = np.asarray(mean_ps)
    step = t[1] - t[0]
    dmean = (mean_p[2:] - mean_p[:-2]) / (2.0 * step)
    return EhrenfestTrace(t=t, mean_p=mean_p, dmean_p_dt=dmean,
                          centripetal=np.asarray(cents),
                          quantum=np.asarray(quants),
                          f_term=np.asarray(fterms), norm_drift=drift)


def _torus_packet(grid, packet, hbar):
    nth, nph = grid.shape
    r = grid.params["r"]
    R = grid.params["R"]
    m_th = np.fft.fftfreq(nth, d=1.0 / nth)
    m_ph = np.fft.fftfreq(nph, d=1.0 / nph)
    c_th, c_ph = (packet.center if isinstance(packet.center, tuple)
                  else (packet.center, 0.0))
    m0_th = int(round(packet.mean_momentum * r / hbar))
    m0_ph = int(round(packet.azimuthal_momentum * R / hbar))
    env_th = np.exp(-0.5 * packet.sigma ** 2 * (m_th - m0_th) ** 2
                    - 1j * (m_th - m0_th) * c_th)
    env_ph = np.exp(-0.5 * packet.sigma ** 2 * (m_ph - m0_ph) ** 2
                    - 1j * (m_ph - m0_ph) * c_ph)
    coeffs = np.outer(env_th, env_ph)
    psi = np.fft.ifft2(coeffs) * (nth * nph)
    return psi / norm_w(grid.weights, psi)


def _theta_propagator(grid, dt, hbar, mu):
    """Weighted-unitary exp(-i dt A / hbar) for the tube-angle kinetic part."""
    nth = grid.shape[0]
    r = grid.params["r"]
    rho = grid.params["R"] + r * np.sin(grid.coords[0])
    d = spectral_derivative((nth,), 0)
    coef = rho / r

    def l_theta(v):
        return (d(coef * d(v)) / (r * rho))

    a_dense = np.empty((nth, nth), dtype=complex)
    basis = np.zeros(nth, dtype=complex)
    for j in range(nth):
        basis[j] = 1.0
        a_dense[:, j] = -(hbar ** 2 / (2.0 * mu)) * l_theta(basis)
        basis[j] = 0.0
    w_half = np.sqrt(rho)
    sym = (a_dense * w_half[:, None]) / w_half[None, :]
    sym = 0.5 * (sym + sym.conj().T)
    vals, vecs = np.linalg.eigh(sym)
    phase = np.exp(-1j * dt * vals / hbar)
    prop_sym = (vecs * phase) @ vecs.conj().T
    return (prop_sym / w_half[:, None]) * w_half[None, :]


def _evolve_torus(grid, packet, dt, steps, hbar, mu, record_every, norm_tol):
    nth, nph = grid.shape
    rho = grid.params["R"] + grid.params["r"] * np.sin(grid.coords[0])
    m_ph = np.fft.fftfreq(nph, d=1.0 / nph)
    vg = (hbar ** 2 / (4.0 * mu)) * grid.geo["vg_geom"]
    # azimuthal + potential phases, diagonal per row in the phi Fourier basis
    e_row = (hbar ** 2 / (2.0 * mu)) * (m_ph[None, :] ** 2 / rho[:, None] ** 2) \
        + vg[:, 0][:, None]
    half_c = np.exp(-1j * 0.5 * dt * e_row / hbar)
    prop_a = _theta_propagator(grid, dt, hbar, mu)
    psi = _torus_packet(grid, packet, hbar)
    measure = _observables(grid, hbar, mu)

    def apply_c_half(state):
        return np.fft.ifft(half_c * np.fft.fft(state, axis=1), axis=1)

    times, mean_ps, cents, quants, fterms = [], [], [], [], []
    drift = 0.0
    for k in range(steps + 1):
        if k % record_every == 0:
            drift = max(drift, abs(norm_w(grid.weights, psi) - 1.0))
            if drift > norm_tol:
                raise NormDriftError(f"norm drifted by {drift:.3e}")
            mp, ce, qu, ft = measure(psi)
            times.append(k * dt)
            mean_ps.append(mp)
            cents.append(ce)
            quants.append(qu)
            fterms.append(ft)
        if k < steps:
            psi = apply_c_half(psi)
            psi = prop_a @ psi
            psi = apply_c_half(psi)
    return _finish_trace(times, mean_ps, cents, quants, fterms, drift)


def hbar_scaling_slopes(params, mean_momentum=10.0, sigma=0.2,
                        hbars=(1.0, 0.5, 0.25), size=256, t_final=0.05,
                        steps=100, mu=1.0):
    """Log-log slopes of the quantum and centripetal term magnitudes vs hbar.

    The classical action is held fixed: the packet keeps the same mean
    momentum while the mode number scales like 1/hbar.  The quantum term
    should scale like hbar^2 (slope 2), the centripetal term like hbar^0
    (slope 0).
    """
    from .grid import build_grid

    quantum_rms, cent_rms = [], []
    for hb in hbars:
        grid = build_grid("circle", params, size)
        packet = WavePacket(center=0.0, sigma=sigma, mean_momentum=mean_momentum)
        dt = t_final / steps
        trace = evolve_wavepacket(grid, packet, dt, steps, hbar=hb, mu=mu)
        quantum_rms.append(float(np.sqrt(np.mean(
            np.linalg.norm(trace.quantum, axis=1) ** 2))))
        cent_rms.append(float(np.sqrt(np.mean(
            np.linalg.norm(trace.centripetal, axis=1) ** 2))))
    logh = np.log(np.asarray(hbars))
    slope_q = float(np.polyfit(logh, np.log(quantum_rms), 1)[0])
    slope_c = float(np.polyfit(logh, np.log(np.maximum(cent_rms, 1e-300)), 1)[0])
    return {
        "hbars": list(hbars),
        "quantum_rms": quantum_rms,
        "centripetal_rms": cent_rms,
        "slope_quantum": slope_q,
        "slope_centripetal": slope_c,
    }
