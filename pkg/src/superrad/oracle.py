"""Brute-force master-equation validation for small atom numbers.

Integrates the full N-atom density matrix (N <= 8, dimension 2^N) under the
collective decay/shift generator and differentiates the sampled photon rate
at t = 0+ to cross-check every closed-form slope. Jump operators are applied
by bit indexing, never as dense superoperators.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coupling import GAMMA_SINGLE, build_coupling
from .criteria import (
    curvature_directional_inverted,
    curvature_total_inverted,
    slope_directional_inverted,
    slope_directional_partial,
    slope_total_inverted,
    slope_total_partial,
)
from .errors import NumericalConsistencyError, SizeLimitError

MAX_ATOMS = 8
DEFAULT_DT = 1e-3


def _check_size(n):
    if n > MAX_ATOMS:
        raise SizeLimitError(f"master-equation oracle is limited to N <= {MAX_ATOMS}")
    if n < 1:
        raise ValueError("need at least one atom")


class _BitIndex:
    """Precomputed index arrays for applying sigma^+/sigma^- by bit masking.

    Basis state b has atom n excited iff bit n of b is set.
    """

    def __init__(self, n):
        self.n = n
        self.dim = 2**n
        states = np.arange(self.dim)
        self.excited = []  # indices with bit n set
        self.ground = []   # the same indices with bit n cleared
        for k in range(n):
            exc = states[(states >> k) & 1 == 1]
            self.excited.append(exc)
            self.ground.append(exc - (1 << k))

    def lower_rows(self, rho, k, out, coeff):
        """out += coeff * (sigma^-_k rho) restricted to rows."""
        out[self.ground[k], :] += coeff * rho[self.excited[k], :]

    def pair_maps(self, k_from, k_to):
        """Index map for sigma^+_{k_to} sigma^-_{k_from} acting on kets:
        returns (dst, src) with dst having bit k_to set, bit k_from clear."""
        states = np.arange(self.dim)
        sel = (((states >> k_to) & 1) == 1) & (((states >> k_from) & 1) == 0)
        dst = states[sel]
        src = dst - (1 << k_to) + (1 << k_from)
        return dst, src


def lindblad_rhs(rho, coupling, index=None):
    """Right-hand side of the collective master equation.

    d rho/dt = sum_{nm} Gamma_nm/2 (2 s-_n rho s+_m - s+_m s-_n rho
               - rho s+_m s-_n) - i sum_{n!=m} Omega_nm [s+_n s-_m, rho].

    The output is traceless to 1e-12 and Hermiticity-preserving.
    """
    n = coupling.n_atoms
    if rho.shape != (2**n, 2**n):
        raise ValueError("density matrix dimension does not match coupling size")
    ix = index if index is not None else _BitIndex(n)
    out = np.zeros_like(rho)
    gam = coupling.gamma
    om = coupling.omega
    for a in range(n):
        for b in range(n):
            ga = 0.5 * gam[a, b]
            # 2 s-_a rho s+_b
            out[np.ix_(ix.ground[a], ix.ground[b])] += (2.0 * ga) * rho[
                np.ix_(ix.excited[a], ix.excited[b])
            ]
            if a == b:
                # s+_a s-_a = e_a projector
                out[ix.excited[a], :] -= ga * rho[ix.excited[a], :]
                out[:, ix.excited[a]] -= ga * rho[:, ix.excited[a]]
            else:
                # s+_b s-_a rho: rows with bit b set, bit a clear
                dst, src = ix.pair_maps(a, b)
                out[dst, :] -= ga * rho[src, :]
                # rho s+_b s-_a: columns with bit a set, bit b clear
                dst2, src2 = ix.pair_maps(b, a)
                out[:, dst2] -= ga * rho[:, src2]
                # -i Omega_ab [s+_a s-_b, rho]
                wab = om[a, b]
                if wab != 0.0:
                    hd, hs = ix.pair_maps(b, a)
                    out[hd, :] += (-1j * wab) * rho[hs, :]
                    cd, cs = ix.pair_maps(a, b)
                    out[:, cd] -= (-1j * wab) * rho[:, cs]
    return out


def product_state(n, drive, positions):
    """Density matrix of the uncorrelated product state
    prod_n [cos(alpha/2)|g_n> + e^{i k_i . R_n} sin(alpha/2)|e_n>]."""
    _check_size(n)
    positions = np.asarray(positions, dtype=float).reshape(n, 3)
    cos_half = np.cos(drive.alpha / 2)
    sin_half = np.sin(drive.alpha / 2)
    phases = np.exp(1j * (positions @ drive.k_i))
    psi = np.array([1.0 + 0.0j])
    # atom k occupies bit k, so it is the fast index of the kron chain
    for k in range(n - 1, -1, -1):
        amp = np.array([cos_half, phases[k] * sin_half])
        psi = np.kron(psi, amp)
    return np.outer(psi, psi.conj())


def excited_populations(rho, n):
    """<e_n> for each atom."""
    diag = np.real(np.diag(rho))
    states = np.arange(2**n)
    return np.array(
        [diag[(states >> k) & 1 == 1].sum() for k in range(n)]
    )


def pair_correlator(rho, ix, m, n_idx):
    """<sigma^+_m sigma^-_n> via the bit map (m != n_idx)."""
    dst, src = ix.pair_maps(n_idx, m)
    return np.sum(rho[src, dst])


def emission_rate(rho, coupling, ix=None, k_f=None, positions=None):
    """Photon rate at one instant; total if k_f is None, else directional.

    Total: sum_n [Gamma <e_n> + sum_{m!=n} Gamma_mn <s+_m s-_n>].
    Directional: Gamma sum_n [<e_n> + sum_{m!=n} e^{i phi_mn} <s+_m s-_n>].
    """
    n = coupling.n_atoms
    ix = ix if ix is not None else _BitIndex(n)
    rate = GAMMA_SINGLE * float(np.sum(excited_populations(rho, n)))
    phases = None
    if k_f is not None:
        t = np.asarray(positions, dtype=float).reshape(n, 3) @ np.asarray(k_f, float)
        phases = t[:, None] - t[None, :]
    acc = 0.0 + 0.0j
    for m in range(n):
        for nn in range(n):
            if m == nn:
                continue
            corr = pair_correlator(rho, ix, m, nn)
            if phases is None:
                acc += coupling.gamma[m, nn] * corr
            else:
                acc += GAMMA_SINGLE * np.exp(1j * phases[m, nn]) * corr
    return rate + float(acc.real)


@dataclass
class Trajectory:
    times: np.ndarray
    gamma_total: np.ndarray
    gamma_directional: np.ndarray | None = None
    rho_final: np.ndarray | None = None
    k_f: np.ndarray | None = field(default=None)


def _rk4_step(rho, dt, coupling, ix):
    k1 = lindblad_rhs(rho, coupling, ix)
    k2 = lindblad_rhs(rho + 0.5 * dt * k1, coupling, ix)
    k3 = lindblad_rhs(rho + 0.5 * dt * k2, coupling, ix)
    k4 = lindblad_rhs(rho + dt * k3, coupling, ix)
    return rho + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)


def _check_state(rho, t, check_positivity):
    tr = np.trace(rho)
    if abs(tr - 1.0) > 1e-8:
        raise NumericalConsistencyError(f"trace drifted to {tr} at t={t:.4g}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > 1e-8:
        raise NumericalConsistencyError(f"Hermiticity loss {herm:.2e} at t={t:.4g}")
    if check_positivity:
        lo = np.min(np.linalg.eigvalsh(0.5 * (rho + rho.conj().T)))
        if lo < -1e-8:
            raise NumericalConsistencyError(
                f"negative eigenvalue {lo:.2e} at t={t:.4g}"
            )


def evolve(rho0, coupling, cloud_positions, t_end, dt=DEFAULT_DT, k_f=None,
           check_every=200):
    """Fixed-step fourth-order integration of the master equation.

    Samples gamma(t) (and gamma(t, k_f) when a direction is given) at every
    step, monitoring trace, Hermiticity and positivity; violations abort
    with diagnostics. The fixed step keeps trajectories reproducible.
    """
    n = coupling.n_atoms
    _check_size(n)
    ix = _BitIndex(n)
    nstep = max(1, int(round(t_end / dt)))
    dt = t_end / nstep
    times = np.linspace(0.0, t_end, nstep + 1)
    g_tot = np.empty(nstep + 1)
    g_dir = np.empty(nstep + 1) if k_f is not None else None
    rho = np.array(rho0, dtype=complex, copy=True)
    for i in range(nstep + 1):
        g_tot[i] = emission_rate(rho, coupling, ix)
        if k_f is not None:
            g_dir[i] = emission_rate(rho, coupling, ix, k_f=k_f,
                                     positions=cloud_positions)
        if i % check_every == 0:
            _check_state(rho, times[i], check_positivity=True)
        if i < nstep:
            rho = _rk4_step(rho, dt, coupling, ix)
    _check_state(rho, t_end, check_positivity=True)
    return Trajectory(times=times, gamma_total=g_tot, gamma_directional=g_dir,
                      rho_final=rho, k_f=None if k_f is None else np.asarray(k_f))


def _one_sided_derivative(samples, h, dt, order):
    """One-sided stencil at t=0 with two Richardson levels (h, h/2, h/4).

    `samples` maps integer multiples of dt to gamma values.
    """

    def val(t):
        idx = int(round(t / dt))
        if abs(idx * dt - t) > 1e-9 * max(h, dt):
            raise ValueError("stencil node does not lie on the sample grid")
        return samples[idx]

    if order == 1:
        def stencil(hh):
            return (-3.0 * val(0.0) + 4.0 * val(hh) - val(2.0 * hh)) / (2.0 * hh)
    else:
        def stencil(hh):
            return (2.0 * val(0.0) - 5.0 * val(hh) + 4.0 * val(2.0 * hh)
                    - val(3.0 * hh)) / hh**2

    d1, d2, d3 = stencil(h), stencil(h / 2), stencil(h / 4)
    r1 = (4.0 * d2 - d1) / 3.0
    r2 = (4.0 * d3 - d2) / 3.0
    return (8.0 * r2 - r1) / 7.0


def rate_derivative(cloud, drive, k_f=None, order=1, h=0.01, dt=None):
    """Finite-difference derivative of the photon rate at t = 0+.

    Integrates once over [0, 2h] (first derivative) or [0, 3h] (second) and
    applies one-sided stencils with Richardson extrapolation over widths
    h, h/2 and h/4.
    """
    n = cloud.n_atoms
    _check_size(n)
    if dt is None:
        dt = h / 40.0
    # stencil nodes must be multiples of dt and of h/4
    substeps = max(1, int(round(h / 4.0 / dt)))
    dt = h / 4.0 / substeps
    coupling = build_coupling(cloud)
    ix = _BitIndex(n)
    rho = product_state(n, drive, cloud.positions)
    t_end = (2.0 if order == 1 else 3.0) * h
    nstep = int(round(t_end / dt))
    samples = {}
    for i in range(nstep + 1):
        if k_f is None:
            samples[i] = emission_rate(rho, coupling, ix)
        else:
            samples[i] = emission_rate(rho, coupling, ix, k_f=k_f,
                                       positions=cloud.positions)
        if i < nstep:
            rho = _rk4_step(rho, dt, coupling, ix)
    return _one_sided_derivative(samples, h, dt, order)


def slope_check(cloud, drive, k_f=None, order=1, h=0.01, dt=None,
                variant="consistent", n_cap=None):
    """Compare the closed-form slope (or curvature) against the integrator.

    Returns {"formula_value", "oracle_value", "rel_diff"}. Routine use is
    meant for N <= 6. For order=2 the drive must be fully inverted.
    """
    n = cloud.n_atoms
    coupling = build_coupling(cloud)
    fully = abs(drive.alpha - np.pi) < 1e-15
    if order == 2 and not fully:
        raise ValueError("second-derivative formulas require full inversion")
    if order == 2:
        if k_f is None:
            formula = curvature_total_inverted(coupling).gddot0
        else:
            formula = curvature_directional_inverted(coupling, cloud, k_f).gddot0
    elif fully and variant == "consistent":
        if k_f is None:
            formula = slope_total_inverted(coupling).gdot0
        else:
            formula = slope_directional_inverted(coupling, cloud, k_f).gdot0
    else:
        cap = n_cap if n_cap is not None else max(n, 8)
        if k_f is None:
            formula = slope_total_partial(coupling, cloud, drive, n_cap=cap,
                                          variant=variant).gdot0
        else:
            formula = slope_directional_partial(coupling, cloud, drive, k_f,
                                                n_cap=cap, variant=variant).gdot0
    oracle = rate_derivative(cloud, drive, k_f=k_f, order=order, h=h, dt=dt)
    rel = abs(formula - oracle) / max(abs(oracle), 1e-30)
    return {"formula_value": formula, "oracle_value": oracle, "rel_diff": rel}
