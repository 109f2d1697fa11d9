"""Early-time expansion of the photon emission rate.

The photon rate gamma(t) is expanded at t = 0; its first derivative decides
superradiance (slope > 0). Total-rate and direction-resolved slopes are
provided for fully and partially inverted product states, together with the
second derivative at full inversion, the multilevel-channel slope, and the
eigenvalue/trace equivalence check.

Conventions: Gamma (single-atom rate) = 1, wavelength = 1 so |k| = 2*pi.
Emission and drive wavevectors are normalised to that magnitude; only their
direction is user input.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .coupling import GAMMA_SINGLE, TWO_PI, CouplingSet, multilevel_tensor
from .errors import NumericalConsistencyError, SizeLimitError

#: default cap on atom number for the partial-inversion formulas
PARTIAL_N_CAP = 400

#: tolerance for the relative imaginary residue of symmetrised complex sums
IMAG_RESIDUE_TOL = 1e-9


def emission_wavevector(phi, theta=np.pi / 2):
    """Wavevector of magnitude 2*pi with polar angle theta (default in-plane)."""
    st = np.sin(theta)
    return TWO_PI * np.array([st * np.cos(phi), st * np.sin(phi), np.cos(theta)])


def _force_k(kvec, name):
    kvec = np.asarray(kvec, dtype=float).reshape(3)
    norm = np.linalg.norm(kvec)
    if norm == 0.0:
        raise ValueError(f"{name} direction must be nonzero")
    return TWO_PI * kvec / norm


@dataclass
class DriveSpec:
    """Product initial state: excited probability sin^2(alpha/2) per atom and
    a phase exp(i k_i . R_n) imprinted along the drive direction k_i."""

    alpha: float
    k_i: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, 1.0]))

    def __post_init__(self):
        if not 0.0 <= self.alpha <= np.pi:
            raise ValueError("alpha must lie in [0, pi]")
        self.k_i = _force_k(self.k_i, "k_i")

    @property
    def excited_fraction(self):
        return np.sin(self.alpha / 2) ** 2

    @classmethod
    def fully_inverted(cls):
        return cls(alpha=np.pi)

    @classmethod
    def from_excited_fraction(cls, fraction, k_i=(0.0, 0.0, 1.0)):
        if not 0.0 <= fraction <= 1.0:
            raise ValueError("excited fraction must lie in [0, 1]")
        return cls(alpha=2.0 * np.arcsin(np.sqrt(fraction)), k_i=k_i)


@dataclass
class SlopeResult:
    """gamma(0), its first derivative, and the optional second derivative.

    single_atom_term and pair_term add up to gdot0 exactly; the first is the
    (negative) independent-decay part, the second the pair-coupling part.
    """

    n: int
    gamma0: float
    gdot0: float
    single_atom_term: float
    pair_term: float
    gddot0: float | None = None
    k_f: np.ndarray | None = None
    alpha: float | None = None
    k_i: np.ndarray | None = None
    kf_parallel_dipole: bool = False

    @property
    def superradiant(self):
        """Strict slope criterion; the boundary itself is not superradiant."""
        return self.gdot0 > 0.0

    @property
    def scaled_slope(self):
        """gdot(0) / (N * Gamma^2), the natural per-atom scale."""
        return self.gdot0 / (self.n * GAMMA_SINGLE**2)

    def to_record(self, **context):
        """Flat record for JSON/CSV artifacts; extra context keys merge in."""
        rec = {
            "N": self.n,
            "alpha": self.alpha,
            "k_i": None if self.k_i is None else list(self.k_i),
            "k_f": None if self.k_f is None else list(self.k_f),
            "gamma0": self.gamma0,
            "gdot0": self.gdot0,
            "gddot0": self.gddot0,
            "superradiant": bool(self.superradiant),
        }
        rec.update(context)
        return rec


def _hollow(mat):
    out = mat.copy()
    np.fill_diagonal(out, 0.0)
    return out


def _check_residue(total, scale):
    if abs(total.imag) > IMAG_RESIDUE_TOL * max(abs(total.real), scale):
        raise NumericalConsistencyError(
            f"imaginary residue {total.imag:.3e} exceeds tolerance "
            f"(real part {total.real:.3e})"
        )
    return total.real


def slope_total_inverted(coupling):
    """Slope of the total rate for full inversion:
    gdot(0) = -2 N Gamma^2 + sum_nm Gamma_nm^2.

    The trace of the squared decay matrix is accumulated element-wise, which
    is the O(N^2) route (no matrix product).
    """
    n = coupling.n_atoms
    single = -2.0 * n * GAMMA_SINGLE**2
    pair = float(np.sum(coupling.gamma**2))
    return SlopeResult(n=n, gamma0=n * GAMMA_SINGLE, gdot0=single + pair,
                       single_atom_term=single, pair_term=pair, alpha=np.pi)


def _kf_parallel(k_f, dipole):
    kn = k_f / np.linalg.norm(k_f)
    return abs(abs(kn @ dipole) - 1.0) < 1e-12


def slope_directional_inverted(coupling, cloud, k_f):
    """Slope of the rate into direction k_f for full inversion:
    gdot(0, k_f) = -2 N Gamma^2 + Gamma * sum_nm Gamma_nm cos(phi_nm),
    with phi_nm = k_f . (R_n - R_m) and the diagonal included (cos 0 = 1).

    A k_f parallel to the dipole is flagged (the directional rate is not
    meaningful there) but still evaluated.
    """
    n = coupling.n_atoms
    k_f = _force_k(k_f, "k_f")
    w = np.exp(1j * (cloud.positions @ k_f))
    single = -2.0 * n * GAMMA_SINGLE**2
    pair = GAMMA_SINGLE * float(np.vdot(w, coupling.gamma @ w).real)
    return SlopeResult(n=n, gamma0=n * GAMMA_SINGLE, gdot0=single + pair,
                       single_atom_term=single, pair_term=pair, k_f=k_f,
                       alpha=np.pi,
                       kf_parallel_dipole=_kf_parallel(k_f, cloud.dipole))


def _partial_guard(coupling, cloud, drive, n_cap):
    n = coupling.n_atoms
    if cloud.n_atoms != n:
        raise ValueError("cloud and coupling sizes disagree")
    if n > n_cap:
        raise SizeLimitError(
            f"partial-inversion slope for N={n} exceeds the cap {n_cap}; "
            "pass n_cap explicitly to override"
        )
    return n


def slope_total_partial(coupling, cloud, drive, n_cap=PARTIAL_N_CAP,
                        variant="consistent"):
    """Slope of the total rate for a partially inverted product state.

    With c = cos(alpha), s = sin(alpha), eta_mn = k_i . (R_m - R_n):

    gdot(0) = -N Gamma^2 (1-c)/2
              + sum_{m!=n} [ c(c-1)/2 * Gamma_mn^2
                             - s^2/2 * Gamma_mn Gamma cos(eta_mn) ]
              - c s^2/4 * sum_{m!=n} Gamma_mn
                    sum_{l!=m,n} (g_nl e^{i eta_lm} + g*_ml e^{-i eta_ln})

    The sums are accumulated in complex arithmetic through matrix
    contractions and the imaginary residue must vanish to 1e-9 relative,
    else a NumericalConsistencyError is raised. variant="alternate" flips
    and doubles the three-atom cross term; it fails the master-equation
    cross-check and is retained only for comparison. At alpha = pi the
    result reduces exactly to slope_total_inverted.
    """
    n = _partial_guard(coupling, cloud, drive, n_cap)
    c = np.cos(drive.alpha)
    s2 = np.sin(drive.alpha) ** 2
    p = 0.5 * (1.0 - c)
    gh = _hollow(coupling.gamma)
    single = -n * GAMMA_SINGLE**2 * p
    scale = n * GAMMA_SINGLE**2
    pair = c * (c - 1.0) / 2.0 * float(np.sum(gh**2))
    gamma0 = n * GAMMA_SINGLE * p
    if s2 != 0.0:
        z = np.exp(1j * (cloud.positions @ drive.k_i))
        quad = np.vdot(z, gh @ z)
        gamma0 += 0.25 * s2 * _check_residue(quad, scale)
        ghol = _hollow(coupling.g)
        t1 = np.vdot(z, gh @ (ghol @ z)) - np.sum(gh * ghol)
        t2 = (np.sum(z * (gh @ (ghol.conj() @ z.conj())))
              - np.sum(gh * ghol.conj()))
        coeff = -c * s2 / 4.0 if variant == "consistent" else c * s2 / 2.0
        acc = -0.5 * s2 * GAMMA_SINGLE * quad + coeff * (t1 + t2)
        pair += _check_residue(acc, scale)
    return SlopeResult(n=n, gamma0=gamma0, gdot0=single + pair,
                       single_atom_term=single, pair_term=pair,
                       alpha=drive.alpha, k_i=drive.k_i)


def slope_directional_partial(coupling, cloud, drive, k_f, n_cap=PARTIAL_N_CAP,
                              variant="consistent"):
    """Slope of the directional rate for a partially inverted product state.

    With phi_mn = k_f . (R_m - R_n) and eta as above:

    gdot(0, k_f) = -N Gamma^2 (1-c)/2
        + Gamma sum_{m!=n} [ c(c-1)/2 * Gamma_mn cos(phi_mn)
                             - s^2/4 * Gamma_mn cos(eta_mn)
                             - s^2/4 * Gamma cos(phi_mn - eta_mn) ]
        - c Gamma s^2/4 * sum_{m!=n} e^{i phi_mn}
              sum_{l!=m,n} (g_nl e^{i eta_lm} + g*_ml e^{-i eta_ln})

    The default reading uses the detection phase in the quadratic term,
    which is the form whose alpha = pi limit reproduces
    slope_directional_inverted and which matches direct master-equation
    integration. variant="alternate" uses the drive phase there and carries
    an extra drive phase in the cross term; its imaginary parts do not
    cancel, so the residue gate is skipped and the real part is reported,
    for comparison only.
    """
    n = _partial_guard(coupling, cloud, drive, n_cap)
    k_f = _force_k(k_f, "k_f")
    c = np.cos(drive.alpha)
    s2 = np.sin(drive.alpha) ** 2
    p = 0.5 * (1.0 - c)
    gh = _hollow(coupling.gamma)
    w = np.exp(1j * (cloud.positions @ k_f))
    single = -n * GAMMA_SINGLE**2 * p
    scale = n * GAMMA_SINGLE**2
    consistent = variant == "consistent"
    if s2 == 0.0:
        pair = GAMMA_SINGLE * c * (c - 1.0) / 2.0 * float(np.vdot(w, gh @ w).real)
        gamma0 = GAMMA_SINGLE * n * p
    else:
        z = np.exp(1j * (cloud.positions @ drive.k_i))
        a = w * z.conj()
        sa = a.sum()
        coh = sa * sa.conjugate() - n
        gamma0 = GAMMA_SINGLE * (n * p + 0.25 * s2 * _check_residue(coh, float(n)))
        ghol = _hollow(coupling.g)
        quad = np.vdot(w, gh @ w) if consistent else np.vdot(z, gh @ z)
        acc = GAMMA_SINGLE * c * (c - 1.0) / 2.0 * quad
        acc += -0.25 * s2 * GAMMA_SINGLE * np.vdot(z, gh @ z)
        acc += -0.25 * s2 * GAMMA_SINGLE**2 * coh
        if consistent:
            u1 = (sa * np.vdot(w, ghol @ z) - np.vdot(z, ghol @ z)
                  - np.vdot(w, ghol @ w))
            u2 = (sa.conjugate() * np.sum(w * (ghol.conj() @ z.conj()))
                  - np.sum(z * (ghol.conj() @ z.conj()))
                  - np.vdot(w, ghol @ w).conjugate())
        else:
            wz = w * z
            u1 = (w.sum() * np.vdot(wz, ghol @ z) - np.vdot(z, ghol @ z)
                  - np.vdot(wz, ghol @ wz))
            u2 = (np.sum(w * z.conj()).conjugate() * np.sum(wz.conj() * (ghol.conj() @ z.conj()))
                  - np.sum(z * (ghol.conj() @ z.conj()))
                  - np.vdot(wz, ghol @ wz).conjugate())
        acc += -c * GAMMA_SINGLE * s2 / 4.0 * (u1 + u2)
        pair = _check_residue(acc, scale) if consistent else float(acc.real)
    return SlopeResult(n=n, gamma0=gamma0, gdot0=single + pair,
                       single_atom_term=single, pair_term=pair,
                       alpha=drive.alpha, k_i=drive.k_i, k_f=k_f,
                       kf_parallel_dipole=_kf_parallel(k_f, cloud.dipole))


def curvature_total_inverted(coupling, dual_form_tol=1e-12):
    """Second derivative of the total rate at full inversion.

    Evaluated both as the explicit restricted sums
    N Gamma^3 - 5 Gamma sum' Gamma_nm^2 + sum''' Gamma_nm Gamma_ml Gamma_ln
    and as the trace form 8 N Gamma^3 - 8 Gamma Tr[G^2] + Tr[G^3]; the two
    are an algebraic identity and must agree to dual_form_tol relative.
    """
    n = coupling.n_atoms
    gam = coupling.gamma
    gh = _hollow(gam)
    s2 = float(np.sum(gh**2))
    explicit = (n * GAMMA_SINGLE**3 - 5.0 * GAMMA_SINGLE * s2
                + float(np.einsum("nm,ml,ln->", gh, gh, gh)))
    g2 = gam @ gam
    trace_form = (8.0 * n * GAMMA_SINGLE**3
                  - 8.0 * GAMMA_SINGLE * float(np.trace(g2))
                  + float(np.trace(g2 @ gam)))
    denom = max(abs(explicit), abs(trace_form), n * GAMMA_SINGLE**3)
    if abs(explicit - trace_form) > dual_form_tol * denom:
        raise NumericalConsistencyError(
            f"second-derivative forms disagree: {explicit!r} vs {trace_form!r}"
        )
    base = slope_total_inverted(coupling)
    base.gddot0 = trace_form
    return base


def curvature_directional_inverted(coupling, cloud, k_f):
    """Second derivative of the directional rate at full inversion:

    8 N Gamma^3 - 2 Gamma Tr[G G] - 6 Gamma^2 Tr[G C]
      + Gamma Tr[G G C] + Gamma Tr[S [G, W]]

    where C/S are the elementwise cos/sin of the detection phase matrix
    phi_mn = k_f . (R_m - R_n), G the decay matrix and W the shift matrix.
    The commutator term is evaluated exactly.
    """
    n = coupling.n_atoms
    k_f = _force_k(k_f, "k_f")
    gam = coupling.gamma
    t = cloud.positions @ k_f
    phase = t[:, None] - t[None, :]
    cosp = np.cos(phase)
    sinp = np.sin(phase)
    comm = gam @ coupling.omega - coupling.omega @ gam
    gddot = (8.0 * n * GAMMA_SINGLE**3
             - 2.0 * GAMMA_SINGLE * float(np.sum(gam**2))
             - 6.0 * GAMMA_SINGLE**2 * float(np.sum(gam * cosp))
             + GAMMA_SINGLE * float(np.trace(gam @ gam @ cosp))
             + GAMMA_SINGLE * float(np.sum(sinp.T * comm)))
    base = slope_directional_inverted(coupling, cloud, k_f)
    base.gddot0 = gddot
    return base


def multilevel_channel_slopes(cloud, channels):
    """Per-channel rate and slope for a fully inverted multilevel gas.

    For channel f: gamma_f(0) = N Gamma_f and
    gdot_f(0) = -N Gamma_f Gamma_tot
                + (1/9) sum_{n!=m} sum_{ii'} (Gamma^{f,ii'}_nm)^2
    with Gamma_tot the sum of all channel rates.
    """
    if not channels:
        raise ValueError("need at least one decay channel")
    n = cloud.n_atoms
    if n < 1:
        raise ValueError("need at least one atom")
    gamma_tot = sum(ch.gamma_f for ch in channels)
    iu, ju = np.triu_indices(n, k=1)
    rvecs = cloud.positions[iu] - cloud.positions[ju]
    results = []
    for ch in channels:
        single = -n * ch.gamma_f * gamma_tot
        pair = 0.0
        if n > 1:
            tens = multilevel_tensor(rvecs, ch)
            # ordered pairs: each unordered pair contributes twice
            pair = 2.0 / 9.0 * float(np.sum(tens**2))
        results.append(SlopeResult(n=n, gamma0=n * ch.gamma_f,
                                   gdot0=single + pair,
                                   single_atom_term=single, pair_term=pair,
                                   alpha=np.pi))
    return results


def trace_eigenvalue_check(coupling, tol=1e-10):
    """Cross-check sum_k lambda_k^2 (symmetric eigendecomposition) against the
    element-wise Tr[G^2]; both give gdot(0) = value - 2 N Gamma^2.
    """
    gam = coupling.gamma
    n = coupling.n_atoms
    trace_value = float(np.sum(gam**2))
    eigvals = np.linalg.eigvalsh(gam)
    eigen_sum = float(np.sum(eigvals**2))
    rel_diff = abs(trace_value - eigen_sum) / trace_value
    if rel_diff > tol:
        raise NumericalConsistencyError(
            f"trace/eigenvalue mismatch: rel_diff={rel_diff:.3e}"
        )
    return {
        "trace_value": trace_value,
        "eigen_sum": eigen_sum,
        "rel_diff": rel_diff,
        "gdot0": trace_value - 2.0 * n * GAMMA_SINGLE**2,
    }
