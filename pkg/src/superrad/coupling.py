"""Free-space dipole-dipole coupling kernel and collective decay matrices.

All lengths are in units of the transition wavelength (lambda = 1, so the
wavenumber is 2*pi) and all rates in units of the single-atom decay rate
(Gamma = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NumericalConsistencyError, SingularKernelError

TWO_PI = 2.0 * np.pi

#: single-atom decay rate; everything is expressed in units of it
GAMMA_SINGLE = 1.0

#: kernel arguments s = k*R below this are rejected outright
MIN_KR = 1e-8


def _check_hankel_arg(s):
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0.0):
        raise ValueError("spherical Hankel functions require s > 0")
    if np.any(s < MIN_KR):
        raise SingularKernelError(f"kernel argument below the s >= {MIN_KR} floor")
    return s


def hankel_h0(s):
    """Outgoing spherical Hankel function of order 0, exp(i*s)/(i*s)."""
    s = _check_hankel_arg(s)
    out = _j0_raw(s) + 1j * _y0_raw(s)
    return complex(out) if out.ndim == 0 else out


def hankel_h2(s):
    """Outgoing spherical Hankel function of order 2,
    (-3i/s^3 - 3/s^2 + i/s) exp(i*s), evaluated in closed form.

    The real and imaginary parts cancel to O(s^2) as s -> 0, so relative
    precision degrades below s ~ 1e-4; arguments below 1e-8 are rejected.
    """
    s = _check_hankel_arg(s)
    out = _j2_raw(s) + 1j * _y2_raw(s)
    return complex(out) if out.ndim == 0 else out


def _j0_raw(s):
    return np.sin(s) / s


def _y0_raw(s):
    return -np.cos(s) / s


def _j2_raw(s):
    return (3.0 / s**3 - 1.0 / s) * np.sin(s) - 3.0 * np.cos(s) / s**2


def _y2_raw(s):
    return -(3.0 / s**3 - 1.0 / s) * np.cos(s) - 3.0 * np.sin(s) / s**2


def bessel_j0(s):
    """Spherical Bessel j0(s) = sin(s)/s, with j0(0) = 1."""
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0):
        raise ValueError("spherical Bessel functions require s >= 0")
    out = np.ones(s.shape)
    nz = s > 0.0
    out[nz] = _j0_raw(s[nz])
    return float(out) if out.ndim == 0 else out


def bessel_j2(s):
    """Spherical Bessel j2(s) in closed form, with j2(0) = 0.

    Shares the expression used for Re(hankel_h2), so the two agree bitwise.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s < 0.0):
        raise ValueError("spherical Bessel functions require s >= 0")
    out = np.zeros(s.shape)
    nz = s > 0.0
    out[nz] = _j2_raw(s[nz])
    return float(out) if out.ndim == 0 else out


def _unit(v, name="vector"):
    v = np.asarray(v, dtype=float).reshape(3)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError(f"{name} must be nonzero")
    return v / norm


def green_many(rvecs, dipole, k=TWO_PI, delta_m=0):
    """Vectorised dipole kernel g(R) for an (M, 3) array of displacements.

    g = (Gamma/2) [h0(s) + a * h2(s)] with s = k|R| and
    a = (3 (Rhat . dhat)^2 - 1)/2 for a linear (delta_m = 0) dipole;
    a -> -a/2 for circular (|delta_m| = 1) transitions.
    """
    rvecs = np.asarray(rvecs, dtype=float).reshape(-1, 3)
    dipole = _unit(dipole, "dipole")
    r = np.linalg.norm(rvecs, axis=1)
    s = k * r
    if np.any(s < MIN_KR):
        raise SingularKernelError(
            f"coincident or nearly coincident atoms: k*R < {MIN_KR}"
        )
    mu = (rvecs @ dipole) / r
    a = 0.5 * (3.0 * mu * mu - 1.0)
    if delta_m:
        a = -0.5 * a
    h0 = _j0_raw(s) + 1j * _y0_raw(s)
    h2 = _j2_raw(s) + 1j * _y2_raw(s)
    return 0.5 * GAMMA_SINGLE * (h0 + a * h2)


def green_function(rvec, dipole, k=TWO_PI, delta_m=0):
    """Dipole coupling kernel g(R) for a single displacement vector.

    The decay coupling is Gamma_nm = 2 Re g and the coherent shift is
    Omega_nm = Im g. Depends on the geometry only through k*R, so rescaling
    all lengths by x while dividing k by x leaves the value unchanged.
    """
    return complex(green_many(np.asarray(rvec, dtype=float).reshape(1, 3),
                              dipole, k=k, delta_m=delta_m)[0])


@dataclass
class CouplingSet:
    """Pairwise coupling matrices for a fixed set of atoms.

    g is the complex kernel matrix (diagonal fixed to Gamma/2), gamma the
    real symmetric decay matrix (diagonal Gamma), omega the coherent
    dipole-dipole shift matrix (diagonal 0).
    """

    g: np.ndarray
    gamma: np.ndarray
    omega: np.ndarray

    @property
    def n_atoms(self):
        return self.gamma.shape[0]

    @property
    def g_plus(self):
        """g+ = +i*Omega + Gamma/2."""
        return 0.5 * self.gamma + 1j * self.omega

    @property
    def g_minus(self):
        """g- = -i*Omega + Gamma/2."""
        return 0.5 * self.gamma - 1j * self.omega

    @classmethod
    def from_matrices(cls, gamma, omega=None):
        """Assemble a CouplingSet from explicit decay/shift matrices."""
        gamma = np.asarray(gamma, dtype=float)
        n = gamma.shape[0]
        if gamma.shape != (n, n):
            raise ValueError("gamma must be square")
        if omega is None:
            omega = np.zeros_like(gamma)
        omega = np.asarray(omega, dtype=float)
        if omega.shape != gamma.shape:
            raise ValueError("omega must match gamma in shape")
        g = 0.5 * gamma + 1j * omega
        return cls(g=g, gamma=gamma, omega=omega)

    @classmethod
    def dicke(cls, n):
        """Idealised point-cloud limit: Gamma_nm = Gamma for every pair."""
        gamma = np.full((n, n), GAMMA_SINGLE)
        return cls.from_matrices(gamma)


def build_coupling(cloud):
    """Assemble the N x N coupling matrices for an AtomCloud.

    Off-diagonal entries come from the kernel at R_n - R_m; the diagonal is
    fixed to the single-atom rate. The fill is symmetric by construction.
    """
    n = cloud.n_atoms
    if n < 1:
        raise ValueError("coupling requires at least one atom")
    g = np.zeros((n, n), dtype=complex)
    np.fill_diagonal(g, 0.5 * GAMMA_SINGLE)
    if n > 1:
        iu, ju = np.triu_indices(n, k=1)
        vals = green_many(cloud.positions[iu] - cloud.positions[ju],
                          cloud.dipole, delta_m=cloud.delta_m)
        g[iu, ju] = vals
        g[ju, iu] = vals
    gamma = 2.0 * g.real
    omega = g.imag.copy()
    np.fill_diagonal(omega, 0.0)
    if np.max(np.abs(gamma)) > GAMMA_SINGLE * (1.0 + 1e-9):
        raise NumericalConsistencyError("decay matrix entry exceeds the single-atom rate")
    return CouplingSet(g=g, gamma=gamma, omega=omega)


@dataclass
class MultilevelChannel:
    """A single decay channel to one final state.

    gamma_f is the channel's total decay rate, k_f_mag the wavenumber of the
    emitted photon. `convention` selects the trace term of the tensor kernel:
    "uniform" applies the scalar terms to every Cartesian pair (i, i'), while
    "kronecker" carries delta_{ii'}. Only "kronecker" reduces to the
    single-atom limit at R -> 0; "uniform" is kept as the alternate reading
    and no claim is made about which is physically correct at short range.
    """

    gamma_f: float
    k_f_mag: float
    convention: str = "uniform"

    def __post_init__(self):
        if self.gamma_f <= 0.0:
            raise ValueError("channel decay rate must be positive")
        if self.k_f_mag <= 0.0:
            raise ValueError("channel wavenumber must be positive")
        if self.convention not in ("uniform", "kronecker"):
            raise ValueError("convention must be 'uniform' or 'kronecker'")


_AXES = {"x": 0, "y": 1, "z": 2}


def multilevel_tensor(rvecs, channel):
    """Vectorised 3x3 decay tensor for each displacement in an (M, 3) array.

    Returns an (M, 3, 3) array with entries
    Gamma_f [ j0(kR) * u_ii' + ((3 Rhat_i Rhat_i' - u_ii')/2) * j2(kR) ],
    where u is all-ones ("uniform") or the identity ("kronecker").
    """
    rvecs = np.asarray(rvecs, dtype=float).reshape(-1, 3)
    r = np.linalg.norm(rvecs, axis=1)
    s = channel.k_f_mag * r
    if np.any(s < MIN_KR):
        raise SingularKernelError("multilevel kernel at (nearly) zero separation")
    rhat = rvecs / r[:, None]
    outer = rhat[:, :, None] * rhat[:, None, :]
    u = np.eye(3) if channel.convention == "kronecker" else np.ones((3, 3))
    j0 = np.sin(s) / s
    j2 = _j2_raw(s)
    return channel.gamma_f * (
        j0[:, None, None] * u + 0.5 * (3.0 * outer - u) * j2[:, None, None]
    )


def multilevel_decay_element(rvec, channel, i, i2):
    """Single tensor element Gamma^{f,ii'}(R); i, i' are 'x'/'y'/'z' or 0..2."""
    ia = _AXES.get(i, i)
    ib = _AXES.get(i2, i2)
    tens = multilevel_tensor(np.asarray(rvec, dtype=float).reshape(1, 3), channel)
    return float(tens[0, ia, ib])
