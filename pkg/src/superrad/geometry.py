"""Atom position sets: lines, planes, cubes, file-backed clouds, random thinning.

Positions are in units of the transition wavelength. Constructors are pure,
so clouds and lattice specs are safe to share read-only across threads.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .errors import CloudParseError

Z_HAT = np.array([0.0, 0.0, 1.0])


def _unit(v, name):
    v = np.asarray(v, dtype=float).reshape(3)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ValueError(f"{name} must be nonzero")
    return v / norm


@dataclass
class AtomCloud:
    """A fixed set of atom positions plus the shared dipole orientation.

    delta_m = 0 means a linear dipole along `dipole`; |delta_m| = 1 selects
    the circular-transition angular factor in the coupling kernel.
    """

    positions: np.ndarray
    dipole: np.ndarray = field(default_factory=lambda: Z_HAT.copy())
    label: str = ""
    delta_m: int = 0

    def __post_init__(self):
        pos = np.asarray(self.positions, dtype=float)
        if pos.size == 0:
            pos = pos.reshape(0, 3)
        if pos.ndim != 2 or pos.shape[1] != 3:
            raise ValueError("positions must be an (N, 3) array")
        # exact duplicates are rejected rather than silently perturbed
        if pos.shape[0] > 1:
            if np.unique(np.round(pos, 12), axis=0).shape[0] < pos.shape[0]:
                raise ValueError("coincident atoms in cloud")
        self.positions = pos
        self.dipole = _unit(self.dipole, "dipole")
        if self.delta_m not in (-1, 0, 1):
            raise ValueError("delta_m must be 0 or +-1")

    @property
    def n_atoms(self):
        return self.positions.shape[0]

    def translated(self, shift):
        """Rigidly shifted copy; all coupling matrices are unchanged by this."""
        shift = np.asarray(shift, dtype=float).reshape(3)
        return replace(self, positions=self.positions + shift)


def line_lattice(n, d, dipole=Z_HAT):
    """n atoms on the y-axis at spacing d (in wavelengths)."""
    if n < 1:
        raise ValueError("need n >= 1 atoms")
    if d <= 0.0:
        raise ValueError("spacing must be positive")
    pos = np.zeros((n, 3))
    pos[:, 1] = d * np.arange(n)
    return AtomCloud(pos, dipole=dipole, label=f"line n={n} d={d}")


def double_line_lattice(n_total, d, separation=None, dipole=Z_HAT):
    """Two parallel lines along y with n_total/2 atoms each.

    The second line is displaced in x by `separation` (defaults to the
    intra-line spacing d). Rows are y-aligned, and atoms are ordered as the
    full first line followed by the full second line.
    """
    if n_total < 2 or n_total % 2:
        raise ValueError("n_total must be a positive even number")
    if d <= 0.0:
        raise ValueError("spacing must be positive")
    sep = d if separation is None else float(separation)
    if sep <= 0.0:
        raise ValueError("line separation must be positive")
    m = n_total // 2
    ys = d * np.arange(m)
    pos = np.zeros((n_total, 3))
    pos[:m, 1] = ys
    pos[m:, 0] = sep
    pos[m:, 1] = ys
    return AtomCloud(pos, dipole=dipole, label=f"double_line n={n_total} d={d}")


def square_lattice(n1, d, dipole=Z_HAT):
    """n1 x n1 square array in the xy-plane at spacing d."""
    return LatticeSpec.square(n1, d, dipole=dipole).to_cloud()


def cubic_lattice(n1, d, dipole=Z_HAT):
    """n1 x n1 x n1 cubic array at spacing d."""
    return LatticeSpec.cubic(n1, d, dipole=dipole).to_cloud()


@dataclass
class LatticeSpec:
    """Bravais array description used by the O(N) displacement-sum evaluators.

    Only the first `dim` lattice vectors are active; expanding to an
    AtomCloud yields exactly n1**dim atoms.
    """

    dim: int
    n1: int
    a1: np.ndarray
    a2: np.ndarray = field(default_factory=lambda: np.zeros(3))
    a3: np.ndarray = field(default_factory=lambda: np.zeros(3))
    dipole: np.ndarray = field(default_factory=lambda: Z_HAT.copy())
    delta_m: int = 0

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError("dim must be 1, 2 or 3")
        if self.n1 < 1:
            raise ValueError("n1 must be a positive integer")
        self.a1 = np.asarray(self.a1, dtype=float).reshape(3)
        self.a2 = np.asarray(self.a2, dtype=float).reshape(3)
        self.a3 = np.asarray(self.a3, dtype=float).reshape(3)
        self.dipole = _unit(self.dipole, "dipole")
        act = self.active_vectors
        if np.linalg.matrix_rank(act, tol=1e-12) < self.dim:
            raise ValueError("active lattice vectors must be linearly independent")

    @property
    def active_vectors(self):
        return np.vstack([self.a1, self.a2, self.a3])[: self.dim]

    @property
    def n_atoms(self):
        return self.n1**self.dim

    @classmethod
    def line(cls, n1, d, dipole=Z_HAT):
        """Chain along y, matching line_lattice()."""
        if d <= 0.0:
            raise ValueError("spacing must be positive")
        return cls(dim=1, n1=n1, a1=np.array([0.0, d, 0.0]), dipole=dipole)

    @classmethod
    def square(cls, n1, d, dipole=Z_HAT):
        if d <= 0.0:
            raise ValueError("spacing must be positive")
        return cls(dim=2, n1=n1, a1=np.array([d, 0.0, 0.0]),
                   a2=np.array([0.0, d, 0.0]), dipole=dipole)

    @classmethod
    def cubic(cls, n1, d, dipole=Z_HAT):
        if d <= 0.0:
            raise ValueError("spacing must be positive")
        return cls(dim=3, n1=n1, a1=np.array([d, 0.0, 0.0]),
                   a2=np.array([0.0, d, 0.0]), a3=np.array([0.0, 0.0, d]),
                   dipole=dipole)

    def to_cloud(self, label=None):
        """Expand to an AtomCloud; index nu_1 varies slowest in atom order."""
        grids = np.indices((self.n1,) * self.dim).reshape(self.dim, -1)
        pos = grids.T.astype(float) @ self.active_vectors
        if label is None:
            label = f"lattice dim={self.dim} n1={self.n1}"
        return AtomCloud(pos, dipole=self.dipole, label=label, delta_m=self.delta_m)


def thin_cloud(cloud, p_remove, seed):
    """Remove each atom independently with probability p_remove.

    Uses numpy's default PCG64 generator seeded with `seed` and consumes
    exactly one uniform draw per atom in position order, so a fixed seed is
    bitwise reproducible. May return an empty cloud.
    """
    if not 0.0 <= p_remove <= 1.0:
        raise ValueError("removal probability must lie in [0, 1]")
    rng = np.random.default_rng(seed)
    draws = rng.random(cloud.n_atoms)
    keep = draws >= p_remove
    return replace(cloud, positions=cloud.positions[keep])


def save_cloud(cloud, path, comments=()):
    """Write positions as one 'x y z' triple per line ('#' lines are comments)."""
    with open(path, "w") as fh:
        for line in comments:
            fh.write(f"# {line}\n")
        for x, y, z in cloud.positions:
            fh.write(f"{x:.17g} {y:.17g} {z:.17g}\n")


def load_cloud(path, dipole=Z_HAT, label=None, delta_m=0):
    """Read a cloud saved by save_cloud(); round-trips positions to 1e-12."""
    rows = []
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            text = raw.strip()
            if not text or text.startswith("#"):
                continue
            parts = text.split()
            if len(parts) != 3:
                raise CloudParseError(
                    f"{path}:{lineno}: expected three coordinates, got {len(parts)}",
                    line_number=lineno,
                )
            try:
                rows.append([float(p) for p in parts])
            except ValueError as exc:
                raise CloudParseError(
                    f"{path}:{lineno}: {exc}", line_number=lineno
                ) from exc
    pos = np.asarray(rows, dtype=float).reshape(len(rows), 3)
    return AtomCloud(pos, dipole=dipole, label=label or str(path), delta_m=delta_m)
