"""Region maps over (N, d) and (phi, d) grids, partial-inversion sweeps and
Monte Carlo atom-removal studies.

Maps hold the scaled slope gdot(0)/(N Gamma^2) per cell; the superradiance
mask is the strict sign of that value. Cells are independent, so identical
inputs (and seeds) reproduce maps bitwise.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .coupling import build_coupling
from .criteria import (
    DriveSpec,
    emission_wavevector,
    slope_directional_inverted,
    slope_directional_partial,
    slope_total_inverted,
)
from .errors import NumericalConsistencyError
from .geometry import AtomCloud, double_line_lattice, thin_cloud
from .lattice import _quadrant_kernel, scaled_slope_lattice, standard_spec

FAST_FAMILIES = {"line": 1, "square": 2, "cubic": 3}
FAMILIES = set(FAST_FAMILIES) | {"double_line"}

#: 4-neighbour connectivity for region bookkeeping
_CONN4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]])


@dataclass
class RegionMap:
    """Grid of scaled slopes with axis metadata; mask is values > 0."""

    x_name: str
    x_values: np.ndarray
    y_name: str
    y_values: np.ndarray
    values: np.ndarray  # shape (len(y_values), len(x_values))
    label: str = ""

    def __post_init__(self):
        self.x_values = np.asarray(self.x_values)
        self.y_values = np.asarray(self.y_values)
        self.values = np.asarray(self.values, dtype=float)
        if self.values.shape != (len(self.y_values), len(self.x_values)):
            raise ValueError("values grid does not match axis sample counts")

    @property
    def mask(self):
        return self.values > 0.0

    def column(self, x_value):
        idx = int(np.argmin(np.abs(self.x_values - x_value)))
        if abs(float(self.x_values[idx]) - x_value) > 1e-9 * max(1.0, abs(x_value)):
            raise ValueError(f"{x_value} is not on the {self.x_name} axis")
        return self.values[:, idx]


def grid(lo, hi, step):
    """Inclusive uniform grid, robust against float stride drift."""
    n = int(round((hi - lo) / step)) + 1
    return np.linspace(lo, hi, n)


def superradiant_components(region_map):
    """Connected components of the mask (4-neighbour); (labels, count)."""
    return ndimage.label(region_map.mask, structure=_CONN4)


def region_present(region_map, x_value, y_band):
    """True if any superradiant cell sits at column x_value with y in band."""
    col = region_map.column(x_value)
    lo, hi = y_band
    sel = (region_map.y_values >= lo) & (region_map.y_values <= hi)
    return bool(np.any(col[sel] > 0.0))


def onset_in_band(region_map, y_band):
    """Smallest x value whose column is superradiant inside the band."""
    for x in region_map.x_values:
        if region_present(region_map, float(x), y_band):
            return float(x)
    return None


def _pmap(fn, items, threads):
    if threads is None or threads <= 1:
        return [fn(it) for it in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _double_line_row(n_values, d, kind, k_f):
    """Scaled slopes for double lines of every size in n_values at spacing d.

    Couplings for smaller sizes are submatrices of the largest cloud, so the
    kernel is evaluated once per row. Odd totals put the extra atom on the
    first line (the maps sweep every integer N; the uneven split mirrors to
    the same slopes).
    """
    n_max = max(n_values)
    m_max = (n_max + 1) // 2
    cloud = double_line_lattice(2 * m_max, d)
    coupling = build_coupling(cloud)
    out = np.empty(len(n_values))
    w = None
    if kind == "directional":
        w = np.exp(1j * (cloud.positions @ k_f))
    for i, n in enumerate(n_values):
        idx = np.concatenate([np.arange((n + 1) // 2),
                              m_max + np.arange(n // 2)])
        gam = coupling.gamma[np.ix_(idx, idx)]
        # Gamma = 1 units: gdot = -2 n + sum gam^2 (or the cos-weighted form)
        if kind == "total":
            gdot = -2.0 * n + float(np.sum(gam**2))
        else:
            ws = w[idx]
            gdot = -2.0 * n + float(np.vdot(ws, gam @ ws).real)
        out[i] = gdot / n
    return out


def map_n_d(family, n_values, d_values, kind="total", phi=0.0, k_f=None,
            threads=None):
    """Scaled-slope map over atom number (or N1) and spacing.

    For `line`, `square` and `cubic` the x axis is interpreted as N (line)
    or N1 (square/cubic) and cells are evaluated through the O(N)
    displacement sum; `double_line` takes total (even) atom numbers and runs
    through the pairwise path. Directional cells use
    k_f = 2*pi*(cos(phi), sin(phi), 0) unless an explicit k_f is given.
    """
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    if kind not in ("total", "directional"):
        raise ValueError("kind must be 'total' or 'directional'")
    n_values = [int(v) for v in n_values]
    d_values = np.asarray(d_values, dtype=float)
    if len(n_values) == 0 or len(d_values) == 0:
        raise ValueError("empty axis ranges")
    if kind == "directional" and k_f is None:
        k_f = emission_wavevector(phi)

    if family == "double_line":
        for n in n_values:
            if n < 2:
                raise ValueError("double_line sizes must be at least 2")

        def row(d):
            return _double_line_row(n_values, d, kind, k_f)

    else:
        dim = FAST_FAMILIES[family]
        n_max = max(n_values)

        def row(d):
            kernel = _quadrant_kernel(standard_spec(dim, d, n_max), n_max)
            return np.array([
                scaled_slope_lattice(standard_spec(dim, d, n), kind, k_f,
                                     _kernel=kernel)
                for n in n_values
            ])

    rows = _pmap(row, d_values, threads)
    x_name = "N1" if family in ("square", "cubic") else "N"
    return RegionMap(x_name=x_name, x_values=np.array(n_values),
                     y_name="d", y_values=d_values, values=np.vstack(rows),
                     label=f"{family} {kind}" + (f" phi={phi}" if kind == "directional" else ""))


def map_phi_d(family, n_fixed, phi_values, d_values, threads=None):
    """Directional scaled-slope map over emission angle and spacing at fixed
    size; k_f = 2*pi*(cos(phi), sin(phi), 0)."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}")
    phi_values = np.asarray(phi_values, dtype=float)
    d_values = np.asarray(d_values, dtype=float)
    if len(phi_values) == 0 or len(d_values) == 0:
        raise ValueError("empty axis ranges")
    kfs = [emission_wavevector(p) for p in phi_values]

    if family == "double_line":
        if n_fixed < 2 or n_fixed % 2:
            raise ValueError("double_line sizes must be positive and even")

        def row(d):
            cloud = double_line_lattice(n_fixed, d)
            coupling = build_coupling(cloud)
            out = np.empty(len(kfs))
            for i, kf in enumerate(kfs):
                res = slope_directional_inverted(coupling, cloud, kf)
                out[i] = res.scaled_slope
            return out

    else:
        dim = FAST_FAMILIES[family]

        def row(d):
            spec = standard_spec(dim, d, n_fixed)
            kernel = _quadrant_kernel(spec, n_fixed)
            return np.array([
                scaled_slope_lattice(spec, "directional", kf, _kernel=kernel)
                for kf in kfs
            ])

    rows = _pmap(row, d_values, threads)
    return RegionMap(x_name="phi", x_values=phi_values, y_name="d",
                     y_values=d_values, values=np.vstack(rows),
                     label=f"{family} directional N={n_fixed}")


def _family_cloud(family, n, d):
    if family == "double_line":
        return double_line_lattice(n, d)
    dim = FAST_FAMILIES[family]
    return standard_spec(dim, d, n).to_cloud()


def partial_sweep(family, n_fixed, d_values, alphas, k_i=(0.0, 0.0, 1.0),
                  phi_values=(0.0,), n_cap=400, threads=None):
    """Directional region maps for a list of inversion angles.

    Returns one RegionMap per alpha (sorted descending, labels carry the
    excited fraction). The superradiant area must not grow as alpha
    decreases; a violation raises NumericalConsistencyError.
    """
    alphas = sorted((float(a) for a in alphas), reverse=True)
    phi_values = np.asarray(phi_values, dtype=float)
    d_values = np.asarray(d_values, dtype=float)
    kfs = [emission_wavevector(p) for p in phi_values]
    drives = [DriveSpec(alpha=a, k_i=np.asarray(k_i, dtype=float)) for a in alphas]

    def row(d):
        cloud = _family_cloud(family, n_fixed, d)
        coupling = build_coupling(cloud)
        out = np.empty((len(alphas), len(kfs)))
        for ai, drive in enumerate(drives):
            for pi, kf in enumerate(kfs):
                res = slope_directional_partial(coupling, cloud, drive, kf,
                                                n_cap=n_cap)
                out[ai, pi] = res.scaled_slope
        return out

    rows = _pmap(row, d_values, threads)  # list of (n_alpha, n_phi)
    stack = np.stack(rows, axis=1)  # (n_alpha, n_d, n_phi)
    maps = []
    prev_area = None
    for ai, alpha in enumerate(alphas):
        rmap = RegionMap(x_name="phi", x_values=phi_values, y_name="d",
                         y_values=d_values, values=stack[ai],
                         label=f"alpha={alpha:.6g} excited="
                               f"{np.sin(alpha / 2) ** 2:.4f}")
        area = int(np.sum(rmap.mask))
        if prev_area is not None and area > prev_area:
            raise NumericalConsistencyError(
                "superradiant area grew while lowering the inversion"
            )
        prev_area = area
        maps.append(rmap)
    return maps


@dataclass
class RegionProbe:
    """A named (phi, d-grid) band in which a region is looked for."""

    name: str
    phi: float
    d_values: np.ndarray

    def __post_init__(self):
        self.d_values = np.asarray(self.d_values, dtype=float)


@dataclass
class RemovalStudyResult:
    probe_names: list
    p_values: np.ndarray
    survival: np.ndarray  # (n_probes, n_p) fraction of trials with the region
    trials: int
    seed: int
    keep_thresholds: dict = field(default_factory=dict)


def removal_study(family, n_total, probes, p_values, trials=100, seed=0,
                  threads=None):
    """Monte Carlo survival of directional regions under random atom removal.

    For every removal probability p and probe, `trials` independent thinned
    realisations are tested for a positive directional slope anywhere on the
    probe's d grid. Thinning happens on the unit-spacing geometry (positions
    scale linearly with d), so one realisation covers the whole grid.
    Seeds derive from SeedSequence(seed, spawn_key=(probe, p, trial)) and
    the study is deterministic. keep_thresholds records, per probe, the
    smallest kept fraction whose survival is still >= 50%.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    p_values = np.asarray(p_values, dtype=float)
    if np.any((p_values < 0.0) | (p_values > 1.0)):
        raise ValueError("removal probabilities must lie in [0, 1]")
    reference = _family_cloud(family, n_total, 1.0)
    kf_cache = {pr.name: emission_wavevector(pr.phi) for pr in probes}

    def trial_present(args):
        probe_i, p_i, trial = args
        probe = probes[probe_i]
        ss = np.random.SeedSequence(seed, spawn_key=(probe_i, p_i, trial))
        thin = thin_cloud(reference, p_values[p_i], ss).positions
        if thin.shape[0] == 0:
            return False
        kf = kf_cache[probe.name]
        for d in probe.d_values:
            cloud = AtomCloud(thin * d, dipole=reference.dipole,
                              delta_m=reference.delta_m)
            coupling = build_coupling(cloud)
            if slope_directional_inverted(coupling, cloud, kf).gdot0 > 0.0:
                return True
        return False

    tasks = [(pi, qi, t) for pi in range(len(probes))
             for qi in range(len(p_values)) for t in range(trials)]
    flags = _pmap(trial_present, tasks, threads)
    survival = np.zeros((len(probes), len(p_values)))
    for (pi, qi, _t), flag in zip(tasks, flags):
        survival[pi, qi] += flag
    survival /= trials
    keep = 1.0 - p_values
    thresholds = {}
    for pi, probe in enumerate(probes):
        alive = survival[pi] >= 0.5
        thresholds[probe.name] = float(np.min(keep[alive])) if np.any(alive) else None
    return RemovalStudyResult(probe_names=[p.name for p in probes],
                              p_values=p_values, survival=survival,
                              trials=trials, seed=seed,
                              keep_thresholds=thresholds)
