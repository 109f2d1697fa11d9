"""Early-time superradiance criteria for atom clouds and arrays.

The photon emission rate of N two-level atoms is expanded at t = 0; the sign
of its slope decides superradiance, totally or per emission direction, for
fully or partially inverted product states. Arrays get an O(N) evaluation
through displacement multiplicities, small systems a brute-force
master-equation cross-check.
"""

from .coupling import (
    GAMMA_SINGLE,
    TWO_PI,
    CouplingSet,
    MultilevelChannel,
    bessel_j0,
    bessel_j2,
    build_coupling,
    green_function,
    hankel_h0,
    hankel_h2,
    multilevel_decay_element,
    multilevel_tensor,
)
from .criteria import (
    DriveSpec,
    SlopeResult,
    curvature_directional_inverted,
    curvature_total_inverted,
    emission_wavevector,
    multilevel_channel_slopes,
    slope_directional_inverted,
    slope_directional_partial,
    slope_total_inverted,
    slope_total_partial,
    trace_eigenvalue_check,
)
from .errors import (
    CloudParseError,
    NumericalConsistencyError,
    SingularKernelError,
    SizeLimitError,
)
from .geometry import (
    AtomCloud,
    LatticeSpec,
    cubic_lattice,
    double_line_lattice,
    line_lattice,
    load_cloud,
    save_cloud,
    square_lattice,
    thin_cloud,
)
from .lattice import (
    ChainLimit,
    ScalingFit,
    ThresholdResult,
    WeightedKernel,
    axis_weight,
    fit_scaling,
    infinite_chain_limit,
    scaled_slope_lattice,
    slope_directional_lattice,
    slope_total_lattice,
    standard_spec,
    superradiance_threshold,
    weighted_displacement_kernel,
)
from .oracle import (
    Trajectory,
    emission_rate,
    evolve,
    lindblad_rhs,
    product_state,
    rate_derivative,
    slope_check,
)
from .scan import (
    RegionMap,
    RegionProbe,
    RemovalStudyResult,
    grid,
    map_n_d,
    map_phi_d,
    onset_in_band,
    partial_sweep,
    region_present,
    removal_study,
    superradiant_components,
)

__version__ = "0.1.0"
