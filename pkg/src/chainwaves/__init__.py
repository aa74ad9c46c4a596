"""Solitary traveling waves for atomic chains with nonlocal interactions.

The package constructs supersonic solitary velocity profiles for chains
coupling up to M neighbors, solving the traveling wave problem by a corrector
fixed point around the closed-form quadratic-KdV limit, and validates the
result against the chain's equations of motion.
"""

from .errors import (
    ChainwavesError,
    ConfigError,
    DomainTooSmallError,
    EmptyWindowError,
    GridMismatchError,
    NearSingularError,
    NoConvergenceError,
    NotEvenError,
    WindowOverflowError,
)
from .grid import (
    GridFunction,
    SpectralGrid,
    Spectrum,
    antiderivative,
    derivative,
    evenness_defect,
    forward_transform,
    grid_function,
    inner_product,
    inverse_transform,
    l2_norm,
    make_grid,
    project_even,
    sample,
    sobolev22_norm,
    sup_norm,
)
from .lattice import (
    LatticeState,
    TransportReport,
    acceleration,
    energy_drift_rate,
    run_transport,
    step,
    total_energy,
    total_momentum,
    transport_error,
    wave_initial_data,
)
from .linearized import LinearizedOperator, linearized_operator
from .model import (
    ChainModel,
    KdvConstants,
    PsiFamily,
    apply_P,
    apply_Q,
    apply_Q0,
    default_half_length,
    kdv_constants,
    kdv_profile,
    tw_residual,
)
from .operators import (
    MultiplierOperator,
    averaging_direct,
    averaging_operator,
    b0_operator,
    b0_symbol,
    b_operator,
    b_symbol,
    cutoff,
    discrete_gradient,
    invert_b,
    invert_b0,
    sinc,
    translate,
    von_neumann_inverse,
)
from .solver import (
    ResidualPair,
    SolveConfig,
    SolveDiagnostics,
    SweepRow,
    WaveSolution,
    apply_N,
    convergence_sweep,
    direct_iteration,
    eigen_identity_check,
    fixed_point_map,
    measure_tail_decay,
    residuals,
    solve_wave,
)
from .verify import CheckResult, run_verification

__version__ = "0.1.0"
