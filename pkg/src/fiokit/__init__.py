"""Phase-space calculus toolkit: FBI transforms, canonical maps with
actions, Gaussian-phase oscillatory operators, and operator-norm bound
verification."""

from .grids import GridFunction, GridLayout, PhaseSpaceField, ResolutionError
from .matrixcore import (
    ComplexSymMatrix,
    WidthMatrixError,
    gaussian_value,
    is_symplectic,
    lambda_of,
    principal_sqrt,
    symplectic_form,
    w_matrix,
)
from .symplectic import (
    CanonicalMap,
    FlowMap,
    IdentityMap,
    LinearMap,
    PhasePoint,
    compose,
    free_particle,
    hamiltonian_flow,
    harmonic_oscillator,
    invert,
    map_eval,
    pendulum_like,
)
from .fbi import (
    auto_grid,
    auto_phase_space_grid,
    coherent_state,
    fbi_forward,
    fbi_inverse,
    momentum_band,
    scale_field,
    scale_op,
)
from .fio import (
    CutoffError,
    DiscretizationPlan,
    FioSpec,
    SymbolSpec,
    adjoint_spec,
    apply_antiwick,
    apply_fio,
    kernel_eval,
    kernel_matrix,
    operator_matrix,
    phase_eval,
    rescale_check,
    symbol_seminorm,
)
from .bounds import (
    NormEstimate,
    NormReport,
    SupportPair,
    operator_norm,
    schur_row_col,
    separation_decay,
    verify_antiwick_bound,
    verify_corfull_bound,
    verify_crude_bounds,
    verify_full_theorem,
)

__version__ = "0.1.0"
