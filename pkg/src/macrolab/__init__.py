"""macrolab: exact-diagonalization laboratory for emergent classicality.

Builds intensive collective observables on finite spin chains, coarse
grains their joint spectra into phase cells, and follows how cell weights
move under closed-system dynamics -- plus a Gaussian pointer model for
the kinematics of macroscopic branches.
"""

from .backend import KERNEL_BACKEND
from .cells import (
    CellResolution,
    PhaseCell,
    PhaseCellDecomposition,
    coarse_observable,
    decompose,
    residual,
)
from .dynamics import (
    DisorderReport,
    EvolutionContext,
    RevivalReport,
    TransitionMatrix,
    WeightTrajectory,
    coherent_pair_state,
    diagonality_index,
    disorder_residual,
    evolve,
    propagator,
    revival_scenario,
    transition_matrix,
    weights_trajectory,
)
from .hilbert import (
    PAULI_X,
    PAULI_Y,
    PAULI_Z,
    DimensionCapError,
    HilbertSpace,
    LocalOperator,
    ManyBodyOperator,
    SpectralDecomposition,
    accumulate_placement,
    basis_state,
    build_hamiltonian,
    diagonalize,
    embed,
    op_norm,
    product_state,
)
from .observables import (
    CommutatorScaling,
    MacroObservable,
    OverlapReport,
    build_intensive,
    commutator_norm,
    commutator_scaling_sweep,
    offdiag_overlap,
)
from .pointer import (
    GaussianPacket,
    GaussianPointerState,
    PointerRevival,
    branch_log_overlap,
    branch_overlap,
    branch_spatial_overlap,
    classical_crossing_time,
    com_position,
    com_trajectory,
    free_evolve,
    gaussian_overlap,
    mean_momentum,
    phase_cell_labels,
    revival_trajectory,
    sigma_crossing_time,
    spatial_overlap,
    total_momentum,
    uniform_branch,
)
from .states import (
    BasisAmbiguityReport,
    MacroState,
    MixtureReport,
    analyze,
    basis_ambiguity_test,
    coarse_variance,
    is_macro_state,
    macro_expectation,
    mixture_test,
    random_cell_vector,
)

__version__ = "0.1.0"

__all__ = [
    "KERNEL_BACKEND",
    "__version__",
    # hilbert
    "PAULI_X",
    "PAULI_Y",
    "PAULI_Z",
    "DimensionCapError",
    "HilbertSpace",
    "LocalOperator",
    "ManyBodyOperator",
    "SpectralDecomposition",
    "accumulate_placement",
    "basis_state",
    "build_hamiltonian",
    "diagonalize",
    "embed",
    "op_norm",
    "product_state",
    # observables
    "CommutatorScaling",
    "MacroObservable",
    "OverlapReport",
    "build_intensive",
    "commutator_norm",
    "commutator_scaling_sweep",
    "offdiag_overlap",
    # cells
    "CellResolution",
    "PhaseCell",
    "PhaseCellDecomposition",
    "coarse_observable",
    "decompose",
    "residual",
    # states
    "BasisAmbiguityReport",
    "MacroState",
    "MixtureReport",
    "analyze",
    "basis_ambiguity_test",
    "coarse_variance",
    "is_macro_state",
    "macro_expectation",
    "mixture_test",
    "random_cell_vector",
    # dynamics
    "DisorderReport",
    "EvolutionContext",
    "RevivalReport",
    "TransitionMatrix",
    "WeightTrajectory",
    "coherent_pair_state",
    "diagonality_index",
    "disorder_residual",
    "evolve",
    "propagator",
    "revival_scenario",
    "transition_matrix",
    "weights_trajectory",
    # pointer
    "GaussianPacket",
    "GaussianPointerState",
    "PointerRevival",
    "branch_log_overlap",
    "branch_overlap",
    "branch_spatial_overlap",
    "classical_crossing_time",
    "com_position",
    "com_trajectory",
    "free_evolve",
    "gaussian_overlap",
    "phase_cell_labels",
    "revival_trajectory",
    "sigma_crossing_time",
    "spatial_overlap",
    "mean_momentum",
    "total_momentum",
    "uniform_branch",
]
