"""Dissipative preparation of maximally discordant two-qubit mixed states.

A simulation library and CLI for two cavity-QED schemes that pump a pair of
qubits into the rank-3 separable state with maximal quantum discord:
full and effective Lindblad models, a Trotterized phase-switching protocol,
steady-state analysis, phase-mismatch variants, and all correlation
measures used to characterize the result.
"""

from .correlations import (
    CorrelationReport,
    binary_entropy,
    concurrence,
    mutual_information,
    population,
    super_fidelity,
    von_neumann_entropy,
    xstate_discord_cc,
)
from .dynamics import (
    NumericalFailure,
    SwitchingSchedule,
    Trajectory,
    dark_state_check,
    evolve,
    liouvillian_matrix,
    propagator,
    steady_states,
    trotter_evolve,
)
from .models import (
    BranchingRatios,
    LindbladModel,
    PhaseMismatch,
    PhaseMode,
    SchemeConfig,
    build_chi_model,
    build_combined_effective,
    build_mismatch_a,
    build_mismatch_b,
    build_scheme_a_effective,
    build_scheme_a_full,
    build_scheme_b_effective,
    build_scheme_b_full,
    build_subspace_model,
    delocalized_modes,
    mdms_family,
    restrict_model,
    target_state,
)
from .qlinalg import (
    ComplexOperator,
    DensityMatrix,
    SubsystemLayout,
    embed,
    herm_eigen,
    partial_trace,
    tensor,
)

__version__ = "0.1.0"

__all__ = [name for name in dir() if not name.startswith("_")]
