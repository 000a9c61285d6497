"""Simulation of a three-stage atomic quantum repeater built from two
optomechanical cavities and one optical cavity."""

from .hilbert import (
    AtomLevel,
    CapacityError,
    CompositeBasisState,
    HilbertSpaceError,
    OperatorMatrix,
    SpaceDescriptor,
    StateVector,
    atomic_transition,
    basis_index,
    basis_state,
    build_space,
    mode_annihilator,
)
from .models import (
    AssumptionError,
    ModelParams,
    h_coupling,
    h_eff_stage_a,
    h_eff_stage_b,
    h_free,
    h_interaction_picture,
    h_stage_b,
)
from .dynamics import (
    STAGE_A_KETS,
    STAGE_B_KETS,
    StageASolution,
    StageBSolution,
    integrate_ode,
    propagate,
    stage_a_coefficients,
    stage_b_coefficients,
)
from .measurement import MeasurementOutcome, ProjectorSpec, enumerate_outcomes, project
from .metrics import PairStateSummary, linear_entropy_two_term, reduced_purity, success_probability
from .protocol import (
    BranchRecord,
    Classification,
    ProtocolTree,
    Stage,
    check_invariants,
    run_full_protocol,
    run_stage_a,
    verify_symmetries,
)

__version__ = "0.1.0"
