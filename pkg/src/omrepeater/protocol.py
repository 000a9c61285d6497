"""
The three-stage repeater: two optomechanical swaps, then one optical-cavity swap.

Stage A entangles atoms (1, 4) by evolving (2, 3) in an optomechanical cavity
and measuring the cavity photon, the phonon and atoms (2, 3); the same is done
for (5, 8) through (6, 7).  Stage B evolves atoms (4, 5) in an optical cavity
starting from one of four kept products of the stage-A pair states, then
measures (4, 5), leaving the target pair (1, 8) entangled.

:func:`run_full_protocol` returns a :class:`ProtocolTree` with every measurement
branch, its conditional and cumulative probability, and the pair summaries.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .dynamics import (
    STAGE_B_CASES,
    StageASolution,
    stage_a_coefficients,
    stage_b_coefficients,
)
from .hilbert import AtomLevel
from .measurement import MeasurementOutcome, ProjectorSpec, enumerate_outcomes, project
from .metrics import PairStateSummary
from .models import ModelParams

__all__ = [
    "Stage",
    "Classification",
    "BranchRecord",
    "ProtocolTree",
    "Report",
    "run_stage_a",
    "run_full_protocol",
    "verify_symmetries",
    "check_invariants",
    "SYMMETRY_IDENTITIES",
]

L1, L3 = AtomLevel.L1, AtomLevel.L3
IDENTITY_TOL = 1e-10

# atoms labelled (2, 3) are indices 1, 2 of the stage-A space; (4, 5) are 1, 2 of stage B
_STAGE_A_MEASURED = ("a1", "b1", 1, 2)
_STAGE_B_MEASURED = (1, 2)

_STAGE_A_NAMES = {
    ProjectorSpec({"a1": 0, "b1": 0}, {1: L3, 2: L1}): "psi1",
    ProjectorSpec({"a1": 0, "b1": 0}, {1: L1, 2: L3}): "psi2",
    ProjectorSpec({"a1": 1, "b1": 1}, {1: L3, 2: L3}): "psi3",
}
_HERALDED_BELL = "psi3"
SUCCESS_SPECS = {
    False: ProjectorSpec({}, {1: L1, 2: L3}),  # keeps B2, B5
    True: ProjectorSpec({}, {1: L3, 2: L1}),  # keeps B1, B6
}


class Stage(enum.Enum):
    A_LEFT = "A_left"
    A_RIGHT = "A_right"
    B = "B"


class Classification(enum.Enum):
    SUCCESS = "success"
    HERALDED_BELL = "heralded_bell"
    FAILURE = "failure"


@dataclass(frozen=True)
class BranchRecord:
    stage: Stage
    outcome_label: ProjectorSpec
    conditional_probability: float
    cumulative_probability: float
    pair_summary: Optional[PairStateSummary]
    classification: Classification
    name: str = ""
    case_id: Optional[int] = None


@dataclass
class Report:
    """Maximum deviation per checked identity against one tolerance."""

    deviations: dict[str, float] = field(default_factory=dict)
    tolerance: float = IDENTITY_TOL

    @property
    def failures(self) -> list[str]:
        return [k for k, v in self.deviations.items() if not v <= self.tolerance]

    @property
    def passed(self) -> bool:
        return not self.failures

    def lines(self) -> list[str]:
        return [
            f"{'PASS' if v <= self.tolerance else 'FAIL'}  {k:<28s} max deviation {v:.3e}"
            for k, v in self.deviations.items()
        ]


@dataclass
class ProtocolTree:
    params: ModelParams
    t: float
    tau: float
    branches: list[BranchRecord]
    final_results: dict[tuple[int, bool], PairStateSummary]
    stage_a: StageASolution

    def stage_branches(self, stage: Stage, case_id: Optional[int] = None) -> list[BranchRecord]:
        return [
            b for b in self.branches if b.stage == stage and (case_id is None or b.case_id == case_id)
        ]

    def node_sums(self) -> dict[str, float]:
        """Total conditional probability leaving each measurement node."""
        sums = {
            "A_left": sum(b.conditional_probability for b in self.stage_branches(Stage.A_LEFT)),
            "A_right": sum(b.conditional_probability for b in self.stage_branches(Stage.A_RIGHT)),
        }
        for case in STAGE_B_CASES:
            sums[f"B case {case}"] = sum(
                b.conditional_probability for b in self.stage_branches(Stage.B, case)
            )
        return sums

    def E(self, case_id: int, primed: bool = False) -> float:
        return self.final_results[(case_id, primed)].E

    def P(self, case_id: int, primed: bool = False) -> float:
        return self.final_results[(case_id, primed)].P


def _pair_summary(outcome: MeasurementOutcome) -> Optional[PairStateSummary]:
    """Summary if the post state is c1|L1,L3> + c2|L3,L1> on the remaining two atoms."""
    amps = outcome.unnormalized
    if amps is None or outcome.probability == 0:
        return None
    post_space = outcome.post_state.space
    tensor = amps.reshape(post_space.dims)
    # any remaining modes must be in vacuum for a pure pair state
    lead = (0,) * (len(post_space.dims) - 2)
    if post_space.atom_count != 2:
        return None
    c1 = tensor[lead + (0, 2)]
    c2 = tensor[lead + (2, 0)]
    if abs(outcome.probability - (abs(c1) ** 2 + abs(c2) ** 2)) > 1e-12 * max(outcome.probability, 1e-300) + 1e-15:
        return None
    return PairStateSummary.from_amplitudes(c1, c2)


def run_stage_a(
    params: ModelParams,
    t: float,
    stage: Stage = Stage.A_LEFT,
    solution: Optional[StageASolution] = None,
) -> list[BranchRecord]:
    """Every outcome of measuring (a1; b1) and the middle atom pair after time ``t``."""
    if t < 0:
        raise ValueError("t must be non-negative")
    sol = stage_a_coefficients(params, t) if solution is None else solution
    records = []
    for out in enumerate_outcomes(sol.state(), _STAGE_A_MEASURED):
        name = _STAGE_A_NAMES.get(out.spec, "")
        summary = _pair_summary(out)
        if name == _HERALDED_BELL:
            cls = Classification.HERALDED_BELL
        elif summary is not None:
            cls = Classification.SUCCESS
        else:
            cls = Classification.FAILURE
        records.append(
            BranchRecord(stage, out.spec, out.probability, out.probability, summary, cls, name)
        )
    return records


def run_full_protocol(params: ModelParams, t: float, tau: float) -> ProtocolTree:
    if tau < t:
        raise ValueError(f"tau={tau} precedes t={t}")
    sol = stage_a_coefficients(params, t)
    left = run_stage_a(params, t, Stage.A_LEFT, sol)
    right = run_stage_a(params, t, Stage.A_RIGHT, sol)
    p_left = {b.name: b.conditional_probability for b in left if b.name}
    p_right = {b.name: b.conditional_probability for b in right if b.name}
    branches = list(left) + list(right)
    final: dict[tuple[int, bool], PairStateSummary] = {}
    for case, (x, y) in STAGE_B_CASES.items():
        state = stage_b_coefficients(sol, params, case, tau).state()
        upstream = p_left.get(f"psi{x}", 0.0) * p_right.get(f"psi{y}", 0.0)
        for out in enumerate_outcomes(state, _STAGE_B_MEASURED):
            summary = _pair_summary(out)
            primed = out.spec == SUCCESS_SPECS[True]
            success = summary is not None and out.spec in SUCCESS_SPECS.values()
            branches.append(
                BranchRecord(
                    Stage.B,
                    out.spec,
                    out.probability,
                    upstream * out.probability,
                    summary,
                    Classification.SUCCESS if success else Classification.FAILURE,
                    ("psi'" if primed else "psi") if success else "",
                    case,
                )
            )
        for primed, spec in SUCCESS_SPECS.items():
            out = project(state, spec)
            summary = _pair_summary(out)
            final[(case, primed)] = summary or PairStateSummary(0j, 0j, 0.0, 0.0)
    return ProtocolTree(params, float(t), float(tau), branches, final, sol)


# (left, right) pairs of (case, primed) keys that must agree
SYMMETRY_IDENTITIES: tuple[tuple[tuple[int, bool], tuple[int, bool]], ...] = (
    ((1, False), (1, True)),
    ((2, False), (2, True)),
    ((1, False), (2, False)),
    ((3, False), (4, True)),
    ((4, False), (3, True)),
)


def _key(case: int, primed: bool) -> str:
    return f"{case}{chr(39) if primed else ''}"


def verify_symmetries(tree: ProtocolTree, tol: float = IDENTITY_TOL) -> Report:
    report = Report(tolerance=tol)
    for lhs, rhs in SYMMETRY_IDENTITIES:
        a, b = tree.final_results[lhs], tree.final_results[rhs]
        report.deviations[f"E{_key(*lhs)} = E{_key(*rhs)}"] = abs(a.E - b.E)
        report.deviations[f"P{_key(*lhs)} = P{_key(*rhs)}"] = abs(a.P - b.P)
    return report


def check_invariants(tree: ProtocolTree, tol: float = IDENTITY_TOL) -> Report:
    """Probability conservation, stage-A identities and the pair symmetries."""
    report = Report(tolerance=tol)
    for node, total in tree.node_sums().items():
        report.deviations[f"sum P at {node}"] = abs(total - 1.0)
    a = tree.stage_a.a
    report.deviations["A1 = 1/2"] = abs(a[0] - 0.5)
    report.deviations["A2 = A9, A3 = A10, A4 = A11"] = float(np.abs(a[1:4] - a[8:11]).max())
    report.deviations["A6 = A7"] = abs(a[5] - a[6])
    report.deviations["A2 - A3 = 1/2"] = abs(a[1] - a[2] - 0.5)
    report.deviations["sum |A|^2 = 1"] = abs(float(np.sum(np.abs(a) ** 2)) - 1.0)
    left = [b.conditional_probability for b in tree.stage_branches(Stage.A_LEFT)]
    right = [b.conditional_probability for b in tree.stage_branches(Stage.A_RIGHT)]
    report.deviations["A_left == A_right"] = (
        float(np.abs(np.subtract(left, right)).max()) if len(left) == len(right) else np.inf
    )
    a1_branch = [
        b for b in tree.stage_branches(Stage.A_LEFT)
        if b.outcome_label == ProjectorSpec({"a1": 0, "b1": 0}, {1: L3, 2: L3})
    ]
    report.deviations["A1 branch P = 1/4"] = (
        abs(a1_branch[0].conditional_probability - 0.25) if a1_branch else np.inf
    )
    report.deviations.update(verify_symmetries(tree, tol).deviations)
    return report
