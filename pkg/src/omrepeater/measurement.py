"""
Projective measurements on subsets of modes and atoms.

A :class:`ProjectorSpec` fixes the occupancy of some modes and the level of
some atoms.  Projecting keeps the matching amplitudes; the post-measurement
state lives on the space of the unmeasured subsystems (see
:meth:`SpaceDescriptor.without` for how the remaining factors are renumbered).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Optional

import numpy as np

from .hilbert import AtomLevel, HilbertSpaceError, StateVector, Subsystem

__all__ = [
    "ProjectorSpec",
    "MeasurementOutcome",
    "project",
    "enumerate_outcomes",
    "PROBABILITY_FLOOR",
]

PROBABILITY_FLOOR = 1e-14


@dataclass(frozen=True)
class ProjectorSpec:
    mode_outcomes: Mapping[str, int] = field(default_factory=dict)
    atom_outcomes: Mapping[int, AtomLevel] = field(default_factory=dict)

    def __post_init__(self):
        modes = {str(k): int(v) for k, v in dict(self.mode_outcomes).items()}
        atoms = {int(k): AtomLevel(v) for k, v in dict(self.atom_outcomes).items()}
        if not modes and not atoms:
            raise HilbertSpaceError("a projector needs at least one constraint")
        object.__setattr__(self, "mode_outcomes", modes)
        object.__setattr__(self, "atom_outcomes", atoms)

    def __hash__(self):
        return hash((tuple(sorted(self.mode_outcomes.items())), tuple(sorted(self.atom_outcomes.items()))))

    def constraints(self) -> list[tuple[Subsystem, int]]:
        """(subsystem, local index) pairs."""
        out: list[tuple[Subsystem, int]] = list(self.mode_outcomes.items())
        out += [(k, level.local_index) for k, level in self.atom_outcomes.items()]
        return out

    def label(self) -> str:
        parts = [f"{m}={n}" for m, n in self.mode_outcomes.items()]
        parts += [f"atom{k}={lvl.name}" for k, lvl in self.atom_outcomes.items()]
        return ",".join(parts)


@dataclass(frozen=True, eq=False)
class MeasurementOutcome:
    spec: ProjectorSpec
    probability: float
    post_state: Optional[StateVector]
    # projected amplitudes before renormalization, on the post-state space
    unnormalized: Optional[np.ndarray] = None

    @property
    def defined(self) -> bool:
        return self.post_state is not None


def _index(state: StateVector, spec: ProjectorSpec) -> tuple[list[int], tuple]:
    space = state.space
    axes, picks = [], []
    for sub, local in spec.constraints():
        axis = space.axis(sub)
        if axis in axes:
            raise HilbertSpaceError(f"subsystem {sub!r} constrained twice")
        if not 0 <= local < space.dims[axis]:
            raise HilbertSpaceError(f"outcome {local} outside the range of {sub!r}")
        axes.append(axis)
        picks.append(local)
    index = [slice(None)] * len(space.dims)
    for axis, local in zip(axes, picks):
        index[axis] = local
    return axes, tuple(index)


def project(
    state: StateVector, spec: ProjectorSpec, floor: float = PROBABILITY_FLOOR
) -> MeasurementOutcome:
    """Post-select ``state`` on ``spec``.

    The outcome probability is the squared norm of the kept amplitudes.
    Outcomes with probability at or below ``floor`` have no post state.
    """
    _, index = _index(state, spec)
    kept = state.tensor()[index].reshape(-1).copy()
    rest = state.space.without(sub for sub, _ in spec.constraints())
    prob = float(np.vdot(kept, kept).real)
    post = None
    if prob > floor:
        post = StateVector(kept / np.sqrt(prob), rest)
    return MeasurementOutcome(spec, prob, post, kept)


def enumerate_outcomes(
    state: StateVector,
    measured: Iterable[Subsystem],
    floor: float = PROBABILITY_FLOOR,
) -> list[MeasurementOutcome]:
    """All outcomes of jointly measuring ``measured`` with probability above ``floor``.

    Outcomes come in canonical order (row-major over the measured factors in
    their canonical axis order).
    """
    space = state.space
    measured = list(dict.fromkeys(measured))
    if not measured:
        raise HilbertSpaceError("nothing to measure")
    axes = sorted(space.axis(s) for s in measured)
    by_axis = {space.axis(s): s for s in measured}
    others = tuple(ax for ax in range(len(space.dims)) if ax not in axes)
    weights = (np.abs(state.tensor()) ** 2).sum(axis=others)
    outcomes = []
    for combo in itertools.product(*(range(space.dims[ax]) for ax in axes)):
        if weights[combo] <= floor:
            continue
        modes, atoms = {}, {}
        for ax, local in zip(axes, combo):
            sub = by_axis[ax]
            if isinstance(sub, str):
                modes[sub] = local
            else:
                atoms[sub] = AtomLevel(local + 1)
        outcomes.append(project(state, ProjectorSpec(modes, atoms), floor))
    return outcomes
