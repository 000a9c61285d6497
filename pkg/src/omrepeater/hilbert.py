"""
Composite Hilbert spaces of truncated bosonic modes and three-level atoms.

A space is described by the occupancy caps of its photon modes ``a1, a2, ...``,
the caps of its phonon modes ``b1, b2, ...`` and a number of V-type atoms.
Basis states are ordered canonically (row-major over the tensor factors)::

    (n_a1, n_a2, ..., n_b1, n_b2, ..., atom_0, atom_1, ...)

so the flat index varies fastest over the last atom, then the earlier atoms,
then the phonon modes and finally the photon modes.  Atom level ``L1`` sits at
local index 0, ``L3`` at local index 2.

Everything is dense; the largest spaces used by the package have a few
thousand basis states.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Iterable, Sequence, Union

import numpy as np

__all__ = [
    "AtomLevel",
    "HilbertSpaceError",
    "CapacityError",
    "SpaceDescriptor",
    "CompositeBasisState",
    "StateVector",
    "OperatorMatrix",
    "build_space",
    "basis_index",
    "basis_state",
    "basis_vector",
    "mode_annihilator",
    "number_operator",
    "atomic_transition",
    "identity",
    "DEFAULT_MAX_DIMENSION",
]

DEFAULT_MAX_DIMENSION = 100_000
NORM_SLACK = 1e-12
HERMITIAN_TOL = 1e-12

Subsystem = Union[str, int]


class HilbertSpaceError(ValueError):
    """Invalid space, state or subsystem reference."""


class CapacityError(HilbertSpaceError):
    """The requested space exceeds the dimension guard."""


class AtomLevel(enum.IntEnum):
    """Levels of a V-type atom: two upper levels L1, L2 and the lower level L3."""

    L1 = 1
    L2 = 2
    L3 = 3

    @property
    def local_index(self) -> int:
        return int(self) - 1


@dataclass(frozen=True)
class SpaceDescriptor:
    photon_caps: tuple[int, ...] = ()
    phonon_caps: tuple[int, ...] = ()
    atom_count: int = 0

    def __post_init__(self):
        object.__setattr__(self, "photon_caps", tuple(int(c) for c in self.photon_caps))
        object.__setattr__(self, "phonon_caps", tuple(int(c) for c in self.phonon_caps))
        if any(c < 0 for c in self.photon_caps + self.phonon_caps):
            raise HilbertSpaceError("occupancy caps must be non-negative")
        if self.atom_count < 0:
            raise HilbertSpaceError("atom_count must be non-negative")

    @property
    def mode_names(self) -> tuple[str, ...]:
        return tuple(f"a{j + 1}" for j in range(len(self.photon_caps))) + tuple(
            f"b{j + 1}" for j in range(len(self.phonon_caps))
        )

    @property
    def dims(self) -> tuple[int, ...]:
        """Local dimension of every tensor factor, in canonical order."""
        return tuple(c + 1 for c in self.photon_caps + self.phonon_caps) + (3,) * self.atom_count

    @property
    def dimension(self) -> int:
        return math.prod(self.dims)

    @property
    def subsystems(self) -> tuple[Subsystem, ...]:
        """Identifiers of the tensor factors: mode names, then atom indices."""
        return self.mode_names + tuple(range(self.atom_count))

    def axis(self, subsystem: Subsystem) -> int:
        """Tensor axis of a mode name (``"a1"``, ``"b2"``) or an atom index."""
        if isinstance(subsystem, (int, np.integer)) and not isinstance(subsystem, bool):
            if not 0 <= subsystem < self.atom_count:
                raise HilbertSpaceError(
                    f"atom index {subsystem} out of range for {self.atom_count} atoms"
                )
            return len(self.mode_names) + int(subsystem)
        try:
            return self.mode_names.index(subsystem)
        except ValueError:
            raise HilbertSpaceError(f"unknown subsystem {subsystem!r}") from None

    def cap(self, mode: str) -> int:
        return self.dims[self.axis(mode)] - 1

    def without(self, subsystems: Iterable[Subsystem]) -> "SpaceDescriptor":
        """Space left after removing some factors.

        Remaining modes of each kind are renumbered from 1 and remaining atoms
        from 0, preserving their relative order.
        """
        drop = {self.axis(s) for s in subsystems}
        n_a = len(self.photon_caps)
        n_b = len(self.phonon_caps)
        photons = tuple(c for j, c in enumerate(self.photon_caps) if j not in drop)
        phonons = tuple(c for j, c in enumerate(self.phonon_caps) if n_a + j not in drop)
        atoms = sum(1 for k in range(self.atom_count) if n_a + n_b + k not in drop)
        return SpaceDescriptor(photons, phonons, atoms)


@dataclass(frozen=True)
class CompositeBasisState:
    photon_occupancies: tuple[int, ...] = ()
    phonon_occupancies: tuple[int, ...] = ()
    atom_levels: tuple[AtomLevel, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "photon_occupancies", tuple(int(n) for n in self.photon_occupancies))
        object.__setattr__(self, "phonon_occupancies", tuple(int(n) for n in self.phonon_occupancies))
        object.__setattr__(self, "atom_levels", tuple(AtomLevel(v) for v in self.atom_levels))

    def local_indices(self) -> tuple[int, ...]:
        return (
            self.photon_occupancies
            + self.phonon_occupancies
            + tuple(level.local_index for level in self.atom_levels)
        )


def build_space(
    photon_caps: Sequence[int] = (),
    phonon_caps: Sequence[int] = (),
    atom_count: int = 0,
    max_dimension: int = DEFAULT_MAX_DIMENSION,
) -> SpaceDescriptor:
    """Create a space descriptor, refusing anything larger than ``max_dimension``."""
    space = SpaceDescriptor(tuple(photon_caps), tuple(phonon_caps), int(atom_count))
    if space.dimension > max_dimension:
        raise CapacityError(
            f"space dimension {space.dimension} exceeds the guard of {max_dimension}"
        )
    return space


def basis_index(space: SpaceDescriptor, state: CompositeBasisState) -> int:
    if (
        len(state.photon_occupancies) != len(space.photon_caps)
        or len(state.phonon_occupancies) != len(space.phonon_caps)
        or len(state.atom_levels) != space.atom_count
    ):
        raise HilbertSpaceError("basis state does not match the space layout")
    idx = state.local_indices()
    for n, d in zip(idx, space.dims):
        if not 0 <= n < d:
            raise HilbertSpaceError(f"occupancy {n} outside cap {d - 1}")
    if not idx:
        return 0
    return int(np.ravel_multi_index(idx, space.dims))


def basis_state(space: SpaceDescriptor, index: int) -> CompositeBasisState:
    """Inverse of :func:`basis_index`."""
    if not 0 <= index < space.dimension:
        raise HilbertSpaceError(f"index {index} outside [0, {space.dimension})")
    idx = np.unravel_index(index, space.dims) if space.dims else ()
    n_a = len(space.photon_caps)
    n_b = len(space.phonon_caps)
    return CompositeBasisState(
        tuple(int(v) for v in idx[:n_a]),
        tuple(int(v) for v in idx[n_a : n_a + n_b]),
        tuple(AtomLevel(int(v) + 1) for v in idx[n_a + n_b :]),
    )


@dataclass(frozen=True, eq=False)
class StateVector:
    amplitudes: np.ndarray
    space: SpaceDescriptor

    def __post_init__(self):
        amps = np.array(self.amplitudes, dtype=complex).reshape(-1)
        if amps.shape[0] != self.space.dimension:
            raise HilbertSpaceError(
                f"{amps.shape[0]} amplitudes for a space of dimension {self.space.dimension}"
            )
        if np.vdot(amps, amps).real > 1 + NORM_SLACK:
            raise HilbertSpaceError("state has squared norm above one")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def tensor(self) -> np.ndarray:
        """Amplitudes reshaped to one axis per subsystem."""
        return self.amplitudes.reshape(self.space.dims)

    def amplitude(self, state: CompositeBasisState) -> complex:
        return complex(self.amplitudes[basis_index(self.space, state)])

    def normalized(self) -> "StateVector":
        n = self.norm
        if n == 0:
            raise HilbertSpaceError("cannot normalize the zero vector")
        return StateVector(self.amplitudes / n, self.space)


@dataclass(frozen=True, eq=False)
class OperatorMatrix:
    entries: np.ndarray
    space: SpaceDescriptor
    hermitian: bool = False

    def __post_init__(self):
        m = np.array(self.entries, dtype=complex)
        d = self.space.dimension
        if m.shape != (d, d):
            raise HilbertSpaceError(f"operator shape {m.shape} does not match dimension {d}")
        if self.hermitian and d and np.abs(m - m.conj().T).max() >= HERMITIAN_TOL:
            raise HilbertSpaceError("operator flagged hermitian but M != M^dagger")
        m.flags.writeable = False
        object.__setattr__(self, "entries", m)

    def dag(self) -> "OperatorMatrix":
        return OperatorMatrix(self.entries.conj().T, self.space, self.hermitian)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.abs(self.entries - self.entries.conj().T).max(initial=0.0) < tol)

    def _check(self, other: "OperatorMatrix | StateVector"):
        if other.space != self.space:
            raise HilbertSpaceError("operands live on different spaces")

    def __matmul__(self, other):
        if isinstance(other, OperatorMatrix):
            self._check(other)
            return OperatorMatrix(self.entries @ other.entries, self.space)
        if isinstance(other, StateVector):
            self._check(other)
            return self.entries @ other.amplitudes
        return NotImplemented

    def __add__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        self._check(other)
        return OperatorMatrix(
            self.entries + other.entries, self.space, self.hermitian and other.hermitian
        )

    def __sub__(self, other):
        if not isinstance(other, OperatorMatrix):
            return NotImplemented
        self._check(other)
        return OperatorMatrix(
            self.entries - other.entries, self.space, self.hermitian and other.hermitian
        )

    def __mul__(self, scalar):
        if not np.isscalar(scalar):
            return NotImplemented
        real = np.isreal(scalar)
        return OperatorMatrix(self.entries * scalar, self.space, self.hermitian and bool(real))

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0


def basis_vector(space: SpaceDescriptor, state: CompositeBasisState) -> StateVector:
    amps = np.zeros(space.dimension, dtype=complex)
    amps[basis_index(space, state)] = 1.0
    return StateVector(amps, space)


def _embed(space: SpaceDescriptor, axis: int, local: np.ndarray) -> np.ndarray:
    """Kronecker-embed a local operator acting on one tensor factor."""
    dims = space.dims
    left = math.prod(dims[:axis])
    right = math.prod(dims[axis + 1 :])
    return np.kron(np.kron(np.eye(left), local), np.eye(right))


def identity(space: SpaceDescriptor) -> OperatorMatrix:
    return OperatorMatrix(np.eye(space.dimension), space, hermitian=True)


def mode_annihilator(space: SpaceDescriptor, mode: str) -> OperatorMatrix:
    """Truncated annihilation operator of the photon (``a_j``) or phonon (``b_j``) mode."""
    if not isinstance(mode, str):
        raise HilbertSpaceError(f"mode identifier must be a name like 'a1', got {mode!r}")
    axis = space.axis(mode)
    d = space.dims[axis]
    local = np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)
    return OperatorMatrix(_embed(space, axis, local), space)


def number_operator(space: SpaceDescriptor, mode: str) -> OperatorMatrix:
    axis = space.axis(mode)
    d = space.dims[axis]
    return OperatorMatrix(_embed(space, axis, np.diag(np.arange(d, dtype=float))), space, True)


def atomic_transition(
    space: SpaceDescriptor, atom_index: int, l: AtomLevel, m: AtomLevel
) -> OperatorMatrix:
    """sigma_lm = |l><m| on one atom, identity on everything else."""
    if not isinstance(atom_index, (int, np.integer)) or isinstance(atom_index, bool):
        raise HilbertSpaceError(f"atom index must be an integer, got {atom_index!r}")
    axis = space.axis(int(atom_index))
    l, m = AtomLevel(l), AtomLevel(m)
    local = np.zeros((3, 3))
    local[l.local_index, m.local_index] = 1.0
    return OperatorMatrix(_embed(space, axis, local), space, hermitian=(l == m))
