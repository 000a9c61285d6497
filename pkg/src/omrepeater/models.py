"""
Hamiltonians of the optomechanical (stage A) and optical-cavity (stage B) steps.

All builders take a :class:`ModelParams`, a :class:`~omrepeater.hilbert.SpaceDescriptor`
and an ``atom_map`` assigning protocol atom labels (1..8) to atom indices of the
space.  Stage A acts on the atom pair (2, 3) or (6, 7); stage B on (4, 5).  The
first atom of the pair carries the unprimed frequencies and couplings, the
second the primed ones.

The effective Hamiltonians are written out term by term; they are not derived
here.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Mapping, Optional

import numpy as np

from .hilbert import (
    AtomLevel,
    HilbertSpaceError,
    OperatorMatrix,
    SpaceDescriptor,
)

__all__ = [
    "ModelParams",
    "AssumptionError",
    "default_atom_map",
    "h_free",
    "h_coupling",
    "h_interaction_picture",
    "h_eff_stage_a",
    "h_stage_b",
    "h_eff_stage_b",
]

L1, L2, L3 = AtomLevel.L1, AtomLevel.L2, AtomLevel.L3

STAGE_A_PAIRS = ((2, 3), (6, 7))
STAGE_B_PAIRS = ((4, 5),)


class AssumptionError(ValueError):
    """Parameters violate the equal-coupling / resonance simplification."""


@dataclass(frozen=True)
class ModelParams:
    """Couplings and bare frequencies (hbar = 1).

    ``atom_freqs`` are the level energies of the first atom of a pair,
    ``atom_freqs_p`` those of the second.  Use :meth:`simplified` to get a
    parameter set satisfying every assumption behind the interaction-picture
    and effective Hamiltonians.
    """

    lambda1: float = 1.0
    lambda2: float = 1.0
    lambda1p: float = 1.0
    lambda2p: float = 1.0
    g: float = 2.0
    gp: float = 2.0
    omega_m: float = 0.5
    atom_freqs: tuple[float, float, float] = (10.5, 10.5, 0.0)
    atom_freqs_p: tuple[float, float, float] = (10.5, 10.5, 0.0)
    photon_freqs: tuple[float, float] = (10.0, 10.0)
    phonon_freqs: tuple[float, float] = (0.5, 0.5)

    def __post_init__(self):
        for name in ("atom_freqs", "atom_freqs_p", "photon_freqs", "phonon_freqs"):
            object.__setattr__(self, name, tuple(float(v) for v in getattr(self, name)))
        if len(self.atom_freqs) != 3 or len(self.atom_freqs_p) != 3:
            raise ValueError("atom_freqs need three level energies")
        if len(self.photon_freqs) != 2 or len(self.phonon_freqs) != 2:
            raise ValueError("two photon and two phonon frequencies are required")
        rates = (
            self.lambda1, self.lambda2, self.lambda1p, self.lambda2p,
            self.g, self.gp, self.omega_m, *self.photon_freqs, *self.phonon_freqs,
        )
        if not all(math.isfinite(r) and r > 0 for r in rates):
            raise ValueError("couplings and mode frequencies must be positive and finite")

    @classmethod
    def simplified(
        cls,
        omega_m: float = 0.5,
        g: float = 2.0,
        lambda1: float = 1.0,
        lambda2: Optional[float] = None,
        photon_freq: Optional[float] = None,
    ) -> "ModelParams":
        """Parameters obeying the simplification preset exactly.

        The lower level sits at zero energy, both cavity modes at
        ``photon_freq`` (default ``10 * lambda1``) and the upper levels are
        placed at ``photon_freq + omega_m`` so both transitions are detuned
        from their cavity mode by exactly the mechanical frequency.
        """
        lambda2 = lambda1 if lambda2 is None else lambda2
        big = 10.0 * lambda1 if photon_freq is None else photon_freq
        atoms = (big + omega_m, big + omega_m, 0.0)
        return cls(
            lambda1=lambda1, lambda2=lambda2, lambda1p=lambda1, lambda2p=lambda2,
            g=g, gp=g, omega_m=omega_m,
            atom_freqs=atoms, atom_freqs_p=atoms,
            photon_freqs=(big, big), phonon_freqs=(omega_m, omega_m),
        )

    def rescaled(self, **changes) -> "ModelParams":
        return replace(self, **changes)

    def simplification_violations(self, rtol: float = 1e-12) -> list[str]:
        """Names of the preset equalities that do not hold to ``rtol``."""

        def differ(x, y):
            scale = max(abs(x), abs(y))
            return abs(x - y) > rtol * (scale if scale > 0 else 1.0)

        w, wp = self.atom_freqs, self.atom_freqs_p
        checks = {
            "lambda1 == lambda1'": (self.lambda1, self.lambda1p),
            "lambda2 == lambda2'": (self.lambda2, self.lambda2p),
            "G == G'": (self.g, self.gp),
            "omega_1 == omega_M": (self.phonon_freqs[0], self.omega_m),
            "omega_2 == omega_M": (self.phonon_freqs[1], self.omega_m),
            "w1 - w3 - Omega1 == omega_M": (w[0] - w[2] - self.photon_freqs[0], self.omega_m),
            "w2 - w3 - Omega2 == omega_M": (w[1] - w[2] - self.photon_freqs[1], self.omega_m),
        }
        for i in range(3):
            checks[f"w{i + 1} == w{i + 1}'"] = (w[i], wp[i])
        return [name for name, (x, y) in checks.items() if differ(x, y)]

    def require_simplification(self):
        bad = self.simplification_violations()
        if bad:
            raise AssumptionError("simplification preset violated: " + ", ".join(bad))


def default_atom_map(space: SpaceDescriptor, stage: str) -> dict[int, int]:
    """Label-to-index map used when a builder gets ``atom_map=None``.

    Two-atom spaces hold just the interacting pair.  Four-atom spaces hold
    atoms (1, 2, 3, 4) for stage A and (1, 4, 5, 8) for stage B.  Eight-atom
    spaces hold all atoms in order.
    """
    n = space.atom_count
    if n == 2:
        labels = (2, 3) if stage == "A" else (4, 5)
    elif n == 4:
        labels = (1, 2, 3, 4) if stage == "A" else (1, 4, 5, 8)
    elif n == 8:
        labels = tuple(range(1, 9))
    else:
        raise HilbertSpaceError(f"no default atom map for {n} atoms; pass atom_map")
    return {label: k for k, label in enumerate(labels)}


def _pair(space: SpaceDescriptor, atom_map, stage: str) -> tuple[int, int]:
    if atom_map is None:
        atom_map = default_atom_map(space, stage)
    atom_map = dict(atom_map)
    indices = list(atom_map.values())
    if len(set(indices)) != len(indices) or any(
        not 0 <= k < space.atom_count for k in indices
    ):
        raise HilbertSpaceError("atom_map inconsistent with space")
    for first, second in STAGE_A_PAIRS if stage == "A" else STAGE_B_PAIRS:
        if first in atom_map and second in atom_map:
            return atom_map[first], atom_map[second]
    raise HilbertSpaceError(f"atom_map has no stage-{stage} atom pair")


def _require_modes(space: SpaceDescriptor, photons: int, phonons: int):
    if len(space.photon_caps) != photons or len(space.phonon_caps) < phonons:
        raise HilbertSpaceError(
            f"space needs {photons} photon and {phonons} phonon modes, has "
            f"{len(space.photon_caps)} and {len(space.phonon_caps)}"
        )


class _Term:
    """Scalar times a tensor product of local operators (identity elsewhere)."""

    def __init__(self, space: SpaceDescriptor, factors: dict[int, np.ndarray], coef: complex = 1.0):
        self.space = space
        self.factors = factors
        self.coef = coef

    def __matmul__(self, other: "_Term") -> "_Term":
        factors = dict(self.factors)
        for axis, m in other.factors.items():
            factors[axis] = factors[axis] @ m if axis in factors else m
        return _Term(self.space, factors, self.coef * other.coef)

    def dag(self) -> "_Term":
        return _Term(
            self.space, {k: m.conj().T for k, m in self.factors.items()}, np.conj(self.coef)
        )

    def dense(self) -> np.ndarray:
        out = np.array([[self.coef]], dtype=complex)
        for axis, d in enumerate(self.space.dims):
            out = np.kron(out, self.factors.get(axis, np.eye(d)))
        return out


class _Ops:
    """Local factors of the elementary operators on one space."""

    def __init__(self, space: SpaceDescriptor):
        self.space = space
        self.dim = space.dimension

    def zeros(self) -> np.ndarray:
        return np.zeros((self.dim, self.dim), dtype=complex)

    def a(self, mode: str) -> _Term:
        axis = self.space.axis(mode)
        d = self.space.dims[axis]
        return _Term(self.space, {axis: np.diag(np.sqrt(np.arange(1, d, dtype=float)), k=1)})

    def n(self, mode: str) -> _Term:
        axis = self.space.axis(mode)
        return _Term(self.space, {axis: np.diag(np.arange(self.space.dims[axis], dtype=float))})

    def s(self, atom: int, l: AtomLevel, m: AtomLevel) -> _Term:
        local = np.zeros((3, 3))
        local[AtomLevel(l).local_index, AtomLevel(m).local_index] = 1.0
        return _Term(self.space, {self.space.axis(atom): local})


def _plus_hc(term: _Term) -> np.ndarray:
    m = term.dense()
    return m + m.conj().T


def _wrap(h: np.ndarray, space: SpaceDescriptor) -> OperatorMatrix:
    # symmetrize away last-bit asymmetry from the sums
    return OperatorMatrix((h + h.conj().T) / 2, space, hermitian=True)


def _free_terms(p: ModelParams, ops: _Ops, first: int, second: int, phonons: bool) -> np.ndarray:
    h = ops.zeros()
    for i, level in enumerate((L1, L2, L3)):
        h += p.atom_freqs[i] * ops.s(first, level, level).dense()
        h += p.atom_freqs_p[i] * ops.s(second, level, level).dense()
    for j in (1, 2):
        h += p.photon_freqs[j - 1] * ops.n(f"a{j}").dense()
        if phonons:
            h += p.phonon_freqs[j - 1] * ops.n(f"b{j}").dense()
    return h


def _atom_field_terms(p: ModelParams, ops: _Ops, first: int, second: int) -> np.ndarray:
    h = ops.zeros()
    for atom, (c1, c2) in ((first, (p.lambda1, p.lambda2)), (second, (p.lambda1p, p.lambda2p))):
        for mode, upper, c in (("a1", L1, c1), ("a2", L2, c2)):
            h += c * _plus_hc(ops.a(mode) @ ops.s(atom, upper, L3))
    return h


def h_free(params: ModelParams, space: SpaceDescriptor, atom_map: Optional[Mapping[int, int]] = None) -> OperatorMatrix:
    """Bare atom, cavity and mechanical energies of the stage-A cavity."""
    _require_modes(space, 2, 2)
    first, second = _pair(space, atom_map, "A")
    ops = _Ops(space)
    return _wrap(_free_terms(params, ops, first, second, phonons=True), space)


def h_coupling(params: ModelParams, space: SpaceDescriptor, atom_map: Optional[Mapping[int, int]] = None) -> OperatorMatrix:
    """Atom-cavity exchange plus radiation-pressure coupling of the stage-A cavity."""
    _require_modes(space, 2, 2)
    first, second = _pair(space, atom_map, "A")
    ops = _Ops(space)
    h = _atom_field_terms(params, ops, first, second)
    for j, g in ((1, params.g), (2, params.gp)):
        h -= g * _plus_hc(ops.n(f"a{j}") @ ops.a(f"b{j}"))
    return _wrap(h, space)


def h_interaction_picture(
    params: ModelParams, space: SpaceDescriptor, atom_map: Optional[Mapping[int, int]] = None, t: float = 0.0
) -> OperatorMatrix:
    """Coupling Hamiltonian in the frame rotating with the free Hamiltonian.

    Every term rotates at the mechanical frequency once the resonance
    conditions hold, so the result is ``exp(i omega_M t) K + h.c.``.
    """
    params.require_simplification()
    _require_modes(space, 2, 2)
    first, second = _pair(space, atom_map, "A")
    ops = _Ops(space)
    k = ops.zeros()
    for mode, upper, lam in (("a1", L1, params.lambda1), ("a2", L2, params.lambda2)):
        for atom in (first, second):
            k += lam * (ops.a(mode) @ ops.s(atom, upper, L3)).dense()
    for j in (1, 2):
        k -= params.g * (ops.n(f"a{j}") @ ops.a(f"b{j}").dag()).dense()
    k = np.exp(1j * params.omega_m * t) * k
    return _wrap(k + k.conj().T, space)


def h_eff_stage_a(params: ModelParams, space: SpaceDescriptor, atom_map: Optional[Mapping[int, int]] = None) -> OperatorMatrix:
    """Second-order effective Hamiltonian of the optomechanical stage."""
    params.require_simplification()
    _require_modes(space, 2, 2)
    pair = _pair(space, atom_map, "A")
    ops = _Ops(space)
    w = params.omega_m
    lam = {1: params.lambda1, 2: params.lambda2}
    upper = {1: L1, 2: L2}
    g = params.g
    h = ops.zeros()
    for j in (1, 2):
        nj = ops.n(f"a{j}")
        u = upper[j]
        # AC-Stark shifts
        for i in pair:
            h += lam[j] ** 2 / w * (
                ops.s(i, u, u).dense()
                + (nj @ ops.s(i, u, u)).dense()
                - (nj @ ops.s(i, L3, L3)).dense()
            )
        # atom-atom exchange through the virtual photon
        h += lam[j] ** 2 / w * _plus_hc(ops.s(pair[0], u, L3) @ ops.s(pair[1], L3, u))
        # photon Kerr term from the mechanics
        h -= g**2 / w * (nj @ nj).dense()
        # photon-phonon pair conversion
        for i in pair:
            h -= g * lam[j] / w * _plus_hc(ops.a(f"a{j}") @ ops.a(f"b{j}") @ ops.s(i, u, L3))
    for i in pair:
        h += lam[1] * lam[2] / w * _plus_hc(ops.a("a1") @ ops.a("a2").dag() @ ops.s(i, L1, L2))
    return _wrap(h, space)


def h_stage_b(params: ModelParams, space: SpaceDescriptor, atom_map: Optional[Mapping[int, int]] = None) -> OperatorMatrix:
    """Full two-atom, two-mode Hamiltonian of the optical cavity (no mechanics)."""
    _require_modes(space, 2, 0)
    first, second = _pair(space, atom_map, "B")
    ops = _Ops(space)
    h = _free_terms(params, ops, first, second, phonons=False)
    h += _atom_field_terms(params, ops, first, second)
    return _wrap(h, space)


def h_eff_stage_b(params: ModelParams, space: SpaceDescriptor, atom_map: Optional[Mapping[int, int]] = None) -> OperatorMatrix:
    """Effective atom-atom Hamiltonian of the optical cavity with the field in vacuum.

    Works on purely atomic spaces; any modes present are left untouched.
    """
    params.require_simplification()
    first, second = _pair(space, atom_map, "B")
    ops = _Ops(space)
    h = ops.zeros()
    for lam, u in ((params.lambda1, L1), (params.lambda2, L2)):
        h += lam**2 / params.omega_m * (
            ops.s(first, u, u).dense()
            + ops.s(second, u, u).dense()
            + _plus_hc(ops.s(first, u, L3) @ ops.s(second, L3, u))
        )
    return _wrap(h, space)
