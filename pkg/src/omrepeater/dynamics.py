"""
Time evolution: dense propagation, a Runge-Kutta oracle, and the coefficient
solutions of the two swapping stages.

Stage A keeps the state of atoms (1, 2, 3, 4) and the modes inside an
eleven-ket subspace (``STAGE_A_KETS``).  Its amplitudes obey one trivial
equation and three small constant-coefficient linear systems, solved here
with matrix exponentials.  Stage B amplitudes over the six kets of atoms
(1, 4, 5, 8) (``STAGE_B_KETS``) have closed forms built from the stage-A
amplitudes.

Times are measured in units of 1/lambda1 when ``params.lambda1 == 1``.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
import scipy.linalg

from .hilbert import (
    AtomLevel,
    CompositeBasisState,
    HilbertSpaceError,
    OperatorMatrix,
    SpaceDescriptor,
    StateVector,
    basis_index,
    build_space,
)
from .models import ModelParams

__all__ = [
    "propagate",
    "integrate_ode",
    "StageASolution",
    "StageBSolution",
    "STAGE_A_KETS",
    "STAGE_B_KETS",
    "STAGE_B_CASES",
    "stage_a_space",
    "stage_b_space",
    "stage_a_generators",
    "stage_a_coefficients",
    "stage_b_coefficients",
    "laplace_variables",
    "laplace_rhs",
]

L1, L3 = AtomLevel.L1, AtomLevel.L3


def _hermitian_entries(h) -> np.ndarray:
    m = h.entries if isinstance(h, OperatorMatrix) else np.asarray(h, dtype=complex)
    if m.size and np.abs(m - m.conj().T).max() >= 1e-12:
        raise HilbertSpaceError("propagation needs a hermitian generator")
    return m


def propagate(h: OperatorMatrix, psi0: StateVector, t):
    """Apply exp(-i H t) to ``psi0``.

    ``t`` may be a scalar or a sequence of times; a sequence returns a list of
    states and reuses one eigendecomposition of ``h``.
    """
    if h.space != psi0.space:
        raise HilbertSpaceError("Hamiltonian and state live on different spaces")
    m = _hermitian_entries(h)
    energies, vecs = np.linalg.eigh(m)
    c0 = vecs.conj().T @ psi0.amplitudes
    times = np.atleast_1d(np.asarray(t, dtype=float))
    out = []
    for tk in times:
        amps = vecs @ (np.exp(-1j * energies * tk) * c0)
        out.append(StateVector(amps, psi0.space))
    return out[0] if np.ndim(t) == 0 else out


def _rk4_step_matrix(m: np.ndarray, h: float) -> np.ndarray:
    """One classical RK4 step for y' = -i M y, written as a matrix."""
    z = -1j * h * m
    eye = np.eye(m.shape[0])
    z2 = z @ z
    return eye + z + z2 / 2 + z2 @ z / 6 + z2 @ z2 / 24


def integrate_ode(
    h_of_t: Union[OperatorMatrix, np.ndarray, Callable[[float], object]],
    psi0: StateVector,
    t: float,
    steps: int,
    full_output: bool = False,
):
    """Fixed-step classical Runge-Kutta (order 4) for i dpsi/dt = H(t) psi.

    ``h_of_t`` is either a constant operator or a callable returning the
    Hamiltonian (``OperatorMatrix`` or array) at a given time.  The global
    error scales as ``(t / steps) ** 4``.  With ``full_output=True`` the
    absolute norm drift ``| |psi(t)| - |psi(0)| |`` is returned as well.

    For a constant Hamiltonian the RK4 step is the same polynomial of H at
    every step, so it is formed once and applied by repeated squaring.
    """
    if steps < 1:
        raise ValueError("steps must be >= 1")
    dt = t / steps
    y0 = psi0.amplitudes
    if callable(h_of_t) and not isinstance(h_of_t, (OperatorMatrix, np.ndarray)):

        def rhs(s, y):
            hm = h_of_t(s)
            hm = hm.entries if isinstance(hm, OperatorMatrix) else np.asarray(hm)
            return -1j * (hm @ y)

        y = y0.astype(complex)
        s = 0.0
        for _ in range(steps):
            k1 = rhs(s, y)
            k2 = rhs(s + dt / 2, y + dt / 2 * k1)
            k3 = rhs(s + dt / 2, y + dt / 2 * k2)
            k4 = rhs(s + dt, y + dt * k3)
            y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            s += dt
    else:
        if isinstance(h_of_t, OperatorMatrix) and h_of_t.space != psi0.space:
            raise HilbertSpaceError("Hamiltonian and state live on different spaces")
        m = h_of_t.entries if isinstance(h_of_t, OperatorMatrix) else np.asarray(h_of_t, complex)
        if m.shape != (y0.shape[0],) * 2:
            raise HilbertSpaceError("Hamiltonian and state dimensions differ")
        y = np.linalg.matrix_power(_rk4_step_matrix(m, dt), steps) @ y0
    drift = abs(float(np.linalg.norm(y)) - psi0.norm)
    # RK4 is not unitary; allow the tiny norm growth through the constructor
    if np.vdot(y, y).real > 1:
        y = y / np.linalg.norm(y)
    state = StateVector(y, psi0.space)
    return (state, drift) if full_output else state


# --------------------------------------------------------------------------
# stage A: atoms (1, 2, 3, 4), modes (a1, a2; b1, b2)


def stage_a_space() -> SpaceDescriptor:
    """Smallest truncation holding every stage-A ket: a1, b1 up to 2 quanta."""
    return build_space((2, 0), (2, 0), 4)


def _ka(na1, nb1, levels) -> CompositeBasisState:
    return CompositeBasisState((na1, 0), (nb1, 0), tuple(AtomLevel(v) for v in levels))


# |n_a1, n_a2; n_b1, n_b2; atom1, atom2; atom3, atom4>
STAGE_A_KETS: tuple[CompositeBasisState, ...] = (
    _ka(0, 0, (1, 3, 3, 1)),
    _ka(0, 0, (1, 3, 1, 3)),
    _ka(0, 0, (1, 1, 3, 3)),
    _ka(1, 1, (1, 3, 3, 3)),
    _ka(0, 0, (3, 1, 1, 3)),
    _ka(1, 1, (3, 3, 1, 3)),
    _ka(1, 1, (3, 1, 3, 3)),
    _ka(2, 2, (3, 3, 3, 3)),
    _ka(0, 0, (3, 1, 3, 1)),
    _ka(0, 0, (3, 3, 1, 1)),
    _ka(1, 1, (3, 3, 3, 1)),
)


def stage_a_generators(params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    """Hermitian generators M of dA/dt = -i M A.

    The first acts on (A2, A3, A4) (and identically on (A9, A10, A11)), the
    second on (A5, A6, A7, A8).
    """
    lam, g, w = params.lambda1, params.g, params.omega_m
    s = lam**2 / w
    c = g * lam / w
    k = g**2 / w
    m1 = np.array(
        [
            [s, s, -c],
            [s, s, -c],
            [-c, -c, -(2 * s + k)],
        ]
    )
    m2 = np.array(
        [
            [2 * s, -c, -c, 0.0],
            [-c, s - k, s, -2 * c],
            [-c, s, s - k, -2 * c],
            [0.0, -2 * c, -2 * c, -4 * (s + k)],
        ]
    )
    return m1, m2


@dataclass(frozen=True, eq=False)
class StageASolution:
    """Amplitudes A1..A11 at stage-A interaction time ``t`` (``a[k - 1]`` is A_k)."""

    t: float
    a: np.ndarray
    params: ModelParams

    def coef(self, k: int) -> complex:
        return complex(self.a[k - 1])

    @property
    def p_pair(self) -> float:
        """Heralding probability of either unbalanced (1,4) branch: |A2|^2 + |A10|^2."""
        return float(abs(self.a[1]) ** 2 + abs(self.a[9]) ** 2)

    def state(self, space: SpaceDescriptor | None = None) -> StateVector:
        """Embed the eleven amplitudes into a stage-A space (default :func:`stage_a_space`)."""
        space = stage_a_space() if space is None else space
        amps = np.zeros(space.dimension, dtype=complex)
        for ket, ak in zip(STAGE_A_KETS, self.a):
            amps[_embed_index(space, ket)] = ak
        return StateVector(amps, space)


def _embed_index(space: SpaceDescriptor, ket: CompositeBasisState) -> int:
    n_a, n_b = len(space.photon_caps), len(space.phonon_caps)
    if n_a != 2 or n_b != 2:
        raise HilbertSpaceError("stage-A states need modes (a1, a2; b1, b2)")
    return basis_index(space, ket)


def stage_a_coefficients(params: ModelParams, t: float) -> StageASolution:
    params.require_simplification()
    m1, m2 = stage_a_generators(params)
    u1 = scipy.linalg.expm(-1j * t * m1)
    u2 = scipy.linalg.expm(-1j * t * m2)
    first = u1 @ np.array([0.5, 0.0, 0.0])
    second = u2 @ np.array([0.5, 0.0, 0.0, 0.0])
    a = np.empty(11, dtype=complex)
    a[0] = 0.5
    a[1:4] = first
    a[4:8] = second
    a[8:11] = first
    return StageASolution(float(t), a, params)


def laplace_variables(sol: StageASolution) -> dict[str, complex]:
    """Phase-rotated sums used by the Laplace-transform solution route.

    Keys: ``A23`` (A2 + A3), ``A4``, ``A5``, ``A67`` (A6 + A7), ``A8``.
    """
    p, t, a = sol.params, sol.t, sol.a
    s = p.lambda1**2 / p.omega_m
    k = p.g**2 / p.omega_m
    return {
        "A23": (a[1] + a[2]) * np.exp(2j * s * t),
        "A4": a[3] * np.exp(-1j * (2 * s + k) * t),
        "A5": a[4] * np.exp(2j * s * t),
        "A67": (a[5] + a[6]) * np.exp(1j * (2 * s - k) * t),
        "A8": a[7] * np.exp(-4j * (s + k) * t),
    }


def laplace_rhs(params: ModelParams, t: float, v: dict[str, complex]) -> dict[str, complex]:
    """Right-hand sides of the first-order equations for :func:`laplace_variables`."""
    s = params.lambda1**2 / params.omega_m
    k = params.g**2 / params.omega_m
    c = params.g * params.lambda1 / params.omega_m
    return {
        "A23": 2j * c * v["A4"] * np.exp(1j * (4 * s + k) * t),
        "A4": 1j * c * v["A23"] * np.exp(-1j * (4 * s + k) * t),
        "A5": 1j * c * v["A67"] * np.exp(1j * k * t),
        "A67": 2j * c * v["A5"] * np.exp(-1j * k * t)
        + 4j * c * v["A8"] * np.exp(1j * (6 * s + 3 * k) * t),
        "A8": 2j * c * v["A67"] * np.exp(-1j * (6 * s + 3 * k) * t),
    }


# --------------------------------------------------------------------------
# stage B: atoms (1, 4, 5, 8)


def stage_b_space() -> SpaceDescriptor:
    return build_space((), (), 4)


def _kb(levels) -> CompositeBasisState:
    return CompositeBasisState((), (), tuple(AtomLevel(v) for v in levels))


# |atom1, atom4; atom5, atom8>
STAGE_B_KETS: tuple[CompositeBasisState, ...] = (
    _kb((1, 3, 1, 3)),
    _kb((1, 1, 3, 3)),
    _kb((1, 3, 3, 1)),
    _kb((3, 1, 1, 3)),
    _kb((3, 1, 3, 1)),
    _kb((3, 3, 1, 1)),
)

# case id -> (branch of pair (1,4), branch of pair (5,8)); branch 1 is
# (A2|13> + A10|31>)/sqrt(P), branch 2 swaps the amplitudes
STAGE_B_CASES: dict[int, tuple[int, int]] = {1: (1, 2), 2: (2, 1), 3: (1, 1), 4: (2, 2)}


@dataclass(frozen=True, eq=False)
class StageBSolution:
    """Amplitudes B1..B6 of case ``case_id`` at time ``tau`` (``b[k - 1]`` is B_k)."""

    case_id: int
    tau: float
    b: np.ndarray

    def coef(self, k: int) -> complex:
        return complex(self.b[k - 1])

    def state(self) -> StateVector:
        space = stage_b_space()
        amps = np.zeros(space.dimension, dtype=complex)
        for ket, bk in zip(STAGE_B_KETS, self.b):
            amps[basis_index(space, ket)] = bk
        return StateVector(amps, space)


def stage_b_coefficients(
    sa: StageASolution, params: ModelParams, case_id: int, tau: float
) -> StageBSolution:
    """Closed-form stage-B amplitudes for one of the four kept initial products."""
    if case_id not in STAGE_B_CASES:
        raise ValueError(f"case_id must be 1..4, got {case_id}")
    if tau < sa.t:
        raise ValueError(f"tau={tau} precedes the stage-A time t={sa.t}")
    params.require_simplification()
    a2, a10 = sa.a[1], sa.a[9]
    p = sa.p_pair
    e = np.exp(-1j * 2 * params.lambda1**2 / params.omega_m * (tau - sa.t))
    plus, minus = (1 + e) / 2, -(1 - e) / 2
    if case_id in (1, 2):
        mixed = a2 * a10 / p
        b3, b4 = (a2**2 / p, a10**2 / p * e) if case_id == 1 else (a10**2 / p, a2**2 / p * e)
        b = [mixed * plus, mixed * minus, b3, b4, mixed * plus, mixed * minus]
    else:
        first, last = (a2**2 / p, a10**2 / p) if case_id == 3 else (a10**2 / p, a2**2 / p)
        mixed = a2 * a10 / p
        b = [first * plus, first * minus, mixed, mixed * e, last * plus, last * minus]
    return StageBSolution(case_id, float(tau), np.array(b, dtype=complex))
