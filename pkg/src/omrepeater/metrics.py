"""
Entanglement and heralding figures of merit for atom pairs.

Post-selected pair states here are always of the form
``c1 |L1, L3> + c2 |L3, L1>``.  Their linear entropy (one minus the purity
of either one-atom reduced state) is ``1 - (|c1|^4 + |c2|^4) / P^2`` with
``P = |c1|^2 + |c2|^2``, peaking at 1/2 for equal weights.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable

import numpy as np

from .hilbert import HilbertSpaceError, StateVector, Subsystem

__all__ = [
    "PairStateSummary",
    "linear_entropy_two_term",
    "success_probability",
    "reduced_purity",
]


def success_probability(c1: complex, c2: complex) -> float:
    return float(abs(c1) ** 2 + abs(c2) ** 2)


def linear_entropy_two_term(c1: complex, c2: complex) -> float:
    p = success_probability(c1, c2)
    if p == 0:
        raise ValueError("entropy undefined for two zero amplitudes")
    # normalize first so tiny branches do not lose precision in P**2
    x = abs(c1) ** 2 / p
    y = abs(c2) ** 2 / p
    return float(2 * x * y / (x + y) ** 2)


@dataclass(frozen=True)
class PairStateSummary:
    """Unnormalized amplitudes of |L1,L3> and |L3,L1> with their P and E."""

    c1: complex
    c2: complex
    P: float
    E: float

    @classmethod
    def from_amplitudes(cls, c1: complex, c2: complex) -> "PairStateSummary":
        p = success_probability(c1, c2)
        e = linear_entropy_two_term(c1, c2) if p > 0 else 0.0
        return cls(complex(c1), complex(c2), p, e)


def reduced_purity(state: StateVector, kept: Iterable[Subsystem]) -> float:
    """Tr(rho_kept^2) of a normalized state, tracing out everything not in ``kept``."""
    space = state.space
    kept_axes = sorted({space.axis(s) for s in kept})
    if not kept_axes:
        raise HilbertSpaceError("keep at least one subsystem")
    n = state.norm
    if abs(n - 1) > 1e-10:
        raise HilbertSpaceError(f"reduced_purity needs a normalized state (norm {n})")
    rest = [ax for ax in range(len(space.dims)) if ax not in kept_axes]
    psi = np.transpose(state.tensor(), kept_axes + rest)
    d_keep = int(np.prod([space.dims[ax] for ax in kept_axes]))
    psi = psi.reshape(d_keep, -1)
    rho = psi @ psi.conj().T
    return float(np.real(np.trace(rho @ rho)))
