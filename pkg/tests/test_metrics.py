import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omrepeater.hilbert import HilbertSpaceError, StateVector, build_space
from omrepeater.metrics import (
    PairStateSummary,
    linear_entropy_two_term,
    reduced_purity,
    success_probability,
)

amp = st.complex_numbers(max_magnitude=10.0, allow_nan=False, allow_infinity=False)
nonzero = amp.filter(lambda z: abs(z) > 1e-6)


def test_reference_values():
    r = 1 / np.sqrt(2)
    assert linear_entropy_two_term(r, r) == pytest.approx(0.5)
    assert linear_entropy_two_term(1.0, 0.0) == 0.0
    assert linear_entropy_two_term(np.sqrt(0.75), 0.5) == pytest.approx(0.375)
    assert success_probability(0.6, 0.8j) == pytest.approx(1.0)


def test_entropy_undefined_for_zero_amplitudes():
    with pytest.raises(ValueError):
        linear_entropy_two_term(0.0, 0.0)
    assert PairStateSummary.from_amplitudes(0, 0).E == 0.0


@settings(max_examples=200)
@given(c1=nonzero, c2=amp, k=nonzero, phase=st.floats(0, 2 * np.pi))
def test_entropy_invariances(c1, c2, k, phase):
    e = linear_entropy_two_term(c1, c2)
    assert 0 <= e <= 0.5 + 1e-15
    assert linear_entropy_two_term(c2, c1) == pytest.approx(e, abs=1e-14)
    assert linear_entropy_two_term(k * c1, k * c2) == pytest.approx(e, abs=1e-12)
    assert linear_entropy_two_term(c1, np.exp(1j * phase) * c2) == pytest.approx(e, abs=1e-14)
    # same value as the unnormalized closed form
    p = abs(c1) ** 2 + abs(c2) ** 2
    assert e == pytest.approx(1 - (abs(c1) ** 4 + abs(c2) ** 4) / p**2, abs=1e-9)


TWO = build_space((), (), 2)


def _pair_state(c1, c2):
    v = np.zeros(9, dtype=complex)
    v[2], v[6] = c1, c2
    v /= np.linalg.norm(v)
    return StateVector(v, TWO)


@settings(max_examples=100)
@given(c1=nonzero, c2=nonzero)
def test_entropy_equals_one_minus_reduced_purity(c1, c2):
    purity = reduced_purity(_pair_state(c1, c2), [0])
    assert linear_entropy_two_term(c1, c2) == pytest.approx(1 - purity, abs=1e-12)


def test_purity_limits():
    assert reduced_purity(_pair_state(1, 0), [0]) == pytest.approx(1.0)
    assert reduced_purity(_pair_state(1, 1), [1]) == pytest.approx(0.5)
    with pytest.raises(HilbertSpaceError):
        reduced_purity(StateVector(np.full(9, 0.1 + 0j), TWO), [0])
    with pytest.raises(HilbertSpaceError):
        reduced_purity(_pair_state(1, 1), [])


def test_tiny_branch_keeps_precision():
    e = linear_entropy_two_term(1e-160, 1e-160)
    assert e == pytest.approx(0.5)
