import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from omrepeater.dynamics import (
    STAGE_A_KETS,
    STAGE_B_CASES,
    STAGE_B_KETS,
    integrate_ode,
    laplace_rhs,
    laplace_variables,
    propagate,
    stage_a_coefficients,
    stage_a_space,
    stage_b_coefficients,
    stage_b_space,
)
from omrepeater.hilbert import (
    AtomLevel,
    CompositeBasisState,
    HilbertSpaceError,
    OperatorMatrix,
    StateVector,
    basis_index,
    basis_vector,
    build_space,
)
from omrepeater.models import ModelParams, h_coupling, h_eff_stage_a, h_eff_stage_b, h_free, h_interaction_picture

from conftest import random_state as _random_amps


def random_state(rng, space):
    return StateVector(_random_amps(rng, space.dimension), space)

L1, L3 = AtomLevel.L1, AtomLevel.L3
TINY = build_space((1,), (), 1)  # 6-dim toy space


def _op(space, m):
    return OperatorMatrix(np.asarray(m, dtype=complex), space, hermitian=True)


def test_propagate_at_zero_is_identity(rng):
    psi = random_state(rng, TINY)
    h = _op(TINY, np.diag(np.arange(6.0)) + 0.3)
    np.testing.assert_allclose(propagate(h, psi, 0.0).amplitudes, psi.amplitudes, atol=1e-14)


def test_propagate_diagonal_phases(rng):
    psi = random_state(rng, TINY)
    e = np.linspace(-1, 2, 6)
    out = propagate(_op(TINY, np.diag(e)), psi, 1.7)
    np.testing.assert_allclose(out.amplitudes, np.exp(-1j * e * 1.7) * psi.amplitudes, atol=1e-13)


def test_propagate_two_level_exchange():
    space = build_space((), (), 1)
    m = np.zeros((3, 3))
    m[0, 2] = m[2, 0] = 0.8
    psi0 = StateVector(np.array([1, 0, 0], dtype=complex), space)
    for t, out in zip([0.3, 1.1, 2.0], propagate(_op(space, m), psi0, [0.3, 1.1, 2.0])):
        np.testing.assert_allclose(out.amplitudes, [np.cos(0.8 * t), 0, -1j * np.sin(0.8 * t)], atol=1e-13)


def test_propagate_rejects_bad_input(rng):
    psi = random_state(rng, TINY)
    with pytest.raises(HilbertSpaceError):
        propagate(_op(build_space((), (), 2), np.eye(9)), psi, 1.0)
    m = np.zeros((6, 6), dtype=complex)
    m[0, 1] = 1.0
    with pytest.raises(HilbertSpaceError):
        propagate(OperatorMatrix(m, TINY), psi, 1.0)


def test_rk4_order_four(rng):
    psi = random_state(rng, TINY)
    a = rng.normal(size=(6, 6)) + 1j * rng.normal(size=(6, 6))
    h = _op(TINY, (a + a.conj().T) / 2)
    exact = propagate(h, psi, 2.0).amplitudes
    errs = [np.linalg.norm(integrate_ode(h, psi, 2.0, n).amplitudes - exact) for n in (40, 80)]
    assert 13 < errs[0] / errs[1] < 19


def test_rk4_zero_hamiltonian(rng):
    psi = random_state(rng, TINY)
    out, drift = integrate_ode(_op(TINY, np.zeros((6, 6))), psi, 3.0, 7, full_output=True)
    np.testing.assert_allclose(out.amplitudes, psi.amplitudes, atol=0)
    assert drift == 0


def test_rk4_callable_path_against_exact_frame_change():
    # in the interaction picture the exact solution is e^{iH0 t} e^{-i(H0+H1) t} psi0
    p = ModelParams.simplified(0.5, 2.0)
    space = build_space((1, 1), (1, 1), 2)
    psi0 = basis_vector(space, CompositeBasisState((0, 0), (0, 0), (L1, L3)))
    h0 = h_free(p, space)
    full = h0 + h_coupling(p, space)
    t = 0.6
    lab = propagate(full, psi0, t).amplitudes
    exact = np.exp(1j * np.diag(h0.entries).real * t) * lab
    got = integrate_ode(lambda s: h_interaction_picture(p, space, t=s), psi0, t, 600)
    assert np.abs(got.amplitudes - exact).max() < 1e-8


def test_rk4_rejects_bad_steps(rng):
    with pytest.raises(ValueError):
        integrate_ode(_op(TINY, np.eye(6)), random_state(rng, TINY), 1.0, 0)


def _stage_a_reference(params, t):
    space = stage_a_space()
    idx = [basis_index(space, k) for k in STAGE_A_KETS]
    sol0 = stage_a_coefficients(params, 0.0)
    out = propagate(h_eff_stage_a(params, space), sol0.state(), t)
    return out.amplitudes, idx


def test_initial_stage_a_state():
    a = stage_a_coefficients(ModelParams.simplified(), 0.0).a
    expected = np.zeros(11)
    expected[[0, 1, 4, 8]] = 0.5
    np.testing.assert_allclose(a, expected, atol=0)


@pytest.mark.parametrize("omega, g, t", [(0.5, 2.0, 1.0), (1.0, 0.7, 3.3), (1.5, 1.2, 8.0)])
def test_stage_a_matches_full_space_propagation(omega, g, t):
    p = ModelParams.simplified(omega, g)
    amps, idx = _stage_a_reference(p, t)
    sol = stage_a_coefficients(p, t)
    np.testing.assert_allclose(amps[idx], sol.a, atol=1e-10)
    # nothing leaks out of the eleven kets
    assert abs(np.linalg.norm(amps[idx]) - 1) < 1e-12


@settings(max_examples=40, deadline=None)
@given(
    omega=st.floats(0.1, 3.0),
    g=st.floats(0.05, 4.0),
    t=st.floats(0.0, 10.0),
)
def test_stage_a_identities(omega, g, t):
    sol = stage_a_coefficients(ModelParams.simplified(omega, g), t)
    a = sol.a
    assert abs(a[0] - 0.5) < 1e-12
    assert abs(a[1] - a[2] - 0.5) < 1e-10
    assert abs(a[5] - a[6]) < 1e-10
    np.testing.assert_allclose(a[1:4], a[8:11], atol=0)
    assert abs(np.sum(np.abs(a) ** 2) - 1) < 1e-10


@settings(max_examples=25, deadline=None)
@given(omega=st.floats(0.2, 2.0), g=st.floats(0.1, 3.0), t=st.floats(0.0, 5.0), k=st.floats(0.25, 4.0))
def test_stage_a_scaling(omega, g, t, k):
    # rescaling every rate by k and time by 1/k leaves the amplitudes unchanged
    base = stage_a_coefficients(ModelParams.simplified(omega, g), t).a
    p = ModelParams.simplified(omega * k, g * k, lambda1=k)
    scaled = stage_a_coefficients(p, t / k).a
    np.testing.assert_allclose(scaled, base, atol=1e-9)


def _five_point(f, t, h):
    return (f(t - 2 * h) - 8 * f(t - h) + 8 * f(t + h) - f(t + 2 * h)) / (12 * h)


@pytest.mark.parametrize("t", [0.4, 1.0, 2.7])
def test_laplace_variables_obey_first_order_equations(t):
    p = ModelParams.simplified(0.5, 2.0)
    keys = ("A23", "A4", "A5", "A67", "A8")

    def vec(s):
        v = laplace_variables(stage_a_coefficients(p, s))
        return np.array([v[k] for k in keys])

    deriv = _five_point(vec, t, 1e-4)
    rhs = laplace_rhs(p, t, laplace_variables(stage_a_coefficients(p, t)))
    np.testing.assert_allclose(deriv, [rhs[k] for k in keys], atol=1e-6)


def _pair(a2, a10, p, swap):
    # (A2|L1,L3> + A10|L3,L1>)/sqrt(P) on two atoms, or the swapped version
    c13, c31 = (a10, a2) if swap else (a2, a10)
    v = np.zeros(9, dtype=complex)
    v[0 * 3 + 2] = c13 / np.sqrt(p)
    v[2 * 3 + 0] = c31 / np.sqrt(p)
    return v


@pytest.mark.parametrize("case", sorted(STAGE_B_CASES))
@pytest.mark.parametrize("omega, g, t, dtau", [(0.5, 2.0, 1.0, 0.8), (1.0, 1.0, 2.0, 3.1)])
def test_stage_b_closed_form_matches_propagation(case, omega, g, t, dtau):
    p = ModelParams.simplified(omega, g)
    sa = stage_a_coefficients(p, t)
    x, y = STAGE_B_CASES[case]
    a2, a10 = sa.a[1], sa.a[9]
    psi0 = np.kron(_pair(a2, a10, sa.p_pair, x == 2), _pair(a2, a10, sa.p_pair, y == 2))
    space = stage_b_space()
    out = propagate(h_eff_stage_b(p, space), StateVector(psi0, space), dtau).amplitudes
    b = stage_b_coefficients(sa, p, case, t + dtau)
    idx = [basis_index(space, k) for k in STAGE_B_KETS]
    assert abs(np.linalg.norm(out[idx]) - 1) < 1e-12
    # equal up to one global phase
    phase = np.vdot(b.b, out[idx])
    phase /= abs(phase)
    np.testing.assert_allclose(out[idx], phase * b.b, atol=1e-10)
    assert abs(np.sum(np.abs(b.b) ** 2) - 1) < 1e-12


def test_stage_b_rejects_bad_arguments():
    p = ModelParams.simplified()
    sa = stage_a_coefficients(p, 1.0)
    with pytest.raises(ValueError):
        stage_b_coefficients(sa, p, 5, 2.0)
    with pytest.raises(ValueError):
        stage_b_coefficients(sa, p, 1, 0.5)


def test_stage_b_at_tau_equal_t_is_product():
    p = ModelParams.simplified()
    sa = stage_a_coefficients(p, 1.0)
    b = stage_b_coefficients(sa, p, 1, 1.0).b
    assert b[1] == 0 and b[5] == 0
