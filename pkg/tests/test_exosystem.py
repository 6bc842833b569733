import math

import numpy as np
import pytest
import scipy.linalg
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from gasflow_backstepping.errors import InvalidGainError, InvalidInputError, UnobservableError
from gasflow_backstepping.exosystem import (
    PAPER_IV_PERIOD,
    Exosystem,
    Uncertainty,
    default_observer_poles,
    epsilon_of,
    is_hurwitz,
    matrix_exp,
    observer_error_matrix,
    paper_iv_exosystem,
    paper_iv_s,
    place_H,
    require_hurwitz_gain,
    s_of,
    step_exo,
)

OMEGA = 2 * math.pi / PAPER_IV_PERIOD
# -7 omega sigma and -11 omega^2 sigma, i.e. s^2 + 7 omega s + 12 omega^2
H_IV = (-0.76969020012949934, -3.5183311985364843e-04)
S_PEAK = 27.597467132134650


def rotation(t):
    c, s = math.cos(OMEGA * t), math.sin(OMEGA * t)
    return np.array([[c, s / OMEGA], [-OMEGA * s, c]])


def test_matrix_exp_zero_is_identity():
    np.testing.assert_array_equal(matrix_exp(np.zeros((3, 3)), 5.0), np.eye(3))


@pytest.mark.parametrize("t", [1.0, 5400.0, 7777.7, 21600.0])
def test_matrix_exp_oscillator_closed_form(t):
    A = paper_iv_exosystem().A
    got = matrix_exp(A, t)
    want = rotation(t)
    scale = np.abs(want).max()
    assert np.abs(got - want).max() <= 1e-12 * scale


def test_matrix_exp_quarter_and_full_period():
    A = paper_iv_exosystem().A
    q = matrix_exp(A, PAPER_IV_PERIOD / 4)
    np.testing.assert_allclose(q, [[0, 1 / OMEGA], [-OMEGA, 0]], atol=1e-12 / OMEGA)
    full = matrix_exp(A, PAPER_IV_PERIOD)
    assert np.abs(full - np.eye(2)).max() <= 1e-12 / OMEGA


@settings(max_examples=60, deadline=None)
@given(arrays(float, (3, 3), elements=st.floats(-3, 3)), st.floats(0.01, 2.0))
def test_matrix_exp_matches_scipy(A, t):
    want = scipy.linalg.expm(A * t)
    got = matrix_exp(A, t)
    assert np.abs(got - want).max() <= 1e-11 * max(1.0, np.abs(want).max())


@settings(max_examples=60, deadline=None)
@given(st.floats(0, 30000), st.floats(0, 30000))
def test_semigroup(t1, t2):
    A = paper_iv_exosystem().A
    lhs = matrix_exp(A, t1 + t2)
    rhs = matrix_exp(A, t1) @ matrix_exp(A, t2)
    assert np.abs(lhs - rhs).max() <= 1e-10 * np.abs(lhs).max()


def test_matrix_exp_rejects_bad_input():
    with pytest.raises(InvalidInputError):
        matrix_exp([[np.nan, 0], [0, 0]])
    with pytest.raises(InvalidInputError):
        matrix_exp([[1.0, 0.0]])
    with pytest.raises(InvalidInputError):
        matrix_exp(np.eye(2), math.inf)


def test_step_exo_examples():
    sys = paper_iv_exosystem()
    np.testing.assert_array_equal(step_exo(sys, np.zeros(2), 17.0), np.zeros(2))
    X = step_exo(sys, sys.X0, 5400.0)
    assert s_of(sys, X) == pytest.approx(S_PEAK, rel=1e-12)
    back = step_exo(sys, sys.X0, 21600.0)
    assert np.abs(back - sys.X0).max() <= 1e-12 * np.abs(sys.X0).max() / OMEGA * OMEGA + 1e-15
    with pytest.raises(InvalidInputError):
        step_exo(sys, sys.X0, 0.0)
    with pytest.raises(InvalidInputError):
        step_exo(sys, np.zeros(3), 1.0)


@settings(max_examples=50, deadline=None)
@given(st.floats(0, 86400))
def test_paper_iv_signal(t):
    sys = paper_iv_exosystem()
    s = s_of(sys, sys.state_at(t))
    want = float(paper_iv_s(t))
    assert abs(s - want) <= 1e-9 * S_PEAK


def test_s_of_examples():
    sys = paper_iv_exosystem()
    assert s_of(sys, [0.0, 8.03e-3]) == 0.0
    assert s_of(sys, [27.60, 0.0]) == 27.60
    two = Exosystem(np.zeros((2, 2)), [2.0, 3.0], [0.0, 0.0])
    assert s_of(two, [1.0, 1.0]) == 5.0
    with pytest.raises(InvalidInputError):
        s_of(two, [1.0, 1.0, 1.0])


def test_exosystem_validation():
    with pytest.raises(InvalidInputError):
        Exosystem(np.zeros((2, 3)), [1, 0], [0, 0])
    with pytest.raises(InvalidInputError):
        Exosystem(np.zeros((2, 2)), [1, 0, 0], [0, 0])
    with pytest.raises(InvalidInputError):
        Exosystem(np.zeros((2, 2)), [1, np.inf], [0, 0])


def test_epsilon_of():
    assert epsilon_of(Uncertainty(), 27.6) == 0.0
    cubic = Uncertainty("cubic-of-s")
    assert epsilon_of(cubic, 27.60) == pytest.approx(21.024576, rel=1e-12)
    assert epsilon_of(cubic, 0.0) == 0.0
    assert epsilon_of(cubic, -2.0) == -epsilon_of(cubic, 2.0)
    custom = Uncertainty("custom-samples", M=1.5, times=[0, 10, 20], values=[0, 4, -4])
    assert epsilon_of(custom, 0.0, 2.5) == pytest.approx(1.0)
    assert epsilon_of(custom, 0.0, 10.0) == 1.5
    assert epsilon_of(custom, 0.0, 20.0) == -1.5
    with pytest.raises(InvalidInputError):
        epsilon_of(Uncertainty("custom-samples"), 0.0, 1.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-100, 100), st.floats(0, 100))
def test_custom_uncertainty_bounded(t, M):
    u = Uncertainty("custom-samples", M=M, times=[-50, 0, 50], values=[300, -300, 200])
    assert abs(epsilon_of(u, 0.0, t)) <= M


def test_uncertainty_validation_and_scaling():
    with pytest.raises(InvalidInputError):
        Uncertainty("gaussian")
    with pytest.raises(InvalidInputError):
        Uncertainty("custom-samples", times=[0, 1], values=[1])
    with pytest.raises(InvalidInputError):
        Uncertainty("custom-samples", times=[1, 0], values=[1, 2])
    with pytest.raises(InvalidInputError):
        Uncertainty("none", M=-1.0)
    u = Uncertainty("cubic-of-s").scaled(2.0)
    assert epsilon_of(u, 3.0) == pytest.approx(0.054)


def test_place_H_double_integrator():
    sys = Exosystem([[0, 1], [0, 0]], [1, 0], [0, 0])
    H = place_H(sys, 1.0, [-1.0, -2.0])
    np.testing.assert_allclose(H.ravel(), [-3.0, -2.0], atol=1e-12)


def test_place_H_paper_iv():
    sys = paper_iv_exosystem()
    H = place_H(sys, 378.0, [-3 * OMEGA, -4 * OMEGA])
    np.testing.assert_allclose(H.ravel(), H_IV, rtol=1e-10)
    eig = np.sort(np.linalg.eigvals(observer_error_matrix(sys, H, 378.0)).real)
    np.testing.assert_allclose(eig, [-4 * OMEGA, -3 * OMEGA], rtol=1e-8)
    assert default_observer_poles(sys) == pytest.approx([-3 * OMEGA, -4 * OMEGA])


@settings(max_examples=40, deadline=None)
@given(st.floats(0.1, 5), st.floats(0.1, 5), st.floats(-3, 3))
def test_place_H_hurwitz_property(a, b, im):
    sys = Exosystem([[0, 1, 0], [0, 0, 1], [-1, -2, -1]], [1, 0, 0], [0, 0, 0])
    poles = [-a, complex(-b, im), complex(-b, -im)]
    H = place_H(sys, 2.0, poles)
    M = observer_error_matrix(sys, H, 2.0)
    assert is_hurwitz(M)
    # compare characteristic polynomials; repeated poles make eigenvalues ill-conditioned
    want = np.poly(np.array(poles, dtype=complex)).real
    got = np.poly(M)
    np.testing.assert_allclose(got, want, rtol=1e-9, atol=1e-9 * np.abs(want).max())


def test_place_H_errors():
    sys = paper_iv_exosystem()
    with pytest.raises(InvalidInputError):
        place_H(sys, 378.0, [-1.0, 0.0])
    with pytest.raises(InvalidInputError):
        place_H(sys, 378.0, [complex(-1, 1), complex(-1, 2)])
    with pytest.raises(InvalidInputError):
        place_H(sys, 378.0, [-1.0])
    blind = Exosystem([[1, 0], [0, 2]], [1, 0], [0, 0])
    with pytest.raises(UnobservableError):
        place_H(blind, 1.0, [-1.0, -2.0])


def test_require_hurwitz_gain():
    sys = paper_iv_exosystem()
    with pytest.raises(InvalidGainError):
        require_hurwitz_gain(sys, np.zeros((2, 1)), 378.0)
    H = place_H(sys, 378.0, default_observer_poles(sys))
    assert require_hurwitz_gain(sys, H, 378.0).shape == (2, 1)


def test_transition_cached_and_exact():
    sys = paper_iv_exosystem()
    P = sys.transition(0.5)
    assert P is sys.transition(0.5)
    np.testing.assert_allclose(P, rotation(0.5), rtol=0, atol=1e-15 / OMEGA)
