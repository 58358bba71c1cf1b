import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcdae.estimate import (AlgebraicHistory, estimate_extrapolate, estimate_hold,
                            push_accepted, reset_on_event)


def history(y_curr, y_prev=None, h_prev=None):
    h = AlgebraicHistory(np.atleast_1d(np.asarray(y_curr, dtype=float)))
    if y_prev is not None:
        h = push_accepted(AlgebraicHistory(np.atleast_1d(np.asarray(y_prev, dtype=float))),
                          np.atleast_1d(y_curr), h_prev)
    return h


def test_hold_returns_current():
    np.testing.assert_array_equal(estimate_hold(history([1.0, -2.0])), [1.0, -2.0])


def test_hold_returns_a_copy():
    h = history([1.0])
    est = estimate_hold(h)
    est[0] = 5.0
    assert h.y_curr[0] == 1.0


def test_hold_error_on_linear_signal():
    # y(t) = t, h = 0.1: holding y_n misses y(t_n + h) by exactly -h
    h = history(0.3, 0.2, 0.1)
    assert estimate_hold(h)[0] - 0.4 == pytest.approx(-0.1, abs=1e-15)


def test_extrapolate_affine():
    assert estimate_extrapolate(history(2.0, 1.0, 0.1), 0.1)[0] == pytest.approx(3.0, abs=1e-14)


def test_extrapolate_constant():
    assert estimate_extrapolate(history(1.0, 1.0, 0.37), 0.05)[0] == 1.0


def test_extrapolate_quadratic_error():
    est = estimate_extrapolate(history(0.04, 0.01, 0.1), 0.1)[0]
    assert est == pytest.approx(0.07, abs=1e-15)
    # analytic oracle: -h_next (h_prev + h_next) y''/2 with y'' = 2
    assert est - 0.09 == pytest.approx(-0.1 * 0.2 * 2 / 2, abs=1e-15)


def test_extrapolate_variable_step_exact_on_line():
    assert estimate_extrapolate(history(0.5, 0.4, 0.1), 0.05)[0] == pytest.approx(0.55, abs=1e-15)


def test_extrapolate_falls_back_without_history():
    h = history([4.0])
    np.testing.assert_array_equal(estimate_extrapolate(h, 0.1), estimate_hold(h))


def test_reset_disables_extrapolation():
    h = reset_on_event(history(2.0, 1.0, 0.1), [7.0])
    assert not h.can_extrapolate
    np.testing.assert_array_equal(estimate_extrapolate(h, 0.1), [7.0])


def test_one_push_after_reset_reenables():
    h = reset_on_event(history(2.0, 1.0, 0.1), [0.0])
    h = push_accepted(h, [1.0], 0.5)
    assert h.can_extrapolate
    assert estimate_extrapolate(h, 0.5)[0] == pytest.approx(2.0)


def test_history_keeps_last_two():
    h = AlgebraicHistory(np.array([0.0]))
    for y, dt in [(1.0, 0.1), (3.0, 0.2), (6.0, 0.3)]:
        h = push_accepted(h, [y], dt)
    assert (h.y_prev[0], h.y_curr[0], h.h_prev) == (3.0, 6.0, 0.3)


def test_history_validation():
    with pytest.raises(ValueError):
        AlgebraicHistory(np.zeros(1), y_prev=np.zeros(1))
    with pytest.raises(ValueError):
        AlgebraicHistory(np.zeros(1), y_prev=np.zeros(1), h_prev=0.0)
    with pytest.raises(ValueError):
        push_accepted(AlgebraicHistory(np.zeros(1)), [1.0], 0.0)


@settings(max_examples=100, deadline=None)
@given(st.floats(-10, 10), st.floats(-10, 10), st.floats(0, 5),
       st.floats(1e-3, 1.0), st.floats(1e-3, 1.0))
def test_extrapolation_exact_for_affine(a, b, t0, h_prev, h_next):
    y = lambda t: a + b * t
    est = estimate_extrapolate(history(y(t0 + h_prev), y(t0), h_prev), h_next)[0]
    assert est == pytest.approx(y(t0 + h_prev + h_next), rel=1e-12, abs=1e-11)


def test_estimator_orders_on_smooth_signal():
    # y = sin(3t) around t = 0.4, both steps halved each time
    y = lambda t: np.sin(3 * t)
    hs = np.array([0.04, 0.02, 0.01, 0.005])
    hold, extrap = [], []
    for h in hs:
        hist = history(y(0.4), y(0.4 - h), h)
        hold.append(abs(estimate_hold(hist)[0] - y(0.4 + h)))
        extrap.append(abs(estimate_extrapolate(hist, h)[0] - y(0.4 + h)))
    assert np.polyfit(np.log(hs), np.log(hold), 1)[0] == pytest.approx(1.0, abs=0.2)
    assert np.polyfit(np.log(hs), np.log(extrap), 1)[0] == pytest.approx(2.0, abs=0.2)
