import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pcdae.control import (AlgebraicCheck, PiController, accept_step, algebraic_consistency,
                           propose_step, scaled_error)


def test_scaled_error_identical():
    assert scaled_error([1.0, 2.0], [1.0, 2.0], PiController()) == 0.0


def test_scaled_error_unit_at_atol():
    c = PiController()
    assert scaled_error([0.0], [c.atol], c) == pytest.approx(1.0, rel=1e-6)
    assert scaled_error([0.0, 0.0], [c.atol, c.atol], c) == pytest.approx(1.0, rel=1e-6)


def test_scaled_error_uses_larger_magnitude():
    c = PiController(rtol=1e-3, atol=0.0)
    # weight is rtol * max(|1|, |3|) = 3e-3, difference 2
    assert scaled_error([1.0], [3.0], c) == pytest.approx(2.0 / 3e-3)


def test_scaled_error_shape_mismatch():
    with pytest.raises(ValueError):
        scaled_error([1.0], [1.0, 2.0], PiController())


def test_propose_unit_error_gives_safety():
    assert propose_step(PiController(), 1.0, 0.01) == pytest.approx(0.009)


def test_propose_clamps():
    c = PiController()
    assert propose_step(c, 1e12, 0.01) == pytest.approx(0.005)
    assert propose_step(c, 0.0, 0.01) == pytest.approx(0.02)
    assert propose_step(c, 0.0, 0.08) == pytest.approx(0.1)


def test_err_prev_only_advances_on_accept():
    c = PiController()
    propose_step(c, 0.3, 0.01, accepted=False)
    assert c.err_prev == 1.0
    propose_step(c, 0.3, 0.01, accepted=True)
    assert c.err_prev == 0.3


def test_pi_formula():
    c = PiController(err_prev=0.5)
    err, h = 0.8, 0.01
    fac = 0.9 * err ** (-0.15) * (0.5 / err) ** 0.2
    assert propose_step(c, err, h) == pytest.approx(h * fac, rel=1e-14)


def test_accept_threshold():
    assert accept_step(0.999) and accept_step(0.0)
    assert not accept_step(1.001)


def test_algebraic_consistency():
    chk = AlgebraicCheck(1e-4)
    assert algebraic_consistency([1.0, 2.0], [1.0, 2.0], chk)
    assert not algebraic_consistency([1.0, 2.0 + 2e-4], [1.0, 2.0], chk)
    assert algebraic_consistency([], [], chk)


@pytest.mark.parametrize("kwargs", [dict(fac_min=1.2), dict(fac_max=0.9), dict(h_min=0.2),
                                    dict(k_i=-1.0), dict(rtol=0.0, atol=0.0)])
def test_controller_validation(kwargs):
    with pytest.raises(ValueError):
        PiController(**kwargs)


def test_check_validation():
    with pytest.raises(ValueError):
        AlgebraicCheck(0.0)
    with pytest.raises(ValueError):
        AlgebraicCheck(1e-4, -1)


@settings(max_examples=200, deadline=None)
@given(st.floats(1e-10, 1e6), st.floats(1e-7, 0.1), st.floats(1e-10, 1e3))
def test_proposal_bounds(err, h, err_prev):
    c = PiController(err_prev=err_prev)
    h_next = propose_step(c, err, h)
    assert c.h_min <= h_next <= c.h_max
    assert c.fac_min * h * (1 - 1e-12) <= h_next or h_next == c.h_min
    assert h_next <= c.fac_max * h * (1 + 1e-12) or h_next == c.h_min


@settings(max_examples=100, deadline=None)
@given(st.lists(st.floats(-10, 10), min_size=1, max_size=5), st.floats(1e-12, 1e-2),
       st.floats(1e-9, 1e-3), st.floats(1e-9, 1e-3))
def test_doubling_tolerances_never_turns_accept_into_reject(x, delta, rtol, atol):
    x = np.array(x)
    y = x + delta
    loose = PiController(rtol=2 * rtol, atol=2 * atol)
    tight = PiController(rtol=rtol, atol=atol)
    if accept_step(scaled_error(x, y, tight)):
        assert accept_step(scaled_error(x, y, loose))
