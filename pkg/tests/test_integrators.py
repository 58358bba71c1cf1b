import numpy as np
import pytest
import sympy as sp

from pcdae.control import AlgebraicCheck, PiController
from pcdae.core import FunctionDae, SystemState
from pcdae.estimate import AlgebraicHistory, push_accepted
from pcdae.integrators import (DerivativeMemory, SchemeKind, SolverScheme, correct_itm,
                               predict_fe, simulate, step_partitioned, step_simultaneous_itm)
from pcdae.models import build_scalar_linear, build_smib
from pcdae.nonlinear import NewtonConfig
from pcdae.runner.compare import decay_problem

TIGHT = NewtonConfig(tol_residual=1e-14, tol_step=1e-15)


def linear_ode(lam=-1.0):
    system, _, _ = decay_problem(rate=lam)
    return system


def test_predict_fe():
    assert predict_fe(np.array([1.0]), np.array([-1.0]), 0.1)[0] == pytest.approx(0.9)
    np.testing.assert_array_equal(predict_fe(np.array([2.0, 3.0]), np.zeros(2), 0.5), [2.0, 3.0])


def test_forward_euler_global_error_halves():
    errs = []
    for h in (0.1, 0.05):
        x = 1.0
        for _ in range(round(1 / h)):
            x = predict_fe(np.array([x]), np.array([-x]), h)[0]
        errs.append(abs(x - np.exp(-1.0)))
    assert errs[0] / errs[1] == pytest.approx(2.0, rel=0.1)


@pytest.mark.parametrize("iterations", [None, 1, 3])
def test_correct_itm_linear_closed_form(iterations):
    system = linear_ode(-1.0)
    x_n = np.array([1.0])
    f_n = system.f(0.0, x_n, np.empty(0))
    x, _ = correct_itm(system, 0.0, x_n, f_n, np.empty(0), predict_fe(x_n, f_n, 0.1), 0.1,
                       iterations, TIGHT)
    assert x[0] == pytest.approx((1 - 0.05) / (1 + 0.05), abs=1e-14)
    assert x[0] == pytest.approx(0.9047619047619048, abs=1e-14)


@pytest.mark.parametrize("iterations", [None, 1])
def test_correct_itm_zero_dynamics(iterations):
    system = FunctionDae(2, 0, lambda t, x, y: np.zeros(2), lambda t, x, y: np.empty(0))
    x_n = np.array([0.3, -1.0])
    x, _ = correct_itm(system, 0.0, x_n, np.zeros(2), np.empty(0), x_n + 1.0, 0.2, iterations)
    np.testing.assert_allclose(x, x_n, atol=1e-14)


def _itm_sensitivity_oracle():
    """Symbolic d x_{n+1} / d y_est for the trapezoidal corrector on x' = a x + b y."""
    a, b, h, xn, yn, ye, x1 = sp.symbols("a b h x_n y_n y_e x1")
    sol = sp.solve(sp.Eq(x1, xn + h / 2 * ((a * xn + b * yn) + (a * x1 + b * ye))), x1)[0]
    return sp.lambdify((a, b, h), sp.simplify(sp.diff(sol, ye)))


@pytest.mark.parametrize("a,b,h", [(-1.0, 0.5, 0.1), (-2.0, 1.0, 0.05), (-0.5, 0.1, 0.2)])
def test_itm_error_coefficient_symbolic_oracle(a, b, h):
    coeff = _itm_sensitivity_oracle()(a, b, h)
    assert coeff == pytest.approx((h / 2) * b / (1 - (h / 2) * a), rel=1e-14)
    system, state = build_scalar_linear(a, b, 1.0)
    f_n = system.f(0.0, state.x, state.y)
    y_true = system.exact_y(h)
    x_exact_y, _ = correct_itm(system, 0.0, state.x, f_n, np.array([y_true]), state.x, h, cfg=TIGHT)
    x_hold, _ = correct_itm(system, 0.0, state.x, f_n, state.y, state.x, h, cfg=TIGHT)
    assert x_hold[0] - x_exact_y[0] == pytest.approx(coeff * (state.y[0] - y_true), rel=1e-9, abs=1e-15)


def test_simultaneous_reduces_to_closed_form_for_ode():
    system = linear_ode(-1.0)
    state = SystemState(0.0, np.array([1.0]), np.empty(0))
    res, _, ok = step_simultaneous_itm(system, state, 0.1, TIGHT, PiController(rtol=1, atol=1))
    assert ok
    assert res.x_corr[0] == pytest.approx(0.9047619047619048, abs=1e-14)


def test_simultaneous_linear_dae_residuals():
    system, state = build_scalar_linear(-2.0, 1.0, 1.0)
    res, _, _ = step_simultaneous_itm(system, state, 0.05, NewtonConfig(), PiController())
    h = 0.05
    f_n = system.f(0.0, state.x, state.y)
    f_1 = system.f(h, res.x_corr, res.y_new)
    assert abs(res.x_corr[0] - state.x[0] - h / 2 * (f_n[0] + f_1[0])) <= 1e-8
    assert abs(system.g(h, res.x_corr, res.y_new)[0]) <= 1e-8


def test_partitioned_with_exact_estimate_matches_simultaneous():
    system, state = build_scalar_linear(-2.0, 1.0, 1.0)
    h = 0.05
    sim, _, _ = step_simultaneous_itm(system, state, h, TIGHT, PiController())
    f_n = system.f(0.0, state.x, state.y)
    x_part, _ = correct_itm(system, 0.0, state.x, f_n, sim.y_new, predict_fe(state.x, f_n, h), h,
                            cfg=TIGHT)
    assert abs(x_part[0] - sim.x_corr[0]) <= 1e-10


def _estimate_gap(kind, h):
    system, _ = build_scalar_linear(-2.0, 1.0, 1.0)
    t_n = 0.5
    x_n = np.array([system.exact_x(t_n)])
    hist = push_accepted(AlgebraicHistory(np.array([system.exact_y(t_n - h)])),
                         np.array([system.exact_y(t_n)]), h)
    state = SystemState(t_n, x_n, hist.y_curr.copy())
    scheme = SolverScheme(kind, newton=TIGHT, use_check=False)
    res, _, _ = step_partitioned(system, state, h, scheme, hist, PiController(rtol=1, atol=1))
    return abs(res.y_est[0] - res.y_new[0])


@pytest.mark.parametrize("kind,order", [("pc-predict", 2.0), ("pc-hold", 1.0)])
def test_estimate_gap_order(kind, order):
    hs = np.array([0.04, 0.02, 0.01, 0.005])
    gaps = [_estimate_gap(kind, h) for h in hs]
    assert np.polyfit(np.log(hs), np.log(gaps), 1)[0] == pytest.approx(order, abs=0.2)


def test_scheme_validation():
    assert SolverScheme("pc-hold").use_check
    assert not SolverScheme("pc-predict").use_check
    assert SolverScheme("itm").kind is SchemeKind.ITM
    with pytest.raises(ValueError):
        SolverScheme("pc-hold", corrector_iterations=0)
    with pytest.raises(ValueError):
        SolverScheme("bogus")
    with pytest.raises(ValueError):
        SolverScheme("pc-hold", check_reference="elsewhere")


@pytest.mark.parametrize("kind", ["itm", "pc-hold", "pc-predict"])
def test_equilibrium_run_grows_to_h_max(kind):
    system, state, _ = build_smib()
    system.events = []
    ctrl = PiController()
    traj, m = simulate(system, state, SolverScheme(kind), ctrl, t_end=5.0)
    assert m.rejected_steps == 0
    assert traj.data[:, 1].max() == pytest.approx(ctrl.h_max)
    np.testing.assert_allclose(traj.data[-1, 2:], traj.data[0, 2:], atol=1e-8)


def test_time_grid_hits_events_and_end_exactly():
    system, state, _ = build_smib()
    traj, _ = simulate(system, state, SolverScheme("pc-predict"), PiController(), t_end=1.3)
    t = traj.t
    assert t[-1] == 1.3
    for te in (0.5, 0.6):
        assert np.count_nonzero(t == te) == 2   # pre-event row then post-event row
    assert np.all(np.diff(t) >= 0)


def test_zero_horizon():
    system, state, _ = build_smib()
    traj, m = simulate(system, state, SolverScheme("itm"), PiController(), t_end=0.0)
    assert len(traj) == 1 and m.attempts == 0


def test_events_before_start_rejected():
    system, state, _ = build_smib()
    with pytest.raises(ValueError):
        simulate(system, SystemState(1.0, state.x, state.y), SolverScheme("itm"), t_end=2.0)


@pytest.mark.parametrize("kind", ["itm", "pc-hold", "pc-predict"])
def test_run_properties(kind):
    system, state, _ = build_smib()
    scheme = SolverScheme(kind)
    residuals = []
    sink = lambda t, h, x, y: residuals.append(np.max(np.abs(system.g(t, x, y))))
    traj, m = simulate(system, state, scheme, PiController(), t_end=2.0, sink=sink)
    assert not m.diverged
    m.check_invariants(scheme.partitioned)
    recs = m.step_records
    for prev, nxt in zip(recs, recs[1:]):
        if not prev.accepted:
            assert nxt.h < prev.h
    assert all(r.error <= 1.0 for r in recs if r.accepted)
    assert len(residuals) == len(traj)
    assert max(residuals) <= scheme.newton.tol_residual


def test_determinism():
    outs = []
    for _ in range(2):
        system, state, _ = build_smib()
        traj, m = simulate(system, state, SolverScheme("pc-hold"), PiController(), t_end=1.5)
        outs.append((traj.data.tobytes(), m.summary()))
    assert outs[0] == outs[1]


def test_fixed_step_mode_accepts_every_step():
    system, state = build_scalar_linear(-2.0, 1.0, 1.0)
    traj, m = simulate(system, state, SolverScheme("pc-predict"), PiController(), 1.0,
                       fixed_step=0.01)
    assert m.rejected_steps == 0 and m.accepted_steps == 100
    assert traj.t[-1] == 1.0


def test_scalar_linear_tight_tolerance_matches_analytic():
    # error per step is controlled, so the global error is about (steps * rtol)
    for kind in ("itm", "pc-predict", "pc-hold"):
        system, state = build_scalar_linear(-2.0, 1.0, 1.0)
        traj, _ = simulate(system, state, SolverScheme(kind), PiController(rtol=1e-8, atol=1e-10),
                           t_end=2.0)
        exact = system.exact_x(2.0)
        assert abs(traj.data[-1, 2] - exact) <= 2e-5 * abs(exact)


def test_partitioned_accepted_points_are_consistent():
    system, state = build_scalar_linear(-2.0, 1.0, 1.0)
    scheme = SolverScheme("pc-predict")
    traj, _ = simulate(system, state, scheme, PiController(), t_end=1.0)
    x, y = traj.data[:, 2], traj.data[:, 3]
    assert np.max(np.abs(y - x)) <= scheme.newton.tol_residual


def test_hold_recorrection_counts():
    system, state, _ = build_smib()
    _, m = simulate(system, state, SolverScheme("pc-hold", check=AlgebraicCheck(1e-6)),
                    PiController(), t_end=1.0)
    assert m.recorrections > 0
    assert m.nonlinear_calls == 2 * (m.attempts + m.recorrections) + 2  # + two event re-solves


def test_backends_agree(monkeypatch):
    from pcdae import _pykernels, kernels
    if not kernels.compiled_available():
        pytest.skip("compiled kernels not built")
    from pcdae import _kernels

    def run(impl):
        for name in ("lu_factor", "lu_solve", "machine_f", "machine_jac",
                     "network_g", "network_jac"):
            monkeypatch.setattr(kernels, name, getattr(impl, name))
        system, state, _ = build_smib()
        return simulate(system, state, SolverScheme("pc-predict"), PiController(), t_end=2.0)

    t_py, m_py = run(_pykernels)
    t_cy, m_cy = run(_kernels)
    assert m_py.summary() == m_cy.summary()
    np.testing.assert_allclose(t_py.data, t_cy.data, rtol=0, atol=1e-9)
