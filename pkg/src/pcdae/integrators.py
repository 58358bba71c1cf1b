"""Predictor, trapezoidal corrector, partitioned and simultaneous steps, and the driver.

Partitioned step: forward-Euler predictor for ``x``, an algebraic estimate
``y_est`` (held or extrapolated), a trapezoidal corrector for ``x`` with
``y_est`` frozen, then a Newton solve of ``g`` for ``y``. The simultaneous
step solves the stacked trapezoidal residual for ``(x, y)`` in one Newton call.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional

import numpy as np

from .control import (AlgebraicCheck, PiController, accept_step, algebraic_consistency,
                      error_weights, propose_step)
from .core import SystemState, apply_event
from .errors import NewtonDivergence, SingularJacobian
from .estimate import (AlgebraicHistory, estimate_extrapolate, estimate_hold,
                       push_accepted, reset_on_event)
from .nonlinear import NewtonConfig, newton_solve, solve_algebraic


class SchemeKind(str, Enum):
    ITM = "itm"
    HOLD = "pc-hold"
    PREDICT = "pc-predict"


@dataclass(frozen=True)
class SolverScheme:
    """Which integrator to run and how hard to iterate its corrector.

    ``corrector_iterations=None`` solves the corrector to convergence with
    ``newton``; an integer applies exactly that many Newton updates.
    ``check`` is the algebraic consistency test; it defaults to on for the
    hold scheme and off for the predicting one.

    ``check_reference`` selects what a freshly solved ``y`` is compared
    with: ``"estimate"`` (the estimate the corrector just used, so repeated
    re-correction converges the coupling) or ``"previous"`` (the last
    accepted ``y``, which re-correction cannot change, so a failing check
    always ends in a step-size reduction).
    """
    kind: SchemeKind = SchemeKind.PREDICT
    corrector_iterations: Optional[int] = None
    newton: NewtonConfig = NewtonConfig()
    check: Optional[AlgebraicCheck] = None
    use_check: Optional[bool] = None
    check_reference: str = "estimate"

    def __post_init__(self):
        object.__setattr__(self, "kind", SchemeKind(self.kind))
        if self.corrector_iterations is not None and self.corrector_iterations < 1:
            raise ValueError("corrector_iterations must be >= 1")
        if self.check is None:
            object.__setattr__(self, "check", AlgebraicCheck())
        if self.check_reference not in ("estimate", "previous"):
            raise ValueError(f"unknown check_reference {self.check_reference!r}")
        if self.use_check is None:
            object.__setattr__(self, "use_check", self.kind is SchemeKind.HOLD)

    @property
    def partitioned(self):
        return self.kind is not SchemeKind.ITM


@dataclass
class StepResult:
    x_pred: np.ndarray
    x_corr: np.ndarray
    y_est: np.ndarray
    y_new: np.ndarray
    local_error: float
    nonlinear_calls: int = 0
    recorrections: int = 0
    failure: str = ""


@dataclass
class DerivativeMemory:
    """``f`` at the previous accepted point, for the local-error estimate."""
    f_prev: Optional[np.ndarray] = None
    h_prev: Optional[float] = None

    def clear(self):
        self.f_prev = None
        self.h_prev = None


def predict_fe(x_n, f_n, h):
    return x_n + h * f_n


def correct_itm(system, t_n, x_n, f_n, y_est, x_init, h, iterations=None, cfg=None):
    """Trapezoidal corrector ``x = x_n + h/2 (f_n + f(t_n + h, x, y_est))``.

    ``y_est`` is a fixed parameter. Returns ``(x, NewtonReport)``.
    """
    t1 = t_n + h
    half = 0.5 * h
    eye = np.eye(system.n_states)
    base = x_n + half * f_n

    def residual(x):
        return x - base - half * system.f(t1, x, y_est)

    def jacobian(x):
        return eye - half * system.jac_fx(t1, x, y_est)

    return newton_solve(residual, jacobian, x_init, cfg or NewtonConfig(),
                        fixed_iterations=iterations)


def trapezoid_error(x_pred, x_corr, f_n, f_new, h, memory, controller):
    """Scaled local-error estimate for the trapezoidal step.

    With a previous derivative available, the third derivative is taken from
    the divided difference of ``f`` over the last two steps and the
    trapezoidal truncation term ``h^3/12 x'''`` is weighted. Otherwise (first
    step of a run or right after an event) the predictor-corrector
    difference ``x_corr - x_pred`` is used, which over-estimates the error
    and so keeps the restart cautious.
    """
    w = error_weights(x_pred, x_corr, controller)
    if x_corr.size == 0:
        return 0.0
    if memory.f_prev is None:
        ratio = (x_corr - x_pred) / w
    else:
        x3 = 2.0 / (h + memory.h_prev) * ((f_new - f_n) / h - (f_n - memory.f_prev) / memory.h_prev)
        ratio = (h ** 3 / 12.0) * x3 / w
    return float(np.sqrt(np.mean(ratio * ratio)))


def _estimate(scheme, history, h):
    if scheme.kind is SchemeKind.PREDICT:
        return estimate_extrapolate(history, h)
    return estimate_hold(history)


def step_partitioned(system, state, h, scheme, history, controller, memory=None):
    """Attempt one partitioned predictor-corrector step of size ``h``.

    Returns ``(StepResult, h_next, accepted)``; nothing passed in is
    mutated except ``controller.err_prev`` on acceptance. Newton failures
    come back as a rejection with ``h_next = h / 2``.
    """
    memory = memory or DerivativeMemory()
    t1 = state.t + h
    f_n = system.f(state.t, state.x, state.y)
    x_pred = predict_fe(state.x, f_n, h)
    y_est = _estimate(scheme, history, h)
    calls = 0
    recorrections = 0
    try:
        while True:
            calls += 1
            x_corr, _ = correct_itm(system, state.t, state.x, f_n, y_est, x_pred, h,
                                    scheme.corrector_iterations, scheme.newton)
            calls += 1
            y_new, _ = solve_algebraic(system, t1, x_corr, y_est, scheme.newton)
            ref = y_est if scheme.check_reference == "estimate" else history.y_curr
            if not scheme.use_check or algebraic_consistency(y_new, ref, scheme.check):
                break
            if recorrections >= scheme.check.max_recorrections:
                result = StepResult(x_pred, x_corr, y_est, y_new, np.inf, calls,
                                    recorrections, "algebraic-check")
                return result, controller.clamp(h * controller.fac_min), False
            recorrections += 1
            y_est = y_new
    except (NewtonDivergence, SingularJacobian) as exc:
        result = StepResult(x_pred, x_pred, y_est, y_est, np.inf, calls,
                            recorrections, f"newton: {exc}")
        return result, controller.clamp(0.5 * h), False

    f_new = system.f(t1, x_corr, y_est)
    err = trapezoid_error(x_pred, x_corr, f_n, f_new, h, memory, controller)
    accepted = accept_step(err)
    h_next = propose_step(controller, err, h, accepted=accepted)
    if not accepted:
        h_next = min(h_next, h * controller.safety)
    result = StepResult(x_pred, x_corr, y_est, y_new, err, calls, recorrections)
    return result, h_next, accepted


def step_simultaneous_itm(system, state, h, cfg, controller, memory=None):
    """One Newton solve of the stacked trapezoidal residual for ``(x, y)``.

    The forward-Euler prediction is the Newton guess for ``x`` and is kept
    in ``x_pred`` for the error estimate.
    """
    memory = memory or DerivativeMemory()
    cfg = cfg or NewtonConfig()
    m = system.n_states
    n = system.n_algebraic
    t1 = state.t + h
    half = 0.5 * h
    f_n = system.f(state.t, state.x, state.y)
    x_pred = predict_fe(state.x, f_n, h)
    base = state.x + half * f_n
    jac = np.zeros((m + n, m + n))
    eye = np.eye(m)

    def residual(z):
        x = z[:m]
        y = z[m:]
        return np.concatenate([x - base - half * system.f(t1, x, y), system.g(t1, x, y)])

    def jacobian(z):
        x = z[:m]
        y = z[m:]
        jac[:m, :m] = eye - half * system.jac_fx(t1, x, y)
        jac[:m, m:] = -half * system.jac_fy(t1, x, y)
        jac[m:, :m] = system.jac_gx(t1, x, y)
        jac[m:, m:] = system.jac_gy(t1, x, y)
        return jac

    try:
        z, _ = newton_solve(residual, jacobian, np.concatenate([x_pred, state.y]), cfg)
    except (NewtonDivergence, SingularJacobian) as exc:
        result = StepResult(x_pred, x_pred, state.y, state.y, np.inf, 1, 0, f"newton: {exc}")
        return result, controller.clamp(0.5 * h), False
    x_corr = z[:m]
    y_new = z[m:]
    f_new = system.f(t1, x_corr, y_new)
    err = trapezoid_error(x_pred, x_corr, f_n, f_new, h, memory, controller)
    accepted = accept_step(err)
    h_next = propose_step(controller, err, h, accepted=accepted)
    if not accepted:
        h_next = min(h_next, h * controller.safety)
    result = StepResult(x_pred, x_corr, state.y.copy(), y_new, err, 1, 0)
    return result, h_next, accepted


def simulate(system, state, scheme, controller=None, t_end=10.0, h_init=1e-3,
             fixed_step=None, sink=None):
    """Integrate from ``state`` to ``t_end``.

    Steps are clamped to land exactly on event times and ``t_end``; at each
    event the system is mutated, ``y`` is re-solved, the algebraic history
    and local-error memory are reset and the step restarts at ``h_init``.
    ``fixed_step`` bypasses the controller (every converged step is kept).
    ``sink``, if given, is called as ``sink(t, h, x, y)`` for every row.

    Returns ``(Trajectory, RunMetrics)``. Step-size underflow or a Newton
    failure in fixed-step mode ends the run early with ``metrics.diverged``
    set; the partial trajectory is returned.
    """
    from .results import RunMetrics, Trajectory

    controller = controller or PiController()
    controller.reset()
    t0 = float(state.t)
    if t_end < t0:
        raise ValueError("t_end must not precede the initial time")
    snap = 1e-12 * max(abs(t_end), 1.0)
    events = system.sorted_events(t0, t_end)
    metrics = RunMetrics()
    traj = Trajectory(system.variable_names, system.n_states)
    state = state.copy()

    def emit(h, boundary=False):
        traj.append(state.t, h, state.x, state.y, boundary)
        if sink is not None:
            sink(state.t, h, state.x, state.y)

    emit(0.0)
    history = AlgebraicHistory(state.y.copy())
    memory = DerivativeMemory()
    h = fixed_step if fixed_step is not None else controller.clamp(h_init)
    ei = 0
    while True:
        while ei < len(events) and abs(events[ei].time - state.t) <= snap:
            try:
                state = apply_event(system, state, events[ei], scheme.newton, metrics)
            except (NewtonDivergence, SingularJacobian) as exc:
                metrics.diverged = True
                metrics.diverged_reason = f"event {events[ei].label!r}: {exc}"
                return traj, metrics
            emit(0.0, boundary=True)
            history = reset_on_event(history, state.y)
            memory.clear()
            controller.reset()
            if fixed_step is None:
                h = controller.clamp(h_init)
            ei += 1
        if state.t >= t_end - snap:
            break
        target = events[ei].time if ei < len(events) else t_end
        h_try = min(h, target - state.t)
        lands = target - (state.t + h_try) <= snap
        if lands:
            h_try = target - state.t

        if scheme.partitioned:
            result, h_next, ok = step_partitioned(system, state, h_try, scheme, history,
                                                  controller, memory)
        else:
            result, h_next, ok = step_simultaneous_itm(system, state, h_try, scheme.newton,
                                                       controller, memory)
        if fixed_step is not None:
            if result.failure.startswith("newton"):
                metrics.record(state.t, h_try, False, result.local_error,
                               result.nonlinear_calls, result.recorrections)
                metrics.diverged = True
                metrics.diverged_reason = result.failure
                return traj, metrics
            ok = True
            h_next = fixed_step
        metrics.record(state.t, h_try, ok, result.local_error,
                       result.nonlinear_calls, result.recorrections)
        if ok:
            memory.f_prev = system.f(state.t, state.x, state.y)
            memory.h_prev = h_try
            t_new = target if lands else state.t + h_try
            state = SystemState(t_new, result.x_corr, result.y_new, h_try)
            history = push_accepted(history, result.y_new, h_try)
            emit(h_try)
            h = h_next
        else:
            if h_try <= controller.h_min * (1.0 + 1e-12) or h_next >= h_try:
                metrics.diverged = True
                metrics.diverged_reason = (
                    f"step size underflow at t={state.t:.9g} (h={h_try:.3e}; "
                    f"{result.failure or 'local error'})")
                return traj, metrics
            h = h_next
    return traj, metrics
