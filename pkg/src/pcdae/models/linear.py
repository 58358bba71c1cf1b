"""Scalar linear DAE ``x' = a x + b y``, ``0 = y - c x`` and its error oracles.

Because ``f`` is affine, the mean-value linearization of the corrector error
is exact here, which turns the error analysis of a backward-Euler corrector
fed with a perturbed algebraic estimate into checks that hold to round-off.
"""

from dataclasses import dataclass

import numpy as np

from ..core import DaeSystem, SystemState
from ..nonlinear import NewtonConfig, newton_solve


class ScalarLinearDae(DaeSystem):
    n_states = 1
    n_algebraic = 1

    def __init__(self, a=-1.0, b=0.5, c=2.0, x0=1.0):
        super().__init__()
        self.a = float(a)
        self.b = float(b)
        self.c = float(c)
        self.x0 = float(x0)
        self.variable_names = ["x", "y"]

    @property
    def rate(self):
        """Closed-loop eigenvalue ``a + b c``."""
        return self.a + self.b * self.c

    def exact_x(self, t):
        return self.x0 * np.exp(self.rate * np.asarray(t, dtype=float))

    def exact_y(self, t):
        return self.c * self.exact_x(t)

    def f(self, t, x, y):
        return np.array([self.a * x[0] + self.b * y[0]])

    def g(self, t, x, y):
        return np.array([y[0] - self.c * x[0]])

    def jac_fx(self, t, x, y):
        return np.array([[self.a]])

    def jac_fy(self, t, x, y):
        return np.array([[self.b]])

    def jac_gx(self, t, x, y):
        return np.array([[-self.c]])

    def jac_gy(self, t, x, y):
        return np.array([[1.0]])


def build_scalar_linear(a=-1.0, b=0.5, c=2.0, x0=1.0):
    system = ScalarLinearDae(a, b, c, x0)
    state = SystemState(0.0, np.array([system.x0]), np.array([system.c * system.x0]))
    return system, state


def _be_corrector(system, x_n, y_est, h, guess, iterations=None):
    """Backward-Euler corrector ``x = x_n + h f(x, y_est)`` solved by Newton."""
    t = 0.0
    res = lambda x: x - x_n - h * system.f(t, x, y_est)
    jac = lambda x: np.eye(1) - h * system.jac_fx(t, x, y_est)
    cfg = NewtonConfig(tol_residual=1e-15, tol_step=1e-16)
    x, _ = newton_solve(res, jac, guess, cfg, fixed_iterations=iterations)
    return x


def verify_corrector_error_formula(a, b, c, h, e_y_injected):
    """One converged BE corrector step with a perturbed algebraic estimate.

    Starts from the exact state at ``t = 0`` and returns
    ``(observed, predicted)``: the shift in the corrected state caused by
    using ``y(h) + e_y`` instead of ``y(h)``, and ``h b / (1 - h a) * e_y``.
    """
    if 1.0 - h * a == 0.0:
        raise ValueError("1 - h*a must be nonzero")
    system = ScalarLinearDae(a, b, c, 1.0)
    x_n = np.array([1.0])
    y_true = np.array([float(system.exact_y(h))])
    x_ref = _be_corrector(system, x_n, y_true, h, x_n)
    x_pert = _be_corrector(system, x_n, y_true + e_y_injected, h, x_n)
    observed = float(x_pert[0] - x_ref[0])
    predicted = h * b / (1.0 - h * a) * e_y_injected
    return observed, predicted


@dataclass
class SingleIterationResult:
    observed: float           # x after one update minus the analytic x(h)
    predictor_term: float     # part of ``observed`` present with e_y = 0
    ey_term: float            # remainder, attributable to e_y
    ey_coefficient: float     # analytic d(observed)/d(e_y) for the chosen update


def verify_single_iteration_error(a, b, c, h, e_y_injected, update="newton"):
    """Apply exactly one corrector update from the forward-Euler prediction.

    ``update="newton"`` applies one Newton step of the BE corrector, the
    coefficient of ``e_y`` is then ``h b / (1 - h a)``. ``update="fixed-point"``
    applies one sweep ``x = x_n + h f(x_pred, y_est)``, for which the
    coefficient is exactly ``h b`` and the predictor error enters as
    ``h a (x_pred - x(h))``.
    """
    if update not in ("newton", "fixed-point"):
        raise ValueError(f"unknown update {update!r}")
    system = ScalarLinearDae(a, b, c, 1.0)
    x_n = np.array([1.0])
    y_n = np.array([c])
    x_pred = x_n + h * system.f(0.0, x_n, y_n)
    y_true = np.array([float(system.exact_y(h))])
    x_true = float(system.exact_x(h))

    def one_update(y_est):
        if update == "newton":
            return float(_be_corrector(system, x_n, y_est, h, x_pred, iterations=1)[0])
        return float((x_n + h * system.f(0.0, x_pred, y_est))[0])

    base = one_update(y_true) - x_true
    observed = one_update(y_true + e_y_injected) - x_true
    coeff = h * b / (1.0 - h * a) if update == "newton" else h * b
    return SingleIterationResult(observed, base, observed - base, coeff)
