"""Dense linear solves and damped Newton iteration."""

from dataclasses import dataclass

import numpy as np

from . import kernels
from .errors import NewtonDivergence, SingularJacobian

MIN_DAMPING = 1.0 / 64.0


@dataclass(frozen=True)
class NewtonConfig:
    tol_residual: float = 1e-8
    tol_step: float = 1e-10
    max_iter: int = 20
    damping: float = 1.0

    def __post_init__(self):
        if not self.tol_residual > 0 or not self.tol_step > 0:
            raise ValueError("Newton tolerances must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")
        if not MIN_DAMPING <= self.damping <= 1.0:
            raise ValueError("damping must lie in [1/64, 1]")


@dataclass
class NewtonReport:
    converged: bool = False
    iterations: int = 0
    final_residual: float = 0.0
    jacobian_factorizations: int = 0
    last_update: float = float("inf")


def solve_linear(a, b):
    """Solve ``a @ z = b`` by row-pivoted elimination.

    Raises SingularJacobian when a pivot drops below ``1e-14 * ||a||_inf``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] != b.shape[0]:
        raise ValueError(f"incompatible shapes {a.shape} and {b.shape}")
    lu, piv = kernels.lu_factor(a)
    return kernels.lu_solve(lu, piv, b)


def _norm(v):
    return float(np.max(np.abs(v))) if v.size else 0.0


def newton_solve(residual, jacobian, guess, cfg=None, fixed_iterations=None):
    """Damped Newton iteration on ``residual(z) = 0``.

    Returns ``(z, report)``. With ``fixed_iterations=k`` exactly ``k`` full
    (undamped) updates are applied and no convergence test is made; the
    report then only records what happened.

    The step fraction starts at ``cfg.damping`` and is halved while the
    residual norm grows, down to 1/64. Hitting that floor with a growing
    residual, or running out of iterations, raises NewtonDivergence.
    """
    cfg = cfg or NewtonConfig()
    z = np.array(guess, dtype=float, copy=True)
    report = NewtonReport()
    r = np.asarray(residual(z), dtype=float)
    rnorm = _norm(r)
    report.final_residual = rnorm

    if fixed_iterations is not None:
        for k in range(fixed_iterations):
            if k:
                r = np.asarray(residual(z), dtype=float)
            lu, piv = kernels.lu_factor(jacobian(z))
            report.jacobian_factorizations += 1
            dz = kernels.lu_solve(lu, piv, r)
            z -= dz
            report.iterations += 1
            report.last_update = _norm(dz)
        report.final_residual = _norm(np.asarray(residual(z), dtype=float))
        report.converged = report.final_residual <= cfg.tol_residual
        return z, report

    if rnorm <= cfg.tol_residual:
        report.converged = True
        return z, report

    while report.iterations < cfg.max_iter:
        try:
            lu, piv = kernels.lu_factor(jacobian(z))
        except SingularJacobian as exc:
            # singular at the guess is structural; later on the iterate wandered
            if report.iterations == 0:
                raise
            raise NewtonDivergence(
                f"singular Jacobian after {report.iterations} iterations "
                f"(residual {rnorm:.3e})", report, z) from exc
        report.jacobian_factorizations += 1
        dz = kernels.lu_solve(lu, piv, r)
        lam = cfg.damping
        while True:
            trial = z - lam * dz
            r_trial = np.asarray(residual(trial), dtype=float)
            tnorm = _norm(r_trial)
            if tnorm <= rnorm or not np.isfinite(rnorm):
                break
            if lam <= MIN_DAMPING:
                report.iterations += 1
                report.final_residual = tnorm
                raise NewtonDivergence(
                    f"residual increased to {tnorm:.3e} at minimum damping "
                    f"after {report.iterations} iterations", report, trial)
            lam *= 0.5
        if not np.isfinite(tnorm):
            report.iterations += 1
            report.final_residual = tnorm
            raise NewtonDivergence("non-finite residual", report, trial)
        z = trial
        r = r_trial
        rnorm = tnorm
        report.iterations += 1
        report.final_residual = rnorm
        report.last_update = lam * _norm(dz)
        if rnorm <= cfg.tol_residual or report.last_update <= cfg.tol_step:
            report.converged = True
            return z, report

    raise NewtonDivergence(
        f"no convergence in {cfg.max_iter} iterations "
        f"(residual {report.final_residual:.3e})", report, z)


def solve_algebraic(system, t, x, y_guess, cfg=None, counter=None):
    """Solve ``g(t, x, y) = 0`` for ``y`` starting from ``y_guess``.

    ``counter`` (any object with an ``add_nonlinear_call()`` method) is told
    about the call so run metrics can tally it.
    """
    y_guess = np.asarray(y_guess, dtype=float)
    if counter is not None:
        counter.add_nonlinear_call()
    if system.n_algebraic == 0:
        return y_guess.copy(), NewtonReport(converged=True)
    return newton_solve(lambda y: system.g(t, x, y),
                        lambda y: system.jac_gy(t, x, y), y_guess, cfg)
