"""Cross-solver trajectory comparison and fixed-step convergence studies."""

from dataclasses import dataclass

import numpy as np

from ..control import PiController
from ..core import FunctionDae, SystemState
from ..errors import PcdaeError, VariableMismatch
from ..integrators import SolverScheme, simulate
from ..models.linear import build_scalar_linear


@dataclass
class ComparisonReport:
    variables: list
    l2: dict                 # variable -> 2-norm of the difference series
    linf: dict               # variable -> max |difference|
    max_variable: str        # variable with the largest L2 norm
    t: np.ndarray            # reference times actually compared
    max_series: np.ndarray   # |difference| of max_variable at those times
    global_max_abs: float
    t_covered: float         # last reference time inside the candidate's span

    def summary(self):
        return {
            "max_variable": self.max_variable,
            "max_variable_l2": self.l2[self.max_variable] if self.max_variable else 0.0,
            "max_variable_linf": self.linf[self.max_variable] if self.max_variable else 0.0,
            "global_max_abs": self.global_max_abs,
            "t_covered": self.t_covered,
        }


def compare_trajectories(reference, candidate):
    """Resample ``candidate`` onto the reference grid and difference them.

    Both trajectories are split into smooth segments at their event
    boundaries and matched segment by segment, so interpolation never
    crosses an algebraic jump. Reference points beyond the end of the
    candidate (a run that stopped early) are not compared; ``t_covered``
    says how far the comparison reached.
    """
    if sorted(reference.variable_names) != sorted(candidate.variable_names):
        missing = set(reference.variable_names) ^ set(candidate.variable_names)
        raise VariableMismatch(f"variable sets differ: {sorted(missing)}")
    names = list(reference.variable_names)
    rd = reference.data
    cd = candidate.data
    ccols = [candidate.labels.index(n) for n in names]
    rsegs = reference.segments()
    csegs = candidate.segments()
    ts, diffs = [], []
    for (a, b), (c, e) in zip(rsegs, csegs):
        rseg = rd[a:b]
        cseg = cd[c:e]
        keep = rseg[:, 0] <= cseg[-1, 0]
        if not keep.any():
            continue
        tr = rseg[keep, 0]
        d = np.empty((tr.size, len(names)))
        for j, col in enumerate(ccols):
            d[:, j] = np.interp(tr, cseg[:, 0], cseg[:, col]) - rseg[keep, 2 + j]
        ts.append(tr)
        diffs.append(np.abs(d))
    if ts:
        t = np.concatenate(ts)
        absdiff = np.vstack(diffs)
    else:
        t = np.empty(0)
        absdiff = np.empty((0, len(names)))
    l2 = {n: float(np.linalg.norm(absdiff[:, j])) for j, n in enumerate(names)}
    linf = {n: float(absdiff[:, j].max()) if t.size else 0.0 for j, n in enumerate(names)}
    if names:
        jmax = int(np.argmax([l2[n] for n in names]))
        max_variable = names[jmax]
        series = absdiff[:, jmax]
    else:
        max_variable = ""
        series = np.zeros(t.size)
    return ComparisonReport(names, l2, linf, max_variable, t, series,
                            float(absdiff.max()) if absdiff.size else 0.0,
                            float(t[-1]) if t.size else float("nan"))


@dataclass
class ConvergenceResult:
    h: np.ndarray
    errors: np.ndarray
    order: float


def fitted_order(h, errors):
    """Least-squares slope of ``log(error)`` against ``log(h)``."""
    return float(np.polyfit(np.log(h), np.log(errors), 1)[0])


def decay_problem(rate=-1.0, x0=1.0):
    """The pure ODE ``x' = rate * x`` as a DAE with no algebraic variables."""
    system = FunctionDae(1, 0, lambda t, x, y: rate * x, lambda t, x, y: np.empty(0),
                         jac_fx=lambda t, x, y: np.array([[rate]]),
                         variable_names=["x"])
    state = SystemState(0.0, np.array([x0]), np.empty(0))
    return system, state, lambda t: x0 * np.exp(rate * t)


CONVERGENCE_MODELS = ("decay", "scalar-linear")


def convergence_study(model, scheme, h_list, t_end=1.0, **params):
    """Fixed-step global error of ``x`` at ``t_end`` for each ``h``.

    ``model`` is ``"decay"`` (``x' = rate x``; param ``rate``) or
    ``"scalar-linear"`` (params ``a, b, c``); both have analytic solutions.
    ``h_list`` must be strictly decreasing with at least three entries,
    and every ``h`` should divide ``t_end`` (the last step is clamped
    otherwise).
    """
    h_list = [float(h) for h in h_list]
    if len(h_list) < 3:
        raise ValueError("need at least three step sizes")
    if any(b >= a for a, b in zip(h_list, h_list[1:])) or h_list[-1] <= 0:
        raise ValueError("step sizes must be positive and strictly decreasing")
    if not isinstance(scheme, SolverScheme):
        scheme = SolverScheme(scheme)
    errors = []
    for h in h_list:
        if model == "decay":
            system, state, exact = decay_problem(**params)
        elif model == "scalar-linear":
            system, state = build_scalar_linear(**params)
            exact = system.exact_x
        else:
            raise ValueError(f"unknown model {model!r}; choose from {CONVERGENCE_MODELS}")
        ctrl = PiController(h_min=min(1e-7, h / 10), h_max=max(0.1, h))
        try:
            traj, metrics = simulate(system, state, scheme, ctrl, t_end, fixed_step=h)
        except PcdaeError as exc:
            raise type(exc)(f"h={h:g}: {exc}") from exc
        if metrics.diverged:
            raise RuntimeError(f"h={h:g}: run diverged ({metrics.diverged_reason})")
        errors.append(abs(traj.data[-1, 2] - float(exact(t_end))))
    h_arr = np.array(h_list)
    err_arr = np.array(errors)
    return ConvergenceResult(h_arr, err_arr, fitted_order(h_arr, err_arr))
