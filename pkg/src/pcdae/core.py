"""Semi-explicit DAE systems, solver state, events and consistent initialization.

A system is ``x' = f(t, x, y)``, ``0 = g(t, x, y)`` with ``dg/dy`` nonsingular.
Built-in models override the four Jacobian blocks analytically; user
systems can rely on the central-difference defaults.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .nonlinear import NewtonConfig, solve_algebraic

FD_REL_STEP = 1e-7


def fd_jacobian(fun, z):
    """Central-difference Jacobian of ``fun`` at ``z``.

    Each column uses the perturbation ``1e-7 * |z_i| + 1e-7``.
    """
    z = np.asarray(z, dtype=float)
    f0 = np.asarray(fun(z), dtype=float)
    jac = np.empty((f0.size, z.size))
    for i in range(z.size):
        dz = FD_REL_STEP * abs(z[i]) + FD_REL_STEP
        zp = z.copy()
        zm = z.copy()
        zp[i] += dz
        zm[i] -= dz
        jac[:, i] = (np.asarray(fun(zp)) - np.asarray(fun(zm))) / (2.0 * dz)
    return jac


@dataclass
class Event:
    """A parameter mutation applied at ``time``.

    ``apply`` receives the system and changes algebraic-equation data only
    (fault shunts, branch status); it never touches the state vector.
    """
    time: float
    apply: Callable
    label: str = ""


@dataclass
class SystemState:
    t: float
    x: np.ndarray
    y: np.ndarray
    h_last: Optional[float] = None

    def copy(self):
        return SystemState(self.t, self.x.copy(), self.y.copy(), self.h_last)


class DaeSystem:
    """Base class for ``x' = f(t, x, y)``, ``0 = g(t, x, y)``.

    Subclasses set ``n_states``/``n_algebraic`` and implement ``f`` and ``g``.
    The Jacobian blocks default to central differences.
    """

    n_states = 0
    n_algebraic = 0

    def __init__(self):
        self.events = []
        self._names = None

    @property
    def variable_names(self):
        if self._names is not None:
            return list(self._names)
        return ([f"x{i}" for i in range(self.n_states)]
                + [f"y{i}" for i in range(self.n_algebraic)])

    @variable_names.setter
    def variable_names(self, names):
        names = list(names)
        if len(names) != self.n_states + self.n_algebraic:
            raise ValueError("one name per state and algebraic variable required")
        self._names = names

    def f(self, t, x, y):
        raise NotImplementedError

    def g(self, t, x, y):
        raise NotImplementedError

    def jac_fx(self, t, x, y):
        return fd_jacobian(lambda v: self.f(t, v, y), x)

    def jac_fy(self, t, x, y):
        return fd_jacobian(lambda v: self.f(t, x, v), y)

    def jac_gx(self, t, x, y):
        return fd_jacobian(lambda v: self.g(t, v, y), x)

    def jac_gy(self, t, x, y):
        return fd_jacobian(lambda v: self.g(t, x, v), y)

    def sorted_events(self, t_start=-np.inf, t_end=np.inf):
        """Events due in ``[t_start, t_end]`` in time order.

        Events after ``t_end`` are outside the horizon and dropped; an event
        before ``t_start`` can never be applied and raises ``ValueError``.
        """
        events = sorted(self.events, key=lambda e: e.time)
        for ev in events:
            if ev.time < t_start:
                raise ValueError(f"event {ev.label!r} at t={ev.time} precedes t0={t_start}")
        return [ev for ev in events if ev.time <= t_end]


class FunctionDae(DaeSystem):
    """A DAE assembled from plain callables; missing Jacobians fall back to FD."""

    def __init__(self, n_states, n_algebraic, f, g, jac_fx=None, jac_fy=None,
                 jac_gx=None, jac_gy=None, events=None, variable_names=None):
        super().__init__()
        if n_states < 1 or n_algebraic < 0:
            raise ValueError("need n_states >= 1 and n_algebraic >= 0")
        self.n_states = n_states
        self.n_algebraic = n_algebraic
        self._f = f
        self._g = g
        self._jacs = {"fx": jac_fx, "fy": jac_fy, "gx": jac_gx, "gy": jac_gy}
        self.events = list(events or [])
        if variable_names is not None:
            self.variable_names = variable_names

    def f(self, t, x, y):
        return np.asarray(self._f(t, x, y), dtype=float)

    def g(self, t, x, y):
        if self.n_algebraic == 0:
            return np.zeros(0)
        return np.asarray(self._g(t, x, y), dtype=float)

    def _block(self, key, t, x, y, fallback):
        fn = self._jacs[key]
        if fn is None:
            return fallback(t, x, y)
        return np.asarray(fn(t, x, y), dtype=float).reshape(fallback_shape(self, key))

    def jac_fx(self, t, x, y):
        return self._block("fx", t, x, y, super().jac_fx)

    def jac_fy(self, t, x, y):
        return self._block("fy", t, x, y, super().jac_fy)

    def jac_gx(self, t, x, y):
        return self._block("gx", t, x, y, super().jac_gx)

    def jac_gy(self, t, x, y):
        return self._block("gy", t, x, y, super().jac_gy)


def fallback_shape(system, key):
    rows = system.n_states if key[0] == "f" else system.n_algebraic
    cols = system.n_states if key[1] == "x" else system.n_algebraic
    return rows, cols


def jacobian_mismatch(system, t, x, y):
    """Largest relative gap between analytic and central-difference blocks.

    The gap for each block is ``max|A - F| / max(1, max|F|)``.
    """
    worst = 0.0
    pairs = [
        (system.jac_fx(t, x, y), fd_jacobian(lambda v: system.f(t, v, y), x)),
        (system.jac_fy(t, x, y), fd_jacobian(lambda v: system.f(t, x, v), y)),
        (system.jac_gx(t, x, y), fd_jacobian(lambda v: system.g(t, v, y), x)),
        (system.jac_gy(t, x, y), fd_jacobian(lambda v: system.g(t, x, v), y)),
    ]
    for analytic, numeric in pairs:
        if numeric.size == 0:
            continue
        scale = max(1.0, float(np.max(np.abs(numeric))))
        worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
    return worst


def consistent_initialize(system, t0, x0, y_guess, cfg=None, counter=None):
    """Solve the algebraic equations at ``(t0, x0)``; ``x0`` is returned as given."""
    x0 = np.array(x0, dtype=float, copy=True)
    y, _ = solve_algebraic(system, t0, x0, np.asarray(y_guess, dtype=float),
                           cfg or NewtonConfig(), counter)
    return SystemState(float(t0), x0, y)


def apply_event(system, state, event, cfg=None, counter=None):
    """Mutate ``system`` per ``event`` and re-solve ``y`` with ``x`` frozen.

    The returned state shares no buffers with ``state``; its ``x`` is a
    bitwise copy. Any algebraic history held by the caller is stale after
    this call and must be reset.
    """
    event.apply(system)
    y, _ = solve_algebraic(system, state.t, state.x, state.y,
                           cfg or NewtonConfig(), counter)
    return SystemState(state.t, state.x.copy(), y, state.h_last)
