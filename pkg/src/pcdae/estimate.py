"""Algebraic-variable estimates fed to the corrector.

Two estimators share one history object: hold-previous returns ``y_n``; the
extrapolating estimator adds the backward-difference slope scaled to the
next step, ``y_n + h_next * (y_n - y_{n-1}) / h_n``. After a discontinuity
(and at the start of a run) the slope is meaningless, so extrapolation falls
back to hold-previous until one step has been accepted.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np


@dataclass
class AlgebraicHistory:
    y_curr: np.ndarray
    y_prev: Optional[np.ndarray] = None
    h_prev: Optional[float] = None
    fresh_discontinuity: bool = True

    def __post_init__(self):
        if (self.y_prev is None) != (self.h_prev is None):
            raise ValueError("y_prev and h_prev must be given together")
        if self.h_prev is not None and not self.h_prev > 0:
            raise ValueError("h_prev must be positive")

    @property
    def can_extrapolate(self):
        return self.y_prev is not None and not self.fresh_discontinuity

    def copy(self):
        return AlgebraicHistory(
            self.y_curr.copy(),
            None if self.y_prev is None else self.y_prev.copy(),
            self.h_prev, self.fresh_discontinuity)


def estimate_hold(history):
    return history.y_curr.copy()


def estimate_extrapolate(history, h_next):
    if not history.can_extrapolate:
        return estimate_hold(history)
    slope = (history.y_curr - history.y_prev) / history.h_prev
    return history.y_curr + h_next * slope


def push_accepted(history, y_new, h_used):
    if not h_used > 0:
        raise ValueError("h_used must be positive")
    return AlgebraicHistory(np.array(y_new, dtype=float, copy=True),
                            history.y_curr.copy(), float(h_used), False)


def reset_on_event(history, y_post):
    return AlgebraicHistory(np.array(y_post, dtype=float, copy=True))
