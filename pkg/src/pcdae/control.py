"""PI step-size control, step acceptance and the algebraic consistency check."""

from dataclasses import dataclass

import numpy as np

ERR_FLOOR = 1e-10


@dataclass
class PiController:
    rtol: float = 1e-6
    atol: float = 1e-8
    order: int = 2
    k_i: float = None
    k_p: float = None
    safety: float = 0.9
    fac_min: float = 0.5
    fac_max: float = 2.0
    h_min: float = 1e-7
    h_max: float = 0.1
    err_prev: float = 1.0

    def __post_init__(self):
        if self.k_i is None:
            self.k_i = 0.3 / self.order
        if self.k_p is None:
            self.k_p = 0.4 / self.order
        if not 0 < self.fac_min < 1 < self.fac_max:
            raise ValueError("need 0 < fac_min < 1 < fac_max")
        if not 0 < self.h_min < self.h_max:
            raise ValueError("need 0 < h_min < h_max")
        if self.k_i < 0 or self.k_p < 0:
            raise ValueError("PI gains must be non-negative")
        if not (self.rtol >= 0 and self.atol >= 0 and self.rtol + self.atol > 0):
            raise ValueError("tolerances must be non-negative and not both zero")

    def reset(self):
        self.err_prev = 1.0

    def clamp(self, h):
        return min(self.h_max, max(self.h_min, h))


@dataclass(frozen=True)
class AlgebraicCheck:
    epsilon: float = 1e-4
    max_recorrections: int = 3

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError("epsilon must be positive")
        if self.max_recorrections < 0:
            raise ValueError("max_recorrections must be >= 0")


EPSILON_PROFILES = {"loose": 1e-4, "tight": 1e-6}


def error_weights(a, b, controller):
    return controller.atol + controller.rtol * np.maximum(np.abs(a), np.abs(b))


def scaled_error(x_pred, x_corr, controller):
    """RMS of ``(x_corr - x_pred)`` weighted by ``atol + rtol * max(|x_corr|, |x_pred|)``."""
    x_pred = np.asarray(x_pred, dtype=float)
    x_corr = np.asarray(x_corr, dtype=float)
    if x_pred.shape != x_corr.shape:
        raise ValueError("vectors differ in length")
    if x_corr.size == 0:
        return 0.0
    ratio = (x_corr - x_pred) / error_weights(x_pred, x_corr, controller)
    return float(np.sqrt(np.mean(ratio * ratio)))


def propose_step(controller, err, h, accepted=False):
    """PI step proposal.

    ``h_next = h * clamp(safety * err**-k_i * (err_prev/err)**k_p, fac_min, fac_max)``,
    then clamped to ``[h_min, h_max]``. ``err_prev`` is only advanced when
    the caller signals ``accepted=True``.
    """
    e = max(float(err), ERR_FLOOR)
    fac = controller.safety * e ** (-controller.k_i) * (controller.err_prev / e) ** controller.k_p
    fac = min(controller.fac_max, max(controller.fac_min, fac))
    if accepted:
        controller.err_prev = e
    return controller.clamp(h * fac)


def accept_step(err):
    return err <= 1.0


def algebraic_consistency(y_new, y_ref, check):
    """True when ``||y_new - y_ref||_inf <= epsilon`` (vacuously for empty vectors)."""
    y_new = np.asarray(y_new, dtype=float)
    if y_new.size == 0:
        return True
    return float(np.max(np.abs(y_new - np.asarray(y_ref, dtype=float)))) <= check.epsilon
