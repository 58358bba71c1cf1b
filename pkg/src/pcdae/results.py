"""Run metrics and trajectories produced by :func:`pcdae.integrators.simulate`."""

from dataclasses import dataclass, field

import numpy as np


@dataclass
class StepRecord:
    t: float
    h: float
    accepted: bool
    error: float


@dataclass
class RunMetrics:
    nonlinear_calls: int = 0
    accepted_steps: int = 0
    rejected_steps: int = 0
    recorrections: int = 0
    diverged: bool = False
    diverged_reason: str = ""
    step_records: list = field(default_factory=list)

    def add_nonlinear_call(self, n=1):
        self.nonlinear_calls += n

    def record(self, t, h, accepted, error, calls=0, recorrections=0):
        self.step_records.append(StepRecord(float(t), float(h), bool(accepted), float(error)))
        if accepted:
            self.accepted_steps += 1
        else:
            self.rejected_steps += 1
        self.nonlinear_calls += calls
        self.recorrections += recorrections

    @property
    def attempts(self):
        return self.accepted_steps + self.rejected_steps

    def check_invariants(self, partitioned=True):
        """Raise AssertionError if the counters are inconsistent."""
        assert self.attempts == len(self.step_records), "attempt count mismatch"
        assert sum(r.accepted for r in self.step_records) == self.accepted_steps
        assert self.nonlinear_calls >= self.accepted_steps, "fewer solves than steps"
        if not partitioned:
            assert self.recorrections == 0

    def summary(self):
        return {
            "nonlinear_calls": self.nonlinear_calls,
            "accepted_steps": self.accepted_steps,
            "rejected_steps": self.rejected_steps,
            "recorrections": self.recorrections,
            "diverged": int(self.diverged),
            "diverged_reason": self.diverged_reason,
        }

    def accepted_step_sizes(self, t_from=-np.inf, t_to=np.inf):
        return np.array([r.h for r in self.step_records
                         if r.accepted and t_from <= r.t < t_to])


class Trajectory:
    """Accepted solution points: time, step used to reach it, then x and y.

    Time is strictly increasing except at events, where the pre-event row is
    followed by a post-event row with the same time (and ``h = 0``), so the
    algebraic jump is represented exactly.
    """

    def __init__(self, variable_names, n_states):
        self.variable_names = list(variable_names)
        self.n_states = n_states
        self._rows = []

    @property
    def labels(self):
        return ["t", "h"] + self.variable_names

    def append(self, t, h, x, y, event_boundary=False):
        row = np.empty(2 + len(self.variable_names))
        row[0] = t
        row[1] = h
        row[2:2 + x.size] = x
        row[2 + x.size:] = y
        if self._rows:
            last = self._rows[-1][0]
            if not (t > last or (event_boundary and t == last)):
                raise ValueError(f"time {t!r} does not advance past {last!r}")
        self._rows.append(row)

    def segments(self):
        """Index ranges ``(start, stop)`` of the smooth pieces between events."""
        t = self.t
        cuts = [0] + [i for i in range(1, len(t)) if t[i] == t[i - 1]] + [len(t)]
        return list(zip(cuts[:-1], cuts[1:]))

    @classmethod
    def from_array(cls, labels, data, n_states=None):
        labels = list(labels)
        if labels[:2] != ["t", "h"]:
            raise ValueError("first two columns must be t and h")
        traj = cls(labels[2:], n_states if n_states is not None else 0)
        for row in np.atleast_2d(np.asarray(data, dtype=float)):
            traj._rows.append(row.copy())
        return traj

    def __len__(self):
        return len(self._rows)

    @property
    def data(self):
        if not self._rows:
            return np.empty((0, len(self.labels)))
        return np.vstack(self._rows)

    @property
    def t(self):
        return self.data[:, 0]

    def column(self, name):
        return self.data[:, self.labels.index(name)]
