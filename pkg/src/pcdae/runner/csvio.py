"""Trajectory, step-trace and metrics files.

Numbers are written with 17 significant digits, which round-trips any
64-bit float exactly; lines end in LF regardless of platform.
"""

import csv
from pathlib import Path

import numpy as np

from ..results import Trajectory


def _fmt(v):
    return format(float(v), ".17g")


def _open_for_write(path):
    path = Path(path)
    try:
        return path.open("w", encoding="utf-8", newline="")
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def write_trajectory_csv(trajectory, path):
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(trajectory.labels)
        for row in trajectory.data:
            w.writerow([_fmt(v) for v in row])


def read_trajectory_csv(path, n_states=None):
    path = Path(path)
    try:
        with path.open("r", encoding="utf-8", newline="") as fh:
            rows = list(csv.reader(fh))
    except OSError as exc:
        raise OSError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if not rows:
        raise ValueError(f"{path}: empty file, expected a header row")
    labels = rows[0]
    try:
        data = np.array([[float(v) for v in r] for r in rows[1:] if r], dtype=float)
    except ValueError as exc:
        raise ValueError(f"{path}: {exc}") from None
    data = data.reshape(-1, len(labels))
    return Trajectory.from_array(labels, data, n_states)


def write_step_trace_csv(metrics, path):
    """One row per step attempt: ``t,h,accepted`` with ``accepted`` in {0, 1}."""
    with _open_for_write(path) as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["t", "h", "accepted"])
        for r in metrics.step_records:
            w.writerow([_fmt(r.t), _fmt(r.h), int(r.accepted)])


def format_key_values(mapping):
    return "".join(f"{k} = {v}\n" for k, v in mapping.items())


def write_metrics(metrics, path):
    with _open_for_write(path) as fh:
        fh.write(format_key_values(metrics.summary()))


def parse_key_values(text):
    """Inverse of :func:`format_key_values`; values stay strings."""
    out = {}
    for line in text.splitlines():
        if line.strip():
            key, _, value = line.partition("=")
            out[key.strip()] = value.strip()
    return out
