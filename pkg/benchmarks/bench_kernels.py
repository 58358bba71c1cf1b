"""Compare the compiled and pure-Python kernel backends.

Times each hot kernel on the three-machine network and a full SMIB fault
simulation with either backend, and checks that the two agree.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from pcdae import _pykernels, kernels
from pcdae.control import PiController
from pcdae.integrators import SolverScheme, simulate
from pcdae.models import build_multimachine, build_smib

NAMES = ("lu_factor", "lu_solve", "machine_f", "machine_jac", "network_g", "network_jac")


def _backend(name):
    if name == "python":
        return _pykernels
    from pcdae import _kernels
    return _kernels


def _time(fn, repeat):
    best = np.inf
    for _ in range(3):
        t0 = time.perf_counter()
        for _ in range(repeat):
            fn()
        best = min(best, time.perf_counter() - t0)
    return best / repeat


def kernel_timings(mod, repeat):
    s, st, _ = build_multimachine(with_events=False)
    x, y = st.x, st.y
    fx = np.zeros((s.n_states, s.n_states))
    fy = np.zeros((s.n_states, s.n_algebraic))
    gx = np.zeros((s.n_algebraic, s.n_states))
    gy = np.zeros((s.n_algebraic, s.n_algebraic))
    mod.network_jac(x, y, s.gmat, s.bmat, s.pinned, s.load_p, s.load_q, 0.4, s.mac_bus,
                    s.emf, s.xd, gx, gy)
    lu, piv = mod.lu_factor(gy)
    b = np.arange(1.0, s.n_algebraic + 1)
    calls = {
        "lu_factor": lambda: mod.lu_factor(gy),
        "lu_solve": lambda: mod.lu_solve(lu, piv, b),
        "machine_f": lambda: mod.machine_f(x, y, s.mac_bus, s.emf, s.xd, s.pm, s.two_h,
                                           s.damping, s.omega_s),
        "machine_jac": lambda: mod.machine_jac(x, y, s.mac_bus, s.emf, s.xd, s.two_h,
                                               s.damping, s.omega_s, fx, fy),
        "network_g": lambda: mod.network_g(x, y, s.gmat, s.bmat, s.pinned, s.vspec, s.load_p,
                                           s.load_q, 0.4, s.mac_bus, s.emf, s.xd),
        "network_jac": lambda: mod.network_jac(x, y, s.gmat, s.bmat, s.pinned, s.load_p,
                                               s.load_q, 0.4, s.mac_bus, s.emf, s.xd, gx, gy),
    }
    return {k: _time(calls[k], repeat) for k in NAMES}


def simulation(backend_name):
    mod = _backend(backend_name)
    saved = {k: getattr(kernels, k) for k in NAMES}
    try:
        for k in NAMES:
            setattr(kernels, k, getattr(mod, k))
        s, st, _ = build_smib()
        t0 = time.perf_counter()
        traj, metrics = simulate(s, st, SolverScheme("pc-predict"), PiController(), 10.0)
        return time.perf_counter() - t0, traj.data, metrics.nonlinear_calls
    finally:
        for k, fn in saved.items():
            setattr(kernels, k, fn)


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=2000)
    args = ap.parse_args()
    if not kernels.compiled_available():
        print("compiled extension not built; only the Python backend is available")
        return
    py = kernel_timings(_backend("python"), args.repeat)
    cy = kernel_timings(_backend("cython"), args.repeat)
    print(f"{'kernel':<12} {'python [us]':>12} {'cython [us]':>12} {'speedup':>8}")
    for k in NAMES:
        print(f"{k:<12} {py[k] * 1e6:12.2f} {cy[k] * 1e6:12.2f} {py[k] / cy[k]:8.1f}")
    t_py, d_py, n_py = simulation("python")
    t_cy, d_cy, n_cy = simulation("cython")
    same = d_py.shape == d_cy.shape and n_py == n_cy
    diff = float(np.max(np.abs(d_py - d_cy))) if same else float("nan")
    print(f"\nSMIB fault, pc-predict, 10 s: python {t_py:.2f} s, cython {t_cy:.2f} s, "
          f"speedup {t_py / t_cy:.1f}x")
    print(f"same step sequence: {same}; max trajectory difference: {diff:.2e}")


if __name__ == "__main__":
    main()
