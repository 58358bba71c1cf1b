"""Command line entry point: ``pcdae {run,compare,converge,bench}``.

Exit codes: 0 success, 1 diverged run, 2 configuration error, 3 I/O error.
"""

import argparse
import sys
from dataclasses import replace
from pathlib import Path

from ..control import EPSILON_PROFILES
from ..errors import ConfigError, MalformedCase, PcdaeError, VariableMismatch
from ..integrators import simulate
from ..models import SmibParams, build_multimachine, build_scalar_linear, build_smib
from .compare import CONVERGENCE_MODELS, compare_trajectories, convergence_study
from .config import ScenarioConfig, load_config
from .csvio import (format_key_values, read_trajectory_csv, write_metrics,
                    write_step_trace_csv, write_trajectory_csv)

EXIT_OK, EXIT_DIVERGED, EXIT_CONFIG, EXIT_IO = 0, 1, 2, 3

# flag destination -> config key
FLAG_KEYS = {
    "solver": "solver.scheme",
    "rtol": "controller.rtol",
    "atol": "controller.atol",
    "epsilon": "check.epsilon",
    "h0": "run.h_init",
    "h_min": "controller.h_min",
    "h_max": "controller.h_max",
    "t_end": "run.t_end",
    "out": "output.dir",
    "fixed_step": "run.fixed_step",
    "model": "model",
    "case": "model.case",
}


def build_model(cfg):
    """Return ``(system, state)`` for the configured model."""
    model = cfg["model"]
    if model == "smib":
        params = SmibParams(
            h=cfg["model.h"], d=cfg["model.d"], xd_prime=cfg["model.xd_prime"],
            v_inf=cfg["model.v_inf"], v_gen=cfg["model.v_gen"], x12=cfg["model.x12"],
            x13=cfg["model.x13"], x23=cfg["model.x23"], p_load=cfg["model.p_load"],
            q_load=cfg["model.q_load"], p_gen=cfg["model.p_gen"],
            fault_on=cfg["model.fault_on"], fault_off=cfg["model.fault_off"],
            fault_admittance=1.0 / (1j * cfg["model.fault_reactance"]),
            with_events=cfg["model.events"])
        try:
            system, state, _ = build_smib(params)
        except ValueError as exc:
            raise ConfigError(f"model parameters: {exc}") from None
    elif model == "multimachine":
        system, state, _ = build_multimachine(cfg["model.case"], with_events=cfg["model.events"])
    else:
        system, state = build_scalar_linear(cfg["model.a"], cfg["model.b"], cfg["model.c"],
                                            cfg["model.x0"])
    return system, state


def run_scenario(cfg):
    system, state = build_model(cfg)
    return simulate(system, state, cfg.solver_scheme(), cfg.controller(), cfg["run.t_end"],
                    h_init=cfg["run.h_init"], fixed_step=cfg["run.fixed_step"])


def _scenario_config(args):
    cfg = load_config(args.config) if args.config else ScenarioConfig()
    for dest, key in FLAG_KEYS.items():
        value = getattr(args, dest, None)
        if value is not None:
            cfg.set(key, value)
    return cfg.validate()


def _add_scenario_flags(p):
    p.add_argument("--config", metavar="PATH", help="scenario file (key = value lines)")
    p.add_argument("--model", choices=("smib", "multimachine", "scalar-linear"))
    p.add_argument("--case", metavar="PATH_OR_NAME", help="multi-machine case file or bundled name")
    p.add_argument("--solver", choices=("itm", "pc-hold", "pc-predict"))
    p.add_argument("--rtol", type=float)
    p.add_argument("--atol", type=float)
    p.add_argument("--epsilon", type=float, help="algebraic check threshold")
    p.add_argument("--h0", type=float, help="initial step and restart step after events")
    p.add_argument("--h-min", dest="h_min", type=float)
    p.add_argument("--h-max", dest="h_max", type=float)
    p.add_argument("--t-end", dest="t_end", type=float)
    p.add_argument("--out", metavar="DIR")
    p.add_argument("--fixed-step", dest="fixed_step", type=float, metavar="H")


def _print_table(rows):
    header = ("solver", "nonlinear_calls", "accepted", "rejected", "diverged")
    widths = [max(len(str(r[i])) for r in [header, *rows]) for i in range(len(header))]
    for r in [header, *rows]:
        print("  ".join(str(v).rjust(w) if i else str(v).ljust(w)
                        for i, (v, w) in enumerate(zip(r, widths))))


def cmd_run(args):
    cfg = _scenario_config(args)
    traj, metrics = run_scenario(cfg)
    metrics.check_invariants(cfg.solver_scheme().partitioned)
    out = Path(cfg["output.dir"])
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create {out}: {exc.strerror or exc}") from exc
    write_trajectory_csv(traj, out / "trajectory.csv")
    write_step_trace_csv(metrics, out / "steps.csv")
    write_metrics(metrics, out / "metrics.txt")
    sys.stdout.write(format_key_values(metrics.summary()))
    return EXIT_DIVERGED if metrics.diverged else EXIT_OK


def cmd_compare(args):
    ref = read_trajectory_csv(args.reference)
    cand = read_trajectory_csv(args.candidate)
    report = compare_trajectories(ref, cand)
    sys.stdout.write(format_key_values(report.summary()))
    if args.out:
        import csv
        path = Path(args.out)
        try:
            with path.open("w", encoding="utf-8", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(["t", f"absdiff_{report.max_variable}"])
                for t, d in zip(report.t, report.max_series):
                    w.writerow([format(t, ".17g"), format(d, ".17g")])
        except OSError as exc:
            raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return EXIT_OK


def cmd_converge(args):
    try:
        h_list = [float(v) for v in args.steps.split(",")]
    except ValueError:
        raise ConfigError(f"--steps: expected comma-separated numbers, got {args.steps!r}") from None
    params = {}
    if args.model == "decay":
        params["rate"] = args.rate
    else:
        params.update(a=args.a, b=args.b, c=args.c)
    from ..integrators import SolverScheme
    scheme = SolverScheme(args.solver, use_check=args.check)
    try:
        result = convergence_study(args.model, scheme, h_list, args.t_end, **params)
    except ValueError as exc:
        raise ConfigError(str(exc)) from None
    for h, e in zip(result.h, result.errors):
        print(f"h = {h:.6g}  error = {e:.6e}")
    print(f"order = {result.order:.4f}")
    return EXIT_OK


def bench_rows(cfg):
    """Run ITM, pc-hold and pc-predict on the configured scenario.

    pc-hold uses ``check.epsilon`` when set, otherwise the tight profile.
    Returns ``[(solver, metrics), ...]``.
    """
    rows = []
    for kind in ("itm", "pc-hold", "pc-predict"):
        run_cfg = ScenarioConfig(cfg.as_dict())
        run_cfg.set("solver.scheme", kind)
        if kind == "pc-hold" and cfg["check.epsilon"] is None:
            run_cfg.set("check.epsilon", EPSILON_PROFILES["tight"])
        _, metrics = run_scenario(run_cfg)
        rows.append((kind, metrics))
    return rows


def cmd_bench(args):
    cfg = _scenario_config(args)
    rows = bench_rows(cfg)
    _print_table([(k, m.nonlinear_calls, m.accepted_steps, m.rejected_steps, int(m.diverged))
                  for k, m in rows])
    print()
    for kind, m in rows:
        sys.stdout.write(format_key_values({f"{kind}.{k}": v for k, v in m.summary().items()}))
    return EXIT_OK


def make_parser():
    parser = argparse.ArgumentParser(prog="pcdae", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="simulate one scenario and write CSV/metrics files")
    _add_scenario_flags(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="difference report between two trajectory CSVs")
    p.add_argument("reference")
    p.add_argument("candidate")
    p.add_argument("--out", metavar="PATH", help="write the max-L2 variable's difference series")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("converge", help="fixed-step convergence order study")
    p.add_argument("--model", choices=CONVERGENCE_MODELS, default="decay")
    p.add_argument("--solver", choices=("itm", "pc-hold", "pc-predict"), default="itm")
    p.add_argument("--steps", default="0.1,0.05,0.025,0.0125",
                   help="comma-separated, strictly decreasing step sizes")
    p.add_argument("--t-end", dest="t_end", type=float, default=1.0)
    p.add_argument("--rate", type=float, default=-1.0)
    p.add_argument("-a", type=float, default=-2.0)
    p.add_argument("-b", type=float, default=1.0)
    p.add_argument("-c", type=float, default=1.0)
    p.add_argument("--check", action=argparse.BooleanOptionalAction, default=False,
                   help="run the algebraic consistency check (off: measure the estimator alone)")
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("bench", help="Table-style summary of the three schemes")
    _add_scenario_flags(p)
    p.set_defaults(func=cmd_bench)
    return parser


def main(argv=None):
    parser = make_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (ConfigError, MalformedCase, VariableMismatch) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except PcdaeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DIVERGED


if __name__ == "__main__":
    sys.exit(main())
