"""Scenario configuration: a flat ``key = value`` file with dotted keys.

Example::

    # default SMIB fault, tight algebraic check
    model = smib
    solver.scheme = pc-hold
    check.profile = tight
    controller.rtol = 1e-6
    run.t_end = 10

Blank lines and ``#`` comments are ignored. Every key must appear in
:data:`SCHEMA`; unknown keys, malformed values and duplicates raise
:class:`~pcdae.errors.ConfigError` naming the key and line.
"""

from pathlib import Path

from ..control import EPSILON_PROFILES, AlgebraicCheck, PiController
from ..errors import ConfigError
from ..integrators import SchemeKind, SolverScheme
from ..nonlinear import NewtonConfig


def _bool(text):
    value = text.strip().lower()
    if value in ("1", "true", "yes", "on"):
        return True
    if value in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected a boolean, got {text!r}")


def _optional_float(text):
    return None if text.strip().lower() in ("", "none") else float(text)


def _optional_int(text):
    return None if text.strip().lower() in ("", "none") else int(text)


def _choice(*options):
    def parse(text):
        value = text.strip()
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {value!r}")
        return value
    return parse


MODELS = ("smib", "multimachine", "scalar-linear")

# key -> (parser, default)
SCHEMA = {
    "model": (_choice(*MODELS), "smib"),
    "model.case": (str, "three_machine"),
    "model.events": (_bool, True),
    # SMIB parameters
    "model.h": (float, 3.0),
    "model.d": (float, 0.0),
    "model.xd_prime": (float, 0.3),
    "model.v_inf": (float, 1.0),
    "model.v_gen": (float, 1.0),
    "model.x12": (float, 0.5),
    "model.x13": (float, 0.3),
    "model.x23": (float, 0.2),
    "model.p_load": (float, 0.8),
    "model.q_load": (float, 0.2),
    "model.p_gen": (float, 0.9),
    "model.fault_on": (float, 0.5),
    "model.fault_off": (float, 0.6),
    "model.fault_reactance": (float, 1e-4),
    # scalar linear parameters
    "model.a": (float, -1.0),
    "model.b": (float, 0.5),
    "model.c": (float, 2.0),
    "model.x0": (float, 1.0),
    "solver.scheme": (_choice(*(k.value for k in SchemeKind)), SchemeKind.PREDICT.value),
    "solver.corrector_iterations": (_optional_int, None),
    "solver.check": (lambda s: None if s.strip().lower() == "auto" else _bool(s), None),
    "solver.check_reference": (_choice("estimate", "previous"), "estimate"),
    "newton.tol_residual": (float, 1e-8),
    "newton.tol_step": (float, 1e-10),
    "newton.max_iter": (int, 20),
    "controller.rtol": (float, 1e-6),
    "controller.atol": (float, 1e-8),
    "controller.k_i": (_optional_float, None),
    "controller.k_p": (_optional_float, None),
    "controller.safety": (float, 0.9),
    "controller.fac_min": (float, 0.5),
    "controller.fac_max": (float, 2.0),
    "controller.h_min": (float, 1e-7),
    "controller.h_max": (float, 0.1),
    "check.profile": (_choice(*EPSILON_PROFILES), "loose"),
    "check.epsilon": (_optional_float, None),
    "check.max_recorrections": (int, 3),
    "run.t_end": (float, 10.0),
    "run.h_init": (float, 1e-3),
    "run.fixed_step": (_optional_float, None),
    "output.dir": (str, "out"),
    "seed": (int, 0),  # reserved; no solver consumes randomness
}


class ScenarioConfig:
    """Validated scenario settings; read values with ``cfg["controller.rtol"]``."""

    def __init__(self, values=None):
        self._values = {k: default for k, (_, default) in SCHEMA.items()}
        for key, value in (values or {}).items():
            self.set(key, value)

    def set(self, key, value, line=None):
        where = f" (line {line})" if line is not None else ""
        if key not in SCHEMA:
            raise ConfigError(f"unknown key {key!r}{where}")
        parser = SCHEMA[key][0]
        if isinstance(value, str) or parser is str:
            try:
                value = parser(str(value))
            except ValueError as exc:
                raise ConfigError(f"bad value for {key!r}{where}: {exc}") from None
        self._values[key] = value

    def __getitem__(self, key):
        return self._values[key]

    def as_dict(self):
        return dict(self._values)

    # ------------------------------------------------------------------

    def epsilon(self):
        eps = self["check.epsilon"]
        return EPSILON_PROFILES[self["check.profile"]] if eps is None else eps

    def solver_scheme(self):
        try:
            return SolverScheme(
                kind=self["solver.scheme"],
                corrector_iterations=self["solver.corrector_iterations"],
                newton=NewtonConfig(self["newton.tol_residual"], self["newton.tol_step"],
                                    self["newton.max_iter"]),
                check=AlgebraicCheck(self.epsilon(), self["check.max_recorrections"]),
                use_check=self["solver.check"],
                check_reference=self["solver.check_reference"],
            )
        except ValueError as exc:
            raise ConfigError(f"solver settings: {exc}") from None

    def controller(self):
        kwargs = {k: self[f"controller.{k}"] for k in
                  ("rtol", "atol", "safety", "fac_min", "fac_max", "h_min", "h_max")}
        for gain in ("k_i", "k_p"):
            if self[f"controller.{gain}"] is not None:
                kwargs[gain] = self[f"controller.{gain}"]
        try:
            return PiController(**kwargs)
        except ValueError as exc:
            raise ConfigError(f"controller settings: {exc}") from None

    def validate(self):
        """Build every derived object once so errors surface before a run."""
        self.solver_scheme()
        self.controller()
        if self["run.t_end"] < 0:
            raise ConfigError("run.t_end must be >= 0")
        if not self["run.h_init"] > 0:
            raise ConfigError("run.h_init must be positive")
        fixed = self["run.fixed_step"]
        if fixed is not None and not fixed > 0:
            raise ConfigError("run.fixed_step must be positive")
        return self


def parse_config(text):
    cfg = ScenarioConfig()
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        key = key.strip()
        if not sep or not key:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw.strip()!r}")
        if key in seen:
            raise ConfigError(f"duplicate key {key!r} (line {lineno})")
        seen.add(key)
        cfg.set(key, value.strip(), line=lineno)
    return cfg


def load_config(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise OSError(f"cannot read config {path}: {exc.strerror or exc}") from exc
    return parse_config(text)
