"""Case-file parser and builder for multi-machine classical-model networks.

Case files are line oriented. ``#`` starts a comment, blank lines are
ignored and ``[name]`` opens a section. Field order per section:

=========  ===============================================================
section    fields
=========  ===============================================================
system     ``key = value`` lines; keys ``name`` and ``freq`` (Hz)
bus        ``id type v_mag p_gen`` with type one of slack, pv, pq
branch     ``id from to r x b``
machine    ``bus H D xd'``
load       ``bus P Q``
event      ``trip <branch> <t_trip> [<t_reconnect>]`` or
           ``fault <bus> <t_on> <t_off> [<reactance>]``
=========  ===============================================================

All quantities are per unit on the system base, except ``H`` (s) and
times (s).
"""

from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from ..errors import MalformedCase
from .network import (Branch, Bus, ClassicalNetwork, Load, Machine, NetworkCase,
                      fault_events, initialize_network, trip_events)

BUNDLED_CASES = ("three_machine",)

_FIELDS = {
    "bus": (4, 4),
    "branch": (6, 6),
    "machine": (4, 4),
    "load": (3, 3),
}


@dataclass
class EventSpec:
    kind: str          # "trip" or "fault"
    target: int        # branch id or bus id
    t_start: float
    t_end: float = None
    value: float = None  # fault reactance


@dataclass
class CaseFile:
    case: NetworkCase
    events: list = field(default_factory=list)


def _number(tok, conv, lineno, what):
    try:
        return conv(tok)
    except ValueError:
        raise MalformedCase(f"bad {what} {tok!r}", lineno) from None


def parse_case(text):
    """Parse case-file text into a :class:`CaseFile`; errors carry line numbers."""
    section = None
    system = {}
    buses, branches, machines, loads, events = [], [], [], [], []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise MalformedCase(f"unterminated section header {line!r}", lineno)
            section = line[1:-1].strip().lower()
            if section not in ("system", "event") and section not in _FIELDS:
                raise MalformedCase(f"unknown section [{section}]", lineno)
            if section in seen:
                raise MalformedCase(f"duplicate section [{section}]", lineno)
            seen.add(section)
            continue
        if section is None:
            raise MalformedCase("data before the first section header", lineno)
        if section == "system":
            key, sep, value = line.partition("=")
            key = key.strip()
            if not sep or key not in ("name", "freq"):
                raise MalformedCase(f"expected 'name = ...' or 'freq = ...', got {line!r}", lineno)
            system[key] = value.strip() if key == "name" else _number(value.strip(), float, lineno, "frequency")
            continue
        tok = line.split()
        if section == "event":
            events.append(_parse_event(tok, lineno))
            continue
        lo, hi = _FIELDS[section]
        if not lo <= len(tok) <= hi:
            raise MalformedCase(f"[{section}] expects {lo} fields, got {len(tok)}", lineno)
        if section == "bus":
            bus = Bus(_number(tok[0], int, lineno, "bus id"), tok[1].lower(),
                      _number(tok[2], float, lineno, "voltage"),
                      _number(tok[3], float, lineno, "generation"))
            if bus.kind not in ("slack", "pv", "pq"):
                raise MalformedCase(f"unknown bus type {tok[1]!r}", lineno)
            buses.append(bus)
        elif section == "branch":
            branches.append(Branch(_number(tok[0], int, lineno, "branch id"),
                                   _number(tok[1], int, lineno, "bus id"),
                                   _number(tok[2], int, lineno, "bus id"),
                                   *(_number(v, float, lineno, "branch value") for v in tok[3:])))
        elif section == "machine":
            machines.append(Machine(_number(tok[0], int, lineno, "bus id"),
                                    *(_number(v, float, lineno, "machine value") for v in tok[1:])))
        else:
            loads.append(Load(_number(tok[0], int, lineno, "bus id"),
                              *(_number(v, float, lineno, "load value") for v in tok[1:])))
    for name in ("bus", "branch", "machine"):
        if name not in seen:
            raise MalformedCase(f"missing [{name}] section")
    case = NetworkCase(buses, branches, machines, loads,
                       freq=system.get("freq", 60.0), name=system.get("name", "case"))
    case.validate()
    return CaseFile(case, events)


def _parse_event(tok, lineno):
    kind = tok[0].lower() if tok else ""
    if kind == "trip":
        if len(tok) not in (3, 4):
            raise MalformedCase("trip expects: trip <branch> <t_trip> [<t_reconnect>]", lineno)
        t_end = _number(tok[3], float, lineno, "time") if len(tok) == 4 else None
        spec = EventSpec("trip", _number(tok[1], int, lineno, "branch id"),
                         _number(tok[2], float, lineno, "time"), t_end)
    elif kind == "fault":
        if len(tok) not in (4, 5):
            raise MalformedCase("fault expects: fault <bus> <t_on> <t_off> [<reactance>]", lineno)
        spec = EventSpec("fault", _number(tok[1], int, lineno, "bus id"),
                         _number(tok[2], float, lineno, "time"),
                         _number(tok[3], float, lineno, "time"),
                         _number(tok[4], float, lineno, "reactance") if len(tok) == 5 else 1e-4)
        if spec.value <= 0:
            raise MalformedCase("fault reactance must be positive", lineno)
    else:
        raise MalformedCase(f"unknown event kind {kind!r}", lineno)
    if spec.t_end is not None and spec.t_end <= spec.t_start:
        raise MalformedCase("event end time must follow its start time", lineno)
    return spec


def load_case(source):
    """Read a case from a path, or a bundled case by name (e.g. ``"three_machine"``)."""
    if isinstance(source, str) and source in BUNDLED_CASES:
        text = resources.files("pcdae.models").joinpath("data", f"{source}.case").read_text()
    else:
        text = Path(source).read_text()
    return parse_case(text)


def _events(casefile, system):
    out = []
    ids = {br.id for br in system.case.branches}
    for spec in casefile.events:
        if spec.kind == "trip":
            if spec.target not in ids:
                raise MalformedCase(f"event trips unknown branch {spec.target}")
            out += trip_events(spec.target, spec.t_start, spec.t_end)
        else:
            if spec.target not in system.bus_index:
                raise MalformedCase(f"event faults unknown bus {spec.target}")
            out += fault_events(spec.target, spec.t_start, spec.t_end, 1.0 / (1j * spec.value))
    return out


def build_multimachine(source="three_machine", with_events=True):
    """Return ``(system, state, events)`` for a case file, case text object or bundled name.

    ``source`` may be a bundled case name, a path, a :class:`CaseFile` or a
    bare :class:`NetworkCase` (no events).
    """
    if isinstance(source, NetworkCase):
        casefile = CaseFile(source, [])
    elif isinstance(source, CaseFile):
        casefile = source
    else:
        casefile = load_case(source)
    system = ClassicalNetwork(casefile.case)
    state = initialize_network(system)
    events = _events(casefile, system) if with_events else []
    system.events = list(events)
    return system, state, events
