"""Classical-machine power networks in rectangular voltage coordinates.

States per machine: rotor angle (rad) and speed (pu). Algebraic variables per
bus: real and imaginary voltage. Each non-pinned bus contributes a complex
current balance ``I_machine + I_load - (Y V)_k = 0``; a slack bus without a
machine is an infinite bus, pinned to its specified voltage.
"""

import copy
import math
from dataclasses import dataclass, field

import numpy as np

from .. import kernels
from ..core import DaeSystem, Event, SystemState, fd_jacobian
from ..errors import InitializationFailure, MalformedCase, NewtonDivergence, SingularJacobian
from ..nonlinear import NewtonConfig, newton_solve

# below this magnitude constant-power loads become constant impedance
LOAD_VMIN = 0.4


@dataclass
class Bus:
    id: int
    kind: str  # "slack", "pv" or "pq"
    v_mag: float = 1.0
    p_gen: float = 0.0
    v_ang: float = 0.0


@dataclass
class Branch:
    id: int
    frm: int
    to: int
    r: float
    x: float
    b: float = 0.0
    in_service: bool = True


@dataclass
class Machine:
    bus: int
    h: float
    d: float
    xd_prime: float


@dataclass
class Load:
    bus: int
    p: float
    q: float


@dataclass
class NetworkCase:
    buses: list
    branches: list
    machines: list
    loads: list = field(default_factory=list)
    freq: float = 60.0
    name: str = "case"

    def validate(self):
        ids = [b.id for b in self.buses]
        if len(set(ids)) != len(ids):
            raise MalformedCase("duplicate bus id")
        known = set(ids)
        if sum(b.kind == "slack" for b in self.buses) != 1:
            raise MalformedCase("exactly one slack bus required")
        for b in self.buses:
            if b.kind not in ("slack", "pv", "pq"):
                raise MalformedCase(f"bus {b.id}: unknown type {b.kind!r}")
        for br in self.branches:
            if br.frm not in known or br.to not in known:
                raise MalformedCase(f"branch {br.id} references an unknown bus")
            if br.r == 0.0 and br.x == 0.0:
                raise MalformedCase(f"branch {br.id} has zero impedance")
        if len({br.id for br in self.branches}) != len(self.branches):
            raise MalformedCase("duplicate branch id")
        mbuses = [m.bus for m in self.machines]
        if len(set(mbuses)) != len(mbuses):
            raise MalformedCase("at most one machine per bus")
        kinds = {b.id: b.kind for b in self.buses}
        for m in self.machines:
            if m.bus not in known:
                raise MalformedCase(f"machine at unknown bus {m.bus}")
            if kinds[m.bus] == "pq":
                raise MalformedCase(f"machine at PQ bus {m.bus}")
            if not (m.h > 0 and m.xd_prime > 0 and m.d >= 0):
                raise MalformedCase(f"machine at bus {m.bus}: need H > 0, x_d' > 0, D >= 0")
        for ld in self.loads:
            if ld.bus not in known:
                raise MalformedCase(f"load at unknown bus {ld.bus}")
        if not self.machines:
            raise MalformedCase("at least one machine required")


def build_admittance(case, bus_index, shunts):
    """Bus admittance matrix of the in-service branches plus per-bus shunts."""
    nb = len(case.buses)
    y = np.zeros((nb, nb), dtype=complex)
    for br in case.branches:
        if not br.in_service:
            continue
        i = bus_index[br.frm]
        j = bus_index[br.to]
        ys = 1.0 / complex(br.r, br.x)
        ysh = 0.5j * br.b
        y[i, i] += ys + ysh
        y[j, j] += ys + ysh
        y[i, j] -= ys
        y[j, i] -= ys
    y[np.diag_indices(nb)] += shunts
    return y


class ClassicalNetwork(DaeSystem):
    """Multi-machine classical-model DAE built from a :class:`NetworkCase`.

    Parameters mutated by events: ``shunts`` (per-bus complex admittance) and
    ``Branch.in_service``. Call :meth:`rebuild` after changing either; the
    event helpers do it for you.
    """

    def __init__(self, case):
        super().__init__()
        case.validate()
        # events toggle branch status; keep the caller's case untouched
        self.case = case = copy.deepcopy(case)
        self.bus_index = {b.id: i for i, b in enumerate(case.buses)}
        nb = len(case.buses)
        nm = len(case.machines)
        self.n_states = 2 * nm
        self.n_algebraic = 2 * nb
        self.omega_s = 2.0 * math.pi * case.freq
        self.mac_bus = np.array([self.bus_index[m.bus] for m in case.machines], dtype=np.intp)
        self.xd = np.array([m.xd_prime for m in case.machines], dtype=float)
        self.two_h = np.array([2.0 * m.h for m in case.machines], dtype=float)
        self.damping = np.array([m.d for m in case.machines], dtype=float)
        self.emf = np.ones(nm)
        self.pm = np.zeros(nm)
        self.load_p = np.zeros(nb)
        self.load_q = np.zeros(nb)
        for ld in case.loads:
            self.load_p[self.bus_index[ld.bus]] += ld.p
            self.load_q[self.bus_index[ld.bus]] += ld.q
        has_machine = set(self.mac_bus.tolist())
        self.pinned = np.zeros(nb, dtype=np.int8)
        self.vspec = np.zeros(2 * nb)
        for i, b in enumerate(case.buses):
            if b.kind == "slack" and i not in has_machine:
                self.pinned[i] = 1
                self.vspec[2 * i] = b.v_mag * math.cos(b.v_ang)
                self.vspec[2 * i + 1] = b.v_mag * math.sin(b.v_ang)
        self.shunts = np.zeros(nb, dtype=complex)
        self._fx = np.zeros((self.n_states, self.n_states))
        self._fy = np.zeros((self.n_states, self.n_algebraic))
        self._gx = np.zeros((self.n_algebraic, self.n_states))
        self._gy = np.zeros((self.n_algebraic, self.n_algebraic))
        self.variable_names = (
            [f"{q}_gen{case.machines[m].bus}" for m in range(nm) for q in ("delta", "omega")]
            + [f"{q}_bus{b.id}" for b in case.buses for q in ("vre", "vim")])
        self.rebuild()

    # network data -----------------------------------------------------

    def admittance(self):
        return build_admittance(self.case, self.bus_index, self.shunts)

    def rebuild(self):
        ybus = self.admittance()
        self.ybus = ybus
        self.gmat = np.ascontiguousarray(ybus.real)
        self.bmat = np.ascontiguousarray(ybus.imag)

    def set_shunt(self, bus, admittance):
        self.shunts[self.bus_index[bus]] = admittance
        self.rebuild()

    def set_branch_status(self, branch_id, in_service):
        for br in self.case.branches:
            if br.id == branch_id:
                br.in_service = bool(in_service)
                self.rebuild()
                return
        raise KeyError(f"no branch {branch_id}")

    # equations ----------------------------------------------------------

    def f(self, t, x, y):
        return kernels.machine_f(x, y, self.mac_bus, self.emf, self.xd, self.pm,
                                 self.two_h, self.damping, self.omega_s)

    def g(self, t, x, y):
        return kernels.network_g(x, y, self.gmat, self.bmat, self.pinned, self.vspec,
                                 self.load_p, self.load_q, LOAD_VMIN, self.mac_bus,
                                 self.emf, self.xd)

    def _fill_f(self, x, y):
        kernels.machine_jac(x, y, self.mac_bus, self.emf, self.xd, self.two_h,
                            self.damping, self.omega_s, self._fx, self._fy)

    def _fill_g(self, x, y):
        kernels.network_jac(x, y, self.gmat, self.bmat, self.pinned, self.load_p,
                            self.load_q, LOAD_VMIN, self.mac_bus, self.emf, self.xd,
                            self._gx, self._gy)

    def jac_fx(self, t, x, y):
        self._fill_f(x, y)
        return self._fx.copy()

    def jac_fy(self, t, x, y):
        self._fill_f(x, y)
        return self._fy.copy()

    def jac_gx(self, t, x, y):
        self._fill_g(x, y)
        return self._gx.copy()

    def jac_gy(self, t, x, y):
        self._fill_g(x, y)
        return self._gy.copy()

    # helpers --------------------------------------------------------------

    def bus_voltage(self, y, bus):
        k = self.bus_index[bus]
        return complex(y[2 * k], y[2 * k + 1])

    def electrical_power(self, x, y):
        vr = y[2 * self.mac_bus]
        vi = y[2 * self.mac_bus + 1]
        d = x[0::2]
        return self.emf / self.xd * (vr * np.sin(d) - vi * np.cos(d))


def fault_events(bus, t_on, t_off, admittance):
    """Shunt fault at ``bus`` switched on at ``t_on`` and cleared at ``t_off``."""
    return [
        Event(t_on, lambda s: s.set_shunt(bus, admittance), f"fault on bus {bus}"),
        Event(t_off, lambda s: s.set_shunt(bus, 0.0), f"fault cleared bus {bus}"),
    ]


def trip_events(branch_id, t_trip, t_reconnect=None):
    events = [Event(t_trip, lambda s: s.set_branch_status(branch_id, False),
                    f"trip branch {branch_id}")]
    if t_reconnect is not None:
        events.append(Event(t_reconnect, lambda s: s.set_branch_status(branch_id, True),
                            f"reconnect branch {branch_id}"))
    return events


def power_flow(case, ybus=None, cfg=None):
    """Newton power flow in rectangular coordinates; returns complex bus voltages.

    PV buses hold ``p_gen - load`` and ``|V|``; PQ buses hold ``-load``;
    the slack holds its voltage phasor.
    """
    idx = {b.id: i for i, b in enumerate(case.buses)}
    nb = len(case.buses)
    if ybus is None:
        ybus = build_admittance(case, idx, np.zeros(nb, dtype=complex))
    p_net = np.zeros(nb)
    q_net = np.zeros(nb)
    for i, b in enumerate(case.buses):
        p_net[i] = b.p_gen
    for ld in case.loads:
        p_net[idx[ld.bus]] -= ld.p
        q_net[idx[ld.bus]] -= ld.q
    slack = next(i for i, b in enumerate(case.buses) if b.kind == "slack")
    vslack = case.buses[slack].v_mag * np.exp(1j * case.buses[slack].v_ang)
    free = [i for i in range(nb) if i != slack]

    def unpack(z):
        v = np.empty(nb, dtype=complex)
        v[slack] = vslack
        v[free] = z[0::2] + 1j * z[1::2]
        return v

    def residual(z):
        v = unpack(z)
        s = v * np.conj(ybus @ v)
        out = np.empty(2 * len(free))
        for n, i in enumerate(free):
            out[2 * n] = s[i].real - p_net[i]
            if case.buses[i].kind == "pv":
                out[2 * n + 1] = abs(v[i]) ** 2 - case.buses[i].v_mag ** 2
            else:
                out[2 * n + 1] = s[i].imag - q_net[i]
        return out

    def jacobian(z):
        return fd_jacobian(residual, z)

    z0 = np.zeros(2 * len(free))
    for n, i in enumerate(free):
        z0[2 * n] = case.buses[i].v_mag if case.buses[i].kind == "pv" else 1.0
    try:
        z, _ = newton_solve(residual, jacobian, z0,
                            cfg or NewtonConfig(tol_residual=1e-12, tol_step=1e-14, max_iter=50))
    except (NewtonDivergence, SingularJacobian) as exc:
        raise InitializationFailure(f"power flow did not converge: {exc}") from exc
    return unpack(z)


def initialize_network(system, cfg=None):
    """Run the power flow, back-compute machine EMFs, angles and mechanical power.

    Returns a consistent :class:`SystemState` at t = 0 that is an exact
    equilibrium of the classical model.
    """
    case = system.case
    v = power_flow(case, system.ybus, cfg)
    s_inj = v * np.conj(system.ybus @ v)
    nm = len(case.machines)
    x0 = np.zeros(2 * nm)
    for m in range(nm):
        k = system.mac_bus[m]
        s_gen = s_inj[k] + complex(system.load_p[k], system.load_q[k])
        i_gen = np.conj(s_gen / v[k])
        e = v[k] + 1j * system.xd[m] * i_gen
        system.emf[m] = abs(e)
        system.pm[m] = (e * np.conj(i_gen)).real
        x0[2 * m] = np.angle(e)
        x0[2 * m + 1] = 1.0
    y0 = np.empty(2 * len(case.buses))
    y0[0::2] = v.real
    y0[1::2] = v.imag
    return SystemState(0.0, x0, y0)
