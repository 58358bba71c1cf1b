"""Lightly damped single machine against an infinite bus, with a PQ load bus.

Bus 1 carries the machine, bus 2 is the infinite bus, bus 3 a constant-power
load. The default parameter set has zero damping so post-fault swings never
decay, which is what exposes unstable integration schemes.
"""

from dataclasses import dataclass, field

from .network import (Branch, Bus, ClassicalNetwork, Load, Machine, NetworkCase,
                      fault_events, initialize_network)

# a bolted fault approximated by a 1e-4 pu reactance to ground
DEFAULT_FAULT_ADMITTANCE = -1e4j


@dataclass
class SmibParams:
    h: float = 3.0
    d: float = 0.0
    xd_prime: float = 0.3
    v_inf: float = 1.0
    v_gen: float = 1.0
    x12: float = 0.5
    x13: float = 0.3
    x23: float = 0.2
    p_load: float = 0.8
    q_load: float = 0.2
    p_gen: float = 0.9
    freq: float = 60.0
    fault_bus: int = 3
    fault_on: float = 0.5
    fault_off: float = 0.6
    fault_admittance: complex = DEFAULT_FAULT_ADMITTANCE
    with_events: bool = True

    def validate(self):
        if not self.h > 0:
            raise ValueError("inertia H must be positive")
        for name in ("xd_prime", "x12", "x13", "x23"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.d < 0:
            raise ValueError("damping must be non-negative")


def smib_case(params):
    return NetworkCase(
        buses=[Bus(1, "pv", params.v_gen, params.p_gen),
               Bus(2, "slack", params.v_inf),
               Bus(3, "pq")],
        branches=[Branch(1, 1, 2, 0.0, params.x12),
                  Branch(2, 1, 3, 0.0, params.x13),
                  Branch(3, 2, 3, 0.0, params.x23)],
        machines=[Machine(1, params.h, params.d, params.xd_prime)],
        loads=[Load(3, params.p_load, params.q_load)],
        freq=params.freq,
        name="smib",
    )


def build_smib(params=None):
    """Return ``(system, state, events)`` initialized at the power-flow equilibrium.

    The mechanical power is back-computed from the power flow, so the initial
    state is an exact equilibrium. ``events`` is also attached to
    ``system.events``.
    """
    params = params or SmibParams()
    params.validate()
    system = ClassicalNetwork(smib_case(params))
    state = initialize_network(system)
    events = []
    if params.with_events:
        events = fault_events(params.fault_bus, params.fault_on, params.fault_off,
                              params.fault_admittance)
    system.events = list(events)
    return system, state, events
