"""Aggregate response-time model of a brownout web tier.

Each request costs ``w(d) = w_m + d * w_o`` seconds of work (mandatory plus
optional content at dimmer ``d``). With arrival rate ``lam`` spread
round-robin over ``s`` servers, utilization is ``u = lam * w(d) / s`` and the
mean response time follows the single-queue law ``r = w(d) / (1 - u)``,
saturating at ``r_max`` once ``u >= u_cap``. This is a model choice, not a
claim about the real application.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from ..exceptions import ConfigurationError


@dataclass(frozen=True)
class PlantParams:
    work_mandatory: float = 0.1
    work_optional: float = 0.15
    u_cap: float = 0.99
    r_max: float = 25.0

    def __post_init__(self):
        if self.work_mandatory <= 0 or self.work_optional < 0:
            raise ConfigurationError("per-request work must be positive")
        if not 0 < self.u_cap < 1:
            raise ConfigurationError(f"u_cap must be in (0, 1), got {self.u_cap}")
        if self.r_max <= 0:
            raise ConfigurationError("r_max must be positive")


@dataclass(frozen=True)
class PlantState:
    """Plant state after one step.

    ``d`` is the dimmer setting held by the actuator and ``d_applied`` the value
    the servers actually use (setting plus load disturbance). ``pending`` lists
    the remaining provisioning steps of each server being added. ``r`` is the
    plant output and ``r_measured`` what the monitor observes.
    """

    lam: float
    s: int
    d: float
    r: float
    pending: tuple[int, ...] = ()
    d_applied: float | None = None
    r_measured: float | None = None

    def __post_init__(self):
        if self.s < 1:
            raise ConfigurationError(f"server count must be >= 1, got {self.s}")
        if not 0 <= self.d <= 1:
            raise ConfigurationError(f"dimmer must be in [0, 1], got {self.d}")
        if any(p <= 0 for p in self.pending):
            raise ConfigurationError("pending latencies must be positive")
        if self.d_applied is None:
            object.__setattr__(self, "d_applied", self.d)
        if self.r_measured is None:
            object.__setattr__(self, "r_measured", self.r)


@dataclass(frozen=True)
class Actuation:
    """Commands issued by a controller for one step."""

    dimmer: float | None = None
    add_servers: int = 0
    remove_servers: int = 0
    add_latency: int = 0


NO_OP = Actuation()


def work(d: float, params: PlantParams) -> float:
    return params.work_mandatory + d * params.work_optional


def response_time(lam: float, s: int, d: float, params: PlantParams) -> float:
    """Mean response time of the utilization law, ``r_max`` when saturated."""
    w = work(d, params)
    u = lam * w / s
    if u >= params.u_cap:
        return params.r_max
    return w / (1 - u)


def plant_step(state: PlantState, lam: float, commands: Actuation = NO_OP,
               params: PlantParams = PlantParams(), load: float = 0.0, output: float = 0.0,
               noise: float = 0.0, max_servers: int | None = None) -> PlantState:
    """Advance the plant by one step.

    Order: matured pending servers come online, then the dimmer is set,
    removals take effect immediately (never below one server) and additions
    are queued with their latency (latency 0 comes online at once). ``load`` is
    added to the dimmer setting, ``output`` to the response time and ``noise``
    to the measurement only.
    """
    if lam < 0:
        warnings.warn(f"negative arrival rate {lam} clamped to 0", stacklevel=2)
        lam = 0.0
    pending = [p - 1 for p in state.pending]
    s = state.s + sum(1 for p in pending if p <= 0)
    pending = [p for p in pending if p > 0]

    d = state.d
    if commands.dimmer is not None:
        d = float(np.clip(commands.dimmer, 0.0, 1.0))
        if d != commands.dimmer:
            warnings.warn(f"dimmer command {commands.dimmer} clamped to {d}", stacklevel=2)
    if commands.remove_servers:
        s = max(1, s - commands.remove_servers)
    for _ in range(commands.add_servers):
        if max_servers is not None and s + len(pending) >= max_servers:
            break
        if commands.add_latency <= 0:
            s += 1
        else:
            pending.append(commands.add_latency)

    d_applied = float(np.clip(d + load, 0.0, 1.0))
    r = max(response_time(lam, s, d_applied, params) + output, 1e-6)
    return PlantState(lam=lam, s=s, d=d, r=r, pending=tuple(pending), d_applied=d_applied,
                      r_measured=max(r + noise, 1e-6))


def initial_state(lam: float, servers: int, dimmer: float, params: PlantParams = PlantParams(),
                  load: float = 0.0, output: float = 0.0, noise: float = 0.0) -> PlantState:
    seed = PlantState(lam=lam, s=servers, d=dimmer, r=1.0)
    # pending is empty, so a no-op step only recomputes r
    return plant_step(seed, lam, NO_OP, params, load, output, noise)
