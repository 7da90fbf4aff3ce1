"""Threshold/hysteresis brownout controller.

Rules, evaluated on the measured response time ``r``:

1. ``r > T`` and the dimmer above its lower bound: lower the dimmer by one step.
2. ``r > T`` and the dimmer at its lower bound: request a server.
3. ``r < margin * T`` and the dimmer below its upper bound: raise the dimmer.
4. ``r < margin * T`` and the dimmer at its upper bound: remove a server.

:class:`ThresholdController` adds cooldowns on top of :func:`controller_step`.
Any callable ``(measured_r, state, step) -> Actuation`` can replace it in
:func:`~ctrlprops.sim.scenario.run_scenario`.
"""

from __future__ import annotations

from dataclasses import dataclass

from ..exceptions import ConfigurationError
from .plant import NO_OP, Actuation, PlantState


@dataclass(frozen=True)
class ControllerConfig:
    threshold: float = 1.0
    dimmer_step: float = 0.1
    server_latency: int = 5
    margin: float = 0.6
    dimmer_cooldown: int = 0
    add_cooldown: int = 0
    remove_cooldown: int = 10
    min_servers: int = 1
    max_servers: int = 20
    d_min: float = 0.0
    d_max: float = 1.0

    def __post_init__(self):
        if self.threshold <= 0:
            raise ConfigurationError("threshold must be positive")
        if not 0 < self.dimmer_step <= 1:
            raise ConfigurationError("dimmer_step must be in (0, 1]")
        if self.server_latency < 0:
            raise ConfigurationError("server_latency must be >= 0")
        if not 0 < self.margin < 1:
            raise ConfigurationError("margin must be in (0, 1)")
        if min(self.dimmer_cooldown, self.add_cooldown, self.remove_cooldown) < 0:
            raise ConfigurationError("cooldowns must be >= 0")
        if not 1 <= self.min_servers <= self.max_servers:
            raise ConfigurationError("need 1 <= min_servers <= max_servers")
        if not 0 <= self.d_min < self.d_max <= 1:
            raise ConfigurationError("need 0 <= d_min < d_max <= 1")


def _step_dimmer(d: float, delta: float, config: ControllerConfig) -> float:
    # rounding keeps repeated steps on the 1e-9 lattice (0.1 * 3 != 0.3)
    return round(min(config.d_max, max(config.d_min, d + delta)), 9)


def controller_step(measured_r: float, state: PlantState, config: ControllerConfig) -> Actuation:
    """Memoryless rule application (no cooldowns)."""
    T = config.threshold
    if measured_r > T:
        if state.d > config.d_min:
            return Actuation(dimmer=_step_dimmer(state.d, -config.dimmer_step, config))
        if state.s + len(state.pending) < config.max_servers:
            return Actuation(add_servers=1, add_latency=config.server_latency)
    elif measured_r < config.margin * T:
        if state.d < config.d_max:
            return Actuation(dimmer=_step_dimmer(state.d, config.dimmer_step, config))
        if state.s > config.min_servers:
            return Actuation(remove_servers=1)
    return NO_OP


class ThresholdController:
    """:func:`controller_step` with cooldowns.

    A server is never requested while another addition is still pending.
    """

    def __init__(self, config: ControllerConfig = ControllerConfig()):
        self.config = config
        self.reset()

    def reset(self):
        self._last_dimmer = None
        self._last_add = None
        self._last_scale = None

    @staticmethod
    def _cooling(last, step, cooldown):
        return last is not None and step - last < cooldown

    def __call__(self, measured_r: float, state: PlantState, step: int) -> Actuation:
        cfg = self.config
        cmd = controller_step(measured_r, state, cfg)
        if cmd.dimmer is not None:
            if self._cooling(self._last_dimmer, step, cfg.dimmer_cooldown):
                return NO_OP
            self._last_dimmer = step
        elif cmd.add_servers:
            if state.pending or self._cooling(self._last_add, step, cfg.add_cooldown):
                return NO_OP
            self._last_add = self._last_scale = step
        elif cmd.remove_servers:
            if self._cooling(self._last_scale, step, cfg.remove_cooldown):
                return NO_OP
            self._last_scale = step
        return cmd
