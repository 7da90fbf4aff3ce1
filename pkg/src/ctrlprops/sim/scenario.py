"""Closed-loop scenario runs producing raw traces.

One step lasts ``tau`` seconds. At step ``k > 0`` the controller sees the
measurement of step ``k - 1`` and its commands shape sample ``k``; a server
requested at step ``k`` is online from sample ``k + L``. The noise generator
is seeded per run and drawn once per step, so ``(scenario, seed)`` fixes the
trace bit for bit.
"""

from __future__ import annotations

import copy
from collections.abc import Callable, Mapping
from dataclasses import dataclass, field, fields
from importlib import resources
from pathlib import Path

import numpy as np
import yaml

from .._validation import check_positive
from ..exceptions import ConfigurationError
from ..signal_model import RawTrace
from .closed_form import underdamped_step
from .controller import ControllerConfig, ThresholdController
from .plant import NO_OP, PlantParams, initial_state, plant_step

TRACE_COLUMNS = ("r", "d", "s", "lam", "pending", "add")


@dataclass(frozen=True)
class WorkloadProfile:
    """Piecewise-constant arrival rate plus additive rectangular spikes.

    ``segments`` are ``(start_step, rate)`` pairs; ``spikes`` are
    ``(step, magnitude, duration)`` triples.
    """

    segments: tuple[tuple[int, float], ...] = ((0, 5.0),)
    spikes: tuple[tuple[int, float, int], ...] = ()

    def __post_init__(self):
        segments = tuple((int(s), float(r)) for s, r in self.segments)
        spikes = tuple((int(k), float(m), int(n)) for k, m, n in self.spikes)
        if not segments or segments[0][0] != 0:
            raise ConfigurationError("workload needs a segment starting at step 0")
        starts = [s for s, _ in segments]
        if starts != sorted(set(starts)):
            raise ConfigurationError("workload segments must be strictly ordered")
        if any(r < 0 for _, r in segments):
            raise ConfigurationError("arrival rates must be >= 0")
        if any(n < 0 for _, _, n in spikes):
            raise ConfigurationError("spike durations must be >= 0")
        object.__setattr__(self, "segments", segments)
        object.__setattr__(self, "spikes", spikes)

    def rate(self, step: int) -> float:
        rate = 0.0
        for start, r in self.segments:
            if start <= step:
                rate = r
        for k, magnitude, duration in self.spikes:
            if k <= step < k + duration:
                rate += magnitude
        return max(rate, 0.0)


@dataclass(frozen=True)
class DisturbanceProfile:
    """Additive load disturbance (on the dimmer), output disturbance (on ``r``)
    and uniform zero-mean measurement noise of half-width ``noise``."""

    load: float = 0.0
    output: float = 0.0
    noise: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.noise < 0:
            raise ConfigurationError("noise amplitude must be >= 0")


@dataclass(frozen=True)
class Scenario:
    name: str
    workload: WorkloadProfile
    disturbances: DisturbanceProfile = DisturbanceProfile()
    controller: ControllerConfig = ControllerConfig()
    plant: PlantParams = PlantParams()
    horizon: int = 100
    tau: float = 1.0
    initial_servers: int = 2
    initial_dimmer: float = 1.0
    source: dict = field(default_factory=dict, compare=False)

    @property
    def seed(self) -> int:
        return self.disturbances.seed

    def with_seed(self, seed: int) -> Scenario:
        dist = DisturbanceProfile(self.disturbances.load, self.disturbances.output,
                                  self.disturbances.noise, int(seed))
        return Scenario(self.name, self.workload, dist, self.controller, self.plant, self.horizon,
                        self.tau, self.initial_servers, self.initial_dimmer, self.source)

    def run(self, policy: Callable | None = None) -> RawTrace:
        return run_scenario(self.workload, self.disturbances, self.controller, self.horizon,
                            self.tau, plant=self.plant, initial_servers=self.initial_servers,
                            initial_dimmer=self.initial_dimmer, policy=policy)


def run_scenario(workload: WorkloadProfile, disturbances: DisturbanceProfile,
                 controller: ControllerConfig, horizon: int, tau: float,
                 plant: PlantParams = PlantParams(), initial_servers: int = 2,
                 initial_dimmer: float = 1.0, policy: Callable | None = None) -> RawTrace:
    """Simulate ``horizon`` steps; returns columns ``r, d, s, lam, pending, add``.

    ``r`` is the measured response time, ``d`` the applied dimmer, ``pending``
    the number of servers being provisioned and ``add`` the servers requested
    at that step.
    """
    horizon = int(horizon)
    if horizon <= 0:
        raise ConfigurationError("horizon must be > 0")
    tau = check_positive(tau, "tau")
    if not 1 <= initial_servers:
        raise ConfigurationError("initial_servers must be >= 1")
    if policy is None:
        policy = ThresholdController(controller)
    rng = np.random.default_rng(disturbances.seed)
    noise = rng.uniform(-disturbances.noise, disturbances.noise, size=horizon) \
        if disturbances.noise > 0 else np.zeros(horizon)

    rows = np.empty((horizon, len(TRACE_COLUMNS)))
    state = initial_state(workload.rate(0), initial_servers, initial_dimmer, plant,
                          disturbances.load, disturbances.output, noise[0])
    cmd = NO_OP
    for k in range(horizon):
        if k > 0:
            cmd = policy(state.r_measured, state, k)
            state = plant_step(state, workload.rate(k), cmd, plant, disturbances.load,
                               disturbances.output, noise[k], max_servers=controller.max_servers)
        rows[k] = (state.r_measured, state.d_applied, state.s, state.lam, len(state.pending),
                   cmd.add_servers)
    return RawTrace(TRACE_COLUMNS, np.arange(horizon) * tau, rows)


@dataclass(frozen=True)
class StepScenario:
    """Closed-form step response sampled every ``tau`` seconds (no randomness)."""

    name: str
    zeta: float = 0.2
    omega: float = 1.0
    horizon: float = 35.0
    tau: float = 1.0

    @property
    def seed(self) -> int:
        return 0

    def with_seed(self, seed: int) -> StepScenario:
        return self

    def run(self, policy=None) -> RawTrace:
        return underdamped_step(self.zeta, self.omega, self.horizon, self.tau)


def _dataclass_from(cls, data: Mapping | None, defaults: Mapping | None = None):
    merged = {**(defaults or {}), **(data or {})}
    names = {f.name for f in fields(cls)}
    unknown = set(merged) - names
    if unknown:
        raise ConfigurationError(f"{cls.__name__}: unknown keys {sorted(unknown)}")
    try:
        return cls(**merged)
    except TypeError as exc:
        raise ConfigurationError(f"{cls.__name__}: {exc}") from None


def load_defaults() -> dict:
    text = resources.files("ctrlprops").joinpath("data/defaults.yaml").read_text()
    return yaml.safe_load(text)


def builtin_scenarios() -> list[str]:
    folder = resources.files("ctrlprops").joinpath("data/scenarios")
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".yaml"))


def scenario_from_dict(data: Mapping, defaults: Mapping | None = None) -> Scenario | StepScenario:
    if not isinstance(data, Mapping):
        raise ConfigurationError("scenario must be a mapping")
    kind = data.get("kind", "brownout")
    if kind == "step":
        params = {k: v for k, v in data.items() if k != "kind"}
        params.setdefault("name", "step")
        return _dataclass_from(StepScenario, params)
    if kind != "brownout":
        raise ConfigurationError(f"scenario kind must be 'brownout' or 'step', got {kind!r}")
    defaults = load_defaults() if defaults is None else defaults
    data = copy.deepcopy(dict(data))
    known = {"kind", "name", "horizon", "tau", "seed", "workload", "disturbances", "controller",
             "plant", "initial"}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"scenario: unknown keys {sorted(unknown)}")
    workload = data.get("workload") or {}
    try:
        wl = WorkloadProfile(tuple(tuple(s) for s in workload.get("segments", [[0, 5.0]])),
                             tuple(tuple(s) for s in workload.get("spikes", [])))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigurationError):
            raise
        raise ConfigurationError(f"scenario workload: {exc}") from None
    dist = _dataclass_from(DisturbanceProfile, {**(data.get("disturbances") or {}),
                                                "seed": int(data.get("seed", 0))})
    initial = {**defaults.get("initial", {}), **(data.get("initial") or {})}
    return Scenario(
        name=str(data.get("name", "scenario")),
        workload=wl,
        disturbances=dist,
        controller=_dataclass_from(ControllerConfig, data.get("controller"), defaults.get("controller")),
        plant=_dataclass_from(PlantParams, data.get("plant"), defaults.get("plant")),
        horizon=int(data.get("horizon", 100)),
        tau=float(data.get("tau", 1.0)),
        initial_servers=int(initial.get("servers", 2)),
        initial_dimmer=float(initial.get("dimmer", 1.0)),
        source=data,
    )


def load_scenario(name_or_path) -> Scenario:
    """Load a shipped scenario by name or a scenario YAML file by path."""
    path = Path(name_or_path)
    if path.suffix in (".yaml", ".yml", ".json") or path.exists():
        if not path.exists():
            raise FileNotFoundError(f"scenario file not found: {path}")
        data = yaml.safe_load(path.read_text())
        if isinstance(data, Mapping) and "scenario" in data:
            data = data["scenario"]
        return scenario_from_dict(data)
    if str(name_or_path) not in builtin_scenarios():
        raise FileNotFoundError(
            f"scenario file not found: {path} (built-in scenarios: {', '.join(builtin_scenarios())})"
        )
    text = resources.files("ctrlprops").joinpath(f"data/scenarios/{name_or_path}.yaml").read_text()
    return scenario_from_dict(yaml.safe_load(text))
