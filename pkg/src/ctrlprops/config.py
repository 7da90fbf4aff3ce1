"""Configuration file: signal specs, reward structures, properties, NFRs, scenario.

One YAML (or JSON) file carries everything a check needs, so a verdict is
reproducible from ``(trace, config)``::

    tau: 1.0
    sampling: hold            # or linear
    signals:
      r: {alpha: 0, beta: 30, eta: 0.01, unit: s}
    constants: {T: 1.0}
    rewards:
      penalty:
        transition: [{guard: "r > T", expr: "(r - T) * (r - T)"}]
    properties:
      stby_r:   {kind: stability, variable: r, setpoint: 0.8, delta: 0.2, epsilon: 0.2}
      settle_r: {kind: settling_time, variable: r, setpoint: 0.8, epsilon: 0.2}
      ise_r:    {kind: integrated_error, variable: r, setpoint: 0.8, epsilon: 0.2,
                 reward: penalty, scale_by_tau: false}
      p_stby:   {kind: probability, of: stby_r, bound: 0.5}
      e_settle: {kind: expected_reward, of: settle_r}
    nfr: {T: 1.0, delta_r: 0.2, epsilon_r: 0.2, epsilon_d: 0.05}
    scenario: {...}           # optional, see ctrlprops.sim.scenario
"""

from __future__ import annotations

import math
from collections.abc import Mapping
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import yaml

from ._validation import as_names, as_setpoints, check_positive
from .exceptions import ConfigurationError
from .nfr import NfrSpec
from .properties import IntegratedError, SettlingTime, StabilityProperty
from .rewards import RESERVED_NAMES, RewardStructure, squared_error_reward
from .signal_model import SignalSpec

KINDS = ("stability", "settling_time", "integrated_error", "probability", "expected_reward")
TRACE_KINDS = KINDS[:3]

_KEYS = {
    "stability": {"variable", "setpoint", "delta", "epsilon", "sweep"},
    "settling_time": {"variable", "setpoint", "epsilon"},
    "integrated_error": {"variable", "setpoint", "epsilon", "reward", "scale_by_tau",
                         "label_variable", "label_setpoint"},
    "probability": {"of", "bound"},
    "expected_reward": {"of"},
}


@dataclass(frozen=True)
class PropertyBlock:
    name: str
    kind: str
    params: dict

    @property
    def variables(self) -> tuple[str, ...]:
        return as_names(self.params["variable"])


@dataclass
class CheckConfig:
    specs: dict[str, SignalSpec]
    tau: float = 1.0
    sampling: str = "hold"
    constants: dict[str, float] = field(default_factory=dict)
    rewards: dict[str, RewardStructure] = field(default_factory=dict)
    properties: dict[str, PropertyBlock] = field(default_factory=dict)
    nfr: NfrSpec | None = None
    scenario: dict | None = None
    raw: dict = field(default_factory=dict)

    def estimator(self, name: str):
        """Estimator object for a trace-level property block."""
        block = self.properties[name]
        p = block.params
        if block.kind == "stability":
            return StabilityProperty(block.variables, p["setpoint"], p["delta"], p["epsilon"])
        if block.kind == "settling_time":
            return SettlingTime(block.variables, p["setpoint"], p["epsilon"])
        if block.kind == "integrated_error":
            structure = self.rewards[p["reward"]] if p.get("reward") else squared_error_reward()
            label_vars = p.get("label_variable")
            return IntegratedError(block.variables, p["setpoint"], p["epsilon"], structure,
                                   bool(p.get("scale_by_tau", False)), self.constants,
                                   label_variables=label_vars,
                                   label_setpoints=p.get("label_setpoint"))
        raise ConfigurationError(f"property {name!r} of kind {block.kind!r} is not trace-level")


def _require(block: Mapping, keys, where: str):
    missing = [k for k in keys if k not in block]
    if missing:
        raise ConfigurationError(f"{where}: missing {missing}")


def _parse_property(name: str, block, specs) -> PropertyBlock:
    where = f"property {name!r}"
    if not isinstance(block, Mapping):
        raise ConfigurationError(f"{where}: must be a mapping")
    block = dict(block)
    kind = block.pop("kind", None)
    if kind not in KINDS:
        raise ConfigurationError(f"{where}: kind must be one of {KINDS}, got {kind!r}")
    unknown = set(block) - _KEYS[kind]
    if unknown:
        raise ConfigurationError(f"{where}: unknown keys {sorted(unknown)}")
    if kind in TRACE_KINDS:
        _require(block, ["variable", "setpoint", "epsilon"], where)
        names = as_names(block["variable"])
        block["setpoint"] = list(as_setpoints(block["setpoint"], len(names)))
        block["epsilon"] = check_positive(block["epsilon"], f"{where}: epsilon")
        needed = set(names) | set(as_names(block.get("label_variable") or names))
        missing = sorted(needed - set(specs))
        if missing:
            raise ConfigurationError(f"{where}: no signal spec for {missing}")
        if kind == "stability":
            _require(block, ["delta"], where)
            block["delta"] = check_positive(block["delta"], f"{where}: delta")
            for pair in block.get("sweep") or ():
                if len(pair) != 2:
                    raise ConfigurationError(f"{where}: sweep entries are [delta, epsilon] pairs")
        if block.get("label_variable") is not None:
            lnames = as_names(block["label_variable"])
            if "label_setpoint" not in block:
                raise ConfigurationError(f"{where}: label_variable needs label_setpoint")
            block["label_setpoint"] = list(as_setpoints(block["label_setpoint"], len(lnames)))
    else:
        _require(block, ["of"], where)
        if kind == "probability" and block.get("bound") is not None:
            bound = float(block["bound"])
            if not 0 <= bound <= 1:
                raise ConfigurationError(f"{where}: bound must be in [0, 1]")
            block["bound"] = bound
    return PropertyBlock(name, kind, block)


def parse_config(data: Mapping) -> CheckConfig:
    if not isinstance(data, Mapping):
        raise ConfigurationError("configuration must be a mapping")
    known = {"tau", "sampling", "signals", "constants", "rewards", "properties", "nfr", "scenario"}
    unknown = set(data) - known
    if unknown:
        raise ConfigurationError(f"unknown top-level keys {sorted(unknown)}")
    signals = data.get("signals") or {}
    if not isinstance(signals, Mapping) or not signals:
        raise ConfigurationError("'signals' must map variable names to specs")
    specs = {name: SignalSpec.from_dict(block, name=name) for name, block in signals.items()}

    constants = {}
    for key, value in (data.get("constants") or {}).items():
        if key in RESERVED_NAMES or key in specs:
            raise ConfigurationError(f"constant {key!r} shadows a reserved name or signal")
        constants[key] = float(value)

    rewards = {}
    for name, block in (data.get("rewards") or {}).items():
        structure = RewardStructure.from_dict(name, block or {})
        unbound = structure.names - set(specs) - set(constants) - RESERVED_NAMES
        if unbound:
            raise ConfigurationError(f"reward {name!r} references unknown names {sorted(unbound)}")
        rewards[name] = structure

    properties = {}
    for name, block in (data.get("properties") or {}).items():
        properties[name] = _parse_property(str(name), block, specs)
    for block in properties.values():
        ref = block.params.get("of")
        if ref is not None:
            target = properties.get(ref)
            if target is None:
                raise ConfigurationError(f"property {block.name!r} refers to unknown {ref!r}")
            wanted = ("stability",) if block.kind == "probability" else ("settling_time", "integrated_error")
            if target.kind not in wanted:
                raise ConfigurationError(
                    f"property {block.name!r}: {block.kind} needs a {' or '.join(wanted)} property")
        reward = block.params.get("reward")
        if reward is not None and reward not in rewards:
            raise ConfigurationError(f"property {block.name!r} refers to unknown reward {reward!r}")

    nfr = NfrSpec.from_dict(data["nfr"]) if data.get("nfr") else None
    sampling = data.get("sampling", "hold")
    if sampling not in ("hold", "linear"):
        raise ConfigurationError(f"sampling must be 'hold' or 'linear', got {sampling!r}")
    return CheckConfig(specs=specs, tau=check_positive(data.get("tau", 1.0), "tau"), sampling=sampling,
                       constants=constants, rewards=rewards, properties=properties, nfr=nfr,
                       scenario=data.get("scenario"), raw=dict(data))


def builtin_configs() -> list[str]:
    folder = resources.files("ctrlprops").joinpath("data/configs")
    return sorted(p.name[:-5] for p in folder.iterdir() if p.name.endswith(".yaml"))


def load_config(name_or_path) -> CheckConfig:
    """Load a configuration file by path, or a shipped configuration by name."""
    path = Path(name_or_path)
    if path.exists():
        text = path.read_text()
    elif str(name_or_path) in builtin_configs():
        text = resources.files("ctrlprops").joinpath(f"data/configs/{name_or_path}.yaml").read_text()
    else:
        raise FileNotFoundError(f"configuration file not found: {path}")
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        loc = f":{mark.line + 1}" if mark is not None else ""
        raise ConfigurationError(f"{path}{loc}: {getattr(exc, 'problem', exc)}") from None
    try:
        return parse_config(data)
    except ConfigurationError as exc:
        raise ConfigurationError(f"{path}: {exc}") from None


def jsonable(value):
    """Replace infinities by strings so the structure serialises to strict JSON."""
    if isinstance(value, float) and math.isinf(value):
        return "inf" if value > 0 else "-inf"
    if isinstance(value, Mapping):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return value
