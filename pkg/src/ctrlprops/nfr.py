"""Verdicts for the RUBiS non-functional requirements.

NFR1 (performance): response time ``r`` stays at or below ``T``. Composed of
stability of ``r`` around ``setpoint_r``, finite (and optionally budgeted)
settling time of ``r``, and a zero linear penalty ``(r > T, r - T)`` before
settling.

NFR2 (optional content): the dimmer ``d`` settles near 1; reported as an
accrued reward, no pass/fail cut.

NFR3 (cost): stability and settling of ``r`` as for NFR1, plus the server
penalty ``(r > T, s^2)`` accrued against the settling labels of ``r``.

Requirements are graded in a strict preference order: once one fails, every
lower-priority requirement is still reported but flagged subordinate.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np

from ._validation import check_positive, check_trace_variables
from .exceptions import ConfigurationError, InputError
from .properties import (PropertyVerdict, StabilitySpec, TraceEnsemble, _as_traces, check_stability,
                         ensemble_prob, ensemble_reward, label_eventually_always)
from .rewards import RewardStructure, first_goal, reach_reward, time_reward

NFR_NAMES = ("NFR1", "NFR2", "NFR3")
NFR2_PRESETS = ("error", "paper-literal")


@dataclass(frozen=True)
class NfrSpec:
    """Thresholds and tolerances for NFR1-NFR3.

    ``setpoint_r`` defaults to ``0.8 * T`` so that transients around the
    setpoint do not automatically breach the threshold.
    """

    T: float
    delta_r: float
    epsilon_r: float
    epsilon_d: float
    setpoint_r: float | None = None
    settling_budget: float = math.inf
    nfr2_preset: str = "error"
    order: tuple[str, ...] = NFR_NAMES
    response: str = "r"
    dimmer: str = "d"
    servers: str = "s"

    def __post_init__(self):
        T = check_positive(self.T, "T")
        object.__setattr__(self, "T", T)
        for name in ("delta_r", "epsilon_r", "epsilon_d", "settling_budget"):
            object.__setattr__(self, name, check_positive(getattr(self, name), name))
        setpoint = 0.8 * T if self.setpoint_r is None else float(self.setpoint_r)
        if setpoint > T:
            raise ConfigurationError(f"setpoint_r={setpoint} exceeds T={T}")
        object.__setattr__(self, "setpoint_r", setpoint)
        if self.nfr2_preset not in NFR2_PRESETS:
            raise ConfigurationError(f"nfr2_preset must be one of {NFR2_PRESETS}")
        order = tuple(self.order)
        if len(set(order)) != len(order) or not set(order) <= set(NFR_NAMES) or not order:
            raise ConfigurationError(f"order must be a permutation of a subset of {NFR_NAMES}")
        object.__setattr__(self, "order", order)

    @classmethod
    def from_dict(cls, data) -> NfrSpec:
        data = dict(data)
        known = {"T", "setpoint_r", "delta_r", "epsilon_r", "epsilon_d", "settling_budget",
                 "nfr2_preset", "order", "response", "dimmer", "servers"}
        unknown = set(data) - known
        if unknown:
            raise ConfigurationError(f"nfr block: unknown keys {sorted(unknown)}")
        if data.get("settling_budget") in (None, "inf"):
            data.pop("settling_budget", None)
        try:
            return cls(**data)
        except TypeError as exc:
            raise ConfigurationError(f"nfr block: {exc}") from None

    def to_dict(self) -> dict:
        out = asdict(self)
        out["order"] = list(self.order)
        if math.isinf(self.settling_budget):
            out["settling_budget"] = "inf"
        return out


def linear_penalty(spec: NfrSpec) -> RewardStructure:
    return RewardStructure("penalty", transition_pairs=[(f"{spec.response} > T", f"{spec.response} - T")])


def server_penalty(spec: NfrSpec) -> RewardStructure:
    return RewardStructure("penalty", transition_pairs=[
        (f"{spec.response} > T", f"{spec.servers} * {spec.servers}")])


def optional_reward(spec: NfrSpec) -> RewardStructure:
    d = spec.dimmer
    expr = d if spec.nfr2_preset == "paper-literal" else f"1 - {d}"
    return RewardStructure("optional", transition_pairs=[("true", expr)])


@dataclass
class NfrVerdict:
    """One requirement's verdict with its contributing property verdicts."""

    name: str
    holds: bool | None
    value: float | None = None
    components: dict[str, PropertyVerdict] = field(default_factory=dict)
    subordinate: bool = False

    def to_dict(self) -> dict:
        value = self.value
        if value is not None and math.isinf(value):
            value = "inf"
        return {"name": self.name, "holds": self.holds, "value": value,
                "subordinate": self.subordinate,
                "components": {k: v.to_dict() for k, v in self.components.items()}}


def _response_components(trace, spec: NfrSpec):
    check_trace_variables(trace, [spec.response])
    stab = check_stability(trace, StabilitySpec(spec.response, spec.setpoint_r,
                                                spec.delta_r, spec.epsilon_r))
    labels = label_eventually_always(trace, spec.response, spec.setpoint_r, spec.epsilon_r)
    ts = reach_reward(trace, time_reward(), labels)
    settle = PropertyVerdict("settling_time", value=ts, witness=first_goal(labels),
                             holds=math.isfinite(ts) and ts <= spec.settling_budget,
                             diagnostics={"horizon": len(trace), "tau": trace.tau,
                                          "budget": spec.to_dict()["settling_budget"]})
    return stab, settle, labels


def eval_nfr1(trace, spec: NfrSpec) -> NfrVerdict:
    stab, settle, labels = _response_components(trace, spec)
    value = reach_reward(trace, linear_penalty(spec), labels, constants={"T": spec.T})
    penalty = PropertyVerdict("penalty", value=value, holds=value <= 0,
                              witness=first_goal(labels))
    holds = bool(stab.holds and settle.holds and penalty.holds)
    return NfrVerdict("NFR1", holds, value,
                      {"stability": stab, "settling_time": settle, "penalty": penalty})


def eval_nfr2(trace, spec: NfrSpec) -> NfrVerdict:
    check_trace_variables(trace, [spec.dimmer])
    d_spec = trace.spec(spec.dimmer)
    if d_spec.alpha < 0 or d_spec.beta > 1:
        raise InputError(f"dimmer {spec.dimmer!r} range [{d_spec.alpha}, {d_spec.beta}] "
                         "is not within [0, 1]")
    labels = label_eventually_always(trace, spec.dimmer, 1.0, spec.epsilon_d)
    value = reach_reward(trace, optional_reward(spec), labels)
    settle = PropertyVerdict("settling_time", value=reach_reward(trace, time_reward(), labels),
                             witness=first_goal(labels))
    optional = PropertyVerdict("optional", value=value, witness=first_goal(labels),
                               diagnostics={"preset": spec.nfr2_preset})
    return NfrVerdict("NFR2", None, value, {"optional": optional, "settling_time": settle})


def eval_nfr3(trace, spec: NfrSpec) -> NfrVerdict:
    check_trace_variables(trace, [spec.response, spec.servers])
    stab, settle, labels = _response_components(trace, spec)
    value = reach_reward(trace, server_penalty(spec), labels, constants={"T": spec.T})
    penalty = PropertyVerdict("server_penalty", value=value, witness=first_goal(labels))
    holds = bool(stab.holds and settle.holds)
    return NfrVerdict("NFR3", holds, value,
                      {"stability": stab, "settling_time": settle, "server_penalty": penalty})


_EVALUATORS = {"NFR1": eval_nfr1, "NFR2": eval_nfr2, "NFR3": eval_nfr3}


@dataclass
class NfrReport:
    """Per-requirement verdicts plus the lexicographic summary.

    ``failed_at`` names the first requirement in preference order that fails;
    ``None`` means the summary holds. For ensembles, ``probabilities`` holds the
    empirical probability of each boolean requirement and of the summary.
    """

    order: tuple[str, ...]
    verdicts: dict[str, NfrVerdict]
    failed_at: str | None
    n_traces: int = 1
    probabilities: dict[str, float] = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.failed_at is None

    def to_dict(self) -> dict:
        return {"order": list(self.order), "holds": self.holds, "failed_at": self.failed_at,
                "n_traces": self.n_traces, "probabilities": self.probabilities,
                "verdicts": {k: v.to_dict() for k, v in self.verdicts.items()}}

    def table(self) -> str:
        rows = [("NFR", "graded", "holds", "value")]
        for name in self.order:
            v = self.verdicts[name]
            holds = "-" if v.holds is None else str(v.holds)
            if name in self.probabilities:
                holds += f" (P={self.probabilities[name]:.3g})"
            value = "-" if v.value is None else ("inf" if math.isinf(v.value) else f"{v.value:.6g}")
            rows.append((name, "subordinate" if v.subordinate else "yes", holds, value))
        widths = [max(len(r[i]) for r in rows) for i in range(4)]
        lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
        summary = "holds" if self.holds else f"fails at {self.failed_at}"
        lines.append(f"summary: {summary}")
        return "\n".join(lines)


def _grade(order, verdicts) -> str | None:
    failed_at = None
    for name in order:
        v = verdicts[name]
        if failed_at is not None:
            v.subordinate = True
        elif v.holds is False:
            failed_at = name
    return failed_at


def eval_all(traces, spec: NfrSpec) -> NfrReport:
    """Evaluate the requirements in preference order on a trace or an ensemble.

    On an ensemble, boolean requirements are reported as probabilities, the
    quantitative values via :func:`ensemble_reward`, and the summary holds only
    if it holds on every trace.
    """
    members = _as_traces(traces)
    if len(members) == 1:
        verdicts = {name: _EVALUATORS[name](members[0], spec) for name in spec.order}
        return NfrReport(spec.order, verdicts, _grade(spec.order, verdicts))

    ensemble = TraceEnsemble(members)
    per_trace = [{name: _EVALUATORS[name](t, spec) for name in spec.order} for t in ensemble]
    summaries = [_grade(spec.order, v) for v in per_trace]
    probabilities, verdicts = {}, {}
    for name in spec.order:
        by_trace = {id(t): v[name] for t, v in zip(ensemble, per_trace)}
        agg = ensemble_reward(ensemble, lambda t: by_trace[id(t)].value, name=name)
        components = {"value": agg}
        holds = None
        if per_trace[0][name].holds is not None:
            prob = ensemble_prob(ensemble, lambda t: by_trace[id(t)].holds, name=name)
            probabilities[name] = prob.value
            components["probability"] = prob
            holds = prob.value == 1.0
        verdicts[name] = NfrVerdict(name, holds, agg.value, components)
    probabilities["summary"] = float(np.mean([s is None for s in summaries]))
    failed = [s for s in summaries if s is not None]
    failed_at = min(failed, key=spec.order.index) if failed else None
    for name in spec.order[spec.order.index(failed_at) + 1:] if failed_at else ():
        verdicts[name].subordinate = True
    return NfrReport(spec.order, verdicts, failed_at, len(members), probabilities)
