"""Control properties evaluated on quantized finite traces.

* stability: if the initial error is below ``delta`` then the error stays
  below ``epsilon`` in every state of the trace;
* settling time: time reward accrued before the first state from which the
  error stays below ``epsilon`` until the end of the trace;
* integrated error: an arbitrary reward structure accrued over the same
  prefix (squared error, threshold penalties, ...).

``always`` ranges over the remaining finite suffix, so every verdict is
relative to the trace horizon, which is reported in the diagnostics.

Each property has a functional form and an estimator-style class
(``fit``/``predict``/``score``, ``get_params``) that treats one trace as one
sample, so an ensemble of traces is the ``X`` passed to ``predict``.
"""

from __future__ import annotations

import math
from collections.abc import Callable, Iterable, Mapping, Sequence
from dataclasses import asdict, dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._validation import as_names, as_setpoints, check_nonempty, check_positive, check_trace_variables
from .exceptions import ConfigurationError, InputError
from .rewards import (ExtendedReal, RewardStructure, accrued_rewards, first_goal, reach_reward,
                      squared_error_reward, time_reward)
from .signal_model import QuantizedTrace, error_signal


@dataclass(frozen=True)
class StabilitySpec:
    variables: tuple[str, ...]
    setpoints: tuple[float, ...]
    delta: float
    epsilon: float

    def __post_init__(self):
        names = as_names(self.variables)
        object.__setattr__(self, "variables", names)
        object.__setattr__(self, "setpoints", as_setpoints(self.setpoints, len(names)))
        object.__setattr__(self, "delta", check_positive(self.delta, "delta"))
        object.__setattr__(self, "epsilon", check_positive(self.epsilon, "epsilon"))


@dataclass
class PropertyVerdict:
    """Outcome of one property on one trace or ensemble.

    Boolean properties set ``holds``; quantitative ones set ``value`` (which may
    be ``inf``). ``witness`` is the first violating state for failed boolean
    properties and the first goal state for reachability rewards.
    """

    property: str
    holds: bool | None = None
    value: ExtendedReal | None = None
    vacuous: bool = False
    witness: int | None = None
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        if out["value"] is not None and math.isinf(out["value"]):
            out["value"] = "inf"
        return out


class TraceEnsemble(Sequence):
    """Nonempty, ordered collection of dimensionally compatible traces."""

    def __init__(self, traces: Iterable[QuantizedTrace]):
        traces = tuple(traces)
        if not traces:
            raise InputError("ensemble is empty")
        first = traces[0]
        for i, trace in enumerate(traces[1:], start=1):
            if not first.compatible_with(trace):
                raise InputError(f"trace {i} has different specs or tau than trace 0")
        self.traces = traces

    def __getitem__(self, i):
        return self.traces[i]

    def __len__(self):
        return len(self.traces)

    @property
    def tau(self) -> float:
        return self.traces[0].tau

    @property
    def variables(self) -> tuple[str, ...]:
        return self.traces[0].variables


def _as_traces(X) -> tuple[QuantizedTrace, ...]:
    if isinstance(X, QuantizedTrace):
        return (X,)
    if isinstance(X, TraceEnsemble):
        return X.traces
    return TraceEnsemble(X).traces


def check_stability(trace: QuantizedTrace, spec: StabilitySpec) -> PropertyVerdict:
    """Finite-trace check of ``|e(0)| < delta  =>  always |e| < epsilon``."""
    check_nonempty(trace)
    check_trace_variables(trace, spec.variables)
    err = error_signal(trace, spec.variables, spec.setpoints)
    diag = {"horizon": len(trace), "tau": trace.tau, "initial_error": float(err[0]),
            "delta": spec.delta, "epsilon": spec.epsilon}
    if not err[0] < spec.delta:
        diag["note"] = "initial error not below delta; implication holds vacuously"
        return PropertyVerdict("stability", holds=True, vacuous=True, diagnostics=diag)
    bad = np.flatnonzero(~(err < spec.epsilon))
    if bad.size:
        diag["max_error"] = float(err.max())
        return PropertyVerdict("stability", holds=False, witness=int(bad[0]), diagnostics=diag)
    return PropertyVerdict("stability", holds=True, diagnostics=diag)


def stability_sweep(trace: QuantizedTrace, variables, setpoints,
                    pairs: Iterable[tuple[float, float]]) -> list[PropertyVerdict]:
    """Evaluate stability for each ``(delta, epsilon)`` pair."""
    return [check_stability(trace, StabilitySpec(variables, setpoints, d, e)) for d, e in pairs]


def label_eventually_always(trace: QuantizedTrace, variables, setpoints, epsilon: float) -> np.ndarray:
    """Label states from which the error stays below ``epsilon`` to the end of the trace."""
    check_nonempty(trace)
    epsilon = check_positive(epsilon, "epsilon")
    within = error_signal(trace, variables, setpoints) < epsilon
    # backward scan: label(k) = within(k) and label(k+1)
    return np.logical_and.accumulate(within[::-1])[::-1]


def settling_time(trace: QuantizedTrace, variables, setpoints, epsilon: float) -> ExtendedReal:
    """Time accrued before the error enters the ``epsilon`` band for good (``inf`` if never)."""
    labels = label_eventually_always(trace, variables, setpoints, epsilon)
    return reach_reward(trace, time_reward(), labels)


def integrated_error(trace: QuantizedTrace, variables, setpoints, epsilon: float,
                     error_structure: RewardStructure | None = None, scale_by_tau: bool = False,
                     constants: Mapping | None = None, goal_labels=None) -> ExtendedReal:
    """Reward of ``error_structure`` accrued before settling.

    ``error_structure`` defaults to the squared quantized error. With
    ``scale_by_tau`` transition rewards are multiplied by ``tau``, turning the
    accrual into a left Riemann sum of the continuous integral. ``goal_labels``
    overrides the settling labels (used when the reward is over one variable
    and settling over another).
    """
    names = as_names(variables)
    structure = error_structure if error_structure is not None else squared_error_reward()
    if goal_labels is None:
        goal_labels = label_eventually_always(trace, names, setpoints, epsilon)
    err = error_signal(trace, names, setpoints)
    return reach_reward(trace, structure, goal_labels, constants=constants, error=err,
                        scale_by_tau=scale_by_tau)


def _holds(result) -> bool:
    if isinstance(result, PropertyVerdict):
        if result.holds is None:
            raise InputError(f"property {result.property!r} is not boolean")
        return bool(result.holds)
    return bool(result)


def _value(result) -> float:
    if isinstance(result, PropertyVerdict):
        if result.value is None:
            raise InputError(f"property {result.property!r} is not quantitative")
        return float(result.value)
    return float(result)


def ensemble_prob(ensemble, evaluator: Callable, bound: float | None = None,
                  name: str = "probability") -> PropertyVerdict:
    """Empirical probability that ``evaluator`` holds; with ``bound`` also checks ``P <= bound``."""
    traces = _as_traces(ensemble)
    outcomes = [_holds(evaluator(t)) for t in traces]
    p = sum(outcomes) / len(outcomes)
    diag = {"n": len(outcomes), "satisfied": sum(outcomes)}
    holds = None
    if bound is not None:
        diag["bound"] = float(bound)
        holds = p <= bound
    return PropertyVerdict(name, holds=holds, value=p, diagnostics=diag)


def ensemble_reward(ensemble, evaluator: Callable, name: str = "expected_reward") -> PropertyVerdict:
    """Mean of a quantitative property across traces; ``inf`` when any trace is unbounded.

    Diagnostics always carry the settled (finite) fraction and the mean over
    finite members.
    """
    traces = _as_traces(ensemble)
    values = [_value(evaluator(t)) for t in traces]
    finite = [v for v in values if math.isfinite(v)]
    diag = {"n": len(values), "settled_fraction": len(finite) / len(values),
            "conditional_mean": math.fsum(finite) / len(finite) if finite else None,
            "values": ["inf" if math.isinf(v) else v for v in values]}
    value = math.fsum(values) / len(values) if len(finite) == len(values) else math.inf
    return PropertyVerdict(name, value=value, diagnostics=diag)


class _TraceProperty(BaseEstimator):
    """Shared estimator plumbing: stateless ``fit``, one trace per sample."""

    def fit(self, X=None, y=None):
        self._spec()  # validates parameters
        self.is_fitted_ = True
        return self

    def evaluate(self, trace: QuantizedTrace) -> PropertyVerdict:
        raise NotImplementedError

    def predict(self, X) -> np.ndarray:
        verdicts = [self.evaluate(t) for t in _as_traces(X)]
        if self._boolean:
            return np.array([v.holds for v in verdicts], dtype=bool)
        return np.array([v.value for v in verdicts], dtype=float)


class StabilityProperty(_TraceProperty):
    """Estimator wrapper around :func:`check_stability`; ``score`` is ``P[stby]``."""

    _boolean = True

    def __init__(self, variables="y", setpoints=0.0, delta=1.0, epsilon=1.0):
        self.variables = variables
        self.setpoints = setpoints
        self.delta = delta
        self.epsilon = epsilon

    def _spec(self):
        return StabilitySpec(self.variables, self.setpoints, self.delta, self.epsilon)

    def evaluate(self, trace):
        return check_stability(trace, self._spec())

    def score(self, X, y=None) -> float:
        return float(ensemble_prob(X, self.evaluate).value)


class SettlingTime(_TraceProperty):
    """Estimator wrapper around :func:`settling_time`."""

    _boolean = False

    def __init__(self, variables="y", setpoints=0.0, epsilon=1.0):
        self.variables = variables
        self.setpoints = setpoints
        self.epsilon = epsilon

    def _spec(self):
        names = as_names(self.variables)
        return names, as_setpoints(self.setpoints, len(names)), check_positive(self.epsilon, "epsilon")

    def evaluate(self, trace):
        names, setpoints, eps = self._spec()
        labels = label_eventually_always(trace, names, setpoints, eps)
        value = reach_reward(trace, time_reward(), labels)
        return PropertyVerdict("settling_time", value=value, witness=first_goal(labels),
                               diagnostics={"horizon": len(trace), "tau": trace.tau, "epsilon": eps})


class IntegratedError(_TraceProperty):
    """Estimator wrapper around :func:`integrated_error`.

    ``label_variables``/``label_setpoints`` optionally take the settling labels
    from other variables than the ones whose error feeds ``error``.
    """

    _boolean = False

    def __init__(self, variables="y", setpoints=0.0, epsilon=1.0, structure=None,
                 scale_by_tau=False, constants=None, label_variables=None, label_setpoints=None):
        self.variables = variables
        self.setpoints = setpoints
        self.epsilon = epsilon
        self.structure = structure
        self.scale_by_tau = scale_by_tau
        self.constants = constants
        self.label_variables = label_variables
        self.label_setpoints = label_setpoints

    def _spec(self):
        names = as_names(self.variables)
        setpoints = as_setpoints(self.setpoints, len(names))
        eps = check_positive(self.epsilon, "epsilon")
        if self.structure is not None and not isinstance(self.structure, RewardStructure):
            raise ConfigurationError("structure must be a RewardStructure")
        if self.label_variables is None:
            return names, setpoints, eps, names, setpoints
        label_names = as_names(self.label_variables)
        return names, setpoints, eps, label_names, as_setpoints(self.label_setpoints, len(label_names))

    def evaluate(self, trace):
        names, setpoints, eps, lnames, lsetpoints = self._spec()
        labels = label_eventually_always(trace, lnames, lsetpoints, eps)
        structure = self.structure if self.structure is not None else squared_error_reward()
        value = integrated_error(trace, names, setpoints, eps, structure, self.scale_by_tau,
                                 self.constants, goal_labels=labels)
        return PropertyVerdict("integrated_error", value=value, witness=first_goal(labels),
                               diagnostics={"horizon": len(trace), "tau": trace.tau,
                                            "epsilon": eps, "reward": structure.name,
                                            "scale_by_tau": bool(self.scale_by_tau)})

    def accrual(self, trace) -> np.ndarray:
        """Per-step reward over the whole trace (goal state not applied)."""
        names, setpoints, *_ = self._spec()
        structure = self.structure if self.structure is not None else squared_error_reward()
        return accrued_rewards(trace, structure, self.constants,
                               error_signal(trace, names, setpoints), self.scale_by_tau)


class EventuallyAlwaysLabeler(TransformerMixin, BaseEstimator):
    """Transformer mapping a trace to its eventually-always goal labels."""

    def __init__(self, variables="y", setpoints=0.0, epsilon=1.0):
        self.variables = variables
        self.setpoints = setpoints
        self.epsilon = epsilon

    def fit(self, X=None, y=None):
        names = as_names(self.variables)
        as_setpoints(self.setpoints, len(names))
        check_positive(self.epsilon, "epsilon")
        self.is_fitted_ = True
        return self

    def transform(self, X):
        if isinstance(X, QuantizedTrace):
            return label_eventually_always(X, self.variables, self.setpoints, self.epsilon)
        return [label_eventually_always(t, self.variables, self.setpoints, self.epsilon)
                for t in _as_traces(X)]
