"""Quantized finite traces of monitored output variables.

A monitored variable ``y`` with range ``[alpha, beta]`` and quantization
step ``eta`` takes values on the bounded grid ``{k * eta : alpha <= k * eta <= beta}``.
Observations are snapped to the nearest grid point, ties going to the
smaller point, and sampled every ``tau`` seconds.

Quantized values are stored as integer grid indices ``k`` so that grid
membership is exact; they are rendered to reals only on output.
"""

from __future__ import annotations

import math
import warnings
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted

from ._validation import as_names, as_setpoints, check_positive, check_trace_variables
from .exceptions import ConfigurationError, InputError, RangeWarning

# Relative slack used when deciding ties and grid bounds in floating point.
_TIE_RTOL = 16 * np.finfo(float).eps


def _slack(q):
    return _TIE_RTOL * np.maximum(1.0, np.abs(q))


@dataclass(frozen=True)
class SignalSpec:
    """Range and quantization step of one monitored variable."""

    name: str
    alpha: float
    beta: float
    eta: float
    unit: str = ""

    def __post_init__(self):
        for attr in ("alpha", "beta", "eta"):
            value = getattr(self, attr)
            try:
                value = float(value)
            except (TypeError, ValueError):
                raise ConfigurationError(f"{self.name}: {attr} must be a real number") from None
            if math.isnan(value) or math.isinf(value):
                raise ConfigurationError(f"{self.name}: {attr} must be finite")
            object.__setattr__(self, attr, value)
        if not self.eta > 0:
            raise ConfigurationError(f"{self.name}: eta must be > 0, got {self.eta}")
        if self.alpha > self.beta:
            raise ConfigurationError(f"{self.name}: alpha={self.alpha} > beta={self.beta}")
        scale = max(self.eta, abs(self.alpha), abs(self.beta))
        if self.beta - self.alpha < self.eta - 1e-9 * scale or self.k_min > self.k_max:
            raise ConfigurationError(
                f"{self.name}: range [{self.alpha}, {self.beta}] is narrower than eta={self.eta}"
            )

    @property
    def k_min(self) -> int:
        a = self.alpha / self.eta
        return int(math.ceil(a - _slack(a)))

    @property
    def k_max(self) -> int:
        b = self.beta / self.eta
        return int(math.floor(b + _slack(b)))

    @property
    def grid(self) -> np.ndarray:
        """All admissible quantized values, ascending."""
        return np.arange(self.k_min, self.k_max + 1) * self.eta

    def to_dict(self) -> dict:
        return {"name": self.name, "alpha": self.alpha, "beta": self.beta,
                "eta": self.eta, "unit": self.unit}

    @classmethod
    def from_dict(cls, data: Mapping, name: str | None = None) -> SignalSpec:
        data = dict(data)
        if name is not None:
            data.setdefault("name", name)
        try:
            return cls(name=data["name"], alpha=data["alpha"], beta=data["beta"],
                       eta=data["eta"], unit=data.get("unit", ""))
        except KeyError as exc:
            raise ConfigurationError(f"signal spec {data.get('name', '?')!r} lacks field {exc}") from None


def quantize_indices(values, spec: SignalSpec) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised quantization to grid indices.

    Returns ``(k, out_of_range)`` where ``k`` is an int64 array and
    ``out_of_range`` flags inputs outside ``[alpha, beta]`` that were clamped.
    """
    y = np.asarray(values, dtype=float)
    if np.isnan(y).any():
        raise InputError(f"{spec.name}: cannot quantize NaN")
    q = y / spec.eta
    k = np.floor(q)
    # exact midpoints stay on the lower grid point
    k = np.where(q - k > 0.5 + _slack(q), k + 1, k)
    k = np.clip(k, spec.k_min, spec.k_max).astype(np.int64)
    # grid end points admitted by the tolerance count as in range
    lo, hi = min(spec.alpha, spec.k_min * spec.eta), max(spec.beta, spec.k_max * spec.eta)
    return k, (y < lo) | (y > hi)


def quantize_value(y: float, spec: SignalSpec) -> float:
    """Snap ``y`` to the nearest grid value of ``spec`` (ties go down).

    Values outside ``[alpha, beta]`` are clamped to the nearest endpoint of the
    grid and a :class:`RangeWarning` is emitted.

    >>> quantize_value(0.125, SignalSpec("y", -1, 2, 0.25))
    0.0
    """
    k, out = quantize_indices(y, spec)
    if out.any():
        warnings.warn(f"{spec.name}: value {y} outside [{spec.alpha}, {spec.beta}], clamped",
                      RangeWarning, stacklevel=2)
    return float(k) * spec.eta


@dataclass(frozen=True)
class RawTrace:
    """Real-valued observations at strictly increasing timestamps (seconds)."""

    variables: tuple[str, ...]
    times: np.ndarray
    samples: np.ndarray

    def __post_init__(self):
        variables = as_names(self.variables)
        if len(set(variables)) != len(variables):
            raise InputError(f"duplicate variable names in {variables}")
        times = np.array(self.times, dtype=float)
        samples = np.array(self.samples, dtype=float)
        if samples.ndim == 1 and len(variables) == 1:
            samples = samples.reshape(-1, 1)
        if times.ndim != 1:
            raise InputError("times must be one-dimensional")
        if samples.ndim != 2 or samples.shape != (times.shape[0], len(variables)):
            raise InputError(
                f"samples have shape {samples.shape}, expected ({times.shape[0]}, {len(variables)})"
            )
        if times.size > 1 and not np.all(np.diff(times) > 0):
            raise InputError("timestamps must be strictly increasing")
        times.setflags(write=False)
        samples.setflags(write=False)
        object.__setattr__(self, "variables", variables)
        object.__setattr__(self, "times", times)
        object.__setattr__(self, "samples", samples)

    def __len__(self) -> int:
        return self.times.shape[0]

    def column(self, name: str) -> np.ndarray:
        check_trace_variables(self, [name])
        return self.samples[:, self.variables.index(name)]


@dataclass(frozen=True, eq=False)
class QuantizedTrace:
    """States sampled every ``tau`` seconds; state ``k`` is wall time ``k * tau``.

    ``indices[k, i]`` is the grid index of variable ``i`` in state ``k``, so the
    stored value is ``indices[k, i] * specs[i].eta``.
    """

    specs: tuple[SignalSpec, ...]
    tau: float
    indices: np.ndarray
    out_of_range: int = field(default=0, compare=False)

    def __post_init__(self):
        specs = tuple(self.specs)
        tau = check_positive(self.tau, "tau")
        idx = np.array(self.indices, dtype=np.int64)
        if idx.ndim == 1 and len(specs) == 1:
            idx = idx.reshape(-1, 1)
        if idx.ndim != 2 or idx.shape[1] != len(specs):
            raise InputError(f"indices have shape {idx.shape}, expected (n, {len(specs)})")
        names = [s.name for s in specs]
        if len(set(names)) != len(names):
            raise InputError(f"duplicate variable names in {names}")
        for i, spec in enumerate(specs):
            col = idx[:, i]
            if col.size and (col.min() < spec.k_min or col.max() > spec.k_max):
                raise InputError(f"{spec.name}: grid index outside [{spec.k_min}, {spec.k_max}]")
        idx.setflags(write=False)
        object.__setattr__(self, "specs", specs)
        object.__setattr__(self, "tau", tau)
        object.__setattr__(self, "indices", idx)

    @classmethod
    def from_values(cls, specs: Sequence[SignalSpec], tau: float, values) -> QuantizedTrace:
        """Build a trace from real values that already lie on the grids (they are re-snapped)."""
        values = np.asarray(values, dtype=float)
        if values.ndim == 1:
            values = values.reshape(-1, 1)
        if values.ndim != 2 or values.shape[1] != len(specs):
            raise InputError(f"values have shape {values.shape}, expected (n, {len(specs)})")
        cols, n_out = [], 0
        for i, spec in enumerate(specs):
            k, out = quantize_indices(values[:, i], spec)
            cols.append(k)
            n_out += int(out.sum())
        idx = np.column_stack(cols) if cols else np.zeros((0, 0), dtype=np.int64)
        return cls(tuple(specs), tau, idx, out_of_range=n_out)

    @property
    def variables(self) -> tuple[str, ...]:
        return tuple(s.name for s in self.specs)

    def __len__(self) -> int:
        return self.indices.shape[0]

    @property
    def times(self) -> np.ndarray:
        return np.arange(len(self)) * self.tau

    def spec(self, name: str) -> SignalSpec:
        check_trace_variables(self, [name])
        return self.specs[self.variables.index(name)]

    def column_indices(self, name: str) -> np.ndarray:
        check_trace_variables(self, [name])
        return self.indices[:, self.variables.index(name)]

    def column(self, name: str) -> np.ndarray:
        return self.column_indices(name) * self.spec(name).eta

    @property
    def values(self) -> np.ndarray:
        etas = np.array([s.eta for s in self.specs])
        return self.indices * etas

    def state(self, k: int) -> dict[str, float]:
        return {name: float(v) for name, v in zip(self.variables, self.values[k])}

    def window(self, start: int, stop: int | None = None) -> QuantizedTrace:
        """Sub-trace of states ``start:stop``, re-based so that ``start`` becomes state 0."""
        return QuantizedTrace(self.specs, self.tau, self.indices[start:stop])

    def __eq__(self, other) -> bool:
        if not isinstance(other, QuantizedTrace):
            return NotImplemented
        return self.compatible_with(other) and np.array_equal(self.indices, other.indices)

    __hash__ = None

    def compatible_with(self, other: QuantizedTrace) -> bool:
        return self.specs == other.specs and self.tau == other.tau

    def to_dict(self) -> dict:
        return {"tau": self.tau, "specs": [s.to_dict() for s in self.specs],
                "states": self.indices.tolist()}

    @classmethod
    def from_dict(cls, data: Mapping) -> QuantizedTrace:
        try:
            specs = tuple(SignalSpec.from_dict(s) for s in data["specs"])
            states = np.asarray(data["states"], dtype=np.int64).reshape(-1, len(specs))
            return cls(specs, data["tau"], states)
        except KeyError as exc:
            raise InputError(f"quantized trace JSON lacks field {exc}") from None


def _resolve_specs(specs, variables: Sequence[str]) -> list[SignalSpec]:
    if isinstance(specs, Mapping):
        lookup = dict(specs)
    else:
        lookup = {s.name: s for s in specs}
    missing = [v for v in variables if v not in lookup]
    if missing:
        raise ConfigurationError(f"no signal spec for variable(s) {missing}")
    return [lookup[v] for v in variables]


def quantize_trace(raw: RawTrace, specs, tau: float, variables: Sequence[str] | None = None,
                   method: str = "hold") -> QuantizedTrace:
    """Time-discretize and quantize a raw trace.

    State ``k`` takes the latest raw sample at or before ``t0 + k * tau``
    (zero-order hold, ``method="hold"``) or linearly interpolates between the
    neighbouring samples (``method="linear"``); ``t0`` is the first timestamp.
    Only ``variables`` (default: every raw variable) are kept.
    """
    tau = check_positive(tau, "tau")
    if len(raw) == 0:
        raise InputError("raw trace is empty")
    if method not in ("hold", "linear"):
        raise ConfigurationError(f"unknown sampling method {method!r}")
    variables = raw.variables if variables is None else as_names(variables)
    check_trace_variables(raw, variables)
    resolved = _resolve_specs(specs, variables)

    t0 = raw.times[0]
    span = raw.times[-1] - t0
    n = int(math.floor(span / tau + _slack(span / tau))) + 1
    grid = t0 + np.arange(n) * tau

    cols, n_out = [], 0
    for name, spec in zip(variables, resolved):
        y = raw.column(name)
        if method == "hold":
            pos = np.searchsorted(raw.times, grid + 1e-9 * tau, side="right") - 1
            sampled = y[pos]
        else:
            sampled = np.interp(grid, raw.times, y)
        k, out = quantize_indices(sampled, spec)
        cols.append(k)
        n_out += int(out.sum())
    if n_out:
        warnings.warn(f"{n_out} sample(s) outside their signal range were clamped",
                      RangeWarning, stacklevel=2)
    return QuantizedTrace(tuple(resolved), tau, np.column_stack(cols), out_of_range=n_out)


def error_signal(trace: QuantizedTrace, variables, setpoints) -> np.ndarray:
    """Per-state norm of the quantized error ``y_q(k) - quant(setpoint)``.

    Absolute value for one variable, Euclidean norm across several.
    """
    names = as_names(variables)
    check_trace_variables(trace, names)
    targets = as_setpoints(setpoints, len(names))
    if len(names) == 1:
        spec = trace.spec(names[0])
        k0, out = quantize_indices(targets[0], spec)
        if out.any():
            warnings.warn(f"{spec.name}: setpoint {targets[0]} outside range, clamped",
                          RangeWarning, stacklevel=2)
        return np.abs(trace.column_indices(names[0]) - int(k0)) * spec.eta
    sq = np.zeros(len(trace))
    for name, target in zip(names, targets):
        spec = trace.spec(name)
        k0, _ = quantize_indices(target, spec)
        sq += ((trace.column_indices(name) - int(k0)) * spec.eta) ** 2
    return np.sqrt(sq)


class Quantizer(TransformerMixin, BaseEstimator):
    """Transformer that quantizes raw observations onto per-variable grids.

    Parameters
    ----------
    specs : sequence of SignalSpec
        One spec per column, in column order.
    tau : float
        Sampling period used when transforming a :class:`RawTrace`.
    method : {"hold", "linear"}
        Time alignment for raw traces.

    ``transform`` accepts either a :class:`RawTrace` (returns a
    :class:`QuantizedTrace`) or a 2-D array with one column per spec (returns
    the quantized real values).
    """

    def __init__(self, specs=(), tau=1.0, method="hold"):
        self.specs = specs
        self.tau = tau
        self.method = method

    def fit(self, X=None, y=None):
        specs = list(self.specs.values()) if isinstance(self.specs, Mapping) else list(self.specs)
        if not specs:
            raise ConfigurationError("Quantizer needs at least one SignalSpec")
        check_positive(self.tau, "tau")
        if self.method not in ("hold", "linear"):
            raise ConfigurationError(f"unknown sampling method {self.method!r}")
        self.specs_ = tuple(specs)
        self.n_features_in_ = len(specs)
        return self

    def transform(self, X):
        check_is_fitted(self, "specs_")
        if isinstance(X, RawTrace):
            return quantize_trace(X, self.specs_, self.tau,
                                  variables=[s.name for s in self.specs_], method=self.method)
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise InputError(f"X has {X.shape[1]} columns, expected {self.n_features_in_}")
        out = np.empty_like(X)
        n_out = 0
        for i, spec in enumerate(self.specs_):
            k, clamped = quantize_indices(X[:, i], spec)
            out[:, i] = k * spec.eta
            n_out += int(clamped.sum())
        if n_out:
            warnings.warn(f"{n_out} value(s) outside their signal range were clamped",
                          RangeWarning, stacklevel=2)
        return out
