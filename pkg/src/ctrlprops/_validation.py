"""Input validation helpers shared by the estimators and functional API."""

from __future__ import annotations

import math
from collections.abc import Sequence

import numpy as np

from .exceptions import ConfigurationError, InputError


def check_positive(value, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a real number, got {value!r}") from None
    if not value > 0 or math.isnan(value):
        raise ConfigurationError(f"{name} must be > 0, got {value}")
    return value


def check_finite(value, name: str) -> float:
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise ConfigurationError(f"{name} must be a real number, got {value!r}") from None
    if not math.isfinite(value):
        raise ConfigurationError(f"{name} must be finite, got {value}")
    return value


def as_names(variables) -> tuple[str, ...]:
    """Normalise a single variable name or a sequence of names to a tuple."""
    if isinstance(variables, str):
        return (variables,)
    names = tuple(variables)
    if not names:
        raise ConfigurationError("at least one variable is required")
    return names


def as_setpoints(setpoints, n: int) -> tuple[float, ...]:
    if np.isscalar(setpoints):
        setpoints = [setpoints] * n
    values = tuple(check_finite(v, "setpoint") for v in setpoints)
    if len(values) != n:
        raise ConfigurationError(f"expected {n} setpoint(s), got {len(values)}")
    return values


def check_trace_variables(trace, variables: Sequence[str]) -> None:
    missing = [v for v in variables if v not in trace.variables]
    if missing:
        raise InputError(f"unknown variable(s) {missing}; trace has {list(trace.variables)}")


def check_nonempty(trace) -> None:
    if len(trace) == 0:
        raise InputError("trace is empty")


def check_labels(labels, n: int) -> np.ndarray:
    labels = np.asarray(labels)
    if labels.ndim != 1 or labels.shape[0] != n:
        raise InputError(f"label vector has shape {labels.shape}, expected ({n},)")
    return labels.astype(bool)
