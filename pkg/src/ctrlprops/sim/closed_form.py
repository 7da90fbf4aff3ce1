"""Closed-form step response of an underdamped second-order plant.

The transfer function is ``w^2 (1 - s/w) / (s^2 + 2 z w s + w^2)``: an
underdamped pair with a right-half-plane zero at ``s = w``, which produces
the initial undershoot seen in typical adaptation transients. Its unit-step
response is::

    y(t) = 1 - exp(-z w t) * (cos(wd t) + (1 + z) / sqrt(1 - z^2) * sin(wd t))

with ``wd = w sqrt(1 - z^2)``. For ``z = 0.2, w = 1`` this is
``1 - exp(-t/5) (sqrt(6) cos(2 sqrt(6) t / 5) + 3 sin(2 sqrt(6) t / 5)) / sqrt(6)``.
"""

from __future__ import annotations

import math

import numpy as np

from .._validation import check_positive
from ..exceptions import ConfigurationError
from ..signal_model import RawTrace


def _check(zeta, omega):
    zeta = float(zeta)
    if not 0 < zeta < 1:
        raise ConfigurationError(f"damping ratio must be in (0, 1), got {zeta}")
    return zeta, check_positive(omega, "omega")


def underdamped_response(t, zeta: float = 0.2, omega: float = 1.0):
    """Evaluate the step response at time(s) ``t``."""
    zeta, omega = _check(zeta, omega)
    t = np.asarray(t, dtype=float)
    root = math.sqrt(1 - zeta * zeta)
    wd = omega * root
    y = 1 - np.exp(-zeta * omega * t) * (np.cos(wd * t) + (1 + zeta) / root * np.sin(wd * t))
    return y if y.ndim else float(y)


def underdamped_step(zeta: float = 0.2, omega: float = 1.0, horizon: float = 35.0,
                     period: float = 1.0, name: str = "y") -> RawTrace:
    """Sample the step response at ``0, period, 2*period, ...`` up to ``horizon``."""
    zeta, omega = _check(zeta, omega)
    period = check_positive(period, "period")
    horizon = check_positive(horizon, "horizon")
    n = int(math.floor(horizon / period + 1e-9)) + 1
    times = np.arange(n) * period
    return RawTrace((name,), times, underdamped_response(times, zeta, omega).reshape(-1, 1))
