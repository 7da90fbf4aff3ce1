import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from ctrlprops import QuantizedTrace, SignalSpec  # noqa: E402


@pytest.fixture
def y_spec():
    return SignalSpec("y", -1.0, 2.0, 0.25)


def make_trace(values, eta=0.25, alpha=-10.0, beta=10.0, tau=1.0, name="y"):
    """Univariate quantized trace from on-grid values."""
    return QuantizedTrace.from_values([SignalSpec(name, alpha, beta, eta)], tau, values)


def make_multi(columns: dict, eta=0.25, alpha=-10.0, beta=10.0, tau=1.0):
    import numpy as np
    specs = [SignalSpec(n, alpha, beta, eta) for n in columns]
    return QuantizedTrace.from_values(specs, tau, np.column_stack(list(columns.values())))
