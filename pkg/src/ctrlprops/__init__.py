"""Control-theoretic properties of self-adaptive systems over quantized traces."""

from .exceptions import ConfigurationError, CtrlPropsError, InputError, RangeWarning
from .nfr import NfrReport, NfrSpec, eval_all, eval_nfr1, eval_nfr2, eval_nfr3
from .properties import (EventuallyAlwaysLabeler, IntegratedError, PropertyVerdict, SettlingTime,
                         StabilityProperty, StabilitySpec, TraceEnsemble, check_stability, ensemble_prob,
                         ensemble_reward, integrated_error, label_eventually_always, settling_time,
                         stability_sweep)
from .rewards import (RewardPair, RewardStructure, eval_state_reward, eval_transition_reward,
                      reach_reward, squared_error_reward, time_reward)
from .signal_model import (QuantizedTrace, Quantizer, RawTrace, SignalSpec, error_signal, quantize_trace,
                           quantize_value)

__version__ = "0.1.0"

__all__ = [
    "ConfigurationError", "CtrlPropsError", "EventuallyAlwaysLabeler", "InputError", "IntegratedError",
    "NfrReport", "NfrSpec", "PropertyVerdict", "QuantizedTrace", "Quantizer", "RangeWarning", "RawTrace",
    "RewardPair", "RewardStructure", "SettlingTime", "SignalSpec", "StabilityProperty", "StabilitySpec",
    "TraceEnsemble", "check_stability", "ensemble_prob", "ensemble_reward", "error_signal", "eval_all",
    "eval_nfr1", "eval_nfr2", "eval_nfr3", "eval_state_reward", "eval_transition_reward",
    "integrated_error", "label_eventually_always", "quantize_trace", "quantize_value", "reach_reward",
    "settling_time", "squared_error_reward", "stability_sweep", "time_reward",
]
