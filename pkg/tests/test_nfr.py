import math

import numpy as np
import pytest

from ctrlprops import InputError, NfrSpec, QuantizedTrace, SignalSpec, eval_all, eval_nfr1, eval_nfr2, eval_nfr3
from ctrlprops.exceptions import ConfigurationError

SPECS = [SignalSpec("r", 0, 30, 0.05), SignalSpec("d", 0, 1, 0.05), SignalSpec("s", 1, 20, 1)]
SPEC = NfrSpec(T=1.0, delta_r=0.2, epsilon_r=0.2, epsilon_d=0.1)


def trace(r, d=None, s=None):
    n = len(r)
    d = [1.0] * n if d is None else d
    s = [2] * n if s is None else s
    return QuantizedTrace.from_values(SPECS, 1.0, np.column_stack([r, d, s]))


CALM = trace([0.8] * 6)
# starts outside the delta band, so stability holds vacuously
HIGH = trace([1.5, 1.2, 0.8, 0.8], s=[2, 3, 3, 3])
SPIKE = trace([0.8, 1.5, 1.2, 0.9, 0.8, 0.8], d=[1, 0.8, 0.7, 0.8, 0.95, 1], s=[2, 2, 3, 3, 3, 3])


class TestSpec:
    def test_default_setpoint(self):
        assert NfrSpec(T=2.0, delta_r=0.1, epsilon_r=0.1, epsilon_d=0.1).setpoint_r == 1.6

    def test_setpoint_above_threshold(self):
        with pytest.raises(ConfigurationError):
            NfrSpec(T=1.0, delta_r=0.1, epsilon_r=0.1, epsilon_d=0.1, setpoint_r=1.2)

    @pytest.mark.parametrize("bad", [dict(order=("NFR1", "NFR1")), dict(order=("NFR4",)),
                                     dict(nfr2_preset="other"), dict(T=0)])
    def test_invalid(self, bad):
        kw = dict(T=1.0, delta_r=0.2, epsilon_r=0.2, epsilon_d=0.1) | bad
        with pytest.raises(ConfigurationError):
            NfrSpec(**kw)

    def test_round_trip(self):
        assert NfrSpec.from_dict(SPEC.to_dict()) == SPEC

    def test_unknown_key(self):
        with pytest.raises(ConfigurationError):
            NfrSpec.from_dict({"T": 1, "delta_r": 1, "epsilon_r": 1, "epsilon_d": 1, "bogus": 1})


class TestNfr1:
    def test_calm_holds(self):
        v = eval_nfr1(CALM, SPEC)
        assert v.holds and v.value == 0.0

    def test_spike_fails_on_penalty(self):
        v = eval_nfr1(SPIKE, SPEC)
        # settles at state 3 (error 0.1 < 0.2 from then on); penalties before: 0.5 + 0.2
        assert v.components["settling_time"].value == 3.0
        assert v.value == pytest.approx(0.7)
        assert v.holds is False

    def test_settling_budget(self):
        spec = NfrSpec(T=1.0, delta_r=0.2, epsilon_r=0.2, epsilon_d=0.1, settling_budget=1.5)
        slow = trace([0.5, 0.6, 0.7, 0.8])
        assert eval_nfr1(slow, spec).holds is False
        assert eval_nfr1(slow, SPEC).components["settling_time"].value == 2.0

    def test_missing_variable(self):
        qt = QuantizedTrace.from_values([SignalSpec("y", 0, 1, 0.5)], 1.0, [0.0])
        with pytest.raises(InputError):
            eval_nfr1(qt, SPEC)


class TestNfr2:
    def test_error_preset(self):
        v = eval_nfr2(SPIKE, SPEC)
        # d labels settle at state 4 (|d - 1| < 0.1); rewards 1 - d before that
        assert v.holds is None
        assert v.value == pytest.approx(0 + 0.2 + 0.3 + 0.2)

    def test_paper_literal_preset(self):
        spec = NfrSpec(T=1.0, delta_r=0.2, epsilon_r=0.2, epsilon_d=0.1, nfr2_preset="paper-literal")
        assert eval_nfr2(SPIKE, spec).value == pytest.approx(1 + 0.8 + 0.7 + 0.8)

    def test_dimmer_range_checked(self):
        specs = [SignalSpec("r", 0, 30, 0.05), SignalSpec("d", 0, 2, 0.05), SignalSpec("s", 1, 20, 1)]
        qt = QuantizedTrace.from_values(specs, 1.0, [[1, 1, 1]])
        with pytest.raises(InputError):
            eval_nfr2(qt, SPEC)


class TestNfr3:
    def test_server_penalty(self):
        v = eval_nfr3(SPIKE, SPEC)
        # r > T at states 1 and 2 with s = 2 and 3
        assert v.value == 4 + 9
        assert v.holds is False and v.components["stability"].witness == 1

    def test_holds_despite_penalty(self):
        v = eval_nfr3(HIGH, SPEC)
        assert v.holds is True and v.value == 4 + 9

    def test_zero_when_calm(self):
        assert eval_nfr3(CALM, SPEC).value == 0.0


class TestGrading:
    def test_lexicographic(self):
        report = eval_all(SPIKE, SPEC)
        assert report.failed_at == "NFR1" and not report.holds
        assert not report.verdicts["NFR1"].subordinate
        assert report.verdicts["NFR2"].subordinate and report.verdicts["NFR3"].subordinate
        assert "fails at NFR1" in report.table()

    def test_order_respected(self):
        spec = NfrSpec(T=1.0, delta_r=0.2, epsilon_r=0.2, epsilon_d=0.1, order=("NFR3", "NFR2", "NFR1"))
        report = eval_all(HIGH, spec)
        assert report.failed_at == "NFR1"
        assert not any(v.subordinate for v in report.verdicts.values())

    def test_holds(self):
        assert eval_all(CALM, SPEC).holds

    def test_ensemble(self):
        report = eval_all([CALM, SPIKE, CALM], SPEC)
        assert report.n_traces == 3
        assert report.probabilities["NFR1"] == pytest.approx(2 / 3)
        assert report.probabilities["summary"] == pytest.approx(2 / 3)
        assert report.failed_at == "NFR1"
        assert report.verdicts["NFR1"].value == pytest.approx(0.7 / 3)

    def test_ensemble_unsettled_member(self):
        never = trace([2.0] * 6)
        report = eval_all([CALM, never], SPEC)
        assert report.verdicts["NFR1"].value == math.inf

    def test_to_dict_serialisable(self):
        import json
        json.dumps(eval_all([CALM, trace([2.0] * 6)], SPEC).to_dict())


def test_server_penalty_stops_when_r_settles():
    # s keeps changing after r has settled; nothing accrues there
    qt = trace([1.5, 0.8, 0.8, 0.8], s=[2, 5, 9, 1])
    assert eval_nfr3(qt, SPEC).value == 4.0


def test_all_three_graded():
    qt = trace([0.8] * 4, d=[0.25, 1.0, 1.0, 1.0], s=[3] * 4)
    report = eval_all(qt, SPEC)
    assert report.holds and report.failed_at is None
    assert report.verdicts["NFR1"].holds is True
    assert report.verdicts["NFR2"].value == 0.75
    assert report.verdicts["NFR3"].value == 0.0
    assert not any(v.subordinate for v in report.verdicts.values())


@pytest.mark.parametrize("d, expected", [([1.0, 1.0, 1.0], 0.0), ([0.5, 0.75, 1.0], 0.75)])
def test_nfr2_error_preset_examples(d, expected):
    assert eval_nfr2(trace([0.8] * 3, d=d), SPEC).value == expected
