"""Evaluate a configuration's properties and NFRs on one or more traces."""

from __future__ import annotations

import math

import numpy as np

from . import __version__
from .config import TRACE_KINDS, CheckConfig, jsonable
from .nfr import eval_all
from .properties import (IntegratedError, PropertyVerdict, StabilitySpec, TraceEnsemble, check_stability,
                         ensemble_prob, ensemble_reward, label_eventually_always)
from .rewards import first_goal
from .signal_model import QuantizedTrace, error_signal, quantize_indices, quantize_trace


def quantize_for(config: CheckConfig, raw) -> QuantizedTrace:
    """Quantize the variables of ``raw`` that have a signal spec."""
    variables = [v for v in raw.variables if v in config.specs]
    return quantize_trace(raw, config.specs, config.tau, variables=variables, method=config.sampling)


def _series(config: CheckConfig, name: str, trace: QuantizedTrace, epsilon=None) -> dict:
    block = config.properties[name]
    p = block.params
    names = block.variables
    eps = p["epsilon"] if epsilon is None else epsilon
    err = error_signal(trace, names, p["setpoint"])
    out = {"t": trace.times.tolist(), "error": err.tolist(), "epsilon": eps}
    if len(names) == 1:
        spec = trace.spec(names[0])
        target = float(quantize_indices(p["setpoint"][0], spec)[0]) * spec.eta
        out.update(value=trace.column(names[0]).tolist(), setpoint=target)
    if block.kind == "stability":
        out["label"] = (err < eps).tolist()
        return out
    if block.kind == "integrated_error" and p.get("label_variable"):
        labels = label_eventually_always(trace, p["label_variable"], p["label_setpoint"], eps)
    else:
        labels = label_eventually_always(trace, names, p["setpoint"], eps)
    if block.kind == "settling_time":
        step = np.full(len(trace), trace.tau)
    else:
        est: IntegratedError = config.estimator(name)
        step = est.accrual(trace)
    goal = first_goal(labels)
    if goal is not None:
        step[goal:] = 0.0
    out.update(label=labels.tolist(), reward=step.tolist(), cumulative_reward=np.cumsum(step).tolist(),
               bounded=goal is not None)
    return out


def _evaluate(config: CheckConfig, name: str, trace: QuantizedTrace) -> list[tuple[str, PropertyVerdict, dict]]:
    block = config.properties[name]
    verdict = config.estimator(name).evaluate(trace)
    verdict.property = name
    out = [(name, verdict, _series(config, name, trace))]
    for delta, eps in block.params.get("sweep") or ():
        sub = f"{name}[delta={delta},epsilon={eps}]"
        v = check_stability(trace, StabilitySpec(block.variables, block.params["setpoint"], delta, eps))
        v.property = sub
        out.append((sub, v, _series(config, name, trace, epsilon=float(eps))))
    return out


def run_check(named_traces: list[tuple[str, QuantizedTrace]], config: CheckConfig,
              with_series: bool = True) -> dict:
    """Return the verdict report as a JSON-ready dict.

    ``all_hold`` is true iff every boolean verdict (per-trace stability,
    bounded probabilities) and the NFR summary hold.
    """
    traces = [t for _, t in named_traces]
    ensemble = TraceEnsemble(traces)
    results, failures = [], []
    trace_props = [n for n, b in config.properties.items() if b.kind in TRACE_KINDS]
    for label, trace in named_traces:
        for name in trace_props:
            for sub, verdict, series in _evaluate(config, name, trace):
                record = {"trace": label, "kind": config.properties[name].kind, **verdict.to_dict()}
                record["property"] = sub
                if with_series:
                    record["series"] = series
                results.append(record)
                if verdict.holds is False:
                    failures.append(f"{label}:{sub}")

    aggregates = []
    for name, block in config.properties.items():
        if block.kind in TRACE_KINDS:
            continue
        evaluator = config.estimator(block.params["of"]).evaluate
        if block.kind == "probability":
            verdict = ensemble_prob(ensemble, evaluator, block.params.get("bound"), name=name)
        else:
            verdict = ensemble_reward(ensemble, evaluator, name=name)
        record = {"kind": block.kind, "of": block.params["of"], **verdict.to_dict()}
        aggregates.append(record)
        if verdict.holds is False:
            failures.append(name)

    report = {
        "tool": "ctrlprops",
        "version": __version__,
        "config": jsonable(config.raw),
        "traces": [label for label, _ in named_traces],
        "results": results,
        "aggregates": aggregates,
    }
    if config.nfr is not None:
        nfr = eval_all(ensemble, config.nfr)
        report["nfr"] = nfr.to_dict()
        report["nfr_table"] = nfr.table()
        if not nfr.holds:
            failures.append(f"nfr:{nfr.failed_at}")
    report["failures"] = failures
    report["all_hold"] = not failures
    return jsonable(report)


def summary_table(report: dict) -> str:
    rows = [("trace", "property", "kind", "holds", "value", "vacuous", "witness")]
    for r in report["results"]:
        rows.append((r["trace"], r["property"], r["kind"], _fmt(r["holds"]), _fmt(r["value"]),
                     _fmt(r["vacuous"]), _fmt(r["witness"])))
    for a in report["aggregates"]:
        rows.append(("<ensemble>", a["property"], a["kind"], _fmt(a["holds"]), _fmt(a["value"]), "-", "-"))
    widths = [max(len(r[i]) for r in rows) for i in range(len(rows[0]))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in rows]
    if "nfr_table" in report:
        lines += ["", report["nfr_table"]]
    lines.append("")
    lines.append("ALL HOLD" if report["all_hold"] else "FAILED: " + ", ".join(report["failures"]))
    return "\n".join(lines)


def _fmt(value) -> str:
    if value is None:
        return "-"
    if isinstance(value, float):
        return "inf" if math.isinf(value) else f"{value:.6g}"
    return str(value)
