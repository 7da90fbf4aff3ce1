"""Command-line front end: ``simulate``, ``check``, ``label``, ``report``.

Exit codes: 0 success (for ``check``: everything holds), 1 a property or the
NFR summary failed, 2 invalid configuration or input, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .checker import quantize_for, run_check, summary_table
from .config import load_config
from .exceptions import ConfigurationError, InputError
from .properties import label_eventually_always
from .sim.scenario import load_scenario, scenario_from_dict
from .signal_model import error_signal
from .traceio import read_csv, read_quantized, write_csv

log = logging.getLogger("ctrlprops")

EXIT_OK, EXIT_FAIL, EXIT_INVALID, EXIT_IO = 0, 1, 2, 3


def _trace_files(paths) -> list[Path]:
    files = []
    for p in map(Path, paths):
        if p.is_dir():
            found = sorted(list(p.glob("*.csv")) + list(p.glob("*.json")))
            if not found:
                raise InputError(f"{p}: directory contains no .csv or .json traces")
            files.extend(found)
        elif p.exists():
            files.append(p)
        else:
            raise FileNotFoundError(f"trace file not found: {p}")
    return files


def _load_traces(config, paths):
    named = []
    for path in _trace_files(paths):
        if path.suffix == ".json":
            trace = read_quantized(path)
        else:
            trace = quantize_for(config, read_csv(path))
        named.append((str(path), trace))
    return named


def cmd_simulate(args) -> int:
    if args.scenario:
        scenario = load_scenario(args.scenario)
    elif args.config:
        config = load_config(args.config)
        if not config.scenario:
            raise ConfigurationError(f"{args.config}: no 'scenario' block")
        scenario = scenario_from_dict(config.scenario)
    else:
        raise ConfigurationError("simulate needs --scenario or --config")
    if args.runs < 1:
        raise ConfigurationError("--runs must be >= 1")
    seed = scenario.seed if args.seed is None else args.seed
    out = Path(args.out)
    single_file = args.runs == 1 and out.suffix == ".csv"
    if single_file:
        out.parent.mkdir(parents=True, exist_ok=True)
    else:
        out.mkdir(parents=True, exist_ok=True)
    for i in range(args.runs):
        run = scenario.with_seed(seed + i)
        path = out if single_file else out / f"{scenario.name}_seed{seed + i}.csv"
        write_csv(run.run(), path)
        print(path)
    return EXIT_OK


def cmd_check(args) -> int:
    config = load_config(args.config)
    named = _load_traces(config, args.trace)
    report = run_check(named, config)
    text = json.dumps(report, indent=1)
    if args.out:
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    if args.format == "table":
        print(summary_table(report))
    elif not args.out:
        print(text)
    else:
        print("ALL HOLD" if report["all_hold"] else "FAILED: " + ", ".join(report["failures"]))
    return EXIT_OK if report["all_hold"] else EXIT_FAIL


def cmd_label(args) -> int:
    config = load_config(args.config)
    if args.property:
        block = config.properties.get(args.property)
        if block is None or "epsilon" not in block.params:
            raise ConfigurationError(f"no trace-level property {args.property!r} in {args.config}")
        variables, setpoints, eps = block.variables, block.params["setpoint"], block.params["epsilon"]
    else:
        if args.variable is None or args.setpoint is None or args.epsilon is None:
            raise ConfigurationError("label needs --property or --variable/--setpoint/--epsilon")
        variables, setpoints, eps = [args.variable], [args.setpoint], args.epsilon
    (name, trace), = _load_traces(config, [args.trace])
    labels = label_eventually_always(trace, variables, setpoints, eps)
    err = error_signal(trace, variables, setpoints)
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        writer = csv.writer(fh)
        writer.writerow(["t", "error", "label"])
        for t, e, lab in zip(trace.times, err, labels):
            writer.writerow([repr(float(t)), repr(float(e)), int(lab)])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


REPORT_COLUMNS = ["t", "value", "setpoint", "band_lo", "band_hi", "error", "epsilon", "label",
                  "reward", "cumulative_reward", "status"]


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-_." else "_" for c in text)


def cmd_report(args) -> int:
    path = Path(args.verdict)
    try:
        report = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}:{exc.lineno}: malformed verdict JSON: {exc.msg}") from None
    if not isinstance(report, dict) or "results" not in report:
        raise InputError(f"{path}: not a verdict report (no 'results')")
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for result in report["results"]:
        series = result.get("series")
        if not series:
            continue
        target = out / f"{_slug(Path(result['trace']).stem)}__{_slug(result['property'])}.csv"
        eps = series["epsilon"]
        setpoint = series.get("setpoint")
        bounded = series.get("bounded", True)
        with target.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(REPORT_COLUMNS)
            for k, t in enumerate(series["t"]):
                value = series["value"][k] if "value" in series else ""
                lo = setpoint - eps if setpoint is not None else ""
                hi = setpoint + eps if setpoint is not None else ""
                reward = series["reward"][k] if "reward" in series else ""
                cumulative = series["cumulative_reward"][k] if "cumulative_reward" in series else ""
                status = "" if "reward" not in series else ("bounded" if bounded else "unbounded")
                writer.writerow([t, value, "" if setpoint is None else setpoint, lo, hi,
                                 series["error"][k], eps, int(series["label"][k]), reward,
                                 cumulative, status])
        print(target)
    if report.get("aggregates"):
        target = out / "aggregates.csv"
        with target.open("w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["property", "kind", "of", "holds", "value"])
            for a in report["aggregates"]:
                writer.writerow([a["property"], a["kind"], a["of"], a["holds"], a["value"]])
        print(target)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ctrlprops", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run a brownout scenario and write raw trace CSV(s)")
    p.add_argument("--scenario", help="built-in scenario name or scenario YAML path")
    p.add_argument("--config", help="configuration file with a 'scenario' block")
    p.add_argument("--seed", type=int, help="base seed (run i uses seed + i)")
    p.add_argument("--runs", type=int, default=1)
    p.add_argument("--out", default="traces", help="output .csv file (single run) or directory")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("check", help="evaluate properties and NFRs on trace(s)")
    p.add_argument("--config", required=True)
    p.add_argument("--trace", required=True, nargs="+", help="trace CSV/JSON files or directories")
    p.add_argument("--out", help="write the verdict JSON here")
    p.add_argument("--format", choices=("json", "table"), default="json")
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("label", help="write eventually-always labels of one trace")
    p.add_argument("--config", required=True)
    p.add_argument("--trace", required=True)
    p.add_argument("--property", help="take variable/setpoint/epsilon from this property")
    p.add_argument("--variable")
    p.add_argument("--setpoint", type=float)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--out", help="CSV output (default: stdout)")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("report", help="turn a verdict JSON into plot-data CSVs")
    p.add_argument("verdict", help="verdict JSON written by 'check --out'")
    p.add_argument("--out", default="report", help="output directory")
    p.set_defaults(func=cmd_report)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, InputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
