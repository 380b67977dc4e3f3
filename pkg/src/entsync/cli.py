"""Command-line front end: run, sweep, validate, defaults."""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

from . import config, validate
from .errors import ConfigError
from .kernels import BACKEND
from .sim_harness import SweepPointResult, SweepSpec, run_sweep

EXIT_OK = 0
EXIT_CONFIG = 3
EXIT_IO = 4
EXIT_VALIDATION = 5

CSV_HEADER = [
    "axis",
    "value",
    "failure_prob",
    "mean_error_ps",
    "shift_accuracy",
    "matched_mean",
    "err_ci_ps",
    "trials",
    "seed",
]


def _fmt(value) -> str:
    if value is None:
        return ""
    if isinstance(value, int):
        return str(value)
    return repr(float(value))


def _axis_value_out(axis: str, value: float):
    """Axis value in its document unit (seq_duration is stored in us)."""
    if axis == "seq_duration":
        return value * 1e6
    if axis == "grid_size":
        return int(value)
    return value


def _row_cells(row: SweepPointResult) -> list[str]:
    return [
        row.axis,
        _fmt(_axis_value_out(row.axis, row.value)),
        _fmt(row.failure_prob),
        _fmt(None if row.mean_error is None else row.mean_error * 1e12),
        _fmt(row.shift_accuracy),
        _fmt(row.matched_mean),
        _fmt(None if row.err_ci is None else row.err_ci * 1e12),
        str(row.trials),
        str(row.seed),
    ]


def write_results_csv(path, rows: list[SweepPointResult]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(CSV_HEADER)
        for row in rows:
            writer.writerow(_row_cells(row))


def write_summary_json(path, document: dict, rows: list[SweepPointResult]) -> None:
    payload = {
        "seed": rows[0].seed if rows else config.document_seed(document),
        "config": document,
        "results": [
            {
                "axis": row.axis,
                "value": _axis_value_out(row.axis, row.value),
                "failure_prob": row.failure_prob,
                "failure_ci": row.failure_ci,
                "mean_error_ps": None if row.mean_error is None else row.mean_error * 1e12,
                "shift_accuracy": row.shift_accuracy,
                "matched_mean": row.matched_mean,
                "err_ci_ps": None if row.err_ci is None else row.err_ci * 1e12,
                "trials": row.trials,
            }
            for row in rows
        ],
    }
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")


def _emit(out_path: str, document: dict, rows: list[SweepPointResult]) -> None:
    write_results_csv(out_path, rows)
    write_summary_json(str(out_path) + ".json", document, rows)


def _print_rows(rows: list[SweepPointResult]) -> None:
    for row in rows:
        error = "n/a" if row.mean_error is None else f"{row.mean_error * 1e12:.2f} ps"
        print(
            f"{row.axis}={_axis_value_out(row.axis, row.value)}: "
            f"failure_prob={row.failure_prob:.4f}, mean_error={error}, "
            f"matched_mean={row.matched_mean:.1f}, trials={row.trials}"
        )


def _load_document(path: str | None) -> dict:
    if path is None:
        return config.default_document()
    return config.load_document(path)


def _cmd_run(args) -> int:
    document = _load_document(args.config)
    scenario = config.scenario_from_document(document)
    seed = args.seed if args.seed is not None else config.document_seed(document)
    trials = args.trials if args.trials is not None else config.document_trials(document)
    document["seed"] = seed
    document["trials"] = trials
    spec = SweepSpec(
        axis="seq_duration",
        values=(scenario.seq_duration,),
        trials=trials,
        base=scenario,
        master_seed=seed,
    )
    rows = run_sweep(spec, workers=args.workers)
    _emit(args.out, document, rows)
    _print_rows(rows)
    return EXIT_OK


def _cmd_sweep(args) -> int:
    document = config.load_document(args.config)
    if args.seed is not None:
        document["seed"] = args.seed
    spec = config.sweep_from_document(document)
    if spec is None:
        raise ConfigError("sweep: config file has no sweep block")
    rows = run_sweep(spec, workers=args.workers)
    _emit(args.out, document, rows)
    _print_rows(rows)
    return EXIT_OK


def _cmd_validate(_args) -> int:
    checks = validate.run_all()
    for check in checks:
        print(f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}")
    failed = [c.name for c in checks if not c.passed]
    if failed:
        print(f"validation failed: {', '.join(failed)}", file=sys.stderr)
        return EXIT_VALIDATION
    print(f"all {len(checks)} checks passed")
    return EXIT_OK


def _cmd_defaults(_args) -> int:
    print(json.dumps(config.default_document(), indent=2, sort_keys=True))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="entsync",
        description=(
            "Monte Carlo simulator for entanglement-assisted clock synchronization "
            f"over an indoor grid-of-beams optical link (kernel backend: {BACKEND})"
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one trial set and write results")
    run.add_argument("--config", help="scenario config file (defaults when omitted)")
    run.add_argument("--out", required=True, help="output CSV path (JSON sidecar: <out>.json)")
    run.add_argument("--seed", type=int, help="master seed (overrides the config)")
    run.add_argument("--trials", type=int, help="trial count (overrides the config)")
    run.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    run.set_defaults(handler=_cmd_run)

    sweep = sub.add_parser("sweep", help="run the sweep described by the config")
    sweep.add_argument("--config", required=True, help="config file with a sweep block")
    sweep.add_argument("--out", required=True, help="output CSV path (JSON sidecar: <out>.json)")
    sweep.add_argument("--seed", type=int, help="master seed (overrides the config)")
    sweep.add_argument("--workers", type=int, default=1, help="parallel worker processes")
    sweep.set_defaults(handler=_cmd_sweep)

    val = sub.add_parser("validate", help="run the built-in invariant suite")
    val.set_defaults(handler=_cmd_validate)

    defaults = sub.add_parser("defaults", help="print the default configuration")
    defaults.set_defaults(handler=_cmd_defaults)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
