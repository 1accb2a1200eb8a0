"""Batch experiment runner.

    fiokit run <config.json> [--out DIR] [--workers N] [--seed HEX]
    fiokit list-experiments
    fiokit validate <config.json>

Exit codes: 0 all assertions pass; 1 assertion failure; 2 config schema
violation; 3 grid resolution violation; 4 numerical non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import datetime
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import jsonschema

from .experiments import EXPERIMENTS, run_experiment
from .fio import CutoffError
from .grids import ResolutionError

SCHEMA_VERSION = 1

CONFIG_SCHEMA = {
    "type": "object",
    "properties": {
        "schema_version": {"type": "integer", "minimum": 1},
        "experiment": {"enum": list(EXPERIMENTS)},
        "d": {"type": "integer", "minimum": 1},
        "eps": {
            "type": "array",
            "items": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
            "minItems": 1,
        },
        "theta_x": {"type": "array"},
        "theta_y": {"type": "array"},
        "kappa": {
            "type": "object",
            "properties": {"kind": {"enum": ["identity", "linear", "hamiltonian"]}},
            "required": ["kind"],
        },
        "symbol": {
            "type": "object",
            "properties": {
                "kind": {
                    "enum": ["constant", "gaussian", "bump",
                             "polynomial-times-gaussian"]
                }
            },
            "required": ["kind"],
        },
        "grids": {
            "oneOf": [
                {"const": "auto"},
                {"type": "object"},
            ]
        },
        "out": {"type": "string"},
        "tolerances": {"type": "object"},
        "deltas": {"type": "array", "items": {"type": "number"}},
        "bump_radius": {"type": "number", "exclusiveMinimum": 0},
        "count": {"type": "integer", "minimum": 1},
    },
    "required": ["experiment", "d"],
    "additionalProperties": False,
}

_NO_EPS_SPLIT = ("matrix-sqrt", "symplectic-check", "separation-decay")


def load_config(path: str) -> dict:
    with open(path) as f:
        cfg = json.load(f)
    jsonschema.validate(cfg, CONFIG_SCHEMA)
    return cfg


def _merge_results(parts):
    merged = {"experiment": parts[0]["experiment"], "assertions": [], "tables": {}}
    for part in parts:
        merged["assertions"].extend(part["assertions"])
        for tname, rows in part["tables"].items():
            merged["tables"].setdefault(tname, []).extend(rows)
    return merged


def execute(cfg: dict, workers: int = 1, seed: int = 0x5EED) -> dict:
    """Run one experiment config, optionally splitting the eps sweep over
    worker threads (per-eps jobs are independent and deterministic)."""
    eps = cfg.get("eps")
    if workers > 1 and eps and len(eps) > 1 and cfg["experiment"] not in _NO_EPS_SPLIT:
        subcfgs = [dict(cfg, eps=[e]) for e in eps]
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda c: run_experiment(c, seed=seed), subcfgs))
        return _merge_results(parts)
    return run_experiment(cfg, seed=seed)


def write_report(result: dict, outdir: str, cfg: dict, figures: bool = True) -> dict:
    os.makedirs(outdir, exist_ok=True)
    report = {
        "schema_version": SCHEMA_VERSION,
        "experiment": result["experiment"],
        "config": {k: v for k, v in sorted(cfg.items()) if k != "out"},
        "assertions": result["assertions"],
        "passed": all(a["passed"] for a in result["assertions"]),
        "timestamp": datetime.datetime.now(datetime.timezone.utc).isoformat(),
    }
    with open(os.path.join(outdir, "report.json"), "w") as f:
        json.dump(report, f, indent=2, sort_keys=True)
        f.write("\n")
    # one CSV holding every sweep table; first column names the table
    columns = ["table"]
    for tname, rows in result["tables"].items():
        for row in rows:
            for k in row:
                if k not in columns:
                    columns.append(k)
    with open(os.path.join(outdir, "data.csv"), "w", newline="") as f:
        writer = csv.writer(f, quoting=csv.QUOTE_MINIMAL)
        writer.writerow(columns)
        for tname, rows in result["tables"].items():
            for row in rows:
                writer.writerow([tname] + [row.get(k, "") for k in columns[1:]])
    if figures:
        from .plotting import render_report_figures

        report["figures"] = render_report_figures(result, outdir)
    return report


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="fiokit")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run an experiment config")
    p_run.add_argument("config")
    p_run.add_argument("--out", default=None, help="output directory")
    p_run.add_argument("--workers", type=int, default=None)
    p_run.add_argument("--seed", default=None, help="hex seed for randomized checks")
    p_run.add_argument("--no-figures", action="store_true")

    sub.add_parser("list-experiments", help="list known experiment names")

    p_val = sub.add_parser("validate", help="validate a config file")
    p_val.add_argument("config")

    args = parser.parse_args(argv)

    if args.command == "list-experiments":
        for name in EXPERIMENTS:
            print(name)
        return 0

    try:
        cfg = load_config(args.config)
    except (OSError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except jsonschema.ValidationError as exc:
        print(f"config schema violation: {exc.message}", file=sys.stderr)
        return 2

    if args.command == "validate":
        print("ok")
        return 0

    workers = args.workers
    if workers is None:
        workers = int(os.environ.get("FIOKIT_WORKERS", "1"))
    seed = int(args.seed, 16) if args.seed is not None else 0x5EED
    outdir = args.out or cfg.get("out", ".")

    try:
        result = execute(cfg, workers=workers, seed=seed)
    except ResolutionError as exc:
        print(f"resolution rule violated: {exc}", file=sys.stderr)
        return 3
    except CutoffError as exc:
        print(f"numerical non-convergence: {exc}", file=sys.stderr)
        return 4

    report = write_report(result, outdir, cfg, figures=not args.no_figures)
    for a in result["assertions"]:
        status = "PASS" if a["passed"] else "FAIL"
        print(f"{status} {a['name']}: measured {a['measured']:.6g} "
              f"(bound {a['bound']:.6g}, tol {a['tol']:.2g})")
    if report["passed"]:
        print(f"all {len(result['assertions'])} assertions passed")
        return 0
    failed = sum(not a["passed"] for a in result["assertions"])
    print(f"{failed} assertion(s) failed", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
