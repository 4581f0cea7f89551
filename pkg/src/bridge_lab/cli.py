"""Command line entry points: run, scan, list."""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from bridge_lab.reporting import (
    convergence_scan,
    run_directory,
    run_scenario,
    scan_csv_text,
    write_outputs,
)
from bridge_lab.scenarios import SCENARIO_KINDS, SCENARIO_SUMMARIES, ScenarioConfig

OUT_ENV = "BRIDGE_LAB_OUT"


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="bridge-lab",
        description=(
            "Simulate bridge-like path ensembles from renewal, regenerative, "
            "graph and tessellation constructions, then certify them against "
            "the Brownian bridge laws."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser(
        "run",
        help="run one configured scenario and write its report",
        description=(
            "Config is a flat JSON object.  Common keys: scenario, M "
            "(replicates, >= 500), seed, K (grid size, default 21), alpha "
            "(default 0.01), scale_mode (theoretical|estimated, default per "
            "scenario), delta_corr (default sqrt(5/M)).  Renewal scenarios "
            "take dist (exponential|uniform|deterministic|two-point|gamma|"
            "pareto) with its parameters (rate, low, high, value, p_low, "
            "shape, scale) and a size u or n.  Area scenarios take u, dt "
            "(default 0.01), sigma (default 1), jump_rate (levy only, "
            "default 1) and orientation (ratio|displayed, default ratio).  "
            "digraph takes n, p and variant (cumulative|tail, default "
            "cumulative); voronoi takes x_norm.  regen-inverse adds "
            "mass_rate (default 1)."
        ),
    )
    run.add_argument("--config", required=True, help="path to the JSON config")
    run.add_argument("--workers", type=int, default=1, help="worker processes")
    run.add_argument(
        "--out",
        default=None,
        help=f"output directory (default ${OUT_ENV} or ./out)",
    )
    run.add_argument(
        "--no-plots", action="store_true", help="skip figure rendering"
    )

    scan = sub.add_parser(
        "scan",
        help="rerun one scenario over several sizes and tabulate convergence",
    )
    scan.add_argument("--config", required=True, help="path to the JSON config")
    scan.add_argument(
        "--sizes",
        required=True,
        help="comma-separated size values, at least two (e.g. 100,1000,10000)",
    )
    scan.add_argument("--workers", type=int, default=1, help="worker processes")
    scan.add_argument("--out", default=None, help="output directory")

    lst = sub.add_parser("list", help="list the available scenario kinds")
    lst.add_argument("--json", action="store_true", help="emit a JSON list")
    return parser


def _load_config(path: str) -> ScenarioConfig:
    try:
        raw = json.loads(Path(path).read_text())
    except OSError as exc:
        raise ValueError(f"cannot read config file: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise ValueError(f"config is not valid JSON: {exc}") from exc
    return ScenarioConfig.from_dict(raw)


def _out_base(flag) -> str:
    return flag or os.environ.get(OUT_ENV) or "out"


def _cmd_run(args) -> int:
    config = _load_config(args.config)
    result = run_scenario(config, workers=max(1, args.workers))
    paths = write_outputs(_out_base(args.out), result, plots=not args.no_plots)
    sys.stdout.write(paths["summary"].read_text())
    sys.stdout.write(f"report: {paths['report']}\n")
    return 0 if result.exit_ok else 1


def _cmd_scan(args) -> int:
    config = _load_config(args.config)
    try:
        sizes = [float(tok) for tok in args.sizes.split(",") if tok.strip()]
    except ValueError as exc:
        raise ValueError(f"bad --sizes value: {exc}") from exc
    rows = convergence_scan(config, sizes, workers=max(1, args.workers))
    text = scan_csv_text(rows)
    outdir = run_directory(_out_base(args.out), config)
    outdir.mkdir(parents=True, exist_ok=True)
    path = outdir / "scan.csv"
    path.write_text(text)
    sys.stdout.write(text)
    sys.stdout.write(f"scan table: {path}\n")
    return 0


def _cmd_list(args) -> int:
    if args.json:
        payload = [
            {"kind": kind, "summary": SCENARIO_SUMMARIES[kind]}
            for kind in SCENARIO_KINDS
        ]
        sys.stdout.write(json.dumps(payload, indent=2) + "\n")
    else:
        for kind in SCENARIO_KINDS:
            sys.stdout.write(f"{kind:<18} {SCENARIO_SUMMARIES[kind]}\n")
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {"run": _cmd_run, "scan": _cmd_scan, "list": _cmd_list}
    try:
        return handlers[args.command](args)
    except ValueError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2


if __name__ == "__main__":
    sys.exit(main())
