"""Command-line interface.

Exit codes: 0 success (a detected blow-up still counts as a completed run),
2 configuration/parse errors, 3 runtime failures.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .catalog import scenario_catalog
from .config import ConfigError, ScenarioConfig, format_config, parse_config
from .outputs import analytics_csv_rows, write_analytics_csv
from .reports import analyze_config, simulate_config, summarize_run, sweep_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_RUNTIME = 3


def _load_config(path: str) -> ScenarioConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from exc
    return parse_config(text)


def _cmd_analyze(args) -> int:
    cfg = _load_config(args.config)
    report = analyze_config(cfg, args.lambda_max)
    print(report.render())
    if args.csv:
        write_analytics_csv(Path(args.csv), report.points)
    else:
        print()
        print("\n".join(analytics_csv_rows(report.points)))
    return EXIT_OK


def _cmd_simulate(args) -> int:
    cfg = _load_config(args.config)
    report = simulate_config(cfg, Path(args.out))
    print(summarize_run(cfg, report))
    print(f"  outputs in {args.out}")
    return EXIT_OK


def _cmd_sweep(args) -> int:
    cfg = _load_config(args.config)
    try:
        values = [float(tok) for tok in args.values.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--values must be comma-separated numbers, got {args.values!r}")
    rows = sweep_config(cfg, args.axis, values, Path(args.out))
    for row in rows:
        print(",".join("" if v is None else str(v) for v in row))
    return EXIT_OK


def _cmd_catalog(args) -> int:
    catalog = scenario_catalog()
    if args.action == "list":
        for name in catalog:
            print(name)
        return EXIT_OK
    if not args.name:
        raise ConfigError("catalog emit needs a scenario name")
    if args.name not in catalog:
        raise ConfigError(f"unknown scenario {args.name!r}; "
                          f"available: {', '.join(catalog)}")
    sys.stdout.write(format_config(catalog[args.name]))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="chemopattern",
        description="Chemotaxis pattern formation: analytics and simulation")
    sub = parser.add_subparsers(dest="command", required=True)

    p_analyze = sub.add_parser("analyze", help="per-mode bifurcation report")
    p_analyze.add_argument("--config", required=True)
    p_analyze.add_argument("--lambda-max", type=float, default=None)
    p_analyze.add_argument("--csv", default=None, help="also write the table as CSV")
    p_analyze.set_defaults(fn=_cmd_analyze)

    p_sim = sub.add_parser("simulate", help="run a scenario and emit fields")
    p_sim.add_argument("--config", required=True)
    p_sim.add_argument("--out", required=True)
    p_sim.set_defaults(fn=_cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="run a scenario across parameter values")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--axis", required=True, choices=["chi", "d1", "d2", "mu", "L"])
    p_sweep.add_argument("--values", required=True)
    p_sweep.add_argument("--out", required=True)
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_cat = sub.add_parser("catalog", help="list or emit built-in scenarios")
    p_cat.add_argument("action", choices=["list", "emit"])
    p_cat.add_argument("name", nargs="?", default=None)
    p_cat.set_defaults(fn=_cmd_catalog)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.fn(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    raise SystemExit(main())
