"""Command-line front end.

Three subcommands: ``run-scenario`` (one preset session, printed report,
optional outcome JSON), ``run-sweep`` (weather/distance grid, CSV artifacts)
and ``grover-table`` (detection curve for a given N, M).

Exit status is 0 whenever the requested experiment ran, regardless of the
security verdict it produced; nonzero is reserved for usage and I/O errors.
Seeds resolve flag first, then config file, then the SKYSHIELD_SEED
environment variable, then built-in defaults.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .experiments import (grover_table_text, run_scenario, run_sweep,
                          scenario_report, session_config_from_dict,
                          sweep_spec_from_dict, write_sweep_outputs)

SEED_ENV_VAR = "SKYSHIELD_SEED"


def _env_seed() -> int | None:
    raw = os.environ.get(SEED_ENV_VAR)
    if raw is None or raw == "":
        return None
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{SEED_ENV_VAR} must be an integer, got {raw!r}")


def _resolve_seed(flag_value: int | None, config_value) -> int | None:
    if flag_value is not None:
        return flag_value
    if config_value is not None:
        return int(config_value)
    return _env_seed()


def _load_config(path: str) -> dict:
    text = Path(path).read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"config {path} is not valid JSON: {exc}")
    if not isinstance(data, dict):
        raise ValueError(f"config {path} must hold a JSON object")
    return data


def _cmd_run_scenario(args: argparse.Namespace) -> int:
    config_data = _load_config(args.config) if args.config else {}
    seed = _resolve_seed(args.seed, config_data.get("seed"))
    base = session_config_from_dict(config_data) if config_data else None
    outcome, path = run_scenario(args.scenario, seed=seed, base_config=base,
                                 out_dir=args.out_dir)
    print(scenario_report(args.scenario, outcome))
    if path is not None:
        print(f"wrote {path}")
    return 0


def _cmd_run_sweep(args: argparse.Namespace) -> int:
    config_data = _load_config(args.config) if args.config else {}
    if args.distances is not None:
        config_data["distances_km"] = args.distances
    if args.weathers is not None:
        config_data["weathers"] = args.weathers
    if args.sessions_per_cell is not None:
        config_data["sessions_per_cell"] = args.sessions_per_cell
    seed_base = _resolve_seed(args.seed, config_data.pop("seed_base", None))
    if seed_base is not None:
        config_data["seed_base"] = seed_base
    spec = sweep_spec_from_dict(config_data)
    result = run_sweep(spec)
    paths = write_sweep_outputs(result, args.out_dir)
    totals = result.summary["totals"]
    print(f"sweep: {totals['sessions']} sessions, "
          f"abort rate {totals['abort_rate']:.3f}, "
          f"auth success rate {totals['auth_success_rate']:.3f}")
    for name in sorted(paths):
        print(f"wrote {paths[name]}")
    return 0


def _cmd_grover_table(args: argparse.Namespace) -> int:
    print(grover_table_text(args.n, args.m))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="skyshield",
        description="Deterministic QKD-over-FSO link simulator")
    sub = parser.add_subparsers(dest="command", required=True)

    p_scen = sub.add_parser("run-scenario",
                            help="run one preset attack scenario")
    p_scen.add_argument("scenario", type=lambda s: s.upper(),
                        choices=["A", "B", "C", "D"],
                        help="A benign, B intercept-resend, C tamper, D both")
    p_scen.add_argument("--seed", type=int, default=None)
    p_scen.add_argument("--config", default=None,
                        help="JSON file of session field overrides")
    p_scen.add_argument("--out-dir", default=None,
                        help="write scenario_<X>.json here")
    p_scen.set_defaults(func=_cmd_run_scenario)

    p_sweep = sub.add_parser("run-sweep",
                             help="run the weather/distance grid")
    p_sweep.add_argument("--seed", type=int, default=None,
                         help="sweep seed base")
    p_sweep.add_argument("--config", default=None,
                         help="JSON file of sweep and session overrides")
    p_sweep.add_argument("--out-dir", default="out")
    p_sweep.add_argument("--sessions-per-cell", type=int, default=None)
    p_sweep.add_argument("--distances", type=float, nargs="+", default=None,
                         metavar="KM")
    p_sweep.add_argument("--weathers", nargs="+", default=None,
                         choices=["clear", "fog", "rain", "snow"])
    p_sweep.set_defaults(func=_cmd_run_sweep)

    p_tab = sub.add_parser("grover-table",
                           help="print the detection curve for N entries, M marked")
    p_tab.add_argument("n", type=int)
    p_tab.add_argument("m", type=int)
    p_tab.set_defaults(func=_cmd_grover_table)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
