"""Batch experiment harness: scenario runs, weather sweeps, CSV artifacts.

The sweep runs a grid of (weather, distance) cells, a fixed number of
sessions per cell, and writes three artifacts into the output directory:

* ``sessions.csv``  one row per session, fixed column order, rows sorted by
  (weather, distance, session id), missing numerics left empty;
* ``cells.csv``     per-cell aggregates;
* ``summary.json``  the sweep parameters and whole-run totals.

Per-session seeds derive from the sweep seed base by position, so results
do not depend on execution order and two runs with the same base produce
byte-identical files.
"""

from __future__ import annotations

import csv
import dataclasses
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .fso_channel import ChannelParams, WeatherCondition, default_weathers
from .grover import GroverReport
from .session import (SessionConfig, SessionOutcome, derive_session_seed,
                      run_session, scenario_preset)

DEFAULT_SEED_BASE = 20250823
DEFAULT_DISTANCES_KM = (1.0, 2.0, 3.0, 4.0, 5.0)
DEFAULT_SESSIONS_PER_CELL = 20

SESSIONS_CSV = "sessions.csv"
CELLS_CSV = "cells.csv"
SUMMARY_JSON = "summary.json"

SESSION_COLUMNS = [
    "weather", "distance_km", "session_id", "seed", "n_photons", "n_received",
    "sifted_len", "qber", "qkd_aborted", "key_len", "sig_ok", "hmac_ok",
    "accepted", "verdict", "grover_p1", "grover_kstar", "within_window",
]

CELL_COLUMNS = [
    "weather", "distance_km", "mean_sifted_len", "mean_qber", "abort_rate",
    "auth_success_rate", "mean_grover_p1",
]


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition for one sweep run."""

    distances_km: tuple[float, ...] = DEFAULT_DISTANCES_KM
    weathers: tuple[WeatherCondition, ...] = None
    sessions_per_cell: int = DEFAULT_SESSIONS_PER_CELL
    seed_base: int = DEFAULT_SEED_BASE
    base_config: SessionConfig = field(default_factory=SessionConfig)

    def __post_init__(self):
        if self.weathers is None:
            object.__setattr__(self, "weathers", tuple(default_weathers()))
        object.__setattr__(self, "distances_km",
                           tuple(float(d) for d in self.distances_km))
        if self.sessions_per_cell < 1:
            raise ValueError("sessions_per_cell must be >= 1")
        if not self.distances_km or not self.weathers:
            raise ValueError("sweep grid must be non-empty")


@dataclass(frozen=True)
class CellSummary:
    """Aggregates over one (weather, distance) cell.

    Means over empty subsets (for example mean_qber when every session
    aborted before estimation) are reported as None and serialized as empty
    CSV fields.
    """

    weather: str
    distance_km: float
    mean_sifted_len: float
    mean_qber: float | None
    abort_rate: float
    auth_success_rate: float
    mean_grover_p1: float | None


@dataclass
class SweepResult:
    spec: SweepSpec
    rows: list[dict]
    cells: list[CellSummary]
    summary: dict


def _cells_in_order(spec: SweepSpec) -> list[tuple[WeatherCondition, float]]:
    weathers = sorted(spec.weathers, key=lambda w: w.kind)
    distances = sorted(spec.distances_km)
    return [(w, d) for w in weathers for d in distances]


def _session_row(weather: str, distance_km: float, session_id: int,
                 outcome: SessionOutcome) -> dict:
    grover = outcome.grover
    return {
        "weather": weather,
        "distance_km": distance_km,
        "session_id": session_id,
        "seed": outcome.seed,
        "n_photons": outcome.n_photons,
        "n_received": outcome.n_received,
        "sifted_len": outcome.sifted_len,
        "qber": outcome.qber,
        "qkd_aborted": outcome.qkd_aborted,
        "key_len": outcome.key_len,
        "sig_ok": outcome.sig_ok,
        "hmac_ok": outcome.hmac_ok,
        "accepted": outcome.accepted,
        "verdict": outcome.verdict,
        "grover_p1": None if grover is None else grover.detection_p1,
        "grover_kstar": None if grover is None else grover.k_star,
        "within_window": outcome.within_window,
    }


def _mean(values: list[float]) -> float | None:
    if not values:
        return None
    return float(np.mean(values))


def _summarize_cell(weather: str, distance_km: float,
                    rows: list[dict]) -> CellSummary:
    total = len(rows)
    live = [r for r in rows if not r["qkd_aborted"]]
    return CellSummary(
        weather=weather,
        distance_km=distance_km,
        mean_sifted_len=_mean([r["sifted_len"] for r in rows]),
        mean_qber=_mean([r["qber"] for r in live if r["qber"] is not None]),
        abort_rate=sum(r["qkd_aborted"] for r in rows) / total,
        auth_success_rate=sum(bool(r["accepted"]) for r in rows) / total,
        mean_grover_p1=_mean([r["grover_p1"] for r in rows
                              if r["grover_p1"] is not None]),
    )


def run_sweep(spec: SweepSpec) -> SweepResult:
    """Run the full grid sequentially in deterministic cell order."""
    rows: list[dict] = []
    cells: list[CellSummary] = []
    global_index = 0
    for weather, distance_km in _cells_in_order(spec):
        channel = dataclasses.replace(spec.base_config.channel,
                                      distance_m=distance_km * 1000.0)
        cell_rows = []
        for session_id in range(spec.sessions_per_cell):
            seed = derive_session_seed(spec.seed_base, global_index)
            global_index += 1
            cfg = dataclasses.replace(spec.base_config, channel=channel,
                                      weather=weather, seed=seed)
            outcome = run_session(cfg)
            cell_rows.append(_session_row(weather.kind, distance_km,
                                          session_id, outcome))
        rows.extend(cell_rows)
        cells.append(_summarize_cell(weather.kind, distance_km, cell_rows))

    rows.sort(key=lambda r: (r["weather"], r["distance_km"], r["session_id"]))
    total = len(rows)
    summary = {
        "sweep": {
            "seed_base": spec.seed_base,
            "sessions_per_cell": spec.sessions_per_cell,
            "distances_km": sorted(spec.distances_km),
            "weathers": sorted(w.kind for w in spec.weathers),
            "n_photons": spec.base_config.n_photons,
        },
        "totals": {
            "sessions": total,
            "aborted": sum(r["qkd_aborted"] for r in rows),
            "accepted": sum(bool(r["accepted"]) for r in rows),
            "abort_rate": sum(r["qkd_aborted"] for r in rows) / total,
            "auth_success_rate": sum(bool(r["accepted"]) for r in rows) / total,
        },
    }
    return SweepResult(spec, rows, cells, summary)


def _csv_value(value) -> str:
    # Missing numerics become empty fields; booleans serialize lowercase.
    if value is None:
        return ""
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    return str(value)


def _write_csv(path: Path, columns: list[str], dict_rows: list[dict]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in dict_rows:
            writer.writerow([_csv_value(row[c]) for c in columns])


def write_sweep_outputs(result: SweepResult, out_dir: str | Path) -> dict[str, Path]:
    """Write sessions.csv, cells.csv and summary.json; returns their paths."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    sessions_path = out / SESSIONS_CSV
    cells_path = out / CELLS_CSV
    summary_path = out / SUMMARY_JSON
    _write_csv(sessions_path, SESSION_COLUMNS, result.rows)
    _write_csv(cells_path, CELL_COLUMNS,
               [dataclasses.asdict(c) for c in result.cells])
    summary_path.write_text(json.dumps(result.summary, indent=2) + "\n")
    return {SESSIONS_CSV: sessions_path, CELLS_CSV: cells_path,
            SUMMARY_JSON: summary_path}


def run_scenario(scenario: str, seed: int | None = None,
                 base_config: SessionConfig | None = None,
                 out_dir: str | Path | None = None,
                 ) -> tuple[SessionOutcome, Path | None]:
    """Run one preset scenario; optionally write scenario_<X>.json."""
    overrides = {}
    if base_config is not None:
        overrides = {f.name: getattr(base_config, f.name)
                     for f in dataclasses.fields(SessionConfig)
                     if f.name not in ("qkd_eve", "classical_tamper", "seed")}
    if seed is None:
        seed = base_config.seed if base_config is not None else SessionConfig().seed
    cfg = scenario_preset(scenario, seed=seed, **overrides)
    outcome = run_session(cfg)
    path = None
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        path = out / f"scenario_{scenario.strip().upper()}.json"
        doc = {"scenario": scenario.strip().upper()}
        doc.update(outcome.to_json_dict())
        path.write_text(json.dumps(doc, indent=2) + "\n")
    return outcome, path


def scenario_report(scenario: str, outcome: SessionOutcome) -> str:
    """Human-readable single-session report for the CLI."""
    lines = [
        f"scenario {scenario.strip().upper()}  "
        f"(eve={'on' if outcome.eve else 'off'}, "
        f"tamper={'on' if outcome.tamper else 'off'}, seed={outcome.seed})",
        f"  photons sent       {outcome.n_photons}",
        f"  photons received   {outcome.n_received}",
        f"  sifted bits        {outcome.sifted_len}",
    ]
    if outcome.qber is None:
        lines.append("  qber               -")
    else:
        lines.append(f"  qber               {outcome.qber:.4f}"
                     f"  (threshold {outcome.qber_threshold})")
    if outcome.qkd_aborted:
        lines.append(f"  qkd                ABORT ({outcome.abort_reason})")
    else:
        lines.append(f"  qkd                ok, key {outcome.key_len} bits")
        lines.append(f"  signature          {'ok' if outcome.sig_ok else 'BAD'}")
        lines.append(f"  hmac               {'ok' if outcome.hmac_ok else 'BAD'}")
    if outcome.grover is not None:
        g = outcome.grover
        kstar = "-" if g.k_star is None else str(g.k_star)
        lines.append(f"  grover             n={g.n} m={g.m} p1={g.detection_p1:.4f}"
                     f" k*={kstar}")
    if outcome.trust is not None:
        lines.append(f"  trust              {outcome.trust.level}")
    lines.append(f"  window             {outcome.duration_ms:.1f} ms "
                 f"({'inside' if outcome.within_window else 'outside'})")
    lines.append(f"  verdict            {outcome.verdict}")
    return "\n".join(lines)


def grover_table_text(n: int, m: int) -> str:
    """Fixed-format text table of the detection curve for (n, m)."""
    report = GroverReport.from_counts(n, m)
    lines = [f"N={report.n}  M={report.m}  theta={report.theta:.6f}"]
    lines.append(" k   P(success)")
    for k, p in enumerate(report.probs):
        lines.append(f" {k}   {p:.6f}")
    kstar = "-" if report.k_star is None else str(report.k_star)
    expq = ("-" if report.expected_queries is None
            else f"{report.expected_queries:.6f}")
    lines.append(f"k_star={kstar}  p_max={report.p_max:.6f}"
                 f"  expected_queries={expq}")
    return "\n".join(lines)


# ---- config-file plumbing ----------------------------------------------

def _build_dataclass(cls, data: dict, label: str):
    names = {f.name for f in dataclasses.fields(cls)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown {label} fields: {sorted(unknown)}")
    return cls(**data)


def weather_from_name(name: str) -> WeatherCondition:
    for preset in default_weathers():
        if preset.kind == name:
            return preset
    raise ValueError(f"unknown weather {name!r}")


def weather_from_config(value) -> WeatherCondition:
    if isinstance(value, str):
        return weather_from_name(value)
    return _build_dataclass(WeatherCondition, dict(value), "weather")


def session_config_from_dict(data: dict) -> SessionConfig:
    """Build a SessionConfig from a JSON-style dict of field overrides."""
    data = dict(data)
    kwargs = {}
    if "channel" in data:
        kwargs["channel"] = _build_dataclass(ChannelParams,
                                             dict(data.pop("channel")), "channel")
    if "weather" in data:
        kwargs["weather"] = weather_from_config(data.pop("weather"))
    if "payload" in data:
        kwargs["payload"] = data.pop("payload").encode()
    if "window_ms" in data:
        kwargs["window_ms"] = tuple(data.pop("window_ms"))
    names = {f.name for f in dataclasses.fields(SessionConfig)}
    unknown = set(data) - names
    if unknown:
        raise ValueError(f"unknown session fields: {sorted(unknown)}")
    kwargs.update(data)
    return SessionConfig(**kwargs)


def sweep_spec_from_dict(data: dict) -> SweepSpec:
    """Build a SweepSpec from a JSON-style dict (sweep plus session keys)."""
    data = dict(data)
    kwargs = {}
    if "distances_km" in data:
        kwargs["distances_km"] = tuple(data.pop("distances_km"))
    if "weathers" in data:
        kwargs["weathers"] = tuple(weather_from_config(w)
                                   for w in data.pop("weathers"))
    for key in ("sessions_per_cell", "seed_base"):
        if key in data:
            kwargs[key] = data.pop(key)
    if data:
        kwargs["base_config"] = session_config_from_dict(data)
    return SweepSpec(**kwargs)
