"""Load and validate the simulator's CSV/JSON artifacts.

This package deliberately has no dependency on the simulator; the files are
the contract. Validators fail with the offending path (and column or field
where that applies) so a batch renderer can point at exactly what broke.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

SESSION_COLUMNS = [
    "weather", "distance_km", "session_id", "seed", "n_photons", "n_received",
    "sifted_len", "qber", "qkd_aborted", "key_len", "sig_ok", "hmac_ok",
    "accepted", "verdict", "grover_p1", "grover_kstar", "within_window",
]

CELL_COLUMNS = [
    "weather", "distance_km", "mean_sifted_len", "mean_qber", "abort_rate",
    "auth_success_rate", "mean_grover_p1",
]

SCENARIO_FIELDS = ("scenario", "qber", "qber_threshold", "verdict",
                   "sig_ok", "hmac_ok", "qkd_aborted")
GROVER_FIELDS = ("n", "m", "probs", "k_star")

CURVE_POINTS = 8


class ArtifactError(ValueError):
    """An input file is missing, malformed, or off-schema."""


def _float_or_none(text: str) -> float | None:
    return None if text == "" else float(text)


def _check_columns(path: Path, header: list[str], wanted: list[str]) -> None:
    for column in wanted:
        if column not in header:
            raise ArtifactError(f"{path}: missing column {column!r}")


def _read_rows(path: Path, wanted: list[str]) -> list[dict]:
    if not path.exists():
        raise ArtifactError(f"{path}: file not found")
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise ArtifactError(f"{path}: empty file")
        _check_columns(path, list(reader.fieldnames), wanted)
        rows = list(reader)
    if not rows:
        raise ArtifactError(f"{path}: no data rows")
    return rows


def load_cells(path: str | Path) -> list[dict]:
    """Parse cells.csv into typed dicts; raises ArtifactError off-schema."""
    path = Path(path)
    cells = []
    for i, row in enumerate(_read_rows(path, CELL_COLUMNS)):
        try:
            cells.append({
                "weather": row["weather"],
                "distance_km": float(row["distance_km"]),
                "mean_sifted_len": float(row["mean_sifted_len"]),
                "mean_qber": _float_or_none(row["mean_qber"]),
                "abort_rate": float(row["abort_rate"]),
                "auth_success_rate": float(row["auth_success_rate"]),
                "mean_grover_p1": _float_or_none(row["mean_grover_p1"]),
            })
        except (ValueError, TypeError) as exc:
            raise ArtifactError(f"{path}: row {i + 2}: {exc}") from exc
    return cells


def load_sessions(path: str | Path) -> list[dict]:
    """Parse sessions.csv; only the columns the figures need get typed."""
    path = Path(path)
    rows = []
    for i, row in enumerate(_read_rows(path, SESSION_COLUMNS)):
        try:
            rows.append({
                "weather": row["weather"],
                "distance_km": float(row["distance_km"]),
                "sifted_len": int(row["sifted_len"]),
                "qber": _float_or_none(row["qber"]),
                "qkd_aborted": row["qkd_aborted"] == "true",
                "accepted": row["accepted"] == "true",
                "verdict": row["verdict"],
            })
        except (ValueError, TypeError) as exc:
            raise ArtifactError(f"{path}: row {i + 2}: {exc}") from exc
    return rows


def _load_json(path: Path):
    if not path.exists():
        raise ArtifactError(f"{path}: file not found")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: invalid JSON: {exc}") from exc


def load_scenario(path: str | Path) -> dict:
    """Parse one scenario outcome JSON and check the fields the panels use."""
    path = Path(path)
    doc = _load_json(path)
    if not isinstance(doc, dict):
        raise ArtifactError(f"{path}: expected a JSON object")
    for name in SCENARIO_FIELDS:
        if name not in doc:
            raise ArtifactError(f"{path}: missing field {name!r}")
    if doc.get("grover") is not None:
        _check_grover(path, doc["grover"])
    return doc


def _check_grover(path: Path, report: dict) -> None:
    if not isinstance(report, dict):
        raise ArtifactError(f"{path}: grover report must be an object")
    for name in GROVER_FIELDS:
        if name not in report:
            raise ArtifactError(f"{path}: grover report missing field {name!r}")
    probs = report["probs"]
    if not isinstance(probs, list) or len(probs) != CURVE_POINTS:
        raise ArtifactError(f"{path}: grover probs must list {CURVE_POINTS} values")
    if not all(isinstance(p, (int, float)) and 0.0 <= p <= 1.0 for p in probs):
        raise ArtifactError(f"{path}: grover probs outside [0, 1]")


def load_grover_reports(path: str | Path) -> list[dict]:
    """Parse a JSON list of detection-curve reports."""
    path = Path(path)
    docs = _load_json(path)
    if not isinstance(docs, list):
        raise ArtifactError(f"{path}: expected a JSON list of reports")
    for doc in docs:
        _check_grover(path, doc)
    return docs


def discover(in_dir: str | Path) -> dict:
    """Map out which artifacts an input directory offers.

    Returns a dict with optional keys: cells (Path), sessions (Path),
    scenarios (sorted list of scenario_*.json paths), grover (Path).
    Raises ArtifactError when the directory holds nothing renderable.
    """
    base = Path(in_dir)
    if not base.is_dir():
        raise ArtifactError(f"{base}: not a directory")
    found: dict = {}
    if (base / "cells.csv").exists():
        found["cells"] = base / "cells.csv"
    if (base / "sessions.csv").exists():
        found["sessions"] = base / "sessions.csv"
    scenarios = sorted(base.glob("scenario_*.json"))
    if scenarios:
        found["scenarios"] = scenarios
    if (base / "grover_reports.json").exists():
        found["grover"] = base / "grover_reports.json"
    if not found:
        raise ArtifactError(f"{base}: no renderable artifacts "
                            "(cells.csv, scenario_*.json, grover_reports.json)")
    return found
