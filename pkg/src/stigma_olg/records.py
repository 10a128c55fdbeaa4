"""Serialization of solver, sweep and simulation outputs (JSON and CSV)."""

from __future__ import annotations

import csv
import io
import json
import math
from datetime import datetime, timezone
from typing import Any

from . import __version__
from .equilibrium import (
    EquilibriumKind,
    EquilibriumSet,
    Regime,
    RegimeClassification,
    ThresholdEquilibrium,
)
from .statics import SweepRow

SCHEMA_VERSION = "1.0"
BUILD_ID = f"stigma_olg {__version__}"
SWEEP_HEADER = ["pi", "b", "alpha", "eq_low", "eq_interior", "eq_high", "continuum", "regime", "coop_min", "coop_max"]


def fmt_float(x: float | None) -> str:
    """Shortest repr that round-trips exactly; empty for missing values."""
    if x is None:
        return ""
    return repr(float(x))


def parse_float(text: str) -> float | None:
    return None if text == "" else float(text)


def _clean(obj):
    """Replace NaN/inf with None so the JSON is strict."""
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def output_record(command: str, params: dict, payload: Any, provenance: dict | None = None,
                  timestamp: bool = True) -> dict:
    record = {
        "schema_version": SCHEMA_VERSION,
        "command": command,
        "params": params,
        "payload": payload,
        "provenance": {"build": BUILD_ID, **(provenance or {})},
    }
    if timestamp:
        record["timestamp"] = datetime.now(timezone.utc).isoformat()
    return _clean(record)


def dumps(record: dict) -> str:
    return json.dumps(record, indent=2, sort_keys=True, allow_nan=False) + "\n"


def loads(text: str) -> dict:
    record = json.loads(text)
    if "schema_version" not in record:
        raise ValueError("record has no schema_version")
    return record


# equilibrium sets ---------------------------------------------------------------

def equilibrium_set_to_dict(eqs: EquilibriumSet) -> dict:
    return {
        "continuum": eqs.continuum,
        "equilibria": [
            {"cutoff": eq.cutoff, "kind": eq.kind.value, "residual": eq.residual} for eq in eqs.equilibria
        ],
    }


def equilibrium_set_from_dict(data: dict) -> EquilibriumSet:
    return EquilibriumSet(
        tuple(ThresholdEquilibrium(e["cutoff"], EquilibriumKind(e["kind"]), e["residual"])
              for e in data["equilibria"]),
        continuum=bool(data["continuum"]),
    )


def regime_to_dict(regime: RegimeClassification) -> dict:
    return {"regime": regime.regime.value, "boundaries": list(regime.boundaries)}


def regime_from_dict(data: dict) -> RegimeClassification:
    return RegimeClassification(Regime(data["regime"]), tuple(data["boundaries"]))


# sweep CSV -----------------------------------------------------------------------

def sweep_row_fields(row: SweepRow) -> list[str]:
    return [
        fmt_float(row.pi),
        fmt_float(row.b),
        fmt_float(row.alpha),
        fmt_float(row.cutoff_of(EquilibriumKind.CORNER_LOW)),
        fmt_float(row.cutoff_of(EquilibriumKind.INTERIOR)),
        fmt_float(row.cutoff_of(EquilibriumKind.CORNER_HIGH)),
        "" if row.equilibria is None else ("true" if row.equilibria.continuum else "false"),
        row.regime_name,
        fmt_float(row.coop_prob_min),
        fmt_float(row.coop_prob_max),
    ]


def sweep_to_csv(rows: list[SweepRow]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(SWEEP_HEADER)
    for row in rows:
        writer.writerow(sweep_row_fields(row))
    return buf.getvalue()


def parse_sweep_csv(text: str) -> list[dict]:
    """Rows as dicts with floats/None/bools restored."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames != SWEEP_HEADER:
        raise ValueError(f"unexpected sweep header {reader.fieldnames}")
    out = []
    for raw in reader:
        row: dict[str, Any] = {k: parse_float(raw[k]) for k in SWEEP_HEADER if k not in ("continuum", "regime")}
        row["continuum"] = {"true": True, "false": False, "": None}[raw["continuum"]]
        row["regime"] = raw["regime"]
        out.append(row)
    return out
