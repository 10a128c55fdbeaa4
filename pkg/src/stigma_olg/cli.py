"""Command-line front end: ``solve``, ``sweep``, ``simulate`` and ``verify``.

Flags override values read from ``--config`` (a JSON object whose keys are
the long flag names with dashes or underscores). The effective settings are
echoed into every JSON output.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import records
from .equilibrium import classify_regime, enumerate_equilibria
from .errors import InsufficientSamples, StigmaModelError, Vacuous
from .model import ModelParams
from .simulator import SelectionPolicy, SimConfig, compare_to_theory, run
from .statics import SweepRow, cooperation_probability, sweep

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

DEFAULTS = {
    "solve": {"alpha": 0.0, "format": "json", "out": None},
    "sweep": {"alpha": 0.0, "pi_min": 0.0, "pi_max": 1.0, "out": None},
    "simulate": {"alpha": 0.0, "burn_in": 0, "seed": 0, "out": None, "band": 0.0025},
    "verify": {"mode": "quick"},
}
REQUIRED = {
    "solve": ("pi", "b"),
    "sweep": ("b", "pi_steps"),
    "simulate": ("pi", "b", "cohort", "periods"),
    "verify": (),
}


class UsageError(Exception):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    S = argparse.SUPPRESS
    p.add_argument("--config", default=S, help="JSON file with default flag values")
    p.add_argument("--threads", type=int, default=S, help="worker threads (env STIGMA_OLG_THREADS; default 1)")
    p.add_argument("--no-timestamp", dest="no_timestamp", action="store_true", default=S,
                   help="omit the timestamp field so outputs are byte-stable")


def build_parser() -> argparse.ArgumentParser:
    S = argparse.SUPPRESS
    parser = argparse.ArgumentParser(prog="stigma-olg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="all symmetric threshold equilibria for one parameter point")
    p.add_argument("--pi", type=float, default=S)
    p.add_argument("--b", type=float, default=S)
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--format", choices=("json", "csv"), default=S)
    p.add_argument("--out", default=S)
    _common(p)

    p = sub.add_parser("sweep", help="equilibria and cooperation band over a pi grid (CSV)")
    p.add_argument("--b", type=float, default=S)
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--pi-min", dest="pi_min", type=float, default=S)
    p.add_argument("--pi-max", dest="pi_max", type=float, default=S)
    p.add_argument("--pi-steps", dest="pi_steps", type=int, default=S)
    p.add_argument("--out", default=S)
    _common(p)

    p = sub.add_parser("simulate", help="Monte Carlo run plus comparison with theory")
    p.add_argument("--pi", type=float, default=S)
    p.add_argument("--b", type=float, default=S)
    p.add_argument("--alpha", type=float, default=S)
    p.add_argument("--cohort", type=int, default=S)
    p.add_argument("--periods", type=int, default=S)
    p.add_argument("--burn-in", dest="burn_in", type=int, default=S)
    p.add_argument("--seed", type=int, default=S)
    p.add_argument("--select", choices=("min", "max", "interior"), default=S)
    p.add_argument("--cutoff", type=float, default=S)
    p.add_argument("--band", type=float, default=S, help="loss window around the cutoff for payoff checks")
    p.add_argument("--out", default=S)
    _common(p)

    p = sub.add_parser("verify", help="run the acceptance criteria")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--quick", dest="mode", action="store_const", const="quick", default=S)
    mode.add_argument("--full", dest="mode", action="store_const", const="full", default=S)
    _common(p)
    return parser


def _effective(args: argparse.Namespace) -> dict:
    given = vars(args).copy()
    command = given.pop("command")
    settings = dict(DEFAULTS[command])
    settings.update({"threads": int(os.environ.get("STIGMA_OLG_THREADS", 1)), "no_timestamp": False})
    config_path = given.pop("config", None)
    if config_path is not None:
        try:
            data = json.loads(Path(config_path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise UsageError(f"cannot read config {config_path}: {exc}") from exc
        if not isinstance(data, dict):
            raise UsageError("config file must hold a JSON object")
        settings.update({k.replace("-", "_"): v for k, v in data.items()})
    settings.update(given)
    missing = [k for k in REQUIRED[command] if settings.get(k) is None]
    if missing:
        raise UsageError("missing required flag(s): " + ", ".join("--" + m.replace("_", "-") for m in missing))
    if settings["threads"] < 1:
        raise UsageError("threads must be at least 1")
    return settings


def _params(s: dict) -> ModelParams:
    return ModelParams(float(s["pi"]), float(s["b"]), float(s.get("alpha", 0.0)))


def _emit(text: str, out: str | None) -> None:
    if out is None:
        sys.stdout.write(text)
        return
    try:
        Path(out).write_text(text)
    except OSError as exc:
        raise OSError(f"cannot write {out}: {exc}") from exc


def _echo(s: dict) -> dict:
    return {k: v for k, v in sorted(s.items()) if k not in ("no_timestamp", "out", "config")}


def cmd_solve(s: dict) -> int:
    params = _params(s)
    try:
        eqs = enumerate_equilibria(params)
        regime = classify_regime(params)
    except Vacuous as exc:
        raise UsageError(str(exc)) from exc
    band = [cooperation_probability(params.pi, eqs.min_cutoff()),
            cooperation_probability(params.pi, eqs.max_cutoff())]
    if s["format"] == "csv":
        row = SweepRow(params.pi, params.b, params.alpha, eqs, band[0], band[1], regime)
        _emit(records.sweep_to_csv([row]), s["out"])
        return EXIT_OK
    payload = {
        "equilibrium_set": records.equilibrium_set_to_dict(eqs),
        "regime": records.regime_to_dict(regime),
        "coop_band": band,
    }
    record = records.output_record("solve", _echo(s), payload, timestamp=not s["no_timestamp"])
    _emit(records.dumps(record), s["out"])
    return EXIT_OK


def cmd_sweep(s: dict) -> int:
    steps = s["pi_steps"]
    lo, hi = float(s["pi_min"]), float(s["pi_max"])
    if not isinstance(steps, int) or steps < 1:
        raise UsageError(f"pi-steps must be a positive integer (got {steps})")
    if not (0.0 <= lo <= hi <= 1.0):
        raise UsageError(f"need 0 <= pi-min <= pi-max <= 1 (got {lo}, {hi})")
    ModelParams(0.0, float(s["b"]), float(s["alpha"]))
    grid = np.linspace(lo, hi, steps) if steps > 1 else np.array([lo])
    rows = sweep(float(s["b"]), float(s["alpha"]), grid, threads=s["threads"])
    text = records.sweep_to_csv(rows)
    _emit(text, s["out"])
    if s["out"] is not None:
        meta = records.output_record(
            "sweep", _echo(s),
            {"csv": Path(s["out"]).name, "rows": len(rows), "header": records.SWEEP_HEADER},
            provenance={"grid": {"pi_min": lo, "pi_max": hi, "pi_steps": steps}},
            timestamp=not s["no_timestamp"],
        )
        _emit(records.dumps(meta), s["out"] + ".meta.json")
    return EXIT_OK


def _sim_config(s: dict) -> SimConfig:
    if s.get("select") is not None and s.get("cutoff") is not None:
        raise UsageError("--select and --cutoff are mutually exclusive")
    choice = float(s["cutoff"]) if s.get("cutoff") is not None else SelectionPolicy(s.get("select") or "interior")
    return SimConfig(
        params=_params(s),
        cohort_size=s["cohort"],
        periods=s["periods"],
        burn_in=s["burn_in"],
        seed=s["seed"],
        strategy_cutoff=choice,
        marginal_band=float(s["band"]),
    )


def cmd_simulate(s: dict) -> int:
    config = _sim_config(s)
    stats = run(config)
    try:
        report = compare_to_theory(stats, config)
        report_data, status = report.to_dict(), (EXIT_OK if report.passed else EXIT_FAIL)
    except InsufficientSamples as exc:
        report_data, status = {"error": str(exc), "lines": [], "skipped": []}, EXIT_FAIL
    payload = {"cutoff": stats.cutoff, "stats": stats.to_dict(), "report": report_data}
    record = records.output_record("simulate", _echo(s), payload, provenance={"seed": config.seed},
                                   timestamp=not s["no_timestamp"])
    _emit(records.dumps(record), s["out"])
    for line in report_data["lines"]:
        mark = "PASS" if line["passed"] else "FAIL"
        print(f"{mark} {line['name']}: theory={line['theory']:.6g} empirical={line['empirical']:.6g} "
              f"se={line['std_error']:.3g}", file=sys.stderr)
    if "error" in report_data:
        print(f"FAIL {report_data['error']}", file=sys.stderr)
    return status


def cmd_verify(s: dict) -> int:
    from .acceptance import format_table, run_all

    results = run_all(quick=s["mode"] == "quick")
    print(format_table(results))
    failed = [r for r in results if not r.passed]
    for r in failed:
        print(f"failed criterion {r.number}: {r.name}", file=sys.stderr)
    return EXIT_FAIL if failed else EXIT_OK


COMMANDS = {"solve": cmd_solve, "sweep": cmd_sweep, "simulate": cmd_simulate, "verify": cmd_verify}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        settings = _effective(args)
        return COMMANDS[args.command](settings)
    except (UsageError, StigmaModelError, ValueError, TypeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
