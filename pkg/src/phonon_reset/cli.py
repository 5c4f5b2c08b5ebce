"""Command-line runner: config in, JSON/CSV tables, SVG plots and a manifest out.

Exit codes: 0 success, 2 invalid input or configuration, 3 numerical failure.
Errors go to stderr as one JSON line followed by a human-readable line.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime
from importlib import resources
from pathlib import Path
from typing import Any, Sequence

from . import __version__, kernels
from .config import ExperimentConfig, config_hash, emit_config, parse_config
from .errbudget import error_budget
from .errors import ConfigError, IntegrationError, PhononResetError
from .output import OutputCollector
from .protocol import (
    build_reset_schedule, is_non_increasing, simulate_reset, simulate_rpm_contrast, sweep_swap_count,
)
from .thermometry import RpmRecordSet, posterior, synthesize_records

SUBCOMMANDS = ("simulate-reset", "sweep-swaps", "estimate-population", "error-budget",
               "rpm-synthesize", "validate")
SEED_ENV = "PHONON_RESET_SEED"
REFERENCE_FILE = "fig3_reference.json"


@dataclass
class ResultBundle:
    metadata: dict[str, Any]
    tables: dict[str, Any] = field(default_factory=dict)
    files: list[str] = field(default_factory=list)
    ok: bool = True


def _float(text: str, what: str, row: int) -> float:
    try:
        x = float(text)
    except (TypeError, ValueError):
        raise ConfigError(f"row {row}: {what} {text!r} is not a number") from None
    if x != x or x in (float("inf"), float("-inf")):
        raise ConfigError(f"row {row}: {what} must be finite")
    return x


def ingest_rpm_csv(path: str | Path) -> RpmRecordSet:
    """Read RPM contrast records; rows are numbered from 1 after the header."""
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"data file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        cols = [c.strip() for c in (reader.fieldnames or [])]
        reader.fieldnames = cols
        use_amps = "contrast" not in cols
        if use_amps and not {"signal_amp", "reference_amp"} <= set(cols):
            raise ConfigError(f"{path}: need a 'contrast' column or both 'signal_amp' and 'reference_amp'")
        contrasts, run_ids, stamps = [], [], []
        for i, rec in enumerate(reader, start=1):
            if use_amps:
                sig = _float(rec["signal_amp"], "signal_amp", i)
                ref = _float(rec["reference_amp"], "reference_amp", i)
                if ref == 0:
                    raise ConfigError(f"row {i}: reference_amp is zero")
                contrasts.append(sig / ref)
            else:
                contrasts.append(_float(rec["contrast"], "contrast", i))
            if "run_id" in cols:
                run_ids.append(rec["run_id"])
            if "timestamp" in cols:
                ts = rec["timestamp"].strip()
                try:
                    datetime.fromisoformat(ts.replace("Z", "+00:00"))
                except ValueError:
                    raise ConfigError(f"row {i}: timestamp {ts!r} is not ISO-8601") from None
                stamps.append(ts)
    return RpmRecordSet.from_records(contrasts, run_ids or None, stamps or None)


def load_reference(source: str | None) -> dict[int, float] | None:
    """Reference p per swap count from a JSON file (``default`` = the shipped values) or CSV n,p."""
    if source is None:
        return None
    if source == "default":
        text = resources.files("phonon_reset").joinpath("data", REFERENCE_FILE).read_text()
    else:
        path = Path(source)
        if not path.is_file():
            raise ConfigError(f"reference file not found: {path}")
        text = path.read_text(encoding="utf-8")
        if path.suffix.lower() == ".csv":
            rows = list(csv.DictReader(text.splitlines()))
            if not rows or not {"n", "p"} <= set(rows[0]):
                raise ConfigError(f"{path}: reference CSV needs columns n,p")
            return {int(r["n"]): _float(r["p"], "p", i) for i, r in enumerate(rows, start=1)}
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"reference JSON parse error: {exc}") from None
    values = data.get("values", data) if isinstance(data, dict) else None
    if not isinstance(values, dict):
        raise ConfigError("reference JSON must map swap counts to values")
    out = {}
    for k, v in values.items():
        p = v.get("p") if isinstance(v, dict) else v
        out[int(k)] = float(p)
    return out


def resolve_seed(flag: int | None, cfg: ExperimentConfig) -> int:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env not in (None, ""):
        try:
            return int(env)
        except ValueError:
            raise ConfigError(f"{SEED_ENV}={env!r} is not an integer") from None
    return cfg.seed


def _record_row(rec) -> dict[str, Any]:
    return {"label": rec.label, "time_us": rec.time, "p_excited": rec.qubit_excited,
            "qubit_levels": list(rec.qubit_levels), "mode_fock1": list(rec.mode_fock1)}


def _series_rows(records, prefix=()):
    for r in records:
        yield list(prefix) + [r.label, r.time, r.qubit_excited] + list(r.mode_fock1)


def _cmd_simulate_reset(cfg, out: OutputCollector, fmt, **_):
    dev, noise, opts = cfg.device(), cfg.noise(), cfg.schedule_options()
    n = cfg["protocol"]["n_swaps"]
    sched = build_reset_schedule(dev, noise, n, opts)
    rep = simulate_reset(sched, dev, noise, cfg.step, samples_per_segment=9)
    recs = rep.records
    ends = [r for i, r in enumerate(recs) if i == len(recs) - 1 or recs[i + 1].label != r.label]
    summary = {
        "n_swaps": n, "p": rep.p, "total_duration_us": rep.total_duration,
        "repetition_wait_us": sched.repetition_wait, "rpm_contrast": simulate_rpm_contrast(rep),
    }
    out.table("reset", [_record_row(r) for r in ends], fmt, extra={"summary": summary})
    header = ["label", "time_us", "p_excited"] + [f"mode{i}_fock1" for i in range(1, dev.n_modes + 1)]
    out.series("reset_trajectory.csv", header, _series_rows(recs))
    from .plots import reset_trajectory
    out.figure("reset_trajectory.svg", reset_trajectory(
        [r.time for r in recs], [r.qubit_excited for r in recs], [r.mode_fock1 for r in recs]))
    return {"summary": summary}


def _cmd_sweep_swaps(cfg, out: OutputCollector, fmt, reference=None, **_):
    dev, noise, opts = cfg.device(), cfg.noise(), cfg.schedule_options()
    n_max = cfg["protocol"]["n_swaps"]
    rows = sweep_swap_count(dev, noise, range(n_max + 1), opts, cfg.step, reference)
    table = [{"n_swaps": r.n_swaps, "p": r.p, "total_duration_us": r.total_duration,
              "reference_p": r.reference} for r in rows]
    ps = [r.p for r in rows]
    summary = {"non_increasing": is_non_increasing(ps)}
    out.table("sweep", table, fmt, extra={"summary": summary})
    header = ["n_swaps", "label", "time_us", "p_excited"] + [
        f"mode{i}_fock1" for i in range(1, dev.n_modes + 1)]
    series = [row for r in rows for row in _series_rows(r.report.records, (r.n_swaps,))]
    out.series("sweep_trajectories.csv", header, series)
    from .plots import sweep_staircase
    out.figure("sweep.svg", sweep_staircase([r.n_swaps for r in rows], ps, reference))
    return {"table": table, "summary": summary}


def _posterior_outputs(out: OutputCollector, rs: RpmRecordSet, cfg, fmt, stem: str):
    a = cfg["analysis"]
    post = posterior(rs.sample_mean, rs.standard_error, a["prior_low"], a["prior_high"], a["ci_level"])
    row = {"n_records": len(rs), "sample_mean": rs.sample_mean, "standard_error": rs.standard_error,
           "mean": post.mean, "ci_low": post.ci_low, "ci_high": post.ci_high,
           "ci_level": post.ci_level, "prior_low": post.prior_low, "prior_high": post.prior_high}
    out.table(stem, [row], fmt)
    from .plots import posterior_density
    fig, x, y = posterior_density(post)
    out.series(f"{stem}_density.csv", ["p", "density"], zip(x, y))
    out.figure(f"{stem}.svg", fig)
    return row


def _cmd_estimate_population(cfg, out, fmt, data=None, **_):
    if data is None:
        raise ConfigError("estimate-population needs --data CSV")
    rs = ingest_rpm_csv(data)
    return {"posterior": _posterior_outputs(out, rs, cfg, fmt, "posterior")}


def _cmd_rpm_synthesize(cfg, out, fmt, seed=0, **_):
    s = cfg["synthesis"]
    n = s["n_records"]
    sigma_rec = s["sigma_mean"] * n ** 0.5
    rs = synthesize_records(s["p_true"], sigma_rec, n, seed)
    out.series("rpm_records.csv", ["run_id", "contrast"],
               ((f"r{i:04d}", float(c)) for i, c in enumerate(rs.records, start=1)))
    if n < 2:
        return {"records": n}
    row = _posterior_outputs(out, rs, cfg, fmt, "posterior")
    return {"posterior": row, "p_true": s["p_true"]}


def _cmd_error_budget(cfg, out, fmt, **_):
    rep = error_budget(g=cfg.device().coupling(1))
    row = asdict(rep)
    out.table("error_budget", [row], fmt)
    return {"error_budget": row}


def _cmd_validate(cfg, out, fmt, **_):
    from .selfcheck import run_checks

    results = run_checks()
    table = [asdict(r) for r in results]
    out.table("validate", table, fmt)
    for r in results:
        print(f"{'PASS' if r.passed else 'FAIL'}  {r.name}  (error {r.error:.3g}, tolerance {r.tolerance:.3g})")
    return {"all_passed": all(r.passed for r in results)}


COMMANDS = {
    "simulate-reset": _cmd_simulate_reset,
    "sweep-swaps": _cmd_sweep_swaps,
    "estimate-population": _cmd_estimate_population,
    "error-budget": _cmd_error_budget,
    "rpm-synthesize": _cmd_rpm_synthesize,
    "validate": _cmd_validate,
}


def run(subcommand: str, config: ExperimentConfig, out_dir: str | Path, fmt: str = "json",
        seed: int | None = None, reference: dict[int, float] | None = None,
        data: str | Path | None = None) -> ResultBundle:
    if subcommand not in COMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    if fmt not in ("json", "csv"):
        raise ConfigError(f"unknown format {fmt!r}")
    seed = resolve_seed(seed, config)
    meta = {
        "tool": "phonon-reset",
        "version": __version__,
        "subcommand": subcommand,
        "config_hash": config_hash(config),
        "seed": seed,
        "backend": kernels.BACKEND,
    }
    out = OutputCollector(out_dir, meta)
    out.text("config.toml", emit_config(config))
    tables = COMMANDS[subcommand](config, out, fmt, seed=seed, reference=reference, data=data)
    out.manifest()
    ok = tables.get("all_passed", True)
    return ResultBundle(meta, tables, sorted(out.files) + ["manifest.json"], ok)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="TOML experiment config (defaults if omitted)")
    common.add_argument("--out", metavar="DIR", default="phonon_reset_out", help="output directory")
    common.add_argument("--seed", type=int, help=f"RNG seed (fallback: ${SEED_ENV}, then config)")
    common.add_argument("--step-ns", type=float, help="integrator step in ns")
    common.add_argument("--n-swaps", type=int, help="swap count (sweep: maximum swap count)")
    common.add_argument("--reference", metavar="PATH",
                        help="reference p per swap count (JSON or CSV n,p; 'default' for the shipped values)")
    common.add_argument("--format", choices=("json", "csv"), default="json", help="table format")
    common.add_argument("--data", metavar="PATH", help="RPM contrast CSV for estimate-population")
    parser = argparse.ArgumentParser(prog="phonon-reset", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common])
    return parser


def _fail(exc: BaseException, code: int) -> int:
    record = {"error": type(exc).__name__, "exit_code": code, "message": str(exc)}
    print(json.dumps(record), file=sys.stderr)
    print(f"phonon-reset: error: {exc}", file=sys.stderr)
    return code


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = parse_config(args.config)
        cfg = cfg.with_overrides(protocol__n_swaps=args.n_swaps, integrator__step_ns=args.step_ns)
        ref = load_reference(args.reference)
        bundle = run(args.command, cfg, args.out, args.format, args.seed, ref, args.data)
    except (IntegrationError, FloatingPointError, ArithmeticError) as exc:
        return _fail(exc, 3)
    except (PhononResetError, ValueError, OSError) as exc:
        return _fail(exc, 2)
    for name in bundle.files:
        print(Path(args.out) / name)
    if not bundle.ok:
        print("phonon-reset: one or more self checks failed", file=sys.stderr)
        return 3
    return 0


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(main())
