"""``centroid-limits`` command line: exact | simulate | verify | zero | export.

Every command writes one record: ``schema_version``, the fully resolved
``command`` configuration and a ``payload`` of named tables.  JSON output
holds the whole record; CSV output holds the tables (one header row each,
``# name`` lines separating several) and echoes the configuration on
stderr.  Exact rationals are written as ``p/q`` strings.

Configuration precedence: flags > ``--config`` JSON file > environment
(``CENTROID_LIMITS_SEED``, ``CENTROID_LIMITS_MAX_ENUM``) > defaults.

Exit status: 0 success, 1 verification failure, 2 usage error,
3 budget or resource refusal, 4 I/O error.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from typing import Any, Sequence

import numpy as np

from . import polygon as cen
from . import exact
from . import verify
from .errors import BudgetExceeded, DomainError, EnumerationCapExceeded, ResourceRefusal
from .montecarlo import SimConfig, run
from .perm import MAX_ENUM_ENV

SCHEMA_VERSION = "1.0"
SEED_ENV = "CENTROID_LIMITS_SEED"

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_REFUSED, EXIT_IO = 0, 1, 2, 3, 4

COMMON_DEFAULTS = {"seed": 0, "workers": 1, "format": "json", "out": None}

DEFAULTS: dict[str, dict[str, Any]] = {
    "exact": {"n": None, "m_max": 8, "axis": "real"},
    "simulate": {
        "n": None, "samples": None, "max_moment": 8, "keep_radii": None,
        "histogram_bins": 0, "histogram_extent": 1.0, "radius_bin_width": None,
        "cf_points": "0.5,1,2,4", "timing": False, "executor": "auto",
    },
    "verify": {
        "only": None, "n": 1000, "samples": 1_000_000,
        "moments_n": 500, "moments_samples": 200_000, "seed": 42,
    },
    "zero": {"n": None, "strategy": "auto", "budget": cen.DEFAULT_SEARCH_BUDGET, "max_enum": None},
    "export": {
        "what": None, "step": 0.01, "extent": 1.0, "grid_step": 0.05,
        "n": 1000, "samples": 100_000, "max_moment": 2,
    },
}


class UsageError(Exception):
    pass


# -- argument parsing -----------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, help="64-bit seed (default from $%s or 0)" % SEED_ENV)
    common.add_argument("--workers", type=int)
    common.add_argument("--format", choices=("csv", "json"))
    common.add_argument("--out", metavar="PATH", help="write output here instead of stdout")
    common.add_argument("--config", metavar="FILE", help="JSON file of option values")

    parser = argparse.ArgumentParser(prog="centroid-limits", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("exact", parents=[common], help="exact finite-n moments")
    p.add_argument("--n", type=int)
    p.add_argument("--m-max", type=int)
    p.add_argument("--axis", choices=exact.AXES)

    p = sub.add_parser("simulate", parents=[common], help="Monte Carlo centroid statistics")
    p.add_argument("--n", type=int)
    p.add_argument("--samples", type=int)
    p.add_argument("--max-moment", type=int)
    p.add_argument("--keep-radii", action=argparse.BooleanOptionalAction)
    p.add_argument("--histogram-bins", type=int, help="grid cells per axis (and radius bins)")
    p.add_argument("--histogram-extent", type=float, help="x, y range [-E, E]; radius range [0, E]")
    p.add_argument("--radius-bin-width", type=float)
    p.add_argument("--cf-points", help="comma-separated t values for the empirical cf")
    p.add_argument("--timing", action="store_true", default=None, help="include wall-clock time")
    p.add_argument("--executor", choices=("auto", "process", "thread", "serial"))

    p = sub.add_parser("verify", parents=[common], help="run the verification gates")
    p.add_argument("--only", action="append", choices=verify.SUITES)
    p.add_argument("--n", type=int, help="n for the KS / cf gates")
    p.add_argument("--samples", type=int, help="samples for the KS / cf gates")
    p.add_argument("--moments-n", type=int)
    p.add_argument("--moments-samples", type=int)

    p = sub.add_parser("zero", parents=[common], help="decide and witness zero centroids")
    p.add_argument("--n", type=int)
    p.add_argument("--strategy", choices=("auto", "search", "construct"))
    p.add_argument("--budget", type=int)
    p.add_argument("--max-enum", type=int, help="exhaustive cap (default from $%s)" % MAX_ENUM_ENV)

    p = sub.add_parser("export", parents=[common], help="emit figure data")
    p.add_argument("what", choices=("rayleigh_density", "limit_density_2d", "radii_ecdf"))
    p.add_argument("--step", type=float, help="x step for rayleigh_density")
    p.add_argument("--extent", type=float, help="half-width of the limit_density_2d grid")
    p.add_argument("--grid-step", type=float)
    p.add_argument("--n", type=int, help="n for radii_ecdf")
    p.add_argument("--samples", type=int, help="samples for radii_ecdf")
    return parser


def resolve(args: argparse.Namespace) -> dict[str, Any]:
    """Merge flags, config file, environment and defaults, in that order."""
    command = args.command
    defaults = {**COMMON_DEFAULTS, **DEFAULTS[command]}
    file_values: dict[str, Any] = {}
    if args.config:
        try:
            with open(args.config, encoding="utf-8") as fh:
                file_values = json.load(fh)
        except (OSError, ValueError) as exc:
            raise UsageError(f"cannot read config file {args.config}: {exc}") from exc
        if not isinstance(file_values, dict):
            raise UsageError("config file must hold a JSON object")
        file_values = {k.replace("-", "_"): v for k, v in file_values.items()}
    env_values: dict[str, Any] = {}
    if os.environ.get(SEED_ENV):
        env_values["seed"] = int(os.environ[SEED_ENV])
    if os.environ.get(MAX_ENUM_ENV) and "max_enum" in defaults:
        env_values["max_enum"] = int(os.environ[MAX_ENUM_ENV])

    resolved = {"name": command}
    for key, default in defaults.items():
        flag = getattr(args, key, None)
        if flag is not None:
            resolved[key] = flag
        elif key in file_values:
            resolved[key] = file_values[key]
        elif key in env_values:
            resolved[key] = env_values[key]
        else:
            resolved[key] = default
    if resolved.get("seed") is not None and not 0 <= int(resolved["seed"]) < 2**64:
        raise UsageError("--seed must be a 64-bit unsigned integer")
    return resolved


def _require(cfg: dict, *keys: str) -> None:
    missing = [k for k in keys if cfg.get(k) is None]
    if missing:
        raise UsageError("missing required option(s): " + ", ".join("--" + k.replace("_", "-") for k in missing))


# -- commands -------------------------------------------------------------------


def cmd_exact(cfg: dict) -> tuple[dict, int]:
    _require(cfg, "n", "m_max")
    n, m_max = int(cfg["n"]), int(cfg["m_max"])
    if n < 1 or m_max < 1:
        raise UsageError("--n and --m-max must be >= 1")
    if m_max > exact.EXACT_M_CAP:
        raise ResourceRefusal(f"m_max={m_max} exceeds the exact feasibility cap {exact.EXACT_M_CAP}")
    rows = []
    for m in range(1, m_max + 1):
        value = exact.exact_moment(n, m, cfg["axis"])
        limit = exact.limit_moment(m)
        gap = abs(value.as_fraction() - limit) if value.is_rational() else None
        rows.append({"m": m, "exact": str(value), "limit": str(limit),
                     "gap": None if gap is None else str(gap)})
    return {"moments": rows}, EXIT_OK


def _sim_config(cfg: dict) -> SimConfig:
    try:
        points = tuple(float(t) for t in str(cfg["cf_points"]).split(",") if t.strip())
    except ValueError as exc:
        raise UsageError(f"bad --cf-points: {cfg['cf_points']}") from exc
    return SimConfig(
        n=int(cfg["n"]), samples=int(cfg["samples"]), seed=int(cfg["seed"]),
        workers=int(cfg["workers"]), max_moment=int(cfg["max_moment"]),
        keep_radii=cfg["keep_radii"], cf_points=points,
        hist_bins=int(cfg["histogram_bins"]), hist_extent=float(cfg["histogram_extent"]),
        radius_bin_width=cfg["radius_bin_width"],
    )


def cmd_simulate(cfg: dict) -> tuple[dict, int]:
    _require(cfg, "n", "samples")
    stats = run(_sim_config(cfg), executor=cfg["executor"])
    body = stats.to_dict(include_timing=bool(cfg["timing"]))
    tables = {
        "summary": [{"n": body["n"], "samples": body["samples"], "seed": body["seed"],
                     "batches": body["batches"]}],
        "moments": body["moments"],
        "covariance": body["covariance"],
        "cf": body["cf"],
    }
    for key in ("histogram_xy", "histogram_r"):
        if key in body:
            tables[key] = body[key]
    if "duration_seconds" in body:
        tables["timing"] = [{"duration_seconds": body["duration_seconds"]}]
    return tables, EXIT_OK


def cmd_verify(cfg: dict) -> tuple[dict, int]:
    reports = verify.run_suites(
        cfg["only"], seed=int(cfg["seed"]), workers=int(cfg["workers"]),
        moments_n=int(cfg["moments_n"]), moments_samples=int(cfg["moments_samples"]),
        law_n=int(cfg["n"]), law_samples=int(cfg["samples"]),
    )
    for r in reports:
        print(r.line(), file=sys.stderr)
    rows = [{"test": r.test, "statistic": float(r.statistic), "threshold": float(r.threshold),
             "pass": r.passed, "sample_size": r.sample_size,
             "parameters": json.dumps(r.parameters, sort_keys=True, default=str)}
            for r in reports]
    status = EXIT_OK if all(r.passed for r in reports) else EXIT_FAIL
    return {"reports": rows}, status


def cmd_zero(cfg: dict) -> tuple[dict, int]:
    _require(cfg, "n")
    n = int(cfg["n"])
    if n < 1:
        raise UsageError("--n must be >= 1")
    solvable = cen.is_zero_solvable(n)
    row = {"n": n, "solvable": solvable, "outcome": "no_solution", "witness": None,
           "exact_zero_verified": None}
    status = EXIT_OK
    if solvable:
        try:
            w = cen.find_zero_permutation(n, strategy=cfg["strategy"], budget=int(cfg["budget"]),
                                          cap=cfg["max_enum"])
        except BudgetExceeded:
            row["outcome"] = "budget_exceeded"
            status = EXIT_REFUSED
        else:
            row.update(outcome="witness", witness=" ".join(map(str, w.map)),
                       exact_zero_verified=cen.is_exact_zero(w))
    return {"zero": [row]}, status


def cmd_export(cfg: dict) -> tuple[dict, int]:
    what = cfg["what"]
    if what == "rayleigh_density":
        step = float(cfg["step"])
        if step <= 0:
            raise UsageError("--step must be positive")
        xs = np.arange(int(round(1.0 / step)) + 1) * step
        dens = verify.rayleigh_pdf(xs)
        rows = [{"x": float(x), "density": float(d)} for x, d in zip(xs, dens)]
    elif what == "limit_density_2d":
        extent, step = float(cfg["extent"]), float(cfg["grid_step"])
        if extent <= 0 or step <= 0:
            raise UsageError("--extent and --grid-step must be positive")
        count = int(round(extent / step))
        axis = np.arange(-count, count + 1) * step
        rows = [{"x": float(x), "y": float(y), "density": float(verify.limit_density_2d(x, y))}
                for x in axis for y in axis]
    else:
        sim = SimConfig(n=int(cfg["n"]), samples=int(cfg["samples"]), seed=int(cfg["seed"]),
                        workers=int(cfg["workers"]), max_moment=int(cfg["max_moment"]),
                        keep_radii=True)
        radii = run(sim).radii
        count = len(radii)
        ref = verify.rayleigh_cdf(radii)
        rows = [{"r": float(r), "ecdf": (i + 1) / count, "rayleigh_cdf": float(f)}
                for i, (r, f) in enumerate(zip(radii, ref))]
    return {what: rows}, EXIT_OK


COMMANDS = {
    "exact": cmd_exact,
    "simulate": cmd_simulate,
    "verify": cmd_verify,
    "zero": cmd_zero,
    "export": cmd_export,
}


# -- output -----------------------------------------------------------------------


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def render_csv(tables: dict[str, list[dict]]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    several = len(tables) > 1
    for i, (name, rows) in enumerate(tables.items()):
        if i:
            buf.write("\n")
        if several:
            buf.write(f"# {name}\n")
        columns = list(rows[0]) if rows else []
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row[c]) for c in columns])
    return buf.getvalue()


def render_json(record: dict) -> str:
    return json.dumps(record, indent=2, default=_json_default) + "\n"


def _json_default(obj: Any):
    if isinstance(obj, Fraction):
        return str(obj)
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not serialisable: {type(obj)}")


def emit(record: dict, fmt: str, out: str | None) -> None:
    if fmt == "csv":
        text = render_csv(record.get("payload") or {})
        print(json.dumps(record["command"], default=_json_default), file=sys.stderr)
        if "error" in record:
            print(json.dumps(record["error"]), file=sys.stderr)
    else:
        text = render_json(record)
    if out:
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        cfg = resolve(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    record: dict[str, Any] = {"schema_version": SCHEMA_VERSION, "command": cfg}
    try:
        payload, status = COMMANDS[args.command](cfg)
        record["payload"] = payload
    except UsageError as exc:
        record["error"], status = {"type": "usage", "message": str(exc)}, EXIT_USAGE
    except (EnumerationCapExceeded, ResourceRefusal, BudgetExceeded) as exc:
        record["error"], status = {"type": "refused", "message": str(exc)}, EXIT_REFUSED
    except DomainError as exc:
        record["error"], status = {"type": "domain", "message": str(exc)}, EXIT_USAGE
    try:
        emit(record, cfg["format"], cfg["out"])
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return EXIT_IO
    return status


if __name__ == "__main__":
    sys.exit(main())
