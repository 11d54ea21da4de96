"""Command-line front end.

Each run prints one JSON object (a run record) per line on standard output::

    {"subcommand": ..., "params": {...}, "seed": ..., "wall_time": ...,
     "result": {...}, "version": ...}

Key order is fixed as above.  Exit codes: 0 success, 1 parameter or I/O
error, 2 eigensolver non-convergence.

Subcommands: ``gap``, ``frame``, ``mc``, ``tqo``, ``bounds``, ``sweep``.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from . import bounds as bd
from . import haar_mc as mc
from . import permgroup as pg
from . import spectra as sp
from .exceptions import ConvergenceError, ParameterError

__all__ = ["main", "run", "replay", "build_parser", "CSV_COLUMNS"]

GAP_GUARD = 1 << 26
CSV_COLUMNS = ("subcommand", "params", "seed", "value", "residual", "std_error", "status")


def _record(subcommand, params, seed, result, wall):
    return {
        "subcommand": subcommand,
        "params": dict(sorted(params.items())),
        "seed": seed,
        "wall_time": round(wall, 6),
        "result": result,
        "version": __version__,
    }


def _run_gap(p):
    n, t, d, model = p["n"], p["t"], p["d"], p["model"]
    if not 1 <= t <= pg.MAX_T:
        raise ParameterError(f"t must be in 1..{pg.MAX_T} (t! guard), got {t}")
    if n < 2 or d < 2:
        raise ParameterError(f"need n >= 2 and d >= 2, got n={n}, d={d}")
    if 2 * t * n * math.log2(d) > math.log2(GAP_GUARD):
        raise ParameterError(f"d^(2tn) = {d}^{2 * t * n} exceeds the guard 2^26")
    kw = {"tol": p["tol"], "max_iter": p["max_iter"], "seed": p["seed"]}
    if model == "lr":
        rep = sp.tpe_value(n, t, d, "lr", **kw)
        gap = (n - 1) * (1.0 - rep.value)
        return {"g": rep.value, "gap_H": gap, "residual": rep.residual,
                "gap_residual": (n - 1) * rep.residual, "iterations": rep.iterations,
                "method": rep.method, "deflation_rank": rep.deflation_rank}
    if model == "plr":
        rep = sp.tpe_value(n, t, d, "plr", **kw)
        return {"lambda2_M": rep.value, "g": rep.value, "residual": rep.residual,
                "iterations": rep.iterations, "method": rep.method,
                "deflation_rank": rep.deflation_rank}
    raise ParameterError(f"model must be lr or plr, got {model!r}")


def _run_frame(p):
    return pg.frame_diagnostics(p["n"], p["t"], p["d"])


def _run_mc(p):
    gates = None
    if p["model"] == "gset":
        if not p.get("gates"):
            raise ParameterError("--gates FILE is required for the gset model")
        gates = mc.load_gate_set(p["gates"])
    res = mc.frame_potential(p["model"], p["n"], p["d"], p["steps"], p["t"], p["samples"],
                             seed=p["seed"], gate_set=gates, workers=p.get("workers", 1))
    out = {"estimate": res.estimate, "std_error": res.std_error, "samples": res.samples}
    if p["d"] ** p["n"] >= p["t"]:
        ref = mc.haar_frame_potential(p["d"] ** p["n"], p["t"])
        out["haar_reference"] = ref
        out["sigmas_from_haar"] = ((res.estimate - ref) / res.std_error
                                   if res.std_error > 0 else None)
    return out


def _run_tqo(p):
    rec = mc.tqo_experiment(p["n"], p["d"], p["steps"], p["l"], seed=p["seed"])
    out = rec.to_dict()
    for key in ("n", "d", "steps", "l", "seed"):
        out.pop(key)
    out["dist0_region"] = list(rec.dist0_region)
    out["dist1_region"] = list(rec.dist1_region)
    out["cross_region"] = list(rec.cross_region)
    return out


def _coerce(value: str):
    for conv in (int, float):
        try:
            return conv(value)
        except ValueError:
            pass
    return value


def _run_bounds(p):
    rep = bd.evaluate(p["name"], **p["args"])
    return rep.to_dict()


_RUNNERS = {"gap": _run_gap, "frame": _run_frame, "mc": _run_mc, "tqo": _run_tqo,
            "bounds": _run_bounds}

_DEFAULTS = {
    "gap": {"model": "lr", "tol": sp.DEFAULT_TOL, "max_iter": sp.DEFAULT_MAX_ITER, "seed": 0},
    "frame": {},
    "mc": {"model": "lr", "gates": None, "seed": 0, "workers": 1},
    "tqo": {"seed": 0},
    "bounds": {"args": {}},
}


def run(subcommand: str, params: dict) -> dict:
    """Execute one run and return its record.  Errors propagate."""
    if subcommand not in _RUNNERS:
        raise ParameterError(f"unknown subcommand {subcommand!r}")
    full = dict(_DEFAULTS[subcommand])
    full.update(params)
    start = time.perf_counter()
    result = _RUNNERS[subcommand](full)
    return _record(subcommand, full, full.get("seed"), result, time.perf_counter() - start)


def replay(record) -> dict:
    """Re-run a record (dict or JSON text); the ``result`` payload is reproduced."""
    if isinstance(record, str):
        record = json.loads(record)
    return run(record["subcommand"], record["params"])


def _dump(rec, stream=None):
    stream = stream or sys.stdout
    stream.write(json.dumps(rec, default=_json_default) + "\n")
    stream.flush()


def _json_default(obj):
    import numpy as np
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def _csv_row(rec):
    res = rec.get("result") or {}
    value = None
    for key in ("g", "estimate", "value", "column_sum", "dist0"):
        if key in res:
            value = res[key]
            break
    return {
        "subcommand": rec["subcommand"],
        "params": json.dumps(rec["params"], sort_keys=True),
        "seed": rec.get("seed"),
        "value": value,
        "residual": res.get("residual"),
        "std_error": res.get("std_error"),
        "status": rec.get("status", "ok"),
    }


def _expand_sweep(config):
    sub = config.get("subcommand")
    if sub not in _RUNNERS:
        raise ParameterError(f"sweep config needs a subcommand in {sorted(_RUNNERS)}")
    fixed = dict(config.get("fixed", {}))
    grid = config.get("grid", {})
    keys = list(grid)
    for combo in itertools.product(*(grid[k] for k in keys)):
        params = dict(fixed)
        params.update(zip(keys, combo))
        yield sub, params


def _run_sweep(args):
    try:
        config = json.loads(Path(args.config).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise ParameterError(f"cannot read sweep config {args.config}: {exc}") from exc
    rows, worst = [], 0
    for sub, params in _expand_sweep(config):
        try:
            rec = run(sub, params)
            rec["status"] = "ok"
        except ConvergenceError as exc:
            rec = _record(sub, params, params.get("seed"),
                          {"error": str(exc), "estimate": exc.estimate,
                           "residual": exc.residual}, 0.0)
            rec["status"] = "not_converged"
            worst = max(worst, 2)
        except ParameterError as exc:
            rec = _record(sub, params, params.get("seed"), {"error": str(exc)}, 0.0)
            rec["status"] = "parameter_error"
            worst = max(worst, 1) if worst != 2 else worst
        _dump(rec)
        rows.append(_csv_row(rec))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=CSV_COLUMNS)
            writer.writeheader()
            writer.writerows(rows)
    return worst


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="rqcdesigns",
                                     description="Convergence quantities of random local circuits.")
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    g = sub.add_parser("gap", help="TPE value and Hamiltonian gap (exact, matrix-free)")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--t", type=int, required=True)
    g.add_argument("--d", type=int, default=2)
    g.add_argument("--model", choices=("lr", "plr"), default="lr")
    g.add_argument("--tol", type=float, default=sp.DEFAULT_TOL)
    g.add_argument("--max-iter", type=int, default=sp.DEFAULT_MAX_ITER, dest="max_iter")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--json", action="store_true", help="accepted for compatibility; output is always JSON")

    f = sub.add_parser("frame", help="permutation frame quasi-orthogonality checks")
    f.add_argument("--n", type=int, required=True)
    f.add_argument("--t", type=int, required=True)
    f.add_argument("--d", type=int, default=2)

    m = sub.add_parser("mc", help="Monte Carlo frame potential")
    m.add_argument("--model", choices=mc.MODELS, default="lr")
    m.add_argument("--gates", help="JSON gate list for the gset model")
    m.add_argument("--n", type=int, required=True)
    m.add_argument("--d", type=int, default=2)
    m.add_argument("--steps", type=int, required=True)
    m.add_argument("--t", type=int, required=True)
    m.add_argument("--samples", type=int, default=1000)
    m.add_argument("--seed", type=int, default=0)
    m.add_argument("--workers", type=int, default=1)

    q = sub.add_parser("tqo", help="local indistinguishability after a parallel circuit")
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--d", type=int, default=2)
    q.add_argument("--steps", type=int, required=True)
    q.add_argument("--l", type=int, required=True)
    q.add_argument("--seed", type=int, default=0)

    b = sub.add_parser("bounds", help="evaluate an analytic bound: NAME key=value ...")
    b.add_argument("name", choices=sorted(bd.REGISTRY))
    b.add_argument("assignments", nargs="*", metavar="key=value")

    s = sub.add_parser("sweep", help="run a parameter grid from a JSON config")
    s.add_argument("--config", required=True)
    s.add_argument("--out", help="CSV file with one row per configuration")
    return parser


def _params_from_args(args) -> dict:
    p = {k: v for k, v in vars(args).items() if k not in ("subcommand", "json")}
    if args.subcommand == "bounds":
        kv = {}
        for item in p.pop("assignments"):
            if "=" not in item:
                raise ParameterError(f"bound arguments must be key=value, got {item!r}")
            key, val = item.split("=", 1)
            kv[key] = _coerce(val)
        p = {"name": p["name"], "args": kv}
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 1 if exc.code else 0
    try:
        if args.subcommand == "sweep":
            return _run_sweep(args)
        rec = run(args.subcommand, _params_from_args(args))
    except ConvergenceError as exc:
        print(f"error: {exc} (best estimate {exc.estimate}, residual {exc.residual})",
              file=sys.stderr)
        return 2
    except (ParameterError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _dump(rec)
    return 0


if __name__ == "__main__":
    sys.exit(main())
