"""Command-line entry point: ``hilfer-bvp criteria|solve|zeta-scan|stability``.

Exit codes: 0 success, 1 numeric non-convergence, 2 invalid problem,
3 configuration error. Errors are written to stderr as one JSON object.
Outputs contain no timings or other run-dependent data, so identical
inputs give byte-identical outputs.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from typing import Any, Callable, Sequence

import numpy as np

from .bvp import MODE_ALIASES, MODES
from .config import RunConfig, Variant, load_config
from .criteria import CriteriaReport, full_report, zeta
from .errors import ConfigError, HilferBVPError, NotContractive, NotConverged
from .scenarios import BUILTIN_SCENARIOS, load_scenario
from .solver import SolveResult, picard_solve
from .stability import Perturbation, uh_check

__all__ = ["main", "build_parser", "EXIT_OK", "EXIT_NOT_CONVERGED", "EXIT_INVALID_PROBLEM", "EXIT_CONFIG"]

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_INVALID_PROBLEM = 2
EXIT_CONFIG = 3

THREADS_ENV = "HILFER_BVP_THREADS"


# ---------------------------------------------------------------------------
# serialisation helpers


def _clean(obj: Any) -> Any:
    """JSON-safe copy: non-finite floats become null, numpy scalars become floats."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def dumps(obj: Any) -> str:
    return json.dumps(_clean(obj), indent=2, allow_nan=False) + "\n"


def csv_text(header: Sequence[str], columns: Sequence[np.ndarray]) -> str:
    """Comma-separated rows with 17 significant digits."""
    lines = [",".join(header)]
    for row in zip(*columns):
        lines.append(",".join(f"{float(x):.17g}" for x in row))
    return "\n".join(lines) + "\n"


def _write(path: str | None, text: str) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV)
    if raw is None:
        return max(1, min(os.cpu_count() or 1, 8))
    try:
        n = int(raw)
    except ValueError:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}", field=THREADS_ENV) from None
    if n < 1:
        raise ConfigError(f"{THREADS_ENV} must be a positive integer, got {raw!r}", field=THREADS_ENV)
    return n


def _map(fn: Callable, items: list) -> list:
    """Ordered map, parallel over at most ``HILFER_BVP_THREADS`` workers."""
    workers = min(_threads(), len(items))
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


# ---------------------------------------------------------------------------
# commands


def _report_dict(variant: Variant, rep: CriteriaReport) -> dict:
    d = rep.to_dict()
    d["verdicts"] = {k: {"holds": v.holds, "reason": v.reason, "details": v.details} for k, v in rep.verdicts.items()}
    return {"label": variant.label, **d}


def cmd_criteria(cfg: RunConfig, out: str | None) -> int:
    def one(v: Variant) -> dict:
        r_range = cfg.zeta_range or (0.0, v.spec.T)
        return _report_dict(v, full_report(v.spec, cfg.reference or None, r_range))

    reports = _map(one, cfg.variants)
    _write(out, dumps({"name": cfg.name, "reports": reports} if cfg.is_sweep else reports[0]))
    return EXIT_OK


def _solve(cfg: RunConfig, v: Variant) -> SolveResult:
    return picard_solve(v.spec, tol=cfg.tol, max_iter=cfg.max_iter, n=v.n)


def cmd_solve(cfg: RunConfig, out: str | None) -> int:
    results = _map(lambda v: _solve(cfg, v), cfg.variants)
    if cfg.is_sweep:
        if out is None:
            raise ConfigError("a sweep writes one CSV per variant; pass --out <directory>", field="--out")
        os.makedirs(out, exist_ok=True)
        summary = []
        for v, res in zip(cfg.variants, results):
            fname = f"{v.label}.csv"
            _write(os.path.join(out, fname), csv_text(("t", "u"), (res.u.ts, res.u.values)))
            summary.append({"label": v.label, "file": fname, **res.summary()})
        _write(os.path.join(out, "summary.json"), dumps({"name": cfg.name, "runs": summary}))
        sys.stdout.write(dumps({"name": cfg.name, "runs": summary}))
    else:
        res = results[0]
        text = csv_text(("t", "u"), (res.u.ts, res.u.values))
        if out is None:
            sys.stdout.write(text)
        else:
            _write(out, text)
            sys.stdout.write(dumps({"label": cfg.variants[0].label, **res.summary()}))
    bad = [r for r in results if not r.converged]
    if bad:
        first = bad[0]
        last = first.sup_diffs[-1] if first.sup_diffs else math.nan
        sys.stderr.write(dumps(NotConverged(first.applications, last).to_dict()))
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_zeta_scan(cfg: RunConfig, out: str | None) -> int:
    spec = cfg.spec
    rep = full_report(spec)
    z = zeta(spec, rep)
    lo, hi = cfg.zeta_range or (0.0, spec.T)
    r = np.linspace(lo, hi, cfg.zeta_samples)
    _write(out, csv_text(("r", "zeta"), (r, z(r))))
    return EXIT_OK


def cmd_stability(cfg: RunConfig, out: str | None) -> int:
    v = cfg.variants[0]
    rep = full_report(v.spec)
    if rep.banach_value is None or not rep.banach_value < 1.0:
        raise NotContractive(f"Ulam-Hyers check needs a contraction constant < 1, got {rep.banach_value!r}")
    base = _solve(cfg, v)
    if not base.converged:
        raise NotConverged(base.applications, base.sup_diffs[-1] if base.sup_diffs else math.nan)

    def one(eps: float):
        pert = Perturbation.from_source(cfg.stability_z, eps)
        return uh_check(v.spec, pert, cfg.tol, cfg.max_iter, v.n, baseline=base, report=rep)

    rows = _map(one, list(cfg.stability_eps))
    ref_cf = cfg.reference.get("c_f")
    table = []
    for r in rows:
        row = r.to_dict()
        if ref_cf is not None:
            row["reference_bound"] = ref_cf * r.eps
            row["passed_reference_bound"] = bool(r.sup_diff <= ref_cf * r.eps + 2 * cfg.tol)
        table.append(row)
    scaling = []
    for a, b in zip(rows, rows[1:]):
        if a.sup_diff > 0 and b.sup_diff > 0 and b.eps > 0:
            ratio = (a.sup_diff / b.sup_diff) / (a.eps / b.eps)
            scaling.append({"eps": [a.eps, b.eps], "ratio_over_eps_ratio": ratio, "linear": bool(0.5 <= ratio <= 2.0)})
    doc = {
        "label": v.label,
        "z": cfg.stability_z,
        "c_f": rep.c_f,
        "banach_value": rep.banach_value,
        "tol": cfg.tol,
        "experiments": table,
        "scaling": scaling,
    }
    _write(out, dumps(doc))
    if not all(r.converged for r in rows):
        return EXIT_NOT_CONVERGED
    return EXIT_OK


COMMANDS: dict[str, Callable[[RunConfig, str | None], int]] = {
    "criteria": cmd_criteria,
    "solve": cmd_solve,
    "zeta-scan": cmd_zeta_scan,
    "stability": cmd_stability,
}


# ---------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hilfer-bvp", description="Sequential ψ-Hilfer boundary value problem toolkit")
    p.add_argument("command", choices=sorted(COMMANDS))
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("--config", help="path to a JSON run configuration")
    src.add_argument("--scenario", choices=sorted(BUILTIN_SCENARIOS), help="built-in configuration")
    p.add_argument("--out", help="output file (a directory for sweeps); default stdout")
    p.add_argument("--grid-n", type=int, help="override the grid size")
    p.add_argument("--mode", choices=(*MODES, *MODE_ALIASES), help="override the fidelity mode")
    return p


def _exit_code(exc: HilferBVPError) -> int:
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, NotConverged):
        return EXIT_NOT_CONVERGED
    return EXIT_INVALID_PROBLEM


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        if exc.code in (0, None):
            return EXIT_OK
        sys.stderr.write(dumps({"error": "ConfigError", "message": "invalid command line", "field": None, "line": None}))
        return EXIT_CONFIG
    try:
        if args.grid_n is not None and args.grid_n < 4:
            raise ConfigError("--grid-n must be at least 4", field="--grid-n")
        overrides = {"grid_n": args.grid_n, "mode": args.mode}
        cfg = load_config(args.config, **overrides) if args.config else load_scenario(args.scenario, **overrides)
        return COMMANDS[args.command](cfg, args.out)
    except HilferBVPError as exc:
        sys.stderr.write(dumps(exc.to_dict()))
        return _exit_code(exc)
    except OSError as exc:
        sys.stderr.write(dumps({"error": "ConfigError", "message": f"cannot write output: {exc}", "field": "--out", "line": None}))
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
