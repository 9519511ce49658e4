"""Regularization paths over a (lambda, theta) grid and result files."""

import csv
import dataclasses
import json
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .baselines import GistConfig, solve_gist, solve_ncvxcd
from .errors import ConvergenceError
from .mm import MmConfig, solve_mm
from .penalties import Penalty, lambda_max, objective

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SOLVERS = ("mm-screen", "mm-genuine", "ncvxcd", "gist")
CSV_COLUMNS = ("schema_version", "solver", "penalty", "theta", "lambda_index",
               "lambda", "status", "objective", "kkt", "nnz", "n_iter",
               "n_updates", "time", "screened_counts", "error")


@dataclass(frozen=True)
class PathConfig:
    n_lambdas: int = 50
    lambda_decades: float = 3.0
    thetas: tuple = (0.01, 0.1, 1.0)
    tol: float = 1e-4
    solver: str = "mm-screen"

    def __post_init__(self):
        if self.n_lambdas < 1:
            raise ValueError("n_lambdas must be >= 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.solver not in SOLVERS:
            raise ValueError(f"unknown solver {self.solver!r}; expected one of {SOLVERS}")
        object.__setattr__(self, "thetas", tuple(float(t) for t in self.thetas))


@dataclass
class PathResult:
    config: dict
    records: list = field(default_factory=list)

    @property
    def totals(self):
        ok = [r for r in self.records if r["status"] == "ok"]
        return {
            "n_points": len(self.records),
            "n_failed": len(self.records) - len(ok),
            "n_updates": int(sum(r["n_updates"] for r in self.records)),
            "n_iter": int(sum(r["n_iter"] for r in self.records)),
            "time": float(sum(r["time"] for r in self.records)),
        }

    @property
    def all_solved(self):
        return all(r["status"] == "ok" for r in self.records)


def lambda_grid(lam_max, n_lambdas, decades=3.0):
    """``lam_max * 10 ** (-decades * t / (n_lambdas - 1))`` for t = 0..n_lambdas-1."""
    if n_lambdas == 1:
        return np.array([float(lam_max)])
    t = np.arange(n_lambdas)
    return lam_max * 10.0 ** (-decades * t / (n_lambdas - 1))


def _solver_fn(solver, mm_cfg, gist_cfg, tol):
    if solver in ("mm-screen", "mm-genuine"):
        cfg = dataclasses.replace(mm_cfg, outer_tol=tol,
                                  propagation=mm_cfg.propagation and solver == "mm-screen")
        return lambda prob, p, w0: solve_mm(prob, p, w0, cfg)
    if solver == "ncvxcd":
        return lambda prob, p, w0: solve_ncvxcd(prob, p, w0, tol=tol)
    return lambda prob, p, w0: solve_gist(prob, p, w0, gist_cfg, tol=tol)


def solve_point(prob, p, w0, solver, tol, mm_cfg=None, gist_cfg=None):
    """Run one solver at one penalty setting; returns ``(w, record)``.

    Solver failures are caught and reported in the record (``status``
    set to ``"error"``) together with the best iterate reached.
    """
    fn = _solver_fn(solver, mm_cfg or MmConfig(), gist_cfg or GistConfig(), tol)
    start = time.perf_counter()
    record = {"solver": solver, "penalty": p.family, "theta": p.theta, "lambda": p.lam}
    try:
        res = fn(prob, p, w0)
    except ConvergenceError as exc:
        elapsed = time.perf_counter() - start
        w = exc.w if exc.w is not None else np.array(w0, dtype=np.float64)
        logger.warning("%s failed at lambda=%g theta=%g: %s", solver, p.lam, p.theta, exc)
        record.update(status="error", error=str(exc), objective=objective(p, prob, w),
                      kkt=float(exc.criterion), nnz=int(np.count_nonzero(w)), n_iter=0,
                      n_updates=0, time=elapsed, screened_counts=[])
        return w, record
    elapsed = time.perf_counter() - start
    record.update(status="ok", error="", objective=objective(p, prob, res.w),
                  kkt=res.kkt.max_violation, nnz=int(np.count_nonzero(res.w)),
                  n_iter=res.stats.n_iter, n_updates=res.stats.n_updates, time=elapsed,
                  screened_counts=list(res.stats.screened_counts))
    return res.w, record


def run_path(prob, family, path_cfg=None, mm_cfg=None, gist_cfg=None, callback=None):
    """Sweep lambda downwards from ``lambda_max`` for every theta.

    Solutions are warm-started along lambda within one theta; each theta
    sweep starts from zero.  Failed grid points are recorded and the
    sweep continues from their best iterate.
    """
    path_cfg = path_cfg or PathConfig()
    mm_cfg = mm_cfg or MmConfig()
    gist_cfg = gist_cfg or GistConfig()
    result = PathResult(config={
        "penalty": family,
        "path": dataclasses.asdict(path_cfg),
        "mm": dataclasses.asdict(mm_cfg),
        "gist": dataclasses.asdict(gist_cfg),
        "n_samples": prob.n_samples,
        "n_features": prob.n_features,
    })
    for theta in path_cfg.thetas:
        base = Penalty(family, 1.0, theta)
        grid = lambda_grid(lambda_max(base, prob), path_cfg.n_lambdas,
                           path_cfg.lambda_decades)
        w = np.zeros(prob.n_features)
        for t, lam in enumerate(grid):
            if lam <= 0:
                raise ValueError("lambda_max is zero: the target is orthogonal to every feature")
            w, record = solve_point(prob, base.with_lambda(lam), w, path_cfg.solver,
                                    path_cfg.tol, mm_cfg, gist_cfg)
            record["lambda_index"] = t
            result.records.append(record)
            if callback is not None:
                callback(record)
    return result


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def emit_results(result, fmt, path, extra=None):
    """Write a :class:`PathResult` as one JSON document or one CSV row per point."""
    try:
        if fmt == "json":
            doc = {"schema_version": SCHEMA_VERSION, "config": result.config,
                   "totals": result.totals, "records": result.records}
            if extra:
                doc.update(extra)
            with open(path, "w") as fh:
                json.dump(_jsonable(doc), fh, indent=1)
                fh.write("\n")
        elif fmt == "csv":
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(CSV_COLUMNS)
                for rec in result.records:
                    row = dict(rec, schema_version=SCHEMA_VERSION,
                               screened_counts=";".join(map(str, rec["screened_counts"])))
                    writer.writerow([_csv_cell(row.get(col, "")) for col in CSV_COLUMNS])
        else:
            raise ValueError(f"unknown format {fmt!r}; expected 'json' or 'csv'")
    except OSError as exc:
        raise OSError(f"cannot write results to {path}: {exc}") from exc


def _csv_cell(value):
    if isinstance(value, float):
        return repr(value)
    return value
