"""Non-screening competitors: GIST and direct non-convex coordinate descent."""

import time
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError
from .penalties import _prox, kkt_residual, objective, prox_penalty
from .results import SolveResult, SolveStats


@dataclass(frozen=True)
class GistConfig:
    step_init: float = 1.0
    bb_steps: bool = True
    eta: float = 2.0
    sigma: float = 0.1
    max_iters: int = 100_000
    min_curvature: float = 1e-30
    max_curvature: float = 1e30

    def __post_init__(self):
        if not self.eta > 1:
            raise ValueError("eta must be > 1")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if not self.step_init > 0 or self.max_iters < 1:
            raise ValueError("step_init must be positive and max_iters >= 1")


def solve_gist(prob, p, w0=None, cfg=None, tol=1e-4, callback=None):
    """Proximal gradient with BB-initialized, monotone backtracking steps.

    A trial step ``1/t`` is accepted once
    ``F(w+) <= F(w) - sigma/2 * t * ||w+ - w||^2``.
    """
    cfg = cfg or GistConfig()
    d = prob.n_features
    w = np.zeros(d) if w0 is None else np.array(w0, dtype=np.float64)
    stats = SolveStats()
    start = time.perf_counter()

    residual = prob.residual(w)
    corr = prob.rmatvec(residual)
    F = objective(p, prob, w, residual)
    kkt = kkt_residual(p, prob, w, corr)
    t = 1.0 / cfg.step_init
    it = 0
    while kkt.max_violation > tol:
        if it >= cfg.max_iters:
            stats.time = time.perf_counter() - start
            raise ConvergenceError(
                f"GIST did not reach KKT tolerance {tol:g} in {cfg.max_iters} iterations",
                w=w, criterion=kkt.max_violation)
        # gradient of the smooth part is -corr
        while True:
            w_new = prox_penalty(p, w + corr / t, 1.0 / t)
            stats.n_updates += d
            step = w_new - w
            res_new = prob.residual(w_new)
            F_new = objective(p, prob, w_new, res_new)
            if F_new <= F - 0.5 * cfg.sigma * t * float(step @ step) or t >= cfg.max_curvature:
                break
            t *= cfg.eta
        corr_new = prob.rmatvec(res_new)
        if cfg.bb_steps:
            ss = float(step @ step)
            # curvature along the step: <dw, d(grad)> / <dw, dw>
            t = (float(step @ (corr - corr_new)) / ss) if ss > 0 else t
            t = min(max(t, cfg.min_curvature), cfg.max_curvature)
        w, residual, corr, F = w_new, res_new, corr_new, F_new
        kkt = kkt_residual(p, prob, w, corr)
        it += 1
        record = {"iter": it, "objective": F, "kkt": kkt.max_violation,
                  "n_updates": stats.n_updates}
        stats.trace.append(record)
        if callback is not None:
            callback(record)
    stats.n_iter = it
    stats.converged = True
    stats.time = time.perf_counter() - start
    return SolveResult(w, kkt, stats)


@njit(cache=True)
def _ncvx_epoch_dense(X, w, r, norms_sq, fam, lam, theta):
    n = X.shape[0]
    for j in range(X.shape[1]):
        old = w[j]
        if norms_sq[j] == 0.0:
            new = 0.0
        else:
            c = 0.0
            for i in range(n):
                c += X[i, j] * r[i]
            new = _prox(fam, lam, theta, old + c / norms_sq[j], 1.0 / norms_sq[j])
        if new != old:
            delta = old - new
            for i in range(n):
                r[i] += delta * X[i, j]
            w[j] = new
    return X.shape[1]


@njit(cache=True)
def _ncvx_epoch_sparse(data, indices, indptr, w, r, norms_sq, fam, lam, theta):
    d = indptr.shape[0] - 1
    for j in range(d):
        old = w[j]
        if norms_sq[j] == 0.0:
            new = 0.0
        else:
            c = 0.0
            for k in range(indptr[j], indptr[j + 1]):
                c += data[k] * r[indices[k]]
            new = _prox(fam, lam, theta, old + c / norms_sq[j], 1.0 / norms_sq[j])
        if new != old:
            delta = old - new
            for k in range(indptr[j], indptr[j + 1]):
                r[indices[k]] += delta * data[k]
            w[j] = new
    return d


def ncvx_epoch(prob, p, w, residual):
    """One cyclic pass of exact coordinate minimization of the non-convex objective."""
    fam, lam, theta = p.params
    if prob.is_sparse:
        X = prob.X
        return int(_ncvx_epoch_sparse(X.data, X.indices, X.indptr, w, residual,
                                      prob.col_norms_sq, fam, lam, theta))
    return int(_ncvx_epoch_dense(prob.X, w, residual, prob.col_norms_sq, fam, lam, theta))


def solve_ncvxcd(prob, p, w0=None, tol=1e-4, max_epochs=100_000, callback=None):
    """Cyclic coordinate descent applied directly to the non-convex objective.

    Each coordinate is set to the proximal point of the penalty at its
    partial least-squares solution, which is its exact minimizer.
    """
    d = prob.n_features
    w = np.zeros(d) if w0 is None else np.array(w0, dtype=np.float64)
    stats = SolveStats()
    start = time.perf_counter()
    residual = prob.residual(w)
    epoch = 0
    while True:
        stats.n_updates += ncvx_epoch(prob, p, w, residual)
        epoch += 1
        residual = prob.residual(w)
        kkt = kkt_residual(p, prob, w, prob.rmatvec(residual))
        record = {"iter": epoch, "objective": objective(p, prob, w, residual),
                  "kkt": kkt.max_violation, "n_updates": stats.n_updates}
        stats.trace.append(record)
        if callback is not None:
            callback(record)
        if kkt.max_violation <= tol:
            break
        if epoch >= max_epochs:
            stats.time = time.perf_counter() - start
            raise ConvergenceError(
                f"ncvxCD did not reach KKT tolerance {tol:g} in {max_epochs} epochs",
                w=w, criterion=kkt.max_violation)
    stats.n_iter = epoch
    stats.converged = True
    stats.time = time.perf_counter() - start
    return SolveResult(w, kkt, stats)
