"""Majorization-minimization outer loop with screening propagation.

Each outer iteration linearizes the concave penalty at the current
iterate ``w^k`` and solves the proximal weighted Lasso with weights
``r'(|w^k_j|)`` and center ``w^k``.  Before the inner solve, coordinates
are screened either with the exact gap-safe test or, between exact
rescreens, with a cheap bound that reuses the last exact scores.
"""

import logging
import time
from dataclasses import dataclass

import numpy as np

from .errors import ConvergenceError
from .penalties import derivative, kkt_residual, objective
from .pwl import (PwlSpec, dual_point, screen_scores, solve_pwl,
                  zero_screened)
from .results import SolveResult, SolveStats

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class MmConfig:
    alpha: float = 1e9
    outer_tol: float = 1e-4
    inner_tol: float = 1e-4
    exact_rescreen_every: int = 10
    inner_screen_every: int = 5
    max_outer_iters: int = 10_000
    max_inner_epochs: int = 100_000
    # screening=False disables every screening test; propagation=False keeps
    # the inner test only (the "genuine" MM variant)
    screening: bool = True
    propagation: bool = True
    paper_radius: bool = False

    def __post_init__(self):
        for name in ("alpha", "outer_tol", "inner_tol"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        for name in ("exact_rescreen_every", "inner_screen_every",
                     "max_outer_iters", "max_inner_epochs"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")


@dataclass(frozen=True)
class ScreenReference:
    scores_ref: np.ndarray
    weights_ref: np.ndarray
    dual_ref: object
    gap_ref: float


@dataclass(frozen=True)
class PropagationBounds:
    a: float
    b: float
    c: np.ndarray


def mm_weights(p, w):
    """Weights of the majorizing weighted-l1 term: ``r'(|w_j|)``."""
    return derivative(p, np.abs(np.asarray(w, dtype=np.float64)))


def make_reference(prob, spec, w, residual, correlations=None, paper_radius=False):
    cert = screen_scores(prob, spec, dual_point(prob, spec, w, residual, correlations),
                         paper_radius)
    return ScreenReference(cert.scores, spec.weights, cert.dual, cert.gap), cert


def propagation_bounds(prob, ref, w, residual, spec, correlations=None):
    """Exact distances between the reference dual point and the new one.

    The new dual point is built at the same primal ``w`` for the new
    weights in ``spec``; with ``correlations`` cached this needs no
    product with ``X``.
    """
    cert = dual_point(prob, spec, w, residual, correlations)
    a = float(np.linalg.norm(cert.dual.s - ref.dual_ref.s))
    b = abs(cert.gap - ref.gap_ref)
    c = np.abs(cert.dual.v - ref.dual_ref.v)
    return PropagationBounds(a, b, c), cert


def propagate_screen(prob, ref, pb, weights, alpha, paper_radius=False):
    """Screening test for the new weights from the reference scores alone."""
    root = np.sqrt(2.0 * pb.b)
    tail = root / alpha if paper_radius else root / np.sqrt(alpha)
    bound = ref.scores_ref + prob.col_norms * (pb.a + root) + pb.c + tail
    return bound < weights


def solve_mm(prob, p, w0=None, cfg=None, callback=None):
    """Minimize ``0.5||y - Xw||^2 + sum_j r(|w_j|)`` to a critical point.

    Stops when the KKT residual is at most ``cfg.outer_tol``.  Returns a
    :class:`SolveResult`; ``stats.trace`` holds one record per outer
    iteration (also passed to ``callback``).
    """
    cfg = cfg or MmConfig()
    d = prob.n_features
    w = np.zeros(d) if w0 is None else np.array(w0, dtype=np.float64)
    if w.shape != (d,) or not np.all(np.isfinite(w)):
        raise ValueError("w0 must be a finite vector with one entry per feature")
    stats = SolveStats()
    start = time.perf_counter()

    residual = prob.residual(w)
    correlations = prob.rmatvec(residual)
    ref = None
    prev_weights = None
    for k in range(cfg.max_outer_iters):
        weights = mm_weights(p, w)
        spec = PwlSpec(weights, w.copy(), cfg.alpha)
        screened = np.zeros(d, dtype=bool)
        n_pre = 0
        if cfg.screening and cfg.propagation:
            if ref is None or k % cfg.exact_rescreen_every == 0:
                ref, cert = make_reference(prob, spec, w, residual, correlations,
                                           cfg.paper_radius)
                candidates = cert.scores < weights
            else:
                pb, _ = propagation_bounds(prob, ref, w, residual, spec, correlations)
                candidates = propagate_screen(prob, ref, pb, weights, cfg.alpha,
                                              cfg.paper_radius)
            zero_screened(prob, spec, w, residual, candidates, screened)
            n_pre = int(screened.sum())

        inner = solve_pwl(prob, spec, w, screened, tol=cfg.inner_tol,
                          screen_every=cfg.inner_screen_every,
                          screening=cfg.screening, paper_radius=cfg.paper_radius,
                          max_epochs=cfg.max_inner_epochs)
        w, residual = inner.w, inner.residual
        correlations = inner.certificate.correlations
        kkt = kkt_residual(p, prob, w, correlations)

        stats.n_iter = k + 1
        stats.n_updates += inner.n_updates
        stats.screened_counts.append(int(inner.screened.sum()))
        record = {
            "iter": k + 1,
            "objective": objective(p, prob, w, residual),
            "kkt": kkt.max_violation,
            "inner_gap": inner.certificate.gap,
            "n_prescreened": n_pre,
            "n_screened": int(inner.screened.sum()),
            "n_updates": inner.n_updates,
            "weight_change": (np.inf if prev_weights is None
                              else float(np.max(np.abs(weights - prev_weights)))),
        }
        prev_weights = weights
        stats.trace.append(record)
        logger.debug("MM iter %d: F=%.10g kkt=%.3e screened=%d/%d updates=%d",
                     k + 1, record["objective"], kkt.max_violation,
                     record["n_screened"], d, inner.n_updates)
        if callback is not None:
            callback(record)
        if kkt.max_violation <= cfg.outer_tol:
            stats.converged = True
            break
    stats.time = time.perf_counter() - start
    if not stats.converged:
        raise ConvergenceError(
            f"MM did not reach KKT tolerance {cfg.outer_tol:g} in "
            f"{cfg.max_outer_iters} outer iterations (residual {kkt.max_violation:.3e})",
            w=w, criterion=kkt.max_violation)
    return SolveResult(w, kkt, stats)
