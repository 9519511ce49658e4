"""Proximal weighted Lasso with duality-gap safe screening.

The subproblem solved here is::

    P(w) = 0.5 ||y - Xw||^2 + 1/(2 alpha) ||w - w'||^2 + sum_j lam_j |w_j|

with dual::

    D(s, v) = -0.5 ||s||^2 - alpha/2 ||v||^2 + s^T y - v^T w'
    s.t. |x_j^T s - v_j| <= lam_j  for all j.

At the optimum ``s* = y - Xw*`` and ``alpha v* = w* - w'``, and any ``j``
with ``|x_j^T s* - v*_j| < lam_j`` has ``w*_j = 0``.
"""

import dataclasses
from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ConvergenceError

GAP_FLOOR = -1e-10


@dataclass(frozen=True)
class PwlSpec:
    """One subproblem: weights ``Lambda``, proximal center ``w'``, strength ``alpha``."""

    weights: np.ndarray
    center: np.ndarray
    alpha: float

    def __post_init__(self):
        weights = np.ascontiguousarray(self.weights, dtype=np.float64).ravel()
        center = np.ascontiguousarray(self.center, dtype=np.float64).ravel()
        if weights.shape != center.shape:
            raise ValueError("weights and center must have the same length")
        if not np.all(np.isfinite(weights)) or np.any(weights < 0):
            raise ValueError("weights must be finite and non-negative")
        if not (np.isfinite(self.alpha) and self.alpha > 0):
            raise ValueError(f"alpha must be positive and finite, got {self.alpha}")
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "alpha", float(self.alpha))


@dataclass(frozen=True)
class DualPoint:
    s: np.ndarray
    v: np.ndarray


@dataclass(frozen=True)
class GapCertificate:
    """Feasible dual point with its duality gap and optional screening scores.

    ``correlations`` caches ``X^T (y - Xw)`` at the primal point the
    certificate was built from, and ``dual_corr`` holds ``x_j^T s - v_j``.
    """

    dual: DualPoint
    gap: float
    rho_max: float
    primal: float
    correlations: np.ndarray
    dual_corr: np.ndarray
    scores: np.ndarray = None


@dataclass
class PwlResult:
    w: np.ndarray
    residual: np.ndarray
    certificate: GapCertificate
    screened: np.ndarray
    n_updates: int
    n_epochs: int


def _check_dims(prob, spec, w):
    d = prob.n_features
    if spec.weights.shape[0] != d or np.shape(w) != (d,):
        raise ValueError(
            f"dimension mismatch: problem has {d} features, weights "
            f"{spec.weights.shape[0]}, w {np.shape(w)}")


def primal_objective(prob, spec, w, residual=None):
    w = np.asarray(w, dtype=np.float64)
    _check_dims(prob, spec, w)
    if residual is None:
        residual = prob.residual(w)
    dev = w - spec.center
    return (0.5 * float(residual @ residual) + 0.5 / spec.alpha * float(dev @ dev)
            + float(spec.weights @ np.abs(w)))


def dual_objective(prob, spec, dp):
    viol = np.abs(prob.rmatvec(dp.s) - dp.v) - spec.weights
    if viol.max() > 1e-6:
        raise ValueError(f"dual point infeasible (max violation {viol.max():.3e})")
    return (-0.5 * float(dp.s @ dp.s) - 0.5 * spec.alpha * float(dp.v @ dp.v)
            + float(dp.s @ prob.y) - float(dp.v @ spec.center))


def _column(prob, j):
    if prob.is_sparse:
        X = prob.X
        lo, hi = X.indptr[j], X.indptr[j + 1]
        return X.indices[lo:hi], X.data[lo:hi]
    return slice(None), prob.X[:, j]


def cd_update(prob, spec, w, residual, j):
    """Exact minimization of the subproblem along coordinate ``j``.

    ``w`` and ``residual`` are updated in place; returns ``(w_j, residual)``.
    """
    idx, col = _column(prob, j)
    inv_alpha = 1.0 / spec.alpha
    old = w[j]
    t = float(col @ residual[idx]) + prob.col_norms_sq[j] * old + spec.center[j] * inv_alpha
    new = np.sign(t) * max(abs(t) - spec.weights[j], 0.0) / (prob.col_norms_sq[j] + inv_alpha)
    if new != old:
        residual[idx] += (old - new) * col
        w[j] = new
    return new, residual


@njit(cache=True)
def _epoch_dense(X, w, r, norms_sq, weights, center, inv_alpha, active):
    n = X.shape[0]
    for j in active:
        old = w[j]
        t = 0.0
        for i in range(n):
            t += X[i, j] * r[i]
        t += norms_sq[j] * old + center[j] * inv_alpha
        shrunk = abs(t) - weights[j]
        new = 0.0
        if shrunk > 0.0:
            new = np.sign(t) * shrunk / (norms_sq[j] + inv_alpha)
        if new != old:
            delta = old - new
            for i in range(n):
                r[i] += delta * X[i, j]
            w[j] = new
    return active.shape[0]


@njit(cache=True)
def _epoch_sparse(data, indices, indptr, w, r, norms_sq, weights, center,
                  inv_alpha, active):
    for j in active:
        old = w[j]
        t = 0.0
        for k in range(indptr[j], indptr[j + 1]):
            t += data[k] * r[indices[k]]
        t += norms_sq[j] * old + center[j] * inv_alpha
        shrunk = abs(t) - weights[j]
        new = 0.0
        if shrunk > 0.0:
            new = np.sign(t) * shrunk / (norms_sq[j] + inv_alpha)
        if new != old:
            delta = old - new
            for k in range(indptr[j], indptr[j + 1]):
                r[indices[k]] += delta * data[k]
            w[j] = new
    return active.shape[0]


def cd_epoch(prob, spec, w, residual, active):
    """One cyclic pass over ``active`` (natural order); returns the update count."""
    active = np.ascontiguousarray(active, dtype=np.int64)
    inv_alpha = 1.0 / spec.alpha
    if prob.is_sparse:
        X = prob.X
        return int(_epoch_sparse(X.data, X.indices, X.indptr, w, residual,
                                 prob.col_norms_sq, spec.weights, spec.center,
                                 inv_alpha, active))
    return int(_epoch_dense(prob.X, w, residual, prob.col_norms_sq, spec.weights,
                            spec.center, inv_alpha, active))


def dual_point(prob, spec, w, residual, correlations=None):
    """Rescale the residual into a feasible dual point and compute the gap.

    Coordinates with ``lam_j = 0`` get ``v_j = x_j^T s`` so that their
    constraint holds with equality.
    """
    w = np.asarray(w, dtype=np.float64)
    _check_dims(prob, spec, w)
    if correlations is None:
        correlations = prob.rmatvec(residual)
    lam = spec.weights
    dev = (w - spec.center) / spec.alpha
    pos = lam > 0
    rho = np.zeros_like(lam)
    rho[pos] = np.abs(correlations[pos] - dev[pos]) / lam[pos]
    rho_max = max(1.0, float(rho.max()))

    s = residual / rho_max
    xts = correlations / rho_max
    v = np.where(pos, dev / rho_max, xts)
    dual_corr = np.where(pos, (correlations - dev) / rho_max, 0.0)

    # P - D regrouped into three non-negative terms to avoid cancellation:
    # 0.5||r - s||^2 + alpha/2 ||v - dev||^2 + sum_j (lam_j |w_j| - w_j (x_j^T s - v_j))
    ds = residual - s
    dv = v - dev
    gap = (0.5 * float(ds @ ds) + 0.5 * spec.alpha * float(dv @ dv)
           + float(lam @ np.abs(w) - w @ dual_corr))
    primal = primal_objective(prob, spec, w, residual)
    return GapCertificate(DualPoint(s, v), gap, rho_max, primal, correlations, dual_corr)


def screening_radius(gap, col_norms, alpha, paper_radius=False):
    """Radius added to ``|x_j^T s - v_j|`` in the safe test.

    The default ``sqrt(2G) ||x_j|| + sqrt(2G / alpha)`` follows from
    ``||s - s*||^2 + alpha ||v - v*||^2 <= 2G``; ``paper_radius`` selects
    the smaller ``sqrt(2G) (||x_j|| + 1/alpha)`` variant.
    """
    root = np.sqrt(2.0 * max(gap, 0.0))
    if paper_radius:
        return root * (col_norms + 1.0 / alpha)
    return root * col_norms + root / np.sqrt(alpha)


def screen_scores(prob, spec, cert, paper_radius=False):
    if cert.gap < GAP_FLOOR:
        raise ValueError(f"negative duality gap {cert.gap:.3e}: broken dual bookkeeping")
    scores = np.abs(cert.dual_corr) + screening_radius(
        cert.gap, prob.col_norms, spec.alpha, paper_radius)
    return dataclasses.replace(cert, scores=scores)


def zero_screened(prob, spec, w, residual, candidates, screened):
    """Fix newly screened coordinates at 0.

    A candidate whose current value is non-zero is only zeroed when that
    does not increase the primal objective, so the solver stays monotone;
    otherwise it is left unscreened.  Returns True if ``w`` changed.
    """
    changed = False
    inv_alpha = 1.0 / spec.alpha
    for j in np.flatnonzero(candidates):
        wj = w[j]
        if wj != 0.0:
            idx, col = _column(prob, j)
            cj = float(col @ residual[idx])
            delta = (wj * cj + 0.5 * prob.col_norms_sq[j] * wj * wj
                     + 0.5 * inv_alpha * (2.0 * wj * spec.center[j] - wj * wj)
                     - spec.weights[j] * abs(wj))
            if delta > 0.0:
                continue
            residual[idx] += wj * col
            w[j] = 0.0
            changed = True
        screened[j] = True
    return changed


def solve_pwl(prob, spec, w0=None, screened=None, tol=1e-4, screen_every=5,
              screening=True, paper_radius=False, max_epochs=100_000, callback=None):
    """Cyclic coordinate descent with periodic gap-safe screening.

    The duality gap (and, with ``screening``, the screening test) is
    evaluated after the first epoch and then every ``screen_every``
    epochs.  Stops once the gap is at most ``tol``.

    ``callback``, if given, receives a dict with keys ``epoch``, ``gap``,
    ``n_screened``, ``n_updates`` and ``certificate`` at every check.
    """
    d = prob.n_features
    w = np.zeros(d) if w0 is None else np.array(w0, dtype=np.float64)
    _check_dims(prob, spec, w)
    screened = np.zeros(d, dtype=bool) if screened is None else np.array(screened, dtype=bool)
    if np.any(w[screened] != 0):
        raise ValueError("warm start must be zero on screened coordinates")
    if screen_every < 1 or tol <= 0:
        raise ValueError("screen_every must be >= 1 and tol > 0")

    residual = prob.residual(w)
    n_updates = 0
    epoch = 0
    cert = None
    while True:
        n_updates += cd_epoch(prob, spec, w, residual, np.flatnonzero(~screened))
        epoch += 1
        if (epoch - 1) % screen_every == 0:
            # refresh from scratch to cancel drift of the incremental updates
            residual = prob.residual(w)
            cert = dual_point(prob, spec, w, residual)
            if screening:
                cert = screen_scores(prob, spec, cert, paper_radius)
                new = (cert.scores < spec.weights) & ~screened
                if zero_screened(prob, spec, w, residual, new, screened):
                    residual = prob.residual(w)
                    cert = screen_scores(prob, spec, dual_point(prob, spec, w, residual),
                                         paper_radius)
            if callback is not None:
                callback({"epoch": epoch, "gap": cert.gap,
                          "n_screened": int(screened.sum()), "n_updates": n_updates,
                          "certificate": cert})
            if cert.gap <= tol:
                break
        if epoch >= max_epochs:
            gap = cert.gap if cert is not None else np.inf
            raise ConvergenceError(
                f"PWL did not reach gap {tol:g} in {max_epochs} epochs (gap {gap:.3e})",
                w=w, criterion=gap)
    return PwlResult(w, residual, cert, screened, n_updates, epoch)
