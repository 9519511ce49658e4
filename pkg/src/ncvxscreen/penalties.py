"""Non-convex sparsity penalties: log-sum, MCP and SCAD.

Each penalty ``r(|w|)`` is concave and non-decreasing in ``|w|``.  The
scalar kernels below are compiled with numba so that the coordinate
descent loops in :mod:`ncvxscreen.pwl` and :mod:`ncvxscreen.baselines`
can call them directly; the public functions wrap them for numpy input.
"""

from dataclasses import dataclass

import numpy as np
from numba import njit

LOGSUM, MCP, SCAD = 0, 1, 2
FAMILIES = {"logsum": LOGSUM, "mcp": MCP, "scad": SCAD}
_THETA_MIN = {LOGSUM: 0.0, MCP: 1.0, SCAD: 2.0}


@dataclass(frozen=True)
class Penalty:
    """Penalty family with regularization strength ``lam`` and shape ``theta``.

    ``theta`` must exceed 0 for log-sum, 1 for MCP and 2 for SCAD.
    """

    family: str
    lam: float
    theta: float

    def __post_init__(self):
        fam = self.family.lower()
        if fam not in FAMILIES:
            raise ValueError(
                f"unknown penalty {self.family!r}; expected one of {sorted(FAMILIES)}")
        object.__setattr__(self, "family", fam)
        object.__setattr__(self, "lam", float(self.lam))
        object.__setattr__(self, "theta", float(self.theta))
        if not (np.isfinite(self.lam) and self.lam > 0):
            raise ValueError(f"lam must be positive and finite, got {self.lam}")
        bound = _THETA_MIN[self.code]
        if not (np.isfinite(self.theta) and self.theta > bound):
            raise ValueError(
                f"theta must be > {bound:g} for {fam}, got {self.theta}")

    @property
    def code(self):
        return FAMILIES[self.family]

    @property
    def params(self):
        return self.code, self.lam, self.theta

    def with_lambda(self, lam):
        return Penalty(self.family, lam, self.theta)

    @property
    def zero_radius(self):
        """Half-width of the subdifferential at 0."""
        return _derivative(self.code, self.lam, self.theta, 0.0)


@dataclass(frozen=True)
class KktResidual:
    max_violation: float
    per_coordinate: np.ndarray


@njit(cache=True)
def _value(fam, lam, theta, u):
    u = abs(u)
    if fam == LOGSUM:
        return lam * np.log1p(u / theta)
    if fam == MCP:
        if u <= lam * theta:
            return lam * u - u * u / (2.0 * theta)
        return theta * lam * lam / 2.0
    if u <= lam:
        return lam * u
    if u <= lam * theta:
        return (-u * u + 2.0 * theta * lam * u - lam * lam) / (2.0 * (theta - 1.0))
    return lam * lam * (1.0 + theta) / 2.0


@njit(cache=True)
def _derivative(fam, lam, theta, u):
    # right-derivative at u = 0, i.e. the upper end of the subdifferential
    u = abs(u)
    if fam == LOGSUM:
        return lam / (theta + u)
    if fam == MCP:
        if u <= lam * theta:
            return lam - u / theta
        return 0.0
    if u <= lam:
        return lam
    if u <= lam * theta:
        return (theta * lam - u) / (theta - 1.0)
    return 0.0


@njit(cache=True)
def _prox_objective(fam, lam, theta, a, step, u):
    return 0.5 * (u - a) ** 2 + step * _value(fam, lam, theta, u)


@njit(cache=True)
def _consider(fam, lam, theta, a, step, u, lo, hi, best_u, best_h):
    if u < lo or u > hi or not np.isfinite(u):
        return best_u, best_h
    h = _prox_objective(fam, lam, theta, a, step, u)
    if h < best_h:
        return u, h
    return best_u, best_h


@njit(cache=True)
def _prox_abs(fam, lam, theta, a, step):
    """Minimize 0.5 (u - a)^2 + step r(u) over u >= 0 by candidate enumeration."""
    inf = np.inf
    best_u = 0.0
    best_h = _prox_objective(fam, lam, theta, a, step, 0.0)
    if fam == LOGSUM:
        # (u - a)(theta + u) + step lam = 0
        disc = (theta + a) ** 2 - 4.0 * step * lam
        if disc >= 0.0:
            sq = np.sqrt(disc)
            best_u, best_h = _consider(fam, lam, theta, a, step,
                                       0.5 * (a - theta + sq), 0.0, inf, best_u, best_h)
            best_u, best_h = _consider(fam, lam, theta, a, step,
                                       0.5 * (a - theta - sq), 0.0, inf, best_u, best_h)
    elif fam == MCP:
        kink = lam * theta
        best_u, best_h = _consider(fam, lam, theta, a, step, kink, 0.0, inf, best_u, best_h)
        coef = 1.0 - step / theta
        if coef != 0.0:
            best_u, best_h = _consider(fam, lam, theta, a, step,
                                       (a - step * lam) / coef, 0.0, kink, best_u, best_h)
        best_u, best_h = _consider(fam, lam, theta, a, step, a, kink, inf, best_u, best_h)
    else:
        kink = lam * theta
        best_u, best_h = _consider(fam, lam, theta, a, step, lam, 0.0, inf, best_u, best_h)
        best_u, best_h = _consider(fam, lam, theta, a, step, kink, 0.0, inf, best_u, best_h)
        best_u, best_h = _consider(fam, lam, theta, a, step, a - step * lam, 0.0, lam,
                                   best_u, best_h)
        coef = 1.0 - step / (theta - 1.0)
        if coef != 0.0:
            u = (a - step * theta * lam / (theta - 1.0)) / coef
            best_u, best_h = _consider(fam, lam, theta, a, step, u, lam, kink, best_u, best_h)
        best_u, best_h = _consider(fam, lam, theta, a, step, a, kink, inf, best_u, best_h)
    return best_u


@njit(cache=True)
def _prox(fam, lam, theta, z, step):
    u = _prox_abs(fam, lam, theta, abs(z), step)
    return u if z >= 0 else -u


@njit(cache=True)
def _value_arr(fam, lam, theta, w):
    out = np.empty(w.shape[0])
    for i in range(w.shape[0]):
        out[i] = _value(fam, lam, theta, w[i])
    return out


@njit(cache=True)
def _derivative_arr(fam, lam, theta, w):
    out = np.empty(w.shape[0])
    for i in range(w.shape[0]):
        out[i] = _derivative(fam, lam, theta, w[i])
    return out


@njit(cache=True)
def _prox_arr(fam, lam, theta, z, step):
    out = np.empty(z.shape[0])
    for i in range(z.shape[0]):
        out[i] = _prox(fam, lam, theta, z[i], step)
    return out


def _apply(kernel, p, w):
    arr = np.asarray(w, dtype=np.float64)
    out = kernel(p.code, p.lam, p.theta, np.ascontiguousarray(arr.ravel()))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def value(p, w):
    """Penalty value ``r(|w|)``, elementwise."""
    return _apply(_value_arr, p, w)


def derivative(p, w):
    """Slope ``r'(|w|)``; at 0 this is the right-derivative."""
    return _apply(_derivative_arr, p, w)


def penalty_sum(p, w):
    return float(np.sum(value(p, w)))


def prox_penalty(p, z, step):
    """Proximal map ``argmin_w 0.5 (w - z)^2 + step * r(|w|)``, elementwise."""
    if not step > 0:
        raise ValueError(f"step must be positive, got {step}")
    arr = np.asarray(z, dtype=np.float64)
    out = _prox_arr(p.code, p.lam, p.theta, np.ascontiguousarray(arr.ravel()), float(step))
    if arr.ndim == 0:
        return float(out[0])
    return out.reshape(arr.shape)


def lambda_max(p, prob):
    """Smallest ``lam`` for which ``w = 0`` is a critical point.

    The value depends on the family only through the subdifferential at 0:
    ``max_j |x_j^T y|`` for MCP and SCAD, ``theta`` times that for log-sum.
    """
    if prob.n_features == 0:
        raise ValueError("lambda_max of an empty problem is undefined")
    corr = np.max(np.abs(prob.rmatvec(prob.y)))
    if p.code == LOGSUM:
        return p.theta * corr
    return corr


def objective(p, prob, w, residual=None):
    """Non-convex objective ``0.5 ||y - Xw||^2 + sum_j r(|w_j|)``."""
    if residual is None:
        residual = prob.residual(w)
    return 0.5 * float(residual @ residual) + penalty_sum(p, w)


def kkt_residual(p, prob, w, correlations=None):
    """Per-coordinate violation of the first-order (Fermat) conditions.

    ``correlations`` may pass a precomputed ``X^T (y - Xw)``.
    """
    w = np.asarray(w, dtype=np.float64)
    if correlations is None:
        correlations = prob.rmatvec(prob.residual(w))
    slope = derivative(p, w)
    viol = np.where(
        w != 0,
        np.abs(-correlations + slope * np.sign(w)),
        np.maximum(np.abs(correlations) - slope, 0.0),
    )
    return KktResidual(float(viol.max()) if viol.size else 0.0, viol)
