import numpy as np
import pytest

from ncvxscreen.problem import Problem
from ncvxscreen.pwl import PwlSpec

_ACCEPTANCE_LINES = []


@pytest.fixture
def report():
    """Record a one-line pass/fail verdict for the terminal summary."""
    def _report(name, passed, detail=""):
        line = f"[{'PASS' if passed else 'FAIL'}] {name}: {detail}"
        _ACCEPTANCE_LINES.append(line)
        print(line)
        return passed
    return _report


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def random_pwl(rng, n=30, d=60, alpha=1e9, zero_frac=0.1, scale=(0.05, 0.6)):
    """Random instance with weights drawn relative to max |x_j^T y|."""
    X = rng.standard_normal((n, d))
    y = rng.standard_normal(n) * 2.0
    prob = Problem(X, y)
    top = np.max(np.abs(X.T @ y))
    weights = rng.uniform(*scale, size=d) * top
    weights[rng.random(d) < zero_frac] = 0.0
    center = rng.standard_normal(d)
    return prob, PwlSpec(weights, center, alpha)


def weighted_lasso_reference(X, y, weights, center=None, alpha=None, tol=1e-15,
                             max_epochs=200_000):
    """Plain-Python cyclic CD, independent of the compiled kernels.

    Without ``alpha`` the proximal term is dropped.  Stops when no
    coordinate moves by more than ``tol`` in an epoch.
    """
    X = np.asarray(X, dtype=float)
    n, d = X.shape
    inv_alpha = 0.0 if alpha is None else 1.0 / alpha
    center = np.zeros(d) if center is None else center
    w = np.zeros(d)
    r = y.astype(float).copy()
    norms = (X ** 2).sum(axis=0)
    for _ in range(max_epochs):
        biggest = 0.0
        for j in range(d):
            t = X[:, j] @ r + norms[j] * w[j] + inv_alpha * center[j]
            new = np.sign(t) * max(abs(t) - weights[j], 0.0) / (norms[j] + inv_alpha)
            if new != w[j]:
                r += (w[j] - new) * X[:, j]
                biggest = max(biggest, abs(new - w[j]))
                w[j] = new
        if biggest <= tol:
            break
    return w


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
