"""Dataset loaders and the synthetic toy-problem generator."""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp

from .problem import Problem


@dataclass(frozen=True)
class ToyConfig:
    n: int = 50
    d: int = 100
    p: int = 5
    sigma: float = 2.0
    seed: int = 0

    def __post_init__(self):
        if self.n < 1 or self.d < 1:
            raise ValueError("n and d must be positive")
        # p = 0 is accepted as a degenerate all-zero ground truth
        if not 0 <= self.p <= self.d:
            raise ValueError(f"p must satisfy 0 <= p <= d, got p={self.p}, d={self.d}")
        if self.sigma < 0:
            raise ValueError("sigma must be non-negative")


def generate_toy(cfg):
    """Gaussian regression problem with ``p`` active features.

    X has i.i.d. N(0, 4) entries; active coefficients are N(0, 1) draws
    pushed away from zero by 0.1 in the direction of their sign; the
    noise is N(0, sigma^2).  Uses numpy's PCG64 generator seeded with
    ``cfg.seed``, so outputs are reproducible across platforms.

    Returns ``(problem, w_true)``.
    """
    rng = np.random.default_rng(cfg.seed)
    X = rng.normal(0.0, 2.0, size=(cfg.n, cfg.d))
    w_true = np.zeros(cfg.d)
    support = rng.choice(cfg.d, size=cfg.p, replace=False)
    draws = rng.standard_normal(cfg.p)
    w_true[support] = draws + 0.1 * np.sign(draws)
    noise = rng.normal(0.0, cfg.sigma, size=cfg.n) if cfg.sigma > 0 else np.zeros(cfg.n)
    y = X @ w_true + noise
    return Problem(X, y), w_true


def load_dense_csv(path):
    """Read a header-less CSV whose last column is the target."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                values = [float(cell) for cell in row]
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed line ({exc})") from None
            if width is None:
                width = len(values)
                if width < 2:
                    raise ValueError(f"{path}:{lineno}: need at least one feature and a target")
            elif len(values) != width:
                raise ValueError(
                    f"{path}:{lineno}: expected {width} columns, found {len(values)}")
            rows.append(values)
    if not rows:
        raise ValueError(f"{path}: empty file")
    arr = np.array(rows)
    return Problem(arr[:, :-1], arr[:, -1])


def save_dense_csv(path, X, y):
    X = np.asarray(X, dtype=np.float64)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        for row, target in zip(X, np.asarray(y, dtype=np.float64)):
            writer.writerow([repr(float(v)) for v in row] + [repr(float(target))])


def load_libsvm(path, n_features=None):
    """Read ``<label> <idx>:<val> ...`` lines into a CSC-backed problem.

    Indices are 1-based in the file.  The number of features is inferred
    from the largest index unless ``n_features`` is given.
    """
    labels, rows, cols, vals = [], [], [], []
    with open(path) as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            row = len(labels)
            seen = set()
            try:
                labels.append(float(tokens[0]))
                for tok in tokens[1:]:
                    idx, val = tok.split(":")
                    j = int(idx) - 1
                    if j < 0:
                        raise ValueError(f"feature index {idx} must be >= 1")
                    if j in seen:
                        raise ValueError(f"duplicate feature index {idx}")
                    seen.add(j)
                    rows.append(row)
                    cols.append(j)
                    vals.append(float(val))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed line ({exc})") from None
    if not labels:
        raise ValueError(f"{path}: empty file")
    d = max(cols, default=-1) + 1
    if n_features is not None:
        if n_features < d:
            raise ValueError(f"{path}: found feature index {d} > n_features={n_features}")
        d = n_features
    X = sp.csc_matrix((vals, (rows, cols)), shape=(len(labels), max(d, 1)))
    return Problem(X, np.array(labels))


def save_libsvm(path, X, y):
    X = sp.csr_matrix(X)
    with open(path, "w") as fh:
        for i, target in enumerate(np.asarray(y, dtype=np.float64).tolist()):
            lo, hi = X.indptr[i], X.indptr[i + 1]
            items = " ".join(f"{j + 1}:{v!r}" for j, v in
                             zip(X.indices[lo:hi], X.data[lo:hi].tolist()))
            fh.write(f"{target!r} {items}".rstrip() + "\n")


def load_problem(path, fmt=None, normalize=False):
    """Load by extension (``.csv`` dense, anything else libsvm) or explicit ``fmt``."""
    path = Path(path)
    fmt = fmt or ("csv" if path.suffix.lower() == ".csv" else "libsvm")
    prob = load_dense_csv(path) if fmt == "csv" else load_libsvm(path)
    return prob.normalized() if normalize else prob
