"""Least-squares design container shared by every solver."""

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp


@dataclass(frozen=True)
class Problem:
    """Design matrix ``X`` (n x d), target ``y`` and cached column norms.

    ``X`` is stored either as a Fortran-ordered dense array or as a CSC
    sparse matrix so that column access is contiguous.  Instances are
    treated as read-only once built.
    """

    X: object
    y: np.ndarray
    col_norms_sq: np.ndarray = field(init=False)
    col_norms: np.ndarray = field(init=False)

    def __post_init__(self):
        X = self.X
        if sp.issparse(X):
            X = sp.csc_matrix(X, dtype=np.float64)
            X.sort_indices()
            norms_sq = np.asarray(X.multiply(X).sum(axis=0)).ravel()
        else:
            X = np.asfortranarray(X, dtype=np.float64)
            if X.ndim != 2:
                raise ValueError("X must be a 2-d array")
            norms_sq = np.einsum("ij,ij->j", X, X)
        y = np.ascontiguousarray(self.y, dtype=np.float64).ravel()
        n, d = X.shape
        if n < 1 or d < 1:
            raise ValueError(f"empty problem: X has shape {X.shape}")
        if y.shape[0] != n:
            raise ValueError(f"y has length {y.shape[0]}, expected {n}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "col_norms_sq", norms_sq)
        object.__setattr__(self, "col_norms", np.sqrt(norms_sq))

    @property
    def n_samples(self):
        return self.X.shape[0]

    @property
    def n_features(self):
        return self.X.shape[1]

    @property
    def is_sparse(self):
        return sp.issparse(self.X)

    def matvec(self, w):
        return np.asarray(self.X @ w).ravel()

    def rmatvec(self, r):
        return np.asarray(self.X.T @ r).ravel()

    def residual(self, w):
        return self.y - self.matvec(w)

    def normalized(self):
        """Return a copy whose non-zero columns have unit Euclidean norm."""
        scale = np.where(self.col_norms > 0, self.col_norms, 1.0)
        if self.is_sparse:
            X = self.X @ sp.diags(1.0 / scale)
        else:
            X = self.X / scale
        return Problem(X, self.y.copy())
