"""Cyclic Jacobi eigensolver for small dense symmetric matrices."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class EigenConvergenceError(ArithmeticError):
    """Jacobi sweeps did not reduce the off-diagonal mass below tolerance."""


@dataclass(frozen=True, eq=False)
class SymMatrix:
    """Symmetric matrix stored as its packed upper triangle (row-major)."""

    dim: int
    entries: np.ndarray

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dimension must be at least 1")
        packed = np.array(self.entries, dtype=float)
        if packed.shape != (self.dim * (self.dim + 1) // 2,):
            raise ValueError("packed storage has the wrong length")
        packed.setflags(write=False)
        object.__setattr__(self, "entries", packed)

    @classmethod
    def from_dense(cls, dense) -> "SymMatrix":
        """Pack the upper triangle of ``dense`` (the lower one is ignored)."""
        dense = np.asarray(dense, dtype=float)
        n = dense.shape[0]
        if dense.shape != (n, n):
            raise ValueError("matrix must be square")
        return cls(n, dense[np.triu_indices(n)])

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim))
        out[np.triu_indices(self.dim)] = self.entries
        return out + np.triu(out, 1).T

    def __getitem__(self, ij):
        i, j = sorted(ij)
        return float(self.entries[i * self.dim - i * (i - 1) // 2 + (j - i)])


def _off_norm(a: np.ndarray) -> float:
    return float(np.linalg.norm(a - np.diag(np.diag(a))))


def jacobi_eigs(A: SymMatrix, tol: float = 1e-12, max_sweeps: int = 64):
    """Eigenvalues (ascending) and orthonormal eigenvectors (columns) of ``A``.

    Cyclic-by-rows Jacobi rotations until the off-diagonal Frobenius norm is
    below ``tol * ||A||_F``.
    """
    a = A.to_dense()
    n = A.dim
    v = np.eye(n)
    target = tol * float(np.linalg.norm(a))
    for _ in range(max_sweeps + 1):
        if _off_norm(a) <= target:
            order = np.argsort(np.diag(a), kind="stable")
            return np.diag(a)[order].copy(), v[:, order].copy()
        for p in range(n - 1):
            for r in range(p + 1, n):
                apr = a[p, r]
                if abs(apr) < 1e-300:
                    continue
                theta = (a[r, r] - a[p, p]) / (2.0 * apr)
                t = math.copysign(1.0, theta) / (abs(theta) + math.hypot(1.0, theta))
                c = 1.0 / math.hypot(1.0, t)
                s = t * c
                rot_p, rot_r = a[:, p].copy(), a[:, r].copy()
                a[:, p], a[:, r] = c * rot_p - s * rot_r, s * rot_p + c * rot_r
                rot_p, rot_r = a[p, :].copy(), a[r, :].copy()
                a[p, :], a[r, :] = c * rot_p - s * rot_r, s * rot_p + c * rot_r
                a[p, r] = a[r, p] = 0.0
                vp, vr = v[:, p].copy(), v[:, r].copy()
                v[:, p], v[:, r] = c * vp - s * vr, s * vp + c * vr
    raise EigenConvergenceError(f"no convergence after {max_sweeps} sweeps")
