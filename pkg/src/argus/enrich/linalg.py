"""Dense LU factorization with partial pivoting."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from argus.errors import SingularSystem


@dataclass(frozen=True)
class LU:
    lu: np.ndarray  # unit-lower L below the diagonal, U on and above
    perm: np.ndarray  # row i of PA is row perm[i] of A

    def solve(self, b: np.ndarray) -> np.ndarray:
        """Solve ``A x = b`` for a vector or for each column of a matrix."""
        b = np.asarray(b, dtype=float)
        x = b[self.perm].copy()
        n = self.lu.shape[0]
        for i in range(1, n):
            x[i] -= self.lu[i, :i] @ x[:i]
        for i in range(n - 1, -1, -1):
            x[i] -= self.lu[i, i + 1 :] @ x[i + 1 :]
            x[i] /= self.lu[i, i]
        return x


def lu_factor(a: np.ndarray, rtol: float | None = None) -> LU:
    """Doolittle elimination; raises :class:`SingularSystem` naming the pivot column
    when the best available pivot is negligible relative to the matrix scale."""
    m = np.array(a, dtype=float)
    n = m.shape[0]
    if m.shape != (n, n):
        raise ValueError("matrix must be square")
    scale = np.abs(m).max() if m.size else 0.0
    tol = (rtol if rtol is not None else n * np.finfo(float).eps) * scale
    perm = np.arange(n)
    for k in range(n):
        p = k + int(np.argmax(np.abs(m[k:, k])))
        if abs(m[p, k]) <= tol:
            raise SingularSystem(f"matrix is singular to working precision at pivot column {k}")
        if p != k:
            m[[k, p]] = m[[p, k]]
            perm[[k, p]] = perm[[p, k]]
        m[k + 1 :, k] /= m[k, k]
        m[k + 1 :, k + 1 :] -= np.outer(m[k + 1 :, k], m[k, k + 1 :])
    return LU(m, perm)
