"""Dense matrix primitives used throughout the pipeline.

Matrices are plain ``numpy.ndarray`` objects.  ``vec`` follows the
column-stacking convention, so ``vec(A @ X @ B) == kron(B.T, A) @ vec(X)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

DEFAULT_RTOL = 1e-8


def _as_matrix(M) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    if M.ndim == 0:
        return M.reshape(1, 1)
    if M.ndim == 1:
        return M.reshape(-1, 1)
    if M.ndim != 2:
        raise ValueError(f"expected a matrix, got array with ndim={M.ndim}")
    return M


def vec(M) -> np.ndarray:
    """Stack the columns of ``M`` into one vector."""
    return _as_matrix(M).reshape(-1, order="F")


def unvec(v, rows: int, cols: int) -> np.ndarray:
    """Inverse of :func:`vec`."""
    return np.asarray(v, dtype=float).reshape((rows, cols), order="F")


def col(M) -> list[np.ndarray]:
    """Return the ordered list of columns of ``M``."""
    M = _as_matrix(M)
    return [M[:, j].copy() for j in range(M.shape[1])]


def kron(A, B) -> np.ndarray:
    return np.kron(_as_matrix(A), _as_matrix(B))


def kron_sum(N, M) -> np.ndarray:
    """Kronecker sum ``N (+) M = N (x) I + I (x) M``."""
    N = _as_matrix(N)
    M = _as_matrix(M)
    if N.shape[0] != N.shape[1] or M.shape[0] != M.shape[1]:
        raise ValueError("kron_sum requires square matrices")
    return np.kron(N, np.eye(M.shape[0])) + np.kron(np.eye(N.shape[0]), M)


@dataclass(frozen=True)
class LinearSolveReport:
    solution: np.ndarray
    residual_norm: float
    rank_estimate: int


class MinNormSolver:
    """Minimum-norm least-squares solver for a fixed matrix.

    The SVD of ``A`` is computed once; :meth:`solve` then returns the
    pseudo-inverse solution for any right-hand side.  Singular values below
    ``rtol * s_max`` are treated as zero.
    """

    def __init__(self, A, rtol: float = 1e-12):
        A = _as_matrix(A)
        self.A = A
        self.shape = A.shape
        if A.size == 0:
            self._pinv = np.zeros((A.shape[1], A.shape[0]))
            self.rank = 0
            return
        U, s, Vt = np.linalg.svd(A, full_matrices=False)
        cutoff = rtol * (s[0] if s.size else 0.0)
        keep = s > cutoff
        self.rank = int(np.count_nonzero(keep))
        self._s = s
        s_inv = np.zeros_like(s)
        s_inv[keep] = 1.0 / s[keep]
        self._pinv = (Vt.T * s_inv) @ U.T

    @property
    def pinv(self) -> np.ndarray:
        return self._pinv

    def left_null_space(self, rtol: float = 1e-10) -> np.ndarray:
        """Orthonormal basis (as columns) of the complement of ``Im A``."""
        rows = self.shape[0]
        if self.A.size == 0:
            return np.eye(rows)
        U_full = np.linalg.svd(self.A, full_matrices=True)[0]
        r = int(np.count_nonzero(self._s > rtol * self._s[0]))
        return U_full[:, r:]

    def solve(self, B) -> LinearSolveReport:
        B = np.asarray(B, dtype=float)
        if B.shape[0] != self.shape[0]:
            raise ValueError(f"row mismatch: A has {self.shape[0]} rows, B has {B.shape[0]}")
        X = self._pinv @ B
        residual = float(np.linalg.norm(self.A @ X - B))
        return LinearSolveReport(solution=X, residual_norm=residual, rank_estimate=self.rank)


def solve_min_norm(A, B) -> LinearSolveReport:
    """Minimum-Frobenius-norm ``X`` with ``A @ X ~= B`` (pseudo-inverse semantics)."""
    return MinNormSolver(A).solve(B)


def image_contained(B, A, tol: float = DEFAULT_RTOL) -> bool:
    """True iff every column of ``B`` lies (numerically) in the column space of ``A``."""
    A = _as_matrix(A)
    B = _as_matrix(B)
    if A.shape[0] != B.shape[0]:
        raise ValueError("A and B must have the same number of rows")
    return image_contained_with(MinNormSolver(A), B, tol)


def image_contained_with(solver: MinNormSolver, B, tol: float = DEFAULT_RTOL) -> bool:
    B = _as_matrix(B)
    X = solver.pinv @ B
    res = np.linalg.norm(solver.A @ X - B, axis=0)
    scale = np.maximum(1.0, np.linalg.norm(B, axis=0))
    return bool(np.all(res <= tol * scale))


# Pade coefficients b_0..b_13 and theta_m bounds from Higham (2005).
_PADE_COEFFS = {
    3: (120.0, 60.0, 12.0, 1.0),
    5: (30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0),
    7: (17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0),
    9: (17643225600.0, 8821612800.0, 2075673600.0, 302702400.0, 30270240.0,
        2162160.0, 110880.0, 3960.0, 90.0, 1.0),
    13: (64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
         1187353796428800.0, 129060195264000.0, 10559470521600.0,
         670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
         960960.0, 16380.0, 182.0, 1.0),
}
_THETA = {3: 1.495585217958292e-2, 5: 2.539398330063230e-1,
          7: 9.504178996162932e-1, 9: 2.097847961257068e0,
          13: 5.371920351148152e0}


def _pade(A: np.ndarray, m: int) -> np.ndarray:
    b = _PADE_COEFFS[m]
    n = A.shape[0]
    ident = np.eye(n)
    if m == 13:
        A2 = A @ A
        A4 = A2 @ A2
        A6 = A2 @ A4
        U = A @ (A6 @ (b[13] * A6 + b[11] * A4 + b[9] * A2)
                 + b[7] * A6 + b[5] * A4 + b[3] * A2 + b[1] * ident)
        V = (A6 @ (b[12] * A6 + b[10] * A4 + b[8] * A2)
             + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * ident)
    else:
        A2 = A @ A
        powers = [ident, A2]
        for _ in range(2, (m + 1) // 2):
            powers.append(powers[-1] @ A2)
        U = np.zeros_like(A)
        V = np.zeros_like(A)
        for j in range(m, 0, -2):
            U += b[j] * powers[j // 2]
        U = A @ U
        for j in range(m - 1, -1, -2):
            V += b[j] * powers[j // 2]
    return np.linalg.solve(V - U, V + U)


def expm(A) -> np.ndarray:
    """Matrix exponential by scaling and squaring with a Pade approximant."""
    A = _as_matrix(A)
    if A.shape[0] != A.shape[1]:
        raise ValueError("expm requires a square matrix")
    if A.shape[0] == 0:
        return A.copy()
    norm1 = float(np.linalg.norm(A, 1))
    for m in (3, 5, 7, 9):
        if norm1 <= _THETA[m]:
            return _pade(A, m)
    s = 0
    if norm1 > _THETA[13]:
        s = max(0, int(np.ceil(np.log2(norm1 / _THETA[13]))))
    F = _pade(A / 2.0**s, 13)
    for _ in range(s):
        F = F @ F
    return F
