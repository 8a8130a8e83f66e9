"""Sparse direct solution of the multiplier-frozen saddle-point subproblem.

Backed by SuperLU (``scipy.sparse.linalg.splu``) with partial pivoting.  The
factorisation is reused across Uzawa iterations since only the right-hand side
changes.  The pressure zero-mean row and column couple to every pressure dof,
so they are eliminated by bordering instead of being handed to SuperLU.
"""

from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .spaces import PressureField, VelocityField

BACKWARD_ERROR_TOL = 1e-10


class SingularMatrixError(RuntimeError):
    """The subproblem matrix could not be factorised."""


def backward_error(A, x, b, anorm=None) -> float:
    """Normwise backward error ``|Ax - b|_inf / (|A|_inf |x|_inf + |b|_inf)``."""
    r = A @ x - b
    if anorm is None:
        anorm = spla.norm(A, np.inf)
    denom = anorm * np.abs(x).max(initial=0.0) + np.abs(b).max(initial=0.0)
    if denom == 0.0:
        return 0.0
    return float(np.abs(r).max() / denom)


class Factorization:
    """LU factorisation of a square sparse matrix, optionally bordered.

    With ``border=k`` the last ``k`` rows and columns (dense constraint
    couplings) are eliminated through a small Schur complement so that they do
    not spoil the fill-reducing ordering of the sparse block.
    """

    def __init__(self, A, border: int = 0):
        A = sp.csc_matrix(A)
        if A.shape[0] != A.shape[1]:
            raise ValueError("matrix must be square, got {}".format(A.shape))
        self.A = A
        self.anorm = spla.norm(A, np.inf)
        self.border = border
        n = A.shape[0] - border
        K = A[:n, :n] if border else A
        try:
            self.lu = spla.splu(sp.csc_matrix(K), permc_spec="COLAMD", diag_pivot_thresh=1.0)
        except RuntimeError as exc:
            raise SingularMatrixError("{} ({})".format(exc, _locate_singularity(K))) from exc
        if border:
            self.E = A[:n, n:].toarray()
            self.F = A[n:, :n].tocsr()
            self.KE = self.lu.solve(self.E)
            schur = A[n:, n:].toarray() - self.F @ self.KE
            if np.linalg.cond(schur) > 1e14:
                raise SingularMatrixError("singular constraint border at rows {}..{}".format(n, n + border - 1))
            self.schur = schur

    def solve(self, b: np.ndarray) -> np.ndarray:
        if b.shape[0] != self.A.shape[0]:
            raise ValueError("dimension mismatch: matrix {} vs rhs {}".format(self.A.shape[0], b.shape[0]))
        if self.border:
            n = self.A.shape[0] - self.border
            y = self.lu.solve(b[:n])
            c = np.linalg.solve(self.schur, b[n:] - self.F @ y)
            x = np.concatenate([y - self.KE @ c, c])
        else:
            x = self.lu.solve(b)
        if not np.all(np.isfinite(x)):
            raise SingularMatrixError("non-finite solution; matrix is numerically singular")
        return x


def _locate_singularity(A) -> str:
    A = sp.csr_matrix(A)
    empty_rows = np.flatnonzero(np.diff(A.indptr) == 0)
    if len(empty_rows):
        return "empty row at index {}".format(empty_rows[0])
    empty_cols = np.flatnonzero(np.diff(sp.csc_matrix(A).indptr) == 0)
    if len(empty_cols):
        return "empty column at index {}".format(empty_cols[0])
    return "zero pivot encountered during elimination"


def solve_direct(system, factorization: Factorization | None = None):
    """Solve ``system.matrix @ x = system.rhs``.

    Returns ``(VelocityField, PressureField, mean_multiplier)``.  Raises
    :class:`SingularMatrixError` when factorisation fails and ``ArithmeticError``
    if the backward error exceeds ``BACKWARD_ERROR_TOL``.
    """
    A = system.matrix
    b = system.rhs
    if b is None or A.shape != (system.spaces.size, system.spaces.size) or b.shape[0] != A.shape[0]:
        raise ValueError("dimension mismatch between system matrix, rhs and spaces")
    lu = factorization if factorization is not None else Factorization(A, border=1)
    x = lu.solve(b)
    err = backward_error(A, x, b, lu.anorm)
    if err > BACKWARD_ERROR_TOL:
        raise ArithmeticError("backward error {:.3e} exceeds {:.0e}".format(err, BACKWARD_ERROR_TOL))
    u, p, c = system.spaces.split(x)
    return VelocityField(system.mesh, u), PressureField(system.mesh, p), c


def solve_cg(A, b, tol=1e-12, maxiter=None) -> np.ndarray:
    """Conjugate gradients for symmetric positive definite systems (cross-checks)."""
    x, info = spla.cg(sp.csr_matrix(A), b, rtol=tol, atol=0.0, maxiter=maxiter)
    if info != 0:
        raise ArithmeticError("CG did not converge (info={})".format(info))
    return x


def write_coo(A, path) -> None:
    """Dump a sparse matrix as ``row col value`` lines."""
    A = sp.coo_matrix(A)
    order = np.lexsort((A.col, A.row))
    with open(path, "w") as fh:
        for i, j, v in zip(A.row[order], A.col[order], A.data[order]):
            fh.write("{} {} {:.17g}\n".format(i, j, v))
