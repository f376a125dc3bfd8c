"""CSR matrix container, block composition, LU solves, and the mass-weighted norm.

Matrices are immutable after construction.  scipy.sparse does the heavy
lifting behind the container; accumulation and solve paths are deterministic
for identical inputs.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import NotSpdError, ShapeError, SingularMatrixError

#: Floor used in relative-residual denominators, guards b = 0.
EPS_FLOOR = 1e-300

#: Relative residual contract for solve().
SOLVE_RTOL = 1e-10

#: Fill-reducing ordering; the assembled systems have symmetric patterns.
_PERMC_SPEC = "MMD_AT_PLUS_A"


@dataclass(frozen=True)
class CsrMatrix:
    """Compressed sparse row matrix.

    Explicit zeros are kept (no drop tolerance), which preserves exact
    skew-symmetry of assembled transport operators.
    """

    nrows: int
    ncols: int
    row_offsets: np.ndarray
    col_indices: np.ndarray
    values: np.ndarray

    @classmethod
    def from_scipy(cls, m) -> "CsrMatrix":
        m = m.tocsr()
        m.sort_indices()
        return cls(m.shape[0], m.shape[1], m.indptr, m.indices, m.data)

    @cached_property
    def _sp(self) -> sp.csr_matrix:
        return sp.csr_matrix(
            (self.values, self.col_indices, self.row_offsets),
            shape=(self.nrows, self.ncols),
        )

    @property
    def nnz(self) -> int:
        return int(self.row_offsets[self.nrows])

    def matvec(self, x: np.ndarray) -> np.ndarray:
        return matvec(self, x)

    def to_dense(self) -> np.ndarray:
        return self._sp.toarray()

    def transpose(self) -> "CsrMatrix":
        return CsrMatrix.from_scipy(self._sp.T)

    def __add__(self, other: "CsrMatrix") -> "CsrMatrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ShapeError("matrix sum needs equal shapes")
        return CsrMatrix.from_scipy(self._sp + other._sp)

    def __sub__(self, other: "CsrMatrix") -> "CsrMatrix":
        if (self.nrows, self.ncols) != (other.nrows, other.ncols):
            raise ShapeError("matrix difference needs equal shapes")
        return CsrMatrix.from_scipy(self._sp - other._sp)

    def __mul__(self, alpha: float) -> "CsrMatrix":
        return CsrMatrix(
            self.nrows,
            self.ncols,
            self.row_offsets,
            self.col_indices,
            self.values * float(alpha),
        )

    __rmul__ = __mul__

    def __neg__(self) -> "CsrMatrix":
        return self * -1.0


def from_triplets(nrows, ncols, triplets) -> CsrMatrix:
    """Build a CSR matrix from (row, col, value) triplets; duplicates are summed."""
    triplets = list(triplets)
    if triplets:
        rows, cols, vals = (np.asarray(a) for a in zip(*triplets))
    else:
        rows = cols = np.zeros(0, dtype=np.int64)
        vals = np.zeros(0)
    if rows.size and (
        rows.min() < 0 or rows.max() >= nrows or cols.min() < 0 or cols.max() >= ncols
    ):
        raise IndexError("triplet index outside matrix shape")
    coo = sp.coo_matrix((vals.astype(float), (rows, cols)), shape=(nrows, ncols))
    return CsrMatrix.from_scipy(coo)


def matvec(A: CsrMatrix, x: np.ndarray) -> np.ndarray:
    """Sparse product A @ x with a fixed per-row accumulation order."""
    x = np.asarray(x, dtype=float)
    if x.shape != (A.ncols,):
        raise ShapeError(f"matvec needs length {A.ncols}, got shape {x.shape}")
    return A._sp @ x


def block2x2(A11: CsrMatrix, A12: CsrMatrix, A21: CsrMatrix, A22: CsrMatrix) -> CsrMatrix:
    """Concatenate four conformable blocks into one matrix, row-major block order."""
    if A11.nrows != A12.nrows or A21.nrows != A22.nrows:
        raise ShapeError("block rows do not conform")
    if A11.ncols != A21.ncols or A12.ncols != A22.ncols:
        raise ShapeError("block columns do not conform")
    return CsrMatrix.from_scipy(
        sp.bmat([[A11._sp, A12._sp], [A21._sp, A22._sp]], format="csr")
    )


class SparseLu:
    """Reusable LU factorization of a square scipy sparse matrix.

    Solutions honor the residual contract ||Ax-b|| / max(||b||, eps) <= 1e-10,
    with one step of iterative refinement before declaring failure.
    """

    def __init__(self, A_csc):
        self._A = A_csc
        self.n = A_csc.shape[0]
        try:
            self._lu = spla.splu(A_csc, permc_spec=_PERMC_SPEC)
        except RuntimeError as exc:  # scipy reports exact singularity this way
            raise SingularMatrixError(f"singular matrix: {exc}", pivot=0.0) from exc
        d = np.abs(self._lu.U.diagonal())
        dmax = float(d.max()) if d.size else 0.0
        dmin = float(d.min()) if d.size else 0.0
        if dmax == 0.0 or dmin <= 1e-14 * dmax:
            raise SingularMatrixError(
                f"matrix singular to working precision (pivot {dmin:.3e})",
                pivot=dmin,
            )

    def solve(self, b: np.ndarray) -> np.ndarray:
        b = np.asarray(b, dtype=float)
        if b.shape != (self.n,):
            raise ShapeError(f"rhs needs length {self.n}, got shape {b.shape}")
        x = self._lu.solve(b)
        bnorm = max(np.linalg.norm(b), EPS_FLOOR)
        res = np.linalg.norm(self._A @ x - b) / bnorm
        if res > SOLVE_RTOL:
            x = x + self._lu.solve(b - self._A @ x)
            res = np.linalg.norm(self._A @ x - b) / bnorm
            if res > SOLVE_RTOL:
                raise SingularMatrixError(
                    f"solve residual {res:.3e} exceeds contract {SOLVE_RTOL:.0e}",
                    pivot=float(np.abs(self._lu.U.diagonal()).min()),
                )
        return x


class LuFactorization(SparseLu):
    """LU factorization of a CsrMatrix."""

    def __init__(self, A: CsrMatrix):
        if A.nrows != A.ncols:
            raise ShapeError("solve needs a square matrix")
        super().__init__(A._sp.tocsc())


def factorize(A: CsrMatrix) -> LuFactorization:
    return LuFactorization(A)


def solve(A: CsrMatrix, b: np.ndarray) -> np.ndarray:
    """Solve A x = b; the result satisfies ||Ax-b|| / max(||b||, eps) <= 1e-10."""
    return LuFactorization(A).solve(b)


def m_norm(M: CsrMatrix, v: np.ndarray) -> float:
    """sqrt(v' M v): the L2 norm of the FE function with coefficients v."""
    v = np.asarray(v, dtype=float)
    q = float(v @ matvec(M, v))
    scale = float(np.abs(M.values).max(initial=0.0)) * float(v @ v)
    if q < -1e-12 * max(scale, EPS_FLOOR):
        raise NotSpdError(f"quadratic form {q:.3e} negative beyond round-off")
    return float(np.sqrt(max(q, 0.0)))
