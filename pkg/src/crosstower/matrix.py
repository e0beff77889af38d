"""Dense exact matrices over GF(p) or Q.

GF(p) entries live in float64 numpy arrays as exact integers in [0, p); every
product is reduced mod p before any value can reach 2**53, so all arithmetic
is exact while matrix products still go through BLAS.  Rational matrices use
object arrays of Fractions (small sizes only).

Rank of large GF(p) matrices uses a blocked right-looking elimination whose
trailing update is a single float64 matmul per panel.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .field import Field

# Inner dimension bound keeping float64 dot products of GF(p) entries exact.
_MAX_EXACT_INNER = 1 << 22


def _as_array(field: Field, rows: int, cols: int, fill=None) -> np.ndarray:
    if field.kind == "prime":
        return np.zeros((rows, cols), dtype=np.float64)
    a = np.empty((rows, cols), dtype=object)
    a[...] = Fraction(0) if fill is None else fill
    return a


class Matrix:
    """An exact rows x cols matrix over a fixed field."""

    __slots__ = ("field", "rows", "cols", "a")

    def __init__(self, field: Field, a: np.ndarray):
        self.field = field
        self.a = a
        self.rows, self.cols = a.shape

    # -- constructors ----------------------------------------------------

    @classmethod
    def zeros(cls, field: Field, rows: int, cols: int) -> "Matrix":
        return cls(field, _as_array(field, rows, cols))

    @classmethod
    def identity(cls, field: Field, n: int) -> "Matrix":
        m = cls.zeros(field, n, n)
        one = field.one()
        for i in range(n):
            m.a[i, i] = one
        return m

    @classmethod
    def from_rows(cls, field: Field, rows_list, cols: int | None = None) -> "Matrix":
        nrows = len(rows_list)
        ncols = len(rows_list[0]) if nrows else (cols or 0)
        if cols is not None:
            ncols = cols
        m = cls.zeros(field, nrows, ncols)
        for i, row in enumerate(rows_list):
            for j, x in enumerate(row):
                m.a[i, j] = field.normalize(x)
        return m

    def copy(self) -> "Matrix":
        return Matrix(self.field, self.a.copy())

    # -- basic structure ---------------------------------------------------

    @property
    def shape(self):
        return (self.rows, self.cols)

    def __eq__(self, other):
        if not isinstance(other, Matrix):
            return NotImplemented
        return (
            self.field == other.field
            and self.shape == other.shape
            and bool(np.array_equal(self.a, other.a))
        )

    def __hash__(self):
        raise TypeError("Matrix is not hashable")

    def is_zero(self) -> bool:
        if self.a.size == 0:
            return True
        return not np.any(self.a != 0)

    def __repr__(self):
        return f"Matrix({self.field}, {self.rows}x{self.cols})"

    def entry(self, i: int, j: int):
        return self.a[i, j]

    # -- arithmetic --------------------------------------------------------

    def _wrap(self, a: np.ndarray) -> "Matrix":
        if self.field.kind == "prime":
            a = a % self.field.p
        return Matrix(self.field, a)

    def __add__(self, other: "Matrix") -> "Matrix":
        return self._wrap(self.a + other.a)

    def __sub__(self, other: "Matrix") -> "Matrix":
        return self._wrap(self.a - other.a)

    def __neg__(self) -> "Matrix":
        return self._wrap(-self.a)

    def scale(self, c) -> "Matrix":
        c = self.field.normalize(c)
        if self.field.kind == "prime":
            return self._wrap(self.a * float(c))
        return Matrix(self.field, self.a * c)

    def __matmul__(self, other: "Matrix") -> "Matrix":
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        if self.field.kind == "prime" and self.cols > _MAX_EXACT_INNER:
            raise ValueError("inner dimension too large for exact float64 product")
        return self._wrap(self.a @ other.a)

    def transpose(self) -> "Matrix":
        return Matrix(self.field, self.a.T.copy())

    # -- block assembly ------------------------------------------------------

    @staticmethod
    def hstack(mats) -> "Matrix":
        mats = list(mats)
        return Matrix(mats[0].field, np.hstack([m.a for m in mats]))

    @staticmethod
    def vstack(mats) -> "Matrix":
        mats = list(mats)
        return Matrix(mats[0].field, np.vstack([m.a for m in mats]))

    @staticmethod
    def block(grid) -> "Matrix":
        """Assemble from a 2D grid (list of rows) of Matrix blocks."""
        rows = [Matrix.hstack(row) for row in grid]
        return Matrix.vstack(rows)

    def direct_sum(self, other: "Matrix") -> "Matrix":
        z1 = Matrix.zeros(self.field, self.rows, other.cols)
        z2 = Matrix.zeros(self.field, other.rows, self.cols)
        return Matrix.block([[self, z1], [z2, other]])

    def kron(self, other: "Matrix") -> "Matrix":
        a = np.kron(self.a, other.a)
        if a.size == 0:
            a = a.reshape(self.rows * other.rows, self.cols * other.cols)
        return self._wrap(a)

    def sub_rows(self, idx) -> "Matrix":
        return Matrix(self.field, self.a[np.asarray(idx, dtype=int), :].copy()
                      if len(idx) else _as_array(self.field, 0, self.cols))

    def sub_cols(self, idx) -> "Matrix":
        return Matrix(self.field, self.a[:, np.asarray(idx, dtype=int)].copy()
                      if len(idx) else _as_array(self.field, self.rows, 0))

    # -- elimination ---------------------------------------------------------

    def _nonzero_in(self, vec) -> np.ndarray:
        if self.field.kind == "prime":
            return np.nonzero(vec)[0]
        return np.array([i for i, x in enumerate(vec) if x != 0], dtype=int)

    def rref(self, pivot_cols: int | None = None):
        """Reduced row echelon form.

        Returns (R, pivots) where pivots is a list of (row, col).  Pivot
        search is limited to the first `pivot_cols` columns when given; row
        operations always apply to the full width.
        """
        R = self.a.copy()
        m, n = R.shape
        limit = n if pivot_cols is None else pivot_cols
        f = self.field
        p = f.p
        pivots = []
        pr = 0
        for c in range(limit):
            if pr >= m:
                break
            nz = self._nonzero_in(R[pr:, c])
            if nz.size == 0:
                continue
            t = pr + int(nz[0])
            if t != pr:
                R[[pr, t]] = R[[t, pr]]
            inv = f.inv(R[pr, c])
            if f.kind == "prime":
                R[pr] = (R[pr] * float(inv)) % p
                rows = np.nonzero(R[:, c])[0]
                rows = rows[rows != pr]
                if rows.size:
                    R[rows] = (R[rows] - np.outer(R[rows, c], R[pr])) % p
            else:
                R[pr] = R[pr] * inv
                for i in range(m):
                    if i != pr and R[i, c] != 0:
                        R[i] = R[i] - R[i, c] * R[pr]
            pivots.append((pr, c))
            pr += 1
        return Matrix(self.field, R), pivots

    def rank(self) -> int:
        if self.rows == 0 or self.cols == 0:
            return 0
        if self.field.kind == "prime" and min(self.shape) > 256:
            return _rank_modp_blocked(self.a, self.field.p)
        return len(self.rref()[1])

    def kernel_basis(self) -> "Matrix":
        """Columns form the canonical basis of the right kernel."""
        R, pivots = self.rref()
        pivot_cols = [c for (_, c) in pivots]
        free = [c for c in range(self.cols) if c not in set(pivot_cols)]
        K = Matrix.zeros(self.field, self.cols, len(free))
        one = self.field.one()
        for k, fcol in enumerate(free):
            K.a[fcol, k] = one
            for (r, c) in pivots:
                K.a[c, k] = -R.a[r, fcol] if self.field.kind == "rational" else (-R.a[r, fcol]) % self.field.p
        return K

    def column_space_basis(self) -> "Matrix":
        _, pivots = self.rref()
        return self.sub_cols([c for (_, c) in pivots])

    def solve_right(self, rhs: "Matrix") -> "Matrix":
        """Solve self @ X = rhs exactly; raises ValueError if inconsistent."""
        if rhs.rows != self.rows:
            raise ValueError("rhs row mismatch")
        aug = Matrix.hstack([self, rhs])
        R, pivots = aug.rref(pivot_cols=self.cols)
        # Any nonzero residual row outside the pivot span means inconsistency.
        piv_rows = {r for (r, _) in pivots}
        for i in range(self.rows):
            if i not in piv_rows and np.any(R.a[i, self.cols:] != 0):
                raise ValueError("inconsistent linear system")
        X = Matrix.zeros(self.field, self.cols, rhs.cols)
        for (r, c) in pivots:
            X.a[c, :] = R.a[r, self.cols:]
        return X

    def inverse(self) -> "Matrix":
        if self.rows != self.cols:
            raise ValueError("inverse of non-square matrix")
        X = self.solve_right(Matrix.identity(self.field, self.rows))
        if not (self @ X == Matrix.identity(self.field, self.rows)):
            raise ValueError("matrix is singular")
        return X

    def is_invertible(self) -> bool:
        return self.rows == self.cols and self.rank() == self.rows

    # -- serialization ---------------------------------------------------------

    def to_entry_strings(self):
        f = self.field
        return [[f.scalar_to_str(self.a[i, j]) for j in range(self.cols)]
                for i in range(self.rows)]

    @classmethod
    def from_entry_strings(cls, field: Field, rows: int, cols: int, entries) -> "Matrix":
        m = cls.zeros(field, rows, cols)
        for i in range(rows):
            for j in range(cols):
                m.a[i, j] = field.scalar_from_str(entries[i][j])
        return m


def _rank_modp_blocked(A: np.ndarray, p: int, block: int = 128) -> int:
    """Rank over GF(p) via blocked forward elimination.

    Panel columns are eliminated with row-at-a-time updates restricted to the
    panel; the trailing block is updated once per panel with a matmul, using
    multipliers recorded during panel elimination.  All values stay exact:
    entries < p < 2**15 and accumulation lengths <= block keep every dot
    product below 2**53.
    """
    A = np.asarray(A, dtype=np.float64) % p
    A = A.copy()
    m, n = A.shape
    row0 = 0
    col0 = 0
    rank = 0
    while row0 < m and col0 < n:
        b = min(block, n - col0)
        panel = slice(col0, col0 + b)
        mult = np.zeros((m - row0, b), dtype=np.float64)
        r = 0
        for j in range(col0, col0 + b):
            if row0 + r >= m:
                break
            nz = np.nonzero(A[row0 + r:, j])[0]
            if nz.size == 0:
                continue
            t = row0 + r + int(nz[0])
            if t != row0 + r:
                A[[row0 + r, t]] = A[[t, row0 + r]]
                mult[[r, t - row0]] = mult[[t - row0, r]]
            inv = float(pow(int(A[row0 + r, j]), p - 2, p))
            below = A[row0 + r + 1:, j]
            nzrows = np.nonzero(below)[0]
            if nzrows.size:
                mvals = (below[nzrows] * inv) % p
                mult[r + 1 + nzrows, r] = mvals
                A[row0 + r + 1 + nzrows, panel] = (
                    A[row0 + r + 1 + nzrows, panel]
                    - np.outer(mvals, A[row0 + r, panel])
                ) % p
            r += 1
        if r and col0 + b < n:
            trail = slice(col0 + b, n)
            T = A[row0:, trail]
            U = np.zeros((r, n - col0 - b), dtype=np.float64)
            for j in range(r):
                acc = T[j]
                if j:
                    acc = acc - mult[j, :j] @ U[:j]
                U[j] = acc % p
            if m - row0 - r > 0:
                A[row0 + r:, trail] = (T[r:] - mult[r:, :r] @ U) % p
            A[row0:row0 + r, trail] = U
        rank += r
        row0 += r
        col0 += b
    return rank


def quotient_map(subspace_basis: Matrix, ambient_dim: int):
    """Canonical surjection of an ambient coordinate space by a subspace.

    Given independent columns W spanning a subspace of k^ambient_dim, returns
    (Q, S): Q maps onto complement coordinates with kernel exactly span(W),
    and S is a section with Q @ S = identity.  Raises on dependent columns.
    """
    W = subspace_basis
    field = W.field
    if W.rows != ambient_dim:
        raise ValueError("basis rows do not match ambient dimension")
    w = W.cols
    if w == 0:
        I = Matrix.identity(field, ambient_dim)
        return I, I.copy()
    _, pivots = W.transpose().rref()
    piv_rows = [c for (_, c) in pivots]
    if len(piv_rows) != w:
        raise ValueError("dependent columns in subspace basis")
    piv_set = set(piv_rows)
    comp_rows = [i for i in range(ambient_dim) if i not in piv_set]
    Wp = W.sub_rows(piv_rows)
    Wc = W.sub_rows(comp_rows)
    M = Wp.transpose().solve_right(Wc.transpose()).transpose()  # M = Wc Wp^{-1}
    Q = Matrix.zeros(field, len(comp_rows), ambient_dim)
    one = field.one()
    for k, i in enumerate(comp_rows):
        Q.a[k, i] = one
    for k in range(len(comp_rows)):
        for l, i in enumerate(piv_rows):
            Q.a[k, i] = -M.a[k, l] if field.kind == "rational" else (-M.a[k, l]) % field.p
    S = Matrix.zeros(field, ambient_dim, len(comp_rows))
    for k, i in enumerate(comp_rows):
        S.a[i, k] = one
    return Q, S
