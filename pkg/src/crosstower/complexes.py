"""Bounded chain complexes over an exact field, with the homological toolkit.

Complexes are supported on a finite degree range; differentials are dense
exact matrices.  All constructions are pure: nothing mutates a complex after
construction, and d∘d = 0 is asserted when a complex is built.
"""

from __future__ import annotations

import math

from .field import Field
from .matrix import Matrix, quotient_map


class ChainComplex:
    """A bounded complex: dims per degree and differentials d_n: C_n -> C_{n-1}."""

    __slots__ = ("field", "lo", "hi", "_dims", "_d", "_homology_cache")

    def __init__(self, field: Field, dims: dict, diffs: dict, validate: bool = True):
        self.field = field
        support = sorted(n for n, dim in dims.items() if dim > 0)
        if support:
            self.lo, self.hi = support[0], support[-1]
            self._dims = {n: dims.get(n, 0) for n in range(self.lo, self.hi + 1)}
        else:
            self.lo, self.hi = 0, -1
            self._dims = {}
        self._d = {}
        for n in range(self.lo + 1, self.hi + 1):
            rows, cols = self.dim(n - 1), self.dim(n)
            m = diffs.get(n)
            if m is None:
                m = Matrix.zeros(field, rows, cols)
            if m.shape != (rows, cols):
                raise ValueError(f"differential at degree {n} has shape {m.shape}, want {(rows, cols)}")
            self._d[n] = m
        self._homology_cache = {}
        if validate:
            self._check_dd()

    def _check_dd(self):
        for n in range(self.lo + 2, self.hi + 1):
            if not (self._d[n - 1] @ self._d[n]).is_zero():
                raise ValueError(f"d∘d != 0 at degree {n}")

    # -- structure ---------------------------------------------------------

    def dim(self, n: int) -> int:
        return self._dims.get(n, 0)

    def degrees(self):
        return range(self.lo, self.hi + 1)

    def dims_table(self) -> dict:
        return dict(self._dims)

    def total_dim(self) -> int:
        return sum(self._dims.values())

    def d(self, n: int) -> Matrix:
        m = self._d.get(n)
        if m is None:
            return Matrix.zeros(self.field, self.dim(n - 1), self.dim(n))
        return m

    def is_zero_complex(self) -> bool:
        return self.total_dim() == 0

    def __eq__(self, other):
        if not isinstance(other, ChainComplex):
            return NotImplemented
        if self.field != other.field or self._dims != other._dims:
            return False
        return all(self.d(n) == other.d(n) for n in range(self.lo + 1, self.hi + 1))

    def __repr__(self):
        return f"ChainComplex({self.field}, dims={self._dims})"

    # -- constructors --------------------------------------------------------

    @staticmethod
    def zero(field: Field) -> "ChainComplex":
        return ChainComplex(field, {}, {})

    @staticmethod
    def single(field: Field, degree: int = 0, dim: int = 1) -> "ChainComplex":
        return ChainComplex(field, {degree: dim}, {})

    def shift(self, k: int) -> "ChainComplex":
        """Suspension: (C[k])_n = C_{n-k}, differential scaled by (-1)^k."""
        dims = {n + k: d for n, d in self._dims.items()}
        sign = self.field.normalize(-1) if k % 2 else None
        diffs = {}
        for n, m in self._d.items():
            diffs[n + k] = m.scale(sign) if sign is not None else m
        return ChainComplex(self.field, dims, diffs, validate=False)

    # -- homology ----------------------------------------------------------

    def _homology_data(self, n: int):
        """Cycle basis K, class projection Q (cycle coords -> H), section S,
        and representative matrix Rep = K @ S for degree n."""
        if n in self._homology_cache:
            return self._homology_cache[n]
        cn = self.dim(n)
        dn = self.d(n)
        K = dn.kernel_basis() if self.dim(n - 1) else Matrix.identity(self.field, cn)
        if K.cols == 0:
            data = (K, Matrix.zeros(self.field, 0, 0), Matrix.zeros(self.field, 0, 0),
                    Matrix.zeros(self.field, cn, 0))
            self._homology_cache[n] = data
            return data
        dn1 = self.d(n + 1)
        if dn1.cols:
            bc = K.solve_right(dn1)
            bb = bc.column_space_basis()
        else:
            bb = Matrix.zeros(self.field, K.cols, 0)
        Q, S = quotient_map(bb, K.cols)
        rep = K @ S
        data = (K, Q, S, rep)
        self._homology_cache[n] = data
        return data

    def homology_dim(self, n: int) -> int:
        if self.dim(n) == 0:
            return 0
        z = self.dim(n) - self.d(n).rank()
        b = self.d(n + 1).rank()
        return z - b

    def homology_dims(self) -> dict:
        """Graded table {degree: dim H_n} over the support (zeros dropped)."""
        out = {}
        for n in self.degrees():
            h = self.homology_dim(n)
            if h:
                out[n] = h
        return out

    def is_acyclic(self) -> bool:
        return not self.homology_dims()

    def connectivity(self):
        """(min degree with nonzero homology) - 1; +inf when acyclic."""
        h = self.homology_dims()
        if not h:
            return math.inf
        return min(h) - 1

    def euler_characteristic(self) -> int:
        return sum((-1) ** n * d for n, d in self._dims.items())

    # -- serialization --------------------------------------------------------

    def to_json(self) -> dict:
        dims = [self.dim(n) for n in self.degrees()]
        d = [self.d(n).to_entry_strings() for n in self.degrees()]
        return {"lo": self.lo, "hi": self.hi, "dims": dims, "d": d}

    @staticmethod
    def from_json(field: Field, obj: dict) -> "ChainComplex":
        lo, hi = obj["lo"], obj["hi"]
        dims = {lo + k: v for k, v in enumerate(obj["dims"])}
        diffs = {}
        for k, entries in enumerate(obj.get("d", [])):
            n = lo + k
            rows = dims.get(n - 1, 0)
            cols = dims.get(n, 0)
            diffs[n] = Matrix.from_entry_strings(field, rows, cols, entries)
        return ChainComplex(field, dims, diffs)


class ChainMap:
    """A degreewise linear map commuting exactly with the differentials."""

    __slots__ = ("source", "target", "_comps")

    def __init__(self, source: ChainComplex, target: ChainComplex, comps: dict,
                 validate: bool = True):
        self.source = source
        self.target = target
        self._comps = {}
        for n, m in comps.items():
            want = (target.dim(n), source.dim(n))
            if m.shape != want:
                raise ValueError(f"component at degree {n} has shape {m.shape}, want {want}")
            if m.rows and m.cols:
                self._comps[n] = m
        if validate:
            self._check_commutes()

    def _check_commutes(self):
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for n in range(lo, hi + 1):
            lhs = self.target.d(n) @ self.comp(n)
            rhs = self.comp(n - 1) @ self.source.d(n)
            if not (lhs == rhs):
                raise ValueError(f"map does not commute with differentials at degree {n}")

    def comp(self, n: int) -> Matrix:
        m = self._comps.get(n)
        if m is None:
            return Matrix.zeros(self.source.field, self.target.dim(n), self.source.dim(n))
        return m

    @staticmethod
    def identity(c: ChainComplex) -> "ChainMap":
        comps = {n: Matrix.identity(c.field, c.dim(n)) for n in c.degrees()}
        return ChainMap(c, c, comps, validate=False)

    @staticmethod
    def zero(source: ChainComplex, target: ChainComplex) -> "ChainMap":
        return ChainMap(source, target, {}, validate=False)

    def __eq__(self, other):
        if not isinstance(other, ChainMap):
            return NotImplemented
        if self.source is not other.source and self.source != other.source:
            return False
        if self.target is not other.target and self.target != other.target:
            return False
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        return all(self.comp(n) == other.comp(n) for n in range(lo, hi + 1))

    def compose(self, first: "ChainMap") -> "ChainMap":
        """self ∘ first."""
        comps = {}
        for n in range(min(first.source.lo, self.target.lo),
                       max(first.source.hi, self.target.hi) + 1):
            comps[n] = self.comp(n) @ first.comp(n)
        return ChainMap(first.source, self.target, comps, validate=False)

    def __add__(self, other: "ChainMap") -> "ChainMap":
        comps = {}
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for n in range(lo, hi + 1):
            comps[n] = self.comp(n) + other.comp(n)
        return ChainMap(self.source, self.target, comps, validate=False)

    def __sub__(self, other: "ChainMap") -> "ChainMap":
        comps = {}
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for n in range(lo, hi + 1):
            comps[n] = self.comp(n) - other.comp(n)
        return ChainMap(self.source, self.target, comps, validate=False)

    def scale(self, c) -> "ChainMap":
        return ChainMap(self.source, self.target,
                        {n: m.scale(c) for n, m in self._comps.items()}, validate=False)

    def shift(self, k: int) -> "ChainMap":
        comps = {n + k: m for n, m in self._comps.items()}
        return ChainMap(self.source.shift(k), self.target.shift(k), comps, validate=False)

    def is_degreewise_injective(self) -> bool:
        return all(self.comp(n).rank() == self.source.dim(n) for n in self.source.degrees())

    def is_identity(self) -> bool:
        if self.source._dims != self.target._dims:
            return False
        return all(self.comp(n) == Matrix.identity(self.source.field, self.source.dim(n))
                   for n in self.source.degrees())

    # -- homology ------------------------------------------------------------

    def induced_on_homology(self, n: int) -> Matrix:
        """Matrix of H_n(f) in the canonical cycle-representative bases."""
        kx, qx, sx, repx = self.source._homology_data(n)
        ky, qy, sy, repy = self.target._homology_data(n)
        if repx.cols == 0 or ky.cols == 0:
            return Matrix.zeros(self.source.field, qy.rows, repx.cols)
        coords = ky.solve_right(self.comp(n) @ repx)
        return qy @ coords

    def induced_homology_map(self) -> dict:
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        return {n: self.induced_on_homology(n) for n in range(lo, hi + 1)}

    def is_quasi_iso(self) -> bool:
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        for n in range(lo, hi + 1):
            m = self.induced_on_homology(n)
            if m.rows != m.cols or not m.is_invertible():
                return False
        return True

    def homology_map_is_zero(self) -> bool:
        """H(f) = 0, checked by ranks only (cycles land in boundaries)."""
        for n in range(min(self.source.lo, self.target.lo),
                       max(self.source.hi, self.target.hi) + 1):
            if self.source.dim(n) == 0 or self.target.dim(n) == 0:
                continue
            kx = self.source._homology_data(n)[0]
            img = self.comp(n) @ kx
            if img.is_zero():
                continue
            dy = self.target.d(n + 1)
            base = dy.rank()
            if Matrix.hstack([dy, img]).rank() != base:
                return False
        return True

    def to_json(self) -> dict:
        lo = min(self.source.lo, self.target.lo)
        hi = max(self.source.hi, self.target.hi)
        return {"lo": lo, "hi": hi,
                "comps": [self.comp(n).to_entry_strings() for n in range(lo, hi + 1)]}


# -- basic constructions ------------------------------------------------------


def direct_sum(complexes):
    """Direct sum with canonical injections and projections."""
    complexes = list(complexes)
    if not complexes:
        raise ValueError("empty direct sum needs a field; use ChainComplex.zero")
    field = complexes[0].field
    los = [c.lo for c in complexes if not c.is_zero_complex()]
    his = [c.hi for c in complexes if not c.is_zero_complex()]
    if not los:
        z = ChainComplex.zero(field)
        return z, [ChainMap.zero(c, z) for c in complexes], [ChainMap.zero(z, c) for c in complexes]
    lo, hi = min(los), max(his)
    dims = {n: sum(c.dim(n) for c in complexes) for n in range(lo, hi + 1)}
    diffs = {}
    for n in range(lo + 1, hi + 1):
        d = complexes[0].d(n)
        for c in complexes[1:]:
            d = d.direct_sum(c.d(n))
        diffs[n] = d
    total = ChainComplex(field, dims, diffs, validate=False)
    injs, projs = [], []
    for k, c in enumerate(complexes):
        icomp, pcomp = {}, {}
        for n in range(lo, hi + 1):
            off = sum(cc.dim(n) for cc in complexes[:k])
            m = Matrix.zeros(field, total.dim(n), c.dim(n))
            pm = Matrix.zeros(field, c.dim(n), total.dim(n))
            for j in range(c.dim(n)):
                m.a[off + j, j] = field.one()
                pm.a[j, off + j] = field.one()
            icomp[n] = m
            pcomp[n] = pm
        injs.append(ChainMap(c, total, icomp, validate=False))
        projs.append(ChainMap(total, c, pcomp, validate=False))
    return total, injs, projs


def hofib(f: ChainMap):
    """Homotopy fiber: degree n is X_n ⊕ Y_{n+1}, d(x,y) = (dx, f(x) - dy).

    Returns (fiber, projection to the source X).
    """
    X, Y = f.source, f.target
    field = X.field
    lo = min(X.lo, Y.lo - 1)
    hi = max(X.hi, Y.hi - 1)
    dims = {n: X.dim(n) + Y.dim(n + 1) for n in range(lo, hi + 1)}
    diffs = {}
    for n in range(lo + 1, hi + 1):
        dx = X.d(n)
        zer = Matrix.zeros(field, X.dim(n - 1), Y.dim(n + 1))
        fy = f.comp(n)
        dy = Y.d(n + 1).scale(-1)
        diffs[n] = Matrix.block([[dx, zer], [fy, dy]])
    fib = ChainComplex(field, dims, diffs, validate=False)
    proj = {}
    for n in range(lo, hi + 1):
        m = Matrix.zeros(field, X.dim(n), fib.dim(n))
        for j in range(X.dim(n)):
            m.a[j, j] = field.one()
        proj[n] = m
    return fib, ChainMap(fib, X, proj, validate=False)


def cone(f: ChainMap):
    """Mapping cone: degree n is X_{n-1} ⊕ Y_n, d(x,y) = (-dx, f(x) + dy).

    Returns (cone, inclusion of the target Y).
    """
    X, Y = f.source, f.target
    field = X.field
    lo = min(X.lo + 1, Y.lo)
    hi = max(X.hi + 1, Y.hi)
    dims = {n: X.dim(n - 1) + Y.dim(n) for n in range(lo, hi + 1)}
    diffs = {}
    for n in range(lo + 1, hi + 1):
        dx = X.d(n - 1).scale(-1)
        zer = Matrix.zeros(field, X.dim(n - 2), Y.dim(n))
        fx = f.comp(n - 1)
        dy = Y.d(n)
        diffs[n] = Matrix.block([[dx, zer], [fx, dy]])
    cn = ChainComplex(field, dims, diffs, validate=False)
    inc = {}
    for n in range(lo, hi + 1):
        m = Matrix.zeros(field, cn.dim(n), Y.dim(n))
        off = X.dim(n - 1)
        for j in range(Y.dim(n)):
            m.a[off + j, j] = field.one()
        inc[n] = m
    return cn, ChainMap(Y, cn, inc, validate=False)


def tensor(a: ChainComplex, b: ChainComplex) -> ChainComplex:
    """Tensor product with the Koszul sign d(x⊗y) = dx⊗y + (-1)^{|x|} x⊗dy."""
    field = a.field
    if a.is_zero_complex() or b.is_zero_complex():
        return ChainComplex.zero(field)
    lo, hi = a.lo + b.lo, a.hi + b.hi

    def blocks(n):
        return [p for p in range(max(a.lo, n - b.hi), min(a.hi, n - b.lo) + 1)]

    dims = {n: sum(a.dim(p) * b.dim(n - p) for p in blocks(n)) for n in range(lo, hi + 1)}
    diffs = {}
    minus_one = field.normalize(-1)
    for n in range(lo + 1, hi + 1):
        tgt_blocks = blocks(n - 1)
        src_blocks = blocks(n)
        grid = []
        for tp in tgt_blocks:
            row = []
            for sp in src_blocks:
                rows = a.dim(tp) * b.dim(n - 1 - tp)
                cols = a.dim(sp) * b.dim(n - sp)
                if tp == sp - 1:
                    m = a.d(sp).kron(Matrix.identity(field, b.dim(n - sp)))
                elif tp == sp:
                    m = Matrix.identity(field, a.dim(sp)).kron(b.d(n - sp))
                    if sp % 2:
                        m = m.scale(minus_one)
                else:
                    m = Matrix.zeros(field, rows, cols)
                row.append(m)
            grid.append(row)
        diffs[n] = Matrix.block(grid)
    return ChainComplex(field, dims, diffs, validate=False)


def tensor_map(f: ChainMap, g: ChainMap) -> ChainMap:
    """f ⊗ g on the tensor complexes (degree-0 maps, no Koszul signs)."""
    src = tensor(f.source, g.source)
    tgt = tensor(f.target, g.target)
    field = f.source.field
    comps = {}
    for n in range(src.lo, src.hi + 1):
        tgt_blocks = [p for p in range(max(f.target.lo, n - g.target.hi),
                                       min(f.target.hi, n - g.target.lo) + 1)]
        src_blocks = [p for p in range(max(f.source.lo, n - g.source.hi),
                                       min(f.source.hi, n - g.source.lo) + 1)]
        grid = []
        for tp in tgt_blocks:
            row = []
            for sp in src_blocks:
                if tp == sp:
                    row.append(f.comp(sp).kron(g.comp(n - sp)))
                else:
                    row.append(Matrix.zeros(field, f.target.dim(tp) * g.target.dim(n - tp),
                                            f.source.dim(sp) * g.source.dim(n - sp)))
            grid.append(row)
        if tgt_blocks and src_blocks:
            comps[n] = Matrix.block(grid)
    return ChainMap(src, tgt, comps, validate=False)


class Pushout:
    """Strict degreewise pushout of X <- A -> Y with its structure maps."""

    __slots__ = ("value", "from_left", "from_right", "is_homotopy", "_sections", "_quots",
                 "left", "right", "apex")

    def __init__(self, i: ChainMap, j: ChainMap):
        if i.source is not j.source and i.source != j.source:
            raise ValueError("pushout legs must share their source")
        A, X, Y = i.source, i.target, j.target
        field = A.field
        self.is_homotopy = i.is_degreewise_injective() or j.is_degreewise_injective()
        lo = min(X.lo, Y.lo) if X.total_dim() + Y.total_dim() else 0
        hi = max(X.hi, Y.hi) if X.total_dim() + Y.total_dim() else -1
        quots, sections, dims = {}, {}, {}
        for n in range(lo, hi + 1):
            amb = X.dim(n) + Y.dim(n)
            rel = Matrix.vstack([i.comp(n), j.comp(n).scale(-1)])
            rel = rel.column_space_basis()
            Q, S = quotient_map(rel, amb)
            quots[n], sections[n] = Q, S
            dims[n] = Q.rows
        diffs = {}
        for n in range(lo + 1, hi + 1):
            dsum = X.d(n).direct_sum(Y.d(n))
            diffs[n] = quots[n - 1] @ dsum @ sections[n]
        self.value = ChainComplex(field, dims, diffs, validate=False)
        self._quots, self._sections = quots, sections
        self.left, self.right, self.apex = X, Y, A
        li, ri = {}, {}
        for n in range(lo, hi + 1):
            ix = Matrix.zeros(field, X.dim(n) + Y.dim(n), X.dim(n))
            iy = Matrix.zeros(field, X.dim(n) + Y.dim(n), Y.dim(n))
            for k in range(X.dim(n)):
                ix.a[k, k] = field.one()
            for k in range(Y.dim(n)):
                iy.a[X.dim(n) + k, k] = field.one()
            li[n] = quots[n] @ ix
            ri[n] = quots[n] @ iy
        self.from_left = ChainMap(X, self.value, li, validate=False)
        self.from_right = ChainMap(Y, self.value, ri, validate=False)

    def map_out(self, u: ChainMap, v: ChainMap) -> ChainMap:
        """Universal map to W from u: X -> W, v: Y -> W with u∘i = v∘j."""
        W = u.target
        comps = {}
        for n in self.value.degrees():
            stacked = Matrix.hstack([u.comp(n), v.comp(n)])
            comps[n] = stacked @ self._sections[n]
        return ChainMap(self.value, W, comps, validate=False)


def pushout(i: ChainMap, j: ChainMap) -> Pushout:
    return Pushout(i, j)


def connectivity(c: ChainComplex):
    return c.connectivity()


def map_connectivity(f: ChainMap):
    fib, _ = hofib(f)
    conn = fib.connectivity()
    return math.inf if conn == math.inf else conn + 1
