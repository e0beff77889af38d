"""Seeded random generators for complexes, chain maps, and factorization data.

Random complexes are direct sums of elementary pieces (one-dimensional
classes and acyclic discs) conjugated by random invertible degreewise
changes of basis; random chain maps are uniform samples from the exactly
solved space of maps commuting with the differentials.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np

from .cfcat import CfContext, CfMorphism, CfObject
from .complexes import ChainComplex, ChainMap, direct_sum
from .field import Field
from .matrix import Matrix


def _split_left_inverse(inj: Matrix) -> Matrix:
    """Left inverse of a coordinate (0/1) split injection."""
    out = Matrix.zeros(inj.field, inj.cols, inj.rows)
    for j in range(inj.cols):
        for i in range(inj.rows):
            if inj.a[i, j]:
                out.a[j, i] = inj.field.one()
                break
    return out


class Rand:
    """Deterministic sampler bound to a field and a numpy Generator."""

    def __init__(self, field: Field, seed: int):
        self.field = field
        self.rng = np.random.default_rng(seed)

    # -- scalars / matrices -------------------------------------------------

    def scalar(self, nonzero: bool = False):
        if self.field.kind == "prime":
            lo = 1 if nonzero else 0
            return int(self.rng.integers(lo, min(self.field.p, 17)))
        num = int(self.rng.integers(1 if nonzero else -3, 4))
        if nonzero and num == 0:
            num = 1
        return Fraction(num, int(self.rng.integers(1, 3)))

    def matrix(self, rows: int, cols: int) -> Matrix:
        m = Matrix.zeros(self.field, rows, cols)
        for i in range(rows):
            for j in range(cols):
                m.a[i, j] = self.field.normalize(self.scalar())
        return m

    def invertible(self, n: int) -> Matrix:
        """Random invertible matrix: permuted unit-triangular product."""
        field = self.field
        L = Matrix.identity(field, n)
        U = Matrix.identity(field, n)
        for i in range(n):
            for j in range(i):
                L.a[i, j] = field.normalize(self.scalar())
                U.a[j, i] = field.normalize(self.scalar())
            U.a[i, i] = field.normalize(self.scalar(nonzero=True))
        perm = self.rng.permutation(n)
        P = Matrix.zeros(field, n, n)
        for i, j in enumerate(perm):
            P.a[i, j] = field.one()
        return P @ L @ U

    # -- complexes --------------------------------------------------------

    def complex(self, lo: int = 0, hi: int = 2, max_dim: int = 3,
                allow_zero: bool = True) -> ChainComplex:
        """Random bounded complex with dims <= max_dim per degree."""
        field = self.field
        dims = {n: 0 for n in range(lo, hi + 1)}
        pieces = []
        for n in range(lo, hi + 1):
            for _ in range(int(self.rng.integers(0, max_dim + 1))):
                kind = self.rng.integers(0, 2)
                if kind == 0 or n == lo:
                    if dims[n] < max_dim:
                        pieces.append(ChainComplex.single(field, n))
                        dims[n] += 1
                else:
                    if dims[n] < max_dim and dims[n - 1] < max_dim:
                        disc = ChainComplex(field, {n: 1, n - 1: 1},
                                            {n: Matrix.identity(field, 1)}, validate=False)
                        pieces.append(disc)
                        dims[n] += 1
                        dims[n - 1] += 1
        if not pieces:
            if allow_zero:
                return ChainComplex.zero(field)
            pieces = [ChainComplex.single(field, lo)]
        total, _, _ = direct_sum(pieces)
        return self.conjugate(total)

    def conjugate(self, c: ChainComplex) -> ChainComplex:
        """Random degreewise change of basis."""
        ps = {n: self.invertible(c.dim(n)) for n in c.degrees()}
        diffs = {}
        for n in range(c.lo + 1, c.hi + 1):
            diffs[n] = ps[n - 1] @ c.d(n) @ ps[n].inverse()
        return ChainComplex(c.field, c.dims_table(), diffs, validate=False)

    # -- chain maps ----------------------------------------------------------

    def _chain_map_space(self, X: ChainComplex, Y: ChainComplex):
        """Variable layout and constraint matrix for maps X -> Y that commute
        with the differentials."""
        field = self.field
        layout = []
        offset = 0
        degs = range(min(X.lo, Y.lo), max(X.hi, Y.hi) + 1)
        for n in degs:
            size = Y.dim(n) * X.dim(n)
            layout.append((n, offset, size))
            offset += size
        nvars = offset
        rows = []
        for n in degs:
            ry, cx = Y.dim(n - 1), X.dim(n)
            if ry == 0 or cx == 0:
                continue
            dy = Y.d(n)
            dx = X.d(n)
            for r in range(ry):
                for j in range(cx):
                    row = Matrix.zeros(field, 1, nvars)
                    for (m, off, size) in layout:
                        if m == n and size:
                            for i in range(Y.dim(n)):
                                row.a[0, off + i * X.dim(n) + j] = dy.a[r, i]
                        if m == n - 1 and size:
                            for ccol in range(X.dim(n - 1)):
                                v = row.a[0, off + r * X.dim(n - 1) + ccol]
                                row.a[0, off + r * X.dim(n - 1) + ccol] = \
                                    field.normalize(v - dx.a[ccol, j])
                    rows.append(row)
        A = Matrix.vstack(rows) if rows else Matrix.zeros(field, 0, nvars)
        return layout, nvars, A

    def _unpack(self, X, Y, layout, vec) -> ChainMap:
        comps = {}
        for (n, off, size) in layout:
            if size == 0:
                continue
            m = Matrix.zeros(self.field, Y.dim(n), X.dim(n))
            for i in range(Y.dim(n)):
                for j in range(X.dim(n)):
                    m.a[i, j] = vec.a[off + i * X.dim(n) + j, 0]
            comps[n] = m
        return ChainMap(X, Y, comps)

    def chain_map(self, X: ChainComplex, Y: ChainComplex) -> ChainMap:
        """Uniform random chain map X -> Y."""
        layout, nvars, A = self._chain_map_space(X, Y)
        if nvars == 0:
            return ChainMap.zero(X, Y)
        K = A.kernel_basis()
        coeffs = self.matrix(K.cols, 1)
        vec = K @ coeffs
        return self._unpack(X, Y, layout, vec)

    def quasi_iso(self, X: ChainComplex):
        """A random quasi-isomorphism out of X (split injection into X ⊕
        acyclic, conjugated)."""
        disc_list = []
        for n in range(X.lo, X.hi + 1):
            for _ in range(int(self.rng.integers(0, 2))):
                disc_list.append(ChainComplex(self.field, {n + 1: 1, n: 1},
                                              {n + 1: Matrix.identity(self.field, 1)},
                                              validate=False))
        if disc_list:
            pad, _, _ = direct_sum(disc_list)
            total, injs, _ = direct_sum([X, pad])
        else:
            total, injs, _ = direct_sum([X])
        Y = self.conjugate(total)
        ps = {n: self.invertible(total.dim(n)) for n in total.degrees()}
        diffs = {n: ps[n - 1] @ total.d(n) @ ps[n].inverse()
                 for n in range(total.lo + 1, total.hi + 1)}
        Y = ChainComplex(self.field, total.dims_table(), diffs, validate=False)
        comps = {n: ps[n] @ injs[0].comp(n) for n in total.degrees()}
        return ChainMap(X, Y, comps)

    # -- factorization data -----------------------------------------------------

    def context(self, pointed: bool = False, lo: int = 0, hi: int = 1,
                max_dim: int = 2) -> CfContext:
        """Random context with an injective structure map A -> B."""
        field = self.field
        if pointed:
            return CfContext.pointed(field)
        A = self.complex(lo=lo, hi=hi, max_dim=1)
        pad = self.complex(lo=lo, hi=hi, max_dim=max_dim, allow_zero=False)
        total, injs, _ = direct_sum([A, pad])
        ps = {n: self.invertible(total.dim(n)) for n in total.degrees()}
        diffs = {n: ps[n - 1] @ total.d(n) @ ps[n].inverse()
                 for n in range(total.lo + 1, total.hi + 1)}
        B = ChainComplex(field, total.dims_table(), diffs, validate=False)
        f = ChainMap(A, B, {n: ps[n] @ injs[0].comp(n) for n in total.degrees()})
        return CfContext(A, B, f)

    def minimal_context(self) -> CfContext:
        """The smallest context with distinct endpoints: 0 -> k in degree 0."""
        field = self.field
        A = ChainComplex.zero(field)
        B = ChainComplex.single(field, 0)
        return CfContext(A, B, ChainMap.zero(A, B))

    def cf_object(self, ctx: CfContext, lo: int = 0, hi: int = 2,
                  max_dim: int = 2) -> CfObject:
        """Random factorization A -> X -> B with solved structure maps."""
        field = self.field
        R = self.complex(lo=lo, hi=hi, max_dim=max_dim)
        parts = [c for c in (ctx.A, R) if not c.is_zero_complex()]
        if not parts:
            return ctx.initial()
        total, injs, projs = direct_sum([ctx.A, R])
        # proj = f on the A part, a random chain map on the complement
        g = self.chain_map(R, ctx.B)
        proj0 = ctx.f.compose(projs[0]) + g.compose(projs[1])
        ps = {n: self.invertible(total.dim(n)) for n in total.degrees()}
        diffs = {n: ps[n - 1] @ total.d(n) @ ps[n].inverse()
                 for n in range(total.lo + 1, total.hi + 1)}
        X = ChainComplex(field, total.dims_table(), diffs, validate=False)
        pinv = {n: ps[n].inverse() for n in total.degrees()}
        incl = ChainMap(ctx.A, X, {n: ps[n] @ injs[0].comp(n) for n in total.degrees()})
        proj = ChainMap(X, ctx.B, {n: proj0.comp(n) @ pinv[n] for n in total.degrees()})
        return CfObject(ctx, X, incl, proj)

    def acyclic_complex(self, lo: int = 0, hi: int = 2, max_dim: int = 2) -> ChainComplex:
        discs = []
        for n in range(lo + 1, hi + 1):
            for _ in range(int(self.rng.integers(0, max_dim))):
                discs.append(ChainComplex(self.field, {n: 1, n - 1: 1},
                                          {n: Matrix.identity(self.field, 1)},
                                          validate=False))
        if not discs:
            return ChainComplex.zero(self.field)
        total, _, _ = direct_sum(discs)
        return self.conjugate(total)

    def cf_extension(self, x: CfObject, max_dim: int = 2,
                     acyclic: bool = False) -> CfMorphism:
        """A random morphism out of x: a split inclusion into a larger object.
        With acyclic=True the complement is acyclic, so the morphism is a
        quasi-isomorphism."""
        ctx = x.ctx
        if acyclic:
            R = self.acyclic_complex(lo=x.X.lo, hi=x.X.hi + 1, max_dim=max_dim)
        else:
            R = self.complex(lo=x.X.lo, hi=x.X.hi, max_dim=max_dim)
        if R.is_zero_complex():
            return x.identity()
        total, injs, projs = direct_sum([x.X, R])
        g = self.chain_map(R, ctx.B)
        proj0 = x.proj.compose(projs[0]) + g.compose(projs[1])
        ps = {n: self.invertible(total.dim(n)) for n in total.degrees()}
        diffs = {n: ps[n - 1] @ total.d(n) @ ps[n].inverse()
                 for n in range(total.lo + 1, total.hi + 1)}
        Y = ChainComplex(ctx.field, total.dims_table(), diffs, validate=False)
        pinv = {n: ps[n].inverse() for n in total.degrees()}
        inc_map = ChainMap(x.X, Y, {n: ps[n] @ injs[0].comp(n) for n in total.degrees()})
        proj = ChainMap(Y, ctx.B, {n: proj0.comp(n) @ pinv[n] for n in total.degrees()})
        y = CfObject(ctx, Y, inc_map.compose(x.incl), proj)
        return CfMorphism(x, y, inc_map)

    def cf_morphism(self, x: CfObject) -> CfMorphism:
        """A random morphism with source x (an extension, possibly composed
        with a fold back onto a smaller extension)."""
        return self.cf_extension(x)

    def cf_endomorphism(self, x: CfObject) -> CfMorphism:
        """A random self-morphism of x: identity plus a random element of
        the space of maps vanishing on A and over B."""
        ctx = x.ctx
        X = x.X
        field = self.field
        layout, nvars, A = self._chain_map_space(X, X)
        if nvars == 0:
            return x.identity()
        rows = [A]
        # e ∘ incl = 0 and proj ∘ e = 0, linear in the entries of e
        for n in X.degrees():
            inc = x.incl.comp(n)
            pr = x.proj.comp(n)
            off = next(o for (m, o, s) in layout if m == n)
            for i in range(X.dim(n)):
                for j in range(inc.cols):
                    row = Matrix.zeros(field, 1, nvars)
                    for c in range(X.dim(n)):
                        row.a[0, off + i * X.dim(n) + c] = inc.a[c, j]
                    rows.append(row)
            for r in range(pr.rows):
                for j in range(X.dim(n)):
                    row = Matrix.zeros(field, 1, nvars)
                    for c in range(X.dim(n)):
                        row.a[0, off + c * X.dim(n) + j] = pr.a[r, c]
                    rows.append(row)
        system = Matrix.vstack(rows)
        K = system.kernel_basis()
        if K.cols == 0:
            return x.identity()
        vec = K @ self.matrix(K.cols, 1)
        e = self._unpack(X, X, layout, vec)
        g = ChainMap.identity(X) + e
        return CfMorphism(x, x, g)

    def chain_cube(self, n: int, max_dim: int = 2):
        """A random commuting n-cube of complexes: vertices are the partial
        direct sums of one complex per subset, edges the split inclusions."""
        from .cube import Cube, subsets, subset_key
        parts = {subset_key(t): self.complex(max_dim=max_dim) for t in subsets(n)}
        sums, injs = {}, {}
        for s in subsets(n):
            keys = sorted(subset_key(t) for t in subsets(n) if t <= s)
            total, inj, _ = direct_sum([parts[k] for k in keys])
            sums[s] = total
            injs[s] = dict(zip(keys, inj))
        edges = {}
        for s in subsets(n):
            for i in range(1, n + 1):
                if i in s:
                    continue
                t = s | {i}
                src, tgt = sums[s], sums[t]
                acc = None
                for k, inj_map in injs[s].items():
                    comps = {}
                    for deg in range(src.lo, src.hi + 1):
                        left = _split_left_inverse(inj_map.comp(deg))
                        comps[deg] = injs[t][k].comp(deg) @ left
                    m = ChainMap(src, tgt, comps, validate=False)
                    acc = m if acc is None else acc + m
                edges[(s, i)] = acc if acc is not None else ChainMap.zero(src, tgt)
        return Cube(n, sums, edges, validate=False)

    def beta_object(self, lo: int = 0, hi: int = 1, max_dim: int = 2):
        """A context plus an object whose projection is injective (so it can
        serve as the base of a restricted context), built as a factorization
        A ⊆ X ⊆ B with all three legs split, then conjugated."""
        field = self.field
        A = self.complex(lo=lo, hi=hi, max_dim=1)
        M1 = self.complex(lo=lo, hi=hi, max_dim=max_dim, allow_zero=False)
        M2 = self.complex(lo=lo, hi=hi, max_dim=max_dim, allow_zero=False)
        tx, injx, _ = direct_sum([A, M1])
        tb, injb, _ = direct_sum([A, M1, M2])
        degs = range(min(tx.lo, tb.lo), max(tx.hi, tb.hi) + 1)
        psx = {n: self.invertible(tx.dim(n)) for n in degs}
        psb = {n: self.invertible(tb.dim(n)) for n in degs}
        X = ChainComplex(field, tx.dims_table(),
                         {n: psx[n - 1] @ tx.d(n) @ psx[n].inverse()
                          for n in range(tx.lo + 1, tx.hi + 1)}, validate=False)
        B = ChainComplex(field, tb.dims_table(),
                         {n: psb[n - 1] @ tb.d(n) @ psb[n].inverse()
                          for n in range(tb.lo + 1, tb.hi + 1)}, validate=False)
        xb = {n: Matrix.hstack([injb[0].comp(n), injb[1].comp(n)]) for n in tb.degrees()}
        beta_map = ChainMap(X, B, {n: psb[n] @ xb[n] @ psx[n].inverse() for n in tb.degrees()})
        f = ChainMap(A, B, {n: psb[n] @ injb[0].comp(n) for n in tb.degrees()})
        incl = ChainMap(A, X, {n: psx[n] @ injx[0].comp(n) for n in tx.degrees()})
        ctx = CfContext(A, B, f)
        return ctx, CfObject(ctx, X, incl, beta_map)
