"""Block chain complexes and homological perturbation reduction.

A BlockComplex is a chain complex presented as a finite family of small
complexes (blocks, already in total grading) plus strictly triangular
transition components between blocks.  Large totalizations (cotriple powers,
punctured-cube limits, bar constructions) are built in this form so their
homology can be computed without ever assembling one huge dense matrix:
blocks are grouped, each group is deformation-retracted onto its homology,
and the transition differential is transferred through the retraction
(basic perturbation lemma).  Everything is exact over the field.
"""

from __future__ import annotations

import math
from collections import defaultdict

from .complexes import ChainComplex, ChainMap
from .matrix import Matrix


class ResourceCapError(RuntimeError):
    """Raised when an instance exceeds the configured dimension caps."""


def retraction(C: ChainComplex):
    """Deformation retract of C onto its homology.

    Returns (H, i, p, h): H has zero differential, i/p are degreewise
    matrices with p i = 1 and 1 - i p = d h + h d, and h: C_n -> C_{n+1}
    satisfies the standard side conditions (h i = 0, p h = 0, h h = 0).
    """
    field = C.field
    # Column pivots of d_n give a complement U_n of the cycles.
    U = {}
    for n in C.degrees():
        dn = C.d(n)
        if dn.rows and dn.cols:
            _, pivots = dn.rref()
            cols = [c for (_, c) in pivots]
        else:
            cols = []
        m = Matrix.zeros(field, C.dim(n), len(cols))
        for k, j in enumerate(cols):
            m.a[j, k] = field.one()
        U[n] = m
    hdims, i_m, p_m, h_m = {}, {}, {}, {}
    for n in C.degrees():
        cn = C.dim(n)
        if cn == 0:
            continue
        rep = C._homology_data(n)[3]
        un = U.get(n, Matrix.zeros(field, cn, 0))
        un1 = U.get(n + 1, Matrix.zeros(field, C.dim(n + 1), 0))
        bn = C.d(n + 1) @ un1
        T = Matrix.hstack([bn, rep, un])
        if T.cols != cn:
            raise ValueError("homology decomposition dimension mismatch")
        Tinv = T.inverse()
        b, h = bn.cols, rep.cols
        hdims[n] = h
        i_m[n] = rep
        p_m[n] = Tinv.sub_rows(range(b, b + h))
        h_m[n] = un1 @ Tinv.sub_rows(range(b))
    H = ChainComplex(field, hdims, {}, validate=False)
    return H, i_m, p_m, h_m


# Retractions of block complexes are cached per complex instance (shifted
# copies of functor values recur many times inside nested totalizations), and
# per structural group signature (chain copies of one totalization share all
# their matrices).
_RETRACTION_CACHE: dict = {}
_GROUP_CACHE: dict = {}


def cached_retraction(c: ChainComplex):
    key = id(c)
    hit = _RETRACTION_CACHE.get(key)
    if hit is not None and hit[0] is c:
        return hit[1]
    ret = retraction(c)
    _RETRACTION_CACHE[key] = (c, ret)
    return ret


def clear_caches():
    _RETRACTION_CACHE.clear()
    _GROUP_CACHE.clear()


class BlockComplex:
    """A chain complex given by blocks and triangular transition components."""

    def __init__(self, field, blocks: dict, trans: dict, validate: bool = False):
        self.field = field
        self.blocks = {k: c for k, c in blocks.items() if not c.is_zero_complex()}
        self.trans = {}
        for (s, t), comps in trans.items():
            if s not in self.blocks or t not in self.blocks:
                continue
            kept = {n: m for n, m in comps.items() if m.rows and m.cols and not m.is_zero()}
            if kept:
                self.trans[(s, t)] = kept
        if validate:
            self.assemble()[0]._check_dd()

    # -- structure -----------------------------------------------------------

    def degrees(self):
        if not self.blocks:
            return range(0, 0)
        lo = min(c.lo for c in self.blocks.values())
        hi = max(c.hi for c in self.blocks.values())
        return range(lo, hi + 1)

    def total_dims(self) -> dict:
        out = defaultdict(int)
        for c in self.blocks.values():
            for n in c.degrees():
                out[n] += c.dim(n)
        return dict(out)

    def total_dim(self) -> int:
        return sum(self.total_dims().values())

    def key_order(self):
        return sorted(self.blocks.keys())

    def offsets(self):
        """Per-degree offset of each block in the assembled complex."""
        offs = {k: {} for k in self.blocks}
        cursor = defaultdict(int)
        for k in self.key_order():
            c = self.blocks[k]
            for n in c.degrees():
                offs[k][n] = cursor[n]
                cursor[n] += c.dim(n)
        return offs, dict(cursor)

    def assemble(self):
        """Dense ChainComplex plus the per-block offsets used to build it."""
        offs, dims = self.offsets()
        field = self.field
        diffs = {}
        degs = sorted(dims)
        lo = min(degs) if degs else 0
        hi = max(degs) if degs else -1
        for n in range(lo + 1, hi + 1):
            m = Matrix.zeros(field, dims.get(n - 1, 0), dims.get(n, 0))
            for k, c in self.blocks.items():
                dk = c.d(n)
                if dk.rows and dk.cols:
                    r0, c0 = offs[k][n - 1], offs[k][n]
                    m.a[r0:r0 + dk.rows, c0:c0 + dk.cols] = dk.a
            for (s, t), comps in self.trans.items():
                mt = comps.get(n)
                if mt is not None:
                    r0, c0 = offs[t][n - 1], offs[s][n]
                    m.a[r0:r0 + mt.rows, c0:c0 + mt.cols] += mt.a
                    if field.kind == "prime":
                        m.a[r0:r0 + mt.rows, c0:c0 + mt.cols] %= field.p
            diffs[n] = m
        dense = ChainComplex(field, {n: dims.get(n, 0) for n in range(lo, hi + 1)},
                             diffs, validate=False)
        return dense, offs

    def assemble_degree(self, n: int):
        """The single differential matrix from degree n and the per-block
        offsets, without assembling the whole complex."""
        offs, dims = self.offsets()
        m = Matrix.zeros(self.field, dims.get(n - 1, 0), dims.get(n, 0))
        for k, c in self.blocks.items():
            dk = c.d(n)
            if dk.rows and dk.cols:
                r0, c0 = offs[k][n - 1], offs[k][n]
                m.a[r0:r0 + dk.rows, c0:c0 + dk.cols] = dk.a
        for (s, t), comps in self.trans.items():
            mt = comps.get(n)
            if mt is not None:
                r0, c0 = offs[t][n - 1], offs[s][n]
                m.a[r0:r0 + mt.rows, c0:c0 + mt.cols] += mt.a
                if self.field.kind == "prime":
                    m.a[r0:r0 + mt.rows, c0:c0 + mt.cols] %= self.field.p
        return m, offs, dims

    @staticmethod
    def from_complex(c: ChainComplex, key=("block",)) -> "BlockComplex":
        return BlockComplex(c.field, {key: c}, {})

    def map_from_complex(self, comps_by_key, source: ChainComplex) -> "BlockMap":
        src = BlockComplex.from_complex(source)
        f = {}
        for k, comps in comps_by_key.items():
            f[(("block",), k)] = comps
        return BlockMap(src, self, f)

    # -- group graph ----------------------------------------------------------

    def _group_order(self, group_of):
        edges = defaultdict(set)
        groups = sorted({group_of(k) for k in self.blocks})
        for (s, t) in self.trans:
            gs, gt = group_of(s), group_of(t)
            if gs != gt:
                edges[gs].add(gt)
        # topological sort; transition graph between groups must be acyclic
        marks = {}
        order = []

        def visit(g):
            st = marks.get(g)
            if st == 2:
                return
            if st == 1:
                raise ValueError("transition graph between groups has a cycle")
            marks[g] = 1
            for g2 in sorted(edges[g]):
                visit(g2)
            marks[g] = 2
            order.append(g)

        for g in groups:
            visit(g)
        order.reverse()
        return order, edges

    # -- reduction --------------------------------------------------------------

    def reduce(self, group_of=None, cap: int | None = None) -> "BlockComplex":
        """Retract each group of blocks onto its homology and transfer the
        cross-group differential through the retraction."""
        if group_of is None:
            group_of = lambda k: k
        order, _ = self._group_order(group_of)
        members = defaultdict(list)
        for k in self.key_order():
            members[group_of(k)].append(k)
        # Assemble and retract each group (single-block groups reuse the
        # block instance, so shared shifted values hit the retraction cache;
        # structurally identical groups share everything via a signature).
        sub, offs, rets = {}, {}, {}
        for g in order:
            keys = members[g]
            internal = {(s, t): c for (s, t), c in self.trans.items()
                        if group_of(s) == g and group_of(t) == g}
            if len(keys) == 1 and not internal:
                dense = self.blocks[keys[0]]
                off = {keys[0]: {n: 0 for n in dense.degrees()}}
            else:
                index = {k: i for i, k in enumerate(keys)}
                sig = (tuple(id(self.blocks[k]) for k in keys),
                       tuple(sorted((index[s], index[t], n, id(m))
                                    for (s, t), comps in internal.items()
                                    for n, m in comps.items())))
                hit = _GROUP_CACHE.get(sig)
                if hit is not None:
                    dense, rel_off, _refs = hit
                    off = {k: rel_off[index[k]] for k in keys}
                else:
                    bc = BlockComplex(self.field, {k: self.blocks[k] for k in keys},
                                      internal)
                    dense, off = bc.assemble()
                    rel_off = {index[k]: off[k] for k in keys}
                    refs = [self.blocks[k] for k in keys]
                    refs.extend(m for comps in internal.values() for m in comps.values())
                    _GROUP_CACHE[sig] = (dense, rel_off, refs)
            if cap is not None and dense.total_dim() > cap:
                raise ResourceCapError(
                    f"group of total dimension {dense.total_dim()} exceeds cap {cap}")
            sub[g], offs[g] = dense, off
            rets[g] = cached_retraction(dense)
        new_blocks = {g: rets[g][0] for g in order}
        new_trans = defaultdict(lambda: defaultdict(lambda: None))

        def add_comp(gs, gt, n, m):
            cur = new_trans[(gs, gt)][n]
            new_trans[(gs, gt)][n] = m if cur is None else cur + m

        for g in order:
            H, i_m, p_m, h_m = rets[g]
            if H.total_dim() == 0:
                continue
            # cur: per group g2, per degree n, a matrix H_n -> dense(g2)_n
            cur = {g: {n: i_m[n] for n in i_m}}
            while cur:
                nxt = {}
                for g1, W in cur.items():
                    img = self._apply_cross(group_of, g1, W, offs, sub)
                    for g2, V in img.items():
                        Hd, i2, p2, h2 = rets[g2]
                        for n, m in V.items():
                            # m: H_n -> dense(g2)_{n-1}
                            if (n - 1) in p2:
                                pm = p2[n - 1] @ m
                                if not pm.is_zero():
                                    add_comp(g, g2, n, pm)
                            if (n - 1) in h2:
                                hm = h2[n - 1] @ m
                                if not hm.is_zero():
                                    dst = nxt.setdefault(g2, {})
                                    dst[n] = hm if n not in dst else dst[n] + hm
                cur = {g1: {n: m for n, m in W.items() if not m.is_zero()}
                       for g1, W in nxt.items()}
                cur = {g1: W for g1, W in cur.items() if W}
        trans = {}
        for (gs, gt), comps in new_trans.items():
            trans[(gs, gt)] = {n: m for n, m in comps.items() if m is not None}
        return BlockComplex(self.field, new_blocks, trans)

    def _apply_cross(self, group_of, g1, W, offs, sub):
        """Apply the cross-group transition components to W (maps into the
        dense model of group g1); returns contributions per target group."""
        out = {}
        for (s, t), comps in self.trans.items():
            if group_of(s) != g1:
                continue
            g2 = group_of(t)
            if g2 == g1:
                continue
            soff = offs[g1][s]
            toff = offs[g2][t]
            for n, Wn in W.items():
                c = comps.get(n)
                if c is None:
                    continue
                # rows of W at block s, degree n
                so = soff.get(n)
                if so is None:
                    continue
                rows = Wn.a[so:so + self.blocks[s].dim(n), :]
                if not rows.size or not (rows != 0).any():
                    continue
                piece = c @ Matrix(self.field, rows.copy())
                dst = out.setdefault(g2, {})
                tgt_dim = sub[g2].dim(n - 1)
                if n not in dst:
                    dst[n] = Matrix.zeros(self.field, tgt_dim, Wn.cols)
                to = toff.get(n - 1)
                dst[n].a[to:to + piece.rows, :] += piece.a
                if self.field.kind == "prime":
                    dst[n].a[to:to + piece.rows, :] %= self.field.p
        return out

    # -- homology ---------------------------------------------------------------

    def homology_dims(self, stages=None, cap: int | None = None) -> dict:
        bc = self
        for fn in (stages or []):
            bc = bc.reduce(fn, cap=cap)
        bc = bc.reduce(lambda k: 0, cap=cap)
        # after full grouping a single zero-differential block remains
        out = {}
        for c in bc.blocks.values():
            for n in c.degrees():
                if c.dim(n):
                    out[n] = out.get(n, 0) + c.dim(n)
        return out

    def is_acyclic(self, stages=None, cap: int | None = None) -> bool:
        return not self.homology_dims(stages, cap)

    def connectivity(self, stages=None, cap: int | None = None):
        h = self.homology_dims(stages, cap)
        return math.inf if not h else min(h) - 1

    def shift_all(self, k: int) -> "BlockComplex":
        sign = self.field.normalize((-1) ** k)
        blocks = {key: c.shift(k) for key, c in self.blocks.items()}
        trans = {}
        for (s, t), comps in self.trans.items():
            trans[(s, t)] = {n + k: (m.scale(sign) if k % 2 else m) for n, m in comps.items()}
        return BlockComplex(self.field, blocks, trans)


class BlockMap:
    """A degree-0 chain map between block complexes, block-sparse."""

    def __init__(self, src: BlockComplex, dst: BlockComplex, comps: dict):
        self.src = src
        self.dst = dst
        self.comps = {}
        for (s, t), by_deg in comps.items():
            if s not in src.blocks or t not in dst.blocks:
                continue
            kept = {n: m for n, m in by_deg.items() if m.rows and m.cols and not m.is_zero()}
            if kept:
                self.comps[(s, t)] = kept

    def assemble(self) -> ChainMap:
        sd, soff = self.src.assemble()
        td, toff = self.dst.assemble()
        comps = {}
        for n in set(list(sd.degrees()) + list(td.degrees())):
            comps[n] = Matrix.zeros(self.src.field, td.dim(n), sd.dim(n))
        for (s, t), by_deg in self.comps.items():
            for n, m in by_deg.items():
                r0 = toff[t].get(n)
                c0 = soff[s].get(n)
                if r0 is None or c0 is None:
                    continue
                comps[n].a[r0:r0 + m.rows, c0:c0 + m.cols] += m.a
                if self.src.field.kind == "prime":
                    comps[n].a[r0:r0 + m.rows, c0:c0 + m.cols] %= self.src.field.p
        return ChainMap(sd, td, comps)

    def assemble_component(self, n: int) -> Matrix:
        """The degree-n component alone, in the canonical offsets."""
        _, soff, sdims = self.src.assemble_degree(n)
        _, doff, ddims = self.dst.assemble_degree(n)
        m = Matrix.zeros(self.src.field, ddims.get(n, 0), sdims.get(n, 0))
        for (s, t), by_deg in self.comps.items():
            mat = by_deg.get(n)
            if mat is None:
                continue
            r0 = doff[t].get(n)
            c0 = soff[s].get(n)
            if r0 is None or c0 is None:
                continue
            m.a[r0:r0 + mat.rows, c0:c0 + mat.cols] += mat.a
            if self.src.field.kind == "prime":
                m.a[r0:r0 + mat.rows, c0:c0 + mat.cols] %= self.src.field.p
        return m

    def compose(self, first: "BlockMap") -> "BlockMap":
        out = {}
        for (s, m), c1 in first.comps.items():
            for (m2, t), c2 in self.comps.items():
                if m2 != m:
                    continue
                for n, a in c1.items():
                    b = c2.get(n)
                    if b is None:
                        continue
                    prod = b @ a
                    if prod.is_zero():
                        continue
                    dst = out.setdefault((s, t), {})
                    dst[n] = prod if n not in dst else dst[n] + prod
        return BlockMap(first.src, self.dst, out)


def split_map(src: BlockComplex, dst: BlockComplex, f: ChainMap) -> BlockMap:
    """Split a dense chain map between the assembled complexes into a
    block-sparse map, using the canonical offsets."""
    _, soff = src.assemble()
    _, doff = dst.assemble()
    comps = {}
    for sk, sc in src.blocks.items():
        for dk, dc in dst.blocks.items():
            by_deg = {}
            for n in sc.degrees():
                if dc.dim(n) == 0 or sc.dim(n) == 0:
                    continue
                r0 = doff[dk].get(n)
                c0 = soff[sk].get(n)
                if r0 is None or c0 is None:
                    continue
                m = Matrix(src.field, f.comp(n).a[r0:r0 + dc.dim(n), c0:c0 + sc.dim(n)].copy())
                if not m.is_zero():
                    by_deg[n] = m
            if by_deg:
                comps[(sk, dk)] = by_deg
    return BlockMap(src, dst, comps)


def cone_block(f: BlockMap) -> BlockComplex:
    """Mapping cone of a block map, as a block complex."""
    field = f.src.field
    blocks = {}
    trans = {}
    minus = field.normalize(-1)
    for k, c in f.src.blocks.items():
        blocks[("s", k)] = c.shift(1)
    for k, c in f.dst.blocks.items():
        blocks[("t", k)] = c
    for (s, t), comps in f.src.trans.items():
        trans[(("s", s), ("s", t))] = {n + 1: m.scale(minus) for n, m in comps.items()}
    for (s, t), comps in f.dst.trans.items():
        trans[(("t", s), ("t", t))] = dict(comps)
    for (s, t), comps in f.comps.items():
        trans[(("s", s), ("t", t))] = {n + 1: m for n, m in comps.items()}
    return BlockComplex(field, blocks, trans)


def hofib_block(f: BlockMap) -> BlockComplex:
    """Homotopy fiber of a block map, as a block complex."""
    field = f.src.field
    blocks = {}
    trans = {}
    minus = field.normalize(-1)
    for k, c in f.src.blocks.items():
        blocks[("s", k)] = c
    for k, c in f.dst.blocks.items():
        blocks[("t", k)] = c.shift(-1)
    for (s, t), comps in f.src.trans.items():
        trans[(("s", s), ("s", t))] = dict(comps)
    for (s, t), comps in f.dst.trans.items():
        trans[(("t", s), ("t", t))] = {n - 1: m.scale(minus) for n, m in comps.items()}
    for (s, t), comps in f.comps.items():
        trans[(("s", s), ("t", t))] = dict(comps)
    return BlockComplex(field, blocks, trans)
