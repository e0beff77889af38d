"""A closed symbolic algebra of weak-equivalence-preserving functors from the
factorization category to chain complexes.

Specs are data (serializable trees); evaluation on objects and morphisms is
deterministic and exactly functorial.  The catalog built from these specs is
the test bed for all degree/excision/tower checks.
"""

from __future__ import annotations

import itertools

from .cfcat import CfMorphism, CfObject, coproduct_over_A, fold
from .complexes import ChainComplex, ChainMap, cone, direct_sum, tensor, tensor_map
from .cube import Cube, CfCube, Poset, PosetDiagram, bar_hocolim
from .field import Field
from .matrix import Matrix


class FunctorSpec:
    """Expression tree over the functor constructors.

    ops: underlying | const | tensor_power | sym_power | direct_sum |
    post_shift | post_homology | rel_cofiber | perp_of | tn_of.
    Evaluation preserves quasi-isomorphisms; functor laws hold exactly.
    """

    def __init__(self, op: str, *, m: int | None = None, k: int | None = None,
                 n: int | None = None, value: ChainComplex | None = None,
                 parts=None, inner: "FunctorSpec" | None = None,
                 commutes_with_realization: bool | None = None):
        self.op = op
        self.m = m
        self.k = k
        self.n = n
        self.value = value
        self.parts = list(parts) if parts is not None else None
        self.inner = inner
        if commutes_with_realization is None:
            commutes_with_realization = self._default_realization_flag()
        self.commutes_with_realization = commutes_with_realization
        self._val_cache = {}
        self._map_cache = {}
        self._sym_cache = {}

    def _default_realization_flag(self) -> bool:
        if self.op in ("underlying", "const", "rel_cofiber"):
            return True
        if self.op in ("tensor_power", "sym_power"):
            return True
        if self.op == "direct_sum":
            return all(p.commutes_with_realization for p in self.parts)
        if self.op == "post_shift":
            return self.inner.commutes_with_realization
        if self.op == "post_homology":
            return False
        return False

    # -- evaluation -------------------------------------------------------

    def evaluate(self, x: CfObject) -> ChainComplex:
        key = id(x)
        hit = self._val_cache.get(key)
        if hit is not None:
            return hit[1]
        val = self._evaluate(x)
        self._val_cache[key] = (x, val)
        return val

    def _evaluate(self, x: CfObject) -> ChainComplex:
        op = self.op
        if op == "underlying":
            return x.X
        if op == "const":
            return self.value
        if op == "tensor_power":
            base = self._inner().evaluate(x)
            return _tensor_power(base, self.m)
        if op == "sym_power":
            self._check_char(x.ctx.field)
            base = self._inner().evaluate(x)
            return self._sym_data(base)[0]
        if op == "direct_sum":
            total, _, _ = direct_sum([p.evaluate(x) for p in self.parts])
            return total
        if op == "post_shift":
            return self._inner().evaluate(x).shift(self.k)
        if op == "post_homology":
            c = self._inner().evaluate(x)
            h = c._homology_data(self.m)[3].cols if c.dim(self.m) else 0
            return ChainComplex(x.ctx.field, {0: h}, {}, validate=False)
        if op == "rel_cofiber":
            cn, _ = cone(x.incl)
            return cn
        if op == "perp_of":
            from .crosseff import perp_complex
            return perp_complex(self._inner(), self.n, x, 1)
        if op == "tn_of":
            from .tower import tn_complex
            return tn_complex(self._inner(), self.n, x)
        raise ValueError(f"unknown functor op {self.op!r}")

    def evaluate_map(self, g: CfMorphism) -> ChainMap:
        key = id(g)
        hit = self._map_cache.get(key)
        if hit is not None:
            return hit[1]
        val = self._evaluate_map(g)
        self._map_cache[key] = (g, val)
        return val

    def _evaluate_map(self, g: CfMorphism) -> ChainMap:
        op = self.op
        src = self.evaluate(g.source)
        tgt = self.evaluate(g.target)
        if op == "underlying":
            return g.g
        if op == "const":
            return ChainMap.identity(self.value)
        if op == "tensor_power":
            inner = self._inner().evaluate_map(g)
            return _tensor_power_map(inner, self.m)
        if op == "sym_power":
            inner = self._inner().evaluate_map(g)
            ksrc = self._sym_data(inner.source)[1]
            ktgt = self._sym_data(inner.target)[1]
            big = _tensor_power_map(inner, self.m)
            comps = {}
            for n in src.degrees():
                if tgt.dim(n) == 0 or src.dim(n) == 0:
                    continue
                comps[n] = ktgt[n].solve_right(big.comp(n) @ ksrc[n])
            return ChainMap(src, tgt, comps, validate=False)
        if op == "direct_sum":
            maps = [p.evaluate_map(g) for p in self.parts]
            comps = {}
            if src.total_dim() or tgt.total_dim():
                for n in range(min(src.lo, tgt.lo), max(src.hi, tgt.hi) + 1):
                    blocks = [m.comp(n) for m in maps]
                    acc = blocks[0]
                    for b in blocks[1:]:
                        acc = acc.direct_sum(b)
                    comps[n] = acc
            return ChainMap(src, tgt, comps, validate=False)
        if op == "post_shift":
            return self._inner().evaluate_map(g).shift(self.k)
        if op == "post_homology":
            inner = self._inner().evaluate_map(g)
            m = inner.induced_on_homology(self.m)
            return ChainMap(src, tgt, {0: m}, validate=False)
        if op == "rel_cofiber":
            field = g.source.ctx.field
            comps = {}
            for n in range(min(src.lo, tgt.lo), max(src.hi, tgt.hi) + 1):
                a = Matrix.identity(field, g.source.ctx.A.dim(n - 1))
                b = g.g.comp(n)
                comps[n] = a.direct_sum(b)
            return ChainMap(src, tgt, comps, validate=False)
        if op == "perp_of":
            from .crosseff import perp_complex_map
            return perp_complex_map(self._inner(), self.n, g, 1)
        if op == "tn_of":
            from .tower import tn_complex_map
            return tn_complex_map(self._inner(), self.n, g)
        raise ValueError(f"unknown functor op {self.op!r}")

    def evaluate_cube(self, cube: CfCube) -> Cube:
        verts = {s: self.evaluate(o) for s, o in cube.objects.items()}
        edges = {(s, i): self.evaluate_map(m) for (s, i), m in cube.morphisms.items()}
        return Cube(cube.n, verts, edges, validate=False)

    # -- helpers ------------------------------------------------------------

    def _inner(self) -> "FunctorSpec":
        return self.inner if self.inner is not None else underlying()

    def _check_char(self, field: Field):
        ch = field.characteristic()
        if ch != 0 and ch <= self.m:
            raise ValueError(
                f"symmetric power of exponent {self.m} needs characteristic 0 or > {self.m}")

    def _sym_data(self, base: ChainComplex):
        key = id(base)
        hit = self._sym_cache.get(key)
        if hit is not None:
            return hit[1], hit[2]
        value, incls = _sym_invariants(base, self.m)
        self._sym_cache[key] = (base, value, incls)
        return value, incls

    def clear_cache(self):
        self._val_cache.clear()
        self._map_cache.clear()
        self._sym_cache.clear()
        for child in (self.parts or []) + ([self.inner] if self.inner else []):
            child.clear_cache()

    # -- serialization ----------------------------------------------------------

    def to_json(self) -> dict:
        out = {"op": self.op}
        if self.m is not None:
            out["m"] = self.m
        if self.k is not None:
            out["k"] = self.k
        if self.n is not None:
            out["n"] = self.n
        if self.value is not None:
            out["value"] = self.value.to_json()
        if self.parts is not None:
            out["parts"] = [p.to_json() for p in self.parts]
        if self.inner is not None:
            out["inner"] = self.inner.to_json()
        return out

    @staticmethod
    def from_json(field: Field, obj: dict) -> "FunctorSpec":
        kw = {}
        for k in ("m", "k", "n"):
            if k in obj:
                kw[k] = obj[k]
        if "value" in obj:
            kw["value"] = ChainComplex.from_json(field, obj["value"])
        if "parts" in obj:
            kw["parts"] = [FunctorSpec.from_json(field, p) for p in obj["parts"]]
        if "inner" in obj:
            kw["inner"] = FunctorSpec.from_json(field, obj["inner"])
        return FunctorSpec(obj["op"], **kw)

    def __repr__(self):
        return f"FunctorSpec({self.to_json()})"


# -- constructors -----------------------------------------------------------------


def underlying() -> FunctorSpec:
    return FunctorSpec("underlying")


def const(value: ChainComplex) -> FunctorSpec:
    return FunctorSpec("const", value=value)


def tensor_power(m: int, inner: FunctorSpec | None = None) -> FunctorSpec:
    return FunctorSpec("tensor_power", m=m, inner=inner)


def sym_power(m: int, inner: FunctorSpec | None = None) -> FunctorSpec:
    return FunctorSpec("sym_power", m=m, inner=inner)


def functor_sum(parts) -> FunctorSpec:
    return FunctorSpec("direct_sum", parts=parts)


def post_shift(k: int, inner: FunctorSpec | None = None) -> FunctorSpec:
    return FunctorSpec("post_shift", k=k, inner=inner)


def post_homology(m: int, inner: FunctorSpec | None = None) -> FunctorSpec:
    return FunctorSpec("post_homology", m=m, inner=inner)


def rel_cofiber() -> FunctorSpec:
    return FunctorSpec("rel_cofiber")


def perp_of(n: int, inner: FunctorSpec) -> FunctorSpec:
    return FunctorSpec("perp_of", n=n, inner=inner)


def tn_of(n: int, inner: FunctorSpec) -> FunctorSpec:
    return FunctorSpec("tn_of", n=n, inner=inner)


def catalog(field: Field) -> dict:
    """The standard named functor catalog used by the suites."""
    unit = ChainComplex.single(field, 0)
    return {
        "const": const(unit),
        "underlying": underlying(),
        "tensor2": tensor_power(2),
        "tensor3": tensor_power(3),
        "sym2": sym_power(2),
        "sum_u_t2": functor_sum([underlying(), tensor_power(2)]),
        "posthom1": post_homology(1),
        "shift1_tensor2": post_shift(1, tensor_power(2)),
        "rel_cofiber": rel_cofiber(),
    }


# -- tensor/symmetric powers ---------------------------------------------------------


def _tensor_power(c: ChainComplex, m: int) -> ChainComplex:
    if m < 1:
        raise ValueError("tensor power needs m >= 1")
    out = c
    for _ in range(m - 1):
        out = tensor(c, out)
    return out


def _tensor_power_map(f: ChainMap, m: int) -> ChainMap:
    out = f
    for _ in range(m - 1):
        out = tensor_map(f, out)
    return out


def _tensor_labels(c: ChainComplex, m: int) -> dict:
    """Basis labels of the iterated tensor power, per total degree, in the
    exact order produced by `_tensor_power`."""
    if m == 1:
        return {n: [((n, i),) for i in range(c.dim(n))] for n in c.degrees()}
    rest = _tensor_labels(c, m - 1)
    out = {}
    degs_rest = sorted(rest)
    if not degs_rest or c.is_zero_complex():
        return {}
    for n in range(c.lo + min(degs_rest), c.hi + max(degs_rest) + 1):
        labels = []
        for p in range(max(c.lo, n - max(degs_rest)), min(c.hi, n - min(degs_rest)) + 1):
            tail = rest.get(n - p, [])
            for i in range(c.dim(p)):
                for t in tail:
                    labels.append(((p, i),) + t)
        if labels:
            out[n] = labels
    return out


def _sym_invariants(c: ChainComplex, m: int):
    """The invariant subcomplex of the m-th tensor power under the signed
    permutation action: returns (complex, inclusion per degree)."""
    field = c.field
    big = _tensor_power(c, m)
    if m == 1:
        incls = {n: Matrix.identity(field, c.dim(n)) for n in c.degrees()}
        return c, incls
    labels = _tensor_labels(c, m)
    index = {n: {lab: i for i, lab in enumerate(labs)} for n, labs in labels.items()}
    kers = {}
    for n in labels:
        dim = len(labels[n])
        stack = []
        for k in range(m - 1):
            P = Matrix.zeros(field, dim, dim)
            for i, lab in enumerate(labels[n]):
                swapped = lab[:k] + (lab[k + 1], lab[k]) + lab[k + 2:]
                j = index[n][swapped]
                sign = -1 if (lab[k][0] % 2 and lab[k + 1][0] % 2) else 1
                P.a[j, i] = field.normalize(sign)
            stack.append(P - Matrix.identity(field, dim))
        kers[n] = Matrix.vstack(stack).kernel_basis()
    dims = {n: kers[n].cols for n in kers}
    diffs = {}
    for n in sorted(kers):
        if (n - 1) in kers and kers[n].cols:
            diffs[n] = kers[n - 1].solve_right(big.d(n) @ kers[n])
    value = ChainComplex(field, dims, diffs, validate=False)
    return value, kers


# -- natural transformations ----------------------------------------------------------


class NatTrans:
    """A natural transformation between functor specs, given by components."""

    def __init__(self, src: FunctorSpec, dst: FunctorSpec, component, name: str = ""):
        self.src = src
        self.dst = dst
        self._component = component
        self.name = name
        self._cache = {}

    def at(self, x: CfObject) -> ChainMap:
        key = id(x)
        hit = self._cache.get(key)
        if hit is not None:
            return hit[1]
        val = self._component(x)
        self._cache[key] = (x, val)
        return val

    def compose(self, first: "NatTrans") -> "NatTrans":
        return NatTrans(first.src, self.dst,
                        lambda x: self.at(x).compose(first.at(x)),
                        name=f"{self.name}∘{first.name}")

    def is_natural_on(self, g: CfMorphism) -> bool:
        lhs = self.at(g.target).compose(self.src.evaluate_map(g))
        rhs = self.dst.evaluate_map(g).compose(self.at(g.source))
        return lhs == rhs


# -- realization commutation ------------------------------------------------------------


class SimplicialCf:
    """A truncated simplicial object of the factorization category, given by
    levels and face morphisms; the zeroth degeneracy may be supplied (needed
    to extend one-skeletal data)."""

    def __init__(self, levels, faces, s0: CfMorphism | None = None,
                 validate: bool = True):
        self.levels = list(levels)
        self.faces = dict(faces)  # (p, i): level p -> level p-1
        self.s0 = s0
        if validate:
            k = len(self.levels) - 1
            for p in range(2, k + 1):
                for i in range(p + 1):
                    for j in range(i + 1, p + 1):
                        lhs = self.faces[(p - 1, i)].compose(self.faces[(p, j)])
                        rhs = self.faces[(p - 1, j - 1)].compose(self.faces[(p, i)])
                        if not (lhs.g == rhs.g):
                            raise ValueError(f"simplicial identity fails at d_{i} d_{j}, level {p}")
            if s0 is not None:
                for i in (0, 1):
                    if not self.faces[(1, i)].compose(s0).g.is_identity():
                        raise ValueError("s0 must section both faces")

    @property
    def truncation(self) -> int:
        return len(self.levels) - 1


def skeleton_poset(k: int) -> Poset:
    """Nonempty subsets of {0..k} under reverse inclusion."""
    elems = []
    base = list(range(k + 1))
    for r in range(1, k + 2):
        elems.extend(tuple(c) for c in itertools.combinations(base, r))
    return Poset(elems, lambda a, b: set(a) >= set(b))


def _skeleton_maps(poset: Poset, value_of, face_of):
    """Diagram maps over the skeleton poset: S -> T (T ⊂ S) removes elements,
    each removal of the j-th smallest applying the j-th face."""
    maps = {}

    def path_map(a, b):
        cur = a
        m = None
        while set(cur) != set(b):
            drop = max(set(cur) - set(b))
            j = sorted(cur).index(drop)
            step = face_of(len(cur) - 1, j)
            m = step if m is None else step.compose(m)
            cur = tuple(sorted(set(cur) - {drop}))
        return m

    for a in poset.elements:
        for b in poset.elements:
            if poset.lt(a, b):
                maps[(a, b)] = path_map(a, b)
    return maps


def bar_of_fold_sample(x, k: int = 1) -> SimplicialCf:
    """One-truncated sample: level 0 = x, level 1 = x ⨿_A x, both faces the
    fold, s0 the first injection."""
    from .cfcat import coproduct_over_A
    obj, injs, cop = coproduct_over_A([x, x])
    fold_m = CfMorphism(obj, x, cop.map_out([ChainMap.identity(x.X)] * 2), validate=False)
    return SimplicialCf([x, obj], {(1, 0): fold_m, (1, 1): fold_m}, s0=injs[0],
                        validate=False)


def loop_sample(x, c: CfMorphism) -> SimplicialCf:
    """A one-skeletal sample with one nondegenerate edge whose faces are the
    identity and a self-morphism c of x (a mapping-torus shape).

    Level 1 is x ⨿_A x: the first copy is the degenerate part (image of
    s0), the second the edge; d_0 restricts to the identity on the edge,
    d_1 to c.
    """
    from .cfcat import coproduct_over_A
    obj, injs, cop = coproduct_over_A([x, x])
    d0 = CfMorphism(obj, x, cop.map_out([ChainMap.identity(x.X),
                                         ChainMap.identity(x.X)]), validate=False)
    d1 = CfMorphism(obj, x, cop.map_out([ChainMap.identity(x.X), c.g]), validate=False)
    return SimplicialCf([x, obj], {(1, 0): d0, (1, 1): d1}, s0=injs[0],
                        validate=False)


def skeletal_extension(s: SimplicialCf, levels: int) -> SimplicialCf:
    """Extend one-truncated data (with s0) freely by degeneracies up to the
    given level: level p is the p-fold coproduct over level 0 of level 1
    along s0, and faces follow the collapse combinatorics of the surjections
    onto the one-simplex."""
    if s.truncation != 1 or s.s0 is None:
        raise ValueError("skeletal extension needs one-truncated data with s0")
    from .cfcat import coproduct_over
    x0, x1 = s.levels
    d0, d1 = s.faces[(1, 0)], s.faces[(1, 1)]
    s0 = s.s0
    new_levels = [x0, x1]
    cops = [None, None]
    for p in range(2, levels + 1):
        obj, injs, cop = coproduct_over(x0, [s0] * p)
        new_levels.append(obj)
        cops.append((obj, injs, cop))
    faces = {(1, 0): d0, (1, 1): d1}
    for p in range(2, levels + 1):
        src_obj, _, src_cop = cops[p]
        if p - 1 == 1:
            tgt_obj = x1
            tgt_inj = {1: ChainMap.identity(x1.X)}
            tgt_base = s0.g
        else:
            tgt_obj, tgt_injs, tgt_cop = cops[p - 1]
            tgt_inj = {j: tgt_injs[j - 1].g for j in range(1, p)}
            tgt_base = tgt_cop.from_base
        for i in range(p + 1):
            maps = []
            for j in range(1, p + 1):
                if j == p and i == p:
                    maps.append(tgt_base.compose(d1.g))
                elif j == 1 and i == 0:
                    maps.append(tgt_base.compose(d0.g))
                elif i >= j:
                    maps.append(tgt_inj[j])
                else:
                    maps.append(tgt_inj[j - 1])
            g = src_cop.map_out(maps)
            faces[(p, i)] = CfMorphism(src_obj, tgt_obj, g, validate=False)
    return SimplicialCf(new_levels, faces, s0=s0, validate=True)


def realize_cf(s: SimplicialCf) -> CfObject:
    """Realization of a truncated simplicial object via the bar homotopy
    colimit over the punctured-cube poset of its skeleton."""
    poset = skeleton_poset(s.truncation)
    values = {e: s.levels[len(e) - 1] for e in poset.elements}
    maps = _skeleton_maps(poset, None, lambda p, j: s.faces[(p, j)])
    diagram = PosetDiagram(poset, {e: v.X for e, v in values.items()},
                           {k: m.g for k, m in maps.items()}, validate=False)
    total = bar_hocolim(diagram)
    # structure maps: projection on chain-start summands; inclusion through
    # the top level (the poset minimum is the full subset)
    ctx = s.levels[0].ctx
    field = ctx.field
    from .cube import bar_blocks
    bc = bar_blocks(diagram)
    dense, offs = bc.assemble()
    projc = {n: Matrix.zeros(field, ctx.B.dim(n), dense.dim(n)) for n in dense.degrees()}
    for chain in bc.blocks:
        if len(chain) != 1:
            continue
        e = chain[0]
        val = values[e]
        for n in val.X.degrees():
            c0 = offs[chain][n]
            projc[n].a[:, c0:c0 + val.X.dim(n)] += val.proj.comp(n).a
            if field.kind == "prime":
                projc[n].a[:, c0:c0 + val.X.dim(n)] %= field.p
    proj = ChainMap(dense, ctx.B, projc, validate=False)
    top = tuple(range(s.truncation + 1))
    top_val = values[top]
    inclc = {}
    for n in dense.degrees():
        m = Matrix.zeros(field, dense.dim(n), ctx.A.dim(n))
        c0 = offs.get((top,), {}).get(n) if (top,) in bc.blocks else None
        if c0 is not None and ctx.A.dim(n):
            m.a[c0:c0 + top_val.X.dim(n), :] = top_val.incl.comp(n).a
        inclc[n] = m
    incl = ChainMap(ctx.A, dense, inclc, validate=False)
    return CfObject(ctx, dense, incl, proj, validate=False)


def realize_values(F: FunctorSpec, s: SimplicialCf) -> ChainComplex:
    """The realization of the levelwise functor values."""
    poset = skeleton_poset(s.truncation)
    values = {e: F.evaluate(s.levels[len(e) - 1]) for e in poset.elements}
    maps = _skeleton_maps(poset, None,
                          lambda p, j: F.evaluate_map(s.faces[(p, j)]))
    diagram = PosetDiagram(poset, values, maps, validate=False)
    return bar_hocolim(diagram)


def _truncate_sample(s: SimplicialCf, k: int) -> SimplicialCf:
    return SimplicialCf(s.levels[:k + 1],
                        {(p, i): m for (p, i), m in s.faces.items() if p <= k},
                        s0=s.s0, validate=False)


def verify_realization_commutation(F: FunctorSpec, samples, levels: int = 3) -> bool:
    """Sample check that applying F before or after realization agrees in
    homology.

    Samples are one-truncated one-skeletal objects (with s0); the functor
    side is extended freely by degeneracies and realized through enough
    skeleta to stabilize.  Returns False if the two sides disagree or the
    functor side has not stabilized by the requested level.
    """
    for s in samples:
        lhs = F.evaluate(realize_cf(s)).homology_dims()
        ext = skeletal_extension(s, levels)
        cur = realize_values(F, ext).homology_dims()
        prev = realize_values(F, _truncate_sample(ext, levels - 1)).homology_dims()
        if prev != cur:
            return False
        if lhs != cur:
            return False
    return True
