"""Cubical diagrams, total (co)fibers, and poset homotopy (co)limits.

Cubes are functors on the subset lattice of {1..n}; total fibers are
computed by the iterated-fiber recursion, with the normalized cosimplicial
homotopy limit over the punctured cube kept as an independent cross-check
model.  Homotopy colimits use the normalized bar construction over a finite
poset.  Both totalizations are built as block complexes, so large instances
reduce well; the dense versions assemble them.
"""

from __future__ import annotations

import itertools

from .blockcx import BlockComplex, BlockMap, hofib_block
from .cfcat import (
    CfContext,
    CfMorphism,
    CfObject,
    Coproduct,
    coproduct_over,
    coproduct_over_A,
)
from .complexes import ChainComplex, ChainMap, cone, hofib
from .matrix import Matrix


def subsets(n: int):
    base = range(1, n + 1)
    out = []
    for r in range(n + 1):
        out.extend(frozenset(c) for c in itertools.combinations(base, r))
    return out


def subset_key(s) -> tuple:
    return tuple(sorted(s))


class Cube:
    """An n-cube of chain complexes: vertices per subset, edges per covering
    inclusion, all square faces commuting exactly."""

    def __init__(self, n: int, vertices: dict, edges: dict, validate: bool = True):
        self.n = n
        self.vertices = {frozenset(k): v for k, v in vertices.items()}
        self.edges = {(frozenset(s), i): e for (s, i), e in edges.items()}
        if validate:
            self.validate()

    def vertex(self, s) -> ChainComplex:
        return self.vertices[frozenset(s)]

    def edge(self, s, i) -> ChainMap:
        return self.edges[(frozenset(s), i)]

    def validate(self):
        for s in subsets(self.n):
            free = [i for i in range(1, self.n + 1) if i not in s]
            for i, j in itertools.combinations(free, 2):
                one = self.edge(s | {i}, j).compose(self.edge(s, i))
                two = self.edge(s | {j}, i).compose(self.edge(s, j))
                if not (one == two):
                    raise ValueError(f"face at {sorted(s)} +{i},{j} does not commute")

    def map_along(self, s, t) -> ChainMap:
        """The composite map along any path from s to t (s ⊆ t)."""
        s, t = frozenset(s), frozenset(t)
        cur = s
        m = ChainMap.identity(self.vertex(s))
        for i in sorted(t - s):
            m = self.edge(cur, i).compose(m)
            cur = cur | {i}
        return m

    def permute(self, perm: dict) -> "Cube":
        """Relabel directions by a permutation {old: new}."""
        verts = {frozenset(perm[i] for i in s): v for s, v in self.vertices.items()}
        edges = {(frozenset(perm[i] for i in s), perm[i2]): e
                 for (s, i2), e in self.edges.items()}
        return Cube(self.n, verts, edges, validate=False)

    def to_json(self) -> dict:
        verts = {}
        for s, v in self.vertices.items():
            mask = sum(1 << (i - 1) for i in s)
            verts[str(mask)] = v.to_json()
        edges = {}
        for (s, i), e in self.edges.items():
            mask = sum(1 << (j - 1) for j in s)
            edges[f"{mask}->{mask | (1 << (i - 1))}"] = e.to_json()
        return {"n": self.n, "vertices": verts, "edges": edges}


class CubeMap:
    """A natural transformation of n-cubes: vertexwise maps commuting with
    all edges."""

    def __init__(self, source: Cube, target: Cube, comps: dict, validate: bool = True):
        self.source = source
        self.target = target
        self.comps = {frozenset(k): v for k, v in comps.items()}
        if validate:
            for (s, i), e in source.edges.items():
                lhs = self.comps[s | {i}].compose(e)
                rhs = target.edge(s, i).compose(self.comps[s])
                if not (lhs == rhs):
                    raise ValueError(f"cube map not natural at {sorted(s)} +{i}")


class CfCube:
    """An n-cube of factorization objects."""

    def __init__(self, n: int, objects: dict, morphisms: dict, validate: bool = False):
        self.n = n
        self.objects = {frozenset(k): v for k, v in objects.items()}
        self.morphisms = {(frozenset(s), i): m for (s, i), m in morphisms.items()}
        if validate:
            self.underlying().validate()

    def object(self, s) -> CfObject:
        return self.objects[frozenset(s)]

    def morphism(self, s, i) -> CfMorphism:
        return self.morphisms[(frozenset(s), i)]

    def underlying(self) -> Cube:
        return Cube(self.n,
                    {s: o.X for s, o in self.objects.items()},
                    {(s, i): m.g for (s, i), m in self.morphisms.items()},
                    validate=False)


# -- total fiber / cofiber ------------------------------------------------------


def _split(cube: Cube):
    """Split along the largest direction into (top, bottom, edge maps)."""
    j = cube.n
    tops, bots, edges = {}, {}, {}
    for s, v in cube.vertices.items():
        if j in s:
            bots[frozenset(x for x in s if x != j)] = v
        else:
            tops[s] = v
    tedges, bedges = {}, {}
    for (s, i), e in cube.edges.items():
        if i == j:
            edges[s] = e
        elif j in s:
            bedges[(frozenset(x for x in s if x != j), i)] = e
        else:
            tedges[(s, i)] = e
    top = Cube(j - 1, tops, tedges, validate=False)
    bot = Cube(j - 1, bots, bedges, validate=False)
    return top, bot, edges


def tfiber(cube: Cube):
    """Total fiber by iterated homotopy fibers; returns (complex, projection
    to the initial vertex)."""
    if cube.n == 0:
        v = cube.vertex(frozenset())
        return v, ChainMap.identity(v)
    top, bot, edges = _split(cube)
    t_top, p_top = tfiber(top)
    t_bot, _ = tfiber(bot)
    phi = tfiber_map(CubeMap(top, bot, {s: edges[s] for s in top.vertices}, validate=False))
    fib, proj = hofib(phi)
    return fib, p_top.compose(proj)


def tfiber_map(cm: CubeMap) -> ChainMap:
    """The induced map of total fibers of a map of cubes."""
    cube = cm.source
    if cube.n == 0:
        return cm.comps[frozenset()]
    stop, sbot, sedges = _split(cm.source)
    ttop, tbot, tedges = _split(cm.target)
    ftop = tfiber_map(CubeMap(stop, ttop, {s: cm.comps[s] for s in stop.vertices},
                              validate=False))
    fbot = tfiber_map(CubeMap(sbot, tbot,
                              {s: cm.comps[s | {cm.source.n}] for s in sbot.vertices},
                              validate=False))
    src_phi = tfiber_map(CubeMap(stop, sbot, {s: sedges[s] for s in stop.vertices},
                                 validate=False))
    tgt_phi = tfiber_map(CubeMap(ttop, tbot, {s: tedges[s] for s in ttop.vertices},
                                 validate=False))
    sfib, _ = hofib(src_phi)
    tfib, _ = hofib(tgt_phi)
    comps = {}
    field = sfib.field
    for n in range(min(sfib.lo, tfib.lo), max(sfib.hi, tfib.hi) + 1):
        a = ftop.comp(n)
        b = fbot.comp(n + 1)
        grid = [[a, Matrix.zeros(field, a.rows, b.cols)],
                [Matrix.zeros(field, b.rows, a.cols), b]]
        comps[n] = Matrix.block(grid)
    return ChainMap(sfib, tfib, comps, validate=False)


def tcofiber(cube: Cube) -> ChainComplex:
    """Total cofiber by iterated mapping cones."""
    if cube.n == 0:
        return cube.vertex(frozenset())
    top, bot, edges = _split(cube)
    phi = tcofiber_map(CubeMap(top, bot, {s: edges[s] for s in top.vertices},
                               validate=False))
    cn, _ = cone(phi)
    return cn


def tcofiber_map(cm: CubeMap) -> ChainMap:
    cube = cm.source
    if cube.n == 0:
        return cm.comps[frozenset()]
    stop, sbot, sedges = _split(cm.source)
    ttop, tbot, tedges = _split(cm.target)
    ftop = tcofiber_map(CubeMap(stop, ttop, {s: cm.comps[s] for s in stop.vertices},
                                validate=False))
    fbot = tcofiber_map(CubeMap(sbot, tbot,
                                {s: cm.comps[s | {cm.source.n}] for s in sbot.vertices},
                                validate=False))
    src_phi = tcofiber_map(CubeMap(stop, sbot, {s: sedges[s] for s in stop.vertices},
                                   validate=False))
    tgt_phi = tcofiber_map(CubeMap(ttop, tbot, {s: tedges[s] for s in ttop.vertices},
                                   validate=False))
    scone, _ = cone(src_phi)
    tcone, _ = cone(tgt_phi)
    comps = {}
    field = scone.field
    for n in range(min(scone.lo, tcone.lo), max(scone.hi, tcone.hi) + 1):
        a = ftop.comp(n - 1)
        b = fbot.comp(n)
        grid = [[a, Matrix.zeros(field, a.rows, b.cols)],
                [Matrix.zeros(field, b.rows, a.cols), b]]
        comps[n] = Matrix.block(grid)
    return ChainMap(scone, tcone, comps, validate=False)


def is_cartesian(cube: Cube) -> bool:
    fib, _ = tfiber(cube)
    return fib.is_acyclic()


def is_cocartesian(cube: Cube) -> bool:
    return tcofiber(cube).is_acyclic()


def is_strongly_cocartesian(cube: Cube) -> bool:
    for s in subsets(cube.n):
        free = [i for i in range(1, cube.n + 1) if i not in s]
        for i, j in itertools.combinations(free, 2):
            face = Cube(2,
                        {frozenset(): cube.vertex(s),
                         frozenset({1}): cube.vertex(s | {i}),
                         frozenset({2}): cube.vertex(s | {j}),
                         frozenset({1, 2}): cube.vertex(s | {i, j})},
                        {(frozenset(), 1): cube.edge(s, i),
                         (frozenset(), 2): cube.edge(s, j),
                         (frozenset({1}), 2): cube.edge(s | {i}, j),
                         (frozenset({2}), 1): cube.edge(s | {j}, i)},
                        validate=False)
            if not is_cocartesian(face):
                return False
    return True


# -- finite posets and their (co)limits --------------------------------------------


class Poset:
    """A finite poset given by elements and the full order relation."""

    def __init__(self, elements, leq):
        self.elements = sorted(elements)
        self._leq = {(a, b) for a in self.elements for b in self.elements
                     if leq(a, b)}
        self._chains = None

    def leq(self, a, b) -> bool:
        return (a, b) in self._leq

    def lt(self, a, b) -> bool:
        return a != b and self.leq(a, b)

    def chains(self):
        """All strictly increasing chains, as tuples (cached)."""
        if self._chains is None:
            out = []

            def extend(chain):
                out.append(tuple(chain))
                last = chain[-1]
                for e in self.elements:
                    if self.lt(last, e):
                        chain.append(e)
                        extend(chain)
                        chain.pop()

            for e in self.elements:
                extend([e])
            self._chains = out
        return self._chains

    def full_subposet(self, elems) -> "Poset":
        elems = set(elems)
        return Poset([e for e in self.elements if e in elems], lambda a, b: self.leq(a, b))

    def minimum(self):
        mins = [e for e in self.elements if all(self.leq(e, x) for x in self.elements)]
        return mins[0] if mins else None

    def maximum(self):
        maxs = [e for e in self.elements if all(self.leq(x, e) for x in self.elements)]
        return maxs[0] if maxs else None


def punctured_subset_poset(n: int) -> Poset:
    elems = [subset_key(s) for s in subsets(n) if s]
    return Poset(elems, lambda a, b: set(a) <= set(b))


class PosetDiagram:
    """A functor from a finite poset to chain complexes."""

    def __init__(self, poset: Poset, values: dict, maps: dict, validate: bool = True):
        self.poset = poset
        self.values = values
        self.maps = dict(maps)  # (a, b) for a < b -> ChainMap
        if validate:
            self.validate()

    def value(self, e) -> ChainComplex:
        return self.values[e]

    def map(self, a, b) -> ChainMap:
        if a == b:
            return ChainMap.identity(self.values[a])
        return self.maps[(a, b)]

    def validate(self):
        for (a, b), m in self.maps.items():
            for c in self.poset.elements:
                if self.poset.lt(a, c) and self.poset.lt(c, b):
                    comp = self.map(c, b).compose(self.map(a, c))
                    if not (comp == m):
                        raise ValueError(f"diagram not functorial on {a} < {c} < {b}")

    @staticmethod
    def from_cube(cube: Cube, elements=None) -> "PosetDiagram":
        """The punctured-cube diagram of a cube (nonempty subsets)."""
        poset = punctured_subset_poset(cube.n)
        values = {e: cube.vertex(e) for e in poset.elements}
        maps = {}
        for a in poset.elements:
            for b in poset.elements:
                if poset.lt(a, b):
                    maps[(a, b)] = cube.map_along(a, b)
        return PosetDiagram(poset, values, maps, validate=False)


def holim_blocks(diag: PosetDiagram) -> BlockComplex:
    """Normalized cosimplicial homotopy limit as a block complex.

    Blocks are indexed by strictly increasing chains; the block of a chain
    of length p is the value at its last element shifted down by p.  The
    transition differential is the alternating face sum; only the last face
    applies the diagram map.
    """
    field = next(iter(diag.values.values())).field if diag.values else None
    blocks, trans = {}, {}
    for chain in diag.poset.chains():
        p = len(chain) - 1
        blocks[chain] = diag.value(chain[-1]).shift(-p)
    for chain in diag.poset.chains():
        p = len(chain) - 1
        if p == 0:
            continue
        for j in range(p + 1):
            sub = chain[:j] + chain[j + 1:]
            sign = field.normalize((-1) ** j)
            src_val = diag.value(sub[-1])
            comps = {}
            if j < p:
                for n in src_val.degrees():
                    m = Matrix.identity(field, src_val.dim(n))
                    comps[n - (p - 1)] = m.scale(sign) if j % 2 else m
            else:
                f = diag.map(chain[p - 1], chain[p])
                for n in src_val.degrees():
                    m = f.comp(n)
                    if m.rows and m.cols:
                        comps[n - (p - 1)] = m.scale(sign) if j % 2 else m
            if comps:
                trans[(sub, chain)] = comps
    return BlockComplex(field, blocks, trans)


def punctured_holim(diag: PosetDiagram) -> ChainComplex:
    """Dense normalized homotopy limit over a finite poset."""
    return holim_blocks(diag).assemble()[0]


def holim_augmentation_blocks(diag: PosetDiagram, apex: ChainComplex,
                              legs: dict) -> BlockMap:
    """The canonical map apex -> holim: nonzero only on one-element chains,
    where it is the given leg apex -> value(e)."""
    bc = holim_blocks(diag)
    comps = {}
    for e, leg in legs.items():
        by_deg = {n: leg.comp(n) for n in range(min(apex.lo, leg.target.lo),
                                                max(apex.hi, leg.target.hi) + 1)}
        comps[(e,)] = by_deg
    return bc.map_from_complex(comps, apex)


def holim_restriction_map(diag: PosetDiagram, subelems):
    """Restriction of the holim to a full subposet, as (map, sub diagram).

    The map projects onto the summands indexed by chains of the subposet.
    """
    sub_poset = diag.poset.full_subposet(subelems)
    sub_diag = PosetDiagram(sub_poset, {e: diag.value(e) for e in sub_poset.elements},
                            {(a, b): diag.map(a, b)
                             for a in sub_poset.elements for b in sub_poset.elements
                             if sub_poset.lt(a, b)}, validate=False)
    big = holim_blocks(diag)
    small = holim_blocks(sub_diag)
    keep = set(small.blocks.keys())
    dense_big, off_big = big.assemble()
    dense_small, off_small = small.assemble()
    field = dense_big.field
    comps = {}
    for n in dense_big.degrees():
        m = Matrix.zeros(field, dense_small.dim(n), dense_big.dim(n))
        for chain in keep:
            blk = big.blocks.get(chain)
            if blk is None or blk.dim(n) == 0:
                continue
            r0 = off_small[chain][n]
            c0 = off_big[chain][n]
            for k in range(blk.dim(n)):
                m.a[r0 + k, c0 + k] = field.one()
        comps[n] = m
    return ChainMap(dense_big, dense_small, comps), sub_diag


def bar_blocks(diag: PosetDiagram) -> BlockComplex:
    """Normalized bar homotopy colimit as a block complex.

    The block of a chain of length p is the value at its first element
    shifted up by p; faces drop chain elements, the zeroth face pushing the
    value forward along the first step.
    """
    field = next(iter(diag.values.values())).field if diag.values else None
    blocks, trans = {}, {}
    for chain in diag.poset.chains():
        p = len(chain) - 1
        blocks[chain] = diag.value(chain[0]).shift(p)
    for chain in diag.poset.chains():
        p = len(chain) - 1
        if p == 0:
            continue
        src_val = diag.value(chain[0])
        for j in range(p + 1):
            sub = chain[:j] + chain[j + 1:]
            sign = (-1) ** j
            comps = {}
            if j == 0:
                f = diag.map(chain[0], chain[1])
                for n in src_val.degrees():
                    m = f.comp(n)
                    if m.rows and m.cols:
                        comps[n + p] = m
            else:
                for n in src_val.degrees():
                    m = Matrix.identity(field, src_val.dim(n))
                    comps[n + p] = m.scale(field.normalize(-1)) if j % 2 else m
            if comps:
                trans[(chain, sub)] = comps
    return BlockComplex(field, blocks, trans)


def bar_hocolim(diag: PosetDiagram) -> ChainComplex:
    """Dense normalized bar homotopy colimit over a finite poset."""
    return bar_blocks(diag).assemble()[0]


def hocolim_to_terminal_map(diag: PosetDiagram) -> ChainMap:
    """For a poset with a maximum, the canonical map hocolim -> value(max)."""
    top = diag.poset.maximum()
    if top is None:
        raise ValueError("poset has no maximum")
    bc = bar_blocks(diag)
    dense, offs = bc.assemble()
    tgt = diag.value(top)
    field = dense.field
    comps = {n: Matrix.zeros(field, tgt.dim(n), dense.dim(n)) for n in dense.degrees()}
    for chain in bc.blocks:
        if len(chain) != 1:
            continue
        e = chain[0]
        leg = diag.map(e, top)
        for n in diag.value(e).degrees():
            c0 = offs[chain][n]
            comps[n].a[:, c0:c0 + diag.value(e).dim(n)] += leg.comp(n).a
            if field.kind == "prime":
                comps[n].a[:, c0:c0 + diag.value(e).dim(n)] %= field.p
    return ChainMap(dense, tgt, comps)


def tfiber_via_holim(cube: Cube):
    """Cross-check model: hofib(initial vertex -> punctured holim)."""
    diag = PosetDiagram.from_cube(cube)
    apex = cube.vertex(frozenset())
    legs = {e: cube.map_along(frozenset(), e) for e in diag.poset.elements}
    aug = holim_augmentation_blocks(diag, apex, legs)
    return hofib_block(aug)


# -- standard cubes of factorization objects --------------------------------------


def _proj_morphism(x: CfObject) -> CfMorphism:
    return CfMorphism(x, x.ctx.terminal(), x.proj, validate=False)


def _incl_morphism(x: CfObject) -> CfMorphism:
    return CfMorphism(x.ctx.initial(), x, x.incl, validate=False)


def build_coproduct_cube(xs) -> CfCube:
    """The cube sending S to the coproduct over A with B substituted in the
    slots of S; edges induced by the structure projections.

    The returned cube carries the coproduct presentations in `cops`.
    """
    n = len(xs)
    ctx = xs[0].ctx
    term = ctx.terminal()
    cops, objs = {}, {}
    for s in subsets(n):
        factors = [term if (i + 1) in s else xs[i] for i in range(n)]
        obj, injs, cop = coproduct_over_A(factors)
        cops[s] = cop
        objs[s] = obj
    morphs = {}
    for s in subsets(n):
        cop = cops[s]
        for i in range(1, n + 1):
            if i in s:
                continue
            tgt_cop = cops[s | {i}]
            maps = []
            for k in range(n):
                if k + 1 == i:
                    maps.append(tgt_cop.injections[k].compose(xs[k].proj))
                else:
                    maps.append(tgt_cop.injections[k])
            g = cop.map_out(maps)
            morphs[(s, i)] = CfMorphism(objs[s], objs[s | {i}], g, validate=False)
    out = CfCube(n, objs, morphs)
    out.cops = cops
    return out


def build_initial_cube(xs) -> CfCube:
    """The strongly cocartesian cube sending S to the coproduct over A of
    the objects in the slots of S; edges induced by the inclusions."""
    n = len(xs)
    ctx = xs[0].ctx
    morphs_from_initial = [_incl_morphism(x) for x in xs]
    return generate_strongly_cocartesian(ctx.initial(), morphs_from_initial)


def generate_strongly_cocartesian(z: CfObject, ys) -> CfCube:
    """Vertex at S = iterated pushout over z of {target of ys[i] : i in S}."""
    n = len(ys)
    for m in ys:
        if not m.g.is_degreewise_injective():
            raise ValueError("generating morphisms must be degreewise injective")
    cops, objs = {}, {}
    for s in subsets(n):
        if not s:
            objs[s] = z
            cops[s] = None
            continue
        sel = [ys[i - 1] for i in sorted(s)]
        obj, injs, cop = coproduct_over(z, sel)
        objs[s] = obj
        cops[s] = cop
    morphs = {}
    for s in subsets(n):
        for i in range(1, n + 1):
            if i in s:
                continue
            t = s | {i}
            tgt_cop = cops[t]
            tsorted = sorted(t)
            if not s:
                g = tgt_cop.from_base
            else:
                src_cop = cops[s]
                maps = [tgt_cop.injections[tsorted.index(k)] for k in sorted(s)]
                g = src_cop.map_out(maps)
            morphs[(s, i)] = CfMorphism(objs[s], objs[t], g, validate=False)
    out = CfCube(n, objs, morphs)
    out.cops = {s: c for s, c in cops.items() if c is not None}
    return out


def build_double_cube(xs):
    """The grid over pairs (S, T) whose entry tuple has A outside S ∪ T,
    X_i on S - T, and B on T, with the coproduct applied.

    Returns (objects, s_edges, t_edges): s_edges[(S, T, i)] increments S,
    t_edges[(S, T, i)] increments T.
    """
    n = len(xs)
    ctx = xs[0].ctx
    ini, term = ctx.initial(), ctx.terminal()
    f_mor = CfMorphism(ini, term, ctx.f, validate=False)

    def entry(s, t, i):
        if (i + 1) in t:
            return term
        if (i + 1) in s:
            return xs[i]
        return ini

    cops, objs = {}, {}
    for s in subsets(n):
        for t in subsets(n):
            factors = [entry(s, t, i) for i in range(n)]
            obj, injs, cop = coproduct_over_A(factors)
            objs[(s, t)] = obj
            cops[(s, t)] = cop

    def induced(src_key, dst_key, slot_maps):
        cop = cops[src_key]
        tgt = cops[dst_key]
        maps = []
        for k in range(n):
            m = slot_maps.get(k)
            if m is None:
                maps.append(tgt.injections[k])
            else:
                maps.append(tgt.injections[k].compose(m.g))
        return CfMorphism(objs[src_key], objs[dst_key], cop.map_out(maps), validate=False)

    s_edges, t_edges = {}, {}
    for s in subsets(n):
        for t in subsets(n):
            for i in range(1, n + 1):
                if i not in s:
                    # A -> X_i if i not in T, identity otherwise
                    if i in t:
                        slot = {}
                    else:
                        slot = {i - 1: _incl_morphism(xs[i - 1])}
                    s_edges[(s, t, i)] = induced((s, t), (s | {i}, t), slot)
                if i not in t:
                    if i in s:
                        slot = {i - 1: _proj_morphism(xs[i - 1])}
                    else:
                        slot = {i - 1: f_mor}
                    t_edges[(s, t, i)] = induced((s, t), (s, t | {i}), slot)
    return objs, s_edges, t_edges


def double_cube_t_slice(objs, t_edges, n: int, s) -> CfCube:
    """For fixed S, the cube T ↦ entry(S, T) with the T-direction edges."""
    s = frozenset(s)
    verts = {t: objs[(s, t)] for t in subsets(n)}
    morphs = {(t, i): t_edges[(s, t, i)] for t in subsets(n)
              for i in range(1, n + 1) if i not in t}
    return CfCube(n, verts, morphs)
