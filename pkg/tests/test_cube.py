import itertools

import pytest

from crosstower.cfcat import CfContext, CfObject, coproduct_over_A, tensor_with_set
from crosstower.complexes import ChainComplex, ChainMap, direct_sum, hofib
from crosstower.cube import (
    Cube,
    CubeMap,
    PosetDiagram,
    Poset,
    bar_hocolim,
    bar_blocks,
    build_coproduct_cube,
    build_double_cube,
    build_initial_cube,
    double_cube_t_slice,
    generate_strongly_cocartesian,
    hocolim_to_terminal_map,
    holim_restriction_map,
    is_cartesian,
    is_cocartesian,
    is_strongly_cocartesian,
    punctured_holim,
    punctured_subset_poset,
    subset_key,
    subsets,
    tfiber,
    tfiber_via_holim,
    tcofiber,
)
from crosstower.field import prime_field
from crosstower.matrix import Matrix
from crosstower.randgen import Rand

F = prime_field()


def inclusion_cube(rnd, n):
    """Vertices ⊕_{T ⊆ S} A_T with inclusion edges: commutes exactly."""
    parts = {subset_key(t): rnd.complex(max_dim=2) for t in subsets(n)}
    sums, injs = {}, {}
    for s in subsets(n):
        keys = sorted(subset_key(t) for t in subsets(n) if t <= s)
        pieces = [parts[k] for k in keys]
        total, inj, _ = direct_sum(pieces)
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
                piece_inj_src = inj_map
                piece_inj_tgt = injs[t][k]
                part = parts[k]
                comps = {}
                for deg in range(src.lo, src.hi + 1):
                    comps[deg] = piece_inj_tgt.comp(deg) @ _left_inverse(piece_inj_src.comp(deg))
                m = ChainMap(src, tgt, comps, validate=False)
                acc = m if acc is None else acc + m
            edges[(s, i)] = acc if acc is not None else ChainMap.zero(src, tgt)
    return Cube(n, sums, edges)


def _left_inverse(inj: Matrix) -> Matrix:
    """Left inverse of a split coordinate injection (0/1 columns)."""
    out = Matrix.zeros(inj.field, inj.cols, inj.rows)
    for j in range(inj.cols):
        for i in range(inj.rows):
            if inj.a[i, j]:
                out.a[j, i] = inj.field.one()
                break
    return out


def random_cf_cubes(rnd, n):
    ctx = rnd.context()
    xs = [rnd.cf_object(ctx, max_dim=1, hi=1) for _ in range(n)]
    yield build_coproduct_cube(xs).underlying()
    yield build_initial_cube(xs).underlying()


def test_one_cube_is_hofib():
    rnd = Rand(F, 1)
    x, y = rnd.complex(), rnd.complex()
    f = rnd.chain_map(x, y)
    c = Cube(1, {frozenset(): x, frozenset({1}): y}, {(frozenset(), 1): f})
    fib, proj = tfiber(c)
    dense, _ = hofib(f)
    assert fib == dense
    assert proj.target == x


def test_identity_square_cartesian_and_cocartesian():
    c = Rand(F, 2).complex(allow_zero=False)
    idm = ChainMap.identity(c)
    sq = Cube(2, {s: c for s in subsets(2)},
              {(s, i): idm for s in subsets(2) for i in (1, 2) if i not in s})
    assert is_cartesian(sq)
    assert is_cocartesian(sq)


def test_vertical_identity_square_acyclic_tfiber():
    rnd = Rand(F, 5)
    x, y = rnd.complex(), rnd.complex()
    f = rnd.chain_map(x, y)
    sq = Cube(2, {frozenset(): x, frozenset({1}): y, frozenset({2}): x,
                  frozenset({1, 2}): y},
              {(frozenset(), 1): f, (frozenset(), 2): ChainMap.identity(x),
               (frozenset({1}), 2): ChainMap.identity(y), (frozenset({2}), 1): f})
    fib, _ = tfiber(sq)
    assert fib.is_acyclic()


def test_tfiber_models_and_stability_random():
    rnd = Rand(F, 9)
    for n in (2, 3):
        for _ in range(4):
            cube = inclusion_cube(rnd, n)
            fib, _ = tfiber(cube)
            via = tfiber_via_holim(cube)
            assert fib.homology_dims() == via.homology_dims()
            # stability: cartesian iff cocartesian
            assert fib.is_acyclic() == tcofiber(cube).is_acyclic()
            # shift relation between total fiber and total cofiber
            cof = tcofiber(cube)
            assert cof.homology_dims() == {k + n: v for k, v in fib.homology_dims().items()}


def test_tfiber_order_independence():
    rnd = Rand(F, 13)
    cube = inclusion_cube(rnd, 3)
    fib, _ = tfiber(cube)
    perm = {1: 2, 2: 3, 3: 1}
    fib2, _ = tfiber(cube.permute(perm))
    assert fib.homology_dims() == fib2.homology_dims()


def test_cf_cubes_model_agreement():
    rnd = Rand(F, 17)
    for cube in random_cf_cubes(rnd, 2):
        fib, _ = tfiber(cube)
        via = tfiber_via_holim(cube)
        assert fib.homology_dims() == via.homology_dims()
        assert fib.is_acyclic() == tcofiber(cube).is_acyclic()


def test_holim_one_element_poset():
    c = Rand(F, 3).complex(allow_zero=False)
    p = Poset(["e"], lambda a, b: True)
    d = PosetDiagram(p, {"e": c}, {})
    assert punctured_holim(d) == c


def test_holim_cospan_loop():
    z = Rand(F, 7).complex(allow_zero=False)
    zero = ChainComplex.zero(F)
    p = Poset(["a", "b", "c"], lambda x, y: x == y or y == "c")
    d = PosetDiagram(p, {"a": zero, "b": zero, "c": z},
                     {("a", "c"): ChainMap.zero(zero, z),
                      ("b", "c"): ChainMap.zero(zero, z)})
    got = punctured_holim(d).homology_dims()
    assert got == {n - 1: v for n, v in z.homology_dims().items()}


def test_bar_one_element_and_span():
    c = Rand(F, 11).complex(allow_zero=False)
    p = Poset(["e"], lambda a, b: True)
    assert bar_hocolim(PosetDiagram(p, {"e": c}, {})) == c
    zero = ChainComplex.zero(F)
    p2 = Poset(["a", "b", "c"], lambda x, y: x == y or x == "a")
    d = PosetDiagram(p2, {"a": c, "b": zero, "c": zero},
                     {("a", "b"): ChainMap.zero(c, zero),
                      ("a", "c"): ChainMap.zero(c, zero)})
    got = bar_hocolim(d).homology_dims()
    assert got == {n + 1: v for n, v in c.homology_dims().items()}


def test_bar_cofinality_terminal():
    rnd = Rand(F, 19)
    ctx = rnd.context()
    x = rnd.cf_object(ctx)
    # poset with maximum: the punctured square {1}, {2} < {1,2}
    p = punctured_subset_poset(2)
    y1, y2 = rnd.cf_object(ctx, max_dim=1), rnd.cf_object(ctx, max_dim=1)
    obj12, injs, _ = coproduct_over_A([y1, y2])
    d = PosetDiagram(p, {(1,): y1.X, (2,): y2.X, (1, 2): obj12.X},
                     {((1,), (1, 2)): injs[0].g, ((2,), (1, 2)): injs[1].g})
    m = hocolim_to_terminal_map(d)
    assert m.is_quasi_iso()


def test_bar_nerve_covering_pushout():
    # N(I) = N(I') ∪ N(I'') for the punctured square covered by its two legs
    rnd = Rand(F, 23)
    p = punctured_subset_poset(2)
    vals = {e: rnd.complex(max_dim=1, allow_zero=False) for e in p.elements}
    maps = {}
    for a in p.elements:
        for b in p.elements:
            if p.lt(a, b):
                maps[(a, b)] = rnd.chain_map(vals[a], vals[b])
    d = PosetDiagram(p, vals, maps, validate=False)
    whole = bar_hocolim(d)
    legs = [[(1,), (1, 2)], [(2,), (1, 2)]]
    sub1 = d.poset.full_subposet(legs[0])
    sub2 = d.poset.full_subposet(legs[1])
    inter = d.poset.full_subposet([(1, 2)])

    def subdiag(sp):
        return PosetDiagram(sp, {e: vals[e] for e in sp.elements},
                            {(a, b): maps[(a, b)] for a in sp.elements
                             for b in sp.elements if sp.lt(a, b)}, validate=False)

    b1 = bar_hocolim(subdiag(sub1))
    b2 = bar_hocolim(subdiag(sub2))
    bi = bar_hocolim(subdiag(inter))
    # strict pushout at the level of dimensions
    for n in whole.degrees():
        assert whole.dim(n) == b1.dim(n) + b2.dim(n) - bi.dim(n)


def test_holim_covering_square():
    rnd = Rand(F, 29)
    p = punctured_subset_poset(2)
    vals = {e: rnd.complex(max_dim=1, allow_zero=False) for e in p.elements}
    maps = {}
    for a in p.elements:
        for b in p.elements:
            if p.lt(a, b):
                maps[(a, b)] = rnd.chain_map(vals[a], vals[b])
    d = PosetDiagram(p, vals, maps, validate=False)
    full = punctured_holim(d)
    r1, d1 = holim_restriction_map(d, [(1,), (1, 2)])
    r2, d2 = holim_restriction_map(d, [(2,), (1, 2)])
    ri, _ = holim_restriction_map(d, [(1, 2)])
    r1i, _ = holim_restriction_map(d1, [(1, 2)])
    r2i, _ = holim_restriction_map(d2, [(1, 2)])
    sq = Cube(2, {frozenset(): full, frozenset({1}): r1.target,
                  frozenset({2}): r2.target, frozenset({1, 2}): ri.target},
              {(frozenset(), 1): r1, (frozenset(), 2): r2,
               (frozenset({1}), 2): r1i, (frozenset({2}), 1): r2i})
    fib, _ = tfiber(sq)
    assert fib.is_acyclic()


def test_coproduct_cube_shapes():
    rnd = Rand(F, 31)
    ctx = rnd.context()
    x = rnd.cf_object(ctx, max_dim=1)
    c1 = build_coproduct_cube([x])
    assert c1.object(frozenset()).X.dims_table() == x.X.dims_table()
    # all slots B: constant cube with identity-like edges
    term = ctx.terminal()
    cb = build_coproduct_cube([term, term])
    for (s, i), m in cb.morphisms.items():
        assert m.g.is_quasi_iso()


def test_initial_cube_strongly_cocartesian():
    rnd = Rand(F, 37)
    ctx = rnd.context()
    xs = [rnd.cf_object(ctx, max_dim=1) for _ in range(2)]
    cube = build_initial_cube(xs)
    assert is_strongly_cocartesian(cube.underlying())
    # empty vertex is A itself
    assert cube.object(frozenset()).X == ctx.A


def test_generate_strongly_cocartesian_random():
    rnd = Rand(F, 41)
    ctx = rnd.context()
    z = rnd.cf_object(ctx, max_dim=1)
    ys = [rnd.cf_extension(z, max_dim=1) for _ in range(3)]
    cube = generate_strongly_cocartesian(z, ys)
    assert is_strongly_cocartesian(cube.underlying())
    cube.underlying().validate()


def test_double_cube_boundary_slices():
    rnd = Rand(F, 43)
    ctx = rnd.context()
    xs = [rnd.cf_object(ctx, max_dim=1, hi=1) for _ in range(2)]
    objs, s_edges, t_edges = build_double_cube(xs)
    n = 2
    full = frozenset({1, 2})
    # slice at S = full is the coproduct cube
    slice_full = double_cube_t_slice(objs, t_edges, n, full)
    cop = build_coproduct_cube(xs)
    for t in subsets(n):
        assert slice_full.object(t).X.dims_table() == cop.object(t).X.dims_table()
    # slice at T = empty is the initial cube (over the S variable)
    ini = build_initial_cube(xs)
    for s in subsets(n):
        assert objs[(s, frozenset())].X.dims_table() == ini.object(s).X.dims_table()
    # fixing T nonempty: the i-direction with i in T consists of identity-ish maps
    for t in [frozenset({1}), frozenset({1, 2})]:
        for s in subsets(n):
            for i in t:
                if i in s:
                    continue
                m = s_edges[(s, t, i)]
                assert m.g.is_quasi_iso()


def test_tensor_with_set_matches_bar_hocolim():
    # the set tensor is literally the bar construction over its star poset
    rnd = Rand(F, 47)
    ctx = rnd.context()
    x = rnd.cf_object(ctx)
    u = 2
    elems = ["o"] + [f"t{k}" for k in range(u)]
    p = Poset(elems, lambda a, b: a == b or a == "o")
    vals = {"o": x.X}
    maps = {}
    for k in range(u):
        vals[f"t{k}"] = ctx.B
        maps[("o", f"t{k}")] = x.proj
    d = PosetDiagram(p, vals, maps, validate=False)
    bar = bar_hocolim(d)
    ts, _ = tensor_with_set(x, u, model="bar")
    assert bar.homology_dims() == ts.X.homology_dims()
    assert sorted(bar.dims_table().items()) == sorted(ts.X.dims_table().items())
