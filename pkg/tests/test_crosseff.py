import pytest

from crosstower.cfcat import CfContext, CfObject
from crosstower.complexes import ChainComplex, ChainMap
from crosstower.crosseff import (
    PerpModel,
    comultiplication,
    counit,
    cross_effect,
    degree_test,
    gamma_is_quasi_iso,
    iterated_cr2_equals_crn,
    perp_complex,
    perp_complex_map,
    perp_homology,
    section_delta,
)
from crosstower.field import prime_field
from crosstower.functors import catalog, const, tensor_power, underlying
from crosstower.randgen import Rand

F = prime_field()


def pointed_obj(dims=None):
    ctx = CfContext.pointed(F)
    X = ChainComplex(F, dims or {0: 1}, {})
    return CfObject(ctx, X, ChainMap.zero(ctx.A, X), ChainMap.zero(X, ctx.B))


def small_objects(seed, count, ctx=None):
    rnd = Rand(F, seed)
    ctx = ctx or rnd.context(max_dim=1)
    return ctx, [rnd.cf_object(ctx, max_dim=1, hi=1) for _ in range(count)]


def test_cross_effect_b_slot_acyclic():
    ctx, xs = small_objects(3, 2)
    term = ctx.terminal()
    cat = catalog(F)
    for name in ("underlying", "tensor2", "sym2", "const"):
        f = cat[name]
        assert cross_effect(f, [xs[0], term]).is_acyclic(), name
        assert cross_effect(f, [term, xs[1]]).is_acyclic(), name


def test_cr2_tensor2_pointed_expansion():
    # expansion oracle: (X ⊕ Y)⊗2 splits into four summands; the cross terms
    # X⊗Y and Y⊗X are the second cross effect
    x = pointed_obj()
    got = cross_effect(tensor_power(2), [x, x]).homology_dims()
    assert got == {0: 2}


def test_cr1_const_acyclic():
    ctx, xs = small_objects(5, 1)
    c = const(ChainComplex.single(F, 0))
    assert cross_effect(c, [xs[0]]).is_acyclic()


def test_perp_k1_matches_cross_effect():
    ctx, xs = small_objects(7, 1)
    x = xs[0]
    for name in ("underlying", "tensor2"):
        f = catalog(F)[name]
        lhs = perp_homology(f, 2, x, 1)
        rhs = cross_effect(f, [x, x]).homology_dims()
        assert lhs == rhs, name


def test_perp_additive_acyclic():
    ctx, xs = small_objects(9, 1)
    assert perp_homology(underlying(), 2, xs[0], 1) == {}


def test_perp_tensor2_pointed():
    x = pointed_obj()
    assert perp_homology(tensor_power(2), 2, x, 1) == {0: 2}


def test_counit_and_delta_identities():
    rnd = Rand(F, 11)
    ctx = rnd.context(max_dim=1)
    for name in ("underlying", "tensor2", "const"):
        f = catalog(F)[name]
        x = rnd.cf_object(ctx, max_dim=1, hi=1)
        models = {}
        delta = comultiplication(f, 2, x, k=1, level=1, models=models)
        d0 = counit(f, 2, x, 2, 0, models=models)
        d1 = counit(f, 2, x, 2, 1, models=models)
        left = d0.compose(delta)
        right = d1.compose(delta)
        assert left.is_identity(), name
        assert right.is_identity(), name


def test_coassociativity():
    rnd = Rand(F, 13)
    ctx = rnd.context(max_dim=1)
    for name in ("underlying", "tensor2"):
        f = catalog(F)[name]
        x = rnd.cf_object(ctx, max_dim=1, hi=1)
        models = {}
        delta1 = comultiplication(f, 2, x, k=1, level=1, models=models)
        dl = comultiplication(f, 2, x, k=2, level=1, models=models)
        dr = comultiplication(f, 2, x, k=2, level=2, models=models)
        assert dl.compose(delta1) == dr.compose(delta1), name


def test_simplicial_identities():
    rnd = Rand(F, 17)
    ctx = rnd.context(max_dim=1)
    f = catalog(F)["tensor2"]
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    models = {}
    n = 2
    k = 3
    for i in range(k - 1):
        for j in range(i + 1, k):
            di_after = counit(f, n, x, k - 1, i, models=models)
            dj_first = counit(f, n, x, k, j, models=models)
            dj1_after = counit(f, n, x, k - 1, j - 1, models=models)
            di_first = counit(f, n, x, k, i, models=models)
            assert di_after.compose(dj_first) == dj1_after.compose(di_first), (i, j)


def test_section_identity():
    rnd = Rand(F, 19)
    ctx = rnd.context(max_dim=1)
    for name in ("underlying", "tensor2"):
        f = catalog(F)[name]
        x = rnd.cf_object(ctx, max_dim=1, hi=1)
        delta, gamma, perp, double = section_delta(f, 2, x)
        assert gamma.compose(delta).is_identity(), name


def test_idempotence_witness():
    rnd = Rand(F, 23)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    assert gamma_is_quasi_iso(catalog(F)["tensor2"], 2, x)


def test_degree_tests():
    x = pointed_obj()
    cat = catalog(F)
    assert degree_test(cat["const"], 0, [(x,)])
    assert degree_test(cat["tensor2"], 2, [(x, x, x)])
    assert not degree_test(cat["tensor2"], 1, [(x, x)])
    # the ladder: degree n implies degree n+1
    assert degree_test(cat["underlying"], 1, [(x, x)])
    assert degree_test(cat["underlying"], 2, [(x, x, x)])


def test_iterated_cr2():
    x = pointed_obj()
    lhs, rhs = iterated_cr2_equals_crn(tensor_power(2), [x, x, x])
    assert lhs == rhs == {}
    lhs3, rhs3 = iterated_cr2_equals_crn(tensor_power(3), [x, x, x])
    assert lhs3 == rhs3 == {0: 6}


def test_iterated_cr2_with_b_slot():
    ctx, xs = small_objects(29, 2)
    term = ctx.terminal()
    lhs, rhs = iterated_cr2_equals_crn(catalog(F)["tensor2"], [xs[0], xs[1], term])
    assert lhs == rhs == {}


def test_perp_functorial():
    rnd = Rand(F, 31)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    f = catalog(F)["tensor2"]
    idm = perp_complex_map(f, 2, x.identity())
    assert idm.is_identity()
    h = rnd.cf_extension(x, max_dim=1)
    g = rnd.cf_extension(h.target, max_dim=1)
    lhs = perp_complex_map(f, 2, g.compose(h))
    rhs = perp_complex_map(f, 2, g).compose(perp_complex_map(f, 2, h))
    assert lhs == rhs


def test_perp_blocks_vs_dense_homology():
    rnd = Rand(F, 37)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    f = catalog(F)["tensor2"]
    model = PerpModel(f, 2, x, 2)
    dense = model.complex()
    assert model.homology_dims() == dense.homology_dims()
