import pytest

from crosstower.cfcat import CfContext, CfObject, fold
from crosstower.complexes import ChainComplex, ChainMap
from crosstower.field import prime_field
from crosstower.functors import (
    FunctorSpec,
    bar_of_fold_sample,
    catalog,
    const,

    functor_sum,
    post_homology,
    post_shift,
    rel_cofiber,
    sym_power,
    tensor_power,
    underlying,
    verify_realization_commutation,
)
from crosstower.matrix import Matrix
from crosstower.randgen import Rand

F = prime_field()


def pointed_obj(dims=None):
    ctx = CfContext.pointed(F)
    X = ChainComplex(F, dims or {0: 1}, {})
    return CfObject(ctx, X, ChainMap.zero(ctx.A, X), ChainMap.zero(X, ctx.B))


def test_underlying_and_const():
    rnd = Rand(F, 1)
    ctx = rnd.context()
    x = rnd.cf_object(ctx)
    assert underlying().evaluate(x) == x.X
    c = rnd.complex(allow_zero=False)
    assert const(c).evaluate(x) == c


def test_tensor_power_on_unit():
    x = pointed_obj()
    t = tensor_power(2).evaluate(x)
    assert t.dims_table() == {0: 1}


def test_identity_maps():
    rnd = Rand(F, 3)
    ctx = rnd.context()
    x = rnd.cf_object(ctx, max_dim=1)
    for name, f in catalog(F).items():
        if name in ("tensor3",):
            continue
        m = f.evaluate_map(x.identity())
        assert m.is_identity(), name


def test_tensor2_of_fold_pointed():
    x = pointed_obj()
    fm, obj, _ = fold(x, 2)
    t = tensor_power(2).evaluate_map(
        __import__("crosstower.cfcat", fromlist=["CfMorphism"]).CfMorphism(obj, x, fm.g, validate=False))
    assert t.comp(0) == Matrix.from_rows(F, [[1, 1, 1, 1]])


def test_posthomology_qiso_invertible():
    rnd = Rand(F, 5)
    ctx = rnd.context()
    x = rnd.cf_object(ctx)
    q = rnd.cf_extension(x, acyclic=True)
    assert q.g.is_quasi_iso()
    m = post_homology(0).evaluate_map(q)
    assert m.comp(0).is_invertible()


def test_functor_laws_on_composites():
    rnd = Rand(F, 7)
    ctx = rnd.context()
    cat = catalog(F)
    for name in ("underlying", "tensor2", "sym2", "sum_u_t2", "posthom1",
                 "rel_cofiber", "shift1_tensor2", "const"):
        f = cat[name]
        for trial in range(4):
            x = rnd.cf_object(ctx, max_dim=1, hi=1)
            h = rnd.cf_extension(x, max_dim=1)
            g = rnd.cf_extension(h.target, max_dim=1)
            lhs = f.evaluate_map(g.compose(h))
            rhs = f.evaluate_map(g).compose(f.evaluate_map(h))
            assert lhs == rhs, name


def test_quasi_iso_preservation():
    rnd = Rand(F, 9)
    ctx = rnd.context()
    cat = catalog(F)
    for name in ("underlying", "tensor2", "sym2", "sum_u_t2", "posthom1",
                 "rel_cofiber", "const"):
        f = cat[name]
        for trial in range(4):
            x = rnd.cf_object(ctx, max_dim=1)
            q = rnd.cf_extension(x, acyclic=True)
            assert f.evaluate_map(q).is_quasi_iso(), name


def test_sym_power_dims():
    x = pointed_obj({0: 2})
    s = sym_power(2).evaluate(x)
    assert s.dims_table() == {0: 3}
    # odd-degree classes square to zero under the signed action
    y = pointed_obj({1: 1})
    s2 = sym_power(2).evaluate(y)
    assert s2.total_dim() == 0


def test_sym_char_guard():
    small = prime_field(2)
    ctx = CfContext.pointed(small)
    X = ChainComplex(small, {0: 1}, {})
    x = CfObject(ctx, X, ChainMap.zero(ctx.A, X), ChainMap.zero(X, ctx.B))
    with pytest.raises(ValueError):
        sym_power(2).evaluate(x)


def test_sym_functorial_and_qiso():
    rnd = Rand(F, 13)
    ctx = rnd.context()
    x = rnd.cf_object(ctx, max_dim=2)
    q = rnd.cf_extension(x, acyclic=True)
    m = sym_power(2).evaluate_map(q)
    assert m.is_quasi_iso()


def make_samples(seed):
    from crosstower.functors import loop_sample
    rnd = Rand(F, seed)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    samples = [bar_of_fold_sample(x)]
    c = rnd.cf_endomorphism(x)
    samples.append(loop_sample(x, c))
    return samples


def test_realization_commutation_flags():
    samples = make_samples(17)
    cat = catalog(F)
    assert verify_realization_commutation(cat["const"], samples)
    assert verify_realization_commutation(cat["tensor2"], samples)
    assert verify_realization_commutation(cat["underlying"], samples)
    assert cat["posthom1"].commutes_with_realization is False


def find_posthom_counterexample():
    # a sample with nontrivial differential where the homology functor does
    # not commute with realization
    from crosstower.functors import loop_sample
    for seed in range(30):
        r2 = Rand(F, 100 + seed)
        ctx = r2.context(max_dim=1)
        x = r2.cf_object(ctx, max_dim=2, hi=2)
        c = r2.cf_endomorphism(x)
        sample = loop_sample(x, c)
        if not verify_realization_commutation(catalog(F)["posthom1"], [sample]):
            return True
    return False


def test_posthomology_fails_realization():
    assert find_posthom_counterexample()


def test_skeletal_extension_identities():
    from crosstower.functors import skeletal_extension, loop_sample
    rnd = Rand(F, 29)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    c = rnd.cf_endomorphism(x)
    s = loop_sample(x, c)
    ext = skeletal_extension(s, 3)  # validates d_i d_j = d_{j-1} d_i on build
    assert ext.truncation == 3


def test_json_roundtrip():
    f = functor_sum([underlying(), post_shift(1, tensor_power(2))])
    back = FunctorSpec.from_json(F, f.to_json())
    assert back.to_json() == f.to_json()
    g = post_homology(1, rel_cofiber())
    assert FunctorSpec.from_json(F, g.to_json()).to_json() == g.to_json()
