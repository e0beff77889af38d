import math

import pytest

from crosstower.blockcx import cone_block, hofib_block
from crosstower.cfcat import CfContext, CfObject
from crosstower.complexes import ChainComplex, ChainMap
from crosstower.crosseff import PerpModel, perp_homology
from crosstower.field import prime_field
from crosstower.functors import catalog, const, perp_of, post_homology, tensor_power, underlying
from crosstower.randgen import Rand
from crosstower.tower import (
    TnTower,
    appendix_fiber_check,
    beta_tower,
    convergence_profile,
    gamma_stage,
    moore_skeleton_oracle,
    nested_homology,
    nu_map,
    pn_stage,
    skeleton_realization,
    tn_complex,
    tn_complex_map,
    tower_compatibility_check,
    tower_level_maps,
    verify_fiber_sequence,
    vertexwise_coproduct_iso_check,
)

F = prime_field()


def pointed_obj(dims=None):
    ctx = CfContext.pointed(F)
    X = ChainComplex(F, dims or {0: 1}, {})
    return CfObject(ctx, X, ChainMap.zero(ctx.A, X), ChainMap.zero(X, ctx.B))


def minimal_initial():
    rnd = Rand(F, 0)
    ctx = rnd.minimal_context()
    return ctx, ctx.initial()


def test_tn_const():
    rnd = Rand(F, 1)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    c = rnd.complex(allow_zero=False)
    val = tn_complex(const(c), 1, x)
    assert val.homology_dims() == c.homology_dims()


def test_tn_underlying_pointed_loop_suspension():
    # suspension-then-loop oracle: both one-element tensors are acyclic and
    # the two-element tensor is the suspension, so the limit gives back X
    x = pointed_obj()
    val = tn_complex(underlying(), 1, x)
    assert val.homology_dims() == {0: 1}


def test_tn_unit_quasi_iso_for_excisive():
    rnd = Rand(F, 5)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    tower = TnTower(underlying(), 1, x)
    unit = tower.unit(1, x)
    cone = cone_block(unit)
    assert nested_homology(cone, depth=1) == {}


def test_tn_functorial():
    rnd = Rand(F, 7)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    m = tn_complex_map(tensor_power(2), 1, x.identity())
    assert m.is_identity()


def test_pn_stage_degree2_stabilizes():
    x = pointed_obj()
    stages, verdict = pn_stage(tensor_power(2), 2, x, 3)
    assert verdict["stabilized"]
    assert verdict["at"] == 2
    assert verdict["dims"] == tensor_power(2).evaluate(x).homology_dims()


def test_perp_vanishing_in_tower():
    # the image of the cotriple power in its own tower stage is null at the
    # initial object
    ctx, ini = minimal_initial()
    for n in (1, 2):
        G = perp_of(n + 1, tensor_power(2))
        tower = TnTower(G, n, ini)
        unit = tower.unit(1, ini).assemble()
        assert unit.homology_map_is_zero(), n


def test_skeleton_k0_is_perp():
    rnd = Rand(F, 9)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    f = catalog(F)["tensor2"]
    skel = skeleton_realization(f, 1, x, 0)
    assert skel.homology_dims() == perp_homology(f, 2, x, 1)


def test_skeleton_k1_matches_moore_oracle():
    rnd = Rand(F, 11)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    for name in ("tensor2", "underlying"):
        f = catalog(F)[name]
        skel = skeleton_realization(f, 1, x, 1)
        assert skel.homology_dims() == moore_skeleton_oracle(f, 1, x, 1), name


def test_skeleton_acyclic_for_low_degree():
    rnd = Rand(F, 13)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    # degree-1 functor: the 2-fold cross effects vanish, so every skeleton is
    # acyclic
    for k in (0, 1):
        skel = skeleton_realization(underlying(), 1, x, k)
        assert skel.homology_dims() == {}


def test_gamma_qiso_for_degree_n():
    rnd = Rand(F, 17)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    gamma_cone, gamma_map, skel = gamma_stage(underlying(), 1, x, 1)
    fib = hofib_block(gamma_map)
    assert fib.homology_dims(stages=[lambda key: key]) == {}
    # gamma is then a homology isomorphism onto the stage
    gh = gamma_cone.homology_dims(stages=[lambda key: key])
    assert gh == underlying().evaluate(x).homology_dims()


def test_gamma_nontrivial_for_tensor2():
    x = pointed_obj()
    gamma_cone, gamma_map, skel = gamma_stage(tensor_power(2), 1, x, 1)
    gh = gamma_cone.homology_dims(stages=[lambda key: key])
    assert gh != tensor_power(2).evaluate(x).homology_dims()


def test_appendix_check_small():
    ctx, ini = minimal_initial()
    for name in ("tensor2", "underlying"):
        f = catalog(F)[name]
        for k in (0, 1):
            rep = appendix_fiber_check(f, 1, ini, k)
            assert rep["match"], (name, k)
            assert rep["euler_defect"] == 0


def test_vertexwise_iso():
    rnd = Rand(F, 19)
    assert vertexwise_coproduct_iso_check(1, rnd.minimal_context())
    ctx2 = rnd.context(max_dim=1)
    assert vertexwise_coproduct_iso_check(1, ctx2)


def test_fiber_sequence_base_case():
    # left = the (n+1)-st power at the initial object; mid = value; right =
    # first tower stage
    ctx, ini = minimal_initial()
    f = catalog(F)["tensor2"]
    n = 1
    left = PerpModel(f, n + 1, ini, 1).complex()
    tower = TnTower(f, n, ini)
    st = tower.stage(1)
    mid = f.evaluate(ini)
    right = st.value.assemble()[0]
    rep = verify_fiber_sequence(left, mid, right, st.structure_map.assemble())
    assert rep["match"]
    assert rep["euler_defect"] == 0


def test_nu_map_properties():
    rnd = Rand(F, 23)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    f = catalog(F)["tensor2"]
    nu, src, dst = nu_map(f, 1, x)
    # epsilon after nu equals epsilon (checked through the counit collapse)
    from crosstower.tower import _counit_to_value_blockmap
    eps_src = _counit_to_value_blockmap(f, src).assemble()
    eps_dst = _counit_to_value_blockmap(f, dst).assemble()
    assert eps_dst.compose(nu) == eps_src
    # additive functor: the source power is acyclic (its second cross effect
    # vanishes), so the comparison map is null in homology
    nu2, src2, dst2 = nu_map(underlying(), 1, x)
    assert src2.homology_dims() == {}
    assert nu2.homology_map_is_zero()


def test_nu_naturality():
    rnd = Rand(F, 29)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    g = rnd.cf_extension(x, max_dim=1)
    f = catalog(F)["tensor2"]
    from crosstower.crosseff import perp_complex_map
    nu_x, _, _ = nu_map(f, 1, x)
    nu_y, _, _ = nu_map(f, 1, g.target)
    left = nu_y.compose(perp_complex_map(f, 2, g))
    right = perp_complex_map(f, 1, g).compose(nu_x)
    assert left == right


def test_tower_compatibility():
    rnd = Rand(F, 31)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    assert tower_compatibility_check(catalog(F)["tensor2"], 1, x)


def test_beta_tower_small():
    rnd = Rand(F, 37)
    ctx, beta = rnd.beta_object(max_dim=1)
    rep = beta_tower(catalog(F)["tensor2"], beta, 1, 0)
    assert rep["match"]


def test_posthomology_tower_counterexample():
    # connected-type sample: trivial zeroth homology, nontrivial first
    x = pointed_obj({1: 1})
    f = post_homology(1)
    gamma_cone, gamma_map, _ = gamma_stage(f, 1, x, 1)
    gdims = gamma_cone.homology_dims(stages=[lambda key: key])
    stages, verdict = pn_stage(f, 1, x, 3)
    assert verdict["stabilized"]
    assert gdims == {0: 1}
    assert verdict["dims"] == {}
    # at the initial object both sides agree (trivially here)
    zero = pointed_obj({0: 0}) if False else None
    ini = CfContext.pointed(F).initial()
    g0, _, _ = gamma_stage(f, 1, ini, 1)
    s0, v0 = pn_stage(f, 1, ini, 2)
    assert g0.homology_dims(stages=[lambda key: key]) == v0["dims"] == {}


def test_convergence_profile():
    rnd = Rand(F, 41)
    ctx = rnd.context(max_dim=1)
    x = rnd.cf_object(ctx, max_dim=1, hi=1)
    rep = convergence_profile(catalog(F)["tensor2"], 1, 2, x)
    assert rep["ok"]
