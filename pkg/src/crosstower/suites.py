"""Built-in verification suites, one per acceptance criterion.

Every suite is deterministic given (field, seed, caps); sample counts default
to the stated criterion sizes and can be scaled down for smoke runs.
Resource-capped instances are reported as skips, never silently dropped.
"""

from __future__ import annotations

from .blockcx import ResourceCapError, cone_block, hofib_block
from .cfcat import CfContext, CfObject, tensor_with_set
from .complexes import ChainComplex, ChainMap, cone, hofib, tensor
from .crosseff import (
    PerpModel,
    comultiplication,
    counit,
    cross_effect,
    degree_test,
    gamma_is_quasi_iso,
    iterated_cr2_equals_crn,
    section_delta,
)
from .cube import (
    build_coproduct_cube,
    build_double_cube,
    build_initial_cube,
    double_cube_t_slice,
    generate_strongly_cocartesian,
    is_cartesian,
    is_cocartesian,
    subsets,
    tcofiber,
    tfiber,
    tfiber_via_holim,
)
from .field import Field, prime_field
from .functors import (
    FunctorSpec,
    bar_of_fold_sample,
    catalog,
    loop_sample,
    perp_of,
    post_homology,
    verify_realization_commutation,
)
from .randgen import Rand
from .report import PASS, FAIL, SKIPPED, CheckResult, timed
from .tower import (
    TnTower,
    appendix_fiber_check,
    beta_tower,
    blockmap_homology_zero,
    convergence_profile,
    gamma_stage,
    nested_homology,
    pn_stage,
    skeleton_realization,
    vertexwise_coproduct_iso_check,
    window_dims,
)


class SuiteConfig:
    def __init__(self, field: Field | None = None, seed: int = 7,
                 samples: int | None = None, max_n: int = 2, max_k: int = 2,
                 cap: int = 20000, window=(-2, 6)):
        self.field = field or prime_field()
        self.seed = seed
        self.samples = samples
        self.max_n = max_n
        self.max_k = max_k
        self.cap = cap
        self.window = window

    def count(self, default: int) -> int:
        if self.samples is None:
            return default
        return max(1, min(self.samples, default))

    def to_json(self) -> dict:
        return {"field": self.field.to_json(), "seed": self.seed,
                "samples": self.samples, "max_n": self.max_n,
                "max_k": self.max_k, "cap": self.cap,
                "window": list(self.window)}


CRIT_CATALOG = ("const", "underlying", "tensor2", "tensor3", "sym2")
KNOWN_DEGREE = {"const": 0, "underlying": 1, "tensor2": 2, "sym2": 2,
                "tensor3": 3, "sum_u_t2": 2}
HEAVY = {"tensor3", "sym2"}


def _pointed_obj(field, rnd, max_total=2, hi=1):
    ctx = CfContext.pointed(field)
    X = rnd.complex(lo=0, hi=hi, max_dim=1)
    if X.is_zero_complex():
        X = ChainComplex.single(field, 0)
    return CfObject(ctx, X, ChainMap.zero(ctx.A, X), ChainMap.zero(X, ctx.B))


def _sample_object(field, rnd, heavy: bool):
    if heavy or rnd.rng.integers(0, 2):
        return _pointed_obj(field, rnd)
    ctx = rnd.context(max_dim=1)
    return rnd.cf_object(ctx, max_dim=1, hi=1)


def _sample_tuple(field, rnd, size: int, heavy: bool):
    """A tuple of objects sharing one context."""
    if heavy or rnd.rng.integers(0, 2):
        ctx = CfContext.pointed(field)
        out = []
        for _ in range(size):
            X = rnd.complex(lo=0, hi=1, max_dim=1)
            if X.is_zero_complex():
                X = ChainComplex.single(field, 0)
            out.append(CfObject(ctx, X, ChainMap.zero(ctx.A, X),
                                ChainMap.zero(X, ctx.B)))
        return tuple(out)
    ctx = rnd.context(max_dim=1)
    return tuple(rnd.cf_object(ctx, max_dim=1, hi=1) for _ in range(size))


def _result(name, params, ok, detail, t):
    return CheckResult(name, params, PASS if ok else FAIL, detail, t)


def _skip(name, params, err, t=0.0):
    return CheckResult(name, params, SKIPPED, {"reason": str(err)}, t)


# -- 1: foundations -----------------------------------------------------------------


def suite_foundations(cfg: SuiteConfig):
    rnd = Rand(cfg.field, cfg.seed)
    count = cfg.count(500)
    bad = None
    with timed() as t:
        for i in range(count):
            x = rnd.complex()
            y = rnd.complex()
            x._check_dd()
            y._check_dd()
            f = rnd.chain_map(x, y)
            fib, _ = hofib(f)
            cn, _ = cone(f)
            hf, hx, hy, hc = (fib.homology_dims(), x.homology_dims(),
                              y.homology_dims(), cn.homology_dims())
            euler = sum((-1) ** n * (hf.get(n, 0) - hx.get(n, 0) + hy.get(n, 0))
                        for n in set(hf) | set(hx) | set(hy))
            if euler != 0:
                bad = {"sample": i, "issue": "euler", "x": x.to_json(), "y": y.to_json()}
                break
            if hc != {n + 1: d for n, d in hf.items()}:
                bad = {"sample": i, "issue": "cone-shift"}
                break
            a = rnd.complex(max_dim=2, hi=1)
            b = rnd.complex(max_dim=2, hi=1)
            hab = tensor(a, b).homology_dims()
            expect = {}
            for p, dp in a.homology_dims().items():
                for q, dq in b.homology_dims().items():
                    expect[p + q] = expect.get(p + q, 0) + dp * dq
            if hab != expect:
                bad = {"sample": i, "issue": "kunneth", "a": a.to_json(), "b": b.to_json()}
                break
    return [_result("foundations", {"samples": count}, bad is None,
                    bad or {"checked": count}, t.seconds)]


# -- 2: cube model agreement -----------------------------------------------------------


def suite_cube_models(cfg: SuiteConfig):
    rnd = Rand(cfg.field, cfg.seed + 1)
    count = cfg.count(100)
    cat = catalog(cfg.field)
    bad = None
    with timed() as t:
        for i in range(count):
            n = 2 if i % 2 == 0 else 3
            if i % 4 == 3:
                ctx = rnd.context(max_dim=1)
                xs = [rnd.cf_object(ctx, max_dim=1, hi=1) for _ in range(2)]
                cube = cat["tensor2"].evaluate_cube(build_coproduct_cube(xs))
            else:
                cube = rnd.chain_cube(n, max_dim=1)
            fib, _ = tfiber(cube)
            via = tfiber_via_holim(cube)
            if fib.homology_dims() != via.homology_dims():
                bad = {"sample": i, "issue": "model-disagreement"}
                break
            if fib.is_acyclic() != tcofiber(cube).is_acyclic():
                bad = {"sample": i, "issue": "cartesian-vs-cocartesian"}
                break
    return [_result("cube-models", {"samples": count}, bad is None,
                    bad or {"checked": count}, t.seconds)]


# -- 3: cotriple axioms -----------------------------------------------------------------


def suite_cotriple_axioms(cfg: SuiteConfig):
    cat = catalog(cfg.field)
    results = []
    count = cfg.count(20)
    for n in range(1, cfg.max_n + 1):
        for fname in CRIT_CATALOG:
            rnd = Rand(cfg.field, cfg.seed + 13 * n + hash(fname) % 97)
            f = cat[fname]
            heavy = fname in HEAVY
            bad = None
            with timed() as t:
                for i in range(count):
                    x = _sample_object(cfg.field, rnd, heavy and n >= 2)
                    models = {}
                    delta = comultiplication(f, n, x, k=1, level=1, models=models)
                    d0 = counit(f, n, x, 2, 0, models=models)
                    d1 = counit(f, n, x, 2, 1, models=models)
                    if not d0.compose(delta).is_identity() or \
                       not d1.compose(delta).is_identity():
                        bad = {"sample": i, "issue": "counit-identities"}
                        break
                    dl = comultiplication(f, n, x, k=2, level=1, models=models)
                    dr = comultiplication(f, n, x, k=2, level=2, models=models)
                    if not (dl.compose(delta) == dr.compose(delta)):
                        bad = {"sample": i, "issue": "coassociativity"}
                        break
                    ds, gm, _, _ = section_delta(f, n, x)
                    if not gm.compose(ds).is_identity():
                        bad = {"sample": i, "issue": "section"}
                        break
                    k_ident = 2 if (heavy and n >= 2) else 3
                    ok = True
                    for ii in range(k_ident - 1):
                        for jj in range(ii + 1, k_ident):
                            lhs = counit(f, n, x, k_ident - 1, ii, models=models)\
                                .compose(counit(f, n, x, k_ident, jj, models=models))
                            rhs = counit(f, n, x, k_ident - 1, jj - 1, models=models)\
                                .compose(counit(f, n, x, k_ident, ii, models=models))
                            if not (lhs == rhs):
                                ok = False
                    if not ok:
                        bad = {"sample": i, "issue": "simplicial-identities"}
                        break
            results.append(_result(f"cotriple-axioms[{fname},n={n}]",
                                   {"samples": count, "n": n, "functor": fname},
                                   bad is None, bad or {"checked": count}, t.seconds))
    return results


# -- 4: reducedness and the degree ladder ----------------------------------------------


def suite_cross_effects(cfg: SuiteConfig):
    cat = catalog(cfg.field)
    rnd = Rand(cfg.field, cfg.seed + 2)
    results = []
    samples = cfg.count(5)
    # reducedness: a terminal slot kills the cross effect
    bad = None
    with timed() as t:
        for fname in CRIT_CATALOG:
            f = cat[fname]
            for n in (1, 2, 3):
                if n == 3 and fname in HEAVY:
                    continue
                for i in range(max(1, samples // 2)):
                    ctx = rnd.context(max_dim=1)
                    xs = [rnd.cf_object(ctx, max_dim=1, hi=1) for _ in range(n)]
                    slot = int(rnd.rng.integers(0, n))
                    xs[slot] = ctx.terminal()
                    if not cross_effect(f, xs).is_acyclic():
                        bad = {"functor": fname, "n": n, "issue": "b-slot"}
                        break
    results.append(_result("reducedness", {"samples": samples}, bad is None,
                           bad or {}, t.seconds))
    # ladder: degree d implies degree d+1
    bad = None
    with timed() as t:
        for fname in CRIT_CATALOG:
            f = cat[fname]
            d = KNOWN_DEGREE[fname]
            if d == 0:
                base = [tuple([_pointed_obj(cfg.field, rnd)]) for _ in range(2)]
                up = [tuple(_pointed_obj(cfg.field, rnd) for _ in range(2))
                      for _ in range(2)]
                if not degree_test(f, 0, base) or not degree_test(f, 1, up):
                    bad = {"functor": fname, "issue": "ladder"}
                continue
            heavy = fname in HEAVY
            base = [_sample_tuple(cfg.field, rnd, d + 1, heavy) for _ in range(2)]
            up = [_sample_tuple(cfg.field, rnd, d + 2, heavy) for _ in range(2)]
            if not degree_test(f, d, base) or not degree_test(f, d + 1, up):
                bad = {"functor": fname, "issue": "ladder"}
    results.append(_result("degree-ladder", {}, bad is None, bad or {}, t.seconds))
    # iterated second cross effect against the third, for the cubic functor
    bad = None
    with timed() as t:
        for i in range(max(2, samples // 2)):
            x = _pointed_obj(cfg.field, rnd) if i % 2 else None
            if x is None:
                ctx = rnd.context(max_dim=1)
                xs = [rnd.cf_object(ctx, max_dim=1, hi=1) for _ in range(3)]
            else:
                xs = [x, _pointed_obj(cfg.field, rnd), _pointed_obj(cfg.field, rnd)]
            lhs, rhs = iterated_cr2_equals_crn(cat["tensor3"], xs)
            if lhs != rhs:
                bad = {"sample": i, "issue": "iterated-cr2", "lhs": lhs, "rhs": rhs}
                break
    results.append(_result("iterated-cr2", {"samples": max(2, samples // 2)},
                           bad is None, bad or {}, t.seconds))
    return results


# -- 5: degree vs excision relative to the initial object --------------------------------


def suite_degree_excision(cfg: SuiteConfig):
    cat = catalog(cfg.field)
    results = []
    count = cfg.count(20)
    for fname in CRIT_CATALOG:
        f = cat[fname]
        d = KNOWN_DEGREE[fname]
        for n in range(1, cfg.max_n + 1):
            rnd = Rand(cfg.field, cfg.seed + 5 + 31 * n + hash(fname) % 89)
            heavy = fname in HEAVY
            bad = None
            with timed() as t:
                agree = True
                for i in range(count):
                    if heavy or rnd.rng.integers(0, 2):
                        xs = [_pointed_obj(cfg.field, rnd) for _ in range(n + 1)]
                    else:
                        ctx = rnd.context(max_dim=1)
                        xs = [rnd.cf_object(ctx, max_dim=1, hi=1)
                              for _ in range(n + 1)]
                    deg_ok = degree_test(f, n, [tuple(xs)])
                    cube = f.evaluate_cube(build_initial_cube(xs))
                    exc_ok = is_cartesian(cube)
                    if deg_ok != exc_ok:
                        agree = False
                        bad = {"sample": i, "degree": deg_ok, "excision": exc_ok}
                        break
            results.append(_result(f"degree-excision[{fname},n={n}]",
                                   {"functor": fname, "n": n, "samples": count},
                                   bad is None, bad or {"expected_degree_le_n": d <= n},
                                   t.seconds))
    # sub-cube cartesianness through the double grid, for a degree-1 functor
    rnd = Rand(cfg.field, cfg.seed + 6)
    bad = None
    with timed() as t:
        for i in range(cfg.count(5)):
            ctx = rnd.context(max_dim=1)
            xs = [rnd.cf_object(ctx, max_dim=1, hi=1) for _ in range(2)]
            objs, s_edges, t_edges = build_double_cube(xs)
            for s in subsets(2):
                if s == frozenset({1, 2}):
                    continue
                slice_cube = double_cube_t_slice(objs, t_edges, 2, s)
                val = cat["underlying"].evaluate_cube(slice_cube)
                if not is_cartesian(val):
                    bad = {"sample": i, "s": sorted(s)}
                    break
            if bad:
                break
    results.append(_result("double-cube-slices", {"samples": cfg.count(5)},
                           bad is None, bad or {}, t.seconds))
    return results


# -- 6: excisive behavior of realization-commuting degree-2 entries ------------------------


def suite_realization_excision(cfg: SuiteConfig):
    cat = catalog(cfg.field)
    names = ("const", "underlying", "tensor2", "sym2", "sum_u_t2")
    rnd = Rand(cfg.field, cfg.seed + 8)
    results = []
    # the declared flags are sample-verified
    with timed() as t:
        ctx = rnd.context(max_dim=1)
        x = rnd.cf_object(ctx, max_dim=1, hi=1)
        samples = [bar_of_fold_sample(x), loop_sample(x, rnd.cf_endomorphism(x))]
        flag_ok = all(verify_realization_commutation(cat[nm], samples)
                      for nm in names)
    results.append(_result("realization-flags", {"functors": list(names)},
                           flag_ok, {}, t.seconds))
    count = cfg.count(10)
    bad = None
    with timed() as t:
        for i in range(count):
            ctx = rnd.context(max_dim=1)
            z = rnd.cf_object(ctx, max_dim=1, hi=1)
            ys = [rnd.cf_extension(z, max_dim=1) for _ in range(3)]
            cube = generate_strongly_cocartesian(z, ys)
            for nm in names:
                val = cat[nm].evaluate_cube(cube)
                if not is_cartesian(val):
                    bad = {"sample": i, "functor": nm}
                    break
            if bad:
                break
    results.append(_result("excision-on-cocartesian", {"samples": count},
                           bad is None, bad or {}, t.seconds))
    return results


# -- 7: the finite-stage fibration grid ------------------------------------------------------


def suite_appendix_a1(cfg: SuiteConfig):
    cat = catalog(cfg.field)
    rnd = Rand(cfg.field, cfg.seed + 9)
    ctx = rnd.minimal_context()
    results = []
    for n in range(1, cfg.max_n + 1):
        with timed() as t:
            iso_ok = vertexwise_coproduct_iso_check(n, ctx)
        results.append(_result(f"vertexwise-iso[n={n}]", {"n": n}, iso_ok, {},
                               t.seconds))
        for fname in CRIT_CATALOG:
            f = cat[fname]
            for k in range(0, cfg.max_k + 1):
                params = {"functor": fname, "n": n, "k": k}
                capped = None
                with timed() as t:
                    try:
                        rep = appendix_fiber_check(f, n, ctx.initial(), k,
                                                   cap=cfg.cap)
                        ok = rep["match"] and rep["euler_defect"] == 0
                        detail = {"skeleton": rep["skeleton"], "fiber": rep["fiber"]}
                    except ResourceCapError as e:
                        capped = e
                if capped is not None:
                    # larger skeleta only grow; skip the rest of this cell
                    results.append(_skip(f"appendix-A1[{fname},n={n},k={k}]",
                                         params, capped, t.seconds))
                    break
                results.append(_result(f"appendix-A1[{fname},n={n},k={k}]",
                                       params, ok, detail, t.seconds))
    return results


# -- 8: towers agree at the initial object ----------------------------------------------------


def suite_tower_agreement(cfg: SuiteConfig):
    cat = catalog(cfg.field)
    rnd = Rand(cfg.field, cfg.seed + 10)
    ctx = rnd.minimal_context()
    ini = ctx.initial()
    results = []
    for fname in ("tensor2", "sum_u_t2"):
        f = cat[fname]
        for n in range(1, cfg.max_n + 1):
            params = {"functor": fname, "n": n}
            with timed() as t:
                try:
                    stages, verdict = pn_stage(f, n, ini, 3, window=cfg.window,
                                               cap=cfg.cap)
                    # cotriple side: stage homology for increasing skeleta
                    gdims = []
                    for k in range(0, 3):
                        gc, gm, _ = gamma_stage(f, n, ini, k, cap=cfg.cap)
                        gh = gc.homology_dims(
                            stages=[lambda key: key,
                                    lambda key: key[1][0] if key[0] == "s" else key])
                        gdims.append(gh)
                        if k >= 1 and window_dims(gdims[-1], cfg.window) == \
                                window_dims(gdims[-2], cfg.window):
                            break
                    g_stab = len(gdims) >= 2 and \
                        window_dims(gdims[-1], cfg.window) == window_dims(gdims[-2], cfg.window)
                    agree = window_dims(gdims[-1], cfg.window) == \
                        window_dims(verdict["dims"], cfg.window)
                    ok = verdict["stabilized"] and g_stab and agree
                    detail = {"excisive": verdict["dims"], "cotriple": gdims[-1],
                              "stabilized_at": verdict["at"]}
                except ResourceCapError as e:
                    results.append(_skip(f"tower-agreement[{fname},n={n}]", params, e,
                                         t.seconds))
                    continue
            results.append(_result(f"tower-agreement[{fname},n={n}]", params, ok,
                                   detail, t.seconds))
    return results


# -- 9: the homology functor separates the towers ----------------------------------------------


def suite_tower_counterexample(cfg: SuiteConfig):
    field = cfg.field
    f = post_homology(1)
    ctx = CfContext.pointed(field)
    X = ChainComplex.single(field, 1)
    x = CfObject(ctx, X, ChainMap.zero(ctx.A, X), ChainMap.zero(X, ctx.B))
    with timed() as t:
        gc, gm, _ = gamma_stage(f, 1, x, 1)
        gdims = gc.homology_dims(stages=[lambda key: key])
        stages, verdict = pn_stage(f, 1, x, 3, window=cfg.window)
        ini = ctx.initial()
        g0, _, _ = gamma_stage(f, 1, ini, 1)
        s0, v0 = pn_stage(f, 1, ini, 2, window=cfg.window)
        differ = gdims != verdict["dims"]
        agree_at_initial = g0.homology_dims(stages=[lambda key: key]) == v0["dims"]
        ok = differ and agree_at_initial and verdict["stabilized"]
    return [_result("tower-counterexample", {"functor": "posthom1"}, ok,
                    {"cotriple": gdims, "excisive": verdict["dims"]}, t.seconds)]


# -- 10: the cotriple power maps to nothing in its own tower stage ---------------------------------


def suite_perp_vanishing(cfg: SuiteConfig):
    cat = catalog(cfg.field)
    rnd = Rand(cfg.field, cfg.seed + 11)
    ctx = rnd.minimal_context()
    ini = ctx.initial()
    results = []
    for fname in CRIT_CATALOG:
        f = cat[fname]
        for n in range(1, cfg.max_n + 1):
            params = {"functor": fname, "n": n}
            with timed() as t:
                try:
                    G = perp_of(n + 1, f)
                    tower = TnTower(G, n, ini, cap=cfg.cap)
                    unit = tower.unit(1, ini)
                    src = G.evaluate(ini)
                    ok = blockmap_homology_zero(unit, src)
                except ResourceCapError as e:
                    results.append(_skip(f"perp-vanishing[{fname},n={n}]", params,
                                         e, t.seconds))
                    continue
            results.append(_result(f"perp-vanishing[{fname},n={n}]", params, ok,
                                   {}, t.seconds))
    return results


# -- 11: restricted towers recover the excisive stages ----------------------------------------------


def suite_beta_tower(cfg: SuiteConfig):
    cat = catalog(cfg.field)
    results = []
    count = cfg.count(5)
    for i in range(count):
        rnd = Rand(cfg.field, cfg.seed + 100 + i)
        ctx, beta = rnd.beta_object(max_dim=1)
        for k in range(0, cfg.max_k + 1):
            params = {"beta": i, "k": k}
            with timed() as t:
                try:
                    rep = beta_tower(cat["tensor2"], beta, 1, k, cap=cfg.cap)
                    ok = rep["match"] and rep["euler_defect"] == 0
                    detail = {"skeleton": rep["skeleton"], "fiber": rep["fiber"]}
                except ResourceCapError as e:
                    results.append(_skip(f"beta-tower[{i},k={k}]", params, e,
                                         t.seconds))
                    continue
            results.append(_result(f"beta-tower[{i},k={k}]", params, ok, detail,
                                   t.seconds))
    return results


# -- 12: convergence estimates ------------------------------------------------------------------


def suite_convergence(cfg: SuiteConfig):
    cat = catalog(cfg.field)
    rnd = Rand(cfg.field, cfg.seed + 12)
    results = []
    for fname in ("underlying", "tensor2", "shift1_tensor2"):
        f = cat[fname]
        params = {"functor": fname}
        with timed() as t:
            try:
                x = _sample_object(cfg.field, rnd, False)
                rep = convergence_profile(f, 1, 2, x, cap=cfg.cap)
                ok = rep["ok"]
                detail = {"rows": [{k: (str(v) if v == float("inf") else v)
                                    for k, v in r.items()} for r in rep["rows"]]}
            except ResourceCapError as e:
                results.append(_skip(f"convergence[{fname}]", params, e, t.seconds))
                continue
        results.append(_result(f"convergence[{fname}]", params, ok, detail,
                               t.seconds))
    return results


SUITES = {
    "foundations": suite_foundations,
    "cube-models": suite_cube_models,
    "cotriple-axioms": suite_cotriple_axioms,
    "cross-effects": suite_cross_effects,
    "degree-excision": suite_degree_excision,
    "realization-excision": suite_realization_excision,
    "appendix-A1": suite_appendix_a1,
    "tower-agreement": suite_tower_agreement,
    "tower-counterexample": suite_tower_counterexample,
    "perp-vanishing": suite_perp_vanishing,
    "beta-tower": suite_beta_tower,
    "convergence": suite_convergence,
}


def run_suite(name: str, cfg: SuiteConfig):
    if name not in SUITES:
        raise KeyError(f"unknown suite {name!r}; valid: {sorted(SUITES)}")
    return SUITES[name](cfg)
