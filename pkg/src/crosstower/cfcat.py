"""The category of factorizations A -> X -> B of a fixed map f: A -> B.

Objects are factorizations with the first leg degreewise injective; morphisms
are maps under A and over B.  Provides coproducts over the initial object
(and over arbitrary base objects, used by restricted contexts), fold maps,
the set-tensor B⊗_X U gluing copies of B along X, context restriction, and a
homotopy reduction of objects that preserves both structure maps.
"""

from __future__ import annotations

from .complexes import ChainComplex, ChainMap, direct_sum
from .field import Field
from .matrix import Matrix, quotient_map


class CfContext:
    """A fixed map f: A -> B; objects of the category factor it."""

    __slots__ = ("A", "B", "f")

    def __init__(self, A: ChainComplex, B: ChainComplex, f: ChainMap):
        if f.source is not A and f.source != A:
            raise ValueError("context map must start at A")
        if f.target is not B and f.target != B:
            raise ValueError("context map must end at B")
        self.A, self.B, self.f = A, B, f

    @property
    def field(self) -> Field:
        return self.A.field

    def is_cofibrant(self) -> bool:
        return self.f.is_degreewise_injective()

    @staticmethod
    def pointed(field: Field) -> "CfContext":
        z = ChainComplex.zero(field)
        return CfContext(z, z, ChainMap.zero(z, z))

    def initial(self) -> "CfObject":
        return CfObject(self, self.A, ChainMap.identity(self.A), self.f)

    def terminal(self) -> "CfObject":
        return CfObject(self, self.B, self.f, ChainMap.identity(self.B))

    def __eq__(self, other):
        if not isinstance(other, CfContext):
            return NotImplemented
        return self.A == other.A and self.B == other.B and self.f == other.f


class CfObject:
    """A factorization A -> X -> B of the context map."""

    __slots__ = ("ctx", "X", "incl", "proj")

    def __init__(self, ctx: CfContext, X: ChainComplex, incl: ChainMap, proj: ChainMap,
                 validate: bool = True):
        self.ctx = ctx
        self.X = X
        self.incl = incl
        self.proj = proj
        if validate:
            if not (proj.compose(incl) == ctx.f):
                raise ValueError("proj ∘ incl must equal the context map")
            if not incl.is_degreewise_injective():
                raise ValueError("the first leg of a factorization must be injective")

    def identity(self) -> "CfMorphism":
        return CfMorphism(self, self, ChainMap.identity(self.X), validate=False)

    def proj_is_injective(self) -> bool:
        return self.proj.is_degreewise_injective()

    def to_json(self) -> dict:
        return {"X": self.X.to_json(), "incl": self.incl.to_json(),
                "proj": self.proj.to_json()}

    def __repr__(self):
        return f"CfObject(dims={self.X.dims_table()})"


class CfMorphism:
    """A map of factorizations: commutes with both structure maps."""

    __slots__ = ("source", "target", "g")

    def __init__(self, source: CfObject, target: CfObject, g: ChainMap,
                 validate: bool = True):
        self.source = source
        self.target = target
        self.g = g
        if validate:
            if not (g.compose(source.incl) == target.incl):
                raise ValueError("morphism does not commute with inclusions")
            if not (target.proj.compose(g) == source.proj):
                raise ValueError("morphism does not commute with projections")

    def compose(self, first: "CfMorphism") -> "CfMorphism":
        return CfMorphism(first.source, self.target, self.g.compose(first.g), validate=False)

    def is_quasi_iso(self) -> bool:
        return self.g.is_quasi_iso()


def initial(ctx: CfContext) -> CfObject:
    return ctx.initial()


def terminal(ctx: CfContext) -> CfObject:
    return ctx.terminal()


class Coproduct:
    """Strict coproduct of complexes under a common base complex.

    Built as the quotient of the direct sum by the span of
    u_k(a) - u_{k+1}(a); keeps the per-degree sections needed to construct
    induced maps out of the coproduct.
    """

    __slots__ = ("base", "factors", "value", "injections", "from_base",
                 "_quots", "_sections", "_sum_injs")

    def __init__(self, base: ChainComplex, factors):
        # factors: list of (X_i, u_i: base -> X_i), each u_i injective
        self.base = base
        self.factors = list(factors)
        field = base.field
        if not self.factors:
            self.value = base
            self.injections = []
            self.from_base = ChainMap.identity(base)
            self._quots, self._sections, self._sum_injs = None, None, None
            return
        xs = [x for (x, _) in self.factors]
        total, injs, _ = direct_sum(xs)
        quots, sections, dims = {}, {}, {}
        lo, hi = total.lo, total.hi
        for n in range(lo, hi + 1):
            rels = []
            for k in range(len(self.factors) - 1):
                uk = self.factors[k][1].comp(n)
                uk1 = self.factors[k + 1][1].comp(n)
                col = injs[k].comp(n) @ uk - injs[k + 1].comp(n) @ uk1
                rels.append(col)
            if rels:
                rel = Matrix.hstack(rels)
                rel = rel.column_space_basis()
            else:
                rel = Matrix.zeros(field, total.dim(n), 0)
            Q, S = quotient_map(rel, total.dim(n))
            quots[n], sections[n] = Q, S
            dims[n] = Q.rows
        diffs = {}
        for n in range(lo + 1, hi + 1):
            diffs[n] = quots[n - 1] @ total.d(n) @ sections[n]
        self.value = ChainComplex(field, dims, diffs, validate=False)
        self._quots, self._sections = quots, sections
        self._sum_injs = injs
        self.injections = []
        for k, (x, _) in enumerate(self.factors):
            comps = {n: quots[n] @ injs[k].comp(n) for n in range(lo, hi + 1)}
            self.injections.append(ChainMap(x, self.value, comps, validate=False))
        u0 = self.factors[0][1]
        self.from_base = self.injections[0].compose(u0)

    def map_out(self, maps) -> ChainMap:
        """Universal map from the coproduct, given maps X_i -> W that agree
        after composing with the base inclusions."""
        if not self.factors:
            raise ValueError("empty coproduct: map out of the base directly")
        W = maps[0].target
        field = self.base.field
        comps = {}
        for n in self.value.degrees():
            stacked = Matrix.hstack([m.comp(n) for m in maps])
            comps[n] = stacked @ self._sections[n]
        return ChainMap(self.value, W, comps, validate=False)

    def induced(self, other: "Coproduct", factor_maps) -> ChainMap:
        """Map to another coproduct over the same base, via per-factor maps
        g_k: X_k -> other.factor[pos(k)]; factor_maps is a list of
        (g_k: ChainMap, pos_k: int)."""
        return self.map_out([other.injections[pos].compose(g) for (g, pos) in factor_maps])


def coproduct_over_A(objs, validate: bool = False):
    """Coproduct of factorization objects over the initial object.

    Returns (object, injections as CfMorphisms, fold-capable Coproduct).
    """
    if not objs:
        raise ValueError("need at least one object")
    ctx = objs[0].ctx
    for o in objs[1:]:
        if o.ctx is not ctx and o.ctx != ctx:
            raise ValueError("coproduct factors must share their context")
    cop = Coproduct(ctx.A, [(o.X, o.incl) for o in objs])
    if not cop.factors:
        raise ValueError("unreachable")
    proj = cop.map_out([o.proj for o in objs])
    obj = CfObject(ctx, cop.value, cop.from_base, proj, validate=validate)
    injections = [CfMorphism(o, obj, cop.injections[k], validate=validate)
                  for k, o in enumerate(objs)]
    return obj, injections, cop


def coproduct_over(base: CfObject, objs, validate: bool = False):
    """Coproduct over an arbitrary object of the context, along morphisms
    u_k: base -> X_k given as CfMorphisms."""
    ctx = base.ctx
    cop = Coproduct(base.X, [(m.target.X, m.g) for m in objs])
    proj = cop.map_out([m.target.proj for m in objs])
    obj = CfObject(ctx, cop.value, cop.from_base.compose(base.incl), proj, validate=validate)
    injections = [CfMorphism(m.target, obj, cop.injections[k], validate=validate)
                  for k, m in enumerate(objs)]
    return obj, injections, cop


def fold(x: CfObject, n: int):
    """The fold morphism from the n-fold coproduct of x onto x."""
    if n < 1:
        raise ValueError("fold needs n >= 1")
    obj, injections, cop = coproduct_over_A([x] * n)
    g = cop.map_out([ChainMap.identity(x.X)] * n)
    return CfMorphism(obj, x, g, validate=False), obj, injections


# -- set tensor B⊗_X U ---------------------------------------------------------


def bar_arm(x: CfObject) -> tuple[CfObject, CfMorphism]:
    """The one-element set tensor: X ⊕ B ⊕ X[1] (the cylinder of proj),
    together with the canonical morphism from x."""
    ctx = x.ctx
    field = ctx.field
    X, B = x.X, ctx.B
    los = [c.lo for c in (X, B) if not c.is_zero_complex()]
    his = [c.hi for c in (X, B) if not c.is_zero_complex()]
    if not los:
        z = ChainComplex.zero(field)
        obj = CfObject(ctx, z, ChainMap.zero(ctx.A, z), ChainMap.zero(z, B), validate=False)
        return obj, CfMorphism(x, obj, ChainMap.zero(X, z), validate=False)
    lo, hi = min(los), max(his + [X.hi + 1])
    dims = {n: X.dim(n) + B.dim(n) + X.dim(n - 1) for n in range(lo, hi + 1)}
    diffs = {}
    for n in range(lo + 1, hi + 1):
        # columns: X_n | B_n | X_{n-1};  rows: X_{n-1} | B_{n-1} | X_{n-2}
        dx = X.d(n)
        db = B.d(n)
        beta = x.proj.comp(n - 1)
        mI = Matrix.identity(field, X.dim(n - 1)).scale(-1)
        grid = [
            [dx, Matrix.zeros(field, X.dim(n - 1), B.dim(n)), mI],
            [Matrix.zeros(field, B.dim(n - 1), X.dim(n)), db, beta],
            [Matrix.zeros(field, X.dim(n - 2), X.dim(n)),
             Matrix.zeros(field, X.dim(n - 2), B.dim(n)), X.d(n - 1).scale(-1)],
        ]
        diffs[n] = Matrix.block(grid)
    V = ChainComplex(field, dims, diffs, validate=False)
    from_x = {}
    projc = {}
    for n in range(lo, hi + 1):
        m = Matrix.zeros(field, V.dim(n), X.dim(n))
        for j in range(X.dim(n)):
            m.a[j, j] = field.one()
        from_x[n] = m
        pm = Matrix.zeros(field, B.dim(n), V.dim(n))
        pm.a[:, :X.dim(n)] = x.proj.comp(n).a
        for j in range(B.dim(n)):
            pm.a[j, X.dim(n) + j] = field.one()
        projc[n] = pm
    from_x_map = ChainMap(X, V, from_x, validate=False)
    proj = ChainMap(V, ctx.B, projc, validate=False)
    obj = CfObject(ctx, V, from_x_map.compose(x.incl), proj, validate=False)
    return obj, CfMorphism(x, obj, from_x_map, validate=False)


def reduced_arm(x: CfObject) -> tuple[CfObject, CfMorphism]:
    """A small model of the one-element set tensor: X extended by the
    homology of the cylinder quotient.  Quasi-isomorphic to bar_arm under X
    and over B."""
    arm, from_x = bar_arm(x)
    obj, _, incl_star = reduce_object_along(arm, from_x.g)
    return obj, CfMorphism(x, obj, incl_star, validate=False)


def tensor_with_set(x: CfObject, u: int, model: str = "bar"):
    """B⊗_X U for a set of size u: glue u copies of B along X.

    Returns (object, map_from_x: CfMorphism).  Models:
      - "bar": normalized bar homotopy colimit over the poset with the empty
        set under each singleton (the default, always valid);
      - "strict": iterated pushout of u copies of B over X (requires the
        projection of x to be degreewise injective);
      - "reduced": iterated pushout of the reduced arm (always valid,
        quasi-isomorphic to the bar model).
    """
    if u < 0:
        raise ValueError("set size must be non-negative")
    if u == 0:
        return x, x.identity()
    if model == "bar":
        arm, from_x = bar_arm(x)
    elif model == "strict":
        if not x.proj_is_injective():
            raise ValueError("strict set-tensor needs an injective projection")
        arm = x.ctx.terminal()
        from_x = CfMorphism(x, arm, x.proj, validate=False)
    elif model == "reduced":
        arm, from_x = reduced_arm(x)
    else:
        raise ValueError(f"unknown set-tensor model {model!r}")
    obj, injections, cop = coproduct_over(x, [from_x] * u)
    map_from_x = CfMorphism(x, obj, cop.from_base, validate=False)
    return obj, map_from_x


def restrict_context(beta: CfObject) -> CfContext:
    """The context of factorizations of the structure map X -> B of beta."""
    return CfContext(beta.X, beta.ctx.B, beta.proj)


def embed_restricted(beta: CfObject, z: CfObject) -> CfObject:
    """View an object of the restricted context of beta as an object of the
    ambient context (compose its inclusion with the one of beta)."""
    ctx = beta.ctx
    return CfObject(ctx, z.X, z.incl.compose(beta.incl), z.proj, validate=False)


# -- homotopy reduction of objects -----------------------------------------------


def reduce_object_along(y: CfObject, incl: ChainMap):
    """Reduce y onto (image of incl) ⊕ (homology of the quotient by it).

    incl: W -> Y must be degreewise injective and factor through the object
    inclusion of y (used with W = A, and with W = X for set-tensor arms).
    Returns (reduced: CfObject, phi: CfMorphism reduced -> y, incl_star:
    ChainMap W -> reduced); phi is a quasi-isomorphism, phi ∘ incl_star =
    incl on the nose, and both structure maps of the reduced object are the
    transported ones.
    """
    ctx = y.ctx
    field = ctx.field
    W = incl.source
    Y = y.X
    if Y.is_zero_complex():
        obj = CfObject(ctx, Y, y.incl, y.proj, validate=False)
        return obj, CfMorphism(obj, y, ChainMap.identity(Y), validate=False), incl
    quots, sections = {}, {}
    lo, hi = Y.lo, Y.hi
    for n in range(lo, hi + 1):
        Q, S = quotient_map(incl.comp(n).column_space_basis(), Y.dim(n))
        quots[n], sections[n] = Q, S
    qdims = {n: quots[n].rows for n in range(lo, hi + 1)}
    qdiffs = {n: quots[n - 1] @ Y.d(n) @ sections[n] for n in range(lo + 1, hi + 1)}
    Qc = ChainComplex(field, qdims, qdiffs, validate=False)
    reps = {n: Qc._homology_data(n)[3] for n in range(lo, hi + 1)}
    # tau: the W-part of the differential applied to the complement
    taus = {}
    for n in range(lo + 1, hi + 1):
        m = Y.d(n) @ sections[n]
        resid = m - sections[n - 1] @ (quots[n - 1] @ m)
        taus[n] = incl.comp(n - 1).solve_right(resid)

    def hdim(n):
        return reps[n].cols if n in reps else 0

    dims = {n: W.dim(n) + hdim(n) for n in range(lo, hi + 1)}
    diffs = {}
    for n in range(lo + 1, hi + 1):
        tw = taus[n] @ reps[n] if hdim(n) else Matrix.zeros(field, W.dim(n - 1), 0)
        grid = [[W.d(n), tw],
                [Matrix.zeros(field, hdim(n - 1), W.dim(n)),
                 Matrix.zeros(field, hdim(n - 1), hdim(n))]]
        diffs[n] = Matrix.block(grid)
    Ystar = ChainComplex(field, dims, diffs, validate=True)
    # phi(w, eta) = incl(w) + section(rep(eta))
    phic = {}
    for n in range(lo, hi + 1):
        right = sections[n] @ reps[n] if hdim(n) else Matrix.zeros(field, Y.dim(n), 0)
        phic[n] = Matrix.hstack([incl.comp(n), right])
    phi = ChainMap(Ystar, Y, phic, validate=True)
    incl_star_comps = {}
    for n in range(lo, hi + 1):
        m = Matrix.zeros(field, Ystar.dim(n), W.dim(n))
        for j in range(W.dim(n)):
            m.a[j, j] = field.one()
        incl_star_comps[n] = m
    incl_star = ChainMap(W, Ystar, incl_star_comps, validate=False)
    a_through_w = _factor_through(incl, y.incl)
    obj = CfObject(ctx, Ystar, incl_star.compose(a_through_w),
                   y.proj.compose(phi), validate=False)
    return obj, CfMorphism(obj, y, phi, validate=False), incl_star


def _factor_through(incl: ChainMap, a_incl: ChainMap) -> ChainMap:
    """Express the object inclusion A -> Y through W -> Y (solved exactly)."""
    comps = {}
    for n in a_incl.source.degrees():
        comps[n] = incl.comp(n).solve_right(a_incl.comp(n))
    return ChainMap(a_incl.source, incl.source, comps, validate=False)


def reduce_object(y: CfObject) -> tuple[CfObject, CfMorphism]:
    """Reduce y onto A ⊕ H(Y/A), keeping both structure maps.

    Returns (reduced, phi: reduced -> y); phi is a quasi-isomorphism in the
    category (under A, over B).
    """
    obj, phi, _ = reduce_object_along(y, y.incl)
    return obj, phi
