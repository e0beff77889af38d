import math

import pytest

from crosstower.complexes import (
    ChainComplex,
    ChainMap,
    cone,
    direct_sum,
    hofib,
    map_connectivity,
    pushout,
    tensor,
    tensor_map,
)
from crosstower.field import prime_field, rational_field
from crosstower.matrix import Matrix
from crosstower.randgen import Rand

F = prime_field()


def single(deg=0, dim=1, field=F):
    return ChainComplex.single(field, deg, dim)


def test_zero_complex_homology():
    assert ChainComplex.zero(F).homology_dims() == {}


def test_dd_zero_asserted():
    one = Matrix.identity(F, 1)
    with pytest.raises(ValueError):
        ChainComplex(F, {0: 1, 1: 1, 2: 1}, {1: one, 2: one})


def test_two_step_zero_differential():
    c = ChainComplex(F, {0: 1, 1: 1}, {})
    assert c.homology_dims() == {0: 1, 1: 1}


def test_cone_of_identity_acyclic():
    c = single()
    cn, _ = cone(ChainMap.identity(c))
    assert cn.homology_dims() == {}


def test_hofib_of_identity_acyclic():
    rnd = Rand(F, 11)
    c = rnd.complex()
    fib, _ = hofib(ChainMap.identity(c))
    assert fib.homology_dims() == {}


def test_hofib_of_zero_map_is_loop():
    rnd = Rand(F, 5)
    y = rnd.complex(max_dim=2)
    z = ChainComplex.zero(F)
    fib, _ = hofib(ChainMap.zero(z, y))
    expected = {n - 1: d for n, d in y.homology_dims().items()}
    assert fib.homology_dims() == expected


def les_euler_defect(f):
    """Alternating sum of dim H(hofib) - dim H(X) + dim H(Y): zero by the
    long exact sequence."""
    fib, _ = hofib(f)
    total = 0
    hs = [fib.homology_dims(), f.source.homology_dims(), f.target.homology_dims()]
    degrees = set().union(*hs)
    for n in degrees:
        total += (-1) ** n * (hs[0].get(n, 0) - hs[1].get(n, 0) + hs[2].get(n, 0))
    return total


def test_hofib_of_diagonal():
    # LES oracle: H0(k) -> H0(k^2) is injective with cokernel k, so the
    # fiber carries a single class in degree -1.
    x = single()
    y = single(dim=2)
    diag = ChainMap(x, y, {0: Matrix.from_rows(F, [[1], [1]])})
    fib, _ = hofib(diag)
    assert fib.homology_dims() == {-1: 1}
    assert les_euler_defect(diag) == 0


def test_cone_of_zero_and_shift():
    y = Rand(F, 9).complex()
    z = ChainComplex.zero(F)
    cn, _ = cone(ChainMap.zero(z, y))
    assert cn.homology_dims() == y.homology_dims()
    cn2, _ = cone(ChainMap.zero(single(), z))
    assert cn2.homology_dims() == {1: 1}


def test_cone_hofib_shift_random():
    rnd = Rand(F, 21)
    for _ in range(15):
        x = rnd.complex()
        y = rnd.complex()
        f = rnd.chain_map(x, y)
        cn, _ = cone(f)
        fib, _ = hofib(f)
        hc = cn.homology_dims()
        hf = fib.homology_dims()
        assert hc == {n + 1: d for n, d in hf.items()}
        assert les_euler_defect(f) == 0


def test_tensor_unit_and_kunneth():
    rnd = Rand(F, 3)
    c = rnd.complex()
    unit = single()
    assert tensor(unit, c).homology_dims() == c.homology_dims()
    two = ChainComplex(F, {0: 1, 1: 1}, {})
    sq = tensor(two, two)
    assert sq.dims_table() == {0: 1, 1: 2, 2: 1}
    for _ in range(10):
        a, b = rnd.complex(), rnd.complex()
        ha, hb = a.homology_dims(), b.homology_dims()
        hab = tensor(a, b).homology_dims()
        expect = {}
        for p, dp in ha.items():
            for q, dq in hb.items():
                expect[p + q] = expect.get(p + q, 0) + dp * dq
        assert hab == expect


def test_tensor_of_acyclics_acyclic():
    disc = ChainComplex(F, {0: 1, 1: 1}, {1: Matrix.identity(F, 1)})
    assert tensor(disc, disc).homology_dims() == {}


def test_tensor_map_functorial():
    rnd = Rand(F, 33)
    x, y = rnd.complex(max_dim=2), rnd.complex(max_dim=2)
    f = rnd.chain_map(x, y)
    g = rnd.chain_map(x, y)
    tf = tensor_map(f, g)
    assert tf.source == tensor(x, x)
    assert tf.target == tensor(y, y)


def test_pushout_fold_and_coproduct():
    x = single()
    po = pushout(ChainMap.identity(x), ChainMap.identity(x))
    assert po.value.dims_table() == {0: 1}
    z = ChainComplex.zero(F)
    rnd = Rand(F, 8)
    a, b = rnd.complex(allow_zero=False), rnd.complex(allow_zero=False)
    po2 = pushout(ChainMap.zero(z, a), ChainMap.zero(z, b))
    expect = {}
    for n in set(list(a.degrees()) + list(b.degrees())):
        if a.dim(n) + b.dim(n):
            expect[n] = a.dim(n) + b.dim(n)
    assert po2.value.dims_table() == expect


def test_pushout_two_injections_dims():
    x = single()
    y = single(dim=2)
    i = ChainMap(x, y, {0: Matrix.from_rows(F, [[1], [0]])})
    j = ChainMap(x, y, {0: Matrix.from_rows(F, [[0], [1]])})
    po = pushout(i, j)
    assert po.value.dims_table() == {0: 3}
    assert po.is_homotopy
    # universal property for a genuine cocone: id and the coordinate swap
    swap = ChainMap(y, y, {0: Matrix.from_rows(F, [[0, 1], [1, 0]])})
    out = po.map_out(ChainMap.identity(y), swap)
    assert out.compose(po.from_left) == ChainMap.identity(y)
    assert out.compose(po.from_right) == swap


def test_induced_homology_identity_and_qiso():
    rnd = Rand(F, 13)
    c = rnd.complex(allow_zero=False)
    idm = ChainMap.identity(c)
    for n in c.degrees():
        m = idm.induced_on_homology(n)
        assert m == Matrix.identity(F, m.rows)
    assert idm.is_quasi_iso()


def test_inclusion_into_padded_cone_is_qiso():
    x = single()
    disc = ChainComplex(F, {0: 1, 1: 1}, {1: Matrix.identity(F, 1)})
    total, injs, _ = direct_sum([x, disc])
    inc = injs[0]
    assert inc.is_quasi_iso()


def test_random_quasi_isos():
    rnd = Rand(F, 77)
    for _ in range(10):
        x = rnd.complex(allow_zero=False)
        f = rnd.quasi_iso(x)
        assert f.is_quasi_iso()


def test_connectivity():
    assert ChainComplex.zero(F).connectivity() == math.inf
    disc = ChainComplex(F, {0: 1, 1: 1}, {1: Matrix.identity(F, 1)})
    assert disc.connectivity() == math.inf
    assert single(3).connectivity() == 2
    c = Rand(F, 2).complex(allow_zero=False)
    assert map_connectivity(ChainMap.identity(c)) == math.inf


def test_homology_map_is_zero_detects():
    x = single()
    y = single()
    zero = ChainMap.zero(x, y)
    idm = ChainMap.identity(x)
    assert zero.homology_map_is_zero()
    assert not idm.homology_map_is_zero()


def test_json_roundtrip():
    for field in (F, rational_field()):
        c = Rand(field, 4).complex(allow_zero=False)
        back = ChainComplex.from_json(field, c.to_json())
        assert back == c
