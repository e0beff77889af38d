import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from crosstower.field import prime_field, rational_field
from crosstower.matrix import Matrix, quotient_map, _rank_modp_blocked

FIELDS = [prime_field(), prime_field(5), rational_field()]


@pytest.mark.parametrize("field", FIELDS)
def test_rank_identity(field):
    assert Matrix.identity(field, 2).rank() == 2


@pytest.mark.parametrize("field", FIELDS)
def test_rank_zero(field):
    assert Matrix.zeros(field, 3, 4).rank() == 0


def test_rank_dependent_rows_rational():
    m = Matrix.from_rows(rational_field(), [[1, 2], [2, 4]])
    assert m.rank() == 1


@pytest.mark.parametrize("field", FIELDS)
def test_kernel_identity_and_zero(field):
    assert Matrix.identity(field, 3).kernel_basis().cols == 0
    k = Matrix.zeros(field, 4, 4).kernel_basis()
    assert k.cols == 4
    assert k.rank() == 4


def test_kernel_single_equation():
    m = Matrix.from_rows(rational_field(), [[1, 1]])
    k = m.kernel_basis()
    assert k.cols == 1
    # proportional to (1, -1)
    assert k.a[0, 0] == -k.a[1, 0]
    assert (m @ k).is_zero()


@pytest.mark.parametrize("field", FIELDS)
def test_solve_and_inverse(field):
    a = Matrix.from_rows(field, [[1, 2], [3, 5]])
    inv = a.inverse()
    assert a @ inv == Matrix.identity(field, 2)


def test_solve_inconsistent_raises():
    a = Matrix.from_rows(prime_field(), [[1, 0], [1, 0]])
    b = Matrix.from_rows(prime_field(), [[1], [2]])
    with pytest.raises(ValueError):
        a.solve_right(b)


@pytest.mark.parametrize("field", FIELDS)
def test_quotient_map_empty_and_full(field):
    q, s = quotient_map(Matrix.zeros(field, 3, 0), 3)
    assert q == Matrix.identity(field, 3)
    full = Matrix.identity(field, 2)
    q2, _ = quotient_map(full, 2)
    assert q2.rows == 0


def test_quotient_map_diagonal():
    field = prime_field()
    w = Matrix.from_rows(field, [[1], [1]])
    q, s = quotient_map(w, 2)
    assert q.rows == 1
    assert (q @ w).is_zero()
    assert q @ s == Matrix.identity(field, 1)
    assert q.rank() == 1


def test_quotient_map_dependent_raises():
    field = prime_field()
    w = Matrix.from_rows(field, [[1, 2], [1, 2]])
    with pytest.raises(ValueError):
        quotient_map(w, 2)


def test_blocked_rank_matches_rref():
    rng = np.random.default_rng(7)
    p = 97
    field = prime_field(p)
    for trial in range(12):
        m = int(rng.integers(1, 40))
        n = int(rng.integers(1, 40))
        r = int(rng.integers(0, min(m, n) + 1))
        a = (rng.integers(0, p, (m, r)) @ rng.integers(0, p, (r, n))) % p
        mat = Matrix(field, a.astype(np.float64))
        assert _rank_modp_blocked(mat.a, p, block=7) == len(mat.rref()[1])


def test_blocked_rank_large():
    rng = np.random.default_rng(3)
    p = 32003
    a = (rng.integers(0, p, (300, 120)) @ rng.integers(0, p, (120, 310))) % p
    assert _rank_modp_blocked(a.astype(np.float64), p) == 120


@settings(max_examples=40, deadline=None)
@given(st.lists(st.lists(st.integers(-9, 9), min_size=3, max_size=3), min_size=3, max_size=5))
def test_rank_kernel_consistency(rows):
    for field in (prime_field(11), rational_field()):
        m = Matrix.from_rows(field, rows)
        k = m.kernel_basis()
        assert m.rank() + k.cols == m.cols
        assert (m @ k).is_zero() if k.cols else True


@settings(max_examples=30, deadline=None)
@given(st.lists(st.lists(st.integers(-5, 5), min_size=2, max_size=2), min_size=2, max_size=4),
       st.lists(st.lists(st.integers(-5, 5), min_size=3, max_size=3), min_size=2, max_size=2))
def test_matmul_agrees_with_rational(rows_a, rows_b):
    fp, fq = prime_field(101), rational_field()
    ap = Matrix.from_rows(fp, rows_a) @ Matrix.from_rows(fp, rows_b)
    aq = Matrix.from_rows(fq, rows_a) @ Matrix.from_rows(fq, rows_b)
    for i in range(ap.rows):
        for j in range(ap.cols):
            assert int(ap.a[i, j]) == int(aq.a[i, j]) % 101


def test_kron_shapes_and_values():
    field = prime_field()
    a = Matrix.from_rows(field, [[1, 2]])
    b = Matrix.from_rows(field, [[3], [4]])
    k = a.kron(b)
    assert k.shape == (2, 2)
    assert int(k.a[0, 0]) == 3 and int(k.a[1, 1]) == 8


def test_entry_string_roundtrip():
    for field in FIELDS:
        m = Matrix.from_rows(field, [[1, -2], [0, 5]])
        back = Matrix.from_entry_strings(field, 2, 2, m.to_entry_strings())
        assert back == m
