"""Field arithmetic: published GF(4) tables, axioms, table construction."""

import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from nbldpc.gf import (
    DEFAULT_PRIMITIVE_POLYS,
    FieldElement,
    FieldSpec,
    GFError,
    gf_add,
    gf_inv,
    gf_mul,
)

# GF(4) with x^2 + x + 1: elements 0, 1, a = alpha, b = alpha^2 = alpha + 1
# in polynomial representation: 0 -> 0, 1 -> 1, a -> 2, b -> 3.
GF4_ADD = {
    (0, 0): 0, (0, 1): 1, (0, 2): 2, (0, 3): 3,
    (1, 0): 1, (1, 1): 0, (1, 2): 3, (1, 3): 2,
    (2, 0): 2, (2, 1): 3, (2, 2): 0, (2, 3): 1,
    (3, 0): 3, (3, 1): 2, (3, 2): 1, (3, 3): 0,
}
GF4_MUL = {
    (0, 0): 0, (0, 1): 0, (0, 2): 0, (0, 3): 0,
    (1, 0): 0, (1, 1): 1, (1, 2): 2, (1, 3): 3,
    (2, 0): 0, (2, 1): 2, (2, 2): 3, (2, 3): 1,
    (3, 0): 0, (3, 1): 3, (3, 2): 1, (3, 3): 2,
}


def test_gf4_addition_table(gf4):
    for (a, b), want in GF4_ADD.items():
        assert gf4.add(a, b) == want


def test_gf4_multiplication_table(gf4):
    for (a, b), want in GF4_MUL.items():
        assert gf4.mul(a, b) == want


def test_gf4_named_entries(gf4):
    alpha, alpha2 = 2, 3
    assert gf4.add(alpha, alpha2) == 1
    assert gf4.add(1, alpha) == alpha2
    assert gf4.mul(alpha, alpha) == alpha2
    assert gf4.mul(alpha, alpha2) == 1
    assert gf4.inv(alpha) == alpha2


def test_char2_self_inverse(gf4):
    for x in gf4.elements():
        assert gf4.add(x, x) == 0


@pytest.mark.parametrize("m", [1, 2, 3])
def test_axioms_exhaustive(m):
    gf = FieldSpec.for_m(m)
    elems = list(gf.elements())
    for a, b, c in itertools.product(elems, repeat=3):
        assert gf.mul(a, gf.mul(b, c)) == gf.mul(gf.mul(a, b), c)
        assert gf.add(a, gf.add(b, c)) == gf.add(gf.add(a, b), c)
        assert gf.mul(a, gf.add(b, c)) == gf.add(gf.mul(a, b), gf.mul(a, c))
    for a in elems:
        if a:
            assert gf.mul(a, gf.inv(a)) == 1
        assert gf.add(a, a) == 0
        assert gf.mul(a, 1) == a


@pytest.mark.parametrize("m", [1, 2, 3, 4])
def test_mul_is_bijection(m):
    gf = FieldSpec.for_m(m)
    for a in range(1, gf.q):
        row = gf.mul_table_row(a)
        assert row[0] == 0
        assert sorted(row.tolist()) == list(range(gf.q))


def test_gf8_inverse_of_alpha():
    gf = FieldSpec(3, 0b1011)
    alpha = 2
    # exhaustive search over the 7 nonzero elements
    inv = next(x for x in range(1, 8) if gf.mul(alpha, x) == 1)
    assert gf.inv(alpha) == inv == gf.pow_alpha(6)


def test_alpha_multiplication_is_exponent_shift():
    gf = FieldSpec.for_m(3)
    for j in range(gf.q - 1):
        for i in range(gf.q - 1):
            lhs = gf.mul(gf.pow_alpha(j), gf.pow_alpha(i))
            assert lhs == gf.pow_alpha(i + j)


def test_log_antilog_consistency():
    for m, poly in DEFAULT_PRIMITIVE_POLYS.items():
        gf = FieldSpec(m, poly)
        assert len(set(gf.antilog_table.tolist())) == gf.q - 1
        for i in range(gf.q - 1):
            assert gf.log_table[gf.antilog_table[i]] == i


def test_non_primitive_poly_rejected():
    # x^4 + x^3 + x^2 + x + 1 is irreducible but not primitive
    with pytest.raises(GFError):
        FieldSpec(4, 0b11111)
    with pytest.raises(GFError):
        FieldSpec(2, 0b101)  # x^2 + 1 = (x+1)^2, reducible


def test_inverse_of_zero_raises(gf4):
    with pytest.raises(GFError):
        gf4.inv(0)


def test_field_element_ops(gf4, gf8):
    a = FieldElement(2, gf4)
    b = FieldElement(3, gf4)
    assert gf_add(a, b).value == 1
    assert gf_mul(a, b).value == 1
    assert gf_inv(a).value == 3
    with pytest.raises(GFError):
        gf_add(a, FieldElement(2, gf8))


@given(st.integers(0, 15), st.integers(0, 15), st.integers(0, 15))
def test_distributivity_gf16(a, b, c):
    gf = FieldSpec.for_m(4)
    assert gf.mul(a, gf.add(b, c)) == gf.add(gf.mul(a, b), gf.mul(a, c))


@given(st.integers(1, 7), st.integers(0, 7))
def test_mul_vec_matches_scalar(a, b):
    gf = FieldSpec.for_m(3)
    arr = np.arange(gf.q)
    assert gf.mul_vec(a, arr)[b] == gf.mul(a, b)
