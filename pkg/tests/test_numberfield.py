import math

import pytest
from hypothesis import given, strategies as st

from hyperlat.numberfield import (
    CoordinateOverflowError,
    FieldDesc,
    NumberFieldError,
    QuadInt,
    qi_conj,
    qi_embed,
    qi_mul,
    qi_norm,
    qi_trace,
)

F17 = FieldDesc.make(17)

coord = st.integers(min_value=-1000, max_value=1000)
quadints = st.builds(QuadInt, coord, coord)


def test_field_validation():
    FieldDesc.make(5)
    FieldDesc.make(17)
    with pytest.raises(NumberFieldError):
        FieldDesc.make(19)  # 3 mod 4
    with pytest.raises(NumberFieldError):
        FieldDesc.make(18)  # 2 mod 4
    with pytest.raises(NumberFieldError):
        FieldDesc.make(45)  # not squarefree (9 | 45)
    with pytest.raises(NumberFieldError):
        FieldDesc.make(1)


def test_omega_identities():
    # omega + conj = 1 and omega * conj = (1 - D)/4
    assert F17.omega_num + F17.omega_conj == 1.0
    assert abs(F17.omega_num * F17.omega_conj - (1 - 17) / 4) < 1e-12
    assert abs(F17.omega_num - (1 + math.sqrt(17)) / 2) < 1e-15


def test_mul_examples():
    w = QuadInt(0, 1)
    x = QuadInt(3, -2)
    assert qi_mul(QuadInt(1, 0), x, F17) == x                 # identity
    assert qi_mul(w, w, F17) == QuadInt(4, 1)                 # w^2 = 4 + w
    assert qi_mul(QuadInt(2, 1), QuadInt(2, 1), F17) == QuadInt(8, 5)


def test_mul_example_against_embedding_oracle():
    # (2+w)^2 checked against the floating-point embedding
    prod = qi_mul(QuadInt(2, 1), QuadInt(2, 1), F17)
    for place in (1, 2):
        want = qi_embed(QuadInt(2, 1), place, F17) ** 2
        assert abs(qi_embed(prod, place, F17) - want) < 1e-12 * abs(want)


def test_conj_examples():
    assert qi_conj(QuadInt(5, 0)) == QuadInt(5, 0)
    assert qi_conj(QuadInt(0, 1)) == QuadInt(1, -1)           # 1 - w


@given(quadints)
def test_conj_involution(x):
    assert qi_conj(qi_conj(x)) == x


def test_embed_examples():
    w = QuadInt(0, 1)
    assert abs(qi_embed(w, 1, F17) - 2.5615528128088303) < 1e-15
    assert abs(qi_embed(w, 2, F17) - (-1.5615528128088303)) < 1e-15
    with pytest.raises(ValueError):
        qi_embed(w, 3, F17)


@given(quadints)
def test_embed_trace_identity(x):
    # exact in the double model at these coordinate sizes
    assert qi_embed(x, 1, F17) + qi_embed(x, 2, F17) == float(qi_trace(x))


@given(quadints)
def test_conj_embedding_exact(x):
    assert qi_embed(qi_conj(x), 1, F17) == qi_embed(x, 2, F17)


@given(quadints, quadints)
def test_embedding_homomorphism(x, y):
    z = qi_mul(x, y, F17)
    for place in (1, 2):
        lhs = qi_embed(z, place, F17)
        rhs = qi_embed(x, place, F17) * qi_embed(y, place, F17)
        assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(rhs))


@given(quadints, quadints)
def test_norm_multiplicative_exact(x, y):
    assert qi_norm(qi_mul(x, y, F17), F17) == qi_norm(x, F17) * qi_norm(y, F17)


def test_norm_value():
    # N(a + bw) = a^2 + ab - 4 b^2 for D = 17
    assert qi_norm(QuadInt(0, 1), F17) == -4
    assert qi_norm(QuadInt(1, 0), F17) == 1


def test_overflow_detected():
    big = 1 << 126
    x = QuadInt(big, 0)
    with pytest.raises(CoordinateOverflowError):
        qi_mul(x, x, F17)
    with pytest.raises(CoordinateOverflowError):
        QuadInt(1 << 127, 0)
