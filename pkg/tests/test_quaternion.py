import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperlat.numberfield import QuadInt, qi_embed, qi_mul
from hyperlat.quaternion import (
    AlgebraDesc,
    AlgebraError,
    QUAT_I,
    QUAT_IJ,
    QUAT_J,
    QUAT_ONE,
    basis_elements,
    congruence_test,
    embed_matrix,
    make_q17_algebra,
    place_embedding_map,
    quat_from_coords,
    quat_mul,
    quat_norm,
    quat_trace,
    quat_sub,
)

A = make_q17_algebra()
F = A.field

coords8 = st.lists(st.integers(min_value=-100, max_value=100), min_size=8, max_size=8)
quats = st.builds(quat_from_coords, coords8)


def test_algebra_validation():
    with pytest.raises(AlgebraError):
        AlgebraDesc(field=F, u=0, v=5, places_split=(0.5, 0.5))
    with pytest.raises(AlgebraError):
        AlgebraDesc(field=F, u=3, v=5, places_split=(0.7,))
    with pytest.raises(AlgebraError):
        AlgebraDesc(field=F, u=-3, v=5, places_split=(0.5, 0.5))


def test_preset():
    assert (A.u, A.v) == (3, 5)
    assert A.places_split == (0.5, 0.5)
    assert A.field.D == 17


def test_basis_relations():
    # i j = ij, j i = -ij, i^2 = u, j^2 = v, (ij)^2 = -uv
    assert quat_mul(QUAT_I, QUAT_J, A) == QUAT_IJ
    assert quat_mul(QUAT_J, QUAT_I, A) == quat_from_coords((0, 0, 0, 0, 0, 0, -1, 0))
    assert quat_mul(QUAT_I, QUAT_I, A) == quat_from_coords((3, 0, 0, 0, 0, 0, 0, 0))
    assert quat_mul(QUAT_J, QUAT_J, A) == quat_from_coords((5, 0, 0, 0, 0, 0, 0, 0))
    assert quat_mul(QUAT_IJ, QUAT_IJ, A) == quat_from_coords((-15, 0, 0, 0, 0, 0, 0, 0))


@given(quats, quats, quats)
def test_associativity(x, y, z):
    assert quat_mul(quat_mul(x, y, A), z, A) == quat_mul(x, quat_mul(y, z, A), A)


@given(quats)
def test_identity(x):
    assert quat_mul(QUAT_ONE, x, A) == x
    assert quat_mul(x, QUAT_ONE, A) == x


def test_norm_examples():
    assert quat_norm(QUAT_ONE, A) == QuadInt(1, 0)
    assert quat_norm(QUAT_I, A) == QuadInt(-3, 0)


@given(quats, quats)
def test_norm_multiplicative(x, y):
    lhs = quat_norm(quat_mul(x, y, A), A)
    rhs = qi_mul(quat_norm(x, A), quat_norm(y, A), F)
    assert lhs == rhs


def test_trace_examples():
    assert quat_trace(QUAT_ONE) == QuadInt(2, 0)
    assert quat_trace(QUAT_I) == QuadInt(0, 0)
    w_elt = quat_from_coords((0, 1, 0, 0, 0, 0, 0, 0))
    assert quat_trace(w_elt) == QuadInt(0, 2)


def test_embed_matrix_examples():
    np.testing.assert_allclose(embed_matrix(QUAT_ONE, 1, A), np.eye(2))
    s3 = np.sqrt(3.0)
    np.testing.assert_allclose(embed_matrix(QUAT_I, 1, A), np.diag([s3, -s3]))
    np.testing.assert_allclose(embed_matrix(QUAT_J, 1, A),
                               np.array([[0.0, 1.0], [5.0, 0.0]]))
    with pytest.raises(AlgebraError):
        embed_matrix(QUAT_I, 3, A)


def test_embedding_properties_random():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        c = [int(v) for v in rng.integers(-100, 101, size=8)]
        d = [int(v) for v in rng.integers(-100, 101, size=8)]
        x, y = quat_from_coords(c), quat_from_coords(d)
        for p in (1, 2):
            Mx = embed_matrix(x, p, A)
            det = Mx[0, 0] * Mx[1, 1] - Mx[0, 1] * Mx[1, 0]
            nx = qi_embed(quat_norm(x, A), p, F)
            assert abs(det - nx) <= 1e-9 * max(1.0, abs(nx))
            tr = Mx[0, 0] + Mx[1, 1]
            tx = qi_embed(quat_trace(x), p, F)
            assert abs(tr - tx) <= 1e-9 * max(1.0, abs(tx))
            Mxy = embed_matrix(quat_mul(x, y, A), p, A)
            prod = Mx @ embed_matrix(y, p, A)
            assert np.max(np.abs(Mxy - prod)) <= 1e-9 * max(1.0, np.max(np.abs(prod)))


def test_embedding_map_matches_embed_matrix():
    for p in (1, 2):
        V = place_embedding_map(A, p)
        for k, e in enumerate(basis_elements(A)):
            M = embed_matrix(e, p, A)
            np.testing.assert_allclose(V[:, k], M.reshape(-1), atol=1e-15)


def test_congruence():
    assert congruence_test(QUAT_ONE, 7)
    x = quat_from_coords((1, 0, 3, 0, 0, 0, 0, 0))  # 1 + 3i
    assert congruence_test(x, 3)
    assert not congruence_test(QUAT_I, 2)
    with pytest.raises(ValueError):
        congruence_test(QUAT_ONE, 0)


@given(quats)
def test_congruence_level_one(x):
    assert congruence_test(x, 1)


def test_unit_in_sl2():
    # norm-one elements land in SL2 at both places
    x = quat_from_coords((1, 0, 0, 0, 0, 0, 0, 0))
    one = QuadInt(1, 0)
    assert quat_norm(x, A) == one
    for p in (1, 2):
        M = embed_matrix(x, p, A)
        assert abs(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0] - 1.0) < 1e-9


def test_order_closed_under_multiplication():
    # integer coordinates stay integer coordinates (closure of the order)
    x = quat_from_coords((1, 2, -1, 0, 3, -2, 0, 1))
    y = quat_from_coords((0, 1, 1, 1, -2, 0, 2, -1))
    z = quat_mul(x, y, A)
    assert all(isinstance(c, int) for c in z.coords())
    assert quat_sub(z, z).coords() == (0,) * 8
