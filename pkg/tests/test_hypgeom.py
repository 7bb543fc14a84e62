import math

import numpy as np
import pytest

from hyperlat.hypgeom import (
    HypgeomError,
    HypPoint,
    RHO_COMPLEX,
    RHO_REAL,
    RhoParam,
    act,
    ball_volume,
    ball_volume_quadrature,
    basepoint,
    cartan_radius,
    dist,
    geodesic_matrix,
    h2_point,
    h3_point,
)


def rand_sl2r(rng):
    while True:
        M = rng.normal(size=(2, 2))
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if det > 0.1:
            return M / math.sqrt(det)


def rand_sl2c(rng):
    while True:
        M = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
        if abs(det) > 0.1:
            return M / np.sqrt(complex(det))


def test_rho_param():
    assert RHO_REAL.dim == 2
    assert RHO_COMPLEX.dim == 3
    with pytest.raises(HypgeomError):
        RhoParam(0.75)


def test_point_validation():
    with pytest.raises(HypgeomError):
        h2_point(0.0, 0.0)
    with pytest.raises(HypgeomError):
        h3_point(0j, -1.0)
    with pytest.raises(HypgeomError):
        HypPoint("H4", 0.0, 1.0)


def test_act_examples():
    p = basepoint("H2")
    q = act(np.eye(2), p)
    assert (q.x, q.y) == (0.0, 1.0)
    q = act(geodesic_matrix(1.3), p)
    assert abs(q.x) < 1e-15 and abs(q.y - math.exp(1.3)) < 1e-12
    q = act(np.array([[1.0, 1.0], [0.0, 1.0]]), p)
    assert abs(q.x - 1.0) < 1e-15 and abs(q.y - 1.0) < 1e-15


def test_act_h3():
    p = basepoint("H3")
    q = act(geodesic_matrix(0.9).astype(complex), p)
    assert abs(q.t - math.exp(0.9)) < 1e-12
    # unipotent translation by a complex number
    M = np.array([[1.0, 0.5 + 0.25j], [0.0, 1.0]])
    q = act(M, p)
    assert abs(q.horizontal - (0.5 + 0.25j)) < 1e-15 and abs(q.t - 1.0) < 1e-15


def test_act_rejects_bad_matrices():
    with pytest.raises(HypgeomError):
        act(2.0 * np.eye(2), basepoint("H2"))


def test_dist_examples():
    p = basepoint("H2")
    assert dist(p, p) == 0.0
    for t in (0.3, 1.0, 4.0):
        q = h2_point(0.0, math.exp(t))
        assert abs(dist(p, q) - t) < 1e-12
    o3 = basepoint("H3")
    for t in (0.5, 2.0):
        q = h3_point(0j, math.exp(t))
        assert abs(dist(o3, q) - t) < 1e-12
    with pytest.raises(HypgeomError):
        dist(p, o3)


def test_dist_invariance():
    rng = np.random.default_rng(3)
    p = h2_point(0.3, 0.8)
    q = h2_point(-1.2, 2.5)
    for _ in range(200):
        M = rand_sl2r(rng)
        assert abs(dist(act(M, p), act(M, q)) - dist(p, q)) < 1e-9
    p3 = h3_point(0.2 + 0.4j, 0.9)
    q3 = h3_point(-0.5 + 0.1j, 1.7)
    for _ in range(200):
        M = rand_sl2c(rng)
        assert abs(dist(act(M, p3), act(M, q3)) - dist(p3, q3)) < 1e-9


def test_act_is_action():
    rng = np.random.default_rng(4)
    p = h2_point(0.1, 1.3)
    for _ in range(200):
        M, N = rand_sl2r(rng), rand_sl2r(rng)
        lhs = act(M @ N, p)
        rhs = act(M, act(N, p))
        assert abs(lhs.x - rhs.x) < 1e-9 and abs(lhs.y - rhs.y) < 1e-9


def test_triangle_inequality():
    rng = np.random.default_rng(5)
    xs = rng.uniform(-3, 3, size=(10000, 3))
    ys = rng.uniform(0.1, 5, size=(10000, 3))
    for k in range(10000):
        p = h2_point(xs[k, 0], ys[k, 0])
        q = h2_point(xs[k, 1], ys[k, 1])
        r = h2_point(xs[k, 2], ys[k, 2])
        assert dist(p, r) <= dist(p, q) + dist(q, r) + 1e-9


def test_cartan_radius_examples():
    assert cartan_radius(np.eye(2), RHO_REAL) == 0.0
    for t in (0.1, 1.0, 5.0):
        assert abs(cartan_radius(geodesic_matrix(t), RHO_REAL) - t) < 1e-12
    with pytest.raises(HypgeomError):
        cartan_radius(np.diag([2.0, 2.0]), RHO_REAL)


def test_cartan_radius_is_displacement():
    rng = np.random.default_rng(6)
    o = basepoint("H2")
    for _ in range(1000):
        M = rand_sl2r(rng)
        assert abs(cartan_radius(M, RHO_REAL) - dist(act(M, o), o)) < 1e-9
    o3 = basepoint("H3")
    for _ in range(500):
        M = rand_sl2c(rng)
        assert abs(cartan_radius(M, RHO_COMPLEX) - dist(act(M, o3), o3)) < 1e-9


def test_cartan_triangle_inequality():
    rng = np.random.default_rng(7)
    for _ in range(500):
        M, N = rand_sl2r(rng), rand_sl2r(rng)
        assert cartan_radius(M @ N, RHO_REAL) <= (
            cartan_radius(M, RHO_REAL) + cartan_radius(N, RHO_REAL) + 1e-9
        )


def test_ball_volume_examples():
    assert ball_volume(RHO_REAL, 0.0) == 0.0
    assert ball_volume(RHO_COMPLEX, 0.0) == 0.0
    for R in (0.5, 1.0, 3.0, 10.0):
        assert abs(ball_volume(RHO_REAL, R) - (math.cosh(R) - 1.0)) < 1e-12
        quad = ball_volume_quadrature(RHO_REAL, R)
        assert abs(ball_volume(RHO_REAL, R) - quad) < 1e-9 * max(1.0, quad)
        quad = ball_volume_quadrature(RHO_COMPLEX, R)
        assert abs(ball_volume(RHO_COMPLEX, R) - quad) < 1e-9 * max(1.0, quad)
    with pytest.raises(HypgeomError):
        ball_volume(RHO_REAL, -1.0)


def test_growth_exponent():
    # log vol / R approaches 2*rho; the half-plane case meets the 5% band at
    # R = 20, the half-space case needs R = 30 for the constant offset log 8
    # to fall below 5 percent
    v = ball_volume(RHO_REAL, 20.0)
    assert abs(math.log(v) / 20.0 - 1.0) < 0.05
    v = ball_volume(RHO_COMPLEX, 30.0)
    assert abs(math.log(v) / 30.0 - 2.0) / 2.0 < 0.05
    # the local growth rate itself is within 5% already at R = 20 for both
    for rho in (RHO_REAL, RHO_COMPLEX):
        slope = math.log(ball_volume(rho, 21.0) / ball_volume(rho, 19.0)) / 2.0
        assert abs(slope - 2 * rho.value) / (2 * rho.value) < 0.05


def test_small_radius_asymptotics():
    # vol(r) / r^{2 rho + 1} stabilizes as r -> 0
    for rho, limit in ((RHO_REAL, 0.5), (RHO_COMPLEX, 1.0 / 3.0)):
        ratios = [ball_volume(rho, r) / r ** (2 * rho.value + 1)
                  for r in (1e-1, 1e-2, 1e-3)]
        for a in ratios:
            assert abs(a - limit) / limit < 0.05
        assert max(ratios) / min(ratios) < 1.05
