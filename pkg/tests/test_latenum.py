import math

import numpy as np
import pytest

from hyperlat.hypgeom import RHO_REAL, cartan_radius
from hyperlat.latenum import (
    EnumerationBudgetError,
    GramError,
    brute_force_units,
    config_key,
    count_by_radius,
    elements_to_rows,
    enumerate_units,
    fit_growth_exponent,
    gram_matrix,
    load_cache,
    save_cache,
    _fincke_pohst,
    _NodeCounter,
)
from hyperlat.quaternion import (
    QI_ONE,
    congruence_test,
    embed_matrix,
    make_q17_algebra,
    quat_from_coords,
    quat_mul,
    quat_neg,
    quat_norm,
)


def canonical(coords):
    for v in coords:
        if v > 0:
            return tuple(coords)
        if v < 0:
            return tuple(-c for c in coords)
    return tuple(coords)


def test_gram_golden(algebra, gram_golden):
    G = gram_matrix(algebra).matrix
    want = np.array([[float(v) for v in row] for row in gram_golden["matrix"]])
    assert np.max(np.abs(G - want)) <= 1e-12 * np.max(np.abs(want))
    # hand-derived entries
    assert G[0, 0] == 4.0
    assert G[2, 2] == 12.0
    assert abs(G[4, 6] - (-48.0 * math.sqrt(3.0))) < 1e-12


def test_gram_quadratic_identity(algebra):
    G = gram_matrix(algebra).matrix
    rng = np.random.default_rng(11)
    for _ in range(200):
        c = rng.integers(-20, 21, size=8)
        x = quat_from_coords([int(v) for v in c])
        total = 0.0
        for p in (1, 2):
            M = embed_matrix(x, p, algebra)
            total += float(np.sum(M * M))
        quad = float(c @ G @ c)
        assert abs(quad - total) <= 1e-9 * max(1.0, abs(total))


def test_enumerate_zero_radius(algebra):
    cache = enumerate_units(algebra, 0.0, 0.0)
    assert [el.coords for el in cache.elements] == [(1, 0, 0, 0, 0, 0, 0, 0)]


def test_enumeration_count_frozen(algebra, enum_counts_golden):
    cache = enumerate_units(algebra, 2.0, 2.0)
    assert len(cache.elements) == enum_counts_golden["n_classes"]
    assert [list(el.coords) for el in cache.elements] == enum_counts_golden["coords"]


def test_element_invariants(algebra):
    cache = enumerate_units(algebra, 5.0, 5.0)
    assert len(cache.elements) > 1
    for el in cache.elements:
        assert quat_norm(el.quat, algebra) == QI_ONE
        assert abs(cartan_radius(el.mat1, RHO_REAL) - el.t1) <= 1e-9
        assert abs(cartan_radius(el.mat2, RHO_REAL) - el.t2) <= 1e-9
        assert el.t1 <= 5.0 + 1e-9 and el.t2 <= 5.0 + 1e-9
        assert el.coords == canonical(el.coords)


def test_determinism_and_sorting(algebra):
    a = enumerate_units(algebra, 5.5, 4.5)
    b = enumerate_units(algebra, 5.5, 4.5)
    assert [el.coords for el in a.elements] == [el.coords for el in b.elements]
    keys = [(el.t1 + el.t2, el.coords) for el in a.elements]
    assert keys == sorted(keys)


def test_backends_and_partitions_agree(algebra):
    jit = enumerate_units(algebra, 5.5, 5.5)
    pure = enumerate_units(algebra, 5.5, 5.5, use_jit=False)
    parts = enumerate_units(algebra, 5.5, 5.5, partitions=4)
    assert [e.coords for e in jit.elements] == [e.coords for e in pure.elements]
    assert [e.coords for e in jit.elements] == [e.coords for e in parts.elements]
    assert jit.nodes == pure.nodes


def test_oracle_equivalence_small(algebra):
    # coordinate boxes B = 1, 2 (B = 3 runs in the acceptance suite)
    for B in (1, 2):
        units = brute_force_units(algebra, B)
        for x in units:
            assert quat_norm(x, algebra) == QI_ONE
        oracle = {canonical(x.coords()) for x in units}
        pairs = set()
        for x in units:
            t1 = cartan_radius(embed_matrix(x, 1, algebra), RHO_REAL)
            t2 = cartan_radius(embed_matrix(x, 2, algebra), RHO_REAL)
            pairs.add((math.ceil(t1 * 4) / 4 + 0.01, math.ceil(t2 * 4) / 4 + 0.01))
        boxes = [b for b in pairs
                 if not any(b != o and b[0] <= o[0] and b[1] <= o[1] for o in pairs)]
        got = set()
        for r1, r2 in boxes:
            cache = enumerate_units(algebra, r1, r2, node_budget=10**10)
            for el in cache.elements:
                if all(abs(c) <= B for c in el.coords):
                    got.add(el.coords)
        assert got == oracle


def test_brute_force_contains_identity(algebra):
    units = brute_force_units(algebra, 1)
    coords = {x.coords() for x in units}
    assert (1, 0, 0, 0, 0, 0, 0, 0) in coords
    assert (-1, 0, 0, 0, 0, 0, 0, 0) in coords


def test_group_closure(algebra):
    R = 6.0
    cache = enumerate_units(algebra, R, R)
    index = {el.coords for el in cache.elements}
    checked = 0
    for a in cache.elements[:12]:
        for b in cache.elements[:12]:
            if a.t1 + b.t1 <= R - 1e-9 and a.t2 + b.t2 <= R - 1e-9:
                prod = quat_mul(a.quat, b.quat, algebra)
                assert canonical(prod.coords()) in index
                checked += 1
    assert checked > 10


def test_congruence_filter(algebra):
    full = enumerate_units(algebra, 6.0, 6.0)
    cong = enumerate_units(algebra, 6.0, 6.0, q=2)
    got = {el.coords for el in cong.elements}
    expect = set()
    for el in full.elements:
        if congruence_test(el.quat, 2) or congruence_test(quat_neg(el.quat), 2):
            expect.add(el.coords)
    assert got == expect
    assert len(got) < len(full.elements)


def test_budget_error(algebra):
    with pytest.raises(EnumerationBudgetError) as exc:
        enumerate_units(algebra, 6.0, 6.0, node_budget=1000)
    assert exc.value.nodes > 1000
    assert isinstance(exc.value.partial, list)
    with pytest.raises(EnumerationBudgetError):
        enumerate_units(algebra, 6.0, 6.0, node_budget=1000, use_jit=False)


def test_count_by_radius_and_fit(algebra):
    hist = count_by_radius(algebra, 8.0, 32)
    # identity-only bin at the bottom
    first_bin = np.searchsorted(hist.edges[1:], 0.1, side="left")
    assert hist.cum_sum_radius[first_bin] == 1
    assert np.all(np.diff(hist.cum_sum_radius) >= 0)
    assert np.all(np.diff(hist.cum_max_radius) >= 0)
    # wedge membership was enforced
    assert hist.cum_sum_radius[-1] == hist.n_elements


def test_fincke_pohst_counts_match_direct(algebra):
    # the sweep visits exactly the integer points of the ellipsoid
    G = np.array([[2.0, 0.2], [0.2, 1.0]])
    counter = _NodeCounter(10**6)
    rows = np.concatenate(list(_fincke_pohst(G, 4.0, counter)), axis=0)
    pts = {tuple(r) for r in rows}
    direct = set()
    for a in range(-3, 4):
        for b in range(-4, 5):
            if 2 * a * a + 0.4 * a * b + b * b <= 4.0 + 1e-12:
                direct.add((a, b))
    assert pts == direct


def test_cache_roundtrip(tmp_path, algebra):
    cache = enumerate_units(algebra, 4.0, 4.0)
    path = tmp_path / "units.bin"
    save_cache(cache, path)
    loaded = load_cache(path, algebra)
    assert loaded.R1 == cache.R1 and loaded.R2 == cache.R2
    assert [e.coords for e in loaded.elements] == [e.coords for e in cache.elements]
    assert [e.t1 for e in loaded.elements] == [e.t1 for e in cache.elements]
    # key mismatch detected
    other = enumerate_units(algebra, 3.0, 3.0)
    save_cache(other, path)
    loaded2 = load_cache(path, algebra)
    assert loaded2.R1 == 3.0
    assert config_key(algebra, 4.0, 4.0, None) != config_key(algebra, 3.0, 3.0, None)


def test_csv_rows(algebra):
    cache = enumerate_units(algebra, 4.0, 4.0)
    rows = elements_to_rows(cache.elements)
    assert len(rows) == len(cache.elements)
    assert all(len(r) == 11 and r[-1] == 1 for r in rows)


def test_gram_requires_real_places(algebra):
    from hyperlat.quaternion import AlgebraDesc

    bad = AlgebraDesc(field=algebra.field, u=3, v=5, places_split=(0.5,))
    with pytest.raises(GramError):
        gram_matrix(bad)
