"""Enumeration of norm-one units of the quaternion order inside products of
hyperbolic balls.

The order is a rank-8 Z-module; the two matrix embeddings identify it with a
full lattice in R^4 x R^4.  A unit x with Cartan radii t_p satisfies
||sigma_p(x)||_F^2 = 2 cosh t_p, so the box {t_1 <= R_1, t_2 <= R_2} is
contained in the ellipsoid

    w_1 ||sigma_1(x)||^2 + w_2 ||sigma_2(x)||^2 <= 2,   w_p = 1/(2 cosh R_p).

Integer points of that ellipsoid are enumerated depth-first with Cholesky
bound propagation (Fincke-Pohst); candidates are then verified exactly
(reduced norm = 1 in Z[omega]) and against the per-factor radius bounds with
a small inflation slack.  x and -x act identically, so exactly one
representative per pair is kept: the one whose first nonzero coordinate is
positive.
"""

from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, field

import numpy as np

from . import _fpcore
from .hypgeom import RHO_REAL, cartan_radius
from .numberfield import QuadInt, qi_embed
from .quaternion import (
    AlgebraDesc,
    QuatElt,
    QI_ONE,
    congruence_test,
    embed_matrix,
    place_embedding_map,
    quat_from_coords,
    quat_neg,
    quat_norm,
)

DEFAULT_NODE_BUDGET = 100_000_000
_RADIUS_SLACK = 1e-9
_BATCH_ROWS = 131072


class GramError(ValueError):
    """The Gram form failed its positive-definiteness check."""


class EnumerationBudgetError(RuntimeError):
    """Node budget exceeded; carries whatever was found so far."""

    def __init__(self, message: str, nodes: int, partial: list | None = None):
        super().__init__(message)
        self.nodes = nodes
        self.partial = partial if partial is not None else []


class CoverageError(RuntimeError):
    """An enumeration cache does not extend far enough for the request."""


BASIS_LABELS = ("1", "w", "i", "iw", "j", "jw", "ij", "ijw")


@dataclass(frozen=True)
class GramForm:
    """Symmetric positive definite form c -> sum_p ||sigma_p(x_c)||_F^2."""

    matrix: np.ndarray
    basis: tuple[str, ...] = BASIS_LABELS


def gram_matrix(A: AlgebraDesc) -> GramForm:
    """Gram matrix of the eight basis elements under both Frobenius embeddings,
    verified SPD by Cholesky."""
    if A.n_places != 2 or any(r != 0.5 for r in A.places_split):
        raise GramError("the Gram form requires two real split places")
    V1 = place_embedding_map(A, 1)
    V2 = place_embedding_map(A, 2)
    G = V1.T @ V1 + V2.T @ V2
    G = (G + G.T) / 2.0
    try:
        np.linalg.cholesky(G)
    except np.linalg.LinAlgError as exc:
        raise GramError(f"Gram matrix is not positive definite: {exc}") from exc
    return GramForm(matrix=G)


@dataclass(frozen=True)
class LatticeElement:
    """One +/- class of a norm-one unit with its two archimedean shadows."""

    quat: QuatElt | None
    coords: tuple[int, ...]
    t1: float
    t2: float
    mat1: np.ndarray
    mat2: np.ndarray

    @property
    def radii(self) -> tuple[float, float]:
        return (self.t1, self.t2)


@dataclass
class EnumerationCache:
    """Enumeration output plus the coverage it guarantees."""

    algebra: AlgebraDesc
    R1: float
    R2: float
    q: int | None
    elements: list[LatticeElement]
    nodes: int
    complete: bool = True
    _mat1: np.ndarray | None = field(default=None, repr=False)
    _t2: np.ndarray | None = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.elements)

    def matrix_stack(self) -> tuple[np.ndarray, np.ndarray]:
        """(n,2,2) stack of first-factor matrices and (n,) second radii."""
        if self._mat1 is None:
            n = len(self.elements)
            m = np.empty((n, 2, 2))
            t2 = np.empty(n)
            for idx, el in enumerate(self.elements):
                m[idx] = el.mat1
                t2[idx] = el.t2
            self._mat1 = m
            self._t2 = t2
        return self._mat1, self._t2


def _canonical_sign(row: np.ndarray) -> np.ndarray:
    for v in row:
        if v > 0:
            return row
        if v < 0:
            return -row
    return row


class _NodeCounter:
    __slots__ = ("nodes", "budget")

    def __init__(self, budget: int):
        self.nodes = 0
        self.budget = budget

    def spend(self, n: int) -> None:
        self.nodes += n
        if self.nodes > self.budget:
            raise EnumerationBudgetError(
                f"enumeration exceeded the node budget of {self.budget}",
                nodes=self.nodes,
            )


def _fincke_pohst(G: np.ndarray, C: float, counter: _NodeCounter,
                  outer_range: tuple[int, int] | None = None):
    """Yield int64 arrays (m, n) of all integer points with x^T G x <= C.

    Writes Q(x) = sum_i q_i (x_i + sum_{j>i} mu_ij x_j)^2 via Cholesky and
    enumerates depth-first from the stiffest coordinate (largest diagonal of
    G) inward; the innermost coordinate is emitted as a contiguous range.
    ``outer_range`` optionally restricts the outermost coordinate for
    deterministic partitioning.  Every integer assignment counts one node.
    """
    n = G.shape[0]
    perm = np.argsort(np.diag(G))  # index n-1 = stiffest = outermost
    Gp = G[np.ix_(perm, perm)]
    L = np.linalg.cholesky(Gp)
    q = np.diag(L) ** 2
    # Q(x) = sum_i q_i (x_i + c_i)^2 with c_i = sum_{j>i} mu[i, j] x_j
    mu = (L.T / np.diag(L)[:, None])
    inv_perm = np.argsort(perm)

    xs = np.zeros(n, dtype=np.int64)
    pending: list[np.ndarray] = []
    pending_rows = 0

    def descend(i: int, T: float, shifts: np.ndarray):
        nonlocal pending_rows
        ci = shifts[i]
        half = math.sqrt(max(T, 0.0) / q[i])
        lo = math.ceil(-ci - half - 1e-12)
        hi = math.floor(-ci + half + 1e-12)
        if i == n - 1 and outer_range is not None:
            lo = max(lo, outer_range[0])
            hi = min(hi, outer_range[1])
        if hi < lo:
            return
        if i == 0:
            m = hi - lo + 1
            counter.spend(m)
            rows = np.empty((m, n), dtype=np.int64)
            rows[:, 0] = np.arange(lo, hi + 1, dtype=np.int64)
            rows[:, 1:] = xs[1:]
            pending.append(rows[:, inv_perm])
            pending_rows += m
            return
        for x in range(lo, hi + 1):
            counter.spend(1)
            d = x + ci
            rem = T - q[i] * d * d
            if rem < -1e-12:
                continue
            xs[i] = x
            yield from descend(i - 1, max(rem, 0.0), shifts + mu[:, i] * x)
            if pending_rows >= _BATCH_ROWS:
                yield _flush()
        xs[i] = 0

    def _flush() -> np.ndarray:
        nonlocal pending_rows
        out = np.concatenate(pending, axis=0)
        pending.clear()
        pending_rows = 0
        return out

    yield from descend(n - 1, C, np.zeros(n))
    if pending:
        yield _flush()


def _outer_bound(G: np.ndarray, C: float) -> int:
    """Upper bound for |x_outer| where outer = stiffest coordinate."""
    perm = np.argsort(np.diag(G))
    Gp = G[np.ix_(perm, perm)]
    L = np.linalg.cholesky(Gp)
    qnn = L[-1, -1] ** 2
    return int(math.floor(math.sqrt(C / qnn) + 1))


def enumerate_units(
    A: AlgebraDesc,
    R1: float,
    R2: float,
    q: int | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
    partitions: int = 1,
    use_jit: bool = True,
) -> EnumerationCache:
    """All +/- classes of order units with Cartan radii t1 <= R1, t2 <= R2,
    optionally restricted to the principal congruence subgroup of level q.

    Candidates come from a Fincke-Pohst sweep of the weighted ellipsoid
    described in the module docstring (search radius inflated by 1e-9);
    acceptance is re-verified exactly on the integer norm form and within
    inflated floating radius bounds.  Output is sorted by (t1 + t2, coords)
    and is independent of the partition count and of the sweep backend.
    """
    if R1 < 0 or R2 < 0:
        raise ValueError("radii must be >= 0")
    if partitions < 1:
        raise ValueError("partitions must be >= 1")
    V1 = place_embedding_map(A, 1)
    V2 = place_embedding_map(A, 2)
    w1 = 1.0 / (2.0 * math.cosh(R1))
    w2 = 1.0 / (2.0 * math.cosh(R2))
    G = w1 * (V1.T @ V1) + w2 * (V2.T @ V2)
    G = (G + G.T) / 2.0
    C = 2.0 * (1.0 + _RADIUS_SLACK) + 1e-12

    bound = _outer_bound(G, C)
    if partitions == 1:
        ranges = [(-bound, bound)]
    else:
        edges = np.linspace(-bound, bound + 1, partitions + 1).astype(int)
        ranges = [(int(edges[i]), int(edges[i + 1]) - 1) for i in range(partitions)]

    found: dict[tuple[int, ...], LatticeElement] = {}
    nodes = 0
    if use_jit and _fpcore.HAVE_NUMBA:
        perm = np.argsort(np.diag(G))
        Gp = G[np.ix_(perm, perm)]
        L = np.linalg.cholesky(Gp)
        qd = np.diag(L) ** 2
        mu = L.T / np.diag(L)[:, None]
        V1p = np.ascontiguousarray(V1[:, perm])
        V2p = np.ascontiguousarray(V2[:, perm])
        n1max = 2.0 * math.cosh(R1 + 2e-9) + 1e-9
        n2max = 2.0 * math.cosh(R2 + 2e-9) + 1e-9
        out = np.empty((1 << 20, 8), dtype=np.int64)
        for lo_hi in ranges:
            m, used, status = _fpcore.fp_sweep(
                qd, mu, C, V1p, V2p, n1max, n2max, 1e-4,
                np.int64(lo_hi[0]), np.int64(lo_hi[1]),
                np.int64(node_budget - nodes), perm.astype(np.int64), out,
            )
            nodes += int(used)
            if status == _fpcore.STATUS_OVERFLOW:
                raise RuntimeError("candidate buffer overflow in the sweep kernel")
            _filter_batch(out[:m].copy(), A, V1, V2, R1, R2, q, found)
            if status == _fpcore.STATUS_BUDGET:
                raise EnumerationBudgetError(
                    f"enumeration exceeded the node budget of {node_budget}",
                    nodes=nodes, partial=_sorted_elements(found),
                )
    else:
        counter = _NodeCounter(node_budget)
        try:
            for rng in ranges:
                for rows in _fincke_pohst(G, C, counter, outer_range=rng):
                    _filter_batch(rows, A, V1, V2, R1, R2, q, found)
        except EnumerationBudgetError as exc:
            exc.partial = _sorted_elements(found)
            raise
        finally:
            nodes = counter.nodes

    elements = _sorted_elements(found)
    return EnumerationCache(algebra=A, R1=R1, R2=R2, q=q,
                            elements=elements, nodes=nodes)


def _filter_batch(rows, A, V1, V2, R1, R2, q, found) -> None:
    if rows.shape[0] == 0:
        return
    # drop the zero vector
    nz = np.any(rows != 0, axis=1)
    rows = rows[nz]
    if rows.shape[0] == 0:
        return
    rf = rows.astype(np.float64)
    E1 = rf @ V1.T
    E2 = rf @ V2.T
    n1 = np.einsum("ij,ij->i", E1, E1)
    n2 = np.einsum("ij,ij->i", E2, E2)
    t1 = np.arccosh(np.maximum(n1 / 2.0, 1.0))
    t2 = np.arccosh(np.maximum(n2 / 2.0, 1.0))
    keep = (t1 <= R1 + _RADIUS_SLACK) & (t2 <= R2 + _RADIUS_SLACK)
    if not np.any(keep):
        return
    det1 = E1[:, 0] * E1[:, 3] - E1[:, 1] * E1[:, 2]
    det2 = E2[:, 0] * E2[:, 3] - E2[:, 1] * E2[:, 2]
    keep &= (np.abs(det1 - 1.0) < 1e-6) & (np.abs(det2 - 1.0) < 1e-6)
    if not np.any(keep):
        return
    for row, rt1, rt2 in zip(rows[keep], t1[keep], t2[keep]):
        crow = _canonical_sign(row)
        key = tuple(int(v) for v in crow)
        if key in found:
            continue
        x = quat_from_coords(key)
        if quat_norm(x, A) != QI_ONE:
            continue
        if q is not None and not (
            congruence_test(x, q) or congruence_test(quat_neg(x), q)
        ):
            continue
        m1 = embed_matrix(x, 1, A)
        m2 = embed_matrix(x, 2, A)
        found[key] = LatticeElement(
            quat=x, coords=key, t1=float(rt1), t2=float(rt2), mat1=m1, mat2=m2
        )


def _sorted_elements(found: dict) -> list[LatticeElement]:
    return sorted(found.values(), key=lambda el: (el.t1 + el.t2, el.coords))


def brute_force_units(A: AlgebraDesc, B: int, budget: int = 10_000_000_000) -> list[QuatElt]:
    """Independent oracle: all x in the order with norm 1 and every coordinate
    in [-B, B], by exhaustive scan of the first six coordinates.

    For fixed (x0, x1, x2) the norm equation pins uv * x3^2 exactly; the sign
    choices of the two real embeddings of x3 recover at most four candidate
    coordinate pairs, each verified exactly.  Both signs of each unit appear
    in the output, matching the literal coordinate box.
    """
    if B < 0:
        raise ValueError("B must be >= 0")
    side = 2 * B + 1
    if side ** 6 * 4 > budget:
        raise EnumerationBudgetError(
            f"brute-force scan of ({side})^6 * 4 exceeds budget {budget}", nodes=0
        )
    F = A.field
    u, v, uv = A.u, A.v, A.u * A.v
    om1 = qi_embed(QuadInt(0, 1), 1, F)
    om2 = qi_embed(QuadInt(0, 1), 2, F)
    sqrt_disc = om1 - om2
    c_rel = F.omega_relation_constant

    def sq(a: int, b: int) -> tuple[int, int]:
        # (a + b w)^2 = a^2 + c b^2 + (2ab + b^2) w
        return (a * a + c_rel * b * b, 2 * a * b + b * b)

    out: list[QuatElt] = []
    rng = range(-B, B + 1)
    for a0 in rng:
        for b0 in rng:
            s0 = sq(a0, b0)
            for a1 in rng:
                for b1 in rng:
                    s1 = sq(a1, b1)
                    w2a = 1 - s0[0] + u * s1[0]
                    w2b = -s0[1] + u * s1[1]
                    for a2 in rng:
                        for b2 in rng:
                            s2 = sq(a2, b2)
                            # uv * x3^2 = 1 - x0^2 + u x1^2 + v x2^2
                            wa = w2a + v * s2[0]
                            wb = w2b + v * s2[1]
                            if wa % uv or wb % uv:
                                continue
                            ya, yb = wa // uv, wb // uv
                            f1 = ya + yb * om1
                            f2 = ya + yb * om2
                            if f1 < 0 or f2 < 0:
                                continue
                            r1 = math.sqrt(f1)
                            r2 = math.sqrt(f2)
                            seen: set[tuple[int, int]] = set()
                            for sg1 in (r1, -r1):
                                for sg2 in (r2, -r2):
                                    b3 = round((sg1 - sg2) / sqrt_disc)
                                    a3 = round(sg1 - b3 * om1)
                                    if abs(a3) > B or abs(b3) > B:
                                        continue
                                    if (a3, b3) in seen:
                                        continue
                                    if sq(a3, b3) != (ya, yb):
                                        continue
                                    seen.add((a3, b3))
                                    x = quat_from_coords(
                                        (a0, b0, a1, b1, a2, b2, a3, b3))
                                    if quat_norm(x, A) == QI_ONE:
                                        out.append(x)
    out.sort(key=lambda x: x.coords())
    return out


@dataclass
class RadiusHistogram:
    """Cumulative counts of +/- classes by combined and maximal radius.

    Built from the wedge {t1 + t2 <= Rmax}: the combined-radius histogram is
    complete on all bins; the max-radius histogram is complete only for bins
    up to Rmax / 2.
    """

    edges: np.ndarray
    cum_sum_radius: np.ndarray
    cum_max_radius: np.ndarray
    n_elements: int
    nodes: int


def count_by_radius(
    A: AlgebraDesc,
    Rmax: float,
    bins: int,
    q: int | None = None,
    node_budget: int = DEFAULT_NODE_BUDGET,
) -> RadiusHistogram:
    """Histogram data for growth-exponent fits.

    The wedge {t1 + t2 <= Rmax} is covered by the boxes
    {t1 <= k+1, t2 <= Rmax - k}, each enumerated with its own weighted
    ellipsoid; classes are merged on coordinates.
    """
    if bins < 1:
        raise ValueError("bins must be >= 1")
    merged: dict[tuple[int, ...], tuple[float, float]] = {}
    nodes = 0
    k = 0
    while k <= math.floor(Rmax):
        r1 = min(float(k + 1), Rmax)
        r2 = max(Rmax - k, 0.0)
        cache = enumerate_units(A, r1, r2, q=q, node_budget=node_budget - nodes)
        nodes += cache.nodes
        for el in cache.elements:
            if el.t1 + el.t2 <= Rmax + _RADIUS_SLACK and el.coords not in merged:
                merged[el.coords] = (el.t1, el.t2)
        k += 1
    sums = np.array(sorted(t1 + t2 for t1, t2 in merged.values()))
    maxs = np.array(sorted(max(t1, t2) for t1, t2 in merged.values()))
    edges = np.linspace(0.0, Rmax, bins + 1)
    cum_sum = np.searchsorted(sums, edges[1:], side="right")
    cum_max = np.searchsorted(maxs, edges[1:], side="right")
    return RadiusHistogram(
        edges=edges,
        cum_sum_radius=cum_sum.astype(np.int64),
        cum_max_radius=cum_max.astype(np.int64),
        n_elements=len(merged),
        nodes=nodes,
    )


def fit_growth_exponent(
    hist: RadiusHistogram, smin: float = 2.0, min_count: int = 5
) -> tuple[float, float]:
    """Least-squares slope of log cumulative count against combined radius,
    over bins with edge >= smin and count >= min_count.  Returns
    (slope, rms residual)."""
    s = hist.edges[1:]
    c = hist.cum_sum_radius
    mask = (s >= smin) & (c >= min_count)
    if mask.sum() < 3:
        raise ValueError("not enough populated bins for a growth fit")
    xs = s[mask]
    ys = np.log(c[mask].astype(np.float64))
    coef = np.polyfit(xs, ys, 1)
    resid = ys - np.polyval(coef, xs)
    return float(coef[0]), float(np.sqrt(np.mean(resid**2)))


# ----------------------------------------------------------------------------
# serialization

CSV_HEADER = ("c0", "c1", "c2", "c3", "c4", "c5", "c6", "c7", "t1", "t2", "norm_check")


def elements_to_rows(elements: list[LatticeElement]) -> list[tuple]:
    return [(*el.coords, el.t1, el.t2, 1) for el in elements]


def config_key(A: AlgebraDesc, R1: float, R2: float, q: int | None) -> str:
    payload = json.dumps(
        {
            "D": A.field.D,
            "u": A.u,
            "v": A.v,
            "places": list(A.places_split),
            "R1": R1,
            "R2": R2,
            "q": q,
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode()).hexdigest()


_CACHE_MAGIC = b"HYPLAT1\0"


def save_cache(cache: EnumerationCache, path) -> None:
    """Binary cache: magic, key, R1, R2, q, count, then per element eight
    little-endian int64 coordinates and two float64 radii."""
    key = bytes.fromhex(config_key(cache.algebra, cache.R1, cache.R2, cache.q))
    with open(path, "wb") as fh:
        fh.write(_CACHE_MAGIC)
        fh.write(key)
        fh.write(struct.pack("<ddqQ", cache.R1, cache.R2,
                             -1 if cache.q is None else cache.q,
                             len(cache.elements)))
        for el in cache.elements:
            fh.write(struct.pack("<8q2d", *el.coords, el.t1, el.t2))


def load_cache(path, A: AlgebraDesc) -> EnumerationCache:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != _CACHE_MAGIC:
            raise ValueError("not a hyperlat cache file")
        key = fh.read(32)
        R1, R2, qval, count = struct.unpack("<ddqQ", fh.read(32))
        q = None if qval < 0 else int(qval)
        if key.hex() != config_key(A, R1, R2, q):
            raise ValueError("cache key does not match the requested configuration")
        elements = []
        for _ in range(count):
            vals = struct.unpack("<8q2d", fh.read(8 * 8 + 16))
            coords = tuple(int(v) for v in vals[:8])
            x = quat_from_coords(coords)
            elements.append(
                LatticeElement(
                    quat=x,
                    coords=coords,
                    t1=vals[8],
                    t2=vals[9],
                    mat1=embed_matrix(x, 1, A),
                    mat2=embed_matrix(x, 2, A),
                )
            )
    return EnumerationCache(algebra=A, R1=R1, R2=R2, q=q,
                            elements=elements, nodes=0)
