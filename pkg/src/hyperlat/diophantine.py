"""Diophantine approximation experiment for the lattice action on the first
hyperbolic factor: search for solutions of

    dist(gamma . x, y) <= eps          (first factor)
    t2(gamma)          <= R            (second factor)

over an enumeration cache, estimate the empirical approximation exponent
zeta from the minimal R across a ladder of eps values, and evaluate the
theoretical pigeonhole exponent and the matching-volume radius schedule.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .hypgeom import HypPoint, basepoint, dist, h2_point
from .latenum import CoverageError, EnumerationCache, LatticeElement


class ShapeError(ValueError):
    """Invalid factor-split shape."""


@dataclass(frozen=True)
class SplitShape:
    """Product split: factors 1..k are approximated, factors k+1..l constrain
    the gauge.  d_first = sum of dimensions over the first block, a_rest =
    sum of (dimension - 1) = volume growth rate over the second block."""

    k: int
    ell: int
    rho_list: tuple[float, ...]

    def __post_init__(self) -> None:
        if not (1 <= self.k < self.ell):
            raise ShapeError(f"need 1 <= k < ell, got k={self.k}, ell={self.ell}")
        if len(self.rho_list) != self.ell:
            raise ShapeError("rho_list length must equal ell")
        for r in self.rho_list:
            if r not in (0.5, 1.0):
                raise ShapeError(f"rho must be 0.5 or 1.0, got {r}")

    @property
    def d_first(self) -> int:
        return int(sum(2 * r + 1 for r in self.rho_list[: self.k]))

    @property
    def a_rest(self) -> int:
        return int(sum(2 * r for r in self.rho_list[self.k:]))


def pigeonhole_exponent(S: SplitShape) -> float:
    """Optimal exponent d_first / a_rest for the split action."""
    if S.a_rest == 0:
        raise ShapeError("growth rate of the constraint block is zero")
    return S.d_first / S.a_rest


def schedule_r(R: float, S: SplitShape) -> float:
    """Matching-volume radius r(R) = exp(-(a_rest/d_first) R) in (0, 1)."""
    if R <= 0:
        raise ValueError(f"R must be positive, got {R}")
    return math.exp(-(S.a_rest / S.d_first) * R)


@dataclass(frozen=True)
class ApproxResult:
    epsilon: float
    R_found: float
    gamma: LatticeElement
    achieved_d1: float


def _first_factor_images(cache: EnumerationCache, x: HypPoint) -> np.ndarray:
    """Vectorized Moebius images of x under all first-factor matrices;
    returns (n, 2) array of (re, im)."""
    mats, _ = cache.matrix_stack()
    z = complex(x.x, x.y)
    num = mats[:, 0, 0] * z + mats[:, 0, 1]
    den = mats[:, 1, 0] * z + mats[:, 1, 1]
    w = num / den
    return np.stack([w.real, w.imag], axis=1)


def required_first_radius(x: HypPoint, y: HypPoint, eps: float) -> float:
    """Any solution gamma displaces the base point by at most
    dist(x, o) + dist(y, o) + eps; the cache must cover that radius."""
    o = basepoint(x.model)
    return dist(x, o) + dist(y, o) + eps


def approx_search(
    x: HypPoint,
    y: HypPoint,
    eps: float,
    Rmax: float,
    cache: EnumerationCache,
) -> ApproxResult | None:
    """Among cached elements with t2 <= Rmax and dist(gamma.x, y) <= eps,
    return one minimizing t2 (ties within 1e-12 broken by lexicographically
    smallest coordinates); None if the covered region holds no solution.

    Raises CoverageError when the cache cannot distinguish "no solution"
    from "not enumerated far enough".
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    need_r1 = required_first_radius(x, y, eps)
    if cache.R1 < need_r1 - 1e-12:
        raise CoverageError(
            f"cache covers first-factor radius {cache.R1}, need {need_r1:.6f}"
        )
    if cache.R2 < Rmax - 1e-12:
        raise CoverageError(
            f"cache covers second-factor radius {cache.R2}, need {Rmax}"
        )
    if not cache.elements:
        return None
    images = _first_factor_images(cache, x)
    _, t2 = cache.matrix_stack()
    dx = images[:, 0] - y.x
    dy = images[:, 1] - y.y
    arg = 1.0 + (dx * dx + dy * dy) / (2.0 * np.maximum(images[:, 1], 1e-300) * y.y)
    d1 = np.arccosh(np.maximum(arg, 1.0))
    hit = (d1 <= eps) & (t2 <= Rmax + 1e-12) & (images[:, 1] > 0)
    if not np.any(hit):
        return None
    idx = np.flatnonzero(hit)
    tmin = t2[idx].min()
    tied = idx[t2[idx] <= tmin + 1e-12]
    best = min(tied, key=lambda i: cache.elements[i].coords)
    el = cache.elements[best]
    return ApproxResult(epsilon=eps, R_found=float(t2[best]), gamma=el,
                        achieved_d1=float(d1[best]))


def verify_result(x: HypPoint, y: HypPoint, res: ApproxResult) -> bool:
    """Independent recheck of both inequalities from the stored matrices."""
    from .hypgeom import act, cartan_radius, RHO_REAL

    img = act(res.gamma.mat1, x)
    ok1 = dist(img, y) <= res.epsilon + 1e-12
    ok2 = abs(cartan_radius(res.gamma.mat2, RHO_REAL) - res.R_found) <= 1e-9
    return ok1 and ok2


@dataclass
class ExponentFit:
    zeta_hat: float
    residual: float
    points: list[tuple[float, float]]          # (eps, R_found)
    excluded: list[float] = field(default_factory=list)


def exponent_estimate(
    x: HypPoint,
    y: HypPoint,
    eps_list: list[float],
    cache: EnumerationCache,
    Rmax: float | None = None,
) -> ExponentFit:
    """Least-squares slope of R_found against log(1/eps).

    eps values with no solution inside the covered region are excluded with
    a warning; at least two solved points are required for a slope.
    """
    if len(eps_list) < 3:
        raise ValueError("need at least 3 eps values")
    if sorted(eps_list, reverse=True) != list(eps_list):
        raise ValueError("eps_list must be strictly decreasing")
    if Rmax is None:
        Rmax = cache.R2
    points: list[tuple[float, float]] = []
    excluded: list[float] = []
    for eps in eps_list:
        res = approx_search(x, y, eps, Rmax, cache)
        if res is None:
            excluded.append(eps)
            warnings.warn(
                f"no solution for eps={eps} within covered radius {Rmax}; "
                "point excluded from the fit",
                stacklevel=2,
            )
            continue
        points.append((eps, res.R_found))
    if len(points) < 2:
        return ExponentFit(zeta_hat=float("nan"), residual=float("nan"),
                           points=points, excluded=excluded)
    xs = np.array([math.log(1.0 / e) for e, _ in points])
    ys = np.array([r for _, r in points])
    if np.ptp(xs) == 0:
        return ExponentFit(zeta_hat=float("nan"), residual=float("nan"),
                           points=points, excluded=excluded)
    coef = np.polyfit(xs, ys, 1)
    resid = ys - np.polyval(coef, xs)
    return ExponentFit(
        zeta_hat=float(coef[0]),
        residual=float(np.sqrt(np.mean(resid**2))),
        points=points,
        excluded=excluded,
    )


def sample_pairs(
    window: tuple[float, float, float, float], n: int, seed: int
) -> list[tuple[HypPoint, HypPoint]]:
    """n seeded (x, y) pairs drawn uniformly (in coordinates) from the
    compact window [x_min, x_max] x [y_min, y_max] of the half-plane."""
    x_min, x_max, y_min, y_max = window
    if not (x_min < x_max and 0 < y_min < y_max):
        raise ValueError(f"invalid window {window}")
    rng = np.random.default_rng(seed)
    pairs = []
    for _ in range(n):
        xs = rng.uniform(x_min, x_max, size=2)
        ys = rng.uniform(y_min, y_max, size=2)
        pairs.append((h2_point(xs[0], ys[0]), h2_point(xs[1], ys[1])))
    return pairs


def window_coverage_radius(
    window: tuple[float, float, float, float], eps_max: float
) -> float:
    """First-factor radius sufficient for every pair in the window."""
    x_min, x_max, y_min, y_max = window
    o = basepoint("H2")
    corners = [h2_point(cx, cy) for cx in (x_min, x_max) for cy in (y_min, y_max)]
    worst = max(dist(c, o) for c in corners)
    return 2.0 * worst + eps_max


@dataclass
class WindowExperiment:
    """Seeded multi-pair approximation experiment over a compact window.

    ``fits`` holds one ExponentFit per pair over the full ladder.  The
    summary statistics use only the nontrivial regime eps < dist(x, y)
    (rungs solvable by the identity carry no approximation content):
    ``pooled_zeta`` is the within-pair demeaned least-squares slope and
    ``pair_zetas`` collects per-pair slopes for pairs with at least three
    nontrivial solved rungs."""

    pairs: list[tuple[HypPoint, HypPoint]]
    fits: list[ExponentFit]
    pair_zetas: list[float]
    pooled_zeta: float
    pigeonhole_violation_share: float
    n_nontrivial_points: int


def run_window_experiment(
    cache: EnumerationCache,
    window: tuple[float, float, float, float],
    eps_list: list[float],
    n_pairs: int,
    seed: int,
    kappa: float = 2.0,
) -> WindowExperiment:
    pairs = sample_pairs(window, n_pairs, seed)
    fits: list[ExponentFit] = []
    pair_zetas: list[float] = []
    num = den = 0.0
    violations = 0
    n_nontrivial = 0
    for x, y in pairs:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            fit = exponent_estimate(x, y, list(eps_list), cache)
        fits.append(fit)
        d_xy = dist(x, y)
        pts = [(e, r) for e, r in fit.points if e < d_xy]
        n_nontrivial += len(pts)
        for e, r in pts:
            if r < (kappa - 0.5) * math.log(1.0 / e):
                violations += 1
        if len(pts) >= 2:
            L = np.log(1.0 / np.array([e for e, _ in pts]))
            R = np.array([r for _, r in pts])
            num += float(np.sum((L - L.mean()) * (R - R.mean())))
            den += float(np.sum((L - L.mean()) ** 2))
        if len(pts) >= 3:
            L = np.log(1.0 / np.array([e for e, _ in pts]))
            R = np.array([r for _, r in pts])
            pair_zetas.append(float(np.polyfit(L, R, 1)[0]))
    pooled = num / den if den > 0 else float("nan")
    share = violations / n_nontrivial if n_nontrivial else 0.0
    return WindowExperiment(
        pairs=pairs,
        fits=fits,
        pair_zetas=pair_zetas,
        pooled_zeta=float(pooled),
        pigeonhole_violation_share=float(share),
        n_nontrivial_points=n_nontrivial,
    )
