"""Spherical functions, spherical transforms, and the two test-function
families used in the decay experiments.

Parameterization.  A spherical parameter z = sigma + i*tau labels the
spherical representation induced from the character a_t -> e^{2 rho z t}.
The unitary dual is sigma in (0, 1/2] with tau = 0 (complementary series,
z = 1/2 trivial) together with sigma = 0, tau >= 0 (tempered principal
series).  phi_{1/2} = 1 identically.

Transforms use the radial Haar convention of :mod:`hyperlat.hypgeom`
(density (sinh t)^{2 rho}, unit constant):

    fhat(z) = int_0^inf f(a_t) phi_{-z}(a_t) (sinh t)^{2 rho} dt.

The half-plane spherical function is evaluated through the classical
single-integral representation

    phi_z(a_t) = (sqrt2/pi) int_0^t cosh(z u) / sqrt(cosh t - cosh u) du,

desingularized by u = t - w^2 and the identity
cosh t - cosh u = 2 sinh((t-u)/2) sinh((t+u)/2); the half-space function
reduces to a one-dimensional radial integral whose closed form
sinh(2 z t)/(2 z sinh t) is kept as an independent oracle.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.integrate import quad

from .hypgeom import RhoParam
from .quadrature import adaptive_gl, gl_rule

_PHI_NODES = 384
_ETA_NODES = 256


class SpectralError(ValueError):
    """Invalid spectral parameter or profile."""


@dataclass(frozen=True)
class SphericalParam:
    """z = sigma + i*tau together with the rho parameter of the factor."""

    sigma: float
    tau: float
    rho: RhoParam

    @property
    def z(self) -> complex:
        return complex(self.sigma, self.tau)

    def is_unitary(self) -> bool:
        """Membership in the unitary spherical dual."""
        if self.tau == 0.0 and 0.0 < self.sigma <= 0.5:
            return True
        return self.sigma == 0.0 and self.tau >= 0.0


@dataclass(frozen=True)
class RadialProfile:
    """A compactly supported radial function t -> f(a_t)."""

    evaluator: Callable[[np.ndarray], np.ndarray]
    support: float
    tag: str


# ----------------------------------------------------------------------------
# the mollified plateau bump eta

_moll_norm_cache: dict[int, float] = {}


def _mollifier_mass() -> float:
    """int_{-1}^{1} exp(-1/(1-s^2)) ds, computed once."""
    if 0 not in _moll_norm_cache:
        def f(s):
            s = np.asarray(s)
            u = s * s
            with np.errstate(divide="ignore", over="ignore", under="ignore"):
                return np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
        _moll_norm_cache[0] = float(adaptive_gl(f, -1.0, 1.0, epsabs=1e-14, n0=128))
    return _moll_norm_cache[0]


def bump_eta(delta_prime: float, t) -> np.ndarray | float:
    """Smooth even plateau function: 1 on [-1+delta', 1-delta'], supported in
    [-1, 1], realized as the indicator of [-1+delta'/2, 1-delta'/2] mollified
    at scale delta'/2.  Values lie in [0, 1] and eta(1 - delta'/2) = 1/2.
    """
    if not 0.0 < delta_prime < 1.0:
        raise SpectralError(f"delta_prime must lie in (0,1), got {delta_prime}")
    t_arr = np.atleast_1d(np.asarray(t, dtype=np.float64))
    w = delta_prime / 2.0
    A = 1.0 - w
    lo = np.clip(t_arr - A, -w, w)
    hi = np.clip(t_arr + A, -w, w)
    width = np.maximum(hi - lo, 0.0)
    x, wt = gl_rule(_ETA_NODES)
    mid = 0.5 * (hi + lo)
    half = 0.5 * width
    nodes = mid[:, None] + half[:, None] * x[None, :]
    u = (nodes / w) ** 2
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        m = np.where(u < 1.0, np.exp(-1.0 / np.maximum(1.0 - u, 1e-300)), 0.0)
    vals = half * (m @ wt) / (w * _mollifier_mass())
    vals = np.clip(vals, 0.0, 1.0)
    return vals if np.ndim(t) else float(vals[0])


def make_f1_profile(rho: RhoParam, r: float, delta_prime: float) -> RadialProfile:
    """Small-ball family: f(a_t) = r^{-(2 rho + 1)/2} eta(t/r), support r."""
    if not 0.0 < r < 1.0:
        raise SpectralError(f"small-ball radius must lie in (0,1), got {r}")
    scale = r ** (-(2 * rho.value + 1) / 2.0)

    def ev(t, _r=r, _s=scale, _dp=delta_prime):
        t = np.asarray(t, dtype=np.float64)
        return _s * bump_eta(_dp, t / _r)

    return RadialProfile(evaluator=ev, support=r, tag=f"f1[r={r}]")


def make_omega_profile(rho: RhoParam, r: float, delta_prime: float) -> RadialProfile:
    """Local rescaled bump: omega_r(a_t) = r^{-(2 rho + 1)} eta(t/r)."""
    if not 0.0 < r <= 1.0:
        raise SpectralError(f"scale must lie in (0,1], got {r}")
    scale = r ** (-(2 * rho.value + 1))

    def ev(t, _r=r, _s=scale, _dp=delta_prime):
        t = np.asarray(t, dtype=np.float64)
        return _s * bump_eta(_dp, t / _r)

    return RadialProfile(evaluator=ev, support=r, tag=f"omega[r={r}]")


# ----------------------------------------------------------------------------
# Iwasawa coordinates on SL2(R)

def iwasawa_a(M: np.ndarray) -> float:
    """Radial Iwasawa coordinate t of M = k a_t n: e^t = a^2 + c^2 for the
    first column (a, c)."""
    M = np.asarray(M, dtype=np.float64)
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det - 1.0) > 1e-9:
        raise SpectralError(f"matrix must be unimodular, det = {det}")
    s = M[0, 0] ** 2 + M[1, 0] ** 2
    if s <= 0.0:
        raise SpectralError("zero first column is impossible for det-1 matrices")
    return math.log(s)


def iwasawa_decompose(M: np.ndarray) -> tuple[np.ndarray, float, np.ndarray]:
    """M = k a_t n with k in SO(2), a_t = diag(e^{t/2}, e^{-t/2}), n unipotent
    upper triangular."""
    t = iwasawa_a(M)
    e = math.exp(t / 2.0)
    c, s = M[0, 0] / e, M[1, 0] / e
    k = np.array([[c, -s], [s, c]])
    a = np.array([[e, 0.0], [0.0, 1.0 / e]])
    n = np.linalg.inv(a) @ k.T @ M
    n[1, 0] = 0.0
    n[0, 0] = 1.0
    n[1, 1] = 1.0
    return k, t, n


# ----------------------------------------------------------------------------
# spherical functions

def _phi_half_nodes(t: float, n: int = _PHI_NODES) -> tuple[np.ndarray, np.ndarray]:
    """Nodes u_k in (0, t) and weights for the desingularized representation;
    phi_z(t) = sum_k w_k cosh(z u_k)."""
    x, w = gl_rule(n)
    st = math.sqrt(t)
    ww = 0.5 * st * (x + 1.0)          # w in (0, sqrt t)
    s = ww * ww
    u = t - s
    # cosh t - cosh u = 2 sinh(s/2) sinh(t - s/2), cancellation-free
    dens = 2.0 * np.sinh(s / 2.0) * np.sinh(t - s / 2.0)
    h = 2.0 * ww / np.sqrt(dens)
    weights = (math.sqrt(2.0) / math.pi) * (0.5 * st) * w * h
    return u, weights


def _phi_half(zc: complex, t: float) -> complex:
    if t == 0.0:
        return 1.0 + 0.0j
    u, wt = _phi_half_nodes(t)
    return complex(np.dot(wt, np.cosh(zc * u)))


def _phi_half_vec(zc: complex, ts: np.ndarray) -> np.ndarray:
    """phi_z(a_t) on an array of radii; the fractional node positions are
    shared across rows, so the whole grid is one matrix evaluation."""
    x, w = gl_rule(_PHI_NODES)
    qfrac = ((x + 1.0) / 2.0) ** 2          # s/t at each node
    ts = np.asarray(ts, dtype=np.float64)
    out = np.ones(len(ts), dtype=np.complex128)
    pos = ts > 0.0
    if np.any(pos):
        t = ts[pos][:, None]
        s = t * qfrac[None, :]
        u = t - s
        dens = 2.0 * np.sinh(s / 2.0) * np.sinh(t - s / 2.0)
        h = 2.0 * np.sqrt(t * qfrac[None, :]) / np.sqrt(dens)
        wts = (math.sqrt(2.0) / math.pi) * (0.5 * np.sqrt(t)) * w[None, :] * h
        out[pos] = np.sum(wts * np.cosh(zc * u), axis=1)
    return out


def _phi_one(zc: complex, t: float) -> complex:
    """Half-space spherical function through the radial coordinate
    g = log of the Iwasawa height along the sphere: the polar-angle integral
    with density sin(theta) becomes (1/(2 sinh t)) int_{-t}^{t} e^{2 z g} dg."""
    if t == 0.0:
        return 1.0 + 0.0j
    x, w = gl_rule(_PHI_NODES)
    g = t * x
    vals = np.exp(2.0 * zc * g)
    return complex(t * np.dot(w, vals) / (2.0 * math.sinh(t)))


def _phi_one_vec(zc: complex, ts: np.ndarray) -> np.ndarray:
    x, w = gl_rule(_PHI_NODES)
    ts = np.asarray(ts, dtype=np.float64)
    out = np.ones(len(ts), dtype=np.complex128)
    pos = ts > 0.0
    if np.any(pos):
        t = ts[pos][:, None]
        vals = np.exp(2.0 * zc * t * x[None, :])
        out[pos] = (ts[pos] * (vals @ w)) / (2.0 * np.sinh(ts[pos]))
    return out


def _phi_vec(rho: RhoParam, zc: complex, ts: np.ndarray) -> np.ndarray:
    return _phi_half_vec(zc, ts) if rho.value == 0.5 else _phi_one_vec(zc, ts)


def phi_rho1_closed(zc: complex, t: float) -> complex:
    """Closed-form candidate sinh(2 z t) / (2 z sinh t); oracle for _phi_one."""
    if t == 0.0:
        return 1.0 + 0.0j
    if abs(zc) < 1e-12:
        return complex(t / math.sinh(t))
    return complex(np.sinh(2.0 * zc * t) / (2.0 * zc * math.sinh(t)))


def _phi(rho: RhoParam, zc: complex, t: float) -> complex:
    if t < 0:
        raise SpectralError(f"radial coordinate must be >= 0, got {t}")
    return _phi_half(zc, t) if rho.value == 0.5 else _phi_one(zc, t)


def spherical_phi(z: SphericalParam, t: float) -> complex:
    """Elementary spherical function phi_z(a_t); phi_z(0) = 1."""
    return _phi(z.rho, z.z, t)


def phi_laplace_oracle(z: SphericalParam, t: float) -> complex:
    """Independent evaluation through the compact-group integral
    (adaptive quadrature over the circle or the polar angle)."""
    zc = z.z
    if t == 0.0:
        return 1.0 + 0.0j
    if z.rho.value == 0.5:
        def f(th):
            base = math.cosh(t) + math.sinh(t) * math.cos(2 * th)
            return np.exp((zc - 0.5) * math.log(base)) / math.pi

        vr = quad(lambda th: f(th).real, 0.0, math.pi,
                  epsabs=1e-12, epsrel=1e-12, limit=800)[0]
        vi = quad(lambda th: f(th).imag, 0.0, math.pi,
                  epsabs=1e-12, epsrel=1e-12, limit=800)[0]
        return complex(vr, vi)

    def g(th):
        base = math.exp(t) * math.cos(th / 2) ** 2 + math.exp(-t) * math.sin(th / 2) ** 2
        return np.exp((2 * zc - 1) * math.log(base)) * math.sin(th) / 2.0

    vr = quad(lambda th: g(th).real, 0.0, math.pi,
              epsabs=1e-12, epsrel=1e-12, limit=800)[0]
    vi = quad(lambda th: g(th).imag, 0.0, math.pi,
              epsabs=1e-12, epsrel=1e-12, limit=800)[0]
    return complex(vr, vi)


# ----------------------------------------------------------------------------
# transforms

def transform_cartan(f: RadialProfile, z: SphericalParam) -> complex:
    """Spherical transform in radial Cartan coordinates:
    int_0^supp f(a_t) phi_{-z}(a_t) (sinh t)^{2 rho} dt."""
    rho = z.rho
    zc = -z.z
    two_rho = 2.0 * rho.value

    def integrand(ts: np.ndarray) -> np.ndarray:
        fv = np.asarray(f.evaluator(ts), dtype=np.float64)
        phis = _phi_vec(rho, zc, ts)
        return fv * phis * np.sinh(ts) ** two_rho

    return complex(adaptive_gl(integrand, 0.0, f.support, epsabs=1e-12, n0=128))


def profile_mass(f: RadialProfile, rho: RhoParam) -> float:
    """Total Haar mass int f(a_t) (sinh t)^{2 rho} dt."""
    two_rho = 2.0 * rho.value

    def integrand(ts):
        return np.asarray(f.evaluator(ts), dtype=np.float64) * np.sinh(ts) ** two_rho

    return float(adaptive_gl(integrand, 0.0, f.support, epsabs=1e-14, n0=128))


# Flat-limit ratio between the Lebesgue horospherical measure dY dH and the
# unit-constant radial Cartan measure; fixed by Haar uniqueness.
_IWASAWA_TO_CARTAN = 2.0 * math.pi


def transform_iwasawa(w: Callable, r: float, z: SphericalParam,
                      epsabs: float = 1e-11) -> complex:
    """Horospherical-side transform of omega_r(g) = r^{-2} w(radius(g)/r) on
    the half-plane group: the double integral

       (1/2 pi) int_{n x a} omega_r(e^Y e^H) e^{-(z + 1/2) H} dY dH

    over the support box; the 1/(2 pi) factor matches the Cartan Haar
    convention.  Only rho = 1/2 is supported."""
    if z.rho.value != 0.5:
        raise SpectralError("the horospherical transform is implemented for rho = 1/2")
    if not 0.0 < r <= 1.0:
        raise SpectralError(f"scale must lie in (0,1], got {r}")
    zc = z.z
    ch = math.cosh(r)

    # dense spline of the radial profile; interpolation error ~1e-11 is far
    # below the quadrature tolerance and removes the nested-bump cost
    from scipy.interpolate import CubicSpline
    grid = np.linspace(0.0, 1.0 + 1e-9, 8193)
    w_spline = CubicSpline(grid, np.asarray(w(grid), dtype=np.float64))

    def w_fast(s: np.ndarray) -> np.ndarray:
        s = np.asarray(s)
        out = np.zeros_like(s, dtype=np.float64)
        inside = s <= 1.0
        if np.any(inside):
            out[inside] = w_spline(s[inside])
        return out

    def inner(h: float) -> float:
        eh = math.exp(h)
        emh = math.exp(-h)
        ymax_sq = (2.0 * ch - eh - emh) * eh
        if ymax_sq <= 0.0:
            return 0.0
        ymax = math.sqrt(ymax_sq)

        def fy(ys: np.ndarray) -> np.ndarray:
            frob = eh + emh + ys * ys * emh
            rad = np.arccosh(np.maximum(frob / 2.0, 1.0))
            return w_fast(rad / r)

        val = adaptive_gl(fy, 0.0, ymax, epsabs=epsabs, n0=64)
        return 2.0 * val  # even in y

    def fh(hs: np.ndarray) -> np.ndarray:
        out = np.empty(len(hs), dtype=np.complex128)
        for i, h in enumerate(hs):
            out[i] = inner(float(h)) * np.exp(-(zc + 0.5) * h)
        return out

    total = adaptive_gl(fh, -r, r, epsabs=epsabs, n0=64)
    return complex(total / (r * r) / _IWASAWA_TO_CARTAN)


def f2_transform(R: float, z: SphericalParam, delta_prime: float) -> complex:
    """Transform of the large-ball family: eta_R-hat evaluated at 2 rho z,
    i.e. int eta(t) e^{2 rho z R t} dt."""
    if R < 1.0:
        raise SpectralError(f"large-ball parameter must satisfy R >= 1, got {R}")
    zc = z.z
    two_rho = 2.0 * z.rho.value

    def integrand(ts: np.ndarray) -> np.ndarray:
        return bump_eta(delta_prime, ts) * np.exp(two_rho * zc * R * ts)

    return complex(adaptive_gl(integrand, -1.0, 1.0, epsabs=1e-12, n0=256))


def f2_integral(R: float, rho: RhoParam, delta_prime: float) -> float:
    """Total mass of the large-ball family: eta_R-hat at rho, i.e.
    int eta(t) e^{rho R t} dt."""
    if R < 1.0:
        raise SpectralError(f"large-ball parameter must satisfy R >= 1, got {R}")

    def integrand(ts: np.ndarray) -> np.ndarray:
        return bump_eta(delta_prime, ts) * np.exp(rho.value * R * ts)

    return float(adaptive_gl(integrand, -1.0, 1.0, epsabs=1e-12, n0=256))


# ----------------------------------------------------------------------------
# decay bookkeeping

def tau_grid(scale: float, n: int = 64) -> np.ndarray:
    """Frequency grid: 0 plus n-1 logarithmically spaced points up to
    64/scale."""
    if n < 2:
        raise SpectralError("grid needs at least 2 points")
    return np.concatenate([[0.0], np.geomspace(0.5 / scale, 64.0 / scale, n - 1)])


def decay_constant(taus, values, scale: float, N: int, normalizer: float) -> float:
    """Empirical constant sup_tau |fhat(tau)| (1 + scale |tau|)^N / normalizer."""
    taus = np.asarray(taus, dtype=np.float64)
    values = np.asarray(values, dtype=np.float64)
    if taus.size == 0:
        raise SpectralError("empty grid")
    return float(np.max(values * (1.0 + scale * np.abs(taus)) ** N) / normalizer)


def p_plus(z: SphericalParam) -> float:
    """Integrability exponent 2/(1 - 2 sigma); infinity at the trivial point."""
    if not z.is_unitary():
        raise SpectralError(f"{z} is not in the unitary spherical dual")
    if z.sigma >= 0.5:
        return math.inf
    return 2.0 / (1.0 - 2.0 * z.sigma)


# ----------------------------------------------------------------------------
# verification helpers

def radial_self_convolution(f: RadialProfile, rho: RhoParam,
                            n_s: int = 256, n_theta: int = 128) -> Callable:
    """(f * f^*)(a_t) for a real radial f on the half-plane group, via

        int_K int_0^inf f(s) f(radius(a_{-t} k a_s)) (sinh s)^{2 rho} ds dk,

    radius(a_{-t} k_theta a_s) = arccosh(cos^2 th cosh(s-t) + sin^2 th cosh(s+t)).
    Supports rho = 1/2; used to verify the transform homomorphism property."""
    if rho.value != 0.5:
        raise SpectralError("self-convolution helper supports rho = 1/2 only")
    xs, ws = gl_rule(n_s)
    s_nodes = 0.5 * f.support * (xs + 1.0)
    s_weights = 0.5 * f.support * ws
    f_s = np.asarray(f.evaluator(s_nodes), dtype=np.float64)
    theta = (np.arange(n_theta) + 0.5) * math.pi / n_theta
    cos2 = np.cos(theta) ** 2
    sin2 = np.sin(theta) ** 2

    def conv(t: float) -> float:
        arg = np.maximum(
            cos2[None, :] * np.cosh(s_nodes - t)[:, None]
            + sin2[None, :] * np.cosh(s_nodes + t)[:, None],
            1.0,
        )
        rad = np.arccosh(arg)
        fv = np.asarray(f.evaluator(rad), dtype=np.float64)
        inner = fv.mean(axis=1)  # normalized K integral
        return float(np.dot(s_weights, f_s * inner * np.sinh(s_nodes)))

    return conv


def decay_table(profile_maker, rho: RhoParam, scales, N_list, delta_prime: float,
                sigma: float = 0.0, n_grid: int = 64, normalizer=None) -> dict:
    """Empirical decay constants across a family of scales.

    Returns {"rows": [(scale, tau, |fhat|), ...], "constants": {(scale, N): C}}.
    """
    rows = []
    constants = {}
    for scale in scales:
        prof = profile_maker(rho, scale, delta_prime)
        taus = tau_grid(scale, n_grid)
        vals = np.array(
            [abs(transform_cartan(prof, SphericalParam(sigma, float(tt), rho)))
             for tt in taus]
        )
        norm = normalizer(scale) if normalizer else 1.0
        for tt, vv in zip(taus, vals):
            rows.append((float(scale), float(tt), float(vv)))
        for N in N_list:
            constants[(float(scale), int(N))] = decay_constant(
                taus, vals, scale, N, norm)
    return {"rows": rows, "constants": constants}


def f2_decay_table(rho: RhoParam, R_list, N_list, delta_prime: float,
                   n_grid: int = 64) -> dict:
    rows = []
    constants = {}
    for R in R_list:
        taus = tau_grid(R, n_grid)
        vals = np.array(
            [abs(f2_transform(R, SphericalParam(0.0, float(tt), rho), delta_prime))
             for tt in taus]
        )
        for tt, vv in zip(taus, vals):
            rows.append((float(R), float(tt), float(vv)))
        for N in N_list:
            constants[(float(R), int(N))] = decay_constant(taus, vals, R, N, 1.0)
    return {"rows": rows, "constants": constants}
