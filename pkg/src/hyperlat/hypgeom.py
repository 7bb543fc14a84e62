"""Hyperbolic geometry of H^2 (upper half-plane) and H^3 (upper half-space):
Moebius isometries, distances, the radial Cartan coordinate of a unimodular
matrix, and ball volumes.

Conventions.  The base point is i (resp. j = (0, 1)), fixed by the maximal
compact subgroup.  The radial Haar density is (sinh t)^{2 rho} with overall
constant fixed to 1, and this normalization is used consistently by every
volume and transform in the package.  With it,

    ball_volume(1/2, R) = cosh R - 1,
    ball_volume(1,   R) = (sinh R cosh R - R) / 2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad


class HypgeomError(ValueError):
    """Invalid hyperbolic-geometry input."""


@dataclass(frozen=True)
class RhoParam:
    """Half-sum-of-roots parameter: 0.5 for SL2(R)/H^2, 1.0 for SL2(C)/H^3."""

    value: float

    def __post_init__(self) -> None:
        if self.value not in (0.5, 1.0):
            raise HypgeomError(f"rho must be 0.5 or 1.0, got {self.value}")

    @property
    def dim(self) -> int:
        """d = 2*rho + 1, the real dimension of the hyperbolic space."""
        return int(2 * self.value + 1)


RHO_REAL = RhoParam(0.5)
RHO_COMPLEX = RhoParam(1.0)


@dataclass(frozen=True)
class HypPoint:
    """A point of H^2 or H^3.

    H2: (x, y) in the upper half-plane, height y > 0 (t unused, kept 0).
    H3: horizontal coordinate x + iy, height t > 0.
    """

    model: str
    x: float
    y: float
    t: float = 0.0

    def __post_init__(self) -> None:
        if self.model not in ("H2", "H3"):
            raise HypgeomError(f"model must be 'H2' or 'H3', got {self.model!r}")
        if self.height <= 0:
            raise HypgeomError(f"point height must be positive, got {self.height}")

    @property
    def height(self) -> float:
        return self.y if self.model == "H2" else self.t

    @property
    def horizontal(self) -> complex:
        """x for H2 (as a complex with zero imag part unused), x+iy for H3."""
        return complex(self.x, 0.0) if self.model == "H2" else complex(self.x, self.y)


def h2_point(x: float, y: float) -> HypPoint:
    return HypPoint("H2", float(x), float(y))


def h3_point(z: complex, t: float) -> HypPoint:
    z = complex(z)
    return HypPoint("H3", z.real, z.imag, float(t))


def basepoint(model: str) -> HypPoint:
    """i for H2, j = (0, 1) for H3; fixed by the maximal compact subgroup."""
    return h2_point(0.0, 1.0) if model == "H2" else h3_point(0j, 1.0)


def _check_unimodular(M: np.ndarray, tol: float = 1e-9) -> None:
    det = M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0]
    if abs(det - 1.0) > tol:
        raise HypgeomError(f"matrix must have det 1 within {tol}, got det = {det}")


def act(M: np.ndarray, p: HypPoint) -> HypPoint:
    """Moebius action: real matrices on H^2, complex matrices on H^3
    (quaternionic upper-half-space formula)."""
    M = np.asarray(M)
    _check_unimodular(M)
    if p.model == "H2":
        if np.iscomplexobj(M) and np.abs(M.imag).max() > 1e-12:
            raise HypgeomError("H2 action requires a real matrix")
        a, b, c, d = (float(np.real(M[0, 0])), float(np.real(M[0, 1])),
                      float(np.real(M[1, 0])), float(np.real(M[1, 1])))
        z = complex(p.x, p.y)
        w = (a * z + b) / (c * z + d)
        if w.imag <= 0:
            raise HypgeomError("image height is non-positive (numerical degeneracy)")
        return h2_point(w.real, w.imag)
    a, b, c, d = complex(M[0, 0]), complex(M[0, 1]), complex(M[1, 0]), complex(M[1, 1])
    z = complex(p.x, p.y)
    t = p.t
    czd = c * z + d
    denom = abs(czd) ** 2 + (abs(c) * t) ** 2
    if denom <= 0:
        raise HypgeomError("degenerate denominator in H3 action")
    z_new = ((a * z + b) * czd.conjugate() + a * c.conjugate() * t * t) / denom
    t_new = t / denom
    if t_new <= 0:
        raise HypgeomError("image height is non-positive (numerical degeneracy)")
    return h3_point(z_new, t_new)


def dist(p: HypPoint, q: HypPoint) -> float:
    """Constant-curvature -1 distance.

    H2: arccosh(1 + |p-q|^2 / (2 Im p Im q)),
    H3: arccosh(1 + (|z1-z2|^2 + (t1-t2)^2) / (2 t1 t2)).
    """
    if p.model != q.model:
        raise HypgeomError("points lie in different models")
    if p.model == "H2":
        num = (p.x - q.x) ** 2 + (p.y - q.y) ** 2
        arg = 1.0 + num / (2.0 * p.y * q.y)
    else:
        num = abs(p.horizontal - q.horizontal) ** 2 + (p.t - q.t) ** 2
        arg = 1.0 + num / (2.0 * p.t * q.t)
    return math.acosh(max(arg, 1.0))


def cartan_radius(M: np.ndarray, rho: RhoParam) -> float:
    """Radial Cartan coordinate t of a unimodular matrix: the displacement
    of the base point, arccosh(||M||_F^2 / 2)."""
    M = np.asarray(M)
    _check_unimodular(M)
    frob2 = float(np.sum(np.abs(M) ** 2))
    if frob2 < 2.0 - 1e-6:
        raise HypgeomError(
            f"squared Frobenius norm {frob2} below 2 is impossible for det-1 matrices"
        )
    return math.acosh(max(frob2 / 2.0, 1.0))


def ball_volume(rho: RhoParam, R: float) -> float:
    """Radial volume int_0^R (sinh t)^{2 rho} dt with unit constant."""
    if R < 0:
        raise HypgeomError(f"radius must be >= 0, got {R}")
    if rho.value == 0.5:
        return math.cosh(R) - 1.0
    return (math.sinh(R) * math.cosh(R) - R) / 2.0


def ball_volume_quadrature(rho: RhoParam, R: float) -> float:
    """Same integral by adaptive quadrature; cross-check for the closed forms."""
    if R < 0:
        raise HypgeomError(f"radius must be >= 0, got {R}")
    if R == 0:
        return 0.0
    val, _ = quad(lambda t: math.sinh(t) ** (2 * rho.value), 0.0, R,
                  epsabs=1e-12, epsrel=1e-12, limit=200)
    return val


def geodesic_matrix(t: float) -> np.ndarray:
    """a_t = diag(e^{t/2}, e^{-t/2}), the unit-speed geodesic through the
    base point."""
    return np.array([[math.exp(t / 2.0), 0.0], [0.0, math.exp(-t / 2.0)]])
