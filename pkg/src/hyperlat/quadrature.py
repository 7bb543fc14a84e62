"""Deterministic quadrature used across the spectral machinery.

``adaptive_gl`` refines a Gauss-Legendre rule by doubling the node count
until two successive estimates agree within the requested absolute
tolerance, with a hard cap on total evaluations.  Node sequences are fixed,
so every integral is reproducible bit-for-bit.  Integrands are evaluated on
whole node arrays and may return complex values.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np


class QuadratureError(RuntimeError):
    """Refinement failed to converge below the evaluation cap."""


@lru_cache(maxsize=64)
def gl_rule(n: int) -> tuple[np.ndarray, np.ndarray]:
    """Gauss-Legendre nodes and weights on [-1, 1]."""
    x, w = np.polynomial.legendre.leggauss(n)
    return x, w


def gl_integrate(fvec, a: float, b: float, n: int):
    """Fixed-order Gauss-Legendre integral of a vectorized integrand."""
    if b <= a:
        return 0.0
    x, w = gl_rule(n)
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    vals = fvec(mid + half * x)
    return half * np.dot(w, vals)


def adaptive_gl(
    fvec,
    a: float,
    b: float,
    epsabs: float = 1e-10,
    epsrel: float = 1e-12,
    n0: int = 64,
    max_evals: int = 1_000_000,
):
    """Doubling Gauss-Legendre refinement to absolute tolerance ``epsabs``.

    Raises QuadratureError if the estimates have not stabilized before the
    evaluation cap is reached.
    """
    if b <= a:
        return 0.0
    n = n0
    prev = gl_integrate(fvec, a, b, n)
    used = n
    while True:
        n *= 2
        used += n
        if used > max_evals:
            raise QuadratureError(
                f"quadrature did not converge within {max_evals} evaluations"
            )
        cur = gl_integrate(fvec, a, b, n)
        if abs(cur - prev) <= max(epsabs, epsrel * abs(cur)):
            return cur
        prev = cur
