"""Quaternion algebra (u, v / K) over a real quadratic field, and the order

    O = Z[omega] + i Z[omega] + j Z[omega] + ij Z[omega]

with i^2 = u, j^2 = v, ij = -ji.  Provides exact ring arithmetic, the reduced
norm and trace, principal congruence tests, and the two real 2x2 matrix
embeddings

    i -> diag(sqrt(u), -sqrt(u)),   j -> [[0, 1], [v, 0]].
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numberfield import (
    FieldDesc,
    QuadInt,
    QI_ONE,
    QI_ZERO,
    qi_add,
    qi_embed,
    qi_mul,
    qi_neg,
    qi_scale,
    qi_sub,
)


class AlgebraError(ValueError):
    """Invalid quaternion algebra configuration."""


@dataclass(frozen=True)
class AlgebraDesc:
    """Structure constants of the algebra plus its split archimedean places.

    ``places_split`` lists one rho parameter per split place: 0.5 for a real
    place (SL2(R) factor) and 1.0 for a complex place (SL2(C) factor).  The
    shipped preset (u, v) = (3, 5) over Q(sqrt(17)) has two real places; it is
    non-split (a division algebra), which is recorded here as configuration
    metadata rather than verified algorithmically.
    """

    field: FieldDesc
    u: int
    v: int
    places_split: tuple[float, ...]

    def __post_init__(self) -> None:
        if self.u == 0 or self.v == 0:
            raise AlgebraError("u and v must be nonzero")
        if not self.places_split:
            raise AlgebraError("at least one split place is required")
        for rho in self.places_split:
            if rho not in (0.5, 1.0):
                raise AlgebraError(f"place rho parameter must be 0.5 or 1.0, got {rho}")
        # The real matrix model below needs sqrt(u); real places require u > 0.
        if any(rho == 0.5 for rho in self.places_split) and self.u <= 0:
            raise AlgebraError("real split places require u > 0 in the matrix model")

    @property
    def n_places(self) -> int:
        return len(self.places_split)


def make_q17_algebra() -> AlgebraDesc:
    """The shipped preset: (3, 5 / Q(sqrt(17))), two real split places."""
    return AlgebraDesc(field=FieldDesc.make(17), u=3, v=5, places_split=(0.5, 0.5))


@dataclass(frozen=True)
class QuatElt:
    """x0 + x1*i + x2*j + x3*ij with Z[omega] coordinates."""

    x0: QuadInt
    x1: QuadInt
    x2: QuadInt
    x3: QuadInt

    def coords(self) -> tuple[int, ...]:
        """The eight integer coordinates in basis order
        (1, omega, i, i*omega, j, j*omega, ij, ij*omega)."""
        return (
            self.x0.a, self.x0.b,
            self.x1.a, self.x1.b,
            self.x2.a, self.x2.b,
            self.x3.a, self.x3.b,
        )

    def __repr__(self) -> str:
        return f"QuatElt{self.coords()}"


QUAT_ONE = QuatElt(QI_ONE, QI_ZERO, QI_ZERO, QI_ZERO)
QUAT_I = QuatElt(QI_ZERO, QI_ONE, QI_ZERO, QI_ZERO)
QUAT_J = QuatElt(QI_ZERO, QI_ZERO, QI_ONE, QI_ZERO)
QUAT_IJ = QuatElt(QI_ZERO, QI_ZERO, QI_ZERO, QI_ONE)


def quat_from_coords(c: tuple[int, ...] | list[int]) -> QuatElt:
    if len(c) != 8:
        raise ValueError(f"need 8 coordinates, got {len(c)}")
    return QuatElt(
        QuadInt(c[0], c[1]), QuadInt(c[2], c[3]),
        QuadInt(c[4], c[5]), QuadInt(c[6], c[7]),
    )


def basis_elements(A: AlgebraDesc) -> tuple[QuatElt, ...]:
    """The eight module basis elements in coordinate order."""
    elts = []
    for k in range(8):
        c = [0] * 8
        c[k] = 1
        elts.append(quat_from_coords(c))
    return tuple(elts)


def quat_add(x: QuatElt, y: QuatElt) -> QuatElt:
    return QuatElt(qi_add(x.x0, y.x0), qi_add(x.x1, y.x1),
                   qi_add(x.x2, y.x2), qi_add(x.x3, y.x3))


def quat_sub(x: QuatElt, y: QuatElt) -> QuatElt:
    return QuatElt(qi_sub(x.x0, y.x0), qi_sub(x.x1, y.x1),
                   qi_sub(x.x2, y.x2), qi_sub(x.x3, y.x3))


def quat_neg(x: QuatElt) -> QuatElt:
    return QuatElt(qi_neg(x.x0), qi_neg(x.x1), qi_neg(x.x2), qi_neg(x.x3))


def quat_mul(x: QuatElt, y: QuatElt, A: AlgebraDesc) -> QuatElt:
    """Exact product under i^2 = u, j^2 = v, ij = -ji.

    z0 = x0 y0 + u x1 y1 + v x2 y2 - uv x3 y3
    z1 = x0 y1 + x1 y0 - v x2 y3 + v x3 y2
    z2 = x0 y2 + x2 y0 + u x1 y3 - u x3 y1
    z3 = x0 y3 + x3 y0 + x1 y2 - x2 y1
    """
    F = A.field
    u, v = A.u, A.v

    def m(p: QuadInt, q: QuadInt) -> QuadInt:
        return qi_mul(p, q, F)

    z0 = qi_add(
        qi_sub(qi_add(m(x.x0, y.x0), qi_scale(u, m(x.x1, y.x1))),
               qi_scale(u * v, m(x.x3, y.x3))),
        qi_scale(v, m(x.x2, y.x2)),
    )
    z1 = qi_add(
        qi_add(m(x.x0, y.x1), m(x.x1, y.x0)),
        qi_scale(v, qi_sub(m(x.x3, y.x2), m(x.x2, y.x3))),
    )
    z2 = qi_add(
        qi_add(m(x.x0, y.x2), m(x.x2, y.x0)),
        qi_scale(u, qi_sub(m(x.x1, y.x3), m(x.x3, y.x1))),
    )
    z3 = qi_add(
        qi_add(m(x.x0, y.x3), m(x.x3, y.x0)),
        qi_sub(m(x.x1, y.x2), m(x.x2, y.x1)),
    )
    return QuatElt(z0, z1, z2, z3)


def quat_conj(x: QuatElt) -> QuatElt:
    """Standard involution x -> tr(x) - x."""
    return QuatElt(x.x0, qi_neg(x.x1), qi_neg(x.x2), qi_neg(x.x3))


def quat_norm(x: QuatElt, A: AlgebraDesc) -> QuadInt:
    """Reduced norm x0^2 - u x1^2 - v x2^2 + uv x3^2, exact in Z[omega]."""
    F = A.field
    u, v = A.u, A.v
    t = qi_sub(qi_mul(x.x0, x.x0, F), qi_scale(u, qi_mul(x.x1, x.x1, F)))
    t = qi_sub(t, qi_scale(v, qi_mul(x.x2, x.x2, F)))
    return qi_add(t, qi_scale(u * v, qi_mul(x.x3, x.x3, F)))


def quat_trace(x: QuatElt) -> QuadInt:
    """Reduced trace 2*x0."""
    return qi_scale(2, x.x0)


def is_unit(x: QuatElt, A: AlgebraDesc) -> bool:
    return quat_norm(x, A) == QI_ONE


def congruence_test(x: QuatElt, q: int) -> bool:
    """True iff x = 1 modulo the principal ideal (q): all eight integer
    coordinates of x - 1 are divisible by q."""
    if q < 1:
        raise ValueError(f"congruence level must be >= 1, got {q}")
    delta = quat_sub(x, QUAT_ONE)
    return all(c % q == 0 for c in delta.coords())


def place_embedding_map(A: AlgebraDesc, place: int) -> np.ndarray:
    """4x8 matrix sending the integer coordinate vector of x to the entries
    (m11, m12, m21, m22) of its 2x2 image at the given real place."""
    if not 1 <= place <= A.n_places:
        raise AlgebraError(f"place {place} is not a split place of this algebra")
    if A.places_split[place - 1] != 0.5:
        raise AlgebraError("matrix embeddings are implemented for real places only")
    om = qi_embed(QuadInt(0, 1), place, A.field)
    su = math.sqrt(A.u)
    v = float(A.v)
    # columns: 1, omega, i, i*omega, j, j*omega, ij, ij*omega
    cols = [
        (1.0, 0.0, 0.0, 1.0),
        (om, 0.0, 0.0, om),
        (su, 0.0, 0.0, -su),
        (om * su, 0.0, 0.0, -om * su),
        (0.0, 1.0, v, 0.0),
        (0.0, om, v * om, 0.0),
        (0.0, su, -v * su, 0.0),
        (0.0, om * su, -v * om * su, 0.0),
    ]
    return np.array(cols, dtype=np.float64).T


def embed_matrix(x: QuatElt, place: int, A: AlgebraDesc) -> np.ndarray:
    """2x2 real image of x at a split place; det equals the embedded norm."""
    a0 = qi_embed(x.x0, place, A.field)
    a1 = qi_embed(x.x1, place, A.field)
    a2 = qi_embed(x.x2, place, A.field)
    a3 = qi_embed(x.x3, place, A.field)
    if not 1 <= place <= A.n_places:
        raise AlgebraError(f"place {place} is not a split place of this algebra")
    if A.places_split[place - 1] != 0.5:
        raise AlgebraError("matrix embeddings are implemented for real places only")
    su = math.sqrt(A.u)
    v = float(A.v)
    return np.array(
        [
            [a0 + a1 * su, a2 + a3 * su],
            [v * (a2 - a3 * su), a0 - a1 * su],
        ],
        dtype=np.float64,
    )
