"""Exact arithmetic in the ring of integers Z[omega] of a real quadratic field.

Only discriminants D = 1 (mod 4) are supported, so that the ring of integers
is Z[omega] with omega = (1 + sqrt(D))/2 and the single relation

    omega^2 = omega + (D - 1)/4.

Elements are integer pairs (a, b) representing a + b*omega.  The two real
embeddings send omega to (1 + sqrt(D))/2 and (1 - sqrt(D))/2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

# Coordinates are declared 128-bit; Python ints never wrap, so the bound is
# enforced explicitly and any excursion raises instead of corrupting norms.
_INT128_BOUND = 1 << 127


class NumberFieldError(ValueError):
    """Invalid field configuration."""


class CoordinateOverflowError(OverflowError):
    """A coordinate left the declared 128-bit signed range."""


def _is_squarefree(n: int) -> bool:
    if n % 4 == 0:
        return False
    p = 3
    while p * p <= n:
        if n % (p * p) == 0:
            return False
        p += 2
    return True


@dataclass(frozen=True)
class FieldDesc:
    """A real quadratic field Q(sqrt(D)) with D = 1 (mod 4), D squarefree."""

    D: int
    omega_num: float
    omega_conj: float

    @classmethod
    def make(cls, D: int) -> "FieldDesc":
        if not isinstance(D, int):
            raise NumberFieldError(f"field discriminant must be an integer, got {D!r}")
        if D < 5:
            raise NumberFieldError(f"need D >= 5, got {D}")
        if D % 4 != 1:
            raise NumberFieldError(
                f"only D = 1 (mod 4) is supported (omega = (1+sqrt(D))/2); got D = {D} "
                f"with D mod 4 = {D % 4}"
            )
        if not _is_squarefree(D):
            raise NumberFieldError(f"D must be squarefree, got {D}")
        omega = (1.0 + math.sqrt(D)) / 2.0
        # 1 - omega is exact in doubles here, which keeps conj/embed identities
        # bit-exact (see qi_embed).
        return cls(D=D, omega_num=omega, omega_conj=1.0 - omega)

    @property
    def omega_relation_constant(self) -> int:
        """c in omega^2 = omega + c."""
        return (self.D - 1) // 4


def _checked(v: int) -> int:
    if not -_INT128_BOUND < v < _INT128_BOUND:
        raise CoordinateOverflowError(
            f"coordinate {v} exceeds the 128-bit signed range"
        )
    return v


@dataclass(frozen=True)
class QuadInt:
    """a + b*omega with integer a, b."""

    a: int
    b: int

    def __post_init__(self) -> None:
        _checked(self.a)
        _checked(self.b)

    def __repr__(self) -> str:
        return f"QuadInt({self.a}, {self.b})"


QI_ZERO = QuadInt(0, 0)
QI_ONE = QuadInt(1, 0)


def qi_from_int(n: int) -> QuadInt:
    return QuadInt(n, 0)


def qi_add(x: QuadInt, y: QuadInt) -> QuadInt:
    return QuadInt(x.a + y.a, x.b + y.b)


def qi_sub(x: QuadInt, y: QuadInt) -> QuadInt:
    return QuadInt(x.a - y.a, x.b - y.b)


def qi_neg(x: QuadInt) -> QuadInt:
    return QuadInt(-x.a, -x.b)


def qi_scale(n: int, x: QuadInt) -> QuadInt:
    return QuadInt(n * x.a, n * x.b)


def qi_mul(x: QuadInt, y: QuadInt, F: FieldDesc) -> QuadInt:
    """Exact product using omega^2 = omega + (D-1)/4."""
    c = F.omega_relation_constant
    bd = x.b * y.b
    return QuadInt(x.a * y.a + bd * c, x.a * y.b + x.b * y.a + bd)


def qi_conj(x: QuadInt) -> QuadInt:
    """Galois conjugate: omega -> 1 - omega.  Involution, fixes Z."""
    return QuadInt(x.a + x.b, -x.b)


def qi_embed(x: QuadInt, place: int, F: FieldDesc) -> float:
    """Real embedding at the given place (1 or 2).

    Place 2 is computed as (a + b) - b*omega_num, which is the bit-exact
    mirror of embedding the conjugate at place 1.
    """
    if place == 1:
        return x.a + x.b * F.omega_num
    if place == 2:
        return (x.a + x.b) - x.b * F.omega_num
    raise ValueError(f"place must be 1 or 2, got {place}")


def qi_norm(x: QuadInt, F: FieldDesc) -> int:
    """Field norm N(a + b*omega) = a^2 + ab + b^2 (1-D)/4, an exact integer."""
    return _checked(x.a * x.a + x.a * x.b - x.b * x.b * F.omega_relation_constant)


def qi_trace(x: QuadInt) -> int:
    """Field trace 2a + b."""
    return 2 * x.a + x.b


def qi_is_int(x: QuadInt) -> bool:
    return x.b == 0
