"""
BFMLIFT — Exact coefficients

Scalars are Fractions, or GaussianRationals when the imaginary unit is needed
(holonomy phases). A NovCoeff is a finite formal sum  sum_i a_i q^{lambda_i}
with rational exponents; q is specialized only at evaluation time.
"""
from __future__ import annotations

import cmath
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational
from typing import Iterable, Tuple, Union


@dataclass(frozen=True)
class GaussianRational:
    """Exact element re + im*i of Q(i)."""

    re: Fraction
    im: Fraction

    def __post_init__(self) -> None:
        object.__setattr__(self, "re", Fraction(self.re))
        object.__setattr__(self, "im", Fraction(self.im))

    @staticmethod
    def _coerce(other: "ScalarLike") -> "GaussianRational":
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Fraction, Rational)):
            return GaussianRational(Fraction(other), Fraction(0))
        return NotImplemented  # type: ignore[return-value]

    def __add__(self, other: "ScalarLike") -> "Scalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return normalize_scalar(GaussianRational(self.re + o.re, self.im + o.im))

    __radd__ = __add__

    def __neg__(self) -> "GaussianRational":
        return GaussianRational(-self.re, -self.im)

    def __sub__(self, other: "ScalarLike") -> "Scalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return normalize_scalar(GaussianRational(self.re - o.re, self.im - o.im))

    def __rsub__(self, other: "ScalarLike") -> "Scalar":
        return (-self) + other

    def __mul__(self, other: "ScalarLike") -> "Scalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return normalize_scalar(GaussianRational(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        ))

    __rmul__ = __mul__

    def norm(self) -> Fraction:
        return self.re * self.re + self.im * self.im

    def inverse(self) -> "GaussianRational":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("GaussianRational division by zero")
        return GaussianRational(self.re / n, -self.im / n)

    def __truediv__(self, other: "ScalarLike") -> "Scalar":
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self * o.inverse()

    def __rtruediv__(self, other: "ScalarLike") -> "Scalar":
        return self.inverse() * other

    def __pow__(self, exponent: int) -> "Scalar":
        if exponent < 0:
            return self.inverse() ** (-exponent)
        result: Scalar = Fraction(1)
        base: Scalar = self
        while exponent:
            if exponent & 1:
                result = result * base
            base = base * base
            exponent >>= 1
        return result

    def __eq__(self, other: object) -> bool:
        if isinstance(other, GaussianRational):
            return self.re == other.re and self.im == other.im
        if isinstance(other, (int, Fraction)):
            return self.im == 0 and self.re == other
        return NotImplemented

    def __hash__(self) -> int:
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0


Scalar = Union[Fraction, GaussianRational]
ScalarLike = Union[int, Fraction, GaussianRational]


def to_scalar(value: ScalarLike) -> Scalar:
    if isinstance(value, GaussianRational):
        return normalize_scalar(value)
    if isinstance(value, bool):
        raise TypeError("bool is not a coefficient")
    if isinstance(value, (int, Fraction, Rational)):
        return Fraction(value)
    raise TypeError(f"unsupported exact coefficient {value!r}")


def normalize_scalar(value: Scalar) -> Scalar:
    """Real Gaussian rationals collapse to plain Fractions."""
    if isinstance(value, GaussianRational) and value.im == 0:
        return value.re
    return value


def scalar_to_complex(value: Scalar) -> complex:
    return complex(value) if isinstance(value, GaussianRational) else complex(float(value))


# ============================================
# NOVIKOV COEFFICIENTS
# ============================================

@dataclass(frozen=True)
class NovCoeff:
    """sum a_i q^{lam_i}, terms sorted by strictly increasing lam, no zero a_i."""

    terms: Tuple[Tuple[Fraction, Scalar], ...] = ()

    @classmethod
    def build(cls, pairs: Iterable[Tuple[Fraction, ScalarLike]]) -> "NovCoeff":
        acc: dict = {}
        for lam, a in pairs:
            lam = Fraction(lam)
            acc[lam] = acc.get(lam, Fraction(0)) + to_scalar(a)
        return cls(tuple(
            (lam, normalize_scalar(a)) for lam, a in sorted(acc.items()) if a != 0
        ))

    @classmethod
    def constant(cls, a: ScalarLike) -> "NovCoeff":
        return cls.build([(Fraction(0), a)])

    @classmethod
    def monomial(cls, a: ScalarLike, lam: Fraction | int = 0) -> "NovCoeff":
        return cls.build([(Fraction(lam), a)])

    def is_zero(self) -> bool:
        return not self.terms

    def is_constant(self) -> bool:
        return self.is_zero() or (len(self.terms) == 1 and self.terms[0][0] == 0)

    def valuation(self) -> Fraction | None:
        return self.terms[0][0] if self.terms else None

    def __add__(self, other: "NovCoeff") -> "NovCoeff":
        return NovCoeff.build(list(self.terms) + list(other.terms))

    def __neg__(self) -> "NovCoeff":
        return NovCoeff(tuple((lam, -a) for lam, a in self.terms))

    def __sub__(self, other: "NovCoeff") -> "NovCoeff":
        return self + (-other)

    def __mul__(self, other: "NovCoeff") -> "NovCoeff":
        return NovCoeff.build(
            (l1 + l2, a1 * a2) for l1, a1 in self.terms for l2, a2 in other.terms
        )

    def scale(self, factor: ScalarLike) -> "NovCoeff":
        return NovCoeff.build((lam, a * to_scalar(factor)) for lam, a in self.terms)

    def shift(self, lam: Fraction) -> "NovCoeff":
        return NovCoeff(tuple((l + lam, a) for l, a in self.terms))

    def at_unit(self) -> Scalar:
        """Specialize q = 1."""
        total: Scalar = Fraction(0)
        for _, a in self.terms:
            total = total + a
        return normalize_scalar(total)

    def at(self, q_value: float) -> complex:
        """Numeric value at q = q_value > 0."""
        return sum(
            (scalar_to_complex(a) * cmath.exp(float(lam) * cmath.log(q_value)) for lam, a in self.terms),
            complex(0.0),
        )

    def exponent_denominators(self) -> Tuple[int, ...]:
        return tuple(lam.denominator for lam, _ in self.terms)
