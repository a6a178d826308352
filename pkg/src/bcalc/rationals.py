"""Exact complex-rational scalars.

All exponents and exact coefficients in the package are Gaussian rationals:
pairs of ``fractions.Fraction``.  Equality is decidable, arithmetic is exact,
and the total output order used everywhere is lexicographic in (re, im).
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction

_FLOAT_RATIONALIZE_DEN = 10**12


def as_fraction(value) -> Fraction:
    """Coerce an int, Fraction, decimal/ratio string, or float to Fraction.

    Floats are rationalized with denominator bound 1e12; exact inputs stay
    exact.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, str):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(_FLOAT_RATIONALIZE_DEN)
    raise TypeError(f"cannot interpret {value!r} as an exact rational")


@dataclass(frozen=True)
class ComplexRational:
    re: Fraction = Fraction(0)
    im: Fraction = Fraction(0)

    @classmethod
    def of(cls, value, im=None) -> "ComplexRational":
        if im is not None:
            return cls(as_fraction(value), as_fraction(im))
        if isinstance(value, ComplexRational):
            return value
        if isinstance(value, complex):
            return cls(as_fraction(value.real), as_fraction(value.imag))
        if isinstance(value, tuple) and len(value) == 2:
            return cls(as_fraction(value[0]), as_fraction(value[1]))
        return cls(as_fraction(value))

    @classmethod
    def from_complex(cls, z: complex, max_denominator: int = _FLOAT_RATIONALIZE_DEN):
        return cls(
            Fraction(float(z.real)).limit_denominator(max_denominator),
            Fraction(float(z.imag)).limit_denominator(max_denominator),
        )

    @property
    def is_real(self) -> bool:
        return self.im == 0

    def key(self):
        return (self.re, self.im)

    def as_complex(self) -> complex:
        return complex(self.re) + 1j * complex(self.im)

    def __bool__(self) -> bool:
        return self.re != 0 or self.im != 0

    def __add__(self, other) -> "ComplexRational":
        o = ComplexRational.of(other)
        return ComplexRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other) -> "ComplexRational":
        o = ComplexRational.of(other)
        return ComplexRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other) -> "ComplexRational":
        return ComplexRational.of(other) - self

    def __neg__(self) -> "ComplexRational":
        return ComplexRational(-self.re, -self.im)

    def __mul__(self, other) -> "ComplexRational":
        o = ComplexRational.of(other)
        return ComplexRational(
            self.re * o.re - self.im * o.im,
            self.re * o.im + self.im * o.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other) -> "ComplexRational":
        o = ComplexRational.of(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero ComplexRational")
        return ComplexRational(
            (self.re * o.re + self.im * o.im) / den,
            (self.im * o.re - self.re * o.im) / den,
        )

    def __str__(self) -> str:
        if self.im == 0:
            return str(self.re)
        sign = "+" if self.im >= 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"


ZERO = ComplexRational()
ONE = ComplexRational(Fraction(1))
