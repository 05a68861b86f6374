"""Exact scalar arithmetic: Gaussian rationals and their dual-number extension.

Every coefficient and every numeric component in this package is a QI
(complex number with Fraction real and imaginary parts), so equality with
zero is decidable.  Dual carries a first-order perturbation (t^2 = 0) and is
used by the variation oracle to extract exact directional derivatives.
"""

from __future__ import annotations

from fractions import Fraction


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, str):
        return Fraction(x)
    raise TypeError(f"cannot coerce {x!r} to an exact rational")


class QI:
    """A complex number with exact rational real and imaginary parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        object.__setattr__(self, "re", _frac(re))
        object.__setattr__(self, "im", _frac(im))

    def __setattr__(self, *a):
        raise AttributeError("QI is immutable")

    @staticmethod
    def coerce(x) -> "QI":
        if isinstance(x, QI):
            return x
        if isinstance(x, (int, Fraction)):
            return QI(x)
        raise TypeError(f"cannot coerce {x!r} to QI")

    def __add__(self, other):
        try:
            other = QI.coerce(other)
        except TypeError:
            return NotImplemented
        return QI(self.re + other.re, self.im + other.im)

    __radd__ = __add__

    def __sub__(self, other):
        try:
            other = QI.coerce(other)
        except TypeError:
            return NotImplemented
        return QI(self.re - other.re, self.im - other.im)

    def __rsub__(self, other):
        try:
            return QI.coerce(other) - self
        except TypeError:
            return NotImplemented

    def __mul__(self, other):
        try:
            other = QI.coerce(other)
        except TypeError:
            return NotImplemented
        return QI(
            self.re * other.re - self.im * other.im,
            self.re * other.im + self.im * other.re,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = QI.coerce(other)
        d = other.re * other.re + other.im * other.im
        if d == 0:
            raise ZeroDivisionError("division by zero QI")
        return QI(
            (self.re * other.re + self.im * other.im) / d,
            (self.im * other.re - self.re * other.im) / d,
        )

    def __neg__(self):
        return QI(-self.re, -self.im)

    def conjugate(self) -> "QI":
        return QI(self.re, -self.im)

    def is_zero(self) -> bool:
        return self.re == 0 and self.im == 0

    def __bool__(self):
        return not self.is_zero()

    def __eq__(self, other):
        try:
            other = QI.coerce(other)
        except TypeError:
            return NotImplemented
        return self.re == other.re and self.im == other.im

    def __hash__(self):
        return hash((self.re, self.im))

    def __repr__(self):
        return f"QI({self.re!r}, {self.im!r})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"({self.re}{sign}{abs(self.im)}i)"


QI_ZERO = QI(0)
QI_ONE = QI(1)
QI_I = QI(0, 1)


class Dual:
    """First-order dual number a + b*t with t^2 = 0 over QI."""

    __slots__ = ("a", "b")

    def __init__(self, a, b=QI_ZERO):
        object.__setattr__(self, "a", QI.coerce(a))
        object.__setattr__(self, "b", QI.coerce(b))

    def __setattr__(self, *a):
        raise AttributeError("Dual is immutable")

    @staticmethod
    def coerce(x) -> "Dual":
        if isinstance(x, Dual):
            return x
        return Dual(QI.coerce(x))

    def __add__(self, other):
        other = Dual.coerce(other)
        return Dual(self.a + other.a, self.b + other.b)

    __radd__ = __add__

    def __sub__(self, other):
        other = Dual.coerce(other)
        return Dual(self.a - other.a, self.b - other.b)

    def __rsub__(self, other):
        return Dual.coerce(other) - self

    def __mul__(self, other):
        other = Dual.coerce(other)
        return Dual(self.a * other.a, self.a * other.b + self.b * other.a)

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = Dual.coerce(other)
        inv_a = QI_ONE / other.a
        return Dual(self.a * inv_a, (self.b * other.a - self.a * other.b) * inv_a * inv_a)

    def __neg__(self):
        return Dual(-self.a, -self.b)

    def is_zero(self) -> bool:
        return self.a.is_zero() and self.b.is_zero()

    def __eq__(self, other):
        try:
            other = Dual.coerce(other)
        except TypeError:
            return NotImplemented
        return self.a == other.a and self.b == other.b

    def __hash__(self):
        return hash((self.a, self.b))

    def __repr__(self):
        return f"Dual({self.a!r}, {self.b!r})"


def parse_rational_coeff(text: str) -> QI:
    """Parse a DSL coefficient: "3", "-1/2", "2i", "-3/4i"."""
    text = text.strip()
    imag = text.endswith("i")
    if imag:
        text = text[:-1]
        if text in ("", "+", "-"):
            text += "1"
    value = Fraction(text)
    return QI(0, value) if imag else QI(value)
