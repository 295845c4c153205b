"""Coefficient arithmetic.

Exact models carry :class:`GaussianRational` coefficients (a pair of
:class:`fractions.Fraction`); numeric models carry Python ``complex``.
"""

from __future__ import annotations

import re
from fractions import Fraction
from numbers import Rational

#: relative tolerance for numeric scalar comparisons
NUMERIC_TOL = 1e-10

_RAT = r"[+-]?\d+(?:/\d+)?"
_COEFF_RE = re.compile(
    rf"^(?P<re>{_RAT})?(?:(?P<im>[+-](?:\d+(?:/\d+)?)?)i)?$"
)


class GaussianRational:
    """Element of Q(i), stored as ``re + im*i`` with Fraction parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = Fraction(re)
        self.im = Fraction(im)

    @staticmethod
    def _coerce(other):
        if isinstance(other, GaussianRational):
            return other
        if isinstance(other, (int, Rational)):
            return GaussianRational(other)
        return None

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return GaussianRational(
            self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        d = o.norm2()
        if d == 0:
            raise ZeroDivisionError("division by zero Gaussian rational")
        num = self * o.conjugate()
        return GaussianRational(num.re / d, num.im / d)

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __neg__(self):
        return GaussianRational(-self.re, -self.im)

    def __pos__(self):
        return self

    def __eq__(self, other):
        o = self._coerce(other)
        if o is None:
            if isinstance(other, complex):
                return complex(self) == other
            return NotImplemented
        return self.re == o.re and self.im == o.im

    def __hash__(self):
        if self.im == 0:
            return hash(self.re)
        return hash((self.re, self.im))

    def __bool__(self):
        return bool(self.re) or bool(self.im)

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def conjugate(self):
        return GaussianRational(self.re, -self.im)

    def norm2(self) -> Fraction:
        """Exact squared modulus."""
        return self.re * self.re + self.im * self.im

    @property
    def real(self):
        return self.re

    @property
    def imag(self):
        return self.im

    def __repr__(self):
        return f"GaussianRational({self.re}, {self.im})"

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        im = self.im
        sign = "-" if im < 0 else "+"
        mag = abs(im)
        im_txt = "" if mag == 1 else str(mag)
        if self.re == 0:
            return f"{'-' if im < 0 else ''}{im_txt}i"
        return f"{self.re}{sign}{im_txt}i"


ONE = GaussianRational(1)
ZERO = GaussianRational(0)
I = GaussianRational(0, 1)


def parse_coeff(text: str, mode: str = "exact"):
    """Parse a coefficient literal.

    Exact grammar is ``a/b`` or ``a/b+c/di`` (denominators optional and
    positive, pure imaginary ``c/di`` also accepted).  Numeric mode also takes
    decimal literals and Python complex syntax.
    """
    if not isinstance(text, str):
        raise ValueError(f"coefficient must be a string, got {text!r}")
    s = text.replace(" ", "")
    if not s:
        raise ValueError("empty coefficient")
    if mode == "numeric":
        try:
            return complex(s.replace("i", "j"))
        except ValueError:
            pass
    m = _COEFF_RE.match(s)
    if m is None or (m.group("re") is None and m.group("im") is None):
        raise ValueError(f"malformed coefficient {text!r}")
    try:
        re_part = Fraction(m.group("re")) if m.group("re") else Fraction(0)
        im_txt = m.group("im")
        if im_txt is None:
            im_part = Fraction(0)
        elif im_txt in ("+", "-"):
            im_part = Fraction(1 if im_txt == "+" else -1)
        else:
            im_part = Fraction(im_txt)
    except ZeroDivisionError:
        raise ValueError(f"zero denominator in coefficient {text!r}") from None
    value = GaussianRational(re_part, im_part)
    if mode == "numeric":
        return complex(value)
    return value


def is_zero(x, tol: float = NUMERIC_TOL, scale: float = 1.0) -> bool:
    if isinstance(x, GaussianRational):
        return not x
    if isinstance(x, (int, Fraction)):
        return x == 0
    return abs(x) <= tol * max(1.0, scale)


def conj(x):
    if isinstance(x, (int, Fraction)):
        return x
    return x.conjugate()


def abs2(x):
    """Squared modulus; exact for exact inputs."""
    if isinstance(x, GaussianRational):
        return x.norm2()
    if isinstance(x, (int, Fraction)):
        return Fraction(x) ** 2
    return abs(x) ** 2


def to_exact(x) -> GaussianRational:
    if isinstance(x, GaussianRational):
        return x
    if isinstance(x, (int, Fraction)):
        return GaussianRational(x)
    raise TypeError(f"cannot represent {x!r} exactly")
