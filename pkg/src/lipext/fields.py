"""Exact and floating scalar fields.

Three scalar modes are supported:

* ``rational``  -- arbitrary-precision rationals (gmpy2.mpq when available,
  ``fractions.Fraction`` otherwise),
* ``sqrt2``     -- the quadratic field of elements ``a + b*sqrt(2)`` with
  rational ``a``, ``b``; comparisons are decided exactly,
* ``f64``       -- double floats with a single comparison tolerance ``eps``
  that governs every equality and sign test.

All algorithms receive a :class:`Field` object and route every comparison
through it, so exact modes never see a tolerance and the float mode sees
exactly one.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import total_ordering
from typing import Union

from .errors import FieldUnsupported, ParseError

try:
    from gmpy2 import mpq as _rat

    _RATIONAL_TYPES = (type(_rat(0)), Fraction, int)
except ImportError:  # pragma: no cover
    _rat = Fraction
    _RATIONAL_TYPES = (Fraction, int)


def rational(p: int | str, q: int = 1):
    """Exact rational ``p/q`` in the active rational implementation."""
    if q == 1:
        return _rat(p)
    return _rat(p) / _rat(q)


def _rat_sign(x) -> int:
    if x > 0:
        return 1
    if x < 0:
        return -1
    return 0


def _rat_sqrt(x):
    """Exact square root of a nonnegative rational, or None."""
    if x < 0:
        return None
    num, den = x.numerator, x.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn == num and rd * rd == den:
        return rational(rn, rd)
    return None


_RAT_RE = re.compile(r"[+-]?\d+(?:/\d+)?")
_SQRT2_RE = re.compile(
    r"^(?P<a>[+-]?\d+(?:/\d+)?)?"
    r"(?:(?P<sign>[+-])?(?:(?P<b>\d+(?:/\d+)?)\*)?sqrt2)?$"
)


@total_ordering
class Sqrt2:
    """Element ``a + b*sqrt(2)`` of the real quadratic field Q(sqrt 2).

    Comparisons are exact: the sign of ``a + b*sqrt(2)`` is decided from the
    signs of ``a``, ``b`` and of the norm ``a^2 - 2 b^2``.
    """

    __slots__ = ("_a", "_b")

    def __init__(self, a=0, b=0):
        self._a = _rat(a)
        self._b = _rat(b)

    @property
    def a(self):
        return self._a

    @property
    def b(self):
        return self._b

    @classmethod
    def _coerce(cls, x) -> "Sqrt2 | None":
        if isinstance(x, Sqrt2):
            return x
        if isinstance(x, _RATIONAL_TYPES):
            return cls(x, 0)
        return None

    def sign(self) -> int:
        sa, sb = _rat_sign(self._a), _rat_sign(self._b)
        if sb == 0:
            return sa
        if sa == 0:
            return sb
        if sa == sb:
            return sa
        # opposite signs: compare a^2 with 2 b^2
        n = _rat_sign(self._a * self._a - 2 * self._b * self._b)
        return n if sa > 0 else -n

    def __eq__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return self._a == o._a and self._b == o._b

    def __lt__(self, other) -> bool:
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return (self - o).sign() < 0

    def __hash__(self):
        if self._b == 0:
            return hash(self._a)
        return hash((self._a, self._b))

    def __add__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Sqrt2(self._a + o._a, self._b + o._b)

    __radd__ = __add__

    def __sub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Sqrt2(self._a - o._a, self._b - o._b)

    def __rsub__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o - self

    def __neg__(self):
        return Sqrt2(-self._a, -self._b)

    def __pos__(self):
        return self

    def __abs__(self):
        return -self if self.sign() < 0 else self

    def __mul__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return Sqrt2(
            self._a * o._a + 2 * self._b * o._b,
            self._a * o._b + self._b * o._a,
        )

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        n = o._a * o._a - 2 * o._b * o._b
        if n == 0:
            raise ZeroDivisionError("division by zero in Q(sqrt 2)")
        conj = Sqrt2(o._a / n, -o._b / n)
        return self * conj

    def __rtruediv__(self, other):
        o = self._coerce(other)
        if o is None:
            return NotImplemented
        return o / self

    def __bool__(self):
        return self._a != 0 or self._b != 0

    def __float__(self):
        return float(self._a) + float(self._b) * math.sqrt(2.0)

    def __repr__(self):
        return f"Sqrt2({self._a!r}, {self._b!r})"

    def __str__(self):
        return format_scalar(self)


SQRT2_VALUE = Sqrt2(0, 1)

Scalar = Union[int, Fraction, Sqrt2, float]


class FieldTag(str, Enum):
    RATIONAL = "rational"
    SQRT2 = "sqrt2"
    F64 = "f64"


@dataclass(frozen=True)
class Field:
    """A scalar mode: exact rationals, Q(sqrt 2), or tolerant floats.

    ``eps`` is the single comparison tolerance of the f64 mode; it is zero
    and unused in the exact modes.
    """

    tag: FieldTag
    eps: float = 0.0

    # -- construction ---------------------------------------------------

    @property
    def is_exact(self) -> bool:
        return self.tag is not FieldTag.F64

    @property
    def zero(self):
        return self.from_int(0)

    @property
    def one(self):
        return self.from_int(1)

    def from_int(self, n: int):
        if self.tag is FieldTag.F64:
            return float(n)
        if self.tag is FieldTag.SQRT2:
            return Sqrt2(n, 0)
        return rational(n)

    def ratio(self, p: int, q: int = 1):
        """The field element p/q."""
        if self.tag is FieldTag.F64:
            return p / q
        if self.tag is FieldTag.SQRT2:
            return Sqrt2(rational(p, q), 0)
        return rational(p, q)

    def sqrt2(self):
        """The element sqrt(2), where representable."""
        if self.tag is FieldTag.SQRT2:
            return SQRT2_VALUE
        if self.tag is FieldTag.F64:
            return math.sqrt(2.0)
        raise FieldUnsupported("sqrt(2) is not a rational number")

    def coerce(self, x):
        """Bring a raw scalar into this field, raising on mismatch."""
        if self.tag is FieldTag.F64:
            if isinstance(x, Sqrt2):
                return float(x)
            return float(x)
        if self.tag is FieldTag.SQRT2:
            s = Sqrt2._coerce(x)
            if s is None:
                raise FieldUnsupported(f"cannot coerce {x!r} into Q(sqrt 2)")
            return s
        if isinstance(x, Sqrt2):
            if x.b == 0:
                return _rat(x.a)
            raise FieldUnsupported(f"{x} is irrational")
        if isinstance(x, float):
            raise FieldUnsupported("floats cannot enter an exact field implicitly")
        return _rat(x)

    # -- comparisons ------------------------------------------------------

    def sign(self, x) -> int:
        if self.tag is FieldTag.F64:
            if x > self.eps:
                return 1
            if x < -self.eps:
                return -1
            return 0
        if self.tag is FieldTag.SQRT2:
            return x.sign() if isinstance(x, Sqrt2) else _rat_sign(x)
        return _rat_sign(x)

    def is_zero(self, x) -> bool:
        return self.sign(x) == 0

    def eq(self, x, y) -> bool:
        return self.sign(x - y) == 0

    def lt(self, x, y) -> bool:
        return self.sign(x - y) < 0

    def le(self, x, y) -> bool:
        return self.sign(x - y) <= 0

    def abs(self, x):
        return -x if self.sign(x) < 0 else x

    # -- roots -------------------------------------------------------------

    def sqrt(self, x):
        """Exact square root where representable; float sqrt in f64 mode.

        Returns None if x is nonnegative but its root lies outside the
        field. Raises ValueError for negative x.
        """
        if self.sign(x) < 0:
            raise ValueError("square root of a negative value")
        if self.tag is FieldTag.F64:
            return math.sqrt(max(x, 0.0))
        if self.tag is FieldTag.RATIONAL:
            return _rat_sqrt(x)
        if x.b != 0:
            return None  # general quartic-field roots are out of scope
        r = _rat_sqrt(x.a)
        if r is not None:
            return Sqrt2(r, 0)
        half = _rat_sqrt(x.a / 2)
        if half is not None:
            return Sqrt2(0, half)
        return None

    # -- rendering ----------------------------------------------------------

    def to_float(self, x) -> float:
        return float(x)

    def format(self, x) -> str:
        return format_scalar(x)

    def parse(self, value):
        """Scalar from a JSON value (string literal or number)."""
        if isinstance(value, bool):
            raise ParseError(f"not a scalar literal: {value!r}")
        if self.tag is FieldTag.F64:
            if isinstance(value, (int, float)):
                return float(value)
            try:
                return float(parse_exact_literal(str(value)))
            except ParseError:
                try:
                    return float(value)
                except ValueError:
                    raise ParseError(f"not a number: {value!r}") from None
        if isinstance(value, int):
            return self.from_int(value)
        if isinstance(value, float):
            raise ParseError("exact fields require exact literals, not floats")
        x = parse_exact_literal(str(value))
        return self.coerce(x)


def _rat_from_literal(s: str):
    return _rat(s.lstrip("+")) if "/" in s else _rat(int(s))


def parse_exact_literal(text: str):
    """Parse ``p/q`` or ``a+b*sqrt2`` into a rational or Sqrt2 value."""
    s = text.strip().replace(" ", "")
    if not s:
        raise ParseError("empty scalar literal")
    if "sqrt2" not in s:
        if not _RAT_RE.fullmatch(s):
            raise ParseError(f"bad rational literal: {text!r}")
        return _rat_from_literal(s)
    m = _SQRT2_RE.fullmatch(s)
    if not m:
        raise ParseError(f"bad sqrt2 literal: {text!r}")
    if m.group("a") and m.group("sign") is None:
        # "3sqrt2" is ambiguous between 3+sqrt2 and 3*sqrt2
        raise ParseError(f"ambiguous sqrt2 literal: {text!r}")
    a = _rat_from_literal(m.group("a")) if m.group("a") else _rat(0)
    b = _rat_from_literal(m.group("b")) if m.group("b") else _rat(1)
    if m.group("sign") == "-":
        b = -b
    return Sqrt2(a, b)


def format_scalar(x) -> str:
    """Canonical literal: ``p/q`` or ``a+b*sqrt2`` (f64 renders as repr)."""
    if isinstance(x, Sqrt2):
        if x.b == 0:
            return str(x.a)
        bs = f"{abs(x.b)}*sqrt2"
        if x.a == 0:
            return bs if x.b > 0 else f"-{bs}"
        sign = "+" if x.b > 0 else "-"
        return f"{x.a}{sign}{bs}"
    if isinstance(x, float):
        return repr(x)
    return str(x)


RATIONAL_FIELD = Field(FieldTag.RATIONAL)
SQRT2_FIELD = Field(FieldTag.SQRT2)


def f64_field(eps: float = 1e-9) -> Field:
    return Field(FieldTag.F64, eps=eps)


def field_from_name(name: str, eps: float = 1e-9) -> Field:
    try:
        tag = FieldTag(name)
    except ValueError:
        raise ParseError(f"unknown field {name!r}; expected rational, sqrt2 or f64") from None
    if tag is FieldTag.F64:
        return f64_field(eps)
    return Field(tag)


def check_same_field(*fields: Field) -> Field:
    from .errors import FieldMismatch

    first = fields[0]
    for f in fields[1:]:
        if f.tag is not first.tag:
            raise FieldMismatch(f"mixed scalar modes: {first.tag.value} vs {f.tag.value}")
    return first
