"""Finite pi-adic digit words and their ultrametric.

A value is stored as a start index and a tuple of digits over the alphabet
``{0, ..., q-1}`` with ``q = p**f``.  The digit at position ``i`` multiplies
``pi**i``; two values at distance ``p**(-j/e)`` first disagree at index ``j``.
No field arithmetic is provided, only the metric.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass
from fractions import Fraction


class FieldMismatchError(ValueError):
    """Raised when values from different fields are combined."""


class DigitWordError(ValueError):
    """Malformed digit word or digit out of range."""


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    d = 3
    while d * d <= n:
        if n % d == 0:
            return False
        d += 2
    return True


def next_prime(n: int) -> int:
    """Smallest prime strictly greater than ``n``."""
    c = max(n + 1, 2)
    while not is_prime(c):
        c += 1
    return c


def first_primes(count: int) -> list[int]:
    out: list[int] = []
    p = 1
    while len(out) < count:
        p = next_prime(p)
        out.append(p)
    return out


@dataclass(frozen=True)
class FieldParams:
    """Prime ``p``, ramification degree ``e`` and residue degree ``f``."""

    p: int
    e: int = 1
    f: int = 1

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.e < 1 or self.f < 1:
            raise ValueError("ramification and residue degree must be >= 1")

    @property
    def q(self) -> int:
        return self.p ** self.f


@functools.total_ordering
@dataclass(frozen=True)
class NormValue:
    """Either zero (``exponent is None``) or ``p**(-exponent/e)``.

    The order does not depend on ``p`` or ``e``: a larger exponent is a
    smaller norm and zero is below everything.
    """

    exponent: int | None = None

    @property
    def is_zero(self) -> bool:
        return self.exponent is None

    def _key(self):
        return (0, 0) if self.exponent is None else (1, -self.exponent)

    def __lt__(self, other: NormValue) -> bool:
        if not isinstance(other, NormValue):
            return NotImplemented
        return self._key() < other._key()

    def to_fraction(self, field: FieldParams) -> Fraction:
        if self.exponent is None:
            return Fraction(0)
        if field.e != 1:
            raise ValueError("norm is irrational for e > 1")
        return Fraction(field.p) ** -self.exponent

    def to_float(self, field: FieldParams) -> float:
        if self.exponent is None:
            return 0.0
        return float(field.p) ** (-self.exponent / field.e)

    def __str__(self):
        if self.exponent is None:
            return "0"
        return f"p^({-self.exponent}/e)" if self.exponent else "1"


ZERO = NormValue()


@dataclass(frozen=True, eq=False)
class PAdicValue:
    """Digits ``digits[i]`` sit at index ``start + i``."""

    field: FieldParams
    start: int
    digits: tuple[int, ...]

    def __post_init__(self):
        q = self.field.q
        for d in self.digits:
            if not 0 <= d < q:
                raise DigitWordError(f"digit {d} out of range [0, {q - 1}]")

    @functools.cached_property
    def _canonical(self) -> tuple[int, tuple[int, ...]]:
        ds = self.digits
        lo, hi = 0, len(ds)
        while lo < hi and ds[lo] == 0:
            lo += 1
        while hi > lo and ds[hi - 1] == 0:
            hi -= 1
        if lo == hi:
            return (0, ())
        return (self.start + lo, ds[lo:hi])

    @property
    def valuation_index(self) -> int | None:
        """Index of the first nonzero digit, ``None`` for zero."""
        start, ds = self._canonical
        return start if ds else None

    def digit(self, i: int) -> int:
        start, ds = self._canonical
        j = i - start
        return ds[j] if 0 <= j < len(ds) else 0

    def __eq__(self, other):
        if not isinstance(other, PAdicValue):
            return NotImplemented
        return self.field == other.field and self._canonical == other._canonical

    def __hash__(self):
        return hash((self.field, self._canonical))

    def __repr__(self):
        return f"PAdicValue({format_value(self)!r}, p={self.field.p})"


def first_difference(x: PAdicValue, y: PAdicValue) -> int | None:
    """Smallest index where the zero-extended digit sequences differ."""
    if x.field != y.field:
        raise FieldMismatchError("values belong to different fields")
    xs, xd = x._canonical
    ys, yd = y._canonical
    if (xs, xd) == (ys, yd):
        return None
    if not xd:
        return ys
    if not yd:
        return xs
    if xs != ys:
        return min(xs, ys)
    for i in range(max(len(xd), len(yd))):
        a = xd[i] if i < len(xd) else 0
        b = yd[i] if i < len(yd) else 0
        if a != b:
            return xs + i
    raise AssertionError("unreachable: canonical forms differ")


def distance(x: PAdicValue, y: PAdicValue) -> NormValue:
    return NormValue(first_difference(x, y))


def norm(x: PAdicValue) -> NormValue:
    return NormValue(x.valuation_index)


def zero(field: FieldParams) -> PAdicValue:
    return PAdicValue(field, 0, (0,))


def encode_integer(n: int, field: FieldParams) -> PAdicValue:
    """Base-q expansion of ``n``, least significant digit first."""
    if n < 0:
        raise ValueError("only nonnegative integers are encoded")
    q = field.q
    digits = []
    while True:
        n, r = divmod(n, q)
        digits.append(r)
        if n == 0:
            break
    return PAdicValue(field, 0, tuple(digits))


def _parse_digits(part: str, q: int) -> list[int]:
    if not part:
        return []
    if "," in part or q > 10:
        tokens = [t.strip() for t in part.split(",")]
    else:
        tokens = list(part)
    out = []
    for t in tokens:
        if not t.isdigit():
            raise DigitWordError(f"malformed digit {t!r}")
        out.append(int(t))
    return out


def parse_value(text: str, field: FieldParams) -> PAdicValue:
    """Parse a digit word.

    Digits before the optional ``.`` occupy indices 0, 1, 2, ... (least
    significant first); digits after it occupy -1, -2, ...  ``int:<n>``
    encodes a nonnegative integer.  Commas separate digits and are
    mandatory when ``q > 10``.
    """
    text = text.strip()
    if text.startswith("int:"):
        body = text[4:].strip()
        if not body.isdigit():
            raise DigitWordError(f"malformed integer literal {text!r}")
        return encode_integer(int(body), field)
    if not text or text.count(".") > 1:
        raise DigitWordError(f"malformed digit word {text!r}")
    whole, _, frac = text.partition(".")
    int_digits = _parse_digits(whole, field.q)
    frac_digits = _parse_digits(frac, field.q)
    if not int_digits and not frac_digits:
        raise DigitWordError(f"no digits in {text!r}")
    digits = tuple(reversed(frac_digits)) + tuple(int_digits)
    return PAdicValue(field, -len(frac_digits), digits)


def format_value(x: PAdicValue) -> str:
    """Inverse of :func:`parse_value` (up to insignificant zeros)."""
    sep = "," if x.field.q > 10 else ""
    start, ds = x._canonical
    if not ds:
        return "0"
    lo = min(start, 0)
    hi = max(start + len(ds), 1)
    whole = [x.digit(i) for i in range(0, hi)]
    frac = [x.digit(i) for i in range(-1, lo - 1, -1)]
    out = sep.join(map(str, whole))
    if frac:
        out += "." + sep.join(map(str, frac))
    return out
