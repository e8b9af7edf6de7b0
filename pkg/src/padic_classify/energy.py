"""Exact energies: sums ``sum_j A_j * p**(-j/e)`` with natural ``A_j``.

Write ``s = p**(-1/e)``.  Since ``s**e = 1/p`` every energy is
``sum_{r<e} s**r * R_r`` with rationals ``R_r`` whose denominators are powers
of ``p``, and ``1, s, ..., s**(e-1)`` are linearly independent over Q.  So
equality is equality of the residue vectors ``(R_0, ..., R_{e-1})`` and the
sign of a difference is exact; when ``e > 1`` and the vector is nonzero the
sign is settled by integer interval arithmetic with doubling precision.
"""

from __future__ import annotations

import functools
from collections import Counter
from collections.abc import Iterable, Mapping, Sequence
from dataclasses import dataclass
from fractions import Fraction

from .dendrogram import Dendrogram, DendrogramError, Node
from .padic import FieldMismatchError, FieldParams, NormValue, PAdicValue, distance


def _iroot(n: int, k: int) -> int:
    """floor(n ** (1/k)) for n >= 0."""
    if n < 2:
        return n
    x = 1 << -(-n.bit_length() // k)
    while True:
        y = ((k - 1) * x + n // x ** (k - 1)) // k
        if y >= x:
            break
        x = y
    while x ** k > n:
        x -= 1
    while (x + 1) ** k <= n:
        x += 1
    return x


def _residues(field: FieldParams, terms: Iterable[tuple[int, int]]) -> tuple[Fraction, ...]:
    e, p = field.e, field.p
    out = [Fraction(0)] * e
    for j, a in terms:
        r = j % e
        k = (j - r) // e
        out[r] += a * Fraction(p) ** -k
    return tuple(out)


def _sign_of(field: FieldParams, diff: Sequence[Fraction]) -> int:
    """Sign of sum_r diff[r] * p**(-r/e)."""
    if all(d == 0 for d in diff):
        return 0
    if field.e == 1:
        return 1 if diff[0] > 0 else -1
    p, e = field.p, field.e
    bits = 64
    while True:
        scale = 1 << bits
        lo = hi = Fraction(0)
        for r, d in enumerate(diff):
            if d == 0:
                continue
            if r == 0:
                s_lo = s_hi = Fraction(1)
            else:
                # p**(r/e) * 2**bits lies in [x, x+1)
                x = _iroot(p ** r * scale ** e, e)
                s_lo, s_hi = Fraction(scale, x + 1), Fraction(scale, x)
            if d > 0:
                lo += d * s_lo
                hi += d * s_hi
            else:
                lo += d * s_hi
                hi += d * s_lo
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        bits *= 2


@functools.total_ordering
class EnergyValue:
    """Exact nonnegative energy over a fixed field."""

    __slots__ = ("field", "terms", "_res")

    def __init__(self, field: FieldParams, terms: Mapping[int, int] | None = None):
        clean = {}
        for j, a in (terms or {}).items():
            a = int(a)
            if a < 0:
                raise ValueError("energy coefficients are natural numbers")
            if a:
                clean[int(j)] = a
        self.field = field
        self.terms: dict[int, int] = dict(sorted(clean.items()))
        self._res = _residues(field, self.terms.items())

    @classmethod
    def zero(cls, field: FieldParams) -> EnergyValue:
        return cls(field)

    @classmethod
    def term(cls, field: FieldParams, j: int, coeff: int = 1) -> EnergyValue:
        """``coeff * p**(-j/e)``."""
        return cls(field, {j: coeff})

    @classmethod
    def from_norms(cls, field: FieldParams, norms: Iterable[NormValue]) -> EnergyValue:
        counts = Counter(n.exponent for n in norms if not n.is_zero)
        return cls(field, counts)

    @classmethod
    def from_fraction(cls, field: FieldParams, value: Fraction) -> EnergyValue:
        """Exact energy equal to a nonnegative rational with p-power denominator."""
        value = Fraction(value)
        if value < 0:
            raise ValueError("energies are nonnegative")
        p, e = field.p, field.e
        den, k = value.denominator, 0
        while den % p == 0:
            den //= p
            k += 1
        if den != 1:
            raise ValueError(f"{value} is not of the form A * p**-k")
        return cls(field, {k * e: value.numerator})

    def _check(self, other):
        if self.field != other.field:
            raise FieldMismatchError("energies over different fields")

    def __add__(self, other: EnergyValue) -> EnergyValue:
        if not isinstance(other, EnergyValue):
            return NotImplemented
        self._check(other)
        merged = Counter(self.terms)
        merged.update(other.terms)
        return EnergyValue(self.field, merged)

    def __radd__(self, other):
        if other == 0:
            return self
        return NotImplemented

    def scaled(self, factor: int) -> EnergyValue:
        return EnergyValue(self.field, {j: a * factor for j, a in self.terms.items()})

    def __eq__(self, other):
        if isinstance(other, EnergyValue):
            return self.field == other.field and self._res == other._res
        if isinstance(other, (int, Fraction)):
            return compare(self, other) == 0
        return NotImplemented

    def __hash__(self):
        return hash((self.field, self._res))

    def __lt__(self, other):
        if not isinstance(other, (EnergyValue, int, Fraction)):
            return NotImplemented
        return compare(self, other) < 0

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def to_fraction(self) -> Fraction:
        if self.field.e != 1:
            raise ValueError("value is irrational for e > 1")
        return self._res[0]

    def to_float(self) -> float:
        p, e = self.field.p, self.field.e
        return sum(float(r) * p ** (-k / e) for k, r in enumerate(self._res))

    def exact_str(self) -> str:
        if self.field.e == 1:
            return str(self._res[0])
        return " + ".join(f"{a}*p^(-{j}/{self.field.e})" for j, a in self.terms.items()) or "0"

    def to_json(self) -> dict:
        out = {
            "terms": [{"j": j, "coeff": str(a)} for j, a in self.terms.items()],
            "decimal": self.to_float(),
        }
        if self.field.e == 1:
            out["exact"] = str(self._res[0])
        return out

    def __repr__(self):
        return f"EnergyValue({self.exact_str()}, p={self.field.p}, e={self.field.e})"


def _as_residues(x, field: FieldParams) -> tuple[Fraction, ...]:
    if isinstance(x, EnergyValue):
        if x.field != field:
            raise FieldMismatchError("energies over different fields")
        return x._res
    return (Fraction(x),) + (Fraction(0),) * (field.e - 1)


def compare(x, y) -> int:
    """Exact sign of ``x - y`` as -1, 0 or 1.

    Either side may be a plain rational as long as the other is an
    :class:`EnergyValue` supplying the field.
    """
    field = x.field if isinstance(x, EnergyValue) else getattr(y, "field", None)
    if field is None:
        raise TypeError("compare needs at least one EnergyValue")
    a, b = _as_residues(x, field), _as_residues(y, field)
    return _sign_of(field, [u - v for u, v in zip(a, b)])


@dataclass(frozen=True)
class EnergyDifference:
    """``plus - minus`` kept as a pair; only its sign and order are exact."""

    plus: EnergyValue
    minus: EnergyValue

    @property
    def field(self) -> FieldParams:
        return self.plus.field

    def sign(self) -> int:
        return compare(self.plus, self.minus)

    def compare(self, other: EnergyDifference) -> int:
        return compare(self.plus + other.minus, other.plus + self.minus)

    def to_fraction(self) -> Fraction:
        return self.plus.to_fraction() - self.minus.to_fraction()

    def to_float(self) -> float:
        res = [a - b for a, b in zip(self.plus._res, self.minus._res)]
        p, e = self.field.p, self.field.e
        return sum(float(r) * p ** (-k / e) for k, r in enumerate(res))

    def as_energy(self) -> EnergyValue:
        """The difference as an :class:`EnergyValue`, when it is one."""
        res = [a - b for a, b in zip(self.plus._res, self.minus._res)]
        if any(r < 0 for r in res):
            raise ValueError("difference has no natural-coefficient form")
        total = EnergyValue.zero(self.field)
        for r, value in enumerate(res):
            part = EnergyValue.from_fraction(self.field, value)
            total += EnergyValue(self.field, {j + r: a for j, a in part.terms.items()})
        return total

    def exact_str(self) -> str:
        if self.field.e == 1:
            return str(self.to_fraction())
        return f"({self.plus.exact_str()}) - ({self.minus.exact_str()})"

    def to_json(self) -> dict:
        out = {"decimal": self.to_float()}
        if self.field.e == 1:
            out["exact"] = str(self.to_fraction())
        else:
            out["plus"] = self.plus.to_json()
            out["minus"] = self.minus.to_json()
        return out


@dataclass(frozen=True)
class GradientPolynomial:
    """``t**shift * sum_i coeffs[i] * t**i`` with ``t = p**(-1/e)``.

    ``coeffs[0]`` is nonzero unless the polynomial is zero.
    """

    coeffs: tuple[int, ...]
    shift: int = 0

    @classmethod
    def from_terms(cls, terms: Mapping[int, int]) -> GradientPolynomial:
        terms = {j: c for j, c in terms.items() if c}
        if not terms:
            return cls((), 0)
        lo, hi = min(terms), max(terms)
        return cls(tuple(terms.get(j, 0) for j in range(lo, hi + 1)), lo)

    @property
    def terms(self) -> dict[int, int]:
        """Coefficients keyed by absolute exponent of ``t``."""
        return {self.shift + i: c for i, c in enumerate(self.coeffs) if c}

    def __sub__(self, other: GradientPolynomial) -> GradientPolynomial:
        acc = Counter(self.terms)
        acc.subtract(other.terms)
        return GradientPolynomial.from_terms(acc)

    def __call__(self, t):
        """Value of the normalized polynomial (without the ``t**shift`` factor)."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * t + c
        return acc

    def at(self, field: FieldParams) -> EnergyDifference:
        plus = {j: c for j, c in self.terms.items() if c > 0}
        minus = {j: -c for j, c in self.terms.items() if c < 0}
        return EnergyDifference(EnergyValue(field, plus), EnergyValue(field, minus))

    def __str__(self):
        parts = []
        for i, c in enumerate(self.coeffs):
            if c:
                mono = "" if i == 0 else ("t" if i == 1 else f"t^{i}")
                parts.append(f"{c}{mono}")
        return " + ".join(parts).replace("+ -", "- ") or "0"


# -- energies on dendrograms ------------------------------------------------

def vertex_energy(node: Node) -> EnergyValue:
    """``(#C_v - 1) * mu(v)``; zero for ends."""
    if node.is_end:
        return EnergyValue.zero(node.field)
    return EnergyValue.term(node.field, node.level, node.size - 1)


def family_energy(nodes: Iterable[Node], field: FieldParams | None = None) -> EnergyValue:
    nodes = list(nodes)
    if field is None:
        if not nodes:
            raise ValueError("field required for an empty family")
        field = nodes[0].field
    total = Counter()
    for v in nodes:
        if not v.is_end:
            total[v.level] += v.size - 1
    return EnergyValue(field, total)


def _check_disjoint(clustering) -> list[frozenset[int]]:
    clusters = [frozenset(C) for C in clustering]
    seen: set[int] = set()
    for C in clusters:
        if not C:
            raise ValueError("empty cluster")
        if seen & C:
            raise ValueError("clusters overlap")
        seen |= C
    return clusters


def clustering_energy(clustering: Iterable[Iterable[int]], D: Dendrogram) -> EnergyValue:
    """Sum of ``(#C - 1) * mu(C_v)`` with C_v the smallest verticial cluster
    containing C."""
    total = Counter()
    for C in _check_disjoint(clustering):
        if len(C) > 1:
            total[D.smallest_containing(C).level] += len(C) - 1
    return EnergyValue(D.field, total)


def pointed_energy(X: Sequence[PAdicValue], clustering: Sequence[Iterable[int]],
                   centers: Sequence[int]) -> EnergyValue:
    """Sum over clusters of the distances from each member to its center."""
    clusters = _check_disjoint(clustering)
    if len(centers) != len(clusters):
        raise ValueError("one center per cluster required")
    norms = []
    for C, a in zip(clusters, centers):
        if a not in C:
            raise ValueError(f"center {a} is not in its cluster")
        norms.extend(distance(X[x], X[a]) for x in C)
    return EnergyValue.from_norms(X[0].field, norms)


def delta(v: Node) -> EnergyDifference:
    """Energy drop from replacing ``v`` by its children."""
    if v.is_end:
        raise DendrogramError("ends cannot be split")
    return EnergyDifference(vertex_energy(v), family_energy(v.children, v.field))


def gradient_polynomial(v: Node) -> GradientPolynomial:
    if v.is_end:
        raise DendrogramError("ends cannot be split")
    terms = Counter({v.level: v.size - 1})
    for c in v.children:
        if not c.is_end:
            terms[c.level] -= c.size - 1
    return GradientPolynomial.from_terms(terms)


def is_refinement(finer: Iterable[Iterable], coarser: Iterable[Iterable]) -> bool:
    """True iff every cluster of ``coarser`` is a union of clusters of ``finer``."""
    finer = [frozenset(C) for C in finer]
    coarser = [frozenset(C) for C in coarser]
    if frozenset().union(*finer) != frozenset().union(*coarser):
        raise ValueError("clusterings partition different sets")
    return all(any(C <= B for B in coarser) for C in finer)
