"""Vertex rankings by split gain, and how they depend on the prime.

For a vertex ``v`` the gain ``delta_v = E(v) - E(ch(v))`` is a polynomial in
``t = p**(-1/e)`` with integer coefficients.  Ranking vertices by ``delta_v``
for growing ``p`` eventually becomes the order of these polynomials near
``t = 0`` (compare the lowest-degree coefficient of the difference).  A
Cauchy-type root bound on each pairwise difference gives a prime beyond
which the ranking no longer changes.
"""

from __future__ import annotations

import functools
import math
from collections.abc import Mapping, Sequence
from dataclasses import dataclass, field
from fractions import Fraction

from .dendrogram import AbstractDendrogram, Dendrogram, DendrogramError
from .energy import EnergyDifference, GradientPolynomial, delta, gradient_polynomial
from .padic import FieldParams, is_prime, next_prime


@dataclass
class Ranking:
    groups: list[list[int]]
    prime: int | None = None
    e: int = 1
    deltas: dict[int, EnergyDifference] = field(default_factory=dict)

    def position(self, vid: int) -> int:
        for i, g in enumerate(self.groups):
            if vid in g:
                return i
        raise KeyError(vid)

    def restricted(self, vids: Sequence[int]) -> list[list[int]]:
        """Rank groups with only the given vertices kept."""
        keep = set(vids)
        return [[v for v in g if v in keep] for g in self.groups if keep & set(g)]

    def to_json(self) -> dict:
        return {
            "prime": self.prime,
            "ranks": [list(g) for g in self.groups],
            "delta": {str(v): d.to_json() for v, d in sorted(self.deltas.items())},
        }


def _tree(T: Dendrogram | AbstractDendrogram, field: FieldParams) -> Dendrogram:
    if isinstance(T, AbstractDendrogram):
        return T.as_dendrogram(field)
    return T.with_field(field)


def _group(items: list, cmp) -> list[list]:
    items = sorted(items, key=functools.cmp_to_key(cmp))
    groups: list[list] = []
    for it in items:
        if groups and cmp(groups[-1][0], it) == 0:
            groups[-1].append(it)
        else:
            groups.append([it])
    return groups


def p_ranking(T: Dendrogram | AbstractDendrogram, p: int, e: int = 1) -> Ranking:
    """Vertices by exact ``delta`` (largest first), exact ties grouped."""
    D = _tree(T, FieldParams(p, e))
    if not D.vertices:
        raise DendrogramError("tree has no vertices")
    deltas = {v.id: delta(v) for v in D.vertices}
    groups = _group(list(deltas), lambda a, b: deltas[b].compare(deltas[a]))
    return Ranking([sorted(g) for g in groups], p, e, deltas)


def gradient_polynomials(T: Dendrogram | AbstractDendrogram) -> dict[int, GradientPolynomial]:
    # Polynomials in t do not depend on p; any field serves for the shape.
    D = _tree(T, FieldParams(2))
    return {v.id: gradient_polynomial(v) for v in D.vertices}


def _asymptotic_sign(diff: GradientPolynomial) -> int:
    if not diff.coeffs:
        return 0
    return 1 if diff.coeffs[0] > 0 else -1


def asymptotic_ranking(T: Dendrogram | AbstractDendrogram) -> Ranking:
    """The ranking all sufficiently large primes agree on.

    Its leading key is level (ascending) then size (descending); remaining
    ties are broken by the lower-order terms of the gain polynomials, and
    only identical polynomials stay tied.
    """
    polys = gradient_polynomials(T)
    if not polys:
        raise DendrogramError("tree has no vertices")
    groups = _group(list(polys), lambda a, b: _asymptotic_sign(polys[b] - polys[a]))
    return Ranking([sorted(g) for g in groups], None)


def permanent_ties(T: Dendrogram | AbstractDendrogram) -> list[tuple[int, int]]:
    """Vertex pairs with identical gain polynomials (tied for every prime)."""
    polys = gradient_polynomials(T)
    ids = sorted(polys)
    return [(a, b) for i, a in enumerate(ids) for b in ids[i + 1:] if not (polys[a] - polys[b]).coeffs]


def stabilization_bound(T: Dendrogram | AbstractDendrogram, e: int = 1) -> int:
    """A ``P0`` such that every prime ``p > P0`` ranks like :func:`asymptotic_ranking`.

    For each pair the difference polynomial, after dividing off its lowest
    power of ``t``, has constant term ``c0`` and no positive root below
    ``1 / (1 + max|c_i| / |c0|)``; ``t = p**(-1/e)`` is below that once
    ``p > (1 + max|c_i| / |c0|)**e``.
    """
    polys = gradient_polynomials(T)
    ids = sorted(polys)
    bound = Fraction(1)
    for i, a in enumerate(ids):
        for b in ids[i + 1:]:
            d = polys[a] - polys[b]
            if len(d.coeffs) <= 1:
                continue  # identical, or a nonzero monomial: sign never changes
            c0 = abs(d.coeffs[0])
            m = max(abs(c) for c in d.coeffs[1:])
            bound = max(bound, (1 + Fraction(m, c0)) ** e)
    return math.ceil(bound)


def minimal_stabilization_prime(T: Dendrogram | AbstractDendrogram, e: int = 1) -> int:
    """Smallest prime from which on all rankings equal the asymptotic one
    (exact check of every prime up to the root bound)."""
    target = asymptotic_ranking(T).groups
    bound = stabilization_bound(T, e)
    answer = next_prime(bound)
    p = bound
    while p >= 2:
        if is_prime(p):
            if p_ranking(T, p, e).groups != target:
                break
            answer = p
        p -= 1
    return answer


@dataclass
class RankingTable:
    rankings: list[Ranking]
    labels: dict[int, str] = field(default_factory=dict)
    discrepancies: list[dict] = field(default_factory=list)
    bound: int | None = None

    def name(self, vid: int) -> str:
        return self.labels.get(vid, f"v{vid}")

    def render(self, only_labeled: bool = False) -> str:
        lines = []
        for r in self.rankings:
            lines.append(f"p = {r.prime}")
            lines.append(f"{'rank':>5}  {'vertex':<8} delta")
            for i, g in enumerate(r.groups, 1):
                if only_labeled:
                    g = [v for v in g if v in self.labels]
                    if not g:
                        continue
                for j, v in enumerate(g):
                    rank = f"{i}." if j == 0 else ""
                    lines.append(f"{rank:>5}  {self.name(v):<8} {r.deltas[v].exact_str()}")
            lines.append("")
        for d in self.discrepancies:
            lines.append(
                f"note: p={d['prime']} vertex {d['vertex']}: recomputed {d['recomputed']}, "
                f"reference {d['reference']}"
            )
        if self.bound is not None:
            lines.append(f"rankings are constant for all primes > {self.bound}")
        return "\n".join(lines).rstrip() + "\n"

    def to_json(self) -> dict:
        out = {"tables": [r.to_json() for r in self.rankings],
               "discrepancies": self.discrepancies}
        if self.labels:
            out["labels"] = {str(k): v for k, v in sorted(self.labels.items())}
        if self.bound is not None:
            out["stabilization_bound"] = self.bound
        return out


def ranking_table(T: Dendrogram | AbstractDendrogram, primes: Sequence[int], e: int = 1,
                  labels: Mapping[int, str] | None = None,
                  reference: Mapping[int, Mapping[int, Fraction]] | None = None) -> RankingTable:
    """One ranking per prime.  ``reference[p][vid]`` values that disagree with
    the recomputed gains are reported as discrepancies."""
    rankings = [p_ranking(T, p, e) for p in primes]
    table = RankingTable(rankings, dict(labels or {}), bound=stabilization_bound(T, e))
    for r in rankings:
        for vid, expected in (reference or {}).get(r.prime, {}).items():
            got = r.deltas[vid]
            exact = got.to_fraction() if e == 1 else None
            if exact is None or exact != Fraction(expected):
                table.discrepancies.append({
                    "prime": r.prime, "vertex": table.name(vid),
                    "recomputed": got.exact_str(), "reference": str(expected),
                })
    return table
