"""Named example trees and datasets used by the CLI, tests and docs."""

from __future__ import annotations

from fractions import Fraction

from .dendrogram import AbstractDendrogram, parse_tree
from .padic import FieldParams, PAdicValue, encode_integer

TREES = {
    # a, then {b, c} one level down
    "pair-and-single": "(0 L (1 L L))",
    # three ends at the root; needs p >= 3
    "three-ends": "(0 L L L)",
    # {a, b} deep at level 4, {c, d} at level 1
    "quasi-singleton": "(0 (4 L L) (1 L L))",
    # thirteen ends; labeled vertices a=0, b=1, c=4, d=6
    "thirteen": "(0 (1 (2 L L) (2 L L)) (1 (2 L L) (2 (3 L L) (3 L L) (3 L L L))))",
    # {a, b} at level 2 and {c, d} at level 1
    "four-point": "(0 (2 L L) (1 L L))",
    # a, then {c, d} at level 1
    "three-point-sub": "(0 L (1 L L))",
}

THIRTEEN_LABELS = {0: "a", 1: "b", 4: "c", 6: "d"}

# Gains as printed in the published ranking table, keyed by prime and vertex id.
THIRTEEN_PRINTED = {
    2: {0: Fraction(11, 2), 4: Fraction(9, 4), 1: Fraction(2), 6: Fraction(2)},
    3: {0: Fraction(22, 3), 4: Fraction(17, 9), 1: Fraction(7, 9), 6: Fraction(16, 27)},
    5: {0: Fraction(44, 5), 4: Fraction(44, 25), 1: Fraction(13, 25), 6: Fraction(26, 225)},
}

# Rank orders of the labeled vertices in the same table.
THIRTEEN_ORDERS = {
    2: [["a"], ["c"], ["b", "d"]],
    3: [["a"], ["c"], ["b"], ["d"]],
    5: [["a"], ["c"], ["b"], ["d"]],
}


def tree(name: str) -> AbstractDendrogram:
    try:
        return parse_tree(TREES[name])
    except KeyError:
        raise KeyError(f"unknown fixture {name!r}; known: {', '.join(sorted(TREES))}") from None


def far_point_scenario(p: int = 2) -> tuple[list[PAdicValue], list[set[int]], list[int], PAdicValue]:
    """Training set {a, b, c} clustered as {a, b}, {c} and a new point
    farther from all of them than their diameter."""
    F = FieldParams(p)
    X = [encode_integer(n, F) for n in (0, p * p, p)]
    y = encode_integer(1, F)
    return X, [{0, 1}, {2}], [0, 2], y
