"""Random instance generators and independent oracles shared by the tests."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

from padic_classify.dendrogram import AbstractDendrogram
from padic_classify.padic import FieldParams, PAdicValue

FIELD_CONFIGS = [FieldParams(2), FieldParams(3), FieldParams(5), FieldParams(2, 2),
                 FieldParams(3, 1, 2), FieldParams(2, 3)]


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def int_distance(a: int, b: int, p: int) -> Fraction:
    return Fraction(0) if a == b else Fraction(1, p ** vp(a - b, p))


def random_spec(rng: random.Random, max_internal: int = 20, max_children: int = 3,
                max_gap: int = 3):
    """A random level-labelled tree spec with at most ``max_internal`` vertices."""
    budget = [rng.randint(1, max_internal)]

    def node(level):
        budget[0] -= 1
        subs = []
        for _ in range(rng.randint(2, max_children)):
            if budget[0] > 0 and rng.random() < 0.5:
                subs.append(node(level + rng.randint(1, max_gap)))
            else:
                subs.append(0)
        return (level, subs)

    return node(rng.randint(-1, 1))


def random_tree(rng: random.Random, **kw) -> AbstractDendrogram:
    return AbstractDendrogram.from_spec(random_spec(rng, **kw))


def random_word(rng: random.Random, field: FieldParams, lo: int = -2, hi: int = 6) -> PAdicValue:
    start = rng.randint(lo, 0)
    length = rng.randint(1, hi - start)
    # low digits biased to zero so words share prefixes
    digits = tuple(rng.choice([0, 0, rng.randrange(field.q)]) for _ in range(length))
    return PAdicValue(field, start, digits)


def random_dataset(rng: random.Random, field: FieldParams, n: int) -> list[PAdicValue]:
    seen, out = set(), []
    while len(out) < n:
        x = random_word(rng, field)
        if x not in seen:
            seen.add(x)
            out.append(x)
    return out


def random_partition(rng: random.Random, items, blocks: int | None = None) -> list[frozenset]:
    items = list(items)
    rng.shuffle(items)
    blocks = blocks or rng.randint(1, len(items))
    parts = [[] for _ in range(blocks)]
    for i, x in enumerate(items):
        parts[i if i < blocks else rng.randrange(blocks)].append(x)
    return [frozenset(p) for p in parts if p]


def random_refinement(rng: random.Random, clustering) -> list[frozenset]:
    """Split at least one non-singleton block of ``clustering``."""
    splittable = [C for C in clustering if len(C) > 1]
    target = rng.choice(splittable)
    out = []
    for C in clustering:
        if C is target or (len(C) > 1 and rng.random() < 0.3):
            pieces = random_partition(rng, C, rng.randint(2, len(C)))
            out.extend(pieces)
        else:
            out.append(C)
    return out


def set_partitions(items):
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        for i in range(len(part)):
            yield part[:i] + [part[i] | {first}] + part[i + 1:]
        yield part + [frozenset({first})]


def powerset(items):
    items = list(items)
    return itertools.chain.from_iterable(itertools.combinations(items, r) for r in range(len(items) + 1))


def random_learning_scenario(rng: random.Random, max_points: int = 24):
    """Training classification (greedy verticial clusters), brute-force
    center choices and a list of new data."""
    from padic_classify.centers import brute_force_centers
    from padic_classify.clustering import verticial_clustering
    from padic_classify.learning import Classification

    F = FieldParams(rng.choice([2, 3, 5]))
    values = random_dataset(rng, F, rng.randint(8, max_points))
    n = rng.randint(4, len(values) - 2)
    X, Y = values[:n], values[n:]
    fam = verticial_clustering(X, rng.randint(1, 4))
    CL = Classification(X, [frozenset(c) for c in fam.clusterings[0]])
    centers = [sorted(brute_force_centers(X, C)) for C in CL.clusters]
    return CL, centers, Y


def pick(rng: random.Random, choices):
    return [rng.choice(c) for c in choices]
