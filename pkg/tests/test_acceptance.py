"""Acceptance criteria, one test (and one printed PASS/FAIL line) each.

Random samples use fixed seeds so that reruns are reproducible.
"""

import random
import time
from fractions import Fraction

import pytest

from helpers import (
    FIELD_CONFIGS, pick, random_dataset, random_learning_scenario, random_partition,
    random_refinement, random_tree, random_word,
)
from padic_classify import fixtures
from padic_classify.centers import brute_force_centers, center_candidates, epsilon_energy
from padic_classify.clustering import exhaustive_minimum, improving_splits, quasi_verticial_clustering, verticial_clustering
from padic_classify.dendrogram import build, synthesize
from padic_classify.energy import (
    EnergyValue, clustering_energy, compare, family_energy, is_refinement, vertex_energy,
)
from padic_classify.learning import learn, verify_classifier
from padic_classify.padic import FieldParams, distance, is_prime
from padic_classify.pranking import asymptotic_ranking, p_ranking, ranking_table, stabilization_bound

THIRTEEN = fixtures.tree("thirteen")
NAMES = fixtures.THIRTEEN_LABELS


@pytest.fixture
def report(capsys):
    def emit(label, ok, seconds, detail=""):
        line = f"{'PASS' if ok else 'FAIL'}  {label}  ({seconds:.2f} s){'  ' + detail if detail else ''}"
        with capsys.disabled():
            print("\n" + line, flush=True)
        return ok
    return emit


def timed(fn):
    start = time.perf_counter()
    ok, detail = fn()
    return ok, time.perf_counter() - start, detail


def labeled_orders(prime):
    groups = p_ranking(THIRTEEN, prime).restricted(list(NAMES))
    return [[NAMES[v] for v in g] for g in groups]


# -- 1 ----------------------------------------------------------------------

def criterion_1():
    got = {p: labeled_orders(p) for p in (2, 3, 5)}
    want = {2: [["a"], ["c"], ["b", "d"]], 3: [["a"], ["c"], ["b"], ["d"]], 5: [["a"], ["c"], ["b"], ["d"]]}
    return got == want, str(got)


def test_criterion_1_rank_orders(report):
    ok, secs, detail = timed(criterion_1)
    assert report("1  ranking orders for the 13-point tree at p = 2, 3, 5", ok and secs < 1, secs, detail)


# -- 2 ----------------------------------------------------------------------

def criterion_2():
    table = ranking_table(THIRTEEN, [2, 3, 5], labels=NAMES, reference=fixtures.THIRTEEN_PRINTED)
    by_prime = {r.prime: {v: r.deltas[v].to_fraction() for v in NAMES} for r in table.rankings}
    a, b, c, d = 0, 1, 4, 6
    verified = (by_prime[2][c] == Fraction(9, 4) and by_prime[3][c] == Fraction(17, 9)
                and by_prime[3][b] == Fraction(7, 9) and by_prime[5][b] == Fraction(13, 25))
    recomputed = all(
        by_prime[p][a] == 12 - Fraction(11, p)
        and by_prime[p][b] == Fraction(3, p) - Fraction(2, p ** 2)
        and by_prime[p][d] == Fraction(6, p ** 2) - Fraction(4, p ** 3)
        and by_prime[p][c] == Fraction(8, p) - Fraction(7, p ** 2)
        for p in (2, 3, 5)
    )
    # every printed cell that differs from the recomputation must be annotated
    mismatched = {(p, NAMES[v]) for p, cells in fixtures.THIRTEEN_PRINTED.items()
                  for v, x in cells.items() if by_prime[p][v] != x}
    annotated = {(d["prime"], d["vertex"]) for d in table.discrepancies}
    return verified and recomputed and mismatched == annotated, f"{len(annotated)} printed cells annotated"


def test_criterion_2_table_cells(report):
    ok, secs, detail = timed(criterion_2)
    assert report("2  verified gain cells and recomputed remainder", ok, secs, detail)


# -- 3 ----------------------------------------------------------------------

def criterion_3():
    ok = True
    for p in (2, 3, 5, 7):
        F = FieldParams(p)
        left = fixtures.tree("four-point").as_dendrogram(F)
        right = fixtures.tree("three-point-sub").as_dendrogram(F)
        ok &= center_candidates(left, range(4)).candidates == {0, 1}
        # right tree leaves are a, c, d
        ok &= center_candidates(right, range(3)).candidates == {1, 2}
        eps_a = epsilon_energy(left, range(4), 0)
        eps_c = epsilon_energy(left, range(4), 2)
        ok &= eps_a == EnergyValue(F, {2: 1, 0: 2}) and eps_c == EnergyValue(F, {1: 1, 0: 2})
        ok &= compare(eps_a, eps_c) < 0
        sub_c, sub_a = epsilon_energy(right, range(3), 1), epsilon_energy(right, range(3), 0)
        ok &= sub_c == EnergyValue(F, {0: 1, 1: 1}) and sub_a == 2 and compare(sub_c, sub_a) < 0
    return ok, ""


def test_criterion_3_four_point_centers(report):
    ok, secs, detail = timed(criterion_3)
    assert report("3  four-point centers and epsilon comparisons", ok and secs < 1, secs, detail)


# -- 4 ----------------------------------------------------------------------

def criterion_4():
    ok = True
    for p in (2, 3, 5):
        F = FieldParams(p)
        D = fixtures.tree("quasi-singleton").as_dendrogram(F)
        eps = EnergyValue.term(F, 1)
        ab, cd = D.root.children
        ok &= compare(vertex_energy(ab), eps) < 0 and not compare(vertex_energy(cd), eps) < 0
        fam = quasi_verticial_clustering(D, 2, eps)
        ok &= all([n.members for n in m.remnants] == [(0, 1)] for m in fam.members)
    return ok, ""


def test_criterion_4_quasi_singleton(report):
    ok, secs, detail = timed(criterion_4)
    assert report("4  quasi-singleton removed as a remnant", ok and secs < 1, secs, detail)


# -- 5 ----------------------------------------------------------------------

BUDGET = {"total": 0.0}


def _run5(report, label, fn):
    ok, secs, detail = timed(fn)
    BUDGET["total"] += secs
    return report(label, ok, secs, detail)


def c5a():
    bad = 0
    for F in FIELD_CONFIGS:
        rng = random.Random(500 + F.p * 10 + F.e + F.f)
        for _ in range(10_000):
            x, y, z = (random_word(rng, F) for _ in range(3))
            dxy, dyz, dxz = distance(x, y), distance(y, z), distance(x, z)
            bad += dxz > max(dxy, dyz)
            bad += dxy != dyz and dxz != max(dxy, dyz)
    return bad == 0, f"{len(FIELD_CONFIGS)} configs x 10^4 triples, {bad} violations"


def c5b():
    rng = random.Random(501)
    bad = 0
    for _ in range(200):
        T = random_tree(rng, max_internal=20)
        F = FieldParams(rng.choice([3, 5]))
        X = synthesize(T, F)
        D = build(X)
        bad += D.to_abstract().shape_key() != T.shape_key()
        Y = X[:]
        rng.shuffle(Y)
        E = build(Y)
        bad += E.labeled_key() != D.labeled_key()
    return bad == 0, f"{bad} failures in 200 trees"


def c5c():
    rng = random.Random(502)
    bad = 0
    for _ in range(200):
        F = rng.choice([FieldParams(2), FieldParams(3), FieldParams(2, 2)])
        X = random_dataset(rng, F, rng.randint(2, 32))
        D = build(X)
        for v in D.vertices:
            bad += compare(family_energy(v.children, F), vertex_energy(v)) >= 0
        coarse = random_partition(rng, range(len(X)), rng.randint(1, max(1, len(X) // 2)))
        if all(len(C) == 1 for C in coarse):
            coarse = [frozenset(range(len(X)))]
        fine = random_refinement(rng, coarse)
        bad += not is_refinement(fine, coarse)
        bad += compare(clustering_energy(fine, D), clustering_energy(coarse, D)) >= 0
    return bad == 0, f"{bad} failures in 200 pairs"


def c5d():
    rng = random.Random(503)
    misses = []
    for i in range(200):
        p = (2, 3, 5)[i % 3]
        while True:
            T = random_tree(rng, max_internal=20, max_children=min(p, 3))
            if T.n_leaves <= 64:
                break
        X = synthesize(T, FieldParams(p))
        D = build(X)
        C = rng.choice(D.vertices).members
        got = center_candidates(D, C).candidates
        if got != brute_force_centers(X, C):
            misses.append((p, str(T), sorted(C)))
    return not misses, f"{len(misses)} of 200 clusters disagree" + (f"; first: {misses[0]}" if misses else "")


def c5e():
    rng = random.Random(504)
    bad = []
    for _ in range(100):
        T = random_tree(rng, max_internal=20, max_children=2)
        found = {p: brute_force_centers(synthesize(T, FieldParams(p))) for p in (2, 3, 5, 7, 11)}
        if len(set(found.values())) > 1:
            bad.append(str(T))
    return not bad, f"{len(bad)} of 100 trees have prime-dependent centers"


def c5f():
    rng = random.Random(505)
    bad = 0
    for _ in range(100):
        T = random_tree(rng, max_internal=20)
        target = asymptotic_ranking(T).groups
        p, seen = stabilization_bound(T), 0
        while seen < 5:
            p += 1
            if is_prime(p):
                seen += 1
                bad += p_ranking(T, p).groups != target
    return bad == 0, f"{bad} mismatching rankings"


def c5g():
    rng = random.Random(506)
    bad = gaps = small = 0
    for _ in range(100):
        F = rng.choice([FieldParams(2), FieldParams(3), FieldParams(2, 2)])
        n = rng.randint(2, 24)
        D = build(random_dataset(rng, F, n))
        k = rng.randint(1, 8)
        fam = verticial_clustering(D, k)
        if fam.trivial:
            continue
        for m in fam.members:
            bad += bool(improving_splits(m.nodes, k))
        if n <= 10:
            small += 1
            opt, _ = exhaustive_minimum(D, k)
            gaps += compare(fam.energy, opt) > 0
    return bad == 0, f"local minimality violations {bad}; greedy above optimum on {gaps} of {small} small instances"


def c5h():
    rng = random.Random(507)
    not_optimal = dependent = unverified = 0
    for _ in range(100):
        CL, choices, Y = random_learning_scenario(rng)
        A = pick(rng, choices)
        LF = learn(CL, A, Y)
        unverified += not verify_classifier(LF, CL).ok
        clusters = [set(C) for C in CL.clusters]
        centers = list(A)
        step_ok = True
        for rec in LF.log:
            y = LF.data[rec.datum]
            d = [distance(y, LF.data[a]) for a in centers]
            cands = [i for i, x in enumerate(d) if x == min(d)]
            if rec.cluster < len(clusters):
                chosen = _energy([LF.data[i] for i in clusters[rec.cluster]] + [y])
                for c in cands:
                    if compare(_energy([LF.data[i] for i in clusters[c]] + [y]), chosen) < 0:
                        step_ok = False
                clusters[rec.cluster].add(rec.datum)
            else:
                clusters.append({rec.datum})
                centers.append(rec.datum)
        not_optimal += not step_ok
        outcomes = {frozenset(learn(CL, pick(rng, choices), Y).clusters) for _ in range(3)}
        dependent += len(outcomes | {frozenset(LF.clusters)}) > 1
    ok = not (not_optimal or dependent or unverified)
    return ok, (f"scenarios with a non-minimal step {not_optimal}/100; representative-dependent "
                f"{dependent}/100; unverified {unverified}/100")


def _energy(values):
    F = values[0].field
    if len(values) < 2:
        return EnergyValue.zero(F)
    mu = max(distance(a, b) for a in values for b in values)
    return EnergyValue.term(F, mu.exponent, len(values) - 1)


def c5i():
    rng = random.Random(508)
    bad = 0
    for _ in range(100):
        F = rng.choice([FieldParams(2), FieldParams(3), FieldParams(5)])
        X = random_dataset(rng, F, rng.randint(3, 32))
        D = build(X)
        C = rng.choice(D.vertices).members
        a = rng.choice(sorted(brute_force_centers(X, C)))
        subs = [v.members for v in D.restricted(C).vertices if a in v.members]
        sub = rng.choice(subs + [(a,)])
        bad += a not in brute_force_centers(X, sub)
    return bad == 0, f"{bad} of 100 triples"


CRITERION_5 = [
    ("5a ultrametric and isosceles triangles", c5a),
    ("5b dendrogram uniqueness and round trip", c5b),
    ("5c split never raises energy; refinements lower it", c5c),
    ("5d branch descent equals brute-force centers", c5d),
    ("5e brute-force centers independent of the prime", c5e),
    ("5f rankings above the bound equal the asymptotic ranking", c5f),
    ("5g greedy clustering is locally minimal (gap reported)", c5g),
    ("5h learning: per-step optimality, representative independence, valid classifier", c5h),
    ("5i subcluster keeps its center", c5i),
]


@pytest.mark.parametrize("label,fn", CRITERION_5, ids=[c[0].split()[0] for c in CRITERION_5])
def test_criterion_5_properties(report, label, fn):
    assert _run5(report, label, fn)


def test_criterion_5_runtime(report):
    total = BUDGET["total"]
    assert report("5  total property runtime under 60 s", total < 60, total, f"{total:.1f} s")
