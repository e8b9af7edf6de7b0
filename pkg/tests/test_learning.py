import random
from fractions import Fraction

import pytest

from helpers import int_distance, pick, random_learning_scenario
from padic_classify import fixtures
from padic_classify.centers import brute_force_centers
from padic_classify.dendrogram import synthesize
from padic_classify.energy import EnergyValue, compare
from padic_classify.learning import (
    INFINITY, Classification, Classifier, LearningError, adaptive_learn, candidate_clusters,
    classification_map, learn, nearest_center_vertex, verify_classifier,
)
from padic_classify.padic import (
    FieldMismatchError, FieldParams, NormValue, distance, encode_integer, parse_value,
)

F2 = FieldParams(2)


def ints(ns, F=F2):
    return [encode_integer(n, F) for n in ns]


def energy_of(values):
    F = values[0].field
    if len(values) < 2:
        return EnergyValue.zero(F)
    mu = max(distance(a, b) for a in values for b in values)
    return EnergyValue.term(F, mu.exponent, len(values) - 1)


def test_classification_map():
    X, clusters, _, _ = fixtures.far_point_scenario()
    CL = Classification(X, clusters)
    assert classification_map(CL, X[0]) == {0, 1}
    assert classification_map(CL, INFINITY) == {INFINITY}
    with pytest.raises(LearningError):
        classification_map(CL, encode_integer(99, F2))


def test_classification_validation():
    X = ints([0, 1, 2])
    with pytest.raises(LearningError):
        Classification(X, [{0, 1}])
    with pytest.raises(LearningError):
        Classification(X, [{0, 1}, {1, 2}])
    with pytest.raises(LearningError):
        Classification(ints([0, 0]), [{0}, {1}])


def test_nearest_center_vertex_examples():
    X = ints([0, 1])
    near = nearest_center_vertex(X, encode_integer(3, F2))
    assert near.m_y == NormValue(1) and near.centers == (1,)
    near = nearest_center_vertex(X, X[0])
    assert near.m_y.is_zero and near.centers == (0,)
    A, _, centers, y = fixtures.far_point_scenario()
    near = nearest_center_vertex([A[i] for i in centers], y)
    assert near.m_y == NormValue(0) and near.centers == (0, 1)
    with pytest.raises(LearningError):
        nearest_center_vertex([], y)


def test_candidate_clusters_against_integer_oracle():
    rng = random.Random(61)
    for _ in range(100):
        p = rng.choice([2, 3, 5])
        F = FieldParams(p)
        ns = rng.sample(range(200), rng.randint(4, 12))
        CL = Classification(ints(ns, F), [set(c) for c in _partition(rng, len(ns))])
        centers = [rng.choice(sorted(C)) for C in CL.clusters]
        y = rng.choice([m for m in range(400) if m not in ns])
        dy = [int_distance(y, ns[a], p) for a in centers]
        expected = [i for i, d in enumerate(dy) if d == min(dy)]
        assert candidate_clusters(CL, centers, encode_integer(y, F)) == expected


def _partition(rng, n):
    labels = [rng.randrange(max(1, n // 2)) for _ in range(n)]
    return [{i for i in range(n) if labels[i] == b} for b in sorted(set(labels))]


def test_candidate_clusters_rejects_bad_centers():
    CL = Classification(ints([0, 1, 2]), [{0, 1}, {2}])
    with pytest.raises(LearningError):
        candidate_clusters(CL, [2, 0], encode_integer(5, F2))
    with pytest.raises(LearningError):
        candidate_clusters(CL, [0], encode_integer(5, F2))


def test_far_point_founds_new_cluster():
    X, clusters, centers, y = fixtures.far_point_scenario()
    CL = Classification(X, clusters)
    LF = learn(CL, centers, [y])
    assert LF.clusters == [frozenset({0, 1}), frozenset({2}), frozenset({3})]
    assert LF.log[0].case == "new-no-competitor"
    check = verify_classifier(LF, CL)
    assert check.ok and check.phi == {0: 0, 1: 1, "inf": 3} and not check.saturated


def test_unique_nearest_joins():
    CL = Classification(ints([0, 1]), [{0}, {1}])
    LF = learn(CL, [0, 1], [encode_integer(3, F2)])
    assert LF.clusters == [frozenset({0}), frozenset({1, 2})]
    assert LF.log[0].case == "unique-nearest"


def test_empty_update_is_identity():
    CL = Classification(ints([0, 1, 2]), [{0, 2}, {1}])
    LF = learn(CL, [0, 1], [])
    check = verify_classifier(LF, CL)
    assert check.ok and check.saturated and check.phi == {0: 0, 1: 1, "inf": 2}
    assert LF.all_clusters[-1] == {INFINITY}


def test_learn_rejects_bad_updates():
    CL = Classification(ints([0, 1]), [{0}, {1}])
    with pytest.raises(LearningError):
        learn(CL, [0, 1], [encode_integer(1, F2)])
    with pytest.raises(FieldMismatchError):
        learn(CL, [0, 1], [encode_integer(5, FieldParams(3))])


def test_energy_tie_founds_new_cluster():
    # y = 3 is at distance 1 from both centers 0 and 1 (p = 3), whose
    # clusters have equal energy after adding y
    F = FieldParams(3)
    CL = Classification(ints([0, 1], F), [{0}, {1}])
    LF = learn(CL, [0, 1], [encode_integer(2, F)])
    assert LF.log[0].case == "new-energy-tie"
    assert LF.clusters[-1] == {2}


def test_verify_rejects_merged_clusters():
    CL = Classification(ints([0, 1, 2]), [{0}, {1}, {2}])
    merged = Classifier(CL.data, [frozenset({0, 1}), frozenset({2})], [0, 2], CL)
    assert not verify_classifier(merged, CL).ok
    split = Classifier(CL.data, [frozenset({0}), frozenset({1}), frozenset({2})], [0, 1, 2], CL)
    assert not verify_classifier(split, Classification(CL.data, [{0, 1}, {2}])).ok


def test_choice_among_competitors_is_energy_minimal():
    rng = random.Random(62)
    for _ in range(100):
        CL, choices, Y = random_learning_scenario(rng)
        LF = learn(CL, pick(rng, choices), Y)
        assert verify_classifier(LF, CL).ok
        for rec in LF.log:
            if rec.case == "least-energy":
                chosen = rec.energies[rec.cluster]
                assert all(compare(chosen, e) < 0 for c, e in rec.energies.items() if c != rec.cluster)


def test_competitor_filter_can_miss_the_cheapest_candidate():
    F = FieldParams(5)
    X = [parse_value(w, F) for w in ["32", "0", "043104", "3", "0004"]]
    CL = Classification(X, [{0, 3}, {1, 4}, {2}])
    y = parse_value("2", F)
    LF = learn(CL, [3, 4, 2], [y])
    rec = LF.log[0]
    assert rec.candidates == [0, 1, 2] and rec.competitors == [0]
    assert rec.cluster == 0
    joined = energy_of([X[0], X[3], y])
    cheaper = energy_of([X[2], y])
    assert compare(cheaper, joined) < 0


def test_representative_independence_on_disk_clusters():
    rng = random.Random(63)
    for _ in range(100):
        CL, choices, Y = random_learning_scenario(rng)
        outcomes = {frozenset(learn(CL, pick(rng, choices), Y).clusters) for _ in range(4)}
        assert len(outcomes) == 1


def test_adaptive_with_large_threshold_equals_learn():
    rng = random.Random(64)
    for _ in range(30):
        CL, choices, Y = random_learning_scenario(rng)
        A = pick(rng, choices)
        assert adaptive_learn(CL, A, Y, 10**6).clusters == learn(CL, A, Y).clusters


def test_adaptive_zero_threshold_splits_pairs():
    CL = Classification(ints([0, 1]), [{0}, {1}])
    LF = adaptive_learn(CL, [0, 1], [encode_integer(3, F2)], 0)
    assert LF.clusters == [frozenset({0}), frozenset({1}), frozenset({2})]
    assert LF.centers == [0, 1, 2]
    assert LF.log[0].split_into == [1, 2]
    with pytest.raises(ValueError):
        adaptive_learn(CL, [0, 1], [], -1)


def test_adaptive_split_keeps_center_of_its_piece():
    X = synthesize(fixtures.tree("four-point"), F2)
    a, b, c, d = X
    CL = Classification([a, b, c], [{0, 1, 2}])
    assert 0 in brute_force_centers([a, b, c])
    LF = adaptive_learn(CL, [0], [d], 1)
    assert LF.clusters == [frozenset({0, 1}), frozenset({2, 3})]
    assert LF.centers[0] == 0 and LF.centers[1] in {2, 3}
    assert verify_classifier(LF, LF.model).ok


def test_adaptive_retained_centers_are_centers():
    rng = random.Random(65)
    splits = 0
    for _ in range(100):
        CL, choices, Y = random_learning_scenario(rng)
        r = Fraction(rng.choice([0, 1, 2, 5]))
        LF = adaptive_learn(CL, pick(rng, choices), Y, r)
        assert verify_classifier(LF, LF.model).ok
        for rec in LF.log:
            splits += bool(rec.split_into)
        for C, a in zip(LF.clusters, LF.centers):
            assert a in C
    assert splits > 50
    # retained centers, checked step by step through the internal state
    from padic_classify.learning import _State
    rng = random.Random(66)
    for _ in range(100):
        CL, choices, Y = random_learning_scenario(rng)
        st = _State(CL, pick(rng, choices))
        for y in Y:
            rec = st.step(y)
            if compare(st.energy(rec.cluster), 0) > 0:
                old = st.centers[rec.cluster]
                still_center = old in brute_force_centers(st.Z, st.clusters[rec.cluster])
                pieces = st.split(rec.cluster)
                if still_center:
                    assert st.centers[pieces[0]] == old
                    assert old in brute_force_centers(st.Z, st.clusters[pieces[0]])
