"""Sequential learning of new data on top of a training classification.

Each new datum ``y`` looks at its distance to the cluster representatives.
If one representative is strictly nearest, ``y`` joins that cluster.  If
several tie, only those whose nearest fellow tied representative is as far
as ``y`` compete, and ``y`` joins the one whose enlarged cluster has the
least energy; ``y`` founds its own cluster when nobody competes or the
minimum is not unique.  The adaptive variant splits a freshly enlarged
cluster into its maximal proper subclusters whenever its energy exceeds a
threshold.

The point at infinity is the index ``INFINITY`` (-1) in clusterings of
``P(Z) = Z + {inf}``; it always forms the residue cluster on its own.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .centers import brute_force_centers, center_candidates
from .dendrogram import build
from .energy import EnergyValue, compare
from .padic import FieldMismatchError, NormValue, PAdicValue, ZERO, distance

INFINITY = -1

Threshold = Union[EnergyValue, Fraction, int]


class LearningError(ValueError):
    pass


@dataclass
class Classification:
    """A dataset with a partition of its indices."""

    data: list[PAdicValue]
    clusters: list[frozenset[int]]

    def __post_init__(self):
        self.data = list(self.data)
        self.clusters = [frozenset(C) for C in self.clusters]
        if len(set(self.data)) != len(self.data):
            raise LearningError("training data contain duplicates")
        if self.data and any(x.field != self.data[0].field for x in self.data):
            raise FieldMismatchError("training data mix fields")
        seen: set[int] = set()
        for C in self.clusters:
            if not C or seen & C:
                raise LearningError("clusters must be nonempty and disjoint")
            seen |= C
        if seen != set(range(len(self.data))):
            raise LearningError("clusters do not partition the data")

    def cluster_of(self, index: int) -> int:
        for pos, C in enumerate(self.clusters):
            if index in C:
                return pos
        raise LearningError(f"unknown datum {index}")


def classification_map(CL: Classification, x: PAdicValue | int) -> frozenset[int]:
    """The cluster containing ``x``; the point at infinity maps to ``{inf}``."""
    if isinstance(x, int) and x == INFINITY:
        return frozenset({INFINITY})
    try:
        index = CL.data.index(x)
    except ValueError:
        raise LearningError(f"{x!r} is not in the classification") from None
    return CL.clusters[CL.cluster_of(index)]


@dataclass(frozen=True)
class NearestCenters:
    m_y: NormValue
    centers: tuple[int, ...]

    @property
    def level(self) -> int | None:
        """Level of the vertex at which the nearest centers branch off."""
        return self.m_y.exponent


def nearest_center_vertex(A: Sequence[PAdicValue], y: PAdicValue) -> NearestCenters:
    """Minimal distance from ``y`` to ``A`` and the positions in ``A`` attaining it."""
    if not A:
        raise LearningError("center set is empty")
    dists = [distance(y, a) for a in A]
    m = min(dists)
    return NearestCenters(m, tuple(i for i, d in enumerate(dists) if d == m))


def _validate_centers(CL: Classification, centers: Sequence[int]) -> list[int]:
    centers = list(centers)
    if len(centers) != len(CL.clusters):
        raise LearningError("exactly one center per cluster is required")
    for C, a in zip(CL.clusters, centers):
        if a not in C:
            raise LearningError(f"center {a} is not in its cluster")
    return centers


def candidate_clusters(CL: Classification, centers: Sequence[int], y: PAdicValue) -> list[int]:
    """Positions of the clusters whose center is nearest to ``y``."""
    centers = _validate_centers(CL, centers)
    near = nearest_center_vertex([CL.data[a] for a in centers], y)
    return list(near.centers)


@dataclass
class StepRecord:
    datum: int
    case: str
    m_y: NormValue
    candidates: list[int]
    competitors: list[int]
    energies: dict[int, EnergyValue]
    cluster: int
    split_into: list[int] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "datum": self.datum,
            "case": self.case,
            "m_y_level": self.m_y.exponent,
            "candidates": self.candidates,
            "competitors": self.competitors,
            "energies": {str(k): v.to_json() for k, v in self.energies.items()},
            "cluster": self.cluster,
            "split_into": self.split_into,
        }


@dataclass
class Classifier:
    """Clustering of ``P(Z)`` built on top of a model classification."""

    data: list[PAdicValue]
    clusters: list[frozenset[int]]
    centers: list[int]
    model: Classification
    log: list[StepRecord] = field(default_factory=list)
    residue: frozenset[int] = frozenset({INFINITY})

    @property
    def all_clusters(self) -> list[frozenset[int]]:
        """Clusters of ``P(Z)``, the residue last."""
        return self.clusters + [self.residue]

    def label(self, index: int) -> int:
        """Position (in :attr:`all_clusters`) of the cluster containing ``index``."""
        for pos, C in enumerate(self.all_clusters):
            if index in C:
                return pos
        raise LearningError(f"unknown datum {index}")

    def classification(self) -> Classification:
        return Classification(self.data, self.clusters)


@dataclass(frozen=True)
class Verification:
    ok: bool
    phi: dict | None = None
    saturated: bool = False
    reason: str = ""


def verify_classifier(LF: Classifier, CL: Classification) -> Verification:
    """Find the unique injective ``phi`` with ``lambda o iota = phi o kappa``."""
    where = {x: i for i, x in enumerate(LF.data)}
    labels = {i: LF.label(i) for i in range(len(LF.data))}
    labels[INFINITY] = LF.label(INFINITY)
    phi: dict = {}
    for pos, C in enumerate(CL.clusters):
        targets = set()
        for i in C:
            z = where.get(CL.data[i])
            if z is None:
                return Verification(False, reason=f"training datum {i} missing")
            targets.add(labels[z])
        if len(targets) != 1:
            return Verification(False, reason=f"training cluster {pos} is split")
        phi[pos] = targets.pop()
    phi["inf"] = labels[INFINITY]
    if len(set(phi.values())) != len(phi):
        return Verification(False, reason="phi is not injective")
    saturated = len(phi) == len(LF.all_clusters)
    return Verification(True, phi, saturated)


def _diameter_with(Z, C, y_index, current: NormValue) -> NormValue:
    far = max(distance(Z[x], Z[y_index]) for x in C)
    return max(current, far)


def _cluster_energy(field, size: int, mu: NormValue) -> EnergyValue:
    if size < 2 or mu.is_zero:
        return EnergyValue.zero(field)
    return EnergyValue.term(field, mu.exponent, size - 1)


class _State:
    def __init__(self, CL: Classification, centers: Sequence[int]):
        self.Z = list(CL.data)
        self.index = {x: i for i, x in enumerate(self.Z)}
        self.clusters = [set(C) for C in CL.clusters]
        self.centers = _validate_centers(CL, centers)
        self.mu = [max((distance(self.Z[a], self.Z[b]) for a in C for b in C), default=ZERO)
                   for C in self.clusters]
        self.field = self.Z[0].field if self.Z else None

    def add(self, y: PAdicValue) -> int:
        if self.field is not None and y.field != self.field:
            raise FieldMismatchError("new datum belongs to another field")
        if y in self.index:
            raise LearningError(f"datum {y!r} duplicates an existing datum")
        self.field = y.field
        j = len(self.Z)
        self.Z.append(y)
        self.index[y] = j
        return j

    def step(self, y: PAdicValue) -> StepRecord:
        j = self.add(y)
        if not self.centers:
            return self._found(j, "new-no-clusters", ZERO, [], [], {})
        near = nearest_center_vertex([self.Z[a] for a in self.centers], y)
        m, cands = near.m_y, list(near.centers)
        if len(cands) == 1:
            return self._join(j, cands[0], "unique-nearest", m, cands, cands, {})
        competitors = []
        for pos in cands:
            a = self.Z[self.centers[pos]]
            nearest = min(distance(a, self.Z[self.centers[q]]) for q in cands if q != pos)
            if nearest == m:
                competitors.append(pos)
        if not competitors:
            return self._found(j, "new-no-competitor", m, cands, competitors, {})
        energies = {}
        for pos in competitors:
            mu = _diameter_with(self.Z, self.clusters[pos], j, self.mu[pos])
            energies[pos] = _cluster_energy(self.field, len(self.clusters[pos]) + 1, mu)
        best = min(energies.values())
        winners = [pos for pos, e in energies.items() if compare(e, best) == 0]
        if len(winners) > 1:
            return self._found(j, "new-energy-tie", m, cands, competitors, energies)
        return self._join(j, winners[0], "least-energy", m, cands, competitors, energies)

    def _join(self, j, pos, case, m, cands, competitors, energies) -> StepRecord:
        self.mu[pos] = _diameter_with(self.Z, self.clusters[pos], j, self.mu[pos])
        self.clusters[pos].add(j)
        return StepRecord(j, case, m, cands, competitors, energies, pos)

    def _found(self, j, case, m, cands, competitors, energies) -> StepRecord:
        self.clusters.append({j})
        self.centers.append(j)
        self.mu.append(ZERO)
        return StepRecord(j, case, m, cands, competitors, energies, len(self.clusters) - 1)

    def energy(self, pos: int) -> EnergyValue:
        return _cluster_energy(self.field, len(self.clusters[pos]), self.mu[pos])

    def split(self, pos: int) -> list[int]:
        """Replace cluster ``pos`` by its maximal proper subclusters."""
        members = sorted(self.clusters[pos])
        D = build([self.Z[i] for i in members])
        old_center = self.centers[pos]
        # The subcluster lemma needs the old center to still be a center of
        # the enlarged cluster; otherwise it is treated like any member.
        if old_center not in brute_force_centers(self.Z, members):
            old_center = None
        subs = [frozenset(members[i] for i in child.members) for child in D.root.children]
        subs.sort(key=lambda s: (self.centers[pos] not in s, min(s)))
        positions = []
        for n, sub in enumerate(subs):
            local = sorted(sub)
            Dsub = build([self.Z[i] for i in local])
            if old_center is not None and old_center in sub:
                center = old_center
            else:
                center = local[center_candidates(Dsub, range(len(local))).representative]
            mu = NormValue(Dsub.root.level) if len(local) > 1 else ZERO
            if n == 0:
                self.clusters[pos], self.centers[pos], self.mu[pos] = set(sub), center, mu
                positions.append(pos)
            else:
                self.clusters.append(set(sub))
                self.centers.append(center)
                self.mu.append(mu)
                positions.append(len(self.clusters) - 1)
        return positions


def learn(CL: Classification, centers: Sequence[int], Y: Sequence[PAdicValue]) -> Classifier:
    """Process ``Y`` in order; see the module docstring for the rule."""
    state = _State(CL, centers)
    log = [state.step(y) for y in Y]
    return Classifier(state.Z, [frozenset(C) for C in state.clusters], state.centers, CL, log)


def adaptive_learn(CL: Classification, centers: Sequence[int], Y: Sequence[PAdicValue],
                   r: Threshold) -> Classifier:
    """:func:`learn`, splitting each updated cluster whose energy exceeds ``r``.

    The old center stays the center of its piece when it is still a center
    of the enlarged cluster; other pieces get a center by branch descent.
    A split can separate training data, so the returned classifier is
    modeled on the training data as partitioned by the final clustering.
    """
    if isinstance(r, (int, Fraction)) and r < 0:
        raise ValueError("threshold must be nonnegative")
    state = _State(CL, centers)
    log = []
    for y in Y:
        rec = state.step(y)
        if compare(state.energy(rec.cluster), r) > 0:
            rec.split_into = state.split(rec.cluster)
        log.append(rec)
    clusters = [frozenset(C) for C in state.clusters]
    n = len(CL.data)
    model_clusters = [C & frozenset(range(n)) for C in clusters]
    model = Classification(CL.data, [C for C in model_clusters if C])
    return Classifier(state.Z, clusters, state.centers, model, log)
