"""Greedy energy-descending clusterings on the dendrogram.

:func:`verticial_clustering` repeatedly replaces a vertex by its children,
always choosing the replacement with the lowest resulting energy, until no
split fits the cluster budget ``k``.  :func:`quasi_verticial_clustering`
additionally sets aside quasi-singletons (clusters whose energy is below a
threshold) as remnant clusters.  :func:`split_lbg` attaches center candidates
to every resulting cluster.
"""

from __future__ import annotations

import dataclasses
import itertools
from collections.abc import Iterator, Sequence
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Union

from .centers import CenterResult, center_candidates
from .dendrogram import Dendrogram, DendrogramError, Node, Vertex, build
from .energy import EnergyDifference, EnergyValue, compare, family_energy, vertex_energy
from .padic import PAdicValue

DEFAULT_FAMILY_CAP = 16

Threshold = Union[EnergyValue, Fraction, int]


@dataclass(frozen=True)
class FamilyMember:
    nodes: tuple[Node, ...]
    remnants: tuple[Node, ...] = ()
    budget: int = 0

    @property
    def clusters(self) -> list[tuple[int, ...]]:
        out = [n.members for n in self.nodes + self.remnants]
        return sorted(out, key=lambda c: c[0])

    @property
    def energy(self) -> EnergyValue:
        """Energy of the non-remnant clusters."""
        return family_energy(self.nodes, self.nodes[0].field) if self.nodes else None

    def sort_key(self) -> tuple:
        return (tuple(sorted(n.key for n in self.nodes)),
                tuple(sorted(n.key for n in self.remnants)))


@dataclass
class ClusteringFamily:
    members: list[FamilyMember]
    energy: EnergyValue
    k: int
    trivial: bool = False
    log: list[dict] = field(default_factory=list)
    diagnostics: list[str] = field(default_factory=list)

    @property
    def clusterings(self) -> list[list[tuple[int, ...]]]:
        return [m.clusters for m in self.members]


def _as_dendrogram(X) -> Dendrogram:
    if isinstance(X, Dendrogram):
        return X
    return build(X)


def _order(nodes) -> tuple[Node, ...]:
    return tuple(sorted(nodes, key=lambda n: n.members[0]))


def _select(cands: list[tuple[EnergyValue, FamilyMember, Node]], cap: int):
    """Exact minimum energy; all minimizers, deduplicated and capped."""
    best = cands[0][0]
    for e, _, _ in cands[1:]:
        if compare(e, best) < 0:
            best = e
    chosen: dict[tuple, tuple[FamilyMember, Node]] = {}
    for e, m, v in cands:
        if compare(e, best) == 0:
            chosen.setdefault(m.sort_key(), (m, v))
    ordered = [chosen[key] for key in sorted(chosen)]
    pruned = len(ordered) > cap
    return best, ordered[:cap], pruned


def verticial_clustering(X: Dendrogram | Sequence[PAdicValue], k: int,
                         family_cap: int = DEFAULT_FAMILY_CAP) -> ClusteringFamily:
    D = _as_dendrogram(X)
    if D.n < 2:
        raise DendrogramError("at least two data points are required")
    if k < 1:
        raise ValueError("cluster budget k must be >= 1")
    root = D.root
    if len(root.children) > k:
        return ClusteringFamily(
            [FamilyMember((root,), (), k - 1)], vertex_energy(root), k, trivial=True,
            diagnostics=[f"root has {len(root.children)} children > k={k}; returning the whole dataset"],
        )
    start = _order(root.children)
    family = [FamilyMember(start, (), k - len(start))]
    energy = family_energy(start, D.field)
    log = [{"step": 1, "split": [root.id], "energy": energy}]
    diagnostics: list[str] = []
    step = 1
    while True:
        cands = []
        for m in family:
            for v in m.nodes:
                if v.is_end or len(m.nodes) - 1 + len(v.children) > k:
                    continue
                W = _order([n for n in m.nodes if n is not v] + list(v.children))
                cands.append((family_energy(W, D.field), FamilyMember(W, (), k - len(W)), v))
        if not cands:
            break
        step += 1
        energy, chosen, pruned = _select(cands, family_cap)
        if pruned:
            diagnostics.append(f"step {step}: family capped at {family_cap}")
        family = [m for m, _ in chosen]
        log.append({"step": step, "split": sorted({v.id for _, v in chosen}), "energy": energy})
    return ClusteringFamily(family, energy, k, log=log, diagnostics=diagnostics)


def is_quasi_singleton(node: Node, epsilon: Threshold) -> bool:
    return compare(vertex_energy(node), epsilon) < 0


def quasi_verticial_clustering(X: Dendrogram | Sequence[PAdicValue], k: int, epsilon: Threshold,
                               family_cap: int = DEFAULT_FAMILY_CAP) -> ClusteringFamily:
    """Like :func:`verticial_clustering`, but children that are quasi-singletons
    for ``epsilon`` are split off as remnant clusters as soon as their parent
    is split.  Each remnant uses up one unit of the budget."""
    D = _as_dendrogram(X)
    if D.n < 2:
        raise DendrogramError("at least two data points are required")
    if k < 1:
        raise ValueError("cluster budget k must be >= 1")
    if compare(EnergyValue.zero(D.field), epsilon) >= 0:
        raise ValueError("epsilon must be positive")
    root = D.root
    removed = [c for c in root.children if is_quasi_singleton(c, epsilon)]
    kept = [c for c in root.children if not is_quasi_singleton(c, epsilon)]
    if len(kept) >= 2:
        members = tuple(sorted(m for c in kept for m in c.members))
        start: tuple[Node, ...] = (dataclasses.replace(root, members=members, children=tuple(kept)),)
    else:
        start = tuple(kept)
    if len(removed) + len(start) > k:
        return ClusteringFamily(
            [FamilyMember((root,), (), k - 1)], vertex_energy(root), k, trivial=True,
            diagnostics=[f"{len(removed)} quasi-singletons at the root exceed k={k}; returning the whole dataset"],
        )
    family = [FamilyMember(start, _order(removed), k - len(removed))]
    energy = family_energy(start, D.field)
    log = [{"step": 1, "split": [], "removed": [n.members for n in removed], "energy": energy}]
    diagnostics: list[str] = []
    step = 1
    while True:
        cands = []
        for m in family:
            for v in m.nodes:
                if v.is_end:
                    continue
                rem = [c for c in v.children if is_quasi_singleton(c, epsilon)]
                keep = [c for c in v.children if not is_quasi_singleton(c, epsilon)]
                budget = m.budget - len(rem)
                W = _order([n for n in m.nodes if n is not v] + keep)
                if budget < 0 or len(W) > budget:
                    continue
                e_w = family_energy(W, D.field)
                if compare(e_w, energy) >= 0:
                    continue
                cands.append((e_w, FamilyMember(W, _order(m.remnants + tuple(rem)), budget), v))
        if not cands:
            break
        step += 1
        energy, chosen, pruned = _select(cands, family_cap)
        if pruned:
            diagnostics.append(f"step {step}: family capped at {family_cap}")
        family = [m for m, _ in chosen]
        log.append({"step": step, "split": sorted({v.id for _, v in chosen}), "energy": energy})
    return ClusteringFamily(family, energy, k, log=log, diagnostics=diagnostics)


@dataclass(frozen=True)
class SplitLBGResult:
    clusters: list[tuple[int, ...]]
    centers: list[CenterResult]
    remnants: list[tuple[int, ...]]

    @property
    def representatives(self) -> list[int]:
        return [c.representative for c in self.centers]


def split_lbg(X: Dendrogram | Sequence[PAdicValue], k: int, epsilon: Threshold | None = None,
              family_cap: int = DEFAULT_FAMILY_CAP) -> tuple[list[SplitLBGResult], ClusteringFamily]:
    """Clusterings first, then center candidates for every cluster."""
    D = _as_dendrogram(X)
    if epsilon is None:
        fam = verticial_clustering(D, k, family_cap)
    else:
        fam = quasi_verticial_clustering(D, k, epsilon, family_cap)
    results = []
    for m in fam.members:
        clusters = m.clusters
        results.append(SplitLBGResult(
            clusters, [center_candidates(D, C) for C in clusters],
            sorted((n.members for n in m.remnants), key=lambda c: c[0]),
        ))
    return results, fam


# -- exhaustive search, for checking the greedy results ---------------------

def enumerate_verticial_clusterings(D: Dendrogram, max_clusters: int) -> Iterator[tuple[Node, ...]]:
    """All verticial clusterings of the dataset with at most ``max_clusters``
    clusters, as tuples of nodes."""

    def cuts(node: Node) -> list[tuple[Node, ...]]:
        out = [(node,)]
        if not node.is_end:
            parts = [cuts(c) for c in node.children]
            for combo in itertools.product(*parts):
                flat = tuple(n for part in combo for n in part)
                if len(flat) <= max_clusters:
                    out.append(flat)
        return out

    yield from cuts(D.root)


def exhaustive_minimum(D: Dendrogram, k: int) -> tuple[EnergyValue, list[tuple[Node, ...]]]:
    best = None
    argmin: list[tuple[Node, ...]] = []
    for cut in enumerate_verticial_clusterings(D, k):
        e = family_energy(cut, D.field)
        c = -1 if best is None else compare(e, best)
        if c < 0:
            best, argmin = e, [cut]
        elif c == 0:
            argmin.append(cut)
    return best, argmin


def improving_splits(nodes: Sequence[Node], k: int) -> list[Vertex]:
    """Vertices of a verticial clustering whose split fits ``k`` and lowers E."""
    base = family_energy(nodes, nodes[0].field)
    out = []
    for v in nodes:
        if v.is_end or len(nodes) - 1 + len(v.children) > k:
            continue
        W = [n for n in nodes if n is not v] + list(v.children)
        if compare(family_energy(W, v.field), base) < 0:
            out.append(v)
    return out


def optimality_gap(D: Dendrogram, k: int) -> dict:
    """Greedy energy versus the exhaustive optimum over verticial clusterings."""
    fam = verticial_clustering(D, k)
    opt, _ = exhaustive_minimum(D, k)
    return {"greedy": fam.energy, "optimum": opt, "gap": EnergyDifference(fam.energy, opt)}
