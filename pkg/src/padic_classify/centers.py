"""Cluster centers: branch descent on the cluster's own dendrogram.

A center of C is a member minimizing ``eps(alpha) = sum_{a in C} |a - alpha|``.
:func:`center_candidates` descends into the largest branches (ties broken by
smaller diameter) until every remaining tree is a single vertex.
:func:`brute_force_centers` evaluates ``eps`` at every member and serves as
the independent check.
"""

from __future__ import annotations

from collections.abc import Iterable, Sequence
from dataclasses import dataclass

from .dendrogram import Dendrogram, DendrogramError, Node
from .energy import EnergyValue, compare
from .padic import NormValue, PAdicValue, distance


@dataclass(frozen=True)
class Branch:
    root: Node
    members: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def mu(self) -> NormValue:
        return self.root.mu


@dataclass(frozen=True)
class BranchDecomposition:
    root: Node
    branches: tuple[Branch, ...]

    @property
    def members(self) -> tuple[int, ...]:
        return self.root.members

    def branch_of(self, alpha: int) -> Branch:
        for b in self.branches:
            if alpha in b.members:
                return b
        raise DendrogramError(f"{alpha} is not in the cluster")

    def residual_count(self, alpha: int) -> int:
        """Number of members outside the branch containing ``alpha``."""
        return len(self.members) - self.branch_of(alpha).size

    def bound_exponent(self, alpha: int) -> int | None:
        """Level gap between the cluster root and the root of alpha's branch;
        ``None`` when that branch is a single end."""
        b = self.branch_of(alpha)
        return None if b.root.is_end else b.root.level - self.root.level


def cluster_tree(D: Dendrogram, C: Iterable[int]) -> Dendrogram:
    C = list(C)
    if not C:
        raise DendrogramError("empty cluster")
    return D.restricted(C)


def branch_decomposition(D: Dendrogram, C: Iterable[int]) -> BranchDecomposition:
    T = cluster_tree(D, C)
    root = T.root
    if root.is_end:
        return BranchDecomposition(root, (Branch(root, root.members),))
    return BranchDecomposition(root, tuple(Branch(c, c.members) for c in root.children))


def epsilon_energy(D: Dendrogram, C: Iterable[int], alpha: int) -> EnergyValue:
    """``sum_{a in C} |a - alpha|`` from the tree metric of ``D``."""
    C = set(C)
    if alpha not in C:
        raise DendrogramError(f"{alpha} is not in the cluster")
    return EnergyValue.from_norms(D.field, (D.distance(a, alpha) for a in C))


@dataclass(frozen=True)
class CenterResult:
    terminals: tuple[tuple[int, ...], ...]

    @property
    def candidates(self) -> frozenset[int]:
        return frozenset(m for t in self.terminals for m in t)

    @property
    def representative(self) -> int:
        return min(self.candidates)


def _is_bush(node: Node) -> bool:
    return node.is_end or all(c.is_end for c in node.children)


def center_candidates(D: Dendrogram, C: Iterable[int]) -> CenterResult:
    """Greedy branch descent.

    Each round collects the branches of all current trees, keeps those of
    largest size, and among them those of smallest diameter.  Stops once
    every current tree consists of a single vertex.
    """
    current: list[Node] = [cluster_tree(D, C).root]
    while not all(_is_bush(n) for n in current):
        branches = [c for n in current for c in n.children]
        top = max(b.size for b in branches)
        largest = [b for b in branches if b.size == top]
        mu = min(b.mu for b in largest)
        current = [b for b in largest if b.mu == mu]
    mu = min(n.mu for n in current)
    return CenterResult(tuple(n.members for n in current if n.mu == mu))


def brute_force_centers(X: Sequence[PAdicValue], C: Iterable[int] | None = None) -> frozenset[int]:
    """Members of C (indices into X) minimizing the summed distance."""
    C = sorted(range(len(X)) if C is None else set(C))
    if not C:
        raise DendrogramError("empty cluster")
    field = X[C[0]].field
    best: list[int] = []
    best_val = None
    for alpha in C:
        val = EnergyValue.from_norms(field, (distance(X[a], X[alpha]) for a in C))
        c = 1 if best_val is None else compare(val, best_val)
        if c < 0 or best_val is None:
            best, best_val = [alpha], val
        elif c == 0:
            best.append(alpha)
    return frozenset(best)
