"""Dendrograms of finite p-adic datasets.

Vertices are the clusters with at least two points; the data themselves are
the ends of the tree.  A vertex at level ``l`` has diameter ``p**(-l/e)``.
Children are ordered by their smallest member and vertex ids follow a
depth-first preorder, so every output is reproducible.
"""

from __future__ import annotations

import itertools
import re
from collections.abc import Iterable, Sequence
from dataclasses import dataclass
from typing import Union

from .padic import (
    FieldMismatchError,
    FieldParams,
    NormValue,
    PAdicValue,
    ZERO,
    distance,
    first_difference,
)


class DendrogramError(ValueError):
    pass


@dataclass(frozen=True)
class End:
    """A datum, identified by its index in the dataset."""

    index: int
    field: FieldParams

    is_end = True
    level = None

    @property
    def members(self) -> tuple[int, ...]:
        return (self.index,)

    @property
    def size(self) -> int:
        return 1

    @property
    def mu(self) -> NormValue:
        return ZERO

    @property
    def children(self) -> tuple:
        return ()

    @property
    def key(self) -> tuple[int, int]:
        return (1, self.index)

    def __repr__(self):
        return f"End({self.index})"


@dataclass(frozen=True, eq=False)
class Vertex:
    id: int
    level: int
    children: tuple[Node, ...]
    members: tuple[int, ...]
    field: FieldParams
    parent: int | None = None

    is_end = False

    @property
    def size(self) -> int:
        return len(self.members)

    @property
    def mu(self) -> NormValue:
        return NormValue(self.level)

    @property
    def key(self) -> tuple[int, int]:
        return (0, self.id)

    def __repr__(self):
        return f"Vertex(id={self.id}, level={self.level}, size={self.size})"


Node = Union[Vertex, End]

# Nested build description: an int is an end, (level, [subspecs]) a vertex.
Spec = Union[int, tuple]


def _materialize(spec: Spec, field: FieldParams) -> tuple[Node, list[Vertex]]:
    counter = itertools.count()
    vertices: list[Vertex] = []

    def min_leaf(s):
        return s if isinstance(s, int) else min(min_leaf(c) for c in s[1])

    def walk(s, parent):
        if isinstance(s, int):
            return End(s, field)
        level, subs = s
        vid = next(counter)
        slot = len(vertices)
        vertices.append(None)  # reserve preorder position
        kids = tuple(walk(c, vid) for c in sorted(subs, key=min_leaf))
        members = tuple(sorted(m for k in kids for m in k.members))
        v = Vertex(vid, level, kids, members, field, parent)
        vertices[slot] = v
        return v

    root = walk(spec, None)
    return root, vertices


def _spec_of(node: Node) -> Spec:
    if node.is_end:
        return node.index
    return (node.level, [_spec_of(c) for c in node.children])


class Dendrogram:
    """Rooted metric tree over a dataset (or over bare end labels)."""

    def __init__(self, spec: Spec, field: FieldParams,
                 data: Sequence[PAdicValue] | None = None):
        self.field = field
        self.data = tuple(data) if data is not None else None
        self.root, verts = _materialize(spec, field)
        self.vertices: tuple[Vertex, ...] = tuple(verts)
        self._ends: dict[int, End] = {}
        self._parent: dict[tuple, Vertex] = {}
        for v in self.vertices:
            for c in v.children:
                self._parent[c.key] = v
                if c.is_end:
                    self._ends[c.index] = c
        if self.root.is_end:
            self._ends[self.root.index] = self.root

    @property
    def n(self) -> int:
        return len(self._ends)

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(sorted(self._ends))

    def end(self, index: int) -> End:
        return self._ends[index]

    def vertex(self, vid: int) -> Vertex:
        return self.vertices[vid]

    def parent(self, node: Node) -> Vertex | None:
        return self._parent.get(node.key)

    def nodes(self) -> list[Node]:
        return list(self.vertices) + [self._ends[i] for i in self.labels]

    def path_to(self, index: int) -> list[Node]:
        """Nodes from the root down to the end ``index`` (inclusive)."""
        out = [self._ends[index]]
        while (par := self.parent(out[-1])) is not None:
            out.append(par)
        return out[::-1]

    def smallest_containing(self, members: Iterable[int]) -> Node:
        """Smallest verticial cluster (vertex or end) containing ``members``."""
        members = set(members)
        if not members:
            raise DendrogramError("empty member set")
        missing = members - set(self._ends)
        if missing:
            raise DendrogramError(f"unknown data indices {sorted(missing)}")
        node = self.root
        while not node.is_end:
            for c in node.children:
                if members <= set(c.members):
                    node = c
                    break
            else:
                break
        return node

    def distance(self, i: int, j: int) -> NormValue:
        """Tree metric: diameter of the smallest cluster holding both ends."""
        if i == j:
            return ZERO
        return self.smallest_containing((i, j)).mu

    def disks(self) -> set[frozenset[int]]:
        out = {frozenset(v.members) for v in self.vertices}
        out |= {frozenset((i,)) for i in self._ends}
        out.add(frozenset(self._ends))
        return out

    def restricted(self, members: Iterable[int]) -> Dendrogram:
        """D(C) for a subset C, keeping the original end labels."""
        keep = set(members)
        if not keep:
            raise DendrogramError("cannot restrict to the empty set")
        if not keep <= set(self._ends):
            raise DendrogramError("subset is not contained in the dataset")

        def walk(node):
            if node.is_end:
                return node.index if node.index in keep else None
            kids = [s for s in (walk(c) for c in node.children) if s is not None]
            if not kids:
                return None
            if len(kids) == 1:
                return kids[0]
            return (node.level, kids)

        data = self.data
        return Dendrogram(walk(self.root), self.field, data)

    def with_field(self, field: FieldParams) -> Dendrogram:
        """Same tree shape, energies evaluated over another field."""
        return Dendrogram(_spec_of(self.root), field, None)

    def to_abstract(self) -> AbstractDendrogram:
        return AbstractDendrogram.from_spec(_spec_of(self.root))

    def shape_key(self) -> str:
        return _shape(self.root, None)

    def labeled_key(self) -> str:
        if self.data is None:
            return _shape(self.root, lambda i: str(i))
        return _shape(self.root, lambda i: repr(self.data[i]._canonical))


def _shape(node: Node, label) -> str:
    if node.is_end:
        return "L" if label is None else f"L[{label(node.index)}]"
    parts = sorted(_shape(c, label) for c in node.children)
    return f"({node.level} {' '.join(parts)})"


def _radix(indices: list[int], values: Sequence[PAdicValue]) -> Spec:
    if len(indices) == 1:
        return indices[0]
    x0 = values[indices[0]]
    level = min(first_difference(x0, values[i]) for i in indices[1:])
    groups: dict[int, list[int]] = {}
    for i in indices:
        groups.setdefault(values[i].digit(level), []).append(i)
    return (level, [_radix(g, values) for g in groups.values()])


def build(X: Sequence[PAdicValue]) -> Dendrogram:
    """The dendrogram D(X); ends are labeled by position in ``X``."""
    X = list(X)
    if not X:
        raise DendrogramError("dataset is empty")
    field = X[0].field
    for x in X:
        if x.field != field:
            raise FieldMismatchError("dataset mixes fields")
    if len(set(X)) != len(X):
        seen = set()
        for i, x in enumerate(X):
            if x in seen:
                raise DendrogramError(f"duplicate datum at index {i}")
            seen.add(x)
    return Dendrogram(_radix(list(range(len(X))), X), field, X)


def insert(D: Dendrogram, y: PAdicValue) -> Dendrogram:
    """D(X + [y]) obtained by splicing one new end into ``D``.

    Descends along common prefixes and creates at most one new vertex.
    """
    if D.data is None:
        raise DendrogramError("insertion needs a concrete dataset")
    if y.field != D.field:
        raise FieldMismatchError("datum belongs to another field")
    if y in set(D.data):
        raise DendrogramError("duplicate datum")
    new = len(D.data)
    data = D.data + (y,)

    def descend(node) -> Spec:
        rep = data[node.members[0]]
        j = first_difference(rep, y)
        if node.is_end:
            return (j, [node.index, new])
        if j < node.level:
            return (j, [_spec_of(node), new])
        digit = y.digit(node.level)
        kids = []
        placed = False
        for c in node.children:
            if data[c.members[0]].digit(node.level) == digit:
                kids.append(descend(c))
                placed = True
            else:
                kids.append(_spec_of(c))
        if not placed:
            kids.append(new)
        return (node.level, kids)

    return Dendrogram(descend(D.root), D.field, data)


@dataclass(frozen=True)
class ExtendedDendrogram:
    """D(X) together with the point at infinity attached above the root."""

    base: Dendrogram

    @property
    def root(self) -> Node:
        return self.base.root

    @property
    def field(self) -> FieldParams:
        return self.base.field


def build_extended(X: Sequence[PAdicValue]) -> ExtendedDendrogram:
    return ExtendedDendrogram(build(X))


# -- abstract trees ---------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(\()|(\))|(-?\d+)|(L))")


class TreeSyntaxError(DendrogramError):
    pass


@dataclass(frozen=True)
class AbstractDendrogram:
    """Level-labelled tree without coordinates; leaves numbered left to right."""

    spec: Spec

    @classmethod
    def from_spec(cls, spec: Spec) -> AbstractDendrogram:
        counter = itertools.count()

        def relabel(s):
            if isinstance(s, int):
                return next(counter)
            level, subs = s
            return (level, [relabel(c) for c in subs])

        tree = cls(relabel(spec))
        tree.validate()
        return tree

    def validate(self):
        def walk(s, floor):
            if isinstance(s, int):
                return
            level, subs = s
            if floor is not None and level <= floor:
                raise DendrogramError("levels must increase strictly towards the leaves")
            if len(subs) < 2:
                raise DendrogramError("internal nodes need at least two children")
            for c in subs:
                walk(c, level)

        walk(self.spec, None)

    @property
    def n_leaves(self) -> int:
        def count(s):
            return 1 if isinstance(s, int) else sum(count(c) for c in s[1])
        return count(self.spec)

    def max_children(self) -> int:
        def walk(s):
            if isinstance(s, int):
                return 0
            return max([len(s[1])] + [walk(c) for c in s[1]])
        return walk(self.spec)

    def as_dendrogram(self, field: FieldParams) -> Dendrogram:
        return Dendrogram(self.spec, field, None)

    def shape_key(self) -> str:
        def walk(s):
            if isinstance(s, int):
                return "L"
            return f"({s[0]} {' '.join(sorted(walk(c) for c in s[1]))})"
        return walk(self.spec)

    def __str__(self):
        return format_tree(self)


def parse_tree(text: str) -> AbstractDendrogram:
    """Parse ``(0 (1 L L) L)``-style text: the first integer of a group is
    the node's level, ``L`` is an end."""
    tokens = []
    pos = 0
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise TreeSyntaxError(f"unexpected character at offset {pos}")
        pos = m.end()
        tokens.append(next(t for t in m.groups() if t is not None))
        while pos < len(text) and text[pos].isspace():
            pos += 1
    it = iter(tokens)

    def group(first):
        if first == "L":
            return 0
        if first != "(":
            raise TreeSyntaxError(f"expected '(' or 'L', got {first!r}")
        level_tok = next(it, None)
        if level_tok is None or not re.fullmatch(r"-?\d+", level_tok):
            raise TreeSyntaxError("group must start with its level")
        subs = []
        for tok in it:
            if tok == ")":
                return (int(level_tok), subs)
            subs.append(group(tok))
        raise TreeSyntaxError("unbalanced parentheses")

    first = next(it, None)
    if first is None:
        raise TreeSyntaxError("empty tree")
    spec = group(first)
    if next(it, None) is not None:
        raise TreeSyntaxError("trailing tokens after tree")
    return AbstractDendrogram.from_spec(spec)


def format_tree(tree: AbstractDendrogram | Dendrogram) -> str:
    spec = tree.spec if isinstance(tree, AbstractDendrogram) else _spec_of(tree.root)

    def walk(s):
        if isinstance(s, int):
            return "L"
        return f"({s[0]} {' '.join(walk(c) for c in s[1])})"

    return walk(spec)


def is_realizable(T: AbstractDendrogram, field: FieldParams) -> bool:
    return T.max_children() <= field.q


def synthesize(T: AbstractDendrogram, field: FieldParams) -> list[PAdicValue]:
    """Digit words whose dendrogram is ``T`` (leaf ``i`` becomes datum ``i``).

    The j-th child of a vertex at level ``l`` gets digit ``j`` at index
    ``l``; all other digits are zero.
    """
    if not is_realizable(T, field):
        raise DendrogramError(f"tree has a vertex with more than q={field.q} children")
    assignments: dict[int, dict[int, int]] = {}

    def walk(s, prefix):
        if isinstance(s, int):
            assignments[s] = prefix
            return
        level, subs = s
        for j, c in enumerate(subs):
            walk(c, {**prefix, level: j})

    walk(T.spec, {})
    levels = [lv for a in assignments.values() for lv in a] or [0]
    lo, hi = min(min(levels), 0), max(levels) + 1
    out = []
    for i in range(len(assignments)):
        a = assignments[i]
        out.append(PAdicValue(field, lo, tuple(a.get(k, 0) for k in range(lo, hi))))
    return out


# -- cluster predicates -----------------------------------------------------

def _check_subset(S, X):
    Xs = set(X)
    if not set(S) <= Xs:
        raise DendrogramError("S is not a subset of X")


def diameter(S: Iterable[PAdicValue]) -> NormValue:
    S = list(S)
    return max((distance(a, b) for a, b in itertools.combinations(S, 2)), default=ZERO)


def is_cluster(S: Iterable[PAdicValue], X: Sequence[PAdicValue]) -> bool:
    """Cluster property: nothing outside S is closer to S than its diameter."""
    S = set(S)
    if not S:
        raise DendrogramError("S must be nonempty")
    _check_subset(S, X)
    mu = diameter(S)
    return all(x in S for a in S for x in X if distance(x, a) < mu)


def is_verticial(S: Iterable[PAdicValue], X: Sequence[PAdicValue]) -> bool:
    """True iff S = {x in X : |x - a| < eps} for some a in S and eps > 0."""
    S = set(S)
    if not S:
        raise DendrogramError("S must be nonempty")
    _check_subset(S, X)
    for a in S:
        radii = sorted({distance(x, a) for x in X})
        for r in radii:
            if {x for x in X if distance(x, a) <= r} == S:
                return True
    return False


def restrict(clustering: Iterable[Iterable], Y: Iterable) -> list[frozenset]:
    """Restriction of a clustering to a subset: nonempty traces only."""
    Y = set(Y)
    out = []
    for C in clustering:
        trace = frozenset(C) & Y
        if trace:
            out.append(trace)
    return out


# -- DOT --------------------------------------------------------------------

def to_dot(D: Dendrogram | ExtendedDendrogram) -> str:
    extended = isinstance(D, ExtendedDendrogram)
    base = D.base if extended else D
    lines = ["digraph dendrogram {", "  node [shape=box];"]
    if extended:
        lines.append('  inf [label="inf", shape=plaintext];')
    for v in base.vertices:
        lines.append(f'  v{v.id} [label="v{v.id}\\nlevel {v.level}\\nn={v.size}"];')
    for i in base.labels:
        lines.append(f'  e{i} [label="x{i}", shape=plaintext];')

    def name(node):
        return f"e{node.index}" if node.is_end else f"v{node.id}"

    if extended:
        lines.append(f"  inf -> {name(base.root)} [style=dashed, dir=back];")
    for v in base.vertices:
        for c in v.children:
            lines.append(f"  v{v.id} -> {name(c)};")
    lines.append("}")
    return "\n".join(lines) + "\n"
