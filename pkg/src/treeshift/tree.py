"""Finite, depth-bounded regions of rooted directed trees.

A template describes a (possibly infinite) rooted, finitely branching tree.
``materialize`` expands it breadth-first down to a fixed depth; vertices are
numbered in BFS order with the root at index 0.  Vertices at the cut-off depth
whose template continues are flagged as *frontier*.
"""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Mapping, Sequence

from .errors import DepthExceeded, OversizeRegion, ValidationError

DEFAULT_MAX_VERTICES = 10**6


# --- templates -------------------------------------------------------------


@dataclass(frozen=True)
class RootedPath:
    def child_count(self, depth: int) -> int:
        return 1

    def leafless(self) -> bool:
        return True


@dataclass(frozen=True)
class FreeKAry:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be positive")

    def child_count(self, depth: int) -> int:
        return self.k

    def leafless(self) -> bool:
        return True


@dataclass(frozen=True)
class OneBranch:
    """A path of length ``kappa`` that splits into ``eta`` infinite paths."""

    kappa: int
    eta: int

    def __post_init__(self):
        if self.kappa < 0 or self.eta < 1:
            raise ValueError("need kappa >= 0 and eta >= 1")

    def child_count(self, depth: int) -> int:
        return self.eta if depth == self.kappa else 1

    def leafless(self) -> bool:
        return True


@dataclass(frozen=True)
class TableGenerated:
    """Child count looked up by depth, falling back to ``default``."""

    table: Mapping[int, int]
    default: int

    def __post_init__(self):
        if self.default < 0 or any(c < 0 for c in self.table.values()):
            raise ValueError("child counts must be nonnegative")

    def child_count(self, depth: int) -> int:
        return self.table.get(depth, self.default)

    def leafless(self) -> bool:
        return self.default > 0 and all(c > 0 for c in self.table.values())

    def __hash__(self):
        return hash((tuple(sorted(self.table.items())), self.default))


@dataclass(frozen=True)
class ExplicitFinite:
    """A finite tree given by a parent table (``None`` marks the root).

    ``labels`` optionally names the entries of ``parents``; by default the
    label of entry ``j`` is ``j``.
    """

    parents: tuple
    labels: tuple | None = None

    def __post_init__(self):
        n = len(self.parents)
        problems = []
        roots = [j for j, p in enumerate(self.parents) if p is None]
        if len(roots) != 1:
            problems.append(f"expected exactly one root, found {len(roots)}")
        for j, p in enumerate(self.parents):
            if p is not None and not (isinstance(p, int) and 0 <= p < n and p != j):
                problems.append(f"entry {j}: invalid parent {p!r}")
        if self.labels is not None and len(self.labels) != n:
            problems.append("labels must match parents in length")
        elif self.labels is not None and len(set(self.labels)) != n:
            problems.append("labels must be distinct")
        if not problems:
            # reachability from the root rules out cycles
            kids: dict[int, list[int]] = {}
            for j, p in enumerate(self.parents):
                if p is not None:
                    kids.setdefault(p, []).append(j)
            seen, stack = set(), [roots[0]]
            while stack:
                x = stack.pop()
                seen.add(x)
                stack.extend(kids.get(x, []))
            if len(seen) != n:
                missing = sorted(set(range(n)) - seen)
                problems.append(f"entries {missing} are not reachable from the root (cycle)")
        if problems:
            raise ValidationError(problems)

    def root(self) -> int:
        return self.parents.index(None)

    def kids(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = {j: [] for j in range(len(self.parents))}
        for j, p in enumerate(self.parents):
            if p is not None:
                out[p].append(j)
        return out

    def height(self) -> int:
        kids = self.kids()
        best, stack = 0, [(self.root(), 0)]
        while stack:
            x, d = stack.pop()
            best = max(best, d)
            stack.extend((c, d + 1) for c in kids[x])
        return best

    def leafless(self) -> bool:
        return False

    def label(self, j: int):
        return j if self.labels is None else self.labels[j]


TreeTemplate = RootedPath | FreeKAry | OneBranch | TableGenerated | ExplicitFinite


# --- regions ---------------------------------------------------------------


@dataclass(frozen=True)
class TreeRegion:
    template: object
    depth: int
    parent: tuple  # parent[0] is None
    children: tuple  # tuple of tuples
    level: tuple  # depth of each vertex
    frontier: tuple  # bools
    labels: tuple = ()
    _by_label: dict = field(default_factory=dict, compare=False, repr=False)

    def __len__(self) -> int:
        return len(self.parent)

    @property
    def vertices(self) -> range:
        return range(len(self.parent))

    @property
    def non_root(self) -> range:
        return range(1, len(self.parent))

    @property
    def complete(self) -> bool:
        """True when no vertex was cut off, so the region is the whole tree."""
        return not any(self.frontier)

    def frontier_vertices(self) -> list[int]:
        return [v for v in self.vertices if self.frontier[v]]

    def vertex(self, key) -> int:
        """Resolve a user-facing key (region index or explicit label) to an index."""
        if self.labels:
            if key in self._by_label:
                return self._by_label[key]
            if isinstance(key, str) and key.lstrip("-").isdigit() and int(key) in self._by_label:
                return self._by_label[int(key)]
            raise KeyError(f"unknown vertex {key!r}")
        if isinstance(key, str) and key.lstrip("-").isdigit():
            key = int(key)
        if isinstance(key, int) and 0 <= key < len(self):
            return key
        raise KeyError(f"unknown vertex {key!r}")

    def label(self, v: int):
        return self.labels[v] if self.labels else v

    @cached_property
    def _cut_below(self) -> tuple:
        """Whether each vertex has a frontier vertex in its subtree."""
        cut = list(self.frontier)
        for v in reversed(self.vertices):
            if cut[v] and v:
                cut[self.parent[v]] = True
        return tuple(cut)

    def answerable(self, u: int) -> int | None:
        """Largest n for which Chi<n>(u) is known, or None when every n is."""
        if not self._cut_below[u]:
            return None
        return self.depth - self.level[u]

    def _need(self, u: int, n: int) -> None:
        limit = self.answerable(u)
        if limit is not None and n > limit:
            raise DepthExceeded(u, self.level[u] + n, self.depth)

    def chi(self, u: int) -> tuple:
        return self.children[u]

    def chi_n(self, u: int, n: int) -> frozenset:
        """Vertices reached from ``u`` by exactly ``n`` edges."""
        if n < 0:
            raise ValueError("n must be nonnegative")
        self._need(u, n)
        layer = [u]
        for _ in range(n):
            layer = [w for x in layer for w in self.children[x]]
        return frozenset(layer)

    def chi_n_ordered(self, u: int, n: int) -> list[int]:
        self._need(u, n)
        layer = [u]
        for _ in range(n):
            layer = [w for x in layer for w in self.children[x]]
        return layer

    def descendants(self, u: int, max_depth: int) -> frozenset:
        self._need(u, max_depth)
        out, layer = [u], [u]
        for _ in range(max_depth):
            layer = [w for x in layer for w in self.children[x]]
            out.extend(layer)
        return frozenset(out)

    def is_descendant(self, u: int, v: int) -> bool:
        """Whether ``v`` lies in Des(u)."""
        while v is not None:
            if v == u:
                return True
            if self.level[v] <= self.level[u]:
                return False
            v = self.parent[v]
        return False

    def par_n(self, w: int, n: int):
        for _ in range(n):
            if w is None:
                return None
            w = self.parent[w]
        return w

    def path_up(self, u: int, v: int) -> list[int]:
        """Vertices on the chain from ``v`` up to, but excluding, ``u``."""
        chain = []
        while v != u:
            chain.append(v)
            v = self.parent[v]
        return chain


def _max_vertices(cap: int | None) -> int:
    if cap is not None:
        return cap
    env = os.environ.get("TREESHIFT_MAX_VERTICES")
    return int(env) if env else DEFAULT_MAX_VERTICES


def materialize(template, depth: int, max_vertices: int | None = None) -> TreeRegion:
    """Expand ``template`` to all vertices within ``depth`` of the root."""
    if depth < 0:
        raise ValueError("depth must be nonnegative")
    cap = _max_vertices(max_vertices)

    if isinstance(template, ExplicitFinite):
        kids = template.kids()
        source = [template.root()]
        child_source = lambda x, d: kids[x]  # noqa: E731
    else:
        source = [None]
        child_source = lambda x, d: [None] * template.child_count(d)  # noqa: E731

    parent = [None]
    children: list[list[int]] = [[]]
    level = [0]
    frontier = [False]
    origin = source  # origin[v] = template-side key of vertex v
    queue = deque([0])
    while queue:
        v = queue.popleft()
        below = child_source(origin[v], level[v])
        if level[v] == depth:
            frontier[v] = len(below) > 0
            continue
        for key in below:
            w = len(parent)
            if w + 1 > cap:
                raise OversizeRegion(f"region would exceed {cap} vertices")
            parent.append(v)
            children.append([])
            level.append(level[v] + 1)
            frontier.append(False)
            origin.append(key)
            children[v].append(w)
            queue.append(w)

    labels: tuple = ()
    by_label: dict = {}
    if isinstance(template, ExplicitFinite):
        labels = tuple(template.label(k) for k in origin)
        by_label = {lab: v for v, lab in enumerate(labels)}
    return TreeRegion(
        template=template,
        depth=depth,
        parent=tuple(parent),
        children=tuple(tuple(c) for c in children),
        level=tuple(level),
        frontier=tuple(frontier),
        labels=labels,
        _by_label=by_label,
    )


@dataclass(frozen=True)
class LeafStatus:
    kind: str  # "leafless" | "has_leaf" | "inconclusive"
    witness: int | None = None

    def __bool__(self):
        return self.kind == "leafless"


def is_leafless_within(region: TreeRegion) -> LeafStatus:
    """Leaf evidence available from the region.

    A non-frontier vertex without children is a genuine leaf.  With no leaf in
    sight, the answer is ``leafless`` only if the template guarantees that the
    tree continues below every frontier vertex.  A finite explicit tree always
    has a leaf; when all of them lie beyond the cut-off the witness is None.
    """
    for v in region.vertices:
        if not region.frontier[v] and not region.children[v]:
            return LeafStatus("has_leaf", v)
    template = region.template
    if getattr(template, "leafless", lambda: False)():
        return LeafStatus("leafless")
    if isinstance(template, TableGenerated) and region.frontier_vertices():
        return LeafStatus("inconclusive")
    if isinstance(template, ExplicitFinite):
        # every finite tree has a leaf; here all of them lie beyond the cut-off
        return LeafStatus("has_leaf", None)
    return LeafStatus("leafless")


def from_parent_list(parents: Sequence, labels: Iterable | None = None) -> ExplicitFinite:
    return ExplicitFinite(tuple(parents), tuple(labels) if labels is not None else None)
