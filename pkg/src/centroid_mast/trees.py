"""Leaf-labeled binary trees with zero, one or two distinguished leaves.

A tree is stored as a flat adjacency list over vertex ids ``0..V-1`` plus a
map from leaf vertices to labels.  Original leaves are plain positive ints;
the distinguished leaves are :data:`STAR` and :data:`BULLET`; the three
copies of a split branch point carry a shared :class:`SplitToken`.

Trees are treated as immutable once built.  Every traversal here is
iterative, since random trees on tens of thousands of leaves are far deeper
than the interpreter's recursion limit allows.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from itertools import islice
from typing import Iterable, Iterator, Union

import numpy as np


class Mark(enum.Enum):
    STAR = 1
    BULLET = 2

    # Enum hashes by name, and str hashing is salted per process; a fixed
    # hash keeps set iteration order (and so every derived tree) reproducible.
    def __hash__(self) -> int:
        return self.value

    def __repr__(self) -> str:
        return self.name


STAR = Mark.STAR
BULLET = Mark.BULLET


@dataclass(frozen=True)
class SplitToken:
    """Fresh leaf standing in for a branch point removed by a split."""

    id: int

    def __repr__(self) -> str:
        return f"T{self.id}"


Label = Union[int, Mark, SplitToken]


class RootKind(enum.IntEnum):
    """Number of distinguished leaves carried by a tree."""

    NONROOTED = 0
    ROOTED = 1
    DOUBLY = 2


def is_original(label: Label) -> bool:
    return type(label) is int


def label_key(label: Label) -> tuple[int, int]:
    """Total order on labels: originals by index, then STAR, BULLET, tokens."""
    if type(label) is int:
        return (0, label)
    if label is STAR:
        return (1, 0)
    if label is BULLET:
        return (2, 0)
    return (3, label.id)


def sorted_labels(labels: Iterable[Label]) -> list[Label]:
    return sorted(labels, key=label_key)


class BinaryTree:
    """An unrooted tree whose vertices all have degree 1 or 3.

    Parameters
    ----------
    adj : list of list of int
        Neighbour lists, indexed by vertex id.
    labels : dict
        Leaf vertex -> label.  Every degree-1 vertex must be labeled; a
        single-vertex tree labels its only vertex.
    """

    __slots__ = ("adj", "labels", "vertex_of")

    def __init__(self, adj: list[list[int]], labels: dict[int, Label]):
        self.adj = adj
        self.labels = labels
        self.vertex_of = {lab: v for v, lab in labels.items()}

    @classmethod
    def from_edges(cls, edges: Iterable[tuple[int, int]], labels: dict[int, Label]) -> "BinaryTree":
        edges = list(edges)
        n_vertices = 1 + max([max(e) for e in edges] + list(labels), default=-1)
        adj: list[list[int]] = [[] for _ in range(n_vertices)]
        for a, b in edges:
            adj[a].append(b)
            adj[b].append(a)
        return cls(adj, dict(labels))

    # -- basic queries -------------------------------------------------
    @property
    def n_vertices(self) -> int:
        return len(self.adj)

    @property
    def size(self) -> int:
        """Number of original leaves."""
        return sum(1 for lab in self.labels.values() if type(lab) is int)

    @property
    def kind(self) -> RootKind:
        return RootKind(len(self.labels) - self.size)

    @property
    def leaf_labels(self) -> frozenset:
        return frozenset(self.vertex_of)

    @property
    def originals(self) -> frozenset:
        return frozenset(lab for lab in self.vertex_of if type(lab) is int)

    @property
    def distinguished(self) -> frozenset:
        return frozenset(lab for lab in self.vertex_of if type(lab) is not int)

    def edges(self) -> Iterator[tuple[int, int]]:
        """Each edge once, as ``(a, b)`` with ``a < b``, in adjacency order."""
        for a, nbrs in enumerate(self.adj):
            for b in nbrs:
                if a < b:
                    yield a, b

    def branch_points(self) -> list[int]:
        return [v for v, nbrs in enumerate(self.adj) if len(nbrs) == 3]

    def relabel(self, mapping: dict) -> "BinaryTree":
        """Rename leaves; labels missing from ``mapping`` are kept."""
        labels = {v: mapping.get(lab, lab) for v, lab in self.labels.items()}
        return BinaryTree(self.adj, labels)

    def validate(self) -> None:
        """Raise ``ValueError`` unless this is a well-formed binary tree."""
        V = len(self.adj)
        if V == 0:
            raise ValueError("empty tree")
        if len(self.vertex_of) != len(self.labels):
            raise ValueError("duplicate leaf labels")
        n_edges = sum(len(nbrs) for nbrs in self.adj)
        if n_edges != 2 * (V - 1):
            raise ValueError("edge count does not match a tree")
        for v, nbrs in enumerate(self.adj):
            deg = len(nbrs)
            if V == 1:
                break
            if deg not in (1, 3):
                raise ValueError(f"vertex {v} has degree {deg}")
            if (deg == 1) != (v in self.labels):
                raise ValueError(f"vertex {v}: leaves and labels disagree")
        if V == 1 and list(self.labels) != [0]:
            raise ValueError("single-vertex tree must label vertex 0")
        seen = {0}
        stack = [0]
        while stack:
            v = stack.pop()
            for w in self.adj[v]:
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        if len(seen) != V:
            raise ValueError("tree is disconnected")
        originals = sorted(lab for lab in self.vertex_of if type(lab) is int)
        if originals and originals[0] < 1:
            raise ValueError("original labels must be positive")

    def __repr__(self) -> str:
        from .newick import to_newick

        return f"BinaryTree({to_newick(self)!r})"


def _bfs_order(adj: list[list[int]], root: int, via: int = -1) -> tuple[list[int], list[int]]:
    """Vertices in BFS order from ``root`` and the parent array (root -> -1).

    With ``via`` set, only the branch of ``root`` through neighbour ``via``
    is visited.
    """
    parent = [-1] * len(adj)
    parent[root] = root
    if via >= 0:
        parent[via] = root
        order = [root, via]
        walk = islice(order, 1, None)
    else:
        order = [root]
        walk = order
    for v in walk:
        pv = parent[v]
        for w in adj[v]:
            if w != pv:
                parent[w] = v
                order.append(w)
    parent[root] = -1
    return order, parent


# -- counting ----------------------------------------------------------

def count_trees(m: int) -> int:
    """Number of leaf-labeled binary trees on ``m`` leaves, 1*3*...*(2m-5)."""
    if m < 0:
        raise ValueError("m must be non-negative")
    return math.prod(range(1, 2 * m - 4, 2))


def log_count_trees(m: np.ndarray | int):
    """Natural log of :func:`count_trees`, vectorised via log-gamma."""
    from scipy.special import gammaln

    m = np.asarray(m, dtype=float)
    mm = np.maximum(m, 3.0)
    out = gammaln(2 * mm - 4) - (mm - 3) * math.log(2.0) - gammaln(mm - 2)
    return np.where(m <= 2, 0.0, out)


# -- generation ----------------------------------------------------------

def leaf_order(n: int, kind: RootKind) -> list[Label]:
    """Insertion order used by :func:`generate_uniform`."""
    kind = RootKind(kind)
    head: list[Label] = [STAR, BULLET][: int(kind)]
    return head + list(range(1, n + 1))


def generate_uniform(n: int, kind: RootKind, rng: np.random.Generator) -> BinaryTree:
    """Uniform random tree on ``{1..n}`` plus ``kind`` distinguished leaves.

    Leaves are inserted one at a time (STAR, then BULLET, then 1..n), each
    subdividing an existing edge chosen uniformly.  All edge choices are drawn
    in a single vectorised call, so the tree is a function of the stream state.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    kind = RootKind(kind)
    if n == 0 and kind == RootKind.NONROOTED:
        raise ValueError("a non-rooted tree needs at least one leaf")
    order = leaf_order(n, kind)
    L = len(order)
    labels = dict(enumerate(order))
    if L == 1:
        return BinaryTree([[]], labels)

    # leaf i is vertex i; internal vertices follow from L onwards
    ea = [0]
    eb = [1]
    if L > 2:
        choices = rng.integers(0, 2 * np.arange(2, L) - 3).tolist()
        w = L
        for x, e in zip(range(2, L), choices):
            b = eb[e]
            eb[e] = w
            ea.append(w)
            eb.append(b)
            ea.append(w)
            eb.append(x)
            w += 1
    V = 2 * L - 2
    adj: list[list[int]] = [[] for _ in range(V)]
    for a, b in zip(ea, eb):
        adj[a].append(b)
        adj[b].append(a)
    return BinaryTree(adj, labels)


# -- restriction -------------------------------------------------------------

def _induced(
    adj: list[list[int]],
    labels: dict[int, Label],
    keep_vertices: list[int],
    root_label: Label | None = None,
    via: int = -1,
) -> BinaryTree:
    """Subtree spanned by ``keep_vertices`` with degree-2 vertices suppressed.

    The first kept vertex is the traversal root.  It is normally a leaf; a
    branch point may serve as root when ``via`` confines the walk to one of
    its branches, in which case it becomes a leaf named ``root_label``.
    """
    root = keep_vertices[0]
    order, parent = _bfs_order(adj, root, via)
    cnt = [0] * len(adj)
    for v in keep_vertices:
        cnt[v] = 1
    for v in reversed(order):
        p = parent[v]
        if p >= 0:
            cnt[p] += cnt[v]

    anchor = [-1] * len(adj)
    new_adj: list[list[int]] = [[]]
    new_labels = {0: labels[root] if root_label is None else root_label}
    anchor[root] = 0
    for v in order:
        if v == root or cnt[v] == 0:
            continue
        p = parent[v]
        live = 0
        for w in adj[v]:
            if w != p and cnt[w]:
                live += 1
        if live == 1:
            anchor[v] = anchor[p]
            continue
        nid = len(new_adj)
        a = anchor[p]
        new_adj.append([a])
        new_adj[a].append(nid)
        anchor[v] = nid
        if live == 0:
            new_labels[nid] = labels[v]
    return BinaryTree(new_adj, new_labels)


def restrict(t: BinaryTree, keep: Iterable[Label]) -> BinaryTree:
    """Binary tree induced by ``t`` on the leaf labels ``keep``."""
    keep_labels = sorted_labels(set(keep))
    if not keep_labels:
        raise ValueError("cannot restrict to an empty leaf set")
    vertex_of = t.vertex_of
    missing = [lab for lab in keep_labels if lab not in vertex_of]
    if missing:
        raise ValueError(f"labels not in tree: {missing[:5]}")
    return _induced(t.adj, t.labels, [vertex_of[lab] for lab in keep_labels])


# -- splits and equivalence ------------------------------------------------

Split = tuple[tuple, tuple]


def split_set(t: BinaryTree) -> frozenset:
    """Leaf bipartition induced by every edge of ``t``.

    Each split is a pair of label tuples, each sorted by :func:`label_key`,
    with the side holding the smallest label first.
    """
    labs = sorted_labels(t.vertex_of)
    bit = {lab: 1 << i for i, lab in enumerate(labs)}
    full = (1 << len(labs)) - 1
    root = t.vertex_of[labs[0]]
    order, parent = _bfs_order(t.adj, root)
    mask = [0] * len(t.adj)
    for v, lab in t.labels.items():
        mask[v] = bit[lab]
    for v in reversed(order):
        p = parent[v]
        if p >= 0:
            mask[p] |= mask[v]

    def side(m: int) -> tuple:
        return tuple(lab for i, lab in enumerate(labs) if m >> i & 1)

    out = set()
    for v in order[1:]:
        m = mask[v]
        if m & 1:
            m = full ^ m
        # m now excludes the smallest label
        out.add((side(full ^ m), side(m)))
    return frozenset(out)


def nontrivial_splits(splits: frozenset) -> frozenset:
    return frozenset(s for s in splits if len(s[0]) > 1 and len(s[1]) > 1)


def is_equivalent(t: BinaryTree, u: BinaryTree) -> bool:
    """True iff the two trees are equal up to a label-preserving isomorphism."""
    if t.leaf_labels != u.leaf_labels:
        raise ValueError("trees have different leaf sets")
    return split_set(t) == split_set(u)


def attach_leaf(t: BinaryTree, edge_index: int, label: Label) -> BinaryTree:
    """Subdivide the ``edge_index``-th edge of :meth:`BinaryTree.edges` and hang ``label`` there.

    A single-vertex tree has no edges; the leaf is then joined to it directly.
    """
    if label in t.vertex_of:
        raise ValueError(f"label {label!r} already present")
    adj = [list(nbrs) for nbrs in t.adj]
    labels = dict(t.labels)
    if len(adj) == 1:
        adj = [[1], [0]]
        labels[1] = label
        return BinaryTree(adj, labels)
    a, b = list(t.edges())[edge_index]
    w = len(adj)
    x = w + 1
    adj[a][adj[a].index(b)] = w
    adj[b][adj[b].index(a)] = w
    adj.append([a, b, x])
    adj.append([w])
    labels[x] = label
    return BinaryTree(adj, labels)


def n_edges(t: BinaryTree) -> int:
    return len(t.adj) - 1
