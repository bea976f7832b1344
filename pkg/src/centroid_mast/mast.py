"""Exact largest common subtree by exhaustive subset search.

Only meant for small trees (default limit 16 original leaves).  Subsets of
the original leaves are tried from largest to smallest, lexicographically
within a size, and the first one on which both trees induce the same tree
wins.  Distinguished leaves are always kept but never counted.

A subset is checked without building the restricted trees: the non-trivial
splits of ``t|B`` are exactly the edge bipartitions of ``t`` intersected
with ``B`` that leave at least two leaves on each side.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .trees import STAR, BinaryTree, _bfs_order, restrict, sorted_labels

DEFAULT_LIMIT = 16


@dataclass(frozen=True)
class MastResult:
    kappa: int
    witness: frozenset


def _edge_masks(t: BinaryTree, bit: dict) -> list[int]:
    root = t.vertex_of[next(iter(bit))]
    order, parent = _bfs_order(t.adj, root)
    mask = [0] * t.n_vertices
    for v, lab in t.labels.items():
        mask[v] = bit[lab]
    for v in reversed(order):
        p = parent[v]
        if p >= 0:
            mask[p] |= mask[v]
    return sorted({mask[v] for v in order[1:]})


def _induced_splits(masks: list[int], full: int) -> frozenset:
    low = full & -full
    out = set()
    for m in masks:
        x = m & full
        if x & low:
            x ^= full
        # x is now the side without the lowest kept leaf
        if x & (x - 1) and (full ^ x) & ((full ^ x) - 1):
            out.add(x)
    return frozenset(out)


def _check_inputs(t: BinaryTree, u: BinaryTree) -> None:
    if t.leaf_labels != u.leaf_labels:
        raise ValueError("trees have different leaf sets")
    if t.kind != u.kind:
        raise ValueError("trees have different kinds")


def mast_exact(t: BinaryTree, u: BinaryTree, limit: int = DEFAULT_LIMIT) -> MastResult:
    """Size of the largest common subtree, and the lexicographically first witness."""
    _check_inputs(t, u)
    n = t.size
    if n > limit:
        raise ValueError(f"exhaustive search refused for n={n} > limit={limit}")
    originals = sorted(t.originals)
    marks = sorted_labels(t.distinguished)
    # distinguished leaves get the low bits so they anchor every canonical side
    bit = {lab: 1 << i for i, lab in enumerate(marks + originals)}
    base = (1 << len(marks)) - 1
    mt = _edge_masks(t, bit)
    mu = _edge_masks(u, bit)
    for k in range(n, -1, -1):
        for combo in combinations(originals, k):
            full = base
            for lab in combo:
                full |= bit[lab]
            if full == 0:
                continue
            if _induced_splits(mt, full) == _induced_splits(mu, full):
                return MastResult(k, frozenset(combo))
    raise AssertionError("unreachable: the empty subset always agrees")


def agree_on(t: BinaryTree, u: BinaryTree, subset) -> bool:
    """Direct check: do ``t`` and ``u`` restrict to equivalent trees on ``subset``?

    Distinguished leaves are added automatically.
    """
    from .trees import is_equivalent

    keep = set(subset) | set(t.distinguished)
    if not keep:
        return True
    return is_equivalent(restrict(t, keep), restrict(u, keep))


def strip_star(t: BinaryTree) -> BinaryTree:
    """Drop STAR from a rooted tree (the coupling to the non-rooted model)."""
    return restrict(t, t.originals)


def kappa_lower_bound_check(t1: BinaryTree, u1: BinaryTree, limit: int = DEFAULT_LIMIT) -> bool:
    """kappa of the STAR-stripped pair is at least kappa of the rooted pair."""
    if STAR not in t1.vertex_of or t1.kind != 1:
        raise ValueError("expected rooted trees")
    rooted = mast_exact(t1, u1, limit).kappa
    if t1.size == 0:
        return rooted <= 0
    return mast_exact(strip_star(t1), strip_star(u1), limit).kappa >= rooted
