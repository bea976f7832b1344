"""Centroid and semi-centroid splitting of rooted and doubly-rooted trees.

Also holds the exact finite-n laws of the three branch sizes.  Doubly-rooted
trees are split at the semi-centroid of the STAR-BULLET path; rooted trees at
the centroid counting STAR as a leaf, ties going to the vertex farther from
STAR.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

import numpy as np

from .trees import (
    BULLET,
    STAR,
    BinaryTree,
    Label,
    RootKind,
    SplitToken,
    _bfs_order,
    count_trees,
    label_key,
)

EXACT_PMF_LIMIT = 300


@dataclass(frozen=True)
class SplitOutcome:
    """Result of cutting a tree at one branch point.

    ``subtrees[i]`` keeps the i-th branch plus a leaf ``token`` where the
    branch point was.  ``leaf_sets`` and ``sizes`` count original leaves only.
    """

    branch_point: int
    token: SplitToken
    subtrees: tuple
    leaf_sets: tuple
    sizes: tuple


@dataclass(frozen=True)
class SplitPmfEntry:
    sizes: tuple
    probability: object  # Fraction, or float above EXACT_PMF_LIMIT


class _Branch:
    """One side of a branch point: its BFS walk and the labels it holds."""

    __slots__ = ("via", "order", "labels", "originals")

    def __init__(self, t: BinaryTree, b: int, via: int):
        self.via = via
        self.order, _ = _bfs_order(t.adj, b, via)
        tl = t.labels
        self.labels = [tl[v] for v in self.order if v in tl]
        self.originals = [lab for lab in self.labels if type(lab) is int]


def _require(t: BinaryTree, *marks: Label) -> None:
    for m in marks:
        if m not in t.vertex_of:
            raise ValueError(f"tree has no {m!r} leaf")


def find_semi_centroid(t: BinaryTree) -> int:
    """Branch point on the STAR-BULLET path with l1 < n/2 and l2 <= n/2.

    l1 and l2 count original leaves on the STAR and BULLET sides.
    """
    _require(t, STAR, BULLET)
    n = t.size
    if n == 0:
        raise ValueError("semi-centroid needs at least one original leaf")
    star = t.vertex_of[STAR]
    bullet = t.vertex_of[BULLET]
    order, parent = _bfs_order(t.adj, star)
    labels = t.labels
    cnt = [0] * t.n_vertices
    for v in reversed(order):
        if type(labels.get(v)) is int:
            cnt[v] += 1
        p = parent[v]
        if p >= 0:
            cnt[p] += cnt[v]

    path = []
    v = parent[bullet]
    while v != star:
        path.append(v)
        v = parent[v]
    path.reverse()  # nearest STAR first
    on_path = set(path)
    on_path.update((star, bullet))
    side = []
    for p in path:
        (c,) = [w for w in t.adj[p] if w not in on_path]
        side.append(cnt[c])

    hits = []
    l1 = 0
    l2 = n
    for p, s in zip(path, side):
        l2 -= s
        if 2 * l1 < n and 2 * l2 <= n:
            hits.append(p)
        l1 += s
    if len(hits) != 1:
        raise AssertionError(f"expected one semi-centroid, found {len(hits)}")
    return hits[0]


def find_centroid(t: BinaryTree) -> int:
    """Centroid over all n+1 leaves of a rooted tree (STAR included).

    When two adjacent vertices qualify, the one farther from STAR wins.
    """
    _require(t, STAR)
    if BULLET in t.vertex_of:
        raise ValueError("centroid split is defined for rooted trees")
    n = t.size
    if n <= 1:
        raise ValueError("a rooted tree needs two original leaves to have a branch point")
    total = n + 1
    star = t.vertex_of[STAR]
    order, parent = _bfs_order(t.adj, star)
    cnt = [0] * t.n_vertices
    labels = t.labels
    for v in reversed(order):
        if v in labels:
            cnt[v] += 1
        p = parent[v]
        if p >= 0:
            cnt[p] += cnt[v]
    cnt[star] = 0

    v = t.adj[star][0]
    while True:
        heavy = [c for c in t.adj[v] if c != parent[v] and 2 * cnt[c] >= total]
        if not heavy:
            return v
        (c,) = heavy
        if 2 * cnt[c] == total:
            return c
        v = c


def _order_branches(t: BinaryTree, branches: list, rng) -> list:
    has_star = STAR in t.vertex_of
    has_bullet = BULLET in t.vertex_of
    if has_star and has_bullet:
        star_side = [br for br in branches if STAR in br.labels]
        bullet_side = [br for br in branches if BULLET in br.labels]
        if star_side[0] is bullet_side[0]:
            raise ValueError("branch point is not on the STAR-BULLET path")
        rest = [br for br in branches if br is not star_side[0] and br is not bullet_side[0]]
        return [star_side[0], bullet_side[0], rest[0]]
    if has_star:
        (s3,) = [br for br in branches if STAR in br.labels]
        s1, s2 = [br for br in branches if br is not s3]
        k1, k2 = len(s1.originals), len(s2.originals)
        if k1 > k2:
            s1, s2 = s2, s1
        elif k1 == k2:
            if rng is None:
                raise ValueError("tied branch sizes need an rng for the coin flip")
            if rng.random() < 0.5:
                s1, s2 = s2, s1
        return [s1, s2, s3]

    def key(br):
        return (len(br.originals), min(label_key(lab) for lab in br.labels))

    return sorted(branches, key=key)


def _branches(t: BinaryTree, b: int, rng=None) -> list:
    if len(t.adj[b]) != 3:
        raise ValueError(f"vertex {b} is not a branch point")
    return _order_branches(t, [_Branch(t, b, c) for c in t.adj[b]], rng)


def _branch_subtree(t: BinaryTree, b: int, br: _Branch, token: Label) -> BinaryTree:
    # order[0] is b itself, so it is renumbered to the token leaf 0
    renum = {v: i for i, v in enumerate(br.order)}
    adj = [[renum[br.via]]] + [[renum[w] for w in t.adj[v]] for v in br.order[1:]]
    labels = {renum[v]: t.labels[v] for v in br.order[1:] if v in t.labels}
    labels[0] = token
    return BinaryTree(adj, labels)


def split_at(t: BinaryTree, b: int, rng: Optional[np.random.Generator] = None,
             token: Optional[SplitToken] = None) -> SplitOutcome:
    """Cut ``t`` at branch point ``b`` into three trees sharing a fresh token leaf.

    Branch order: doubly-rooted -> (STAR side, BULLET side, rest); rooted ->
    the two STAR-free sides by size with a coin flip on ties, STAR side last;
    otherwise by size.  The rng is only consulted for that coin flip.
    """
    if token is None:
        token = SplitToken(0)
    branches = _branches(t, b, rng)
    subtrees = tuple(_branch_subtree(t, b, br, token) for br in branches)
    leaf_sets = tuple(frozenset(br.originals) for br in branches)
    return SplitOutcome(
        branch_point=b,
        token=token,
        subtrees=subtrees,
        leaf_sets=leaf_sets,
        sizes=tuple(len(s) for s in leaf_sets),
    )


def split(t: BinaryTree, rng: Optional[np.random.Generator] = None,
          token: Optional[SplitToken] = None) -> SplitOutcome:
    """Split at the semi-centroid (doubly-rooted) or centroid (rooted)."""
    kind = t.kind
    if kind == RootKind.DOUBLY:
        b = find_semi_centroid(t)
    elif kind == RootKind.ROOTED:
        b = find_centroid(t)
    else:
        raise ValueError("only rooted and doubly-rooted trees are split")
    return split_at(t, b, rng, token)


# -- exact branch-size laws -----------------------------------------------------

def _multinomial(n: int, parts) -> int:
    out = math.factorial(n)
    for k in parts:
        out //= math.factorial(k)
    return out


def doubly_triples(n: int):
    """Admissible (l1, l2, l3): sum n, l1 < n/2, l2 <= n/2."""
    for l1 in range((n + 1) // 2):
        for l2 in range(min(n - l1, n // 2) + 1):
            yield (l1, l2, n - l1 - l2)


def rooted_triples(n: int):
    """Admissible (k1, k2, k3): sum n, k1 <= k2 < (n+1)/2, k3 <= (n-1)/2."""
    for k3 in range((n - 1) // 2 + 1):
        for k1 in range((n - k3) // 2 + 1):
            k2 = n - k3 - k1
            if k1 <= k2 and 2 * k2 < n + 1:
                yield (k1, k2, k3)


def split_pmf_doubly(n: int) -> list[SplitPmfEntry]:
    """Law of the semi-centroid branch sizes of a uniform doubly-rooted tree."""
    if n < 1:
        raise ValueError("n must be at least 1")
    if n > EXACT_PMF_LIMIT:
        sizes, probs = _float_pmf_arrays(n, doubly=True)
        return [SplitPmfEntry(tuple(map(int, s)), float(p)) for s, p in zip(sizes, probs)]
    c = [count_trees(m) for m in range(n + 3)]
    den = c[n + 2]
    return [
        SplitPmfEntry((l1, l2, l3), Fraction(_multinomial(n, (l1, l2, l3)) * c[l1 + 2] * c[l2 + 2] * c[l3 + 1], den))
        for l1, l2, l3 in doubly_triples(n)
    ]


def split_pmf_rooted(n: int) -> list[SplitPmfEntry]:
    """Law of the centroid branch sizes of a uniform rooted tree."""
    if n < 2:
        raise ValueError("n must be at least 2")
    if n > EXACT_PMF_LIMIT:
        sizes, probs = _float_pmf_arrays(n, doubly=False)
        return [SplitPmfEntry(tuple(map(int, s)), float(p)) for s, p in zip(sizes, probs)]
    c = [count_trees(m) for m in range(n + 3)]
    den = c[n + 1]
    out = []
    for k1, k2, k3 in rooted_triples(n):
        num = _multinomial(n, (k1, k2, k3)) * c[k1 + 1] * c[k2 + 1] * c[k3 + 2]
        p = Fraction(num, den) if k1 < k2 else Fraction(num, 2 * den)
        out.append(SplitPmfEntry((k1, k2, k3), p))
    return out


def _central_ratios(n: int) -> tuple[np.ndarray, np.ndarray]:
    """``a[k] = C(2k, k) / 4^k`` and ``b[k] = c_{k+1} / (k! 2^k)`` for ``k <= n``.

    With ``c_{k+2} / k! = a[k] 2^k`` and ``c_{k+1} / k! = b[k] 2^k`` the
    powers of two cancel out of both laws, leaving products of numbers in
    ``(0, 1]``.  Log-gamma sums lose about ``1e-16 * n log n`` in the
    exponent, which exceeds ``1e-12`` once ``n`` reaches a few thousand.
    """
    k = np.arange(1, n + 1)
    a = np.concatenate([[1.0], np.cumprod((2 * k - 1) / (2 * k))])
    b = np.empty(n + 1)
    b[0] = 1.0
    b[1:] = a[:-1] / (2 * k)
    return a, b


def _float_pmf_arrays(n: int, doubly: bool) -> tuple[np.ndarray, np.ndarray]:
    """Vectorised pmf in floating point: (sizes array (m, 3), probabilities (m,))."""
    a, b = _central_ratios(n)
    if doubly:
        l1, l2 = np.meshgrid(np.arange((n + 1) // 2), np.arange(n // 2 + 1), indexing="ij")
        l1, l2 = l1.ravel(), l2.ravel()
        l3 = n - l1 - l2
        ok = l3 >= 0
        s = np.stack([l1[ok], l2[ok], l3[ok]], axis=1)
        p = a[s[:, 0]] * a[s[:, 1]] * b[s[:, 2]] / a[n]
    else:
        k3, k1 = np.meshgrid(np.arange((n - 1) // 2 + 1), np.arange(n // 2 + 1), indexing="ij")
        k3, k1 = k3.ravel(), k1.ravel()
        k2 = n - k3 - k1
        ok = (k1 <= k2) & (2 * k2 < n + 1)
        s = np.stack([k1[ok], k2[ok], k3[ok]], axis=1)
        delta = np.where(s[:, 0] == s[:, 1], 0.5, 1.0)
        p = delta * b[s[:, 0]] * b[s[:, 1]] * a[s[:, 2]] / b[n]
    return s, p


def pmf_arrays(n: int, doubly: bool) -> tuple[np.ndarray, np.ndarray]:
    """Sizes and float probabilities of either law, any n."""
    if n > EXACT_PMF_LIMIT:
        return _float_pmf_arrays(n, doubly)
    entries = split_pmf_doubly(n) if doubly else split_pmf_rooted(n)
    sizes = np.array([e.sizes for e in entries], dtype=np.int64).reshape(-1, 3)
    return sizes, np.array([float(e.probability) for e in entries])
