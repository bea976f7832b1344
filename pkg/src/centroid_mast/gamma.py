"""Recursive centroid-splitting construction of a common subtree.

Both trees are cut at their (semi-)centroids, matching branches are
intersected, the induced pairs are solved recursively, and the three answers
are glued back at the split point.  ``gamma`` is the number of original
leaves in the result.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .splitting import _branches, find_centroid, find_semi_centroid
from .trees import (
    BULLET,
    STAR,
    BinaryTree,
    RootKind,
    SplitToken,
    _induced,
    attach_leaf,
    is_equivalent,
    label_key,
    n_edges,
    restrict,
)


@dataclass(frozen=True)
class GammaResult:
    size: int
    subtree_leafset: frozenset
    witness_tree: BinaryTree


@dataclass
class GammaNode:
    """One internal step of the recursion, recorded when tracing."""

    kind: RootKind
    n: int
    size: int
    child_sizes: tuple
    split_sizes: tuple = field(default=())  # branch sizes in t and in u


# What each branch carries into the recursion: (distinguished leaves kept,
# role the split token takes).  The token becomes BULLET next to an inherited
# STAR and STAR otherwise.
_ROLES = {
    RootKind.DOUBLY: (((STAR,), BULLET), ((BULLET,), STAR), ((), STAR)),
    RootKind.ROOTED: (((), STAR), ((), STAR), ((STAR,), BULLET)),
}


def _check_pair(t: BinaryTree, u: BinaryTree) -> RootKind:
    if t.leaf_labels != u.leaf_labels:
        raise ValueError("trees have different leaf sets")
    kind = t.kind
    if kind == RootKind.NONROOTED:
        raise ValueError("use gamma_nonrooted for trees without distinguished leaves")
    need = (STAR,) if kind == RootKind.ROOTED else (STAR, BULLET)
    if any(m not in t.vertex_of for m in need):
        raise ValueError("distinguished leaves must be named STAR (and BULLET)")
    return kind


def _join(parts: list[BinaryTree], token: SplitToken) -> BinaryTree:
    """Glue trees that share a ``token`` leaf into one vertex.

    The glued vertex may end up with degree 1 or 2 when some part is just
    the token; a final restriction tidies that up.
    """
    adj: list[list[int]] = [[]]  # vertex 0 is the glue point
    labels = {}
    for w in parts:
        tv = w.vertex_of[token]
        base = len(adj)
        ids = [0 if v == tv else base + v for v in range(len(w.adj))]
        for v, nbrs in enumerate(w.adj):
            # the token's own slot stays as an unreachable placeholder
            adj.append([] if v == tv else [ids[x] for x in nbrs])
        adj[0].extend(ids[x] for x in w.adj[tv])
        labels.update({ids[v]: lab for v, lab in w.labels.items() if v != tv})
    keep = sorted(labels, key=lambda v: label_key(labels[v]))
    return _induced(adj, labels, keep)


def _solve(t: BinaryTree, u: BinaryTree, kind: RootKind, rng, tokens, trace) -> BinaryTree:
    n = t.size
    if n == 0 or (kind == RootKind.ROOTED and n == 1):
        return t
    token = SplitToken(next(tokens))
    if kind == RootKind.DOUBLY:
        bt, bu = find_semi_centroid(t), find_semi_centroid(u)
        child_kinds = (RootKind.DOUBLY, RootKind.DOUBLY, RootKind.ROOTED)
    else:
        bt, bu = find_centroid(t), find_centroid(u)
        child_kinds = (RootKind.ROOTED, RootKind.ROOTED, RootKind.DOUBLY)
    brs_t = _branches(t, bt, rng)
    brs_u = _branches(u, bu, rng)

    parts = []
    for (keep_marks, role), ckind, brt, bru in zip(_ROLES[kind], child_kinds, brs_t, brs_u):
        common = set(brt.originals).intersection(bru.originals)
        sub = []
        for tree, b, br in ((t, bt, brt), (u, bu, bru)):
            vo = tree.vertex_of
            keep = [b] + [vo[x] for x in common] + [vo[m] for m in keep_marks]
            sub.append(_induced(tree.adj, tree.labels, keep, root_label=role, via=br.via))
        w = _solve(sub[0], sub[1], ckind, rng, tokens, trace)
        parts.append(w.relabel({role: token}))
    out = _join(parts, token)
    if trace is not None:
        trace.append(GammaNode(
            kind=kind,
            n=n,
            size=out.size,
            child_sizes=tuple(p.size for p in parts),
            split_sizes=(tuple(len(b.originals) for b in brs_t), tuple(len(b.originals) for b in brs_u)),
        ))
    return out


def gamma(t: BinaryTree, u: BinaryTree, rng: np.random.Generator,
          trace: Optional[list] = None) -> GammaResult:
    """Common subtree of two rooted (or two doubly-rooted) trees.

    ``rng`` is consumed only by centroid ties, in recursion preorder, tree
    ``t`` before ``u``.  Pass a list as ``trace`` to collect a
    :class:`GammaNode` per internal step.
    """
    kind = _check_pair(t, u)
    w = _solve(t, u, kind, rng, itertools.count(), trace)
    leaves = w.originals
    return GammaResult(len(leaves), leaves, w)


def gamma_nonrooted(t: BinaryTree, u: BinaryTree, rng: np.random.Generator,
                    trace: Optional[list] = None) -> GammaResult:
    """Run :func:`gamma` after hanging STAR from a uniform edge of each tree.

    For uniform inputs this makes the pair uniform rooted trees; stripping
    STAR from the witness leaves a common subtree of the originals.
    """
    if t.leaf_labels != u.leaf_labels:
        raise ValueError("trees have different leaf sets")
    if t.kind != RootKind.NONROOTED:
        raise ValueError("inputs must carry no distinguished leaves")
    if t.size == 0:
        raise ValueError("need at least one leaf")
    rooted = []
    for tree in (t, u):
        m = n_edges(tree)
        e = int(rng.integers(m)) if m else 0
        rooted.append(attach_leaf(tree, e, STAR))
    res = gamma(rooted[0], rooted[1], rng, trace)
    if res.size == 0:
        # tie coins can empty every branch; one shared leaf is always common
        first = min(t.originals)
        return GammaResult(1, frozenset([first]), restrict(t, [first]))
    witness = restrict(res.witness_tree, res.subtree_leafset)
    return GammaResult(res.size, res.subtree_leafset, witness)


def check_witness(t: BinaryTree, u: BinaryTree, result: GammaResult) -> bool:
    """Both inputs restrict to the witness on its leaf set."""
    keep = set(result.subtree_leafset) | set(t.distinguished)
    w = result.witness_tree
    if w.leaf_labels != frozenset(keep):
        return False
    return is_equivalent(restrict(t, keep), w) and is_equivalent(restrict(u, keep), w)
