"""Canonical Newick-like text form for :class:`~centroid_mast.trees.BinaryTree`.

Leaves are written ``L<k>``, ``STAR``, ``BULLET`` and ``T<id>`` (split
tokens).  The tree is hung from the edge at its smallest label and children
are listed by their smallest contained label, so equivalent trees serialize
to the same string.  The parser accepts any child order.
"""

from __future__ import annotations

import re

from .trees import BULLET, STAR, BinaryTree, Label, SplitToken, _bfs_order, label_key, sorted_labels

_TOKEN = re.compile(r"\s*([(),;]|[A-Za-z0-9_]+)")


def format_label(label: Label) -> str:
    if type(label) is int:
        return f"L{label}"
    if label is STAR:
        return "STAR"
    if label is BULLET:
        return "BULLET"
    return f"T{label.id}"


def parse_label(text: str) -> Label:
    if text == "STAR":
        return STAR
    if text == "BULLET":
        return BULLET
    m = re.fullmatch(r"([LT])(\d+)", text)
    if not m:
        raise ValueError(f"bad leaf token {text!r}")
    k = int(m.group(2))
    if m.group(1) == "L":
        if k < 1:
            raise ValueError("original labels start at L1")
        return k
    return SplitToken(k)


def to_newick(t: BinaryTree) -> str:
    labs = sorted_labels(t.vertex_of)
    first = labs[0]
    if t.n_vertices == 1:
        return format_label(first) + ";"
    root = t.vertex_of[first]
    order, parent = _bfs_order(t.adj, root)
    low = [None] * t.n_vertices
    for v, lab in t.labels.items():
        low[v] = label_key(lab)
    for v in reversed(order[1:]):
        p = parent[v]
        if low[p] is None or low[v] < low[p]:
            low[p] = low[v]

    out = ["(", format_label(first), ","]
    # stack items: a vertex to expand, or a literal string
    stack: list = [")", t.adj[root][0]]
    while stack:
        item = stack.pop()
        if type(item) is str:
            out.append(item)
            continue
        v = item
        if v in t.labels:
            out.append(format_label(t.labels[v]))
            continue
        kids = sorted((w for w in t.adj[v] if w != parent[v]), key=low.__getitem__)
        out.append("(")
        stack.append(")")
        for i in range(len(kids) - 1, -1, -1):
            stack.append(kids[i])
            if i:
                stack.append(",")
    out.append(";")
    return "".join(out)


def from_newick(text: str) -> BinaryTree:
    """Parse a tree written by :func:`to_newick` (child order is free)."""
    tokens = _TOKEN.findall(text.strip())
    if "".join(tokens) != re.sub(r"\s+", "", text):
        raise ValueError("unexpected characters in tree string")
    if not tokens or tokens[-1] != ";":
        raise ValueError("tree string must end with ';'")
    tokens = tokens[:-1]

    children: list[list[int]] = []
    labels: dict[int, Label] = {}
    stack: list[int] = []
    root = -1
    expect_item = True
    for tok in tokens:
        if tok == "(":
            if not expect_item:
                raise ValueError("missing ',' before '('")
            node = len(children)
            children.append([])
            if stack:
                children[stack[-1]].append(node)
            elif root >= 0:
                raise ValueError("more than one top-level tree")
            else:
                root = node
            stack.append(node)
        elif tok == ",":
            if expect_item or not stack:
                raise ValueError("misplaced ','")
            expect_item = True
            continue
        elif tok == ")":
            if expect_item or not stack:
                raise ValueError("misplaced ')'")
            stack.pop()
            expect_item = False
            continue
        elif tok == ";":
            raise ValueError("';' inside tree")
        else:
            if not expect_item:
                raise ValueError(f"missing ',' before {tok!r}")
            node = len(children)
            children.append([])
            labels[node] = parse_label(tok)
            if stack:
                children[stack[-1]].append(node)
            elif root >= 0:
                raise ValueError("more than one top-level tree")
            else:
                root = node
            expect_item = False
            continue
        expect_item = True
    if stack or root < 0:
        raise ValueError("unbalanced parentheses")
    if len(set(labels.values())) != len(labels):
        raise ValueError("duplicate leaf labels")

    for node, kids in enumerate(children):
        if node in labels:
            continue
        want = (2, 3) if node == root else (2,)
        if len(kids) not in want:
            raise ValueError("tree is not binary")

    edges = [(v, w) for v, kids in enumerate(children) for w in kids]
    if root not in labels and len(children[root]) == 2:
        # a degree-2 root is an edge subdivision; drop it
        a, b = children[root]
        edges = [e for e in edges if e[0] != root] + [(a, b)]
    used = {x for e in edges for x in e}
    if root in labels:
        used.add(root)
    keep = sorted(used)
    renum = {v: i for i, v in enumerate(keep)}
    adj: list[list[int]] = [[] for _ in keep]
    for a, b in edges:
        adj[renum[a]].append(renum[b])
        adj[renum[b]].append(renum[a])
    tree = BinaryTree(adj, {renum[v]: lab for v, lab in labels.items()})
    tree.validate()
    return tree
