import math
from collections import Counter

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.stats import chisquare

import oracles
from centroid_mast.newick import from_newick, to_newick
from centroid_mast.trees import (
    STAR,
    BinaryTree,
    RootKind,
    count_trees,
    generate_uniform,
    is_equivalent,
    log_count_trees,
    nontrivial_splits,
    restrict,
    split_set,
)

KINDS = [RootKind.NONROOTED, RootKind.ROOTED, RootKind.DOUBLY]


def test_count_trees_small_values():
    assert [count_trees(m) for m in range(8)] == [1, 1, 1, 1, 3, 15, 105, 945]
    assert count_trees(3) == 1
    assert count_trees(4) == 3
    assert count_trees(6) == 105


def test_count_trees_matches_enumeration():
    for m in range(1, 9):
        assert count_trees(m) == len(oracles.enumerate_trees(range(1, m + 1)))


def test_count_trees_recurrence_and_big_values():
    for m in range(3, 400):
        assert count_trees(m + 1) == (2 * m - 3) * count_trees(m)
    big = count_trees(10_000)
    assert big.bit_length() > 60_000
    assert math.isclose(log_count_trees(10_000), math.log(big), rel_tol=1e-12)


def test_count_trees_rejects_negative():
    with pytest.raises(ValueError):
        count_trees(-1)


def test_generate_base_cases(rng):
    t = generate_uniform(0, RootKind.ROOTED, rng)
    assert t.n_vertices == 1 and t.leaf_labels == {STAR}
    t = generate_uniform(0, RootKind.DOUBLY, rng)
    assert to_newick(t) == "(STAR,BULLET);"
    t = generate_uniform(3, RootKind.NONROOTED, rng)
    assert t.n_vertices == 4 and t.leaf_labels == {1, 2, 3}
    with pytest.raises(ValueError):
        generate_uniform(0, RootKind.NONROOTED, rng)


@pytest.mark.parametrize("kind", KINDS)
def test_generate_is_valid_and_seeded(kind):
    for n in range(1, 30):
        a = generate_uniform(n, kind, np.random.default_rng(n))
        b = generate_uniform(n, kind, np.random.default_rng(n))
        a.validate()
        assert a.adj == b.adj and a.labels == b.labels
        assert a.size == n and a.kind == kind


def test_generate_uniform_quartets():
    rng = np.random.default_rng(7)
    shapes = [to_newick(t) for t in oracles.enumerate_trees([1, 2, 3, 4])]
    counts = Counter(to_newick(generate_uniform(4, RootKind.NONROOTED, rng)) for _ in range(30_000))
    assert set(counts) == set(shapes)
    assert chisquare([counts[s] for s in shapes]).pvalue > 1e-3


def test_generate_uniform_rooted_n4():
    # 15 rooted shapes on {1,2,3,4} plus STAR
    rng = np.random.default_rng(8)
    shapes = [to_newick(t) for t in oracles.enumerate_trees([STAR, 1, 2, 3, 4])]
    counts = Counter(to_newick(generate_uniform(4, RootKind.ROOTED, rng)) for _ in range(30_000))
    assert len(shapes) == 15 and set(counts) == set(shapes)
    assert chisquare([counts[s] for s in shapes]).pvalue > 1e-3


def test_restrict_examples(rng):
    t = generate_uniform(9, RootKind.ROOTED, rng)
    assert is_equivalent(restrict(t, t.leaf_labels), t)
    e = restrict(t, {1, 2})
    assert e.n_vertices == 2 and e.leaf_labels == {1, 2}
    v = restrict(t, {5})
    assert v.n_vertices == 1
    with pytest.raises(ValueError):
        restrict(t, {1, 99})
    with pytest.raises(ValueError):
        restrict(t, set())


def test_restrict_caterpillar_quartet():
    cat = from_newick("(L1,(L2,(L3,(L4,L5))));")
    q = restrict(cat, {1, 2, 3, 4})
    expected = {((1, 2), (3, 4))}
    assert nontrivial_splits(split_set(q)) == expected
    assert oracles.quartet_profile(q) == oracles.quartet_profile(cat, [1, 2, 3, 4])


def test_split_set_examples():
    edge = from_newick("(L1,STAR);")
    assert split_set(edge) == {((1,), (STAR,))}
    q = from_newick("((L1,L2),(L3,L4));")
    assert split_set(q) == {
        ((1, 2), (3, 4)), ((1,), (2, 3, 4)), ((1, 3, 4), (2,)),
        ((1, 2, 4), (3,)), ((1, 2, 3), (4,)),
    }
    quartets = oracles.enumerate_trees([1, 2, 3, 4])
    assert len({split_set(t) for t in quartets}) == 3


def test_is_equivalent_examples():
    a = from_newick("((L1,L2),(L3,L4));")
    b = from_newick("((L1,L3),(L2,L4));")
    assert is_equivalent(a, a)
    assert not is_equivalent(a, b)
    for t in oracles.enumerate_trees([1, 2, 3]):
        assert is_equivalent(t, from_newick("(L1,(L2,L3));"))
    with pytest.raises(ValueError):
        is_equivalent(a, from_newick("((L1,L2),(L3,L5));"))


def test_equivalence_matches_quartet_oracle():
    trees = oracles.enumerate_trees([STAR, 1, 2, 3, 4, 5])
    rng = np.random.default_rng(3)
    for _ in range(300):
        i, j = rng.integers(len(trees), size=2)
        assert is_equivalent(trees[i], trees[j]) == oracles.same_tree(trees[i], trees[j]) == (i == j)


def test_degenerate_trees_are_values():
    v = BinaryTree([[]], {0: 1})
    v.validate()
    assert split_set(v) == frozenset()
    assert is_equivalent(v, restrict(v, {1}))


@given(st.integers(4, 40), st.sampled_from(KINDS), st.integers(0, 2**32 - 1), st.data())
def test_restrict_commutes(n, kind, seed, data):
    rng = np.random.default_rng(seed)
    t = generate_uniform(n, kind, rng)
    labels = sorted(t.originals)
    B = set(data.draw(st.lists(st.sampled_from(labels), min_size=2, unique=True)))
    C = set(data.draw(st.lists(st.sampled_from(sorted(B)), min_size=1, unique=True)))
    D = set(t.distinguished)
    tb = restrict(t, B | D)
    tb.validate()
    assert is_equivalent(restrict(tb, C | D), restrict(t, C | D))
    if len(B | D) <= 9:
        assert oracles.quartet_profile(tb) == oracles.quartet_profile(t, B | D)


def test_restriction_of_uniform_is_uniform():
    rng = np.random.default_rng(11)
    counts = Counter()
    for _ in range(20_000):
        t = generate_uniform(6, RootKind.NONROOTED, rng)
        counts[nontrivial_splits(split_set(restrict(t, {2, 3, 5, 6})))] += 1
    assert len(counts) == 3
    assert chisquare(list(counts.values())).pvalue > 1e-3
