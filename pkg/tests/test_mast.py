import itertools

import numpy as np
import pytest

import oracles
from centroid_mast.mast import agree_on, kappa_lower_bound_check, mast_exact
from centroid_mast.newick import from_newick
from centroid_mast.trees import STAR, RootKind, generate_uniform, is_equivalent, restrict


def test_identical_inputs():
    rng = np.random.default_rng(1)
    for kind in RootKind:
        t = generate_uniform(9, kind, rng)
        res = mast_exact(t, t)
        assert res.kappa == 9 and res.witness == set(range(1, 10))


def test_quartets_disagree():
    a = from_newick("((L1,L2),(L3,L4));")
    b = from_newick("((L1,L3),(L2,L4));")
    res = mast_exact(a, b)
    assert res.kappa == 3 and res.witness == {1, 2, 3}


def test_rooted_two_leaves():
    t = from_newick("(L1,(L2,STAR));")
    assert mast_exact(t, t).kappa == 2


def test_all_quartet_pairs():
    trees = oracles.enumerate_trees([1, 2, 3, 4])
    for a, b in itertools.product(trees, repeat=2):
        assert mast_exact(a, b).kappa == (4 if is_equivalent(a, b) else 3)


def test_rejections():
    rng = np.random.default_rng(2)
    t = generate_uniform(5, RootKind.ROOTED, rng)
    with pytest.raises(ValueError):
        mast_exact(t, generate_uniform(5, RootKind.DOUBLY, rng))
    with pytest.raises(ValueError):
        mast_exact(t, generate_uniform(6, RootKind.ROOTED, rng))
    big = generate_uniform(17, RootKind.NONROOTED, rng)
    with pytest.raises(ValueError):
        mast_exact(big, big)
    assert mast_exact(big, big, limit=17).kappa == 17


@pytest.mark.parametrize("kind", list(RootKind))
def test_matches_quartet_brute_force(kind):
    rng = np.random.default_rng(int(kind) + 40)
    for _ in range(60):
        n = int(rng.integers(1, 8))
        t, u = generate_uniform(n, kind, rng), generate_uniform(n, kind, rng)
        res = mast_exact(t, u)
        k, w = oracles.mast_brute(t, u)
        assert res.kappa == k
        # both searches take the first agreeing subset in lexicographic order
        assert res.witness == w
        assert agree_on(t, u, res.witness)


def test_properties():
    rng = np.random.default_rng(3)
    for _ in range(40):
        kind = RootKind(int(rng.integers(3)))
        n = int(rng.integers(1, 10))
        t, u = generate_uniform(n, kind, rng), generate_uniform(n, kind, rng)
        k = mast_exact(t, u).kappa
        assert mast_exact(u, t).kappa == k
        assert k >= (1 if kind == RootKind.NONROOTED else 0)
        B = [x for x in range(1, n + 1) if rng.random() < 0.6] or [1]
        keep = set(B) | set(t.distinguished)
        assert mast_exact(restrict(t, keep), restrict(u, keep)).kappa <= k


def test_kappa_lower_bound_examples():
    rng = np.random.default_rng(4)
    t = generate_uniform(7, RootKind.ROOTED, rng)
    assert kappa_lower_bound_check(t, t)
    empty = generate_uniform(0, RootKind.ROOTED, rng)
    assert kappa_lower_bound_check(empty, empty)
    for _ in range(50):
        t, u = generate_uniform(8, RootKind.ROOTED, rng), generate_uniform(8, RootKind.ROOTED, rng)
        assert kappa_lower_bound_check(t, u)
    with pytest.raises(ValueError):
        kappa_lower_bound_check(*(generate_uniform(3, RootKind.NONROOTED, rng),) * 2)
    assert STAR not in restrict(t, t.originals).leaf_labels
