"""Acceptance suite: one test per criterion, each reporting a PASS/FAIL line."""
import json
import math
import subprocess
import sys
import time
from collections import Counter
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import chisquare

import oracles
from centroid_mast.dirichlet import DOUBLY_LAW, ROOTED_LAW, asymptotic_ratio_check, pmf_moments
from centroid_mast.experiment import ExperimentConfig, estimate_exponent, format_records, run_experiment
from centroid_mast.gamma import check_witness, gamma
from centroid_mast.mast import kappa_lower_bound_check, mast_exact
from centroid_mast.splitting import pmf_arrays, split, split_at, split_pmf_doubly, split_pmf_rooted
from centroid_mast.trees import RootKind, count_trees, generate_uniform, nontrivial_splits, restrict, split_set

KINDS = (RootKind.ROOTED, RootKind.DOUBLY)


def _pmf_table(kind, n):
    entries = split_pmf_doubly(n) if kind == RootKind.DOUBLY else split_pmf_rooted(n)
    return {e.sizes: e.probability for e in entries}


def _pooled_chisquare(counts, probs, total):
    """Chi-square with cells of expected count below 5 pooled into one."""
    obs, exp, rest_o, rest_e = [], [], 0, 0.0
    for k, p in probs.items():
        e = float(p) * total
        if e < 5:
            rest_o += counts.get(k, 0)
            rest_e += e
        else:
            obs.append(counts.get(k, 0))
            exp.append(e)
    if rest_e > 0:
        obs.append(rest_o)
        exp.append(rest_e)
    return chisquare(obs, exp).pvalue


def test_fixed_point_from_cli(criterion):
    start = time.perf_counter()
    res = subprocess.run([sys.executable, "-m", "centroid_mast", "beta"],
                         capture_output=True, text=True, timeout=300)
    elapsed = time.perf_counter() - start
    doc = json.loads(res.stdout) if res.returncode == 0 else {"beta": math.nan, "alpha": math.nan}
    ok = 0.4464 < doc["beta"] < 0.4465 and 0.854 < doc["alpha"] < 0.864 and elapsed < 60
    criterion(1, ok, f"beta={doc['beta']:.7f} alpha={doc['alpha']:.5f} runtime={elapsed:.1f}s")


def test_moments_match_finite_n(criterion):
    gaps = []
    for law, doubly in ((ROOTED_LAW, False), (DOUBLY_LAW, True)):
        m, _ = law.moments([0.4464])
        gaps.append(np.abs(m[0] - pmf_moments(5000, 0.4464, doubly)).max())
    criterion(2, max(gaps) < 5e-3, f"max |quadrature - pmf| at n=5000: rooted {gaps[0]:.2e}, doubly {gaps[1]:.2e}")


def test_exact_pmfs(criterion):
    exact_ok = all(
        sum(e.probability for e in split_pmf_doubly(n)) == 1 and
        sum(e.probability for e in split_pmf_rooted(n)) == 1 and
        isinstance(split_pmf_rooted(n)[0].probability, Fraction)
        for n in range(2, 301)
    ) and sum(e.probability for e in split_pmf_doubly(1)) == 1
    float_err = max(abs(pmf_arrays(n, d)[1].sum() - 1) for n in (301, 500, 1000, 2000, 5000) for d in (True, False))
    pvals = {}
    for kind in KINDS:
        rng = np.random.default_rng(100 + int(kind))
        counts = Counter(split(generate_uniform(10, kind, rng), rng).sizes for _ in range(100_000))
        probs = _pmf_table(kind, 10)
        pvals[kind.name] = _pooled_chisquare(counts, probs, 100_000) if set(counts) <= set(probs) else 0.0
    ok = exact_ok and float_err <= 1e-12 and min(pvals.values()) > 1e-3
    criterion(3, ok, f"exact sums n<=300 {'ok' if exact_ok else 'BAD'}; float sum error {float_err:.1e}; "
                     f"chi-square p at n=10: " + ", ".join(f"{k} {v:.3f}" for k, v in pvals.items()))


def test_counting(criterion):
    counts = [count_trees(m) for m in range(8)]
    ratios = asymptotic_ratio_check(1000)
    err = max(abs(r - 1) for r in ratios)
    ok = counts == [1, 1, 1, 1, 3, 15, 105, 945] and err < 0.01
    criterion(4, ok, f"c_0..c_7={counts}; ratio error at n=1000 {err:.2e}")


def test_algorithm_validity(criterion):
    rng = np.random.default_rng(2024)
    bad = []
    pairs = 10_000
    for i in range(pairs):
        kind = KINDS[i % 2]
        n = 1 + (i // 2) % 12
        t, u = generate_uniform(n, kind, rng), generate_uniform(n, kind, rng)
        trace = []
        res = gamma(t, u, rng, trace)
        if not check_witness(t, u, res):
            bad.append((i, "witness"))
        elif res.size > mast_exact(t, u).kappa:
            bad.append((i, "gamma > kappa"))
        elif any(node.size != sum(node.child_sizes) for node in trace):
            bad.append((i, "decomposition"))
    criterion(5, not bad, f"{pairs} pairs over n=1..12, both kinds; failures {bad[:5]}")


def test_uniformity_and_consistency(criterion):
    rng = np.random.default_rng(77)
    classes = Counter(
        nontrivial_splits(split_set(restrict(generate_uniform(5, RootKind.NONROOTED, rng), {1, 2, 3, 4})))
        for _ in range(100_000)
    )
    p = chisquare(list(classes.values())).pvalue if len(classes) == 3 else 0.0
    problems = {}
    for kind, sizes in ((RootKind.DOUBLY, range(1, 7)), (RootKind.ROOTED, range(2, 7))):
        for n in sizes:
            found = oracles.uniformity_problems(oracles.split_tally(kind, n, split_at), kind, n)
            if found:
                problems[(kind.name, n)] = found[:2]
    ok = p > 1e-3 and not problems
    criterion(6, ok, f"restriction to 4 leaves: {len(classes)} classes, p={p:.3f}; "
                     f"conditional uniformity n<=6: {'ok' if not problems else problems}")


def test_coupling(criterion):
    rng = np.random.default_rng(8)
    held = sum(kappa_lower_bound_check(generate_uniform(8, RootKind.ROOTED, rng),
                                       generate_uniform(8, RootKind.ROOTED, rng)) for _ in range(500))
    criterion(7, held == 500, f"kappa bound held on {held}/500 rooted pairs at n=8")


@pytest.mark.slow
def test_growth_rate(criterion):
    cfg = ExperimentConfig(n_values=tuple(2**k for k in range(10, 17)), kind=RootKind.ROOTED,
                           replicates=200, master_seed=20240601)
    est = estimate_exponent(run_experiment(cfg))
    lo, hi = est.interval(0.95)
    ok = 0.40 <= est.slope <= 0.47 and est.slope > 0.366 and lo > 0.366
    criterion(8, ok, f"slope {est.slope:.4f}, 95% interval [{lo:.4f}, {hi:.4f}] over n=2^10..2^16")


def test_determinism_across_workers(criterion, tmp_path):
    same = {}
    for fmt in ("csv", "json"):
        outputs = set()
        for workers in (1, 2, 4):
            path = tmp_path / f"w{workers}.{fmt}"
            recs = run_experiment(ExperimentConfig(n_values=(3, 9, 40, 200), kind=RootKind.DOUBLY, replicates=8,
                                                   master_seed=424242, workers=workers, compute_kappa=True,
                                                   output_path=str(path), format=fmt))
            outputs.add(path.read_bytes())
            outputs.add(format_records(recs, fmt).encode())
        same[fmt] = len(outputs) == 1
    criterion(9, all(same.values()), f"byte-identical across workers 1/2/4: {same}")
