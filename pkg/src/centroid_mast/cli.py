"""Command-line front end.

Trees are read as canonical Newick strings, either inline, from a file path,
or from standard input when given as ``-``.  Every subcommand except
``experiment`` (and ``gen`` in csv mode) prints one JSON object.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .dirichlet import DEFAULT_QUAD_ERROR, NoSignChange, heuristic_residuals, solve_beta
from .experiment import (
    KIND_BY_NAME,
    ExperimentConfig,
    ExperimentIOError,
    alpha_ratio,
    estimate_exponent,
    format_records,
    run_experiment,
)
from .gamma import check_witness, gamma, gamma_nonrooted
from .mast import DEFAULT_LIMIT, agree_on, mast_exact
from .newick import format_label, from_newick, to_newick
from .splitting import split
from .trees import RootKind, generate_uniform, sorted_labels


def _read_tree(arg: str):
    if arg == "-":
        text = sys.stdin.readline()
    elif os.path.exists(arg):
        with open(arg) as fh:
            text = fh.read()
    else:
        text = arg
    return from_newick(text.strip())


def _labels(labels) -> list[str]:
    return [format_label(x) for x in sorted_labels(labels)]


def _emit(args, text: str) -> None:
    if not text.endswith("\n"):
        text += "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2)


def _n_list(text: str) -> list[int]:
    try:
        ns = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")
    if not ns or min(ns) < 0:
        raise argparse.ArgumentTypeError("sizes must be non-negative")
    return sorted(set(ns))


def _u64(text: str) -> int:
    v = int(text, 0)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in 64 bits")
    return v


# -- subcommands ----------------------------------------------------------------

def cmd_gen(args) -> int:
    rng = np.random.default_rng(args.seed)
    kind = KIND_BY_NAME[args.kind]
    trees = [to_newick(generate_uniform(args.n, kind, rng)) for _ in range(args.count)]
    if args.format == "json":
        _emit(args, _json({"n": args.n, "kind": args.kind, "seed": args.seed, "trees": trees}))
    else:
        _emit(args, "\n".join(trees))
    return 0


def cmd_split(args) -> int:
    t = _read_tree(args.tree)
    out = split(t, np.random.default_rng(args.seed))
    _emit(args, _json({
        "branch_point": out.branch_point,
        "token": format_label(out.token),
        "subtrees": [to_newick(s) for s in out.subtrees],
        "sizes": list(out.sizes),
        "leaf_sets": [_labels(s) for s in out.leaf_sets],
    }))
    return 0


def cmd_gamma(args) -> int:
    t, u = _read_tree(args.tree1), _read_tree(args.tree2)
    rng = np.random.default_rng(args.seed)
    res = gamma_nonrooted(t, u, rng) if t.kind == RootKind.NONROOTED else gamma(t, u, rng)
    if args.validate and not check_witness(t, u, res):
        print("error: witness fails restriction check", file=sys.stderr)
        return 3
    _emit(args, _json({
        "size": res.size,
        "leaf_set": _labels(res.subtree_leafset),
        "witness": to_newick(res.witness_tree),
    }))
    return 0


def cmd_mast(args) -> int:
    t, u = _read_tree(args.tree1), _read_tree(args.tree2)
    res = mast_exact(t, u, args.limit)
    if args.validate and not agree_on(t, u, res.witness):
        print("error: witness fails restriction check", file=sys.stderr)
        return 3
    _emit(args, _json({"kappa": res.kappa, "witness": _labels(res.witness)}))
    return 0


def cmd_beta(args) -> int:
    try:
        res = solve_beta(args.tolerance, args.quad_error)
    except NoSignChange as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    r1, r2 = heuristic_residuals(res)
    _emit(args, _json({
        "beta": res.beta,
        "alpha": res.alpha,
        "residual": res.residual,
        "iterations": res.iterations,
        "moments": {
            "U1": res.table.eu[0], "U2": res.table.eu[1], "U3": res.table.eu[2],
            "V1": res.table.ev[0], "V2": res.table.ev[1], "V3": res.table.ev[2],
        },
        "quadrature_error": res.table.error_estimate,
        "balance_residuals": [r1, r2],
    }))
    return 0


def cmd_experiment(args) -> int:
    config = ExperimentConfig(
        n_values=tuple(args.n),
        kind=KIND_BY_NAME[args.kind],
        replicates=args.reps,
        master_seed=args.seed,
        workers=args.workers,
        compute_kappa=args.kappa,
        output_path=args.out,
        format=args.format,
        validate=args.validate,
        timing=args.timing,
    )
    try:
        records = run_experiment(config)
    except ExperimentIOError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4
    if not args.out:
        sys.stdout.write(format_records(records, args.format))
    if len(config.n_values) >= 3 and all(r.gamma > 0 for r in records):
        est = estimate_exponent(records)
        lo, hi = est.interval()
        print(f"slope {est.slope:.4f} (stderr {est.stderr:.4f}, 95% [{lo:.4f}, {hi:.4f}]) "
              f"over n in [{est.n_range[0]}, {est.n_range[1]}]", file=sys.stderr)
    ratios = alpha_ratio(records)
    if ratios:
        print(f"doubly/rooted mean ratio: {ratios}", file=sys.stderr)
    return 0


# -- parser -----------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=_u64, default=0, help="64-bit master seed")
    common.add_argument("--format", choices=("csv", "json"), default="csv")
    common.add_argument("--out", help="write output here instead of stdout")
    common.add_argument("--validate", action="store_true", help="re-check every witness")

    p = argparse.ArgumentParser(prog="centroid-mast", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", parents=[common], help="sample uniform trees")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--kind", choices=tuple(KIND_BY_NAME), default="rooted")
    g.add_argument("--count", type=int, default=1)
    g.set_defaults(func=cmd_gen)

    s = sub.add_parser("split", parents=[common], help="cut a tree at its (semi-)centroid")
    s.add_argument("tree")
    s.set_defaults(func=cmd_split)

    for name, func, help_ in (("gamma", cmd_gamma, "recursive common subtree"),
                              ("mast", cmd_mast, "exact largest common subtree")):
        c = sub.add_parser(name, parents=[common], help=help_)
        c.add_argument("tree1")
        c.add_argument("tree2")
        if name == "mast":
            c.add_argument("--limit", type=int, default=DEFAULT_LIMIT)
        c.set_defaults(func=func)

    b = sub.add_parser("beta", parents=[common], help="solve the fixed-point exponent")
    b.add_argument("--tolerance", type=float, default=1e-8)
    b.add_argument("--quad-error", type=float, default=DEFAULT_QUAD_ERROR)
    b.set_defaults(func=cmd_beta)

    e = sub.add_parser("experiment", parents=[common], help="Monte Carlo runs of gamma")
    e.add_argument("--n", type=_n_list, required=True, help="comma-separated sizes")
    e.add_argument("--kind", choices=tuple(KIND_BY_NAME), default="rooted")
    e.add_argument("--reps", type=int, default=1)
    e.add_argument("--workers", type=int, default=1)
    e.add_argument("--kappa", action="store_true", help="also run the exact search (n <= 16)")
    e.add_argument("--timing", action="store_true", help="record wall times (not reproducible)")
    e.set_defaults(func=cmd_experiment)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
