"""Common subtrees of random leaf-labeled binary trees via centroid splitting."""

from .dirichlet import DOUBLY_LAW, ROOTED_LAW, ConstrainedDirichlet, moment, solve_beta
from .experiment import ExperimentConfig, ExperimentRecord, estimate_exponent, run_experiment
from .gamma import GammaResult, check_witness, gamma, gamma_nonrooted
from .mast import MastResult, kappa_lower_bound_check, mast_exact
from .newick import from_newick, to_newick
from .splitting import (
    SplitOutcome,
    find_centroid,
    find_semi_centroid,
    split,
    split_at,
    split_pmf_doubly,
    split_pmf_rooted,
)
from .trees import (
    BULLET,
    STAR,
    BinaryTree,
    RootKind,
    SplitToken,
    count_trees,
    generate_uniform,
    is_equivalent,
    restrict,
    split_set,
)

__version__ = "0.1.0"

__all__ = [
    "BULLET", "STAR", "BinaryTree", "RootKind", "SplitToken",
    "count_trees", "generate_uniform", "is_equivalent", "restrict", "split_set",
    "from_newick", "to_newick",
    "SplitOutcome", "find_centroid", "find_semi_centroid", "split", "split_at",
    "split_pmf_doubly", "split_pmf_rooted",
    "MastResult", "kappa_lower_bound_check", "mast_exact",
    "GammaResult", "check_witness", "gamma", "gamma_nonrooted",
    "ConstrainedDirichlet", "DOUBLY_LAW", "ROOTED_LAW", "moment", "solve_beta",
    "ExperimentConfig", "ExperimentRecord", "estimate_exponent", "run_experiment",
]
