"""Spanning-tree counts, certified return-probability series and tree entropy.

Submodules
----------
graph, io
    Multigraphs, Laplacians, random walks and the edge-list format.
exact
    Exact and floating-point spanning-tree counts, arborescence weights.
series
    ``log tau`` from return probabilities with certified tails.
oracles, models
    Rooted infinite graphs and the entropy of their limits.
generators, harness
    Graph families and convergence experiments.
"""

from .exact import (ChainMatrix, arborescence_log_weight, arborescence_weight,
                    count_spanning_trees, count_spanning_trees_bruteforce,
                    log_count_spanning_trees, log_det_prime_laplacian)
from .graph import MultiGraph, WalkOperator, build_graph, laplacian
from .harness import ConvergenceReport, run_convergence, run_stability, run_unbounded_degree
from .io import read_chain, read_edge_list, write_edge_list
from .models import (EntropyEstimate, FreeProductCompletes, Hypercubic, PeriodicLattice,
                     RegularTree, entropy_continuity_probe, entropy_free_product,
                     entropy_periodic_lattice, entropy_regular_tree, entropy_series,
                     parse_model, tree_entropy)
from .series import SeriesLogTau, decay_bound, return_probabilities_finite, series_log_tau

__version__ = "0.1.0"

__all__ = [
    "ChainMatrix", "arborescence_log_weight", "arborescence_weight", "count_spanning_trees",
    "count_spanning_trees_bruteforce", "log_count_spanning_trees", "log_det_prime_laplacian",
    "MultiGraph", "WalkOperator", "build_graph", "laplacian",
    "ConvergenceReport", "run_convergence", "run_stability", "run_unbounded_degree",
    "read_chain", "read_edge_list", "write_edge_list",
    "EntropyEstimate", "FreeProductCompletes", "Hypercubic", "PeriodicLattice", "RegularTree",
    "entropy_continuity_probe", "entropy_free_product", "entropy_periodic_lattice",
    "entropy_regular_tree", "entropy_series", "parse_model", "tree_entropy",
    "SeriesLogTau", "decay_bound", "return_probabilities_finite", "series_log_tau",
]
