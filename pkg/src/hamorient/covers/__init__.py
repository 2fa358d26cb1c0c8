"""Exceptional covers, linking structures and the matchings they rely on."""

from .ab import ab_case, bipartite_low, exceptional_cover_AB, longest_antidirected_run
from .abst import abst_case, dense_part, exceptional_cover_ABST, useful_links
from .basics import (ExceptionalCover, balance_matching, check_balance, check_dedges, check_disjoint,
                     class_sequence, d_plus_one_matching, two_disjoint_st_edges)
from .engine import NotFound, PlannerBudget, rep_counts
from .patterns import (LongRuns, Subpath, UsefulTripartition, densest_sink_interval, find_four_long_runs,
                       find_long_runs, is_run, useful_tripartition)
from .sinksource import restricted_digraph, sink_source_embed
from .st import GoodPathSystem, LinkingST, PPartition, good_path_system, linking_ST, p_partition

__all__ = [
    "ExceptionalCover", "GoodPathSystem", "LinkingST", "LongRuns", "NotFound", "PPartition", "PlannerBudget",
    "Subpath", "UsefulTripartition", "ab_case", "abst_case", "balance_matching", "bipartite_low",
    "check_balance", "check_dedges", "check_disjoint", "class_sequence", "d_plus_one_matching", "dense_part",
    "densest_sink_interval", "exceptional_cover_AB", "exceptional_cover_ABST", "find_four_long_runs",
    "find_long_runs", "good_path_system", "is_run", "linking_ST", "longest_antidirected_run", "p_partition",
    "rep_counts", "restricted_digraph", "sink_source_embed", "two_disjoint_st_edges", "useful_links",
    "useful_tripartition",
]
