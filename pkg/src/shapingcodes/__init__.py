"""Shaping codes for noiseless finite-state channels with edge costs."""

from .channel_model import (ChannelError, CostGraph, NotStronglyConnected, SourceSpec, builtin_channel,
                            classify_cost_structure, min_cycle_mean, parse_channel, parse_source,
                            serialize_channel, serialize_source, split_parallel_edges)
from .code_analysis import CodeStatistics, EmpiricalStats, analyze, simulate
from .errors import ConvergenceError, CostUniformError, InfeasibleError, ZeroCostCycleError
from .oracle import count_paths_avg_cost, count_paths_exact_cost, exhaustive_small_code_search
from .separation import huffman_build, pipeline_decode, pipeline_encode, pipeline_total_cost
from .shaping_theory import a_min, equivalence_gap_check, modified_costs, t_min
from .spectral import maxentropic_chain, perron, solve_S_for_W, solve_S_star
from .varn_codec import ShapingCode, build_varn, complete_graph_extension, decode, encode

__version__ = "0.1.0"
