"""Five-round progressive-sampling search."""

from .caches import CacheEntry, FsCache, cache_gate
from .retest import (apply_penalties, compute_ratio, idw_ratio, rough_estimate_idw,
                     rough_estimate_mean, select_for_retest, select_lowest)
from .schedule import N_ROUNDS, RoundSchedule, build_schedule
from .search import (EvalResult, Estimate, FinalSelection, SearchReport, SearchState,
                     final_round, inject_cache_points, intermediate_round, keep_count, prune,
                     round_one, run_search, trial_loop)
from .tournament import Contender, champion_index, pairwise_wins, rank_contenders
from .trace import Trace, read_trace

__all__ = [
    "CacheEntry", "FsCache", "cache_gate", "apply_penalties", "compute_ratio", "idw_ratio",
    "rough_estimate_idw", "rough_estimate_mean", "select_for_retest", "select_lowest",
    "N_ROUNDS", "RoundSchedule", "build_schedule", "EvalResult", "Estimate", "FinalSelection",
    "SearchReport", "SearchState", "final_round", "inject_cache_points", "intermediate_round",
    "keep_count", "prune", "round_one", "run_search", "trial_loop", "Contender",
    "champion_index", "pairwise_wins", "rank_contenders", "Trace", "read_trace",
]
