"""Fairness-aware online resource allocation.

LP re-solving policies with log-barrier (analytic-center) solutions, the
expected-demand benchmark, regret / cumulative-unfairness metrics, and a
reproducible experiment harness.
"""

from .lp import (
    BindingSet,
    DualPoint,
    LPSolution,
    PackedLP,
    StandardFormLP,
    Tolerances,
    analytic_center,
    binding_set,
    detect_implicit_equalities,
    interior_dual,
    optimal_value,
    solve_vertex,
    to_standard_form,
)
from .market import (
    Environment,
    FiniteDistribution,
    Market,
    OrderType,
    build_dlp,
    derive_seed,
    make_rng,
    preset,
    sample_order,
)
from .metrics import (
    EpisodeRecord,
    MetricSummary,
    acceptance_series,
    cumulative_unfairness,
    regret,
    summarize,
)
from .policies import POLICY_KINDS, Decision, PolicyState, init, run_episode, step

__version__ = "0.1.0"

__all__ = [
    "PackedLP", "StandardFormLP", "LPSolution", "DualPoint", "BindingSet",
    "Tolerances", "to_standard_form", "solve_vertex", "optimal_value",
    "detect_implicit_equalities", "analytic_center", "interior_dual",
    "binding_set",
    "OrderType", "FiniteDistribution", "Market", "Environment", "build_dlp",
    "sample_order", "preset", "make_rng", "derive_seed",
    "POLICY_KINDS", "PolicyState", "Decision", "init", "step", "run_episode",
    "EpisodeRecord", "MetricSummary", "regret", "cumulative_unfairness",
    "summarize", "acceptance_series",
    "__version__",
]
