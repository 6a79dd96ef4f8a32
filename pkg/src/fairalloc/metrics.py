"""Regret, cumulative unfairness, and diagnostic series from episode logs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError, EmptyInputError

__all__ = [
    "EpisodeRecord",
    "MetricSummary",
    "regret",
    "cumulative_unfairness",
    "summarize",
    "acceptance_series",
    "first_infeasible_step",
]


@dataclass(frozen=True, eq=False)
class EpisodeRecord:
    """Per-step log of one simulated episode.

    Row t-1 of the step arrays describes period t. The decision vector of
    period 1 is undefined (the first arrival is accepted outright), so
    ys[0] is NaN and unfairness accumulation starts at period 2. budgets
    stores the remaining budget after each period; b_prime and binding are
    NaN / -1 outside the fair policy's re-solved periods.
    """

    env_name: str
    policy: str
    horizon: int
    seed: int | None
    arrivals: np.ndarray          # (T,) type index per period
    ys: np.ndarray                # (T, n) acceptance probability vectors
    xs: np.ndarray                # (T,) 0/1 decisions
    rewards: np.ndarray           # (T,) collected reward per period
    budgets: np.ndarray           # (T, m) budget after the period
    initial_budget: np.ndarray    # (m,)
    min_consumption: np.ndarray   # (m,) cheapest per-resource demand
    b_prime: np.ndarray           # (T, m) fair policy's re-solved rhs
    binding: np.ndarray           # (T, m) int8 binding flags, -1 when n/a
    total_reward: float

    @property
    def n_types(self) -> int:
        return self.ys.shape[1]


@dataclass(frozen=True, eq=False)
class MetricSummary:
    """Per-trial metrics plus their arithmetic means over one run cell."""

    env_name: str
    policy: str
    horizon: int
    seeds: tuple
    regrets: np.ndarray
    unfairness: np.ndarray
    first_infeasible: np.ndarray
    mean_regret: float
    mean_cumulative_unfairness: float
    stderr_regret: float
    stderr_cumulative_unfairness: float

    @property
    def n_trials(self) -> int:
        return self.regrets.size


def regret(record: EpisodeRecord, opt_d: float) -> float:
    """Shortfall against the expected-demand benchmark T * opt_d."""
    return record.horizon * opt_d - record.total_reward


def cumulative_unfairness(record: EpisodeRecord, y_star: np.ndarray) -> float:
    """Sum of squared distances from each defined decision vector to y_star.

    Periods without a decision vector (NaN rows, i.e. period 1) do not
    contribute, so the metric is additive under record concatenation.
    """
    y_star = np.asarray(y_star, dtype=np.float64)
    if y_star.shape != (record.ys.shape[1],):
        raise DimensionMismatchError(
            f"y_star has shape {y_star.shape}, expected ({record.ys.shape[1]},)"
        )
    diff = record.ys - y_star[None, :]
    sq = np.einsum("ij,ij->i", diff, diff)
    return float(np.nansum(sq))


def first_infeasible_step(record: EpisodeRecord) -> int:
    """First period whose opening budget undercuts the cheapest demand.

    Compares B_t (the budget available at the start of period t) against
    min_j c_ij per resource; returns -1 when no period qualifies.
    """
    budgets_before = np.vstack([record.initial_budget, record.budgets[:-1]])
    short = (budgets_before < record.min_consumption[None, :]).any(axis=1)
    idx = np.flatnonzero(short)
    return int(idx[0]) + 1 if idx.size else -1


def summarize(records, opt_d: float, y_star: np.ndarray) -> MetricSummary:
    """Aggregate per-trial metrics; records are sorted by seed first."""
    records = list(records)
    if not records:
        raise EmptyInputError("no records to summarize")
    head = records[0]
    for r in records[1:]:
        if (r.env_name, r.policy, r.horizon) != (
            head.env_name, head.policy, head.horizon
        ):
            raise ValueError("records mix environments, policies, or horizons")
    records.sort(key=lambda r: (r.seed is None, r.seed))
    regrets = np.array([regret(r, opt_d) for r in records])
    uf = np.array([cumulative_unfairness(r, y_star) for r in records])
    fi = np.array([first_infeasible_step(r) for r in records])
    k = len(records)

    def _stderr(v):
        return float(v.std(ddof=1) / np.sqrt(k)) if k > 1 else 0.0

    return MetricSummary(
        env_name=head.env_name,
        policy=head.policy,
        horizon=head.horizon,
        seeds=tuple(r.seed for r in records),
        regrets=regrets,
        unfairness=uf,
        first_infeasible=fi,
        mean_regret=float(regrets.mean()),
        mean_cumulative_unfairness=float(uf.mean()),
        stderr_regret=_stderr(regrets),
        stderr_cumulative_unfairness=_stderr(uf),
    )


def acceptance_series(records, type_index: int):
    """Trial-mean acceptance probability of one type across periods.

    Returns (periods, means) covering the periods with defined decision
    vectors (t >= 2 for full episodes).
    """
    records = list(records)
    if not records:
        raise EmptyInputError("no records for acceptance series")
    n = records[0].ys.shape[1]
    if not 0 <= type_index < n:
        raise DimensionMismatchError(f"type index {type_index} out of range")
    stacked = np.stack([r.ys[:, type_index] for r in records])
    means = stacked.mean(axis=0)
    defined = ~np.isnan(means)
    periods = np.flatnonzero(defined) + 1
    return periods, means[defined]
