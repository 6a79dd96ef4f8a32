"""Online allocation policies driven by per-period LP re-solving.

Three policy kinds share one state machine:

- adaptive_simplex: re-solves the sampled LP and follows a corner solution.
- adaptive_interior: re-solves and follows the log-barrier center.
- adaptive_fair: re-solves, detects the binding resources, pins the slack
  resources back to the initial average budget, re-solves once more, and
  follows the center of that second LP.

Each period the arriving type is accepted with the probability its entry of
the current decision vector prescribes, subject to never driving a budget
negative. The very first arrival is accepted outright (budget permitting)
and contributes no decision vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import lp as lpmod
from .errors import InvalidTypeError
from .market import Environment, OrderType, sample_order
from .metrics import EpisodeRecord

__all__ = ["POLICY_KINDS", "PolicyState", "Decision", "init", "step", "run_episode"]

POLICY_KINDS = ("adaptive_simplex", "adaptive_interior", "adaptive_fair")


@dataclass(frozen=True, eq=False)
class PolicyState:
    """Everything a policy knows entering period t."""

    kind: str
    rewards: np.ndarray          # (n,) known per-type rewards
    consumption: np.ndarray      # (m, n) known per-type demands
    initial_average: np.ndarray  # (m,) b = B / T
    remaining: np.ndarray        # (m,) budget at the start of period t
    horizon: int
    t: int
    counts: np.ndarray           # (n,) arrivals observed before period t
    y_last: np.ndarray | None = None
    binding_last: lpmod.BindingSet | None = None

    @property
    def p_hat(self) -> np.ndarray | None:
        """Empirical type frequencies, defined from period 2 on."""
        if self.t < 2:
            return None
        return self.counts / (self.t - 1)

    @property
    def average_budget(self) -> np.ndarray:
        """Per-remaining-period budget B_t / (T - t + 1)."""
        return self.remaining / (self.horizon - self.t + 1)


@dataclass(frozen=True, eq=False)
class Decision:
    x: int
    y: np.ndarray | None
    accepted_type: int | None
    b_prime: np.ndarray | None = None
    binding: lpmod.BindingSet | None = None


def init(kind: str, types, total_budget, horizon: int) -> PolicyState:
    """Fresh state at period 1. types carries only (reward, consumption)."""
    if kind not in POLICY_KINDS:
        raise ValueError(f"unknown policy kind {kind!r}")
    if horizon < 1:
        raise ValueError("horizon must be positive")
    types = tuple(types)
    rewards = np.array([t.reward for t in types], dtype=np.float64)
    consumption = np.column_stack([t.consumption for t in types]).astype(np.float64)
    total = np.asarray(total_budget, dtype=np.float64)
    if total.min() <= 0:
        raise ValueError("total budget must be strictly positive")
    return PolicyState(
        kind=kind,
        rewards=rewards,
        consumption=consumption,
        initial_average=total / horizon,
        remaining=total.copy(),
        horizon=horizon,
        t=1,
        counts=np.zeros(rewards.size, dtype=np.int64),
    )


def _decision_vector(state: PolicyState, tols: lpmod.Tolerances):
    """Solve the period's sampled LP(s) and return (y, b_prime, binding)."""
    p_hat = state.counts / (state.t - 1)
    objective = p_hat * state.rewards
    matrix = state.consumption * p_hat[None, :]
    b_t = state.average_budget
    sampled = lpmod.PackedLP(objective=objective, resource_matrix=matrix, rhs=b_t)
    if state.kind == "adaptive_simplex":
        return lpmod.solve_vertex(sampled, tols).y, None, None
    if state.kind == "adaptive_interior":
        return lpmod.analytic_center(sampled, tols=tols).y, None, None
    center = lpmod.analytic_center(sampled, tols=tols)
    bset = lpmod.binding_set(sampled, center, tols=tols)
    b_prime = state.initial_average.copy()
    if bset.binding:
        idx = np.array(bset.binding, dtype=np.intp)
        b_prime[idx] = b_t[idx]
    refit = lpmod.PackedLP(objective=objective, resource_matrix=matrix, rhs=b_prime)
    return lpmod.analytic_center(refit, tols=tols).y, b_prime, bset


def step(state: PolicyState, arriving_type: int, rng,
         tols: lpmod.Tolerances = lpmod.DEFAULT_TOLS):
    """Advance one period; returns (Decision, next_state).

    At t >= 2 one acceptance uniform is drawn every period, whether or not
    the budget permits acceptance, so decision paths depend only on the
    draw sequence.
    """
    n = state.rewards.size
    if not 0 <= arriving_type < n:
        raise InvalidTypeError(f"type index {arriving_type} outside 0..{n - 1}")
    if state.t > state.horizon:
        raise ValueError("episode already ran its full horizon")
    demand = state.consumption[:, arriving_type]
    affordable = bool((demand <= state.remaining).all())

    if state.t == 1:
        y = None
        b_prime = None
        bset = None
        x = 1 if affordable else 0
    else:
        y, b_prime, bset = _decision_vector(state, tols)
        u = rng.random()
        accept_prob = min(max(float(y[arriving_type]), 0.0), 1.0)
        x = 1 if (affordable and u < accept_prob) else 0

    remaining = state.remaining - demand if x else state.remaining.copy()
    counts = state.counts.copy()
    counts[arriving_type] += 1
    decision = Decision(
        x=x,
        y=y,
        accepted_type=arriving_type if x else None,
        b_prime=b_prime,
        binding=bset,
    )
    next_state = PolicyState(
        kind=state.kind,
        rewards=state.rewards,
        consumption=state.consumption,
        initial_average=state.initial_average,
        remaining=remaining,
        horizon=state.horizon,
        t=state.t + 1,
        counts=counts,
        y_last=y,
        binding_last=bset,
    )
    return decision, next_state


def run_episode(env: Environment, kind: str, rng, seed: int | None = None,
                tols: lpmod.Tolerances = lpmod.DEFAULT_TOLS) -> EpisodeRecord:
    """Simulate one full episode; never stops early.

    Arrivals the budget cannot serve are rejected in place and the loop
    continues through period T. The per-period draw order is fixed: one
    uniform for the arrival, then (for t >= 2) one for the acceptance.
    """
    horizon = env.horizon
    n, m = env.dist.n, env.dist.m
    state = init(kind, env.dist.types, env.total_budget, horizon)
    rewards_known = state.rewards

    arrivals = np.empty(horizon, dtype=np.int64)
    ys = np.full((horizon, n), np.nan)
    xs = np.zeros(horizon, dtype=np.int64)
    step_rewards = np.zeros(horizon)
    budgets = np.empty((horizon, m))
    b_primes = np.full((horizon, m), np.nan)
    binding_flags = np.full((horizon, m), -1, dtype=np.int8)

    for t in range(1, horizon + 1):
        j = sample_order(env.dist, rng)
        decision, state = step(state, j, rng, tols)
        k = t - 1
        arrivals[k] = j
        if decision.y is not None:
            ys[k] = decision.y
        xs[k] = decision.x
        step_rewards[k] = decision.x * rewards_known[j]
        budgets[k] = state.remaining
        if decision.b_prime is not None:
            b_primes[k] = decision.b_prime
        if decision.binding is not None:
            binding_flags[k] = 0
            for i in decision.binding.binding:
                binding_flags[k, i] = 1

    return EpisodeRecord(
        env_name=env.name,
        policy=kind,
        horizon=horizon,
        seed=seed,
        arrivals=arrivals,
        ys=ys,
        xs=xs,
        rewards=step_rewards,
        budgets=budgets,
        initial_budget=env.total_budget,
        min_consumption=state.consumption.min(axis=1),
        b_prime=b_primes,
        binding=binding_flags,
        total_reward=float(step_rewards.sum()),
    )
