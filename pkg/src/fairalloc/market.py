"""Order-arrival environments with finite known support and hidden probabilities.

A Market couples a finite order-type distribution with a per-period budget
vector; adding a horizon yields an Environment whose expected-demand LP is
built by build_dlp. The bundled presets transcribe the simulation instances
used throughout the experiment harness.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import UnknownPresetError
from .lp import PackedLP

__all__ = [
    "OrderType",
    "FiniteDistribution",
    "Market",
    "Environment",
    "build_dlp",
    "sample_order",
    "preset",
    "PRESET_NAMES",
    "make_rng",
    "derive_seed",
]


@dataclass(frozen=True, eq=False)
class OrderType:
    """One point of the arrival support: a reward and its resource demand."""

    reward: float
    consumption: np.ndarray

    def __post_init__(self):
        cons = np.ascontiguousarray(np.asarray(self.consumption, dtype=np.float64))
        if cons.ndim != 1:
            raise ValueError("consumption must be a vector")
        if cons.min(initial=0.0) < 0:
            raise ValueError("consumption must be nonnegative")
        object.__setattr__(self, "reward", float(self.reward))
        object.__setattr__(self, "consumption", cons)


@dataclass(frozen=True, eq=False)
class FiniteDistribution:
    """Known support with hidden (to policies) arrival probabilities."""

    types: tuple[OrderType, ...]
    probabilities: np.ndarray

    def __post_init__(self):
        types = tuple(self.types)
        p = np.ascontiguousarray(np.asarray(self.probabilities, dtype=np.float64))
        if len(types) == 0:
            raise ValueError("need at least one order type")
        if p.size != len(types):
            raise ValueError("probability vector length must match types")
        if p.min() <= 0:
            raise ValueError("probabilities must be strictly positive")
        if abs(p.sum() - 1.0) > 1e-12:
            raise ValueError("probabilities must sum to one")
        m = types[0].consumption.size
        if any(t.consumption.size != m for t in types):
            raise ValueError("all consumption vectors must share one length")
        object.__setattr__(self, "types", types)
        object.__setattr__(self, "probabilities", p)
        object.__setattr__(self, "_cdf", np.cumsum(p))

    @property
    def n(self) -> int:
        return len(self.types)

    @property
    def m(self) -> int:
        return self.types[0].consumption.size

    @property
    def rewards(self) -> np.ndarray:
        return np.array([t.reward for t in self.types])

    @property
    def consumption_matrix(self) -> np.ndarray:
        """m x n matrix whose column j is type j's consumption."""
        return np.column_stack([t.consumption for t in self.types])


@dataclass(frozen=True, eq=False)
class Market:
    """A distribution plus the per-period average budget b (no horizon yet)."""

    name: str
    dist: FiniteDistribution
    b: np.ndarray

    def __post_init__(self):
        b = np.ascontiguousarray(np.asarray(self.b, dtype=np.float64))
        if b.size != self.dist.m:
            raise ValueError("budget length must match resource dimension")
        if b.min() <= 0:
            raise ValueError("average budget must be strictly positive")
        object.__setattr__(self, "b", b)

    def environment(self, horizon: int) -> "Environment":
        return Environment(dist=self.dist, b=self.b, horizon=horizon,
                           name=self.name)


@dataclass(frozen=True, eq=False)
class Environment:
    """Market plus horizon; the total budget grows linearly as T * b."""

    dist: FiniteDistribution
    b: np.ndarray
    horizon: int
    name: str = "custom"

    def __post_init__(self):
        b = np.ascontiguousarray(np.asarray(self.b, dtype=np.float64))
        if b.size != self.dist.m:
            raise ValueError("budget length must match resource dimension")
        if b.min() <= 0:
            raise ValueError("average budget must be strictly positive")
        if int(self.horizon) < 1:
            raise ValueError("horizon must be a positive integer")
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "horizon", int(self.horizon))

    @property
    def total_budget(self) -> np.ndarray:
        return self.horizon * self.b


def build_dlp(env: Environment | Market) -> PackedLP:
    """Expected-demand LP: objective p_j*mu_j, column j p_j*c_j, rhs b."""
    dist = env.dist
    p = dist.probabilities
    return PackedLP(
        objective=p * dist.rewards,
        resource_matrix=dist.consumption_matrix * p[None, :],
        rhs=env.b,
    )


def sample_order(dist: FiniteDistribution, rng: np.random.Generator) -> int:
    """Draw one arrival type index by inverse CDF over the stored order."""
    u = rng.random()
    return int(np.searchsorted(dist._cdf, u, side="right").clip(0, dist.n - 1))


# ---------------------------------------------------------------------------
# reproducible generators
# ---------------------------------------------------------------------------

_POLICY_CODES = {"adaptive_simplex": 1, "adaptive_interior": 2, "adaptive_fair": 3}


def derive_seed(master_seed: int, env_name: str, policy: str, horizon: int,
                trial: int) -> int:
    """Stable 63-bit stream key from the run coordinates.

    Uses SHA-256 over a canonical byte string, so the mapping is identical
    across platforms and interpreter versions.
    """
    import hashlib

    tag = f"{master_seed}|{env_name}|{policy}|{horizon}|{trial}".encode()
    digest = hashlib.sha256(tag).digest()
    return int.from_bytes(digest[:8], "big") >> 1


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox generator; sequences are platform-stable."""
    return np.random.Generator(np.random.Philox(key=np.uint64(seed)))


# ---------------------------------------------------------------------------
# presets
# ---------------------------------------------------------------------------


def _market(name, p, mu, cons_rows, b) -> Market:
    cons = np.asarray(cons_rows, dtype=np.float64)
    types = tuple(
        OrderType(reward=mu[j], consumption=cons[:, j]) for j in range(len(mu))
    )
    return Market(name=name, dist=FiniteDistribution(types=types, probabilities=p), b=b)


def _build_presets():
    presets = {}
    # Three order types, two symmetric resources; the demo LP whose optimal
    # set is a segment between two one-sided corner allocations.
    presets["D32"] = _market(
        "D32",
        p=[0.3, 0.3, 0.4],
        mu=[1.0, 1.0, 2.0],
        cons_rows=[[1.0, 0.0, 1.0],
                   [0.0, 1.0, 1.0]],
        b=[0.2, 0.2],
    )
    # Two order types, two resources; resource 1 binding, resource 2 slack
    # and degenerate (its consumption varies across the optimal set).
    presets["D34"] = _market(
        "D34",
        p=[0.6, 0.4],
        mu=[6.0, 0.3],
        cons_rows=[[2.0, 0.1],
                   [1.0, 10.0]],
        b=[1.0, 2.0],
    )
    # Seven types, three resources; resource 1 binding, resource 2 slack with
    # consumption pinned across the optimal set (nondegenerate), resource 3
    # slack and degenerate (its consumption varies over the optimal set and
    # touches the budget at some optima).
    presets["E51"] = _market(
        "E51",
        p=[0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.1],
        mu=[7.0, 3.5, 4.0, 3.5, 6.5, 0.4, 0.7],
        cons_rows=[[2.0, 1.0, 1.0, 1.0, 1.0, 0.1, 0.2],
                   [1.0, 0.5, 1.0, 0.5, 2.0, 0.1, 0.1],
                   [1.0, 2.0, 0.5, 0.2, 0.5, 10.0, 7.0]],
        b=[0.5, 1.0, 2.0],
    )
    # Seven types, three resources; resources 1-2 binding, resource 3 slack
    # and nondegenerate.
    presets["E52"] = _market(
        "E52",
        p=[0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.1],
        mu=[7.0, 7.0, 6.5, 3.2, 5.5, 5.0, 3.5],
        cons_rows=[[2.0, 1.0, 1.0, 1.0, 1.5, 1.0, 1.0],
                   [1.0, 2.0, 2.0, 0.5, 1.0, 1.0, 0.5],
                   [1.0, 1.0, 0.5, 0.2, 0.5, 1.0, 0.5]],
        b=[0.5, 0.5, 1.5],
    )
    # Seven types, three resources, undersupplied: all resources binding.
    presets["E53"] = _market(
        "E53",
        p=[0.15, 0.15, 0.15, 0.15, 0.15, 0.15, 0.1],
        mu=[4.0, 4.0, 4.5, 2.7, 3.0, 3.0, 2.8],
        cons_rows=[[2.0, 1.0, 1.0, 1.0, 1.5, 1.0, 1.0],
                   [1.0, 2.0, 2.0, 0.5, 1.0, 1.0, 0.5],
                   [1.0, 1.0, 1.5, 1.2, 0.5, 1.0, 1.3]],
        b=[0.5, 0.5, 0.5],
    )
    return presets


_PRESETS = _build_presets()
PRESET_NAMES = tuple(sorted(_PRESETS))


def preset(name: str) -> Market:
    """Look up a bundled market instance by name."""
    try:
        return _PRESETS[name]
    except KeyError:
        raise UnknownPresetError(
            f"unknown preset {name!r}; available: {', '.join(PRESET_NAMES)}"
        ) from None
