"""Shared fixtures: worked LPs, random-LP generators, and cached sweeps."""

import csv
import time

import numpy as np
import pytest

from fairalloc import lp, market, policies
from fairalloc.experiment import parse_config, run

# Frozen reference values for the worked instances, computed from the
# enumeration oracles and an independent central-path follower (see
# tests/test_lp_core.py for the cross-checks that pin them).
CENTER_THREE_TYPE = np.array([0.36450576, 0.36450576, 0.22662068])
CENTER_TWO_TYPE = np.array([0.82766831, 0.16995067])
OPT_THREE_TYPE = 0.4
OPT_TWO_TYPE = 3.0


@pytest.fixture(scope="session")
def lp_three_type():
    """Demo LP with two symmetric resources and a segment of optima."""
    return market.build_dlp(market.preset("D32"))


@pytest.fixture(scope="session")
def lp_two_type():
    """Demo LP with a binding first resource and a slack, degenerate second."""
    return market.build_dlp(market.preset("D34"))


def two_type_lp_with_budget(b2: float) -> lp.PackedLP:
    m = market.preset("D34")
    return lp.PackedLP(
        objective=m.dist.probabilities * m.dist.rewards,
        resource_matrix=m.dist.consumption_matrix * m.dist.probabilities[None, :],
        rhs=[1.0, b2],
    )


def random_packed_lp(rng: np.random.Generator, n_max=6, m_max=4,
                     style=None) -> lp.PackedLP:
    """Random small LP, biased toward degenerate optimal faces.

    style 0: plain uniform entries (generically a unique optimum);
    style 1: objective in the row space of the constraints (large faces);
    style 2: a duplicated column with a tied objective entry.
    """
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    cons = rng.uniform(0.0, 1.0, (m, n))
    b = rng.uniform(0.05, 1.0, m)
    if style is None:
        style = int(rng.integers(0, 3))
    if style == 1:
        w = rng.uniform(0.1, 1.0, m)
        obj = w @ cons
        top = obj.max()
        if top > 1.0:
            obj = obj / top
    else:
        obj = rng.uniform(0.0, 1.0, n)
        if style == 2 and n >= 2:
            j = int(rng.integers(0, n - 1))
            cons[:, j + 1] = cons[:, j]
            obj[j + 1] = obj[j]
    return lp.PackedLP(objective=obj, resource_matrix=cons, rhs=b)


def read_summary(run_dir):
    with open(run_dir / "summary.csv", newline="") as fh:
        return list(csv.DictReader(fh))


def cell_rows(rows, policy, horizon):
    return [r for r in rows if r["policy"] == policy and int(r["T"]) == horizon]


def mean_of(rows, column):
    return float(np.mean([float(r[column]) for r in rows]))


MASTER_SEED = 131
SWEEP_POLICIES = ("adaptive_interior", "adaptive_fair")
SWEEP_HORIZONS = (1000, 8000)
SWEEP_TRIALS = 30


@pytest.fixture(scope="session")
def regret_sweep(tmp_path_factory):
    """The bounded-regret / unfairness-growth sweep (both environments).

    Runs adaptive_interior and adaptive_fair on the two-resource and the
    seven-type instances for T in {1000, 8000}, 30 trials each, and reports
    the summary rows plus the wall time of the whole sweep.
    """
    # warm the JIT cache so the measured time reflects steady-state work
    warm = market.preset("D34").environment(30)
    policies.run_episode(warm, "adaptive_fair", market.make_rng(0), seed=0)

    out = {}
    started = time.perf_counter()
    for env_name in ("D34", "E51"):
        cfg = parse_config({
            "env": env_name,
            "policies": list(SWEEP_POLICIES),
            "horizons": list(SWEEP_HORIZONS),
            "trials": SWEEP_TRIALS,
            "master_seed": MASTER_SEED,
        })
        run_dir = tmp_path_factory.mktemp(f"sweep_{env_name}")
        run(cfg, out_dir=run_dir)
        out[env_name] = read_summary(run_dir)
    elapsed = time.perf_counter() - started
    return {"rows": out, "elapsed_seconds": elapsed}


@pytest.fixture(scope="session")
def fair_binding_episodes():
    """Fair-policy episodes on the seven-type instance with binding logs."""
    env = market.preset("E51").environment(4000)
    records = []
    for trial in range(30):
        seed = market.derive_seed(MASTER_SEED, "E51", "adaptive_fair-corr", 4000, trial)
        rng = market.make_rng(seed)
        records.append(policies.run_episode(env, "adaptive_fair", rng, seed=seed))
    return records
