"""Config-driven batch experiment runner.

Runs seeded Monte-Carlo sweeps over (environment, policy, horizon) cells,
writes a deterministic summary.csv, optional per-trial trajectory files,
and turns summaries into per-figure plot data.

summary.csv is byte-reproducible for a fixed config: rows are sorted by
(env, policy, T, trial), trial seeds are derived by hashing the run
coordinates, and the runtime_ms column is pinned to 0 (measured wall times
go to timings.csv, which is not covered by the determinism contract).
"""

from __future__ import annotations

import csv
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from . import lp as lpmod
from . import metrics as metrics_mod
from . import oracles
from .errors import ConfigError, FairallocError, MissingInputError, UnknownPresetError
from .market import (
    FiniteDistribution,
    Market,
    OrderType,
    build_dlp,
    derive_seed,
    make_rng,
    preset,
)
from .policies import POLICY_KINDS, run_episode

__all__ = [
    "ExperimentConfig",
    "parse_config",
    "load_config",
    "run",
    "emit_plot_data",
    "check_assumptions",
    "SUMMARY_COLUMNS",
]

SUMMARY_COLUMNS = (
    "env", "policy", "T", "trial", "seed", "total_reward", "regret",
    "cumulative_unfairness", "first_infeasible_t", "runtime_ms",
)


@dataclass(frozen=True)
class ExperimentConfig:
    market: Market
    policies: tuple[str, ...]
    horizons: tuple[int, ...]
    trials: int
    master_seed: int
    output_dir: str | None
    tolerances: lpmod.Tolerances
    dump_trajectories: bool


def _parse_env(spec) -> Market:
    if isinstance(spec, str):
        return preset(spec)
    if not isinstance(spec, dict):
        raise ConfigError("env must be a preset name or an inline object")
    for key in ("p", "mu", "C", "b"):
        if key not in spec:
            raise ConfigError(f"inline env is missing field {key!r}")
    try:
        cons = np.asarray(spec["C"], dtype=np.float64)
        mu = [float(v) for v in spec["mu"]]
        types = tuple(
            OrderType(reward=mu[j], consumption=cons[:, j]) for j in range(len(mu))
        )
        dist = FiniteDistribution(types=types, probabilities=spec["p"])
        return Market(name=str(spec.get("name", "inline")), dist=dist, b=spec["b"])
    except (ValueError, IndexError, TypeError) as exc:
        raise ConfigError(f"invalid inline env: {exc}") from exc


def parse_config(doc: dict) -> ExperimentConfig:
    if not isinstance(doc, dict):
        raise ConfigError("config document must be a JSON object")
    required = ("env", "policies", "horizons", "trials", "master_seed")
    for key in required:
        if key not in doc:
            raise ConfigError(f"config is missing field {key!r}")
    try:
        market = _parse_env(doc["env"])
    except UnknownPresetError as exc:
        raise ConfigError(str(exc)) from exc
    policies = tuple(doc["policies"])
    if not policies:
        raise ConfigError("policies must be a nonempty list")
    for p in policies:
        if p not in POLICY_KINDS:
            raise ConfigError(
                f"unknown policy {p!r}; choose from {', '.join(POLICY_KINDS)}"
            )
    horizons = tuple(int(t) for t in doc["horizons"])
    if not horizons or any(t < 1 for t in horizons):
        raise ConfigError("horizons must be a nonempty list of positive integers")
    trials = int(doc["trials"])
    if trials < 1:
        raise ConfigError("trials must be >= 1")
    tol_doc = doc.get("tolerances", {})
    if not isinstance(tol_doc, dict):
        raise ConfigError("tolerances must be an object")
    valid = {f for f in lpmod.Tolerances.__dataclass_fields__}
    unknown = set(tol_doc) - valid
    if unknown:
        raise ConfigError(f"unknown tolerance fields: {sorted(unknown)}")
    tols = replace(lpmod.DEFAULT_TOLS, **tol_doc)
    return ExperimentConfig(
        market=market,
        policies=policies,
        horizons=horizons,
        trials=trials,
        master_seed=int(doc["master_seed"]),
        output_dir=doc.get("output_dir"),
        tolerances=tols,
        dump_trajectories=bool(doc.get("dump_trajectories", False)),
    )


def load_config(path) -> ExperimentConfig:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config is not valid JSON: {exc}") from exc
    return parse_config(doc)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def _fmt(value) -> str:
    return f"{value:.12g}"


def _episode_task(args):
    (market, policy, horizon, trial, seed, tols, opt_d, y_star, traj_dir) = args
    env = market.environment(horizon)
    rng = make_rng(seed)
    started = time.perf_counter()
    record = run_episode(env, policy, rng, seed=seed, tols=tols)
    runtime_ms = 1e3 * (time.perf_counter() - started)
    row = {
        "env": market.name,
        "policy": policy,
        "T": horizon,
        "trial": trial,
        "seed": seed,
        "total_reward": record.total_reward,
        "regret": metrics_mod.regret(record, opt_d),
        "cumulative_unfairness": metrics_mod.cumulative_unfairness(record, y_star),
        "first_infeasible_t": metrics_mod.first_infeasible_step(record),
        "runtime_ms": 0,
    }
    if traj_dir is not None:
        _write_trajectory(Path(traj_dir), record, trial)
    return row, runtime_ms


def _write_trajectory(traj_dir: Path, record, trial: int):
    n = record.ys.shape[1]
    m = record.budgets.shape[1]
    path = traj_dir / (
        f"traj_{record.env_name}_{record.policy}_T{record.horizon}_trial{trial}.csv"
    )
    header = (
        ["t", "arrival", "x", "reward"]
        + [f"y{j + 1}" for j in range(n)]
        + [f"B{i + 1}" for i in range(m)]
        + [f"bprime{i + 1}" for i in range(m)]
        + [f"binding{i + 1}" for i in range(m)]
    )
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for k in range(record.horizon):
            row = [k + 1, int(record.arrivals[k]) + 1, int(record.xs[k]),
                   _fmt(record.rewards[k])]
            row += [_fmt(v) for v in record.ys[k]]
            row += [_fmt(v) for v in record.budgets[k]]
            row += [_fmt(v) for v in record.b_prime[k]]
            row += [str(int(v)) for v in record.binding[k]]
            writer.writerow(row)
    return path


def run(config: ExperimentConfig, out_dir=None, threads: int = 1,
        dump_trajectories: bool | None = None) -> Path:
    """Execute the sweep; returns the output directory.

    Writes summary.csv (deterministic), timings.csv (measured wall times),
    and optional trajectories/. Trials may run in worker processes; results
    are re-sorted before writing, so the output does not depend on threads.
    """
    target = out_dir if out_dir is not None else config.output_dir
    if target is None:
        raise ConfigError("no output directory given (config or --out)")
    target = Path(target)
    target.mkdir(parents=True, exist_ok=True)
    dump = config.dump_trajectories if dump_trajectories is None else dump_trajectories
    traj_dir = None
    if dump:
        traj_dir = target / "trajectories"
        traj_dir.mkdir(exist_ok=True)

    market = config.market
    try:
        dlp = build_dlp(market)
        opt_d = lpmod.optimal_value(dlp, config.tolerances)
        y_star = lpmod.analytic_center(dlp, tols=config.tolerances).y
    except FairallocError as exc:
        raise type(exc)(f"solving the expected-demand LP failed: {exc}") from exc

    tasks = []
    for policy in config.policies:
        for horizon in config.horizons:
            for trial in range(config.trials):
                seed = derive_seed(
                    config.master_seed, market.name, policy, horizon, trial
                )
                tasks.append((market, policy, horizon, trial, seed,
                              config.tolerances, opt_d, y_star,
                              str(traj_dir) if traj_dir else None))

    results = []
    if threads > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            for (args, out) in zip(tasks, pool.map(_episode_task, tasks)):
                results.append(out)
    else:
        for args in tasks:
            try:
                results.append(_episode_task(args))
            except FairallocError as exc:
                raise type(exc)(
                    f"episode failed (policy={args[1]}, T={args[2]}, "
                    f"trial={args[3]}): {exc}"
                ) from exc

    rows = [row for row, _ in results]
    times = {(r["policy"], r["T"], r["trial"]): t for (r, t) in results}
    rows.sort(key=lambda r: (r["env"], r["policy"], r["T"], r["trial"]))

    with open(target / "summary.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SUMMARY_COLUMNS)
        for r in rows:
            writer.writerow([
                r["env"], r["policy"], r["T"], r["trial"], r["seed"],
                _fmt(r["total_reward"]), _fmt(r["regret"]),
                _fmt(r["cumulative_unfairness"]), r["first_infeasible_t"],
                r["runtime_ms"],
            ])
    with open(target / "timings.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["env", "policy", "T", "trial", "runtime_ms"])
        for r in rows:
            writer.writerow([
                r["env"], r["policy"], r["T"], r["trial"],
                f"{times[(r['policy'], r['T'], r['trial'])]:.3f}",
            ])
    return target


# ---------------------------------------------------------------------------
# plot data
# ---------------------------------------------------------------------------


def _read_summary(in_dir: Path):
    path = in_dir / "summary.csv"
    if not path.exists():
        raise MissingInputError(f"{path} not found")
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def emit_plot_data(in_dir, out_dir) -> list[Path]:
    """Write per-figure data files from a finished run directory.

    Produces regret-vs-horizon and unfairness-vs-horizon tables per
    environment, and (when trajectories were dumped) one acceptance
    probability series file per order type and horizon.
    """
    in_dir = Path(in_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = _read_summary(in_dir)
    written = []

    envs = sorted({r["env"] for r in rows})
    for env in envs:
        env_rows = [r for r in rows if r["env"] == env]
        cells = sorted({(r["policy"], int(r["T"])) for r in env_rows})
        for metric, fname in (
            ("regret", f"regret_vs_T_{env}.csv"),
            ("cumulative_unfairness", f"unfairness_vs_T_{env}.csv"),
        ):
            path = out_dir / fname
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["T", "policy", f"mean_{metric}",
                                 f"stderr_{metric}", "trials"])
                for policy, horizon in sorted(cells, key=lambda c: (c[1], c[0])):
                    vals = np.array([
                        float(r[metric]) for r in env_rows
                        if r["policy"] == policy and int(r["T"]) == horizon
                    ])
                    stderr = vals.std(ddof=1) / np.sqrt(vals.size) if vals.size > 1 else 0.0
                    writer.writerow([horizon, policy, _fmt(vals.mean()),
                                     _fmt(stderr), vals.size])
            written.append(path)

    traj_dir = in_dir / "trajectories"
    if traj_dir.is_dir():
        written.extend(_acceptance_files(traj_dir, out_dir))
    return written


def _acceptance_files(traj_dir: Path, out_dir: Path) -> list[Path]:
    groups: dict[tuple, list[Path]] = {}
    for path in sorted(traj_dir.glob("traj_*.csv")):
        stem = path.stem[len("traj_"):]
        parts = stem.split("_")
        # <env>_<policy>_T<T>_trial<k>; env and policy may not contain '_'
        env, policy, t_tag = parts[0], "_".join(parts[1:-2]), parts[-2]
        groups.setdefault((env, policy, int(t_tag[1:])), []).append(path)

    written = []
    by_env_t: dict[tuple, dict] = {}
    for (env, policy, horizon), paths in sorted(groups.items()):
        data = [np.genfromtxt(p, delimiter=",", names=True) for p in paths]
        ycols = [name for name in data[0].dtype.names if name.startswith("y")]
        series = np.stack([
            np.column_stack([d[c] for c in ycols]) for d in data
        ]).mean(axis=0)
        by_env_t.setdefault((env, horizon), {})[policy] = series
    for (env, horizon), per_policy in sorted(by_env_t.items()):
        policies = sorted(per_policy)
        n = per_policy[policies[0]].shape[1]
        horizon_len = per_policy[policies[0]].shape[0]
        for j in range(n):
            path = out_dir / f"acceptance_{env}_T{horizon}_type{j + 1}.csv"
            with open(path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["t"] + [f"mean_y_{p}" for p in policies])
                for t in range(1, horizon_len):  # decision vectors start at t=2
                    writer.writerow(
                        [t + 1] + [_fmt(per_policy[p][t, j]) for p in policies]
                    )
            written.append(path)
    return written


# ---------------------------------------------------------------------------
# assumption checking
# ---------------------------------------------------------------------------


def check_assumptions(env_spec: str) -> str:
    """Binding structure and dual-nondegeneracy report for an environment."""
    if Path(env_spec).exists():
        with open(env_spec) as fh:
            doc = json.load(fh)
        market = _parse_env(doc["env"] if "env" in doc else doc)
    else:
        market = preset(env_spec)
    dlp = build_dlp(market)
    center = lpmod.analytic_center(dlp)
    bset = lpmod.binding_set(dlp, center)
    lines = [
        f"environment: {market.name} (types={dlp.n}, resources={dlp.m})",
        f"expected-demand optimum: {_fmt(lpmod.optimal_value(dlp))}",
        f"fair allocation y*: [{', '.join(_fmt(v) for v in center.y)}]",
        f"binding resources (1-based): {[i + 1 for i in bset.binding]}",
        f"nonbinding resources (1-based): {[i + 1 for i in bset.nonbinding]}",
    ]
    ok, witness = oracles.check_dual_nondegeneracy(dlp)
    if ok:
        lines.append("dual nondegeneracy: PASS "
                     "(every optimal price vector is positive on binding rows)")
    else:
        lam, row = witness
        lines.append(
            "dual nondegeneracy: FAIL "
            f"(optimal prices {np.round(lam, 6).tolist()} give zero to "
            f"binding resource {row + 1})"
        )
    return "\n".join(lines)
