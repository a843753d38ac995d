"""Seeded experiment runs, aggregation, and CSV output.

One repeat = one policy playing one environment for ``horizon`` rounds.
Repeat r draws its streams from base_seed XOR r, so traces are reproducible
run by run and comparable across algorithms under paired seeds.

CSV schema (one file per experiment): header
``round,mean_regret,ci_low,ci_high``, one row per round, floats written in
shortest round-trip form. A ``.meta.json`` sidecar carries the full config
echo, seed scheme, convergence summary, and the build commit when known.
"""

from __future__ import annotations

import json
import math
import subprocess
import warnings
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np
from scipy import stats

from . import __version__
from .baselines import RandomPackingPolicy, known_shared_threshold, known_threshold_vector
from .domain import AggregateTrace, ExperimentConfig, ProblemInstance, RegretTrace
from .environment import (
    ROLE_BINARIZE,
    ROLE_POLICY,
    ROLE_REWARDS,
    Environment,
    mean_reward_of_allocation,
    rng_stream,
)
from .oracle import solve_knapsack
from .per_arm import PerArmThresholdPolicy
from .same_threshold import SameThresholdPolicy

__all__ = [
    "CSV_HEADER",
    "DEFAULT_HORIZON",
    "DEFAULT_REPEATS",
    "DEFAULT_SEED",
    "RunFailure",
    "builtin_instance",
    "default_repeats",
    "fit_log_growth",
    "horizon_scaled_delta",
    "make_policy",
    "run_experiment",
    "run_single",
    "sweep_configs",
    "warn_if_degenerate",
    "write_outputs",
]

CSV_HEADER = "round,mean_regret,ci_low,ci_high"
DEFAULT_HORIZON = 10_000
DEFAULT_REPEATS = 50
DEFAULT_SEED = 1729


class RunFailure(RuntimeError):
    """A contract violation surfaced while a run was in progress."""


# ---------------------------------------------------------------------------
# built-in instances
# ---------------------------------------------------------------------------


def default_repeats(ident: int, reward_kind: str) -> int:
    """Repeat presets: the small per-arm instances get 200 repeats under
    uniform rewards (their traces are noisier there), 50 otherwise."""
    return 200 if reward_kind == "uniform" and ident in (2, 3) else DEFAULT_REPEATS


def builtin_instance(ident: int, *, reward_kind: str = "bernoulli") -> ExperimentConfig:
    """The three benchmark instances, as ready-to-run configs.

    1: 50 arms sharing threshold 0.7, capacity 20, means 0.25..0.74 in
       0.01 steps, shared-threshold learner.
    2: 5 arms, capacity 2, distinct thresholds, per-arm learner. Its
       optimal packing has zero leftover, so a positive resolution gamma
       cannot be margin-safe; the benchmark runs it regardless.
    3: 10 arms, capacity 3, distinct thresholds, per-arm learner. Also
       zero leftover at the optimum.
    """
    if reward_kind not in ("bernoulli", "uniform"):
        raise ValueError("reward_kind must be 'bernoulli' or 'uniform'")
    halfwidth = 0.1 if reward_kind == "uniform" else None
    if ident == 1:
        instance = ProblemInstance(
            num_arms=50,
            capacity=20.0,
            mean_rewards=tuple(0.25 + i / 100.0 for i in range(50)),
            thresholds=(0.7,) * 50,
            reward_kind=reward_kind,
            reward_halfwidth=halfwidth,
        )
        algorithm, gamma = "st", None
    elif ident == 2:
        instance = ProblemInstance(
            num_arms=5,
            capacity=2.0,
            mean_rewards=(0.9, 0.89, 0.87, 0.6, 0.3),
            thresholds=(0.7, 0.7, 0.7, 0.6, 0.35),
            reward_kind=reward_kind,
            reward_halfwidth=halfwidth,
        )
        algorithm, gamma = "dt", 1e-3
    elif ident == 3:
        instance = ProblemInstance(
            num_arms=10,
            capacity=3.0,
            mean_rewards=(0.9, 0.8, 0.42, 0.6, 0.5, 0.2, 0.11, 0.7, 0.3, 0.98),
            thresholds=(0.6, 0.55, 0.3, 0.46, 0.34, 0.2, 0.07, 0.3, 0.25, 0.8),
            reward_kind=reward_kind,
            reward_halfwidth=halfwidth,
        )
        algorithm, gamma = "dt", 1e-3
    else:
        raise ValueError("built-in instances are numbered 1, 2, 3")
    return ExperimentConfig(
        instance=instance,
        algorithm=algorithm,
        horizon=DEFAULT_HORIZON,
        repeats=default_repeats(ident, reward_kind),
        base_seed=DEFAULT_SEED,
        delta=0.1,
        epsilon=0.1,
        gamma=gamma,
    )


def horizon_scaled_delta(horizon: int, alpha: float) -> float:
    """Failure-rate schedule delta = T^(-(ln T)^(-alpha)).

    alpha = 0 recovers delta = 1/T; larger alpha decays more slowly.
    """
    if horizon < 2:
        raise ValueError("horizon must be at least 2")
    if alpha < 0.0:
        raise ValueError("alpha must be >= 0")
    return float(horizon ** (-math.log(horizon) ** (-alpha)))


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------


def make_policy(config: ExperimentConfig, repeat_index: int):
    """Instantiate the configured algorithm with its streams for one repeat."""
    inst = config.instance
    policy_rng = rng_stream(config.base_seed, repeat_index, ROLE_POLICY)
    continuous = inst.reward_kind == "uniform"
    bin_rng = rng_stream(config.base_seed, repeat_index, ROLE_BINARIZE) if continuous else None
    algo = config.algorithm
    if algo == "st":
        return SameThresholdPolicy(
            inst.num_arms,
            inst.capacity,
            config.delta,
            config.epsilon,
            policy_rng,
            continuous_rewards=continuous,
            binarize_rng=bin_rng,
        )
    if algo == "dt":
        return PerArmThresholdPolicy(
            inst.num_arms,
            inst.capacity,
            config.delta,
            config.epsilon,
            config.gamma,
            policy_rng,
            continuous_rewards=continuous,
            binarize_rng=bin_rng,
        )
    if algo == "mpts":
        return known_shared_threshold(
            inst.num_arms,
            inst.capacity,
            inst.thresholds[0],
            policy_rng,
            continuous_rewards=continuous,
            binarize_rng=bin_rng,
        )
    if algo == "cts":
        return known_threshold_vector(
            inst.threshold_vector(),
            inst.capacity,
            policy_rng,
            continuous_rewards=continuous,
            binarize_rng=bin_rng,
        )
    if algo == "random":
        return RandomPackingPolicy(inst.threshold_vector(), inst.capacity, policy_rng)
    raise ValueError(f"unknown algorithm {algo!r}")


def warn_if_degenerate(config: ExperimentConfig) -> None:
    """Uniform rewards whose support touches 0 break the one-zero search
    rule: a genuine zero draw is indistinguishable from censoring."""
    inst = config.instance
    if inst.reward_kind != "uniform" or config.algorithm not in ("st", "dt"):
        return
    h = float(inst.reward_halfwidth)
    if min(inst.mean_rewards) - h <= 0.0:
        warnings.warn(
            "uniform reward support touches 0 for some arm; with a zero-streak "
            "limit of 1 the threshold search can move on a genuine zero draw",
            RuntimeWarning,
            stacklevel=2,
        )


def run_single(config: ExperimentConfig, repeat_index: int, policy=None) -> RegretTrace:
    """One seeded repeat. Contract violations mid-run are wrapped in
    RunFailure with the repeat and round attached."""
    inst = config.instance
    env = Environment(inst, rng_stream(config.base_seed, repeat_index, ROLE_REWARDS))
    if policy is None:
        policy = make_policy(config, repeat_index)
    optimum = solve_knapsack(inst.mean_rewards, inst.thresholds, inst.capacity).total_value
    cumulative = np.empty(config.horizon)
    total = 0.0
    for t in range(1, config.horizon + 1):
        try:
            allocation = policy.select()
            feedback = env.step(allocation)
            policy.update(feedback)
        except (ValueError, RuntimeError) as exc:
            raise RunFailure(f"repeat {repeat_index}, round {t}: {exc}") from exc
        total += optimum - mean_reward_of_allocation(inst, allocation)
        cumulative[t - 1] = total
    return RegretTrace(cumulative, policy.convergence_round)


def _aggregate(traces: list[RegretTrace], horizon: int) -> AggregateTrace:
    stacked = np.stack([t.cumulative for t in traces])
    n = stacked.shape[0]
    mean = stacked.mean(axis=0)
    if n == 1:
        low, high = mean.copy(), mean.copy()
    else:
        sd = stacked.std(axis=0, ddof=1)
        # Normal critical value for large n, Student-t below 30 repeats.
        crit = 1.96 if n >= 30 else float(stats.t.ppf(0.975, n - 1))
        half = crit * sd / math.sqrt(n)
        low, high = mean - half, mean + half
    return AggregateTrace(
        rounds=np.arange(1, horizon + 1),
        mean_regret=mean,
        ci_low=low,
        ci_high=high,
        n_repeats=n,
        convergence_rounds=tuple(t.convergence_round for t in traces),
    )


def run_experiment(config: ExperimentConfig, *, workers: int = 1) -> AggregateTrace:
    """All repeats of one config, aggregated. Repeats are independent and
    may run in separate processes; results are ordered by repeat index
    either way, so the aggregate does not depend on scheduling."""
    warn_if_degenerate(config)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            traces = list(pool.map(run_single, [config] * config.repeats, range(config.repeats)))
    else:
        traces = [run_single(config, r) for r in range(config.repeats)]
    return _aggregate(traces, config.horizon)


# ---------------------------------------------------------------------------
# output files
# ---------------------------------------------------------------------------


def _format(value: float) -> str:
    return repr(float(value))


def _git_commit() -> str | None:
    try:
        proc = subprocess.run(
            ["git", "rev-parse", "HEAD"],
            cwd=Path(__file__).resolve().parent,
            capture_output=True,
            text=True,
            timeout=10,
        )
    except OSError:
        return None
    if proc.returncode != 0:
        return None
    return proc.stdout.strip() or None


def write_outputs(
    config: ExperimentConfig, trace: AggregateTrace, out_dir, stem: str
) -> tuple[Path, Path]:
    """Write ``<stem>.csv`` and ``<stem>.meta.json`` under ``out_dir``.

    Bytes are a pure function of (config, trace): fixed newlines, shortest
    round-trip floats, sorted JSON keys, no timestamps.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    csv_path = out / f"{stem}.csv"
    meta_path = out / f"{stem}.meta.json"

    lines = [CSV_HEADER]
    for i in range(trace.mean_regret.shape[0]):
        lines.append(
            f"{int(trace.rounds[i])},{_format(trace.mean_regret[i])},"
            f"{_format(trace.ci_low[i])},{_format(trace.ci_high[i])}"
        )
    with open(csv_path, "w", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")

    converged = [c for c in trace.convergence_rounds if c is not None]
    meta = {
        "csv_file": csv_path.name,
        "csv_columns": CSV_HEADER.split(","),
        "ci_rule": "mean +- c*sd/sqrt(n), c = Student-t 97.5% for n < 30 else 1.96",
        "config": config.to_dict(),
        "n_repeats": trace.n_repeats,
        "final_mean_regret": float(trace.mean_regret[-1]),
        "convergence_rounds": list(trace.convergence_rounds),
        "converged_repeats": len(converged),
        "median_convergence_round": (
            float(np.median(converged)) if converged else None
        ),
        "rng_scheme": (
            "numpy PCG64; SeedSequence(entropy=base_seed XOR repeat_index, "
            "spawn_key=(role,)); roles: rewards=1, policy=2, binarize=3"
        ),
        "package_version": __version__,
        "commit": _git_commit(),
    }
    with open(meta_path, "w", newline="\n") as fh:
        fh.write(json.dumps(meta, indent=2, sort_keys=True) + "\n")
    return csv_path, meta_path


# ---------------------------------------------------------------------------
# parameter sweeps and fits
# ---------------------------------------------------------------------------


def sweep_configs(
    base: ExperimentConfig, param: str, values
) -> list[tuple[float, ExperimentConfig]]:
    """Variants of a config along one instance parameter.

    ``capacity`` replaces the capacity; ``theta`` replaces every threshold
    with one shared value. Validation of each variant applies as usual.
    """
    inst = base.instance
    out: list[tuple[float, ExperimentConfig]] = []
    for raw in values:
        v = float(raw)
        if param == "capacity":
            variant = ProblemInstance(
                num_arms=inst.num_arms,
                capacity=v,
                mean_rewards=inst.mean_rewards,
                thresholds=inst.thresholds,
                reward_kind=inst.reward_kind,
                reward_halfwidth=inst.reward_halfwidth,
            )
        elif param == "theta":
            variant = ProblemInstance(
                num_arms=inst.num_arms,
                capacity=inst.capacity,
                mean_rewards=inst.mean_rewards,
                thresholds=(v,) * inst.num_arms,
                reward_kind=inst.reward_kind,
                reward_halfwidth=inst.reward_halfwidth,
            )
        else:
            raise ValueError("sweep parameter must be 'capacity' or 'theta'")
        out.append((v, base.with_updates(instance=variant)))
    return out


def fit_log_growth(trace, burn_in_fraction: float = 0.1) -> tuple[float, float]:
    """Least-squares fit of cumulative regret against ln t.

    Rounds before ``burn_in_fraction * T`` are dropped so the search phase
    does not pollute the fit. Returns (slope, r_squared).
    """
    y = np.asarray(getattr(trace, "mean_regret", trace), dtype=float)
    horizon = y.shape[0]
    if horizon < 100:
        raise ValueError("fit needs a horizon of at least 100 rounds")
    if not 0.0 <= burn_in_fraction < 1.0:
        raise ValueError("burn_in_fraction must lie in [0, 1)")
    start = max(1, int(round(burn_in_fraction * horizon)))
    tail = y[start - 1 :]
    if np.ptp(tail) == 0.0:
        raise ValueError("trace is constant over the fit window")
    logt = np.log(np.arange(start, horizon + 1, dtype=float))
    slope, intercept = np.polyfit(logt, tail, 1)
    fitted = slope * logt + intercept
    ss_res = float(np.sum((tail - fitted) ** 2))
    ss_tot = float(np.sum((tail - tail.mean()) ** 2))
    return float(slope), 1.0 - ss_res / ss_tot
