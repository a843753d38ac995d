"""Value types shared across the library.

Problem instances, allocations, per-round feedback, Beta posterior state,
experiment configuration, and regret traces. Every type validates its
invariants on construction; instances, allocations, feedback, configs, and
traces are treated as immutable afterwards. Posterior counts are the one
mutable piece of learner state and are updated in place.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from typing import Any, Mapping

import numpy as np

__all__ = [
    "ALGORITHMS",
    "REWARD_KINDS",
    "VALUE_TOL",
    "Allocation",
    "BetaPosterior",
    "ExperimentConfig",
    "ProblemInstance",
    "RegretTrace",
    "RoundFeedback",
    "feasibility_slack",
    "validate_instance",
]

REWARD_KINDS = ("bernoulli", "uniform")

# Accepted algorithm names, as used by ExperimentConfig and the CLI:
# the two learners, the two known-threshold baselines, and random packing.
ALGORITHMS = ("st", "dt", "mpts", "cts", "random")

# Tolerance for comparing total mean rewards of two allocations.
VALUE_TOL = 1e-12

DEFAULT_HALFWIDTH = 0.1


def feasibility_slack(capacity: float) -> float:
    """Slack allowed when allocation amounts are summed against capacity.

    Threshold sums of an optimal packing can land exactly on the capacity;
    accumulated rounding must not make such an allocation look infeasible.
    """
    return 1e-9 * max(1.0, capacity)


def _float_tuple(name: str, values: Any, length: int | None = None) -> tuple[float, ...]:
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise ValueError(f"{name} must be one-dimensional, got shape {arr.shape}")
    if length is not None and arr.shape[0] != length:
        raise ValueError(f"{name} has length {arr.shape[0]}, expected {length}")
    if not np.all(np.isfinite(arr)):
        raise ValueError(f"{name} contains non-finite entries")
    return tuple(float(v) for v in arr)


# ---------------------------------------------------------------------------
# problem instance
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ProblemInstance:
    """A K-arm allocation problem with hidden activation thresholds.

    Arm i yields reward only when its allocated amount reaches
    ``thresholds[i]``; rewards are Bernoulli(mean) or Uniform(mean +- h)
    clamped to [0, 1] depending on ``reward_kind``.
    """

    num_arms: int
    capacity: float
    mean_rewards: tuple[float, ...]
    thresholds: tuple[float, ...]
    reward_kind: str = "bernoulli"
    reward_halfwidth: float | None = None

    def __post_init__(self) -> None:
        if self.num_arms < 1:
            raise ValueError("num_arms must be at least 1")
        cap = float(self.capacity)
        if not math.isfinite(cap) or cap < 0.0:
            raise ValueError("capacity must be finite and non-negative")
        object.__setattr__(self, "capacity", cap)
        mu = _float_tuple("mean_rewards", self.mean_rewards, self.num_arms)
        th = _float_tuple("thresholds", self.thresholds, self.num_arms)
        object.__setattr__(self, "mean_rewards", mu)
        object.__setattr__(self, "thresholds", th)
        if min(mu) < 0.0 or max(mu) > 1.0:
            raise ValueError("mean rewards must lie in [0, 1]")
        if min(th) < 0.0:
            raise ValueError("thresholds must be non-negative")
        if max(th) > cap:
            raise ValueError("thresholds must not exceed the capacity")
        if self.reward_kind not in REWARD_KINDS:
            raise ValueError(f"reward_kind must be one of {REWARD_KINDS}")
        if self.reward_kind == "uniform":
            h = DEFAULT_HALFWIDTH if self.reward_halfwidth is None else float(self.reward_halfwidth)
            if not math.isfinite(h) or h < 0.0:
                raise ValueError("reward_halfwidth must be finite and >= 0")
            object.__setattr__(self, "reward_halfwidth", h)
        elif self.reward_halfwidth is not None:
            raise ValueError("reward_halfwidth only applies to uniform rewards")

    def mean_vector(self) -> np.ndarray:
        return np.array(self.mean_rewards, dtype=float)

    def threshold_vector(self) -> np.ndarray:
        return np.array(self.thresholds, dtype=float)

    def to_dict(self) -> dict[str, Any]:
        out: dict[str, Any] = {
            "num_arms": self.num_arms,
            "capacity": self.capacity,
            "mean_rewards": list(self.mean_rewards),
            "thresholds": list(self.thresholds),
            "reward_kind": self.reward_kind,
        }
        if self.reward_kind == "uniform":
            out["reward_halfwidth"] = self.reward_halfwidth
        return out

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ProblemInstance":
        allowed = {
            "num_arms",
            "capacity",
            "mean_rewards",
            "thresholds",
            "reward_kind",
            "reward_halfwidth",
        }
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown instance fields: {sorted(unknown)}")
        for key in ("num_arms", "capacity", "mean_rewards", "thresholds"):
            if key not in data:
                raise ValueError(f"instance is missing required field {key!r}")
        return cls(
            num_arms=int(data["num_arms"]),
            capacity=float(data["capacity"]),
            mean_rewards=tuple(float(v) for v in data["mean_rewards"]),
            thresholds=tuple(float(v) for v in data["thresholds"]),
            reward_kind=str(data.get("reward_kind", "bernoulli")),
            reward_halfwidth=(
                None if data.get("reward_halfwidth") is None else float(data["reward_halfwidth"])
            ),
        )


def validate_instance(instance: ProblemInstance) -> ProblemInstance:
    """Re-run the construction checks on an instance and return it.

    Useful after deserialization paths that bypass __init__.
    """
    return ProblemInstance(
        num_arms=instance.num_arms,
        capacity=instance.capacity,
        mean_rewards=instance.mean_rewards,
        thresholds=instance.thresholds,
        reward_kind=instance.reward_kind,
        reward_halfwidth=instance.reward_halfwidth,
    )


# ---------------------------------------------------------------------------
# allocations and feedback
# ---------------------------------------------------------------------------


class Allocation:
    """A per-arm division of the resource, validated against a capacity.

    The amounts array is made read-only; the total may exceed the capacity
    only by the feasibility slack.
    """

    __slots__ = ("amounts", "capacity")

    def __init__(self, amounts: Any, capacity: float) -> None:
        arr = np.array(amounts, dtype=float)
        if arr.ndim != 1:
            raise ValueError("allocation amounts must be one-dimensional")
        if not np.all(np.isfinite(arr)):
            raise ValueError("allocation amounts must be finite")
        cap = float(capacity)
        if arr.size and (arr.min() < 0.0 or arr.max() > cap):
            raise ValueError("each allocation amount must lie in [0, capacity]")
        total = float(arr.sum())
        if total > cap + feasibility_slack(cap):
            raise ValueError(f"allocation total {total} exceeds capacity {cap}")
        arr.flags.writeable = False
        self.amounts = arr
        self.capacity = cap

    def __len__(self) -> int:
        return int(self.amounts.shape[0])

    def __repr__(self) -> str:  # pragma: no cover - debugging aid
        return f"Allocation({self.amounts.tolist()}, capacity={self.capacity})"


class RoundFeedback:
    """What the learner sees after one round: censored rewards and their sum.

    ``observed[i]`` is the raw reward of arm i if its allocation reached the
    threshold, else 0; ``collected_reward`` is the round total.
    """

    __slots__ = ("round", "observed", "collected_reward")

    def __init__(self, round: int, observed: Any, collected_reward: float) -> None:
        if round < 1:
            raise ValueError("round numbering starts at 1")
        arr = np.array(observed, dtype=float)
        if arr.ndim != 1:
            raise ValueError("observed must be one-dimensional")
        if arr.size and (arr.min() < -VALUE_TOL or arr.max() > 1.0 + VALUE_TOL):
            raise ValueError("observed rewards must lie in [0, 1]")
        arr.flags.writeable = False
        self.round = int(round)
        self.observed = arr
        self.collected_reward = float(collected_reward)


# ---------------------------------------------------------------------------
# posterior state
# ---------------------------------------------------------------------------


class BetaPosterior:
    """Independent Beta(S_i, F_i) posteriors over arm means.

    Counts are real-valued and must stay >= 1 (the uniform prior). They are
    updated in place by the learners.
    """

    __slots__ = ("successes", "failures")

    def __init__(self, successes: Any, failures: Any) -> None:
        s = np.array(successes, dtype=float)
        f = np.array(failures, dtype=float)
        if s.shape != f.shape or s.ndim != 1:
            raise ValueError("success and failure counts must be 1-D and congruent")
        if s.size == 0:
            raise ValueError("posterior needs at least one arm")
        if s.min() < 1.0 or f.min() < 1.0:
            raise ValueError("posterior counts must be at least 1")
        if not (np.all(np.isfinite(s)) and np.all(np.isfinite(f))):
            raise ValueError("posterior counts must be finite")
        self.successes = s
        self.failures = f

    @classmethod
    def fresh(cls, num_arms: int) -> "BetaPosterior":
        return cls(np.ones(num_arms), np.ones(num_arms))

    def sample(self, rng: np.random.Generator) -> np.ndarray:
        return rng.beta(self.successes, self.failures)

    def mean(self) -> np.ndarray:
        return self.successes / (self.successes + self.failures)


# ---------------------------------------------------------------------------
# experiment configuration
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to reproduce an experiment run."""

    instance: ProblemInstance
    algorithm: str
    horizon: int
    repeats: int
    base_seed: int
    delta: float = 0.1
    epsilon: float = 0.1
    gamma: float | None = None

    def __post_init__(self) -> None:
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"algorithm must be one of {ALGORITHMS}")
        if self.horizon < 1:
            raise ValueError("horizon must be at least 1")
        if self.repeats < 1:
            raise ValueError("repeats must be at least 1")
        if not (0 <= self.base_seed < 2**64):
            raise ValueError("base_seed must fit in an unsigned 64-bit integer")
        if not (0.0 < self.delta < 1.0):
            raise ValueError("delta must lie in (0, 1)")
        if not (0.0 < self.epsilon <= 1.0):
            raise ValueError("epsilon must lie in (0, 1]")
        if self.algorithm == "dt":
            if self.gamma is None or not (self.gamma > 0.0):
                raise ValueError("gamma must be positive for the per-arm learner")
        if self.gamma is not None and not (self.gamma > 0.0 and math.isfinite(self.gamma)):
            raise ValueError("gamma must be positive and finite when given")
        if self.algorithm == "st" and self.instance.num_arms < 2:
            raise ValueError("the shared-threshold learner needs at least 2 arms")
        if self.algorithm == "mpts":
            th = self.instance.thresholds
            if th[0] <= 0.0 or any(t != th[0] for t in th):
                raise ValueError(
                    "the known-shared-threshold baseline needs identical positive thresholds"
                )

    def with_updates(self, **changes: Any) -> "ExperimentConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict[str, Any]:
        return {
            "instance": self.instance.to_dict(),
            "algorithm": self.algorithm,
            "horizon": self.horizon,
            "repeats": self.repeats,
            "base_seed": self.base_seed,
            "delta": self.delta,
            "epsilon": self.epsilon,
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        allowed = {
            "instance",
            "algorithm",
            "horizon",
            "repeats",
            "base_seed",
            "delta",
            "epsilon",
            "gamma",
        }
        unknown = set(data) - allowed
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        for key in ("instance", "algorithm", "horizon", "repeats", "base_seed"):
            if key not in data:
                raise ValueError(f"config is missing required field {key!r}")
        return cls(
            instance=ProblemInstance.from_dict(data["instance"]),
            algorithm=str(data["algorithm"]),
            horizon=int(data["horizon"]),
            repeats=int(data["repeats"]),
            base_seed=int(data["base_seed"]),
            delta=float(data.get("delta", 0.1)),
            epsilon=float(data.get("epsilon", 0.1)),
            gamma=None if data.get("gamma") is None else float(data["gamma"]),
        )

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# regret traces
# ---------------------------------------------------------------------------


class RegretTrace:
    """Cumulative expected regret of one run, plus when the search settled."""

    __slots__ = ("cumulative", "convergence_round")

    def __init__(self, cumulative: Any, convergence_round: int | None = None) -> None:
        arr = np.array(cumulative, dtype=float)
        if arr.ndim != 1 or arr.size < 1:
            raise ValueError("cumulative regret must be a non-empty vector")
        if not np.all(np.isfinite(arr)):
            raise ValueError("cumulative regret must be finite")
        if np.any(np.diff(arr) < -VALUE_TOL):
            raise ValueError("cumulative regret must be non-decreasing")
        if convergence_round is not None and convergence_round < 0:
            raise ValueError("convergence_round must be >= 0 when given")
        arr.flags.writeable = False
        self.cumulative = arr
        self.convergence_round = None if convergence_round is None else int(convergence_round)

    def __len__(self) -> int:
        return int(self.cumulative.shape[0])


@dataclass(frozen=True)
class AggregateTrace:
    """Mean regret trace over repeats with a confidence band."""

    rounds: np.ndarray = field(repr=False)
    mean_regret: np.ndarray = field(repr=False)
    ci_low: np.ndarray = field(repr=False)
    ci_high: np.ndarray = field(repr=False)
    n_repeats: int = 0
    convergence_rounds: tuple[int | None, ...] = ()

    def __post_init__(self) -> None:
        n = self.mean_regret.shape[0]
        for name in ("rounds", "mean_regret", "ci_low", "ci_high"):
            arr = getattr(self, name)
            if arr.ndim != 1 or arr.shape[0] != n:
                raise ValueError("aggregate arrays must be 1-D and congruent")
            arr.flags.writeable = False
        if self.n_repeats < 1:
            raise ValueError("n_repeats must be at least 1")
        if np.any(self.ci_low > self.mean_regret + VALUE_TOL) or np.any(
            self.mean_regret > self.ci_high + VALUE_TOL
        ):
            raise ValueError("confidence band must bracket the mean")
