"""Reference policies.

The two known-threshold baselines are the learners themselves constructed
pre-converged, so regret comparisons against them exercise the exact same
selection and update code. The random baseline packs arms at their true
thresholds in a uniformly random order.
"""

from __future__ import annotations

import numpy as np

from .domain import Allocation, RoundFeedback
from .oracle import allocation_equivalent_same
from .per_arm import PerArmThresholdPolicy
from .same_threshold import SameThresholdPolicy

__all__ = [
    "RandomPackingPolicy",
    "known_shared_threshold",
    "known_threshold_vector",
]


def known_shared_threshold(
    num_arms: int,
    capacity: float,
    theta_shared: float,
    rng: np.random.Generator,
    *,
    continuous_rewards: bool = False,
    binarize_rng: np.random.Generator | None = None,
) -> SameThresholdPolicy:
    """Multi-play Thompson sampling given the true shared threshold.

    The threshold is converted to its equal-split equivalent and the
    shared-threshold learner starts converged at that ladder level.
    """
    eq = allocation_equivalent_same(theta_shared, capacity, num_arms)
    return SameThresholdPolicy(
        num_arms,
        capacity,
        None,
        None,
        rng,
        continuous_rewards=continuous_rewards,
        binarize_rng=binarize_rng,
        known_threshold=eq.theta_hat,
    )


def known_threshold_vector(
    thresholds,
    capacity: float,
    rng: np.random.Generator,
    *,
    continuous_rewards: bool = False,
    binarize_rng: np.random.Generator | None = None,
    pinned_means=None,
) -> PerArmThresholdPolicy:
    """Combinatorial Thompson sampling given true per-arm thresholds."""
    thresholds = np.asarray(thresholds, dtype=float)
    return PerArmThresholdPolicy(
        int(thresholds.shape[0]),
        capacity,
        rng=rng,
        continuous_rewards=continuous_rewards,
        binarize_rng=binarize_rng,
        known_thresholds=thresholds,
        pinned_means=pinned_means,
    )


class RandomPackingPolicy:
    """Arms are packed at their true thresholds in random order each round."""

    def __init__(self, thresholds, capacity: float, rng: np.random.Generator) -> None:
        th = np.array(thresholds, dtype=float)
        if th.ndim != 1 or th.size < 1:
            raise ValueError("thresholds must be a non-empty vector")
        if th.min() < 0.0:
            raise ValueError("thresholds must be non-negative")
        cap = float(capacity)
        if th.max() > cap:
            raise ValueError("thresholds must not exceed the capacity")
        th.flags.writeable = False
        self.thresholds = th
        self.capacity = cap
        self._rng = rng
        self.num_arms = int(th.shape[0])
        self._round = 0
        self._pending = False
        self.convergence_round: int | None = None

    def select(self) -> Allocation:
        if self._pending:
            raise RuntimeError("update must follow each select")
        x = np.zeros(self.num_arms)
        remaining = self.capacity
        for i in self._rng.permutation(self.num_arms):
            t = float(self.thresholds[i])
            if t <= remaining:
                x[i] = t
                remaining -= t
        self._pending = True
        return Allocation(x, self.capacity)

    def update(self, feedback: RoundFeedback) -> None:
        if not self._pending:
            raise RuntimeError("select must precede update")
        if feedback.round != self._round + 1:
            raise ValueError(
                f"feedback is for round {feedback.round}, expected {self._round + 1}"
            )
        self._round += 1
        self._pending = False
