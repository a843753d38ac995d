"""Censored reward channel and RNG stream management.

The environment draws every arm's raw reward each round, then zeroes the
entries whose allocation fell short of the arm's threshold. Reward draws,
posterior sampling, and reward binarization each get an independent stream
so that changing one consumer never perturbs the others.
"""

from __future__ import annotations

import numpy as np

from .domain import Allocation, ProblemInstance, RoundFeedback, feasibility_slack

__all__ = [
    "ROLE_REWARDS",
    "ROLE_POLICY",
    "ROLE_BINARIZE",
    "Environment",
    "binarize",
    "mean_reward_of_allocation",
    "rng_stream",
]

# Stream roles. Each (repeat, role) pair owns a disjoint generator derived
# from the base seed, XORed with the repeat index and spawned by role.
ROLE_REWARDS = 1
ROLE_POLICY = 2
ROLE_BINARIZE = 3


def rng_stream(base_seed: int, repeat_index: int, role: int) -> np.random.Generator:
    """Generator for one (repeat, role) pair.

    Derivation: SeedSequence(entropy = base_seed XOR repeat_index,
    spawn_key = (role,)). Distinct roles and repeats never share a stream.
    """
    if repeat_index < 0:
        raise ValueError("repeat_index must be >= 0")
    entropy = int(base_seed) ^ int(repeat_index)
    return np.random.default_rng(np.random.SeedSequence(entropy=entropy, spawn_key=(role,)))


def binarize(value: float, rng: np.random.Generator) -> int:
    """Map a reward in [0, 1] to a Bernoulli bit with matching mean."""
    if not 0.0 <= value <= 1.0:
        raise ValueError("binarize expects a value in [0, 1]")
    return int(rng.random() < value)


class Environment:
    """Simulates one problem instance; feedback is censored semi-bandit.

    ``step`` consumes exactly ``num_arms`` draws from the reward stream per
    round regardless of the allocation, so reward randomness is a fixed
    function of (instance, seed, round).
    """

    def __init__(self, instance: ProblemInstance, rng: np.random.Generator) -> None:
        self.instance = instance
        self._rng = rng
        self._mu = instance.mean_vector()
        self._theta = instance.threshold_vector()
        self._uniform = instance.reward_kind == "uniform"
        if self._uniform:
            h = float(instance.reward_halfwidth)
            self._lo = np.clip(self._mu - h, 0.0, 1.0)
            self._hi = np.clip(self._mu + h, 0.0, 1.0)
        self.round_counter = 0

    def step(self, allocation: Allocation) -> RoundFeedback:
        x = allocation.amounts
        if x.shape[0] != self.instance.num_arms:
            raise ValueError("allocation length does not match the instance")
        total = float(x.sum())
        cap = self.instance.capacity
        if total > cap + feasibility_slack(cap):
            raise ValueError(f"allocation total {total} exceeds capacity {cap}")
        if self._uniform:
            draws = self._lo + (self._hi - self._lo) * self._rng.random(self._mu.shape[0])
        else:
            draws = (self._rng.random(self._mu.shape[0]) < self._mu).astype(float)
        active = x >= self._theta
        observed = np.where(active, draws, 0.0)
        self.round_counter += 1
        return RoundFeedback(
            round=self.round_counter,
            observed=observed,
            collected_reward=float(observed.sum()),
        )


def mean_reward_of_allocation(instance: ProblemInstance, allocation: Allocation) -> float:
    """Expected reward collected by an allocation: sum of means over the
    arms whose amount reaches their threshold. Summed in arm-index order so
    the result is comparable bit-for-bit with the packing oracle's totals.
    """
    x = allocation.amounts
    if x.shape[0] != instance.num_arms:
        raise ValueError("allocation length does not match the instance")
    total = 0.0
    for i in range(instance.num_arms):
        if x[i] >= instance.thresholds[i]:
            total += instance.mean_rewards[i]
    return total
