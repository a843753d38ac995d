"""Learner for instances where every arm has its own activation threshold.

Each arm carries an interval [low, high] known to bracket its threshold
(high is always a proven-sufficient amount, low a proven-or-presumed
insufficient one). Unsettled arms are probed at their midpoint; settled
arms are served at their committed estimate. Which arms receive resource
each round is decided by a value-density ordering on Thompson samples, with
prefix feasibility gates. Once every arm is settled the policy switches to
exact packing of the sampled means against the committed estimates.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .domain import Allocation, BetaPosterior, RoundFeedback
from .oracle import solve_knapsack, zero_streak_limit_per_arm

__all__ = ["PerArmThresholdPolicy", "ThresholdSearch", "ResourceEvents"]


@dataclass
class ThresholdSearch:
    """Per-arm bisection bookkeeping, vectorized over arms.

    ``high`` only ever moves to amounts that produced reward, so
    high[i] >= theta[i] is a deterministic invariant and the committed
    estimate (frozen to high when the interval width reaches gamma) never
    undershoots. ``zero_streak`` counts consecutive rewardless probes of an
    arm; it persists across rounds where the arm gets nothing.
    """

    low: np.ndarray
    high: np.ndarray
    committed: np.ndarray
    current: np.ndarray
    settled: np.ndarray
    zero_streak: np.ndarray
    limit: int


class ResourceEvents(NamedTuple):
    """Who would receive resource this round, given mean samples."""

    probe_grant: np.ndarray  # unsettled arms whose midpoint demand fits
    keep_grant: np.ndarray  # settled arms whose committed demand fits
    all_settled: bool


class PerArmThresholdPolicy:
    """Interval search per arm fused with Thompson sampling.

    With ``continuous_rewards`` the zero-streak limit is 1 and posterior
    updates use rewards binarized through ``binarize_rng``.

    ``known_thresholds`` skips the search entirely: every arm starts
    settled at the given amount and the policy is pure posterior packing
    from round one (the known-threshold baseline shares this code path).
    ``pinned_means`` replaces posterior samples with fixed values, which
    turns the settled policy into the deterministic packing oracle.
    """

    def __init__(
        self,
        num_arms: int,
        capacity: float,
        delta: float | None = None,
        epsilon: float | None = None,
        gamma: float | None = None,
        rng: np.random.Generator | None = None,
        *,
        continuous_rewards: bool = False,
        binarize_rng: np.random.Generator | None = None,
        known_thresholds=None,
        pinned_means=None,
    ) -> None:
        if num_arms < 1:
            raise ValueError("num_arms must be at least 1")
        if not capacity > 0.0:
            raise ValueError("capacity must be positive")
        self.num_arms = int(num_arms)
        self.capacity = float(capacity)
        self._rng = rng if rng is not None else np.random.default_rng()
        self._continuous = bool(continuous_rewards)
        self._bin_rng = binarize_rng
        if self._continuous and self._bin_rng is None:
            raise ValueError("continuous rewards need a binarize_rng stream")
        self.gamma = None if gamma is None else float(gamma)

        if known_thresholds is None:
            if self.gamma is None:
                raise ValueError("gamma is required when searching")
            if delta is None or epsilon is None:
                raise ValueError("delta and epsilon are required when searching")
            limit = (
                1
                if self._continuous
                else zero_streak_limit_per_arm(num_arms, capacity, self.gamma, delta, epsilon)
            )
            self.search = ThresholdSearch(
                low=np.zeros(self.num_arms),
                high=np.full(self.num_arms, self.capacity),
                committed=np.full(self.num_arms, self.capacity),
                current=np.full(self.num_arms, self.capacity / self.num_arms),
                settled=np.zeros(self.num_arms, dtype=bool),
                zero_streak=np.zeros(self.num_arms),
                limit=limit,
            )
            self.convergence_round: int | None = None
        else:
            kt = np.array(known_thresholds, dtype=float)
            if kt.shape != (self.num_arms,):
                raise ValueError("known_thresholds must have one entry per arm")
            if kt.min() < 0.0 or kt.max() > self.capacity:
                raise ValueError("known thresholds must lie in [0, capacity]")
            self.search = ThresholdSearch(
                low=kt.copy(),
                high=kt.copy(),
                committed=kt.copy(),
                current=kt.copy(),
                settled=np.ones(self.num_arms, dtype=bool),
                zero_streak=np.zeros(self.num_arms),
                limit=0,
            )
            self.convergence_round = 0

        if pinned_means is not None:
            pm = np.array(pinned_means, dtype=float)
            if pm.shape != (self.num_arms,):
                raise ValueError("pinned_means must have one entry per arm")
            if pm.min() < 0.0 or pm.max() > 1.0:
                raise ValueError("pinned means must lie in [0, 1]")
            pm.flags.writeable = False
            self._pinned: np.ndarray | None = pm
        else:
            self._pinned = None

        self.posterior = BetaPosterior.fresh(self.num_arms)
        self._round = 0
        self._pending: tuple[str, np.ndarray] | None = None

    # ------------------------------------------------------------------ api

    @property
    def converged(self) -> bool:
        return bool(self.search.settled.all())

    def theta_hat(self) -> np.ndarray:
        """Committed per-arm estimates (capacity until an arm settles)."""
        return self.search.committed.copy()

    def resource_events(self, samples) -> ResourceEvents:
        """Grant decisions for given mean samples, before any allocation.

        Arms are ranked by sample-to-demand density (ties to the smaller
        index). An unsettled arm is granted its midpoint demand if that
        fits the capacity net of all denser unsettled demands; a settled
        arm is granted its committed demand if it fits net of the entire
        unsettled demand plus all denser settled demands.
        """
        samples = np.asarray(samples, dtype=float)
        grant, cand = self._grants(samples)
        settled = self.search.settled
        return ResourceEvents(
            probe_grant=grant & ~settled,
            keep_grant=grant & settled,
            all_settled=bool(settled.all()),
        )

    def select(self) -> Allocation:
        if self._pending is not None:
            raise RuntimeError("update must follow each select")
        samples = self._means()
        srch = self.search
        if srch.settled.all():
            sol = solve_knapsack(samples, srch.committed, self.capacity)
            packed = np.zeros(self.num_arms, dtype=bool)
            packed[list(sol.selected)] = True
            x = np.where(packed, srch.committed, 0.0)
            srch.current = x.copy()
            self._pending = ("packed", packed)
        else:
            grant, cand = self._grants(samples)
            x = np.where(grant, cand, 0.0)
            srch.current = x.copy()
            self._pending = ("search", grant)
        return Allocation(x, self.capacity)

    def update(self, feedback: RoundFeedback) -> None:
        if self._pending is None:
            raise RuntimeError("select must precede update")
        if feedback.round != self._round + 1:
            raise ValueError(
                f"feedback is for round {feedback.round}, expected {self._round + 1}"
            )
        if feedback.observed.shape[0] != self.num_arms:
            raise ValueError("feedback length does not match the policy")
        self._round += 1
        mode, granted = self._pending
        self._pending = None
        obs = feedback.observed
        post = self.posterior
        srch = self.search

        if mode == "packed":
            bits = self._bits(obs[granted])
            post.successes[granted] += bits
            post.failures[granted] += 1.0 - bits
            return

        keeping = granted & srch.settled
        if keeping.any():
            bits = self._bits(obs[keeping])
            post.successes[keeping] += bits
            post.failures[keeping] += 1.0 - bits

        for i in np.flatnonzero(granted & ~srch.settled):
            probe = float(srch.current[i])
            if obs[i] > 0.0:
                # Reward proves the probe amount reaches the threshold.
                bit = self._bit(float(obs[i]))
                srch.high[i] = probe
                post.successes[i] += bit
                post.failures[i] += (1.0 - bit) + srch.zero_streak[i]
                srch.zero_streak[i] = 0.0
            else:
                srch.zero_streak[i] += 1.0
                if srch.zero_streak[i] >= srch.limit:
                    # Enough silence: presume the probe is below threshold.
                    srch.low[i] = probe
                    srch.zero_streak[i] = 0.0
            if srch.high[i] - srch.low[i] <= self.gamma:
                srch.settled[i] = True
                srch.committed[i] = srch.high[i]
        if self.convergence_round is None and srch.settled.all():
            self.convergence_round = self._round

    # ------------------------------------------------------------- internals

    def _means(self) -> np.ndarray:
        if self._pinned is not None:
            return self._pinned
        return self.posterior.sample(self._rng)

    def _grants(self, samples: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        srch = self.search
        cand = np.where(srch.settled, srch.high, 0.5 * (srch.low + srch.high))
        # Zero-demand arms have infinite density: granted before anything.
        positive = cand > 0.0
        ratio = np.where(positive, samples / np.where(positive, cand, 1.0), np.inf)
        order = np.lexsort((np.arange(self.num_arms), -ratio))
        unsettled_total = float(cand[~srch.settled].sum())
        grant = np.zeros(self.num_arms, dtype=bool)
        probe_ahead = 0.0
        keep_ahead = 0.0
        for i in order:
            c = float(cand[i])
            if not srch.settled[i]:
                if c <= self.capacity - probe_ahead:
                    grant[i] = True
                probe_ahead += c
            else:
                if c <= self.capacity - unsettled_total - keep_ahead:
                    grant[i] = True
                keep_ahead += c
        return grant, cand

    def _bit(self, value: float) -> float:
        if not self._continuous:
            return value
        return float(self._bin_rng.random() < value)

    def _bits(self, observed: np.ndarray) -> np.ndarray:
        if not self._continuous:
            return observed
        return (self._bin_rng.random(observed.shape[0]) < observed).astype(float)
