"""Learner for instances whose arms share one activation threshold.

The policy binary-searches the ascending ladder of equal-split levels
C/K, C/(K-1), ..., C for the lowest level that still clears the shared
threshold, while Thompson sampling picks which arms to serve at the level
under test. Reward on any served arm proves the level is high enough (move
down); a long enough streak of all-zero rounds condemns it (move up). Once
the search interval collapses, the policy is plain multi-play Thompson
sampling at the settled level.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import Allocation, BetaPosterior, RoundFeedback
from .oracle import zero_streak_limit_shared

__all__ = ["SameThresholdPolicy", "SearchState"]


@dataclass
class SearchState:
    """Binary-search bookkeeping over the equal-split ladder.

    Positions are 1-based; position j means level C/(K-j+1), i.e. K-j+1
    arms served. ``lower`` is an excluded floor (0 before any upward move),
    ``upper`` the inclusive ceiling, ``current`` the level under test.
    ``zero_streak`` holds per-arm zero observations not yet attributed to
    the posterior; ``zero_rounds`` counts the all-zero streak at the
    current level and ``limit`` is the streak length that forces an upward
    move.
    """

    levels: tuple[float, ...]
    lower: int
    upper: int
    current: int
    zero_rounds: int
    zero_streak: np.ndarray
    limit: int


class SameThresholdPolicy:
    """Joint level search and Thompson arm selection.

    With ``continuous_rewards`` the zero-streak limit is 1 (any positive
    observation is proof, any zero at an active level is impossible when
    reward supports stay above 0) and posterior updates use rewards
    binarized through ``binarize_rng``.

    ``known_threshold`` skips the search: the policy starts converged at
    the matching ladder level, which must equal C/m for some m <= K. The
    baselines build on this; the post-convergence code path is shared.
    """

    def __init__(
        self,
        num_arms: int,
        capacity: float,
        delta: float | None,
        epsilon: float | None,
        rng: np.random.Generator,
        *,
        continuous_rewards: bool = False,
        binarize_rng: np.random.Generator | None = None,
        known_threshold: float | None = None,
    ) -> None:
        if num_arms < 2:
            raise ValueError("the shared-threshold learner needs at least 2 arms")
        if not capacity > 0.0:
            raise ValueError("capacity must be positive")
        self.num_arms = int(num_arms)
        self.capacity = float(capacity)
        self._rng = rng
        self._continuous = bool(continuous_rewards)
        self._bin_rng = binarize_rng
        if self._continuous and self._bin_rng is None:
            raise ValueError("continuous rewards need a binarize_rng stream")

        levels = tuple(self.capacity / (self.num_arms - j) for j in range(self.num_arms))
        if known_threshold is None:
            if delta is None or epsilon is None:
                raise ValueError("delta and epsilon are required when searching")
            limit = 1 if self._continuous else zero_streak_limit_shared(num_arms, delta, epsilon)
            lower, upper = 0, self.num_arms
            current = math.ceil(upper / 2)
            self.convergence_round: int | None = None
        else:
            tol = 1e-12 * max(1.0, self.capacity)
            hits = [j for j, lv in enumerate(levels, start=1) if abs(lv - known_threshold) <= tol]
            if not hits:
                raise ValueError("known_threshold must be an equal split C/m of the capacity")
            lower = upper = current = hits[0]
            limit = 0
            self.convergence_round = 0
        self.search = SearchState(
            levels=levels,
            lower=lower,
            upper=upper,
            current=current,
            zero_rounds=0,
            zero_streak=np.zeros(self.num_arms),
            limit=limit,
        )
        self.posterior = BetaPosterior.fresh(self.num_arms)
        self._round = 0
        self._pending: np.ndarray | None = None

    # ------------------------------------------------------------------ api

    @property
    def converged(self) -> bool:
        return self.search.current == self.search.upper

    def theta_hat(self) -> float:
        """The equal-split level currently under test (final once converged)."""
        return self.search.levels[self.search.current - 1]

    def select(self) -> Allocation:
        if self._pending is not None:
            raise RuntimeError("update must follow each select")
        s = self.search
        level = s.levels[s.current - 1]
        count = self.num_arms - s.current + 1
        samples = self.posterior.sample(self._rng)
        ranked = np.argsort(-samples, kind="stable")  # ties fall to the smaller index
        chosen = np.sort(ranked[:count])
        x = np.zeros(self.num_arms)
        x[chosen] = level
        self._pending = chosen
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
        chosen = self._pending
        self._pending = None
        s = self.search
        post = self.posterior
        obs = feedback.observed[chosen]

        if s.current == s.upper:
            bits = self._bits(obs)
            post.successes[chosen] += bits
            post.failures[chosen] += 1.0 - bits
            return

        if np.any(obs > 0.0):
            # The level cleared some threshold; search the lower half.
            bits = self._bits(obs)
            s.upper = s.current
            s.current = s.upper - (s.upper - s.lower) // 2
            s.zero_rounds = 0
            post.successes[chosen] += bits
            post.failures[chosen] += (1.0 - bits) + s.zero_streak[chosen]
            rest = np.ones(self.num_arms, dtype=bool)
            rest[chosen] = False
            post.failures[rest] += s.zero_streak[rest]
            s.zero_streak[:] = 0.0
        else:
            s.zero_rounds += 1
            s.zero_streak[chosen] += 1.0
            if s.zero_rounds >= s.limit:
                # A full zero streak: the level is below the threshold.
                # Pending zero counts are discarded, not attributed.
                s.lower = s.current
                s.current = s.lower + (s.upper - s.lower + 1) // 2
                s.zero_rounds = 0
                s.zero_streak[:] = 0.0
        if self.convergence_round is None and s.current == s.upper:
            self.convergence_round = self._round

    # ------------------------------------------------------------- internals

    def _bits(self, observed: np.ndarray) -> np.ndarray:
        if not self._continuous:
            return observed  # Bernoulli observations are already 0/1
        return (self._bin_rng.random(observed.shape[0]) < observed).astype(float)
