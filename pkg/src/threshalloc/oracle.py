"""Exact packing oracle and offline analysis helpers.

The packer solves the 0-1 problem "pick a set of arms whose thresholds fit
the capacity, maximizing total mean reward" by depth-first branch and bound
with a fractional-relaxation bound. Ties are broken by smaller total weight,
then by lexicographically smallest index set, so results are deterministic.

All totals are accumulated left to right in ascending arm order. Comparisons
between totals computed anywhere in the package are then bit-for-bit
reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .domain import feasibility_slack, VALUE_TOL

__all__ = [
    "EquivalentSameThreshold",
    "KnapsackSolution",
    "allocation_equivalent_same",
    "canonical_sum",
    "kl_bernoulli",
    "lower_bound_constant",
    "max_gap",
    "max_packable_arms",
    "min_optimal_arm_count",
    "solve_knapsack",
    "suboptimality_gap",
    "verify_allocation_equivalent",
    "zero_streak_limit_per_arm",
    "zero_streak_limit_shared",
]


def canonical_sum(values, indices) -> float:
    """Left-to-right sum of values[i] over the given indices, in the order
    given. Callers pass ascending arm indices to get the canonical total."""
    total = 0.0
    for i in indices:
        total += float(values[i])
    return total


# ---------------------------------------------------------------------------
# exact 0-1 packing
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class KnapsackSolution:
    """An optimal packing: chosen arms, its totals, and the slack per arm."""

    selected: tuple[int, ...]
    total_value: float
    total_weight: float
    leftover: float
    gamma_star: float


def solve_knapsack(values, weights, capacity: float) -> KnapsackSolution:
    """Maximize total value subject to total weight <= capacity.

    Feasibility admits the same slack as allocations (see
    ``feasibility_slack``): equal-split weight vectors sum to the capacity
    only up to rounding, and must not be rejected for it. Ties on value are
    broken toward smaller total weight, then the lexicographically smallest
    selected index tuple.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    if v.ndim != 1 or w.ndim != 1 or v.shape != w.shape:
        raise ValueError("values and weights must be 1-D vectors of equal length")
    if not (np.all(np.isfinite(v)) and np.all(np.isfinite(w))):
        raise ValueError("values and weights must be finite")
    cap = float(capacity)
    if not math.isfinite(cap) or cap < 0.0:
        raise ValueError("capacity must be finite and non-negative")
    if w.size and w.min() < 0.0:
        raise ValueError("weights must be non-negative")

    budget = cap + feasibility_slack(cap)
    num = int(v.shape[0])

    # Free positive items always help; worthless items never do.
    forced = [i for i in range(num) if w[i] <= 0.0 and v[i] > 0.0]
    cands = [i for i in range(num) if w[i] > 0.0 and v[i] > 0.0]
    order = sorted(cands, key=lambda i: (-(v[i] / w[i]), i))
    n = len(order)
    vv = np.array([v[i] for i in order], dtype=float)
    ww = np.array([w[i] for i in order], dtype=float)
    cw = np.zeros(n + 1)
    cv = np.zeros(n + 1)
    if n:
        np.cumsum(ww, out=cw[1:])
        np.cumsum(vv, out=cv[1:])

    gate_eps = 1e-12 * max(1.0, cap)

    best_sel: tuple[int, ...] = tuple(sorted(forced))
    forced_value = canonical_sum(v, best_sel)
    best_value = forced_value
    best_weight = canonical_sum(w, best_sel)

    chosen: list[int] = []

    def consider_leaf() -> None:
        nonlocal best_sel, best_value, best_weight
        sel = sorted(forced + [order[p] for p in chosen])
        weight = canonical_sum(w, sel)
        if weight > budget:
            return
        value = canonical_sum(v, sel)
        if value < best_value:
            return
        tup = tuple(sel)
        if value > best_value or weight < best_weight or (
            weight == best_weight and tup < best_sel
        ):
            best_sel, best_value, best_weight = tup, value, weight

    def bound(k: int, acc: float, rem: float) -> float:
        # Greedy fractional fill of positions k..n-1 into rem capacity.
        limit = cw[k] + rem
        m = int(np.searchsorted(cw, limit, side="right")) - 1
        m = max(k, min(m, n))
        b = acc + (cv[m] - cv[k])
        if m < n:
            b += max(0.0, limit - cw[m]) / ww[m] * vv[m]
        return b

    def dfs(k: int, acc: float, rem: float) -> None:
        if k == n:
            consider_leaf()
            return
        if bound(k, acc, rem) < best_value - VALUE_TOL * max(1.0, abs(best_value)):
            return
        if ww[k] <= rem + gate_eps:
            chosen.append(k)
            dfs(k + 1, acc + vv[k], rem - ww[k])
            chosen.pop()
        dfs(k + 1, acc, rem)

    # Every leaf includes the forced items, so the running value used by the
    # bound must start from their total or the root gets pruned against an
    # incumbent that already counts them.
    dfs(0, forced_value, budget)

    leftover = max(0.0, cap - best_weight)
    return KnapsackSolution(
        selected=best_sel,
        total_value=best_value,
        total_weight=best_weight,
        leftover=leftover,
        gamma_star=leftover / num if num else 0.0,
    )


# ---------------------------------------------------------------------------
# same-threshold equivalence
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class EquivalentSameThreshold:
    """Equal-split substitute for a shared threshold.

    ``m_arms`` arms can be served at level ``theta_hat`` = C / m_arms
    without losing optimal value relative to the true shared threshold.
    ``theta_set`` is the full ascending ladder of equal-split levels
    C/K, C/(K-1), ..., C; ``theta_hat`` is one of its entries.
    """

    m_arms: int
    theta_hat: float
    theta_set: tuple[float, ...]


def allocation_equivalent_same(
    theta_s: float, capacity: float, num_arms: int
) -> EquivalentSameThreshold:
    """Largest equal split that still clears a shared threshold theta_s.

    m = min(floor(C / theta_s), K); serving m arms at C/m is
    value-equivalent to serving them at theta_s, and C/m >= theta_s
    whenever floor(C / theta_s) < K.
    """
    if num_arms < 1:
        raise ValueError("num_arms must be at least 1")
    cap = float(capacity)
    ths = float(theta_s)
    if not (0.0 < ths <= cap):
        raise ValueError("theta_s must lie in (0, capacity]")
    ratio = cap / ths
    # Forgive quotients sitting a hair below an integer.
    m = min(num_arms, int(math.floor(ratio + 1e-9 * max(1.0, ratio))))
    theta_set = tuple(cap / (num_arms - j) for j in range(num_arms))
    return EquivalentSameThreshold(m_arms=m, theta_hat=cap / m, theta_set=theta_set)


def verify_allocation_equivalent(
    mean_rewards, thresholds_a, thresholds_b, capacity: float
) -> bool:
    """True when two threshold vectors admit the same optimal value."""
    va = solve_knapsack(mean_rewards, thresholds_a, capacity).total_value
    vb = solve_knapsack(mean_rewards, thresholds_b, capacity).total_value
    return abs(va - vb) <= VALUE_TOL


# ---------------------------------------------------------------------------
# regret decomposition helpers
# ---------------------------------------------------------------------------


def suboptimality_gap(mean_rewards, thresholds, capacity: float, amounts) -> float:
    """Expected per-round regret of one allocation against the optimum."""
    x = np.asarray(getattr(amounts, "amounts", amounts), dtype=float)
    th = np.asarray(thresholds, dtype=float)
    if x.shape != th.shape:
        raise ValueError("allocation length does not match the thresholds")
    opt = solve_knapsack(mean_rewards, thresholds, capacity).total_value
    active = [i for i in range(x.shape[0]) if x[i] >= th[i]]
    return opt - canonical_sum(mean_rewards, active)


def max_gap(mean_rewards, thresholds, capacity: float) -> float:
    """Worst-case per-round regret: optimum minus what free arms grant."""
    th = np.asarray(thresholds, dtype=float)
    opt = solve_knapsack(mean_rewards, thresholds, capacity).total_value
    free = [i for i in range(th.shape[0]) if th[i] == 0.0]
    return opt - canonical_sum(mean_rewards, free)


# ---------------------------------------------------------------------------
# information-theoretic quantities
# ---------------------------------------------------------------------------


def kl_bernoulli(p: float, q: float) -> float:
    """KL divergence between Bernoulli(p) and Bernoulli(q)."""
    if not 0.0 <= p <= 1.0:
        raise ValueError("p must lie in [0, 1]")
    if not 0.0 <= q <= 1.0:
        raise ValueError("q must lie in [0, 1]")
    if p == q:
        return 0.0
    if q <= 0.0 or q >= 1.0:
        raise ValueError("kl_bernoulli diverges for q in {0, 1} with p != q")
    total = 0.0
    if p > 0.0:
        total += p * math.log(p / q)
    if p < 1.0:
        total += (1.0 - p) * math.log((1.0 - p) / (1.0 - q))
    return total


def lower_bound_constant(mean_rewards, m_arms: int) -> float:
    """Coefficient of ln T in the asymptotic regret floor for the
    equal-split setting where the top m_arms arms are served.

    Sorts means descending internally; requires a strict gap between the
    m-th and (m+1)-th largest means.
    """
    mu = np.sort(np.asarray(mean_rewards, dtype=float))[::-1]
    num = int(mu.shape[0])
    if not 1 <= m_arms <= num:
        raise ValueError("m_arms must lie in [1, num_arms]")
    if m_arms == num:
        return 0.0
    pivot = float(mu[m_arms - 1])
    if float(mu[m_arms]) == pivot:
        raise ValueError("means must have a strict gap at the m-th arm")
    total = 0.0
    for i in range(m_arms, num):
        mi = float(mu[i])
        total += (pivot - mi) / kl_bernoulli(mi, pivot)
    return total


# ---------------------------------------------------------------------------
# search-phase sizing
# ---------------------------------------------------------------------------


def zero_streak_limit_shared(num_arms: int, delta: float, epsilon: float) -> int:
    """Rounds of all-zero feedback needed before the shared-threshold search
    concludes the current level is too low, for failure rate delta."""
    if num_arms < 2:
        raise ValueError("num_arms must be at least 2")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    raw = math.log(math.log2(num_arms) / delta) / math.log(1.0 / (1.0 - epsilon))
    return math.ceil(raw)


def zero_streak_limit_per_arm(
    num_arms: int, capacity: float, gamma: float, delta: float, epsilon: float
) -> int:
    """Zero-streak length for the per-arm bisection, for failure rate delta
    across all arms and all gamma-resolution search levels."""
    if num_arms < 1:
        raise ValueError("num_arms must be at least 1")
    if not capacity > 0.0:
        raise ValueError("capacity must be positive")
    if not gamma > 0.0:
        raise ValueError("gamma must be positive")
    if not 0.0 < delta < 1.0:
        raise ValueError("delta must lie in (0, 1)")
    if not 0.0 < epsilon < 1.0:
        raise ValueError("epsilon must lie in (0, 1)")
    grid = math.ceil(1.0 + capacity / gamma)
    raw = math.log(num_arms * math.log2(grid) / delta) / math.log(1.0 / (1.0 - epsilon))
    return math.ceil(raw)


# ---------------------------------------------------------------------------
# packing diagnostics
# ---------------------------------------------------------------------------


def max_packable_arms(thresholds, capacity: float) -> int:
    """Largest number of arms that fit the capacity simultaneously."""
    th = np.sort(np.asarray(thresholds, dtype=float))
    if th.size and th[0] < 0.0:
        raise ValueError("thresholds must be non-negative")
    cap = float(capacity)
    budget = cap + feasibility_slack(cap)
    total = 0.0
    count = 0
    for t in th:
        total += float(t)
        if total > budget:
            break
        count += 1
    return count


def min_optimal_arm_count(mean_rewards, thresholds, capacity: float) -> int:
    """Smallest cardinality among optimal-value packings (enumeration).

    Restricted to 20 arms or fewer; the subset count doubles per arm.
    """
    v = np.asarray(mean_rewards, dtype=float)
    w = np.asarray(thresholds, dtype=float)
    if v.shape != w.shape or v.ndim != 1:
        raise ValueError("means and thresholds must be 1-D vectors of equal length")
    num = int(v.shape[0])
    if num > 20:
        raise ValueError("min_optimal_arm_count enumerates subsets; limited to 20 arms")
    cap = float(capacity)
    budget = cap + feasibility_slack(cap)
    # Doubling construction adds items in ascending index order, so every
    # subset total is the canonical left-to-right sum.
    vals = np.zeros(1)
    wts = np.zeros(1)
    for i in range(num):
        vals = np.concatenate([vals, vals + v[i]])
        wts = np.concatenate([wts, wts + w[i]])
    feas = wts <= budget
    opt = vals[feas].max(initial=0.0)
    masks = np.arange(vals.shape[0], dtype=np.uint32)
    hit = feas & (vals == opt)
    return int(np.bitwise_count(masks[hit]).min())
