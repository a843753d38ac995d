import math

import numpy as np
import pytest

from threshalloc import (
    allocation_equivalent_same,
    builtin_instance,
    kl_bernoulli,
    lower_bound_constant,
    max_gap,
    max_packable_arms,
    min_optimal_arm_count,
    solve_knapsack,
    suboptimality_gap,
    verify_allocation_equivalent,
    zero_streak_limit_per_arm,
    zero_streak_limit_shared,
)

INST2 = builtin_instance(2).instance
INST3 = builtin_instance(3).instance


def enumerate_best(values, weights, capacity):
    """Exhaustive reference packer, independent of the library routines.

    Subset totals come from the doubling construction, which adds items in
    ascending index order, so they match left-to-right summation bit for
    bit. Same feasibility slack and tie-breaks as the solver under test.
    """
    v = np.asarray(values, dtype=float)
    w = np.asarray(weights, dtype=float)
    budget = capacity + 1e-9 * max(1.0, capacity)
    # worthless arms are never part of a solution
    idx = [i for i in range(v.shape[0]) if v[i] > 0.0]
    vals = np.zeros(1)
    wts = np.zeros(1)
    for i in idx:
        vals = np.concatenate([vals, vals + v[i]])
        wts = np.concatenate([wts, wts + w[i]])
    feasible = wts <= budget
    best_value = vals[feasible].max()
    hits = np.flatnonzero(feasible & (vals == best_value))
    best_weight = wts[hits].min()
    hits = hits[wts[hits] == best_weight]
    sets = [
        tuple(idx[j] for j in range(len(idx)) if (int(m) >> j) & 1)
        for m in hits
    ]
    return min(sets), float(best_value), float(best_weight)


class TestSolveKnapsack:
    def test_benchmark_instance_two(self):
        sol = solve_knapsack(INST2.mean_rewards, INST2.thresholds, INST2.capacity)
        assert sol.selected == (0, 1, 3)
        assert sol.total_value == 2.39
        assert sol.total_weight == 2.0
        assert sol.leftover == 0.0
        assert sol.gamma_star == 0.0

    def test_benchmark_instance_three(self):
        sol = solve_knapsack(INST3.mean_rewards, INST3.thresholds, INST3.capacity)
        assert sol.selected == (0, 1, 2, 3, 4, 5, 7, 8)
        assert sol.total_value == 4.42
        assert sol.total_weight == 3.0
        assert sol.leftover == 0.0
        assert sol.gamma_star == 0.0

    def test_three_arm_example(self):
        sol = solve_knapsack((0.9, 0.6, 0.4), (0.6, 0.55, 0.45), 1.0)
        assert sol.selected == (1, 2)
        assert sol.total_value == 1.0

    def test_zero_capacity(self):
        sol = solve_knapsack((0.9, 0.6), (0.5, 0.5), 0.0)
        assert sol.selected == ()
        assert sol.total_value == 0.0
        assert sol.leftover == 0.0

    def test_free_items_always_selected(self):
        sol = solve_knapsack((0.3, 0.4), (0.0, 1.0), 0.0)
        assert sol.selected == (0,)
        assert sol.total_value == 0.3

    def test_worthless_items_never_selected(self):
        sol = solve_knapsack((0.0, 1.0), (0.0, 1.0), 2.0)
        assert sol.selected == (1,)
        sol = solve_knapsack((0.0, 0.0), (0.3, 0.3), 2.0)
        assert sol.selected == ()
        assert sol.leftover == 2.0
        assert sol.gamma_star == 1.0

    def test_value_tie_prefers_lighter_set(self):
        sol = solve_knapsack((1.0, 1.0), (2.0, 1.0), 2.0)
        assert sol.selected == (1,)
        assert sol.total_weight == 1.0

    def test_full_tie_prefers_lexicographic_set(self):
        sol = solve_knapsack((0.5, 0.5), (1.0, 1.0), 1.0)
        assert sol.selected == (0,)

    def test_gamma_star_is_leftover_per_arm(self):
        sol = solve_knapsack((0.9, 0.1), (0.5, 2.0), 1.5)
        assert sol.selected == (0,)
        assert sol.leftover == 1.0
        assert sol.gamma_star == 0.5

    def test_input_validation(self):
        with pytest.raises(ValueError, match="equal length"):
            solve_knapsack((0.5,), (0.5, 0.5), 1.0)
        with pytest.raises(ValueError, match="non-negative"):
            solve_knapsack((0.5,), (0.5,), -1.0)
        with pytest.raises(ValueError, match="non-negative"):
            solve_knapsack((0.5,), (-0.5,), 1.0)
        with pytest.raises(ValueError, match="finite"):
            solve_knapsack((float("inf"),), (0.5,), 1.0)

    def test_matches_enumeration_on_random_instances(self):
        rng = np.random.default_rng(7)
        for _ in range(300):
            k = int(rng.integers(2, 13))
            w = rng.uniform(0.05, 1.0, size=k)
            v = rng.uniform(0.0, 1.0, size=k)
            cap = float(rng.uniform(0.2, 1.1) * w.sum())
            sol = solve_knapsack(v, w, cap)
            sel, value, weight = enumerate_best(v, w, cap)
            assert sol.total_value == value
            assert sol.total_weight == weight
            assert sol.selected == sel

    def test_matches_enumeration_with_ties_and_zeros(self):
        rng = np.random.default_rng(11)
        for _ in range(200):
            k = int(rng.integers(2, 9))
            # Coarse grids force exact value and weight ties.
            w = rng.integers(0, 4, size=k) / 4.0
            v = rng.integers(0, 4, size=k) / 4.0
            cap = float(rng.integers(0, 2 * k)) / 4.0
            sol = solve_knapsack(v, w, cap)
            sel, value, weight = enumerate_best(v, w, cap)
            assert sol.total_value == value
            assert sol.total_weight == weight
            assert sol.selected == sel


class TestAllocationEquivalentSame:
    def test_benchmark_instance_one(self):
        eq = allocation_equivalent_same(0.7, 20.0, 50)
        assert eq.m_arms == 28
        assert eq.theta_hat == 20.0 / 28.0
        assert len(eq.theta_set) == 50
        assert eq.theta_set[22] == eq.theta_hat  # 1-based position 23

    def test_ladder_structure(self):
        eq = allocation_equivalent_same(1.0, 6.0, 4)
        assert eq.theta_set == (6 / 4, 6 / 3, 6 / 2, 6 / 1)
        assert all(a < b for a, b in zip(eq.theta_set, eq.theta_set[1:]))

    def test_cap_at_num_arms(self):
        eq = allocation_equivalent_same(0.1, 10.0, 5)
        assert eq.m_arms == 5
        assert eq.theta_hat == 2.0

    def test_exact_divisor(self):
        eq = allocation_equivalent_same(0.5, 2.0, 10)
        assert eq.m_arms == 4
        assert eq.theta_hat == 0.5

    def test_substitute_never_undershoots_when_below_cap(self):
        rng = np.random.default_rng(3)
        for _ in range(300):
            k = int(rng.integers(1, 40))
            cap = float(rng.uniform(0.5, 20.0))
            theta = float(rng.uniform(0.01, 1.0) * cap)
            eq = allocation_equivalent_same(theta, cap, k)
            if math.floor(cap / theta) < k:
                assert eq.theta_hat >= theta - 1e-12 * max(1.0, cap)

    def test_bounds_checked(self):
        with pytest.raises(ValueError, match="theta_s"):
            allocation_equivalent_same(0.0, 1.0, 3)
        with pytest.raises(ValueError, match="theta_s"):
            allocation_equivalent_same(1.5, 1.0, 3)
        with pytest.raises(ValueError, match="num_arms"):
            allocation_equivalent_same(0.5, 1.0, 0)

    def test_value_equivalence_on_random_instances(self):
        rng = np.random.default_rng(17)
        for _ in range(300):
            k = int(rng.integers(2, 25))
            cap = float(rng.uniform(0.5, 10.0))
            theta = float(rng.uniform(0.02, 1.0) * cap)
            mu = rng.uniform(0.0, 1.0, size=k)
            eq = allocation_equivalent_same(theta, cap, k)
            assert verify_allocation_equivalent(
                mu, np.full(k, theta), np.full(k, eq.theta_hat), cap
            )


class TestMarginPerturbation:
    def test_estimates_within_margin_keep_the_optimum(self):
        rng = np.random.default_rng(23)
        done = 0
        while done < 200:
            k = int(rng.integers(2, 10))
            theta = rng.uniform(0.05, 1.0, size=k)
            mu = rng.uniform(0.0, 1.0, size=k)
            cap = float(rng.uniform(0.45, 0.95) * theta.sum())
            if cap < theta.min():
                continue
            base = solve_knapsack(mu, theta, cap)
            g = base.gamma_star
            if g <= 1e-9 or cap < g + theta.min():
                continue
            # extreme point of the margin box
            assert verify_allocation_equivalent(mu, theta, theta + g, cap)
            # interior points
            for _ in range(3):
                est = theta + rng.uniform(0.0, g, size=k)
                assert verify_allocation_equivalent(mu, theta, est, cap)
            done += 1


class TestGaps:
    def test_gap_zero_at_optimum(self):
        sol = solve_knapsack(INST2.mean_rewards, INST2.thresholds, INST2.capacity)
        x = np.zeros(5)
        for i in sol.selected:
            x[i] = INST2.thresholds[i]
        assert suboptimality_gap(INST2.mean_rewards, INST2.thresholds, INST2.capacity, x) == 0.0

    def test_gap_nonnegative_on_random_allocations(self):
        rng = np.random.default_rng(5)
        th = INST3.threshold_vector()
        for _ in range(200):
            x = rng.uniform(0.0, 1.0, size=10)
            x *= min(1.0, INST3.capacity / x.sum())
            assert suboptimality_gap(INST3.mean_rewards, INST3.thresholds, INST3.capacity, x) >= 0.0

    def test_gap_of_empty_allocation_is_max_gap(self):
        zero = np.zeros(5)
        gap = suboptimality_gap(INST2.mean_rewards, INST2.thresholds, INST2.capacity, zero)
        assert gap == max_gap(INST2.mean_rewards, INST2.thresholds, INST2.capacity) == 2.39

    def test_max_gap_discounts_free_arms(self):
        assert max_gap((0.4, 0.5), (0.0, 1.0), 1.0) == (0.4 + 0.5) - 0.4

    def test_dimension_check(self):
        with pytest.raises(ValueError, match="length"):
            suboptimality_gap((0.5, 0.5), (0.3, 0.3), 1.0, np.zeros(3))


class TestKlBernoulli:
    def test_reference_points(self):
        assert kl_bernoulli(0.5, 0.25) == 0.14384103622589042
        assert kl_bernoulli(0.0, 0.5) == math.log(2.0)

    def test_zero_iff_equal(self):
        assert kl_bernoulli(0.3, 0.3) == 0.0
        assert kl_bernoulli(0.0, 0.0) == 0.0
        assert kl_bernoulli(1.0, 1.0) == 0.0
        assert kl_bernoulli(0.3, 0.31) > 0.0

    def test_divergent_edges_rejected(self):
        with pytest.raises(ValueError, match="diverges"):
            kl_bernoulli(0.5, 0.0)
        with pytest.raises(ValueError, match="diverges"):
            kl_bernoulli(0.5, 1.0)

    def test_domain_checked(self):
        with pytest.raises(ValueError, match="p must"):
            kl_bernoulli(1.5, 0.5)
        with pytest.raises(ValueError, match="q must"):
            kl_bernoulli(0.5, -0.1)


class TestLowerBoundConstant:
    def test_two_arm_example(self):
        assert lower_bound_constant((0.9, 0.5), 1) == 0.783046075588487

    def test_benchmark_instance_one(self):
        mu = builtin_instance(1).instance.mean_rewards
        assert lower_bound_constant(mu, 28) == 182.1091235033844

    def test_sorts_internally(self):
        assert lower_bound_constant((0.5, 0.9), 1) == lower_bound_constant((0.9, 0.5), 1)

    def test_all_arms_served_is_zero(self):
        assert lower_bound_constant((0.9, 0.5), 2) == 0.0

    def test_no_gap_rejected(self):
        with pytest.raises(ValueError, match="gap"):
            lower_bound_constant((0.5, 0.5, 0.2), 1)

    def test_m_range_checked(self):
        with pytest.raises(ValueError, match="m_arms"):
            lower_bound_constant((0.5, 0.4), 0)
        with pytest.raises(ValueError, match="m_arms"):
            lower_bound_constant((0.5, 0.4), 3)


class TestZeroStreakLimits:
    def test_shared_reference_values(self):
        assert zero_streak_limit_shared(50, 0.1, 0.1) == 39
        assert zero_streak_limit_shared(2, 0.1, 0.1) == 22
        assert zero_streak_limit_shared(50, 0.1, 0.999) == 1

    def test_per_arm_reference_values(self):
        assert zero_streak_limit_per_arm(5, 2.0, 1e-3, 0.1, 0.1) == 60
        assert zero_streak_limit_per_arm(10, 3.0, 1e-3, 0.1, 0.1) == 67

    def test_monotone_in_confidence(self):
        assert zero_streak_limit_shared(50, 0.01, 0.1) > zero_streak_limit_shared(50, 0.1, 0.1)
        assert zero_streak_limit_per_arm(5, 2.0, 1e-4, 0.1, 0.1) >= zero_streak_limit_per_arm(
            5, 2.0, 1e-3, 0.1, 0.1
        )

    def test_validation(self):
        with pytest.raises(ValueError, match="at least 2"):
            zero_streak_limit_shared(1, 0.1, 0.1)
        with pytest.raises(ValueError, match="epsilon"):
            zero_streak_limit_shared(5, 0.1, 0.0)
        with pytest.raises(ValueError, match="epsilon"):
            zero_streak_limit_shared(5, 0.1, 1.0)
        with pytest.raises(ValueError, match="delta"):
            zero_streak_limit_shared(5, 0.0, 0.1)
        with pytest.raises(ValueError, match="gamma"):
            zero_streak_limit_per_arm(5, 2.0, 0.0, 0.1, 0.1)
        with pytest.raises(ValueError, match="capacity"):
            zero_streak_limit_per_arm(5, 0.0, 1e-3, 0.1, 0.1)


class TestPackingDiagnostics:
    def test_max_packable(self):
        assert max_packable_arms(INST2.thresholds, INST2.capacity) == 3
        assert max_packable_arms(INST3.thresholds, INST3.capacity) == 8
        assert max_packable_arms((0.7,) * 50, 20.0) == 28
        assert max_packable_arms((0.5, 0.5), 0.0) == 0

    def test_min_optimal_arm_count(self):
        assert min_optimal_arm_count(INST2.mean_rewards, INST2.thresholds, INST2.capacity) == 3
        assert min_optimal_arm_count(INST3.mean_rewards, INST3.thresholds, INST3.capacity) == 8
        # a free arm with zero value is not needed for the optimum
        assert min_optimal_arm_count((0.0, 0.9), (0.0, 0.5), 1.0) == 1

    def test_min_optimal_arm_count_size_limit(self):
        with pytest.raises(ValueError, match="20"):
            min_optimal_arm_count(np.ones(21) * 0.5, np.ones(21) * 0.5, 3.0)
