import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mcnd_bounds.knapsack import alpha_coefficients, min_knapsack, min_knapsack_bisect, packing_alphas
from oracles import brute_alpha, weight_dp_knapsack


def test_alpha_example_values():
    assert alpha_coefficients([(1, 60), (2, 70)], 100, 2) == [1, 2]
    assert alpha_coefficients([(1, 30), (2, 30), (3, 30), (4, 60)], 100, 2) == [3, 4]


def test_alpha_counts_commodity_once():
    assert alpha_coefficients([(1, 60), (1, 60), (2, 70)], 100, 2) == [1, 2]


def test_alpha_rejects_empty_selection():
    with pytest.raises(ValueError):
        alpha_coefficients([], 100, 2)


def test_alpha_matches_brute_force_on_random_inputs():
    rng = np.random.default_rng(11)
    for _ in range(500):
        n = int(rng.integers(1, 9))
        demands = rng.integers(1, 120, n).tolist()
        q = int(rng.integers(30, 200))
        t_max = int(rng.integers(1, 5))
        got = alpha_coefficients(list(enumerate(demands)), q, t_max)
        assert got == brute_alpha(demands, q, t_max)


@given(st.lists(st.integers(1, 500), min_size=1, max_size=12), st.integers(1, 600), st.integers(1, 6))
def test_alpha_monotone_and_bounded(demands, q, t_max):
    a = alpha_coefficients(list(enumerate(demands)), q, t_max)
    assert all(x <= y for x, y in zip(a, a[1:]))
    assert all(0 <= x <= len(demands) for x in a)


def test_min_knapsack_reaches_target_with_least_weight():
    w, chosen = min_knapsack([3, 2, 2], [5, 3, 3], 4)
    assert w == 6 and sorted(chosen) == [1, 2]
    assert min_knapsack([1, 1], [4, 4], 3)[0] == float("inf")


def test_bisection_matches_weight_dp_on_random_knapsacks():
    rng = np.random.default_rng(5)
    for _ in range(200):
        n = int(rng.integers(0, 11))
        profits = rng.integers(0, 6, n).tolist()
        weights = rng.integers(1, 80, n).tolist()
        cap = int(rng.integers(0, 250))
        opt, chosen = min_knapsack_bisect(profits, weights, cap)
        assert opt == weight_dp_knapsack(profits, weights, cap)
        assert sum(weights[j] for j in chosen) <= cap
        assert sum(profits[j] for j in chosen) == opt


def test_bisection_bracket_shrinks_and_terminates():
    trace = []
    opt, _ = min_knapsack_bisect([1, 2, 3, 4, 5], [10, 20, 30, 40, 50], 70, trace)
    assert opt == 7
    widths = [ub - lb for lb, ub in trace]
    assert widths == sorted(widths, reverse=True) and widths[-1] == 1


def test_bisection_rejects_negative_profit():
    with pytest.raises(ValueError):
        min_knapsack_bisect([-1], [1], 5)


@settings(max_examples=60)
@given(st.lists(st.tuples(st.integers(0, 3), st.integers(1, 60)), max_size=8), st.integers(20, 150))
def test_weighted_packing_is_non_decreasing(items, q):
    profits = [p for p, _ in items]
    demands = [d for _, d in items]
    a = packing_alphas(profits, demands, q, 4)
    assert all(x <= y for x, y in zip(a, a[1:]))
    assert a[-1] <= sum(profits)
