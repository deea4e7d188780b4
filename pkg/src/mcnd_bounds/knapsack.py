"""Packing counts and the profit-indexed knapsack used by the cut separators."""

from __future__ import annotations

import math
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "alpha_coefficients",
    "packing_alphas",
    "min_knapsack",
    "min_knapsack_bisect",
]


def alpha_coefficients(selected: Iterable[tuple[int, int]], q: int, t_max: int) -> list[int]:
    """Right-hand side coefficients of a SAC-Pack cut.

    ``selected`` holds ``(commodity id, demand)`` pairs for the paths in the
    cut; a commodity listed more than once counts once. ``alpha[t-1]`` is the
    largest number of selected commodities that fit into ``t * q`` units,
    found by packing demands in non-decreasing order.
    """
    demands: dict[int, int] = {}
    for k, d in selected:
        demands[k] = d
    if not demands:
        raise ValueError("empty selection: a packing cut needs at least one commodity")
    ordered = sorted(demands.values())
    prefix = np.cumsum(ordered)
    return [int(np.searchsorted(prefix, t * q, side="right")) for t in range(1, t_max + 1)]


def min_knapsack(profits: Sequence[int], weights: Sequence[int], target: int):
    """Smallest total weight of a subset with profit at least ``target``.

    Returns ``(weight, chosen)``; ``weight`` is ``inf`` when even the full set
    falls short. Runs in ``O(n * target)``.
    """
    n = len(profits)
    if target <= 0:
        return 0, []
    dp = np.full(target + 1, np.inf)
    dp[0] = 0.0
    take = np.zeros((n, target + 1), dtype=bool)
    grid = np.arange(target + 1)
    for j in range(n):
        src = np.maximum(grid - int(profits[j]), 0)
        cand = dp[src] + weights[j]
        better = cand < dp
        take[j] = better
        dp = np.where(better, cand, dp)
    if not math.isfinite(dp[target]):
        return math.inf, []
    chosen = []
    g = target
    for j in range(n - 1, -1, -1):
        if take[j, g]:
            chosen.append(j)
            g = max(g - int(profits[j]), 0)
    chosen.reverse()
    return float(dp[target]), chosen


def min_knapsack_bisect(profits: Sequence[int], weights: Sequence[int], capacity: int,
                        trace: list | None = None):
    """Max-profit 0/1 knapsack solved by bisection on the attainable profit.

    A profit guess ``g`` is attainable iff the min-weight subset reaching
    ``g`` fits (``min_knapsack(..., g) <= capacity``). The search keeps
    ``VAL(lb) <= capacity < VAL(ub)`` and stops when the bracket closes.
    Profits must be non-negative integers. Returns ``(opt, chosen indices)``.
    ``trace`` (if given) collects ``(lb, ub)`` after every step.
    """
    profits = [int(p) for p in profits]
    if any(p < 0 for p in profits):
        raise ValueError("profits must be non-negative")
    ub = sum(profits)
    val, chosen = min_knapsack(profits, weights, ub)
    if val <= capacity:
        return ub, chosen
    lb, best = 0, []
    while ub - lb > 1:
        g = (lb + ub + 1) // 2
        val, sol = min_knapsack(profits, weights, g)
        if val > capacity:
            ub = g
        else:
            lb, best = g, sol
        if trace is not None:
            trace.append((lb, ub))
    return lb, best


def packing_alphas(profits: Sequence[int], demands: Sequence[int], q: int, t_max: int) -> list[int]:
    """Weighted packing counts ``max {profits . x : demands . x <= t q}`` for t = 1..t_max."""
    return [min_knapsack_bisect(profits, demands, t * q)[0] for t in range(1, t_max + 1)]
