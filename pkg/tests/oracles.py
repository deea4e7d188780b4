"""Independent reference implementations used only by the tests.

Nothing here calls into the code under test except for plain data
containers, so agreement between the two is evidence rather than an echo.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.optimize import Bounds, LinearConstraint, milp

from mcnd_bounds.arcset import make_arc_set
from mcnd_bounds.ecommerce import EcommerceGenParams, generate_ecommerce


def brute_alpha(demands, q, t_max):
    """Largest subset size fitting in ``t q``, by trying every subset."""
    out = []
    for t in range(1, t_max + 1):
        best = 0
        for r in range(len(demands) + 1):
            for sub in itertools.combinations(demands, r):
                if sum(sub) <= t * q:
                    best = max(best, r)
        out.append(best)
    return out


def weight_dp_knapsack(profits, weights, capacity):
    """Classic weight-indexed 0/1 knapsack: max profit within ``capacity``."""
    best = [0] * (capacity + 1)
    for p, w in zip(profits, weights):
        if w > capacity:
            continue
        for c in range(capacity, w - 1, -1):
            best[c] = max(best[c], best[c - w] + p)
    return best[capacity]


def recursive_points(arc):
    """Points of the single-arc set as ``(frozenset of columns, t)``, built recursively."""
    out = set()

    def rec(i, chosen, load):
        if i == len(arc.entries):
            for t in range(arc.t_max + 1):
                if load <= t * arc.q and (t > 0 or not chosen):
                    out.add((frozenset(chosen), t))
            return
        e = arc.entries[i]
        rec(i + 1, chosen, load)
        for c in e.xvars:
            rec(i + 1, chosen + [c], load + e.demand)

    rec(0, [], 0)
    return out


def cut_holds_everywhere(cut, arc, tol=1e-9):
    """True iff ``cut`` holds at every point of the recursive enumeration."""
    x = dict(cut.x_coefs)
    ylev = {v: t + 1 for t, v in enumerate(arc.yvars)}
    a = {ylev[i]: c for i, c in cut.y_coefs}
    for cols, t in recursive_points(arc):
        if sum(x.get(c, 0.0) for c in cols) > a.get(t, 0.0) + cut.rhs + tol:
            return False
    return True


def random_arc(rng, max_paths=12, max_tmax=4, multi_path=True):
    """Random small arc: commodities with one or two paths, a random capacity."""
    n_paths = int(rng.integers(1, max_paths + 1))
    entries, col, k = [], 0, 0
    while col < n_paths:
        take = 2 if multi_path and col + 2 <= n_paths and rng.random() < 0.3 else 1
        entries.append((k, int(rng.integers(1, 100)), list(range(col, col + take))))
        col += take
        k += 1
    q = int(rng.integers(40, 160))
    total = sum(d for _, d, _ in entries)
    t_max = max(1, min(max_tmax, math.ceil(total / q)))
    return make_arc_set(0, q, t_max, entries)


def random_point(rng, arc):
    """Fractional point with per-commodity flow at most one and just enough capacity."""
    vals = np.zeros(arc.n_paths + arc.t_max)
    load = 0.0
    for e in arc.entries:
        share = rng.dirichlet(np.ones(len(e.xvars) + 1))[: len(e.xvars)] * rng.random()
        if rng.random() < 0.2:
            share[:] = 0
        vals[list(e.xvars)] = share
        load += e.demand * share.sum()
    need = load / arc.q
    t = min(arc.t_max, max(1, math.ceil(need)))
    vals[arc.yvars[t - 1]] = min(1.0, need / t)
    if need > t:
        vals[arc.yvars[-1]] = 1.0
    return vals


def fenchel_value(arc, values, B):
    """Exact largest violation of ``theta x <= alpha y`` over integer theta in [0, B].

    Solved as one MIP against every enumerated point, with paths of a
    commodity sharing one coefficient and ``alpha`` non-decreasing.
    """
    active = [i for i, e in enumerate(arc.entries) if sum(values[c] for c in e.xvars) > 1e-9]
    if not active:
        return 0.0
    xs = np.array([sum(values[c] for c in arc.entries[i].xvars) for i in active])
    ys = np.array([values[v] for v in arc.yvars])
    n, T = len(active), arc.t_max
    rows = []
    for cols, t in recursive_points(arc):
        sel = np.zeros(n)
        for j, i in enumerate(active):
            if any(c in cols for c in arc.entries[i].xvars):
                sel[j] = 1
        if not sel.any():
            continue
        row = np.zeros(n + T)
        row[:n] = sel
        if t:
            row[n + t - 1] = -1
        rows.append(row)
    for t in range(T - 1):
        row = np.zeros(n + T)
        row[n + t], row[n + t + 1] = 1, -1
        rows.append(row)
    c = np.concatenate([-xs, ys])
    cons = [LinearConstraint(np.array(rows), -np.inf, 0)] if rows else []
    res = milp(c, constraints=cons, integrality=np.ones(n + T),
               bounds=Bounds(np.zeros(n + T), np.concatenate([np.full(n, B), np.full(T, n * B)])))
    return float(-res.fun)


def walk_path(arcs, path, origin, dest):
    """Check that ``path`` leaves ``origin``, is contiguous and ends at ``dest``."""
    seq = [arcs[a] for a in path.arcs]
    if not seq or seq[0].tail != origin or seq[-1].head != dest:
        return False
    return all(a.head == b.tail for a, b in zip(seq, seq[1:]))


def tiny_instance(seed, n_vendors=2, n_fcs=2, n_dests=2, **kw):
    """A very small e-commerce instance (a handful of paths)."""
    params = dict(retention=0.5, fcs_per_dest=1, max_arcs=2, demand_mean=6000.0)
    params.update(kw)
    return generate_ecommerce(EcommerceGenParams(n_vendors, n_fcs, n_dests, seed=seed, **params))


def integer_points(inst):
    """Every path assignment of ``inst`` with its minimal integer capacities per arc."""
    by_k = inst.paths_by_commodity
    ks = [k.id for k in inst.commodities]
    for combo in itertools.product(*[sorted(by_k[k]) for k in ks]):
        load = {a: 0 for a in inst.model_arcs}
        for p in combo:
            d = inst.commodities[inst.paths[p].commodity].demand
            for a in inst.paths[p].arcs:
                if a in load:
                    load[a] += d
        tau = {a: math.ceil(v / inst.arcs[a].capacity) for a, v in load.items()}
        yield combo, tau
