"""Gen-SAC-Pack cuts by row generation.

A master MIP proposes integer coefficients ``theta`` (at most ``B``) and
non-decreasing ``alpha`` that separate the LP point from a working list of
points of the single-arc set. A knapsack oracle then looks for a point of the
set that the proposal cuts off; if one exists it joins the list and the
master is solved again. Paths are aggregated per commodity throughout, which
is exact because a commodity uses at most one path.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .arcset import ArcSet
from .knapsack import min_knapsack_bisect
from .model import GE, INTEGER, Cut, ModelSpec
from .sacpack import INCONCLUSIVE, NONE, NZ, VIOLATED, VIOLATION_TOL, SeparationResult, _values
from .solver import OPTIMAL, Backend, default_backend

__all__ = ["RowGenState", "feasval", "solve_master", "rowgen_separate"]

FEAS_TOL = 1e-9


@dataclass
class RowGenState:
    """Working points ``(selection, t)`` over the entries of one arc, plus the last master solution.

    ``selection`` is a 0/1 tuple aligned with ``entries`` (commodity level);
    ``t = 0`` means no capacity installed.
    """

    arc: ArcSet
    entries: list[int]
    B: int
    points: list[tuple[tuple[int, ...], int]] = field(default_factory=list)
    theta: tuple[int, ...] | None = None
    alpha: tuple[int, ...] | None = None
    iterations: int = 0
    sepvals: list[float] = field(default_factory=list)

    def add_point(self, selection: Sequence[int], t: int) -> None:
        sel = tuple(int(s) for s in selection)
        if len(sel) != len(self.entries) or any(s not in (0, 1) for s in sel):
            raise ValueError("selection must be a 0/1 vector over the tracked commodities")
        load = sum(self.arc.entries[i].demand for i, s in zip(self.entries, sel) if s)
        if not 0 <= t <= self.arc.t_max or load > t * self.arc.q:
            raise ValueError(f"point {sel} with t={t} is not in the arc set")
        if (sel, t) not in self.points:
            self.points.append((sel, t))

    def initialise(self) -> None:
        zero = (0,) * len(self.entries)
        self.add_point(zero, 0)
        for t in range(1, self.arc.t_max + 1):
            self.add_point(zero, t)


def feasval(theta: Sequence[int], alpha: Sequence[float], arc: ArcSet,
            entries: Sequence[int] | None = None):
    """Largest violation of ``theta x <= alpha y`` over the single-arc set.

    ``theta`` is aligned with ``entries`` (default: all entries of ``arc``),
    ``alpha[t-1]`` belongs to level ``t``. One knapsack per level, each solved
    by :func:`min_knapsack_bisect`. Returns ``(value, (selection, t))``; the
    witness is the zero point when the value is 0.
    """
    entries = list(range(len(arc.entries))) if entries is None else list(entries)
    theta = [int(round(v)) for v in theta]
    items = [j for j, th in enumerate(theta) if th > 0]
    best, witness = 0.0, ((0,) * len(entries), 0)
    for t in range(1, arc.t_max + 1):
        opt, chosen = min_knapsack_bisect([theta[j] for j in items],
                                          [arc.entries[entries[j]].demand for j in items], t * arc.q)
        val = opt - alpha[t - 1]
        if val > best + FEAS_TOL:
            sel = [0] * len(entries)
            for c in chosen:
                sel[items[c]] = 1
            best, witness = float(val), (tuple(sel), t)
    return best, witness


def solve_master(points, xs: np.ndarray, ys: np.ndarray, B: int, backend: Backend | None = None,
                 tie_break: bool = True):
    """Best integer ``(theta, alpha)`` against a point list.

    Maximises ``theta.xs - alpha.ys`` subject to ``theta.x^j <= alpha_{t_j}``
    for every listed point, ``alpha`` non-decreasing and ``0 <= theta <= B``.
    With ``tie_break`` a second solve picks, among optimal answers, the one
    with smallest ``sum(alpha)`` and then smallest ``sum(theta)``.
    Returns ``(sepval, theta, alpha)`` or ``None`` if the solve failed.
    """
    backend = backend or default_backend()
    n, T = len(xs), len(ys)
    m = ModelSpec("MASTER")
    th = [m.add_variable(("theta", i), INTEGER, 0, B, -float(xs[i])) for i in range(n)]
    al = [m.add_variable(("alpha", t), INTEGER, 0, n * B, float(ys[t])) for t in range(T)]
    for sel, t in points:
        idx = [th[i] for i in range(n) if sel[i]]
        if not idx:
            continue
        if t == 0:
            for i in idx:
                m.add_constraint([i], [1.0], "<=", 0.0, "point")
        else:
            m.add_constraint(idx + [al[t - 1]], [1.0] * len(idx) + [-1.0], "<=", 0.0, "point")
    for t in range(T - 1):
        m.add_constraint([al[t], al[t + 1]], [1.0, -1.0], "<=", 0.0, "monotone")
    res = backend.solve_mip(m)
    if res.status != OPTIMAL:
        return None
    sepval = -res.objective
    vals = res.values
    if tie_break and sepval > 0:
        big = n * B + 1
        obj = np.zeros(m.n_vars)
        obj[th] = 1.0
        obj[al] = float(big)
        m2 = m.with_objective(obj)
        m2.add_constraint(th + al, [float(x) for x in xs] + [-float(y) for y in ys], GE,
                          sepval - 1e-7 * max(1.0, abs(sepval)), "optimal")
        res2 = backend.solve_mip(m2)
        if res2.status == OPTIMAL:
            vals = res2.values
            sepval = float(np.dot(xs, vals[th]) - np.dot(ys, vals[al]))
    theta = tuple(int(round(vals[i])) for i in th)
    alpha = tuple(int(round(vals[i])) for i in al)
    return sepval, theta, alpha


def rowgen_separate(arc: ArcSet, point, B: int = 3, max_iters: int = 100,
                    backend: Backend | None = None, threshold: float = VIOLATION_TOL,
                    extra_points=None, tie_break: bool = True) -> SeparationResult:
    """Separate ``point`` from the convex hull of the single-arc set by row generation.

    Only commodities with positive flow on the arc get a coefficient. The
    loop stops with no cut once the master value drops to ``threshold`` or
    below, and with a cut once the oracle finds nothing violated.
    ``extra_points`` seeds the working list with further ``(selection, t)``
    points (selection over the positive-flow commodities).
    """
    if B < 1:
        raise ValueError("coefficient bound B must be at least 1")
    values = _values(point)
    xk = arc.x_star(values)
    active = [i for i, v in enumerate(xk) if v > NZ]
    if not active:
        return SeparationResult(NONE)
    ys = arc.y_star(values)
    xs = xk[active]
    state = RowGenState(arc, active, B)
    state.initialise()
    for sel, t in extra_points or ():
        state.add_point(sel, t)
    info = {"state": state}
    while state.iterations < max_iters:
        state.iterations += 1
        sol = solve_master(state.points, xs, ys, B, backend, tie_break)
        if sol is None:
            return SeparationResult(INCONCLUSIVE, info=info)
        sepval, theta, alpha = sol
        state.sepvals.append(sepval)
        state.theta, state.alpha = theta, alpha
        if sepval <= threshold:
            return SeparationResult(NONE, violation=sepval, info=info)
        fv, (sel, t) = feasval(theta, alpha, arc, active)
        if fv <= FEAS_TOL:
            cut = Cut(
                x_coefs=tuple(sorted((c, float(theta[j])) for j, i in enumerate(active)
                                     if theta[j] > 0 for c in arc.entries[i].xvars)),
                y_coefs=tuple((arc.yvars[t], float(a)) for t, a in enumerate(alpha) if a > 0),
                tag="gensacpack-rowgen",
                arc=arc.arc,
            )
            return SeparationResult(VIOLATED, cut, cut.violation(values), info)
        state.add_point(sel, t)
    return SeparationResult(INCONCLUSIVE, info=info)
