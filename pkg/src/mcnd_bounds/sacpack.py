"""SAC-Pack cuts: packing counts, IP separation, coefficient lifting and the saturation loop.

A SAC-Pack cut for arc ``a`` reads ``sum_{p in Z} x_p <= sum_t alpha_t y_at``
where ``alpha_t`` is the number of commodities with a path in ``Z`` that fit
together into ``t`` capacity units.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .arcset import ArcSet, arc_sets
from .instance import Instance
from .knapsack import alpha_coefficients, min_knapsack_bisect, packing_alphas
from .model import BINARY, INTEGER, GE, LE, Cut, ModelSpec
from .solver import OPTIMAL, Backend, LpPoint, default_backend

log = logging.getLogger(__name__)

__all__ = [
    "SeparationResult",
    "SaturationResult",
    "DEFAULT_EPS",
    "VIOLATION_TOL",
    "build_separation_model",
    "separate_sacpack",
    "separate_sacpack_aggregated",
    "postprocess_lift",
    "packing_cut",
    "family_separator",
    "saturate",
]

DEFAULT_EPS = 1e-3
VIOLATION_TOL = 1e-4
ARC_CAP_SECONDS = 5.0
NZ = 1e-9

VIOLATED, NONE, INCONCLUSIVE = "violated", "none", "inconclusive"


@dataclass
class SeparationResult:
    """Outcome of separating one arc: a violated cut, or a certificate that none was found."""

    status: str
    cut: Cut | None = None
    violation: float = 0.0
    info: dict = field(default_factory=dict)

    @property
    def found(self) -> bool:
        return self.status == VIOLATED


def _values(point) -> np.ndarray:
    return point.values if isinstance(point, LpPoint) else np.asarray(point, dtype=float)


def packing_cut(arc: ArcSet, columns: Sequence[int], tag: str = "sacpack") -> Cut:
    """SAC-Pack cut over the given path columns, with closed-form ``alpha``."""
    dem = arc.demand_of()
    com = arc.commodity_of()
    alphas = alpha_coefficients([(com[c], dem[c]) for c in columns], arc.q, arc.t_max)
    return Cut(
        x_coefs=tuple((int(c), 1.0) for c in sorted(columns)),
        y_coefs=tuple((arc.yvars[t], float(a)) for t, a in enumerate(alphas) if a > 0),
        tag=tag,
        arc=arc.arc,
    )


def _arc_is_integral(arc: ArcSet, values: np.ndarray) -> bool:
    cols = arc.xvars + list(arc.yvars)
    v = values[cols]
    return bool(np.all(np.abs(v - np.round(v)) <= NZ))


def build_separation_model(arc: ArcSet, values: np.ndarray, eps: float = DEFAULT_EPS,
                           aggregated: bool = False, restrict: bool = True):
    """The separation IP for one arc as a minimisation :class:`ModelSpec`.

    Its optimum is minus the largest violation. Returns ``(model, zcols, eps)``
    where ``zcols`` maps each ``z`` column to the path columns it selects and
    ``eps`` is the value actually used (rescaled when demands are tiny).
    """
    if restrict:
        keep = {c for c in arc.xvars if values[c] > NZ}
        arc = arc.restricted(keep)
        levels = [t for t in range(1, arc.t_max + 1) if values[arc.yvars[t - 1]] > NZ]
    else:
        levels = list(range(1, arc.t_max + 1))
    ents = arc.entries
    if ents:
        smallest = min(e.demand for e in ents) / arc.q
        if smallest <= eps:
            eps = smallest / 2
    m = ModelSpec("SEP")
    zcols: dict[int, tuple[int, ...]] = {}
    zk: dict[int, list[int]] = {}
    for i, e in enumerate(ents):
        if aggregated:
            j = m.add_variable(("z", e.commodity), BINARY, 0, 1, -sum(values[c] for c in e.xvars))
            zcols[j] = e.xvars
            zk[i] = [j]
        else:
            zk[i] = []
            for c in e.xvars:
                j = m.add_variable(("z", c), BINARY, 0, 1, -values[c])
                zcols[j] = (c,)
                zk[i].append(j)
    n = len(ents)
    for t in levels:
        al = m.add_variable(("alpha", t), INTEGER, 0, math.inf, values[arc.yvars[t - 1]])
        u = m.add_variable(("u", t), BINARY, 0, 1)
        v = m.add_variable(("v", t), BINARY, 0, 1)
        s = [m.add_variable(("s", i, t), BINARY, 0, 1) for i in range(n)]
        w = [m.add_variable(("w", i, t), BINARY, 0, 1) for i in range(n)]
        # alpha_t counts the packed prefix minus the commodity that overflows
        m.add_constraint([al] + s + [u], [1.0] + [-1.0] * n + [-1.0], GE, -1.0, "sep1")
        for i in range(n):
            m.add_constraint([s[i]] + zk[i], [1.0] + [-1.0] * len(zk[i]), LE, 0.0, "sep2")
        m.add_constraint(s + [u], [e.demand / arc.q for e in ents] + [float(t)], GE, t + eps, "sep3")
        for i in range(n):
            for j in zk[i]:
                m.add_constraint([j, s[i], w[i]], [1.0, -1.0, -1.0], LE, 0.0, "sep4")
        m.add_constraint(w + [v], [1.0] * n + [-float(n)], LE, 0.0, "sep5")
        m.add_constraint([u, v], [1.0, 1.0], LE, 1.0, "sep6")
        # precedence: commodities enter the packed prefix by non-decreasing demand
        for i in range(n - 1):
            after = n - i - 1
            m.add_constraint([s[i], w[i]] + s[i + 1 :], [float(after), -float(after)] + [-1.0] * after,
                             GE, -float(after), "sep7")
    return m, zcols, eps


def _separate(arc: ArcSet, point, eps: float, time_cap: float, aggregated: bool, restrict: bool,
              backend: Backend | None, threshold: float) -> SeparationResult:
    values = _values(point)
    if not any(values[c] > NZ for c in arc.xvars):
        return SeparationResult(NONE)
    model, zcols, eps_used = build_separation_model(arc, values, eps, aggregated, restrict)
    info = {"eps": eps_used, "eps_rescaled": eps_used != eps, "z_vars": len(zcols)}
    res = (backend or default_backend()).solve_mip(model, time_limit=time_cap)
    info["time"] = res.wall_time
    if res.status != OPTIMAL:
        return SeparationResult(INCONCLUSIVE, info=info)
    chosen = [c for j, cols in zcols.items() if res.values[j] > 0.5 for c in cols]
    if not chosen:
        return SeparationResult(NONE, info=info)
    cut = packing_cut(arc, chosen)
    viol = cut.violation(values)
    info["ip_value"] = -res.objective
    if viol > threshold:
        return SeparationResult(VIOLATED, cut, viol, info)
    return SeparationResult(NONE, None, viol, info)


def separate_sacpack(arc: ArcSet, point, eps: float = DEFAULT_EPS, time_cap: float = ARC_CAP_SECONDS,
                     restrict: bool = True, backend: Backend | None = None,
                     threshold: float = VIOLATION_TOL) -> SeparationResult:
    """Most violated SAC-Pack cut on ``arc`` with one selection variable per path."""
    return _separate(arc, point, eps, time_cap, False, restrict, backend, threshold)


def separate_sacpack_aggregated(arc: ArcSet, point, eps: float = DEFAULT_EPS,
                                time_cap: float = ARC_CAP_SECONDS, restrict: bool = True,
                                backend: Backend | None = None,
                                threshold: float = VIOLATION_TOL) -> SeparationResult:
    """As :func:`separate_sacpack` but selecting whole commodities (all their positive paths)."""
    return _separate(arc, point, eps, time_cap, True, restrict, backend, threshold)


def postprocess_lift(cut: Cut, arc: ArcSet, point, max_coef: int = 2) -> Cut:
    """Raise path coefficients of commodities that cannot share the lowest used capacity level.

    ``t0`` is the smallest level with positive ``y``. A commodity qualifies
    when its demand plus the ``alpha_t0 - 1`` smallest other selected demands
    overflows ``t0`` units. Each qualifying commodity (largest demand first)
    gets coefficient ``max_coef`` if the weighted packing value at ``t0``
    stays put; afterwards every ``alpha_t`` is recomputed exactly.
    """
    values = _values(point)
    ys = arc.y_star(values)
    used = np.flatnonzero(ys > NZ)
    if not len(used):
        return cut
    t0 = int(used[0]) + 1
    cap = t0 * arc.q
    com = arc.commodity_of()
    dem = arc.demand_of()
    theta: dict[int, int] = {}
    for c, val in cut.x_coefs:
        theta[com[c]] = max(theta.get(com[c], 0), int(round(val)))
    ks = sorted(theta)
    d = {com[c]: dem[c] for c, _ in cut.x_coefs}

    def value_at(th: dict[int, int], capacity: int) -> int:
        return min_knapsack_bisect([th[k] for k in ks], [d[k] for k in ks], capacity)[0]

    base = value_at(theta, cap)
    ylev = {v: t + 1 for t, v in enumerate(arc.yvars)}
    alpha_t0 = int(round(dict((ylev[i], c) for i, c in cut.y_coefs).get(t0, 0)))
    changed = False
    for k in sorted(ks, key=lambda k: (-d[k], k)):
        if theta[k] >= max_coef:
            continue
        others = sorted(d[j] for j in ks if j != k)
        if d[k] + sum(others[: max(alpha_t0 - 1, 0)]) <= cap:
            continue
        trial = dict(theta)
        trial[k] = max_coef
        if value_at(trial, cap) == base:
            theta = trial
            changed = True
    if not changed:
        return cut
    alphas = packing_alphas([theta[k] for k in ks], [d[k] for k in ks], arc.q, arc.t_max)
    return Cut(
        x_coefs=tuple((c, float(theta[com[c]])) for c, _ in cut.x_coefs),
        y_coefs=tuple((arc.yvars[t], float(a)) for t, a in enumerate(alphas) if a > 0),
        tag="gensacpack-post",
        arc=arc.arc,
    )


Separator = Callable[[ArcSet, np.ndarray], list[Cut]]


def family_separator(sacpack: bool = True, post: bool = False, rowgen_B: int | None = None,
                     eps: float = DEFAULT_EPS, time_cap: float = ARC_CAP_SECONDS,
                     aggregated: bool = False, backend: Backend | None = None,
                     max_iters: int = 100, stats: dict | None = None,
                     rowgen_fallback: bool = False) -> Separator:
    """Per-arc separator combining the cut families in a fixed order.

    Order: SAC-Pack cut, its lifted form, then a row-generation cut with
    coefficients up to ``rowgen_B`` (only when ``rowgen_B > 1``). With
    ``rowgen_fallback`` row generation runs only on arcs where the cheaper
    families found nothing.
    """
    from .gensacpack import rowgen_separate

    sep = separate_sacpack_aggregated if aggregated else separate_sacpack
    stats = stats if stats is not None else {}

    def run(arc: ArcSet, values: np.ndarray) -> list[Cut]:
        out: list[Cut] = []
        if sacpack or post:
            r = sep(arc, values, eps=eps, time_cap=time_cap, backend=backend)
            stats[r.status] = stats.get(r.status, 0) + 1
            if r.found:
                if sacpack:
                    out.append(r.cut)
                if post:
                    lifted = postprocess_lift(r.cut, arc, values)
                    if lifted is not r.cut and lifted.violation(values) > VIOLATION_TOL:
                        out.append(lifted)
        if rowgen_B is not None and rowgen_B > 1 and not (rowgen_fallback and out):
            r = rowgen_separate(arc, values, B=rowgen_B, max_iters=max_iters, backend=backend)
            stats["rowgen_" + r.status] = stats.get("rowgen_" + r.status, 0) + 1
            if r.found:
                out.append(r.cut)
        return out

    return run


@dataclass
class SaturationResult:
    model: ModelSpec
    cuts: list[Cut]
    rounds: int
    lp_value: float
    base_value: float
    truncated: bool
    point: LpPoint
    history: list[float] = field(default_factory=list)
    cut_time: float = 0.0


def saturate(model: ModelSpec, inst: Instance, separator: Separator, max_rounds: int = 200,
             rel_tol: float = 1e-7, arc_order: Sequence[int] | None = None,
             backend: Backend | None = None, time_limit: float | None = None,
             max_cuts_per_round: int | None = None, skip_integral: bool = True) -> SaturationResult:
    """Solve the LP, separate every arc, add violated cuts, repeat until nothing changes.

    Stops when no arc yields a violated cut or the LP value improves by less
    than ``rel_tol`` (relative). Hitting ``max_rounds`` or ``time_limit`` sets
    ``truncated``. Returns a copy of ``model`` with the cuts appended.
    """
    backend = backend or default_backend()
    model = model.copy()
    sets = arc_sets(model, inst)
    if arc_order is not None:
        pos = {a: i for i, a in enumerate(arc_order)}
        sets.sort(key=lambda s: pos.get(s.arc, len(pos)))
    session = backend.open_lp(model)
    point = session.solve()
    if not point.optimal:
        raise RuntimeError(f"LP relaxation not optimal: {point.status}")
    base = point.objective
    history = [base]
    cuts: list[Cut] = []
    seen: set = set()
    t0 = time.perf_counter()
    cut_time = 0.0
    truncated = False
    rounds = 0
    while True:
        if rounds >= max_rounds or (time_limit is not None and time.perf_counter() - t0 > time_limit):
            truncated = True
            break
        ts = time.perf_counter()
        new = []
        for s in sets:
            if skip_integral and _arc_is_integral(s, point.values):
                continue
            for c in separator(s, point.values):
                key = (c.x_coefs, c.y_coefs, c.rhs, c.sense)
                if key not in seen:
                    seen.add(key)
                    new.append(c)
            if max_cuts_per_round is not None and len(new) >= max_cuts_per_round:
                break
        cut_time += time.perf_counter() - ts
        if not new:
            break
        rounds += 1
        rows = []
        for c in new:
            model.add_cut(c)
            rows.append(model.constraints[-1])
        session.add_rows(rows)
        cuts.extend(new)
        prev = point.objective
        point = session.solve()
        if not point.optimal:
            raise RuntimeError(f"LP became {point.status} after adding cuts")
        history.append(point.objective)
        log.debug("round %d: %d cuts, LP %.6f", rounds, len(new), point.objective)
        if point.objective - prev < rel_tol * max(1.0, abs(prev)):
            break
    return SaturationResult(model, cuts, rounds, point.objective, base, truncated, point, history,
                            cut_time)
