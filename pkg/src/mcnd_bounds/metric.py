"""Metric inequalities from the dual of the aggregated multicommodity flow LP.

Commodities are merged by origin (or by destination). For a capacity vector
``qbar`` read off an LP point, the dual LP

    max  sum_i psi_i u_i - sum_a qbar_a v_a
    s.t. u_j - u_i <= v_ij   for every aggregate using arc (i, j),   u_root = 0

is solved once per active arc with that arc's ``v`` pinned to 1. Whenever the
optimum is zero the dual solution ``(v, u)`` gives a *helper* inequality
``sum_a v_a q_a tau_a >= sum psi u`` over installed capacities ``tau_a``, and a
Chvatal-Gomory rounding of it gives an *integral* inequality. Direct arcs are
uncapacitated, so they carry ``v = 0``.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from .instance import PATH_BASED, Instance
from .model import CONTINUOUS, GE, LE, Cut, ModelSpec
from .solver import UNBOUNDED, Backend, LpPoint, default_backend

log = logging.getLogger(__name__)

__all__ = [
    "AggGroup",
    "AggCommoditySet",
    "MetricDualSolution",
    "MetricCuts",
    "LagrangianResult",
    "aggregate",
    "generate_metric_cuts",
    "lagrangian_loop",
    "capacity_terms",
]

ACTIVE_TOL = 1e-9
ZERO_TOL = 1e-6
SNAP_TOL = 1e-7


@dataclass(frozen=True)
class AggGroup:
    root: int
    commodities: tuple[int, ...]
    psi: dict[int, float]
    arcs: tuple[int, ...]
    nodes: tuple[int, ...]


@dataclass
class AggCommoditySet:
    inst: Instance
    mode: str
    groups: list[AggGroup]
    arc_groups: dict[int, list[int]]
    node_groups: dict[int, list[int]]


@dataclass(frozen=True)
class MetricDualSolution:
    arc: int
    v: dict[int, float]
    u: dict[tuple[int, int], float]
    objective: float


@dataclass
class MetricCuts:
    helpers: list[Cut]
    integrals: list[Cut]
    duals: list[MetricDualSolution] = field(default_factory=list)
    skipped: list[int] = field(default_factory=list)


def aggregate(inst: Instance, mode: str = "origin") -> AggCommoditySet:
    """Merge commodities sharing an origin (``mode='origin'``) or a destination."""
    if inst.kind != PATH_BASED:
        raise ValueError("aggregation needs a path-based instance")
    if mode not in ("origin", "destination"):
        raise ValueError(f"unknown aggregation mode {mode!r}")
    by_root: dict[int, list[int]] = {}
    for k in inst.commodities:
        root = k.origin if mode == "origin" else k.dest
        by_root.setdefault(root, []).append(k.id)
    groups = []
    arc_groups: dict[int, list[int]] = {}
    node_groups: dict[int, list[int]] = {}
    for g, root in enumerate(sorted(by_root)):
        ks = tuple(by_root[root])
        psi: dict[int, float] = {root: 0.0}
        arcs: set[int] = set()
        for k in ks:
            c = inst.commodities[k]
            other = c.dest if mode == "origin" else c.origin
            sign = 1.0 if mode == "origin" else -1.0
            psi[other] = psi.get(other, 0.0) + sign * c.demand
            psi[root] -= sign * c.demand
            for p in inst.paths_by_commodity[k]:
                arcs.update(inst.paths[p].arcs)
        nodes = {root}
        for a in arcs:
            nodes.update((inst.arcs[a].tail, inst.arcs[a].head))
        for a in arcs:
            arc_groups.setdefault(a, []).append(g)
        for i in nodes:
            node_groups.setdefault(i, []).append(g)
        groups.append(AggGroup(root, ks, psi, tuple(sorted(arcs)), tuple(sorted(nodes))))
    return AggCommoditySet(inst, mode, groups, arc_groups, node_groups)


def capacity_terms(model: ModelSpec, arc: int) -> list[tuple[int, float]]:
    """Columns and multipliers whose weighted sum is the installed capacity units of ``arc``."""
    cols = model.cap_index[arc]
    if model.kind == "BIN":
        return [(c, float(t)) for t, c in enumerate(cols, start=1)]
    return [(c, 1.0) for c in cols]


class _DualLp:
    """The aggregated dual LP, kept open so per-arc solves warm start."""

    def __init__(self, agg: AggCommoditySet, model: ModelSpec, qbar: dict[int, float],
                 backend: Backend) -> None:
        inst = agg.inst
        m = ModelSpec("DUAL")
        self.ucol: dict[tuple[int, int], int] = {}
        for g, grp in enumerate(agg.groups):
            for i in grp.nodes:
                if i != grp.root:
                    # maximise psi.u  ->  minimise -psi.u
                    self.ucol[(g, i)] = m.add_variable(("u", g, i), CONTINUOUS, -math.inf, math.inf,
                                                       -grp.psi.get(i, 0.0))
        self.vcol = {a: m.add_variable(("v", a), CONTINUOUS, 0.0, math.inf, qbar[a]) for a in qbar}
        for g, grp in enumerate(agg.groups):
            for a in grp.arcs:
                arc = inst.arcs[a]
                idx, coef = [], []
                if arc.head != grp.root:
                    idx.append(self.ucol[(g, arc.head)])
                    coef.append(1.0)
                if arc.tail != grp.root:
                    idx.append(self.ucol[(g, arc.tail)])
                    coef.append(-1.0)
                if a in self.vcol:
                    idx.append(self.vcol[a])
                    coef.append(-1.0)
                if idx:
                    m.add_constraint(idx, coef, LE, 0.0, "arc")
        self.model = m
        self.session = backend.open_lp(m)

    def solve_pinned(self, arc: int) -> LpPoint:
        col = self.vcol[arc]
        self.session.set_bounds([col], [1.0], [1.0])
        try:
            return self.session.solve()
        finally:
            self.session.set_bounds([col], [0.0], [math.inf])


def _distances(agg: AggCommoditySet, g: int, v: dict[int, float]) -> dict[int, float]:
    """Exact potentials for group ``g`` under arc weights ``v`` (shortest-path distances)."""
    inst = agg.inst
    grp = agg.groups[g]
    pos = {n: i for i, n in enumerate(grp.nodes)}
    weight: dict[tuple[int, int], float] = {}
    for a in grp.arcs:
        arc = inst.arcs[a]
        t, h = pos[arc.tail], pos[arc.head]
        if agg.mode == "destination":
            t, h = h, t
        weight[(t, h)] = min(weight.get((t, h), math.inf), v.get(a, 0.0))
    n = len(grp.nodes)
    rows, cols = zip(*weight) if weight else ((), ())
    # csgraph drops explicit zeros, so zero-weight arcs get a tiny stand-in
    w = np.maximum(np.fromiter(weight.values(), float, len(weight)), 1e-300)
    mat = csr_matrix((w, (rows, cols)), shape=(n, n))
    dist = dijkstra(mat, directed=True, indices=pos[grp.root])
    dist = np.where(dist < 1e-200, 0.0, dist)
    sign = 1.0 if agg.mode == "origin" else -1.0
    return {node: sign * float(dist[pos[node]]) for node in grp.nodes}


def _key(y_coefs, rhs) -> tuple:
    return tuple((i, round(c, 6)) for i, c in y_coefs), round(rhs, 6)


def generate_metric_cuts(point: LpPoint | np.ndarray, agg: AggCommoditySet, model: ModelSpec,
                         backend: Backend | None = None) -> MetricCuts:
    """Helper and integral metric inequalities anchored at every active arc."""
    backend = backend or default_backend()
    inst = agg.inst
    values = point.values if isinstance(point, LpPoint) else np.asarray(point, float)
    qbar: dict[int, float] = {}
    active = []
    for a in inst.model_arcs:
        terms = capacity_terms(model, a)
        qbar[a] = inst.arcs[a].capacity * sum(values[c] * m for c, m in terms)
        if sum(values[c] for c, _ in terms) > ACTIVE_TOL:
            active.append(a)
    dual = _DualLp(agg, model, qbar, backend)
    out = MetricCuts([], [])
    seen_h: set = set()
    seen_i: set = set()
    for a in active:
        sol = dual.solve_pinned(a)
        if sol.status == UNBOUNDED or not sol.optimal:
            log.warning("metric dual for arc %d is %s; capacity vector infeasible?", a, sol.status)
            out.skipped.append(a)
            continue
        z = -sol.objective
        if abs(z) > ZERO_TOL * (1.0 + qbar[a]):
            continue
        v = {}
        for b, col in dual.vcol.items():
            val = max(float(sol.values[col]), 0.0)
            r = round(val)
            val = float(r) if abs(val - r) <= SNAP_TOL else val
            if val > 0:
                v[b] = val
        u = {}
        rhs = 0.0
        for g, grp in enumerate(agg.groups):
            if not any(b in v for b in grp.arcs):
                continue
            dist = _distances(agg, g, v)
            for node, psi in grp.psi.items():
                if psi and node != grp.root:
                    u[(g, node)] = dist[node]
                    rhs += psi * dist[node]
        if rhs <= ZERO_TOL:
            continue
        out.duals.append(MetricDualSolution(a, v, u, z))
        ycoef: dict[int, float] = {}
        for b, vb in v.items():
            for c, mult in capacity_terms(model, b):
                ycoef[c] = ycoef.get(c, 0.0) + vb * inst.arcs[b].capacity * mult
        y_coefs = tuple(sorted(ycoef.items()))
        key = _key(y_coefs, rhs)
        if key in seen_h:
            continue
        seen_h.add(key)
        out.helpers.append(Cut((), y_coefs, rhs, GE, "metric-helper", a))
        # rounding: divide by the smallest unit capacity among arcs at weight one
        qmin = min(inst.arcs[b].capacity for b, vb in v.items() if vb == 1.0) if 1.0 in v.values() \
            else min(inst.arcs[b].capacity for b in v)
        icoef: dict[int, float] = {}
        for b, vb in v.items():
            k = math.ceil(vb * inst.arcs[b].capacity / qmin - 1e-12)
            for c, mult in capacity_terms(model, b):
                icoef[c] = icoef.get(c, 0.0) + k * mult
        irhs = float(math.ceil(rhs / qmin - 1e-9 * max(1.0, rhs / qmin)))
        ic = tuple(sorted(icoef.items()))
        ikey = _key(ic, irhs)
        if ikey not in seen_i:
            seen_i.add(ikey)
            out.integrals.append(Cut((), ic, irhs, GE, "metric-integral", a))
    return out


@dataclass
class LagrangianResult:
    helpers: list[Cut]
    integrals: list[Cut]
    model: ModelSpec
    point: LpPoint
    duals: np.ndarray
    base_value: float
    value: float


def lagrangian_loop(lp: ModelSpec, agg: AggCommoditySet, point: LpPoint | None = None,
                    backend: Backend | None = None) -> LagrangianResult:
    """One pass of metric-cut generation with Lagrangian re-weighting.

    Collects helper and integral cuts at ``point`` (the LP optimum when not
    given), re-solves the LP with the integral cuts added, then returns a copy
    of ``lp`` without those rows whose objective carries them with the dual
    values as multipliers, together with the re-solved point.
    """
    backend = backend or default_backend()
    if point is None:
        point = backend.solve_lp(lp)
        if not point.optimal:
            raise RuntimeError(f"LP not optimal: {point.status}")
    base = point.objective
    cuts = generate_metric_cuts(point, agg, lp, backend)
    with_cuts = lp.copy()
    first = with_cuts.n_rows
    for c in cuts.integrals:
        with_cuts.add_cut(c)
    new_point = backend.solve_lp(with_cuts)
    if not new_point.optimal:
        raise RuntimeError(f"LP with integral metric cuts is {new_point.status}")
    duals = np.asarray(new_point.duals[first:], dtype=float) if cuts.integrals else np.zeros(0)
    c = lp.objective()
    offset = lp.obj_offset
    for d, cut in zip(duals, cuts.integrals):
        if d == 0.0:
            continue
        idx, val, _, rhs = cut.as_row()
        # row reads a.x >= rhs; penalty d * (rhs - a.x)
        np.add.at(c, idx, -d * val)
        offset += d * rhs
    modified = lp.with_objective(c, offset)
    return LagrangianResult(cuts.helpers, cuts.integrals, modified, new_point, duals, base,
                            new_point.objective)
