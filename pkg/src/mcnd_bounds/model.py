"""Solver-agnostic model descriptions for the INT, BIN and arc-based formulations."""

from __future__ import annotations

import copy
import math
from collections import deque
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
from scipy import sparse

from .instance import ARC_BASED, PATH_BASED, Instance, InstanceError

__all__ = [
    "Variable",
    "Constraint",
    "ModelSpec",
    "Cut",
    "GapReport",
    "ModelError",
    "build_int_model",
    "build_bin_model",
    "build_arc_fixed_model",
    "add_disaggregated_linking",
    "compute_gap",
    "compute_improvement",
]

BINARY, INTEGER, CONTINUOUS = "binary", "integer", "continuous"
LE, GE, EQ = "<=", ">=", "=="


class ModelError(ValueError):
    """Raised when a model cannot be built from the given data."""


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str
    lb: float
    ub: float
    obj: float
    key: tuple


@dataclass(frozen=True)
class Constraint:
    index: np.ndarray
    coef: np.ndarray
    sense: str
    rhs: float
    tag: str = ""

    def activity(self, values: np.ndarray) -> float:
        return float(np.dot(self.coef, values[self.index]))

    def slack(self, values: np.ndarray) -> float:
        """Non-negative when satisfied (for equalities: minus the absolute residual)."""
        act = self.activity(values)
        if self.sense == LE:
            return self.rhs - act
        if self.sense == GE:
            return act - self.rhs
        return -abs(act - self.rhs)


@dataclass(frozen=True)
class Cut:
    """A linear inequality over path/flow variables ``x`` and capacity variables ``y``.

    Packing cuts read ``sum(x_coefs * x) <= sum(y_coefs * y)`` (``sense='<='``,
    ``rhs=0``). Metric cuts have no ``x`` part and read
    ``sum(y_coefs * y) >= rhs``. Coefficients are stored as sorted
    ``(variable index, value)`` tuples so equal cuts hash equal.
    """

    x_coefs: tuple[tuple[int, float], ...]
    y_coefs: tuple[tuple[int, float], ...]
    rhs: float = 0.0
    sense: str = LE
    tag: str = "sacpack"
    arc: int | None = None

    def as_row(self) -> tuple[np.ndarray, np.ndarray, str, float]:
        if self.sense == LE:
            # x part on the left, y part moved over with a minus sign
            idx = [i for i, _ in self.x_coefs] + [i for i, _ in self.y_coefs]
            val = [c for _, c in self.x_coefs] + [-c for _, c in self.y_coefs]
        else:
            idx = [i for i, _ in self.y_coefs] + [i for i, _ in self.x_coefs]
            val = [c for _, c in self.y_coefs] + [-c for _, c in self.x_coefs]
        return np.asarray(idx, dtype=np.int64), np.asarray(val, dtype=float), self.sense, self.rhs

    def violation(self, values: np.ndarray) -> float:
        """Positive amount by which ``values`` violates the cut (negative if slack)."""
        lhs = sum(c * values[i] for i, c in self.x_coefs)
        rhs = sum(c * values[i] for i, c in self.y_coefs)
        if self.sense == LE:
            return lhs - rhs - self.rhs
        return self.rhs - (rhs - lhs)

    @property
    def alphas(self) -> tuple[float, ...]:
        return tuple(c for _, c in self.y_coefs)


class ModelSpec:
    """Variables, linear rows and objective of a minimisation model.

    ``x_index`` maps a path id (path-based) or ``(commodity, arc)`` pair
    (arc-based) to its variable; ``cap_index`` maps a capacitated arc to its
    capacity variables: ``[tau_a]`` for INT, ``[y_a1, ..., y_aT]`` for BIN and
    ``[y_a]`` for the arc-based model.
    """

    def __init__(self, kind: str, sense: str = "min") -> None:
        self.kind = kind
        self.sense = sense
        self.variables: list[Variable] = []
        self.constraints: list[Constraint] = []
        self.obj_offset = 0.0
        self.index: dict[tuple, int] = {}
        self.x_index: dict = {}
        self.cap_index: dict[int, list[int]] = {}
        self.profile = None

    # -- building ---------------------------------------------------------
    def add_variable(self, key: tuple, kind: str, lb: float = 0.0, ub: float = math.inf,
                     obj: float = 0.0, name: str | None = None) -> int:
        if key in self.index:
            raise ModelError(f"duplicate variable {key}")
        if not math.isfinite(obj):
            raise ModelError(f"non-finite objective coefficient for {key}")
        idx = len(self.variables)
        self.variables.append(Variable(name or "_".join(map(str, key)), kind, lb, ub, obj, key))
        self.index[key] = idx
        return idx

    def add_constraint(self, index: Sequence[int], coef: Sequence[float], sense: str,
                       rhs: float, tag: str = "") -> int:
        index = np.asarray(index, dtype=np.int64)
        coef = np.asarray(coef, dtype=float)
        if index.size and (index.min() < 0 or index.max() >= len(self.variables)):
            raise ModelError(f"constraint '{tag}' references an unregistered variable")
        if sense not in (LE, GE, EQ):
            raise ModelError(f"bad sense {sense!r}")
        self.constraints.append(Constraint(index, coef, sense, float(rhs), tag))
        return len(self.constraints) - 1

    def add_cut(self, cut: Cut) -> int:
        idx, val, sense, rhs = cut.as_row()
        return self.add_constraint(idx, val, sense, rhs, cut.tag)

    def copy(self) -> "ModelSpec":
        other = copy.copy(self)
        other.variables = list(self.variables)
        other.constraints = list(self.constraints)
        other.index = dict(self.index)
        other.x_index = dict(self.x_index)
        other.cap_index = {a: list(v) for a, v in self.cap_index.items()}
        return other

    def with_bounds(self, bounds: dict[int, tuple[float, float]]) -> "ModelSpec":
        """Copy with some variable bounds replaced (used to pin points in examples)."""
        other = self.copy()
        for i, (lb, ub) in bounds.items():
            v = other.variables[i]
            other.variables[i] = Variable(v.name, v.kind, lb, ub, v.obj, v.key)
        return other

    def with_objective(self, c: Sequence[float], offset: float | None = None) -> "ModelSpec":
        """Copy with the objective coefficients (and optionally the constant) replaced."""
        if len(c) != self.n_vars:
            raise ModelError(f"objective has {len(c)} entries for {self.n_vars} variables")
        other = self.copy()
        other.variables = [Variable(v.name, v.kind, v.lb, v.ub, float(ci), v.key)
                           for v, ci in zip(self.variables, c)]
        if offset is not None:
            other.obj_offset = float(offset)
        return other

    # -- array views ------------------------------------------------------
    @property
    def n_vars(self) -> int:
        return len(self.variables)

    @property
    def n_rows(self) -> int:
        return len(self.constraints)

    def objective(self) -> np.ndarray:
        return np.array([v.obj for v in self.variables], dtype=float)

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        lb = np.array([v.lb for v in self.variables], dtype=float)
        ub = np.array([v.ub for v in self.variables], dtype=float)
        return lb, ub

    def integrality(self) -> np.ndarray:
        return np.array([v.kind != CONTINUOUS for v in self.variables], dtype=bool)

    def row_matrix(self, rows: Iterable[int] | None = None) -> sparse.csr_matrix:
        cons = self.constraints if rows is None else [self.constraints[r] for r in rows]
        indptr = np.zeros(len(cons) + 1, dtype=np.int64)
        for i, c in enumerate(cons):
            indptr[i + 1] = indptr[i] + c.index.size
        indices = np.concatenate([c.index for c in cons]) if cons else np.zeros(0, np.int64)
        data = np.concatenate([c.coef for c in cons]) if cons else np.zeros(0)
        return sparse.csr_matrix((data, indices, indptr), shape=(len(cons), self.n_vars))

    def row_bounds(self, rows: Iterable[int] | None = None) -> tuple[np.ndarray, np.ndarray]:
        cons = self.constraints if rows is None else [self.constraints[r] for r in rows]
        lo = np.array([c.rhs if c.sense in (GE, EQ) else -math.inf for c in cons], dtype=float)
        hi = np.array([c.rhs if c.sense in (LE, EQ) else math.inf for c in cons], dtype=float)
        return lo, hi

    def evaluate(self, values: np.ndarray) -> float:
        return float(self.objective() @ values) + self.obj_offset

    def is_feasible(self, values: np.ndarray, tol: float = 1e-6) -> bool:
        lb, ub = self.bounds()
        if np.any(values < lb - tol) or np.any(values > ub + tol):
            return False
        return all(c.slack(values) >= -tol * max(1.0, abs(c.rhs)) for c in self.constraints)

    def count(self, tag: str) -> int:
        return sum(1 for c in self.constraints if c.tag == tag)

    def __repr__(self) -> str:
        return f"ModelSpec(kind={self.kind!r}, vars={self.n_vars}, rows={self.n_rows})"


# -- path-based builders ----------------------------------------------------

def _path_core(inst: Instance, kind: str) -> ModelSpec:
    if inst.kind != PATH_BASED:
        raise ModelError(f"{kind} model needs a path-based instance")
    m = ModelSpec(kind)
    by_k = inst.paths_by_commodity
    for k in inst.commodities:
        if not by_k.get(k.id):
            raise InstanceError(f"commodity {k.id} has an empty path set")
    # canonical order: paths by (commodity id, path id)
    for k in inst.commodities:
        for p in sorted(by_k[k.id]):
            m.x_index[p] = m.add_variable(
                ("x", p), BINARY, 0.0, 1.0, inst.path_cost(p) * k.demand, name=f"x_{p}"
            )
    return m


def _assignment_rows(m: ModelSpec, inst: Instance) -> None:
    for k in inst.commodities:
        idx = [m.x_index[p] for p in sorted(inst.paths_by_commodity[k.id])]
        m.add_constraint(idx, np.ones(len(idx)), EQ, 1.0, "assign")


def _flow_terms(m: ModelSpec, inst: Instance, a: int) -> tuple[list[int], list[float]]:
    pids = inst.paths_by_arc[a]
    return [m.x_index[p] for p in pids], [
        float(inst.commodities[inst.paths[p].commodity].demand) for p in pids
    ]


def build_int_model(inst: Instance) -> ModelSpec:
    """Path formulation with an integer number of capacity units per arc."""
    m = _path_core(inst, "INT")
    for a in inst.model_arcs:
        arc = inst.arcs[a]
        m.cap_index[a] = [m.add_variable(("tau", a), INTEGER, 0.0, math.inf, arc.fixed_cost)]
    _assignment_rows(m, inst)
    for a in inst.model_arcs:
        idx, coef = _flow_terms(m, inst, a)
        m.add_constraint(idx + m.cap_index[a], coef + [-float(inst.arcs[a].capacity)], LE, 0.0,
                         "capacity")
    return m


def build_bin_model(inst: Instance) -> ModelSpec:
    """Path formulation with multiple-choice binary capacity selectors.

    The integer capacity of arc ``a`` becomes ``sum_t t * y_at`` for
    ``t = 1..T_max_a`` with at most one selector switched on.
    """
    m = _path_core(inst, "BIN")
    prof = inst.capacity_profile()
    for a in inst.model_arcs:
        tmax = prof.t_max[a]
        if tmax < 1:
            raise ModelError(f"arc {a}: T_max = {tmax}")
        f = inst.arcs[a].fixed_cost
        m.cap_index[a] = [
            m.add_variable(("y", a, t), BINARY, 0.0, 1.0, f * t) for t in range(1, tmax + 1)
        ]
    m.profile = prof
    _assignment_rows(m, inst)
    for a in inst.model_arcs:
        idx, coef = _flow_terms(m, inst, a)
        q = float(inst.arcs[a].capacity)
        ys = m.cap_index[a]
        m.add_constraint(idx + ys, coef + [-q * t for t in range(1, len(ys) + 1)], LE, 0.0,
                         "capacity")
    for a in inst.model_arcs:
        ys = m.cap_index[a]
        m.add_constraint(ys, np.ones(len(ys)), LE, 1.0, "choice")
    return m


# -- arc-based builder ------------------------------------------------------

def _reachable(inst: Instance, src: int) -> set[int]:
    out: dict[int, list[int]] = {}
    for a in inst.arcs:
        out.setdefault(a.tail, []).append(a.head)
    seen = {src}
    queue = deque([src])
    while queue:
        i = queue.popleft()
        for j in out.get(i, ()):
            if j not in seen:
                seen.add(j)
                queue.append(j)
    return seen


def build_arc_fixed_model(inst: Instance) -> ModelSpec:
    """Arc-flow formulation with on/off arcs of fixed capacity.

    Variables ``x^k_ij`` (one per commodity and arc) and ``y_ij``; flow
    conservation per node and commodity, and ``sum_k d_k x^k_ij <= q_ij y_ij``.
    """
    if inst.kind != ARC_BASED:
        raise ModelError("arc-fixed model needs an arc-based instance")
    reach: dict[int, set[int]] = {}
    for k in inst.commodities:
        if k.origin not in reach:
            reach[k.origin] = _reachable(inst, k.origin)
        if k.dest not in reach[k.origin]:
            raise ModelError(f"commodity {k.id}: destination {k.dest} unreachable from {k.origin}")
    m = ModelSpec("ARC")
    for k in inst.commodities:
        for a in inst.arcs:
            m.x_index[(k.id, a.id)] = m.add_variable(
                ("x", k.id, a.id), BINARY, 0.0, 1.0, a.var_cost * k.demand
            )
    for a in inst.arcs:
        m.cap_index[a.id] = [m.add_variable(("y", a.id), BINARY, 0.0, 1.0, a.fixed_cost)]
    out_arcs: dict[int, list[int]] = {n.id: [] for n in inst.nodes}
    in_arcs: dict[int, list[int]] = {n.id: [] for n in inst.nodes}
    for a in inst.arcs:
        out_arcs[a.tail].append(a.id)
        in_arcs[a.head].append(a.id)
    for k in inst.commodities:
        for n in inst.nodes:
            idx = [m.x_index[(k.id, a)] for a in out_arcs[n.id]] + [
                m.x_index[(k.id, a)] for a in in_arcs[n.id]
            ]
            coef = [1.0] * len(out_arcs[n.id]) + [-1.0] * len(in_arcs[n.id])
            rhs = 1.0 if n.id == k.origin else (-1.0 if n.id == k.dest else 0.0)
            if idx:
                m.add_constraint(idx, coef, EQ, rhs, "flow")
    for a in inst.arcs:
        idx = [m.x_index[(k.id, a.id)] for k in inst.commodities] + m.cap_index[a.id]
        coef = [float(k.demand) for k in inst.commodities] + [-float(a.capacity)]
        m.add_constraint(idx, coef, LE, 0.0, "capacity")
    m.profile = inst.capacity_profile()
    return m


# -- strengthening ----------------------------------------------------------

def add_disaggregated_linking(model: ModelSpec, inst: Instance) -> int:
    """Add one per-(arc, commodity) linking row; return how many were added.

    INT: ``t_min * sum x_p <= tau_a``; BIN: ``sum x_p <= sum_{t >= t_min} y_at``;
    arc-based: ``x^k_ij <= y_ij``.
    """
    prof = inst.capacity_profile()
    added = 0
    if model.kind == "ARC":
        for a in inst.arcs:
            y = model.cap_index[a.id][0]
            for k in inst.commodities:
                model.add_constraint([model.x_index[(k.id, a.id)], y], [1.0, -1.0], LE, 0.0,
                                     "linking")
                added += 1
        return added
    for a in inst.model_arcs:
        by_k: dict[int, list[int]] = {}
        for p in inst.paths_by_arc[a]:
            by_k.setdefault(inst.paths[p].commodity, []).append(model.x_index[p])
        caps = model.cap_index[a]
        for k in sorted(by_k):
            xs = by_k[k]
            tmin = prof.t_min[(a, k)]
            if model.kind == "INT":
                idx = xs + caps
                coef = [float(tmin)] * len(xs) + [-1.0]
            elif model.kind == "BIN":
                ys = caps[tmin - 1 :]
                idx = xs + ys
                coef = [1.0] * len(xs) + [-1.0] * len(ys)
            else:
                raise ModelError(f"linking rows undefined for model kind {model.kind}")
            model.add_constraint(idx, coef, LE, 0.0, "linking")
            added += 1
    return added


# -- gap metrics ------------------------------------------------------------

@dataclass(frozen=True)
class GapReport:
    best_obj: float
    bound: float
    gap: float
    improvement: float | None = None


def compute_gap(best_obj: float, bound: float) -> GapReport:
    if not best_obj > 0:
        raise ValueError("best objective must be positive")
    return GapReport(best_obj, bound, (best_obj - bound) / best_obj)


def compute_improvement(bound: float, base_bound: float, best_obj: float) -> float:
    """Fraction of the base IP gap closed by ``bound``."""
    if base_bound >= best_obj:
        raise ValueError("degenerate baseline: base bound is not below the best objective")
    return (bound - base_bound) / (best_obj - base_bound)
