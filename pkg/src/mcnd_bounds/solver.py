"""LP/MIP backends behind a small contract.

Every other module talks to a backend only through :class:`~mcnd_bounds.model.ModelSpec`
and :class:`LpPoint`. Two backends ship: ``"highs"`` (``highspy``, incremental
row addition and warm starts) and ``"scipy"`` (``scipy.optimize.linprog`` /
``milp``, rebuilt on every solve). Neither exposes root-node user-cut
callbacks, so :meth:`Backend.solve_mip` runs a cut loop on the LP relaxation
when a ``root_cut_source`` is supplied and then solves the MIP with the cuts
in place.

Dual values follow one convention for both backends: ``duals[i]`` is the
derivative of the optimal objective with respect to the right-hand side of
row ``i`` (non-negative for binding ``>=`` rows of a minimisation).
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable, Protocol

import numpy as np

from .model import EQ, GE, LE, Constraint, Cut, ModelSpec

log = logging.getLogger(__name__)

__all__ = [
    "LpPoint",
    "MipResult",
    "SolverError",
    "Backend",
    "HighsBackend",
    "ScipyBackend",
    "get_backend",
    "solve_lp",
    "solve_mip",
]

OPTIMAL, INFEASIBLE, UNBOUNDED, LIMIT, ERROR = "optimal", "infeasible", "unbounded", "limit", "error"
FEAS_TOL = 1e-6


class SolverError(RuntimeError):
    """Backend failure, carrying the backend's own message."""


@dataclass
class LpPoint:
    values: np.ndarray
    objective: float
    status: str = OPTIMAL
    duals: np.ndarray | None = None

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL

    def __getitem__(self, i: int) -> float:
        return float(self.values[i])


@dataclass
class MipResult:
    objective: float
    bound: float
    status: str
    wall_time: float
    nodes: int = 0
    values: np.ndarray | None = None
    cut_rounds: int = 0
    cuts_added: int = 0
    extra: dict = field(default_factory=dict)

    @property
    def gap(self) -> float:
        if not math.isfinite(self.objective) or self.objective == 0:
            return math.inf
        return (self.objective - self.bound) / abs(self.objective)


RootCutSource = Callable[[LpPoint], list[Cut]]


class LpSession(Protocol):
    def solve(self) -> LpPoint: ...
    def add_rows(self, rows: Iterable[Constraint]) -> list[int]: ...
    def delete_rows(self, rows: list[int]) -> None: ...
    def set_objective(self, c: np.ndarray, offset: float = 0.0) -> None: ...


class Backend:
    """Common driver logic; subclasses implement the raw solves."""

    name = "base"
    supports_user_cuts = False

    def __init__(self, log_file: str | None = None, threads: int = 1, seed: int = 0) -> None:
        self.log_file = log_file
        self.threads = threads
        self.seed = seed

    def open_lp(self, model: ModelSpec) -> LpSession:
        raise NotImplementedError

    def solve_lp(self, model: ModelSpec) -> LpPoint:
        return self.open_lp(model).solve()

    def _solve_mip_raw(self, model: ModelSpec, time_limit: float | None,
                       focus: str | None) -> MipResult:
        raise NotImplementedError

    def solve_mip(self, model: ModelSpec, time_limit: float | None = None,
                  focus: str | None = None, root_cut_source: RootCutSource | None = None,
                  max_cut_rounds: int = 50, purge_slack: bool = False) -> MipResult:
        """Solve ``model`` with integrality restored.

        With a ``root_cut_source`` the relaxation is tightened first by
        repeatedly solving it and adding the returned cuts (at most
        ``max_cut_rounds`` rounds, sharing ``time_limit``). ``purge_slack``
        then drops the added rows that are not binding at the final root LP,
        which leaves the root bound unchanged.
        """
        t0 = time.perf_counter()
        rounds = added = 0
        root_lp = None
        if root_cut_source is not None:
            model = model.copy()
            first_cut = len(model.constraints)
            session = self.open_lp(model)
            for rounds in range(1, max_cut_rounds + 1):
                point = session.solve()
                if not point.optimal:
                    break
                cuts = root_cut_source(point)
                if not cuts:
                    break
                rows = []
                for c in cuts:
                    model.add_cut(c)
                    rows.append(model.constraints[-1])
                session.add_rows(rows)
                added += len(cuts)
                if time_limit is not None and time.perf_counter() - t0 > time_limit:
                    break
            if added:
                point = session.solve()
                if point.optimal:
                    root_lp = point.objective
                    if purge_slack:
                        keep = [r for r in model.constraints[first_cut:]
                                if r.slack(point.values) <= 1e-6 * max(1.0, abs(r.rhs))]
                        model.constraints[first_cut:] = keep
        remaining = None
        if time_limit is not None:
            remaining = max(time_limit - (time.perf_counter() - t0), 1.0)
        res = self._solve_mip_raw(model, remaining, focus)
        res.wall_time = time.perf_counter() - t0
        res.cut_rounds, res.cuts_added = rounds, added
        if root_lp is not None:
            res.extra["root_lp"] = root_lp
            res.extra["cut_rows_kept"] = len(model.constraints) - first_cut
        return res


# -- HiGHS ------------------------------------------------------------------

def _highs_module():
    import highspy

    return highspy


def _status_from_highs(h, status) -> str:
    hs = _highs_module().HighsModelStatus
    if status == hs.kOptimal:
        return OPTIMAL
    if status == hs.kInfeasible:
        return INFEASIBLE
    if status in (hs.kUnbounded, hs.kUnboundedOrInfeasible):
        return UNBOUNDED
    if status in (hs.kTimeLimit, hs.kIterationLimit, hs.kSolutionLimit, hs.kInterrupt):
        return LIMIT
    return ERROR


class _HighsLp:
    def __init__(self, backend: "HighsBackend", model: ModelSpec) -> None:
        hp = _highs_module()
        self.h = backend._new_highs()
        self.n = model.n_vars
        self.h.changeObjectiveOffset(model.obj_offset)
        lb, ub = model.bounds()
        inf = hp.kHighsInf
        lb = np.where(np.isinf(lb), -inf, lb)
        ub = np.where(np.isinf(ub), inf, ub)
        self.h.addVars(self.n, lb, ub)
        self.h.changeColsCost(self.n, np.arange(self.n, dtype=np.int32), model.objective())
        self.nrows = 0
        self.add_rows(model.constraints)

    def add_rows(self, rows: Iterable[Constraint]) -> list[int]:
        rows = list(rows)
        if not rows:
            return []
        inf = _highs_module().kHighsInf
        lo = np.array([c.rhs if c.sense in (GE, EQ) else -inf for c in rows], dtype=float)
        hi = np.array([c.rhs if c.sense in (LE, EQ) else inf for c in rows], dtype=float)
        starts = np.zeros(len(rows), dtype=np.int32)
        nnz = 0
        for i, c in enumerate(rows):
            starts[i] = nnz
            nnz += c.index.size
        idx = np.concatenate([c.index for c in rows]).astype(np.int32)
        val = np.concatenate([c.coef for c in rows]).astype(float)
        st = self.h.addRows(len(rows), lo, hi, nnz, starts, idx, val)
        if st == _highs_module().HighsStatus.kError:
            raise SolverError("HiGHS rejected added rows")
        first = self.nrows
        self.nrows += len(rows)
        return list(range(first, self.nrows))

    def delete_rows(self, rows: list[int]) -> None:
        if rows:
            self.h.deleteRows(len(rows), np.asarray(sorted(rows), dtype=np.int32))
            self.nrows -= len(rows)

    def set_objective(self, c: np.ndarray, offset: float = 0.0) -> None:
        self.h.changeColsCost(self.n, np.arange(self.n, dtype=np.int32), np.asarray(c, float))
        self.h.changeObjectiveOffset(offset)

    def set_bounds(self, cols: list[int], lb: list[float], ub: list[float]) -> None:
        self.h.changeColsBounds(len(cols), np.asarray(cols, np.int32), np.asarray(lb, float),
                                np.asarray(ub, float))

    def solve(self) -> LpPoint:
        st = self.h.run()
        if st == _highs_module().HighsStatus.kError:
            raise SolverError(f"HiGHS LP failed: {self.h.modelStatusToString(self.h.getModelStatus())}")
        status = _status_from_highs(self.h, self.h.getModelStatus())
        sol = self.h.getSolution()
        values = np.array(sol.col_value, dtype=float)
        if status != OPTIMAL:
            return LpPoint(values, math.nan, status)
        duals = np.array(sol.row_dual, dtype=float)
        return LpPoint(values, float(self.h.getInfo().objective_function_value), OPTIMAL, duals)


class HighsBackend(Backend):
    name = "highs"

    def _new_highs(self):
        hp = _highs_module()
        h = hp.Highs()
        h.setOptionValue("output_flag", bool(self.log_file))
        if self.log_file:
            h.setOptionValue("log_to_console", False)
            h.setOptionValue("log_file", self.log_file)
        h.setOptionValue("threads", self.threads)
        h.setOptionValue("random_seed", int(self.seed))
        return h

    def open_lp(self, model: ModelSpec) -> _HighsLp:
        return _HighsLp(self, model)

    def _solve_mip_raw(self, model, time_limit, focus) -> MipResult:
        hp = _highs_module()
        lp = _HighsLp(self, model)
        h = lp.h
        integ = model.integrality()
        cols = np.flatnonzero(integ).astype(np.int32)
        if cols.size:
            h.changeColsIntegrality(cols.size, cols,
                                    np.full(cols.size, hp.HighsVarType.kInteger))
        if time_limit is not None:
            h.setOptionValue("time_limit", float(time_limit))
        if focus == "bound":
            # closest HiGHS analogue to a bound-focus setting
            h.setOptionValue("mip_heuristic_effort", 0.01)
        t0 = time.perf_counter()
        h.run()
        status = _status_from_highs(h, h.getModelStatus())
        info = h.getInfo()
        obj = float(info.objective_function_value) if info.primal_solution_status == 2 else math.inf
        bound = float(info.mip_dual_bound)
        if status == OPTIMAL and not math.isfinite(bound):
            bound = obj
        values = np.array(h.getSolution().col_value, dtype=float) if math.isfinite(obj) else None
        return MipResult(obj, bound, status, time.perf_counter() - t0,
                         int(info.mip_node_count), values)


# -- scipy ------------------------------------------------------------------

class _ScipyLp:
    def __init__(self, backend: "ScipyBackend", model: ModelSpec) -> None:
        self.model = model.copy()
        self.c = model.objective()
        self.offset = model.obj_offset
        self.alive: list[bool] = [True] * model.n_rows

    def add_rows(self, rows: Iterable[Constraint]) -> list[int]:
        first = sum(self.alive)
        rows = list(rows)
        for c in rows:
            self.model.constraints.append(c)
            self.alive.append(True)
        return list(range(first, first + len(rows)))

    def delete_rows(self, rows: list[int]) -> None:
        # keep positional ids stable for the caller: compact the live list
        live = [i for i, a in enumerate(self.alive) if a]
        drop = {live[r] for r in rows}
        for i in drop:
            self.alive[i] = False

    def set_objective(self, c: np.ndarray, offset: float = 0.0) -> None:
        self.c = np.asarray(c, float)
        self.offset = offset

    def set_bounds(self, cols, lb, ub) -> None:
        self.model = self.model.with_bounds({c: (l, u) for c, l, u in zip(cols, lb, ub)})

    def solve(self) -> LpPoint:
        from scipy.optimize import linprog

        rows = [i for i, a in enumerate(self.alive) if a]
        cons = [self.model.constraints[i] for i in rows]
        le = [i for i, c in enumerate(cons) if c.sense in (LE, GE)]
        eq = [i for i, c in enumerate(cons) if c.sense == EQ]
        A = self.model.row_matrix([rows[i] for i in le]) if le else None
        b = None
        if le:
            sign = np.array([1.0 if cons[i].sense == LE else -1.0 for i in le])
            A = A.multiply(sign[:, None]).tocsr()
            b = sign * np.array([cons[i].rhs for i in le])
        Aeq = self.model.row_matrix([rows[i] for i in eq]) if eq else None
        beq = np.array([cons[i].rhs for i in eq]) if eq else None
        lb, ub = self.model.bounds()
        bounds = list(zip(np.where(np.isinf(lb), None, lb), np.where(np.isinf(ub), None, ub)))
        res = linprog(self.c, A_ub=A, b_ub=b, A_eq=Aeq, b_eq=beq, bounds=bounds, method="highs")
        if res.status == 2:
            return LpPoint(np.zeros(len(self.c)), math.nan, INFEASIBLE)
        if res.status == 3:
            return LpPoint(np.zeros(len(self.c)), math.nan, UNBOUNDED)
        if res.status != 0:
            raise SolverError(f"linprog failed: {res.message}")
        duals = np.zeros(len(cons))
        if le:
            duals[le] = sign * res.ineqlin.marginals
        if eq:
            duals[eq] = res.eqlin.marginals
        return LpPoint(np.asarray(res.x, float), float(res.fun) + self.offset, OPTIMAL, duals)


class ScipyBackend(Backend):
    name = "scipy"

    def open_lp(self, model: ModelSpec) -> _ScipyLp:
        return _ScipyLp(self, model)

    def _solve_mip_raw(self, model, time_limit, focus) -> MipResult:
        from scipy.optimize import Bounds, LinearConstraint, milp

        lo, hi = model.row_bounds()
        cons = [LinearConstraint(model.row_matrix(), lo, hi)] if model.n_rows else []
        lb, ub = model.bounds()
        opts = {}
        if time_limit is not None:
            opts["time_limit"] = float(time_limit)
        t0 = time.perf_counter()
        res = milp(model.objective(), constraints=cons, integrality=model.integrality().astype(int),
                   bounds=Bounds(lb, ub), options=opts)
        wall = time.perf_counter() - t0
        if res.status == 0:
            obj = float(res.fun) + model.obj_offset
            bound = getattr(res, "mip_dual_bound", None)
            bound = obj if bound is None else float(bound) + model.obj_offset
            return MipResult(obj, bound, OPTIMAL, wall, int(getattr(res, "mip_node_count", 0) or 0),
                             np.asarray(res.x))
        if res.status == 1:
            obj = float(res.fun) + model.obj_offset if res.x is not None else math.inf
            bound = getattr(res, "mip_dual_bound", None)
            bound = -math.inf if bound is None else float(bound) + model.obj_offset
            return MipResult(obj, bound, LIMIT, wall, 0, res.x)
        if res.status == 2:
            return MipResult(math.inf, math.inf, INFEASIBLE, wall)
        if res.status == 3:
            return MipResult(-math.inf, -math.inf, UNBOUNDED, wall)
        raise SolverError(f"milp failed: {res.message}")


_BACKENDS = {"highs": HighsBackend, "scipy": ScipyBackend}


def get_backend(name: str = "highs", **kwargs) -> Backend:
    try:
        return _BACKENDS[name](**kwargs)
    except KeyError:
        raise ValueError(f"unknown backend {name!r}; choose from {sorted(_BACKENDS)}") from None


_default: Backend | None = None


def default_backend() -> Backend:
    global _default
    if _default is None:
        _default = HighsBackend()
    return _default


def solve_lp(model: ModelSpec, backend: Backend | None = None) -> LpPoint:
    return (backend or default_backend()).solve_lp(model)


def solve_mip(model: ModelSpec, time_limit: float | None = None, focus: str | None = None,
              root_cut_source: RootCutSource | None = None, backend: Backend | None = None,
              **kwargs) -> MipResult:
    return (backend or default_backend()).solve_mip(model, time_limit, focus, root_cut_source,
                                                     **kwargs)
