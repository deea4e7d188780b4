"""Integrated cut generation: a two-phase bounding pipeline on the BIN model.

Phase 1 works on the LP relaxation. Metric cuts are generated and priced
into the objective with their dual values; the re-weighted LP is then
tightened with SAC-Pack cuts, which moves the point the next metric pass
sees. Only the helper metric cuts survive into the MIP.

Phase 2 hands the strengthened model to the MIP solver. Because HiGHS has
no user-cut callback, the root relaxation is first tightened by a bounded cut
loop over the SAC-Pack family (plain, lifted and row-generated) and the
branch-and-bound run gets the rest of the time budget.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import asdict, dataclass, field

from .arcset import arc_sets
from .instance import Instance
from .metric import aggregate, lagrangian_loop
from .model import Cut, ModelSpec, build_bin_model
from .sacpack import _arc_is_integral, family_separator, saturate
from .solver import Backend, LpPoint, MipResult, get_backend

log = logging.getLogger(__name__)

__all__ = ["IcgConfig", "IcgReport", "run_icg", "bin_baseline"]

ROOT_CUT_MODES = ("loop", "off")


@dataclass(frozen=True)
class IcgConfig:
    budget_seconds: float = 600.0
    metric: bool = True
    sacpack: bool = True
    post: bool = True
    rowgen: bool = True
    B: int = 3
    rounds: int = 2
    root_cut_mode: str = "loop"
    agg_mode: str = "origin"
    seed: int = 0
    phase1_share: float = 0.25
    cut_loop_share: float = 0.15
    max_cut_rounds: int = 20
    max_cuts_per_round: int = 500
    saturation_rounds: int = 10
    purge_slack_cuts: bool = True
    focus: str | None = "bound"

    def __post_init__(self) -> None:
        if not self.budget_seconds > 0:
            raise ValueError("time budget must be positive")
        if self.B < 1:
            raise ValueError("B must be at least 1")
        if self.rounds < 1:
            raise ValueError("rounds must be at least 1")
        if self.root_cut_mode not in ROOT_CUT_MODES:
            raise ValueError(f"root cut mode must be one of {ROOT_CUT_MODES}")
        if not (0 <= self.phase1_share < 1 and 0 <= self.cut_loop_share < 1
                and self.phase1_share + self.cut_loop_share < 1):
            raise ValueError("phase shares must lie in [0, 1) and leave time for the MIP")


@dataclass
class IcgReport:
    instance: str
    config: dict
    helper_cuts: int = 0
    user_cuts: int = 0
    presolve_seconds: float = 0.0
    solve_seconds: float = 0.0
    bound: float = -math.inf
    incumbent: float = math.inf
    gap: float = math.inf
    status: str = ""
    lp_base: float = math.nan
    lp_final: float = math.nan
    phases: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        for k in ("bound", "incumbent", "gap"):
            if not math.isfinite(d[k]):
                d[k] = None
        return d


def _gap(incumbent: float, bound: float) -> float:
    if not math.isfinite(incumbent) or incumbent <= 0:
        return math.inf
    return max(0.0, (incumbent - bound) / incumbent)


def _cut_source(model: ModelSpec, inst: Instance, cfg: IcgConfig, backend: Backend,
                deadline: float, tally: dict):
    sep = family_separator(sacpack=cfg.sacpack, post=cfg.post,
                           rowgen_B=cfg.B if cfg.rowgen and cfg.B > 1 else None,
                           backend=backend, stats=tally, rowgen_fallback=True)
    sets = arc_sets(model, inst)
    seen: set = set()

    def source(point: LpPoint) -> list[Cut]:
        out: list[Cut] = []
        for s in sets:
            if time.perf_counter() > deadline or len(out) >= cfg.max_cuts_per_round:
                break
            if _arc_is_integral(s, point.values):
                continue
            for c in sep(s, point.values):
                key = (c.x_coefs, c.y_coefs)
                if key not in seen:
                    seen.add(key)
                    out.append(c)
        tally["rounds"] = tally.get("rounds", 0) + 1
        return out[: cfg.max_cuts_per_round]

    return source


def bin_baseline(inst: Instance, budget_seconds: float, backend: Backend | None = None,
                 focus: str | None = "bound") -> MipResult:
    """Plain BIN model solved for ``budget_seconds``; the reference ICG is measured against."""
    backend = backend or get_backend()
    return backend.solve_mip(build_bin_model(inst), time_limit=budget_seconds, focus=focus)


def run_icg(inst: Instance, cfg: IcgConfig | None = None, backend: Backend | None = None) -> IcgReport:
    cfg = cfg or IcgConfig()
    backend = backend or get_backend(seed=cfg.seed)
    t_start = time.perf_counter()
    report = IcgReport(inst.name, asdict(cfg))
    base = build_bin_model(inst)
    final = base.copy()
    lp0 = backend.solve_lp(base)
    report.lp_base = lp0.objective

    if cfg.metric:
        p1_deadline = t_start + cfg.phase1_share * cfg.budget_seconds
        helpers: list[Cut] = []
        p1 = {"metric_passes": 0, "integral_cuts": 0, "sacpack_rounds": 0, "sacpack_cuts": 0,
              "lp_values": [lp0.objective]}
        agg = aggregate(inst, cfg.agg_mode)
        lp, point = base, lp0
        for r in range(cfg.rounds):
            if time.perf_counter() > p1_deadline:
                break
            res = lagrangian_loop(lp, agg, point, backend)
            helpers.extend(res.helpers)
            p1["metric_passes"] += 1
            p1["integral_cuts"] += len(res.integrals)
            p1["lp_values"].append(res.value)
            lp, point = res.model, None
            if r == 0 and (cfg.sacpack or cfg.post):
                remaining = max(p1_deadline - time.perf_counter(), 0.0)
                sat = saturate(lp, inst, family_separator(sacpack=cfg.sacpack, post=cfg.post,
                                                          backend=backend),
                               max_rounds=cfg.saturation_rounds, backend=backend,
                               time_limit=remaining, max_cuts_per_round=cfg.max_cuts_per_round)
                p1["sacpack_rounds"] = sat.rounds
                p1["sacpack_cuts"] = len(sat.cuts)
                lp, point = sat.model, sat.point
        seen = set()
        for c in helpers:
            key = (c.y_coefs, round(c.rhs, 6))
            if key not in seen:
                seen.add(key)
                final.add_cut(c)
        report.helper_cuts = len(seen)
        report.phases["phase1"] = p1

    report.presolve_seconds = time.perf_counter() - t_start
    lp1 = backend.solve_lp(final)
    report.lp_final = lp1.objective
    remaining = max(cfg.budget_seconds - report.presolve_seconds, 1.0)
    source = None
    tally: dict = {}
    if cfg.root_cut_mode == "loop" and (cfg.sacpack or cfg.post or cfg.rowgen):
        deadline = time.perf_counter() + cfg.cut_loop_share * cfg.budget_seconds
        source = _cut_source(final, inst, cfg, backend, deadline, tally)
    res = backend.solve_mip(final, time_limit=remaining, focus=cfg.focus, root_cut_source=source,
                            max_cut_rounds=cfg.max_cut_rounds, purge_slack=cfg.purge_slack_cuts)
    report.user_cuts = res.cuts_added
    report.solve_seconds = res.wall_time
    report.bound = res.bound
    report.incumbent = res.objective
    report.gap = _gap(res.objective, res.bound)
    report.status = res.status
    report.phases["phase2"] = {"cut_rounds": res.cut_rounds, "cuts": res.cuts_added,
                               "separation": tally, "nodes": res.nodes,
                               "root_lp": res.extra.get("root_lp"),
                               "cut_rows_kept": res.extra.get("cut_rows_kept")}
    log.info("%s: bound %.2f incumbent %.2f (%d helper, %d user cuts)", inst.name, res.bound,
             res.objective, report.helper_cuts, report.user_cuts)
    return report
