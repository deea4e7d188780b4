"""Configuration ladder and the Canad reproduction suite.

The ladder is cumulative: each configuration starts from the model the
previous one finished with and adds one cut family, so bounds never go down
along ``a -> d -> e -> f -> g``. Configuration ``b`` (disaggregated linking
rows) branches off ``a`` on its own.
"""

from __future__ import annotations

import csv
import io
import logging
import math
import time
from dataclasses import asdict, dataclass, fields
from importlib import resources
from pathlib import Path as FsPath

from .canad import find_canad, read_canad
from .instance import ARC_BASED, Instance
from .model import ModelSpec, add_disaggregated_linking, build_arc_fixed_model, build_bin_model
from .sacpack import family_separator, saturate
from .solver import Backend, default_backend

log = logging.getLogger(__name__)

__all__ = [
    "CONFIGS",
    "ConfigLadderEntry",
    "run_ladder",
    "load_reference",
    "run_canad_suite",
    "write_csv",
    "read_csv",
    "format_table",
]

CONFIGS = {
    "a": "LP relaxation",
    "b": "LP + disaggregated linking rows",
    "c": "LP + split cuts (not implemented)",
    "d": "LP + SAC-Pack cuts",
    "e": "(d) + lifted Gen-SAC-Pack cuts",
    "f": "(e) + row-generated Gen-SAC-Pack cuts, B <= 3",
    "g": "(f) + row-generated Gen-SAC-Pack cuts, B <= 10",
    "dc-order": "SAC-Pack after split cuts (not implemented)",
}
UNIMPLEMENTED = {"c", "dc-order"}
LADDER_ORDER = ["a", "b", "c", "d", "e", "f", "g", "dc-order"]


@dataclass
class ConfigLadderEntry:
    instance: str
    config: str
    description: str
    lpr: float | None = None
    cuts: int = 0
    cut_time: float = 0.0
    rounds: int = 0
    gap: float | None = None
    improvement: float | None = None
    best_obj: float | None = None
    base_lpr: float | None = None
    truncated: bool = False
    implemented: bool = True


def _base_model(inst: Instance) -> ModelSpec:
    return build_arc_fixed_model(inst) if inst.kind == ARC_BASED else build_bin_model(inst)


def run_ladder(inst: Instance, configs=("a", "b", "d", "e", "f", "g"), best_obj: float | None = None,
               backend: Backend | None = None, max_rounds: int = 200,
               time_limit: float | None = None, rowgen_iters: int = 100) -> list[ConfigLadderEntry]:
    """LP bound of every requested configuration on ``inst``.

    ``time_limit`` caps the saturation of each cut configuration separately.
    Gaps and improvements are left empty when ``best_obj`` is unknown.
    """
    unknown = set(configs) - set(CONFIGS)
    if unknown:
        raise ValueError(f"unknown configurations {sorted(unknown)}")
    backend = backend or default_backend()
    wanted = [c for c in LADDER_ORDER if c in configs]
    base = _base_model(inst)
    a_point = backend.solve_lp(base)
    if not a_point.optimal:
        raise RuntimeError(f"{inst.name}: LP relaxation is {a_point.status}")
    base_lpr = a_point.objective
    out: list[ConfigLadderEntry] = []

    def entry(cfg: str, **kw) -> ConfigLadderEntry:
        e = ConfigLadderEntry(inst.name, cfg, CONFIGS[cfg], best_obj=best_obj, base_lpr=base_lpr, **kw)
        if e.lpr is not None and best_obj is not None:
            e.gap = (best_obj - e.lpr) / best_obj
            if base_lpr < best_obj:
                e.improvement = (e.lpr - base_lpr) / (best_obj - base_lpr)
        out.append(e)
        return e

    steps = {
        "d": dict(sacpack=True),
        "e": dict(sacpack=True, post=True),
        "f": dict(sacpack=True, post=True, rowgen_B=3),
        "g": dict(sacpack=True, post=True, rowgen_B=10),
    }
    model, cuts, cut_time, rounds = base, 0, 0.0, 0
    for cfg in wanted:
        if cfg in UNIMPLEMENTED:
            entry(cfg, implemented=False)
        elif cfg == "a":
            entry("a", lpr=base_lpr)
        elif cfg == "b":
            linked = base.copy()
            t0 = time.perf_counter()
            n = add_disaggregated_linking(linked, inst)
            p = backend.solve_lp(linked)
            entry("b", lpr=p.objective, cuts=n, cut_time=time.perf_counter() - t0)
        else:
            sep = family_separator(backend=backend, max_iters=rowgen_iters, **steps[cfg])
            t0 = time.perf_counter()
            sat = saturate(model, inst, sep, max_rounds=max_rounds, backend=backend,
                           time_limit=time_limit)
            cut_time += time.perf_counter() - t0
            model = sat.model
            cuts += len(sat.cuts)
            rounds += sat.rounds
            entry(cfg, lpr=sat.lp_value, cuts=cuts, cut_time=cut_time, rounds=rounds,
                  truncated=sat.truncated)
        log.info("%s %s: %s", inst.name, cfg, out[-1].lpr)
    return out


def load_reference() -> dict[str, dict[str, float]]:
    """Published best objectives and LP bounds for the Canad ``C`` instances (shipped data)."""
    text = resources.files("mcnd_bounds").joinpath("data/canad_reference.csv").read_text()
    table = {}
    for row in csv.DictReader(io.StringIO(text)):
        name = row.pop("instance")
        table[name] = {k: float(v) for k, v in row.items() if v not in ("", None)}
    return table


def run_canad_suite(names=None, configs=("a", "b", "d", "e", "f", "g"), directory=None,
                    backend: Backend | None = None, **kwargs) -> list[ConfigLadderEntry]:
    """Ladder over the Canad instances found in ``directory`` (or ``$MCND_CANAD_DIR``)."""
    ref = load_reference()
    names = list(ref) if names is None else list(names)
    rows: list[ConfigLadderEntry] = []
    for name in names:
        inst = read_canad(find_canad(name, directory))
        inst.name = name
        best = ref.get(name, {}).get("best_obj")
        rows.extend(run_ladder(inst, configs, best, backend, **kwargs))
    return rows


_FIELDS = [f.name for f in fields(ConfigLadderEntry)]


def write_csv(entries: list[ConfigLadderEntry], dest: str | FsPath | io.TextIOBase) -> None:
    own = not hasattr(dest, "write")
    fh = open(dest, "w", newline="") if own else dest
    try:
        w = csv.DictWriter(fh, fieldnames=_FIELDS)
        w.writeheader()
        for e in entries:
            w.writerow({k: ("" if v is None else v) for k, v in asdict(e).items()})
    finally:
        if own:
            fh.close()


def read_csv(source: str | FsPath) -> list[ConfigLadderEntry]:
    types = {f.name: f.type for f in fields(ConfigLadderEntry)}
    out = []
    with open(source, newline="") as fh:
        for row in csv.DictReader(fh):
            kw = {}
            for k, v in row.items():
                t = types[k]
                if v == "":
                    kw[k] = None
                elif "bool" in t:
                    kw[k] = v == "True"
                elif t == "int":
                    kw[k] = int(v)
                elif "float" in t:
                    kw[k] = float(v)
                else:
                    kw[k] = v
            out.append(ConfigLadderEntry(**kw))
    return out


def _fmt(v, pct=False) -> str:
    if v is None or (isinstance(v, float) and math.isnan(v)):
        return "-"
    return f"{100 * v:.1f}%" if pct else f"{v:,.1f}"


def format_table(entries: list[ConfigLadderEntry]) -> str:
    head = f"{'instance':<18} {'cfg':<8} {'LPR':>14} {'cuts':>7} {'time s':>8} {'gap':>7} {'impr':>7}"
    lines = [head, "-" * len(head)]
    for e in entries:
        if not e.implemented:
            lines.append(f"{e.instance:<18} {e.config:<8} {'not implemented':>14}")
            continue
        lines.append(f"{e.instance:<18} {e.config:<8} {_fmt(e.lpr):>14} {e.cuts:>7d} "
                     f"{e.cut_time:>8.1f} {_fmt(e.gap, True):>7} {_fmt(e.improvement, True):>7}")
    return "\n".join(lines)
