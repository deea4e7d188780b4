"""Single-arc views of a model: the data a packing-cut separator needs for one arc."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .instance import Instance
from .model import ModelSpec

__all__ = ["ArcEntry", "ArcSet", "arc_sets", "make_arc_set"]


@dataclass(frozen=True)
class ArcEntry:
    """One commodity on the arc and the model columns of its paths through it."""

    commodity: int
    demand: int
    xvars: tuple[int, ...]


@dataclass(frozen=True)
class ArcSet:
    """Paths crossing one capacitated arc, grouped by commodity.

    ``entries`` are sorted by non-decreasing demand (ties by commodity id).
    ``yvars[t-1]`` is the column of the selector for ``t`` capacity units.
    """

    arc: int
    q: int
    t_max: int
    entries: tuple[ArcEntry, ...]
    yvars: tuple[int, ...]

    def __post_init__(self) -> None:
        if len(self.yvars) != self.t_max:
            raise ValueError(f"arc {self.arc}: {len(self.yvars)} selector columns for T_max={self.t_max}")
        for e in self.entries:
            if e.demand <= 0:
                raise ValueError(f"arc {self.arc}: non-positive demand for commodity {e.commodity}")
            if not e.xvars:
                raise ValueError(f"arc {self.arc}: commodity {e.commodity} has no path columns")

    @property
    def n_paths(self) -> int:
        return sum(len(e.xvars) for e in self.entries)

    @property
    def xvars(self) -> list[int]:
        return [v for e in self.entries for v in e.xvars]

    def demand_of(self) -> dict[int, int]:
        """Path column -> demand of its commodity."""
        return {v: e.demand for e in self.entries for v in e.xvars}

    def commodity_of(self) -> dict[int, int]:
        return {v: e.commodity for e in self.entries for v in e.xvars}

    def x_star(self, values: np.ndarray) -> np.ndarray:
        """Per-entry sum of the path values."""
        return np.array([sum(values[v] for v in e.xvars) for e in self.entries], dtype=float)

    def y_star(self, values: np.ndarray) -> np.ndarray:
        return np.asarray([values[v] for v in self.yvars], dtype=float)

    def restricted(self, keep: set[int]) -> "ArcSet":
        """Same arc with only the listed path columns (commodities left empty are dropped)."""
        entries = []
        for e in self.entries:
            xs = tuple(v for v in e.xvars if v in keep)
            if xs:
                entries.append(ArcEntry(e.commodity, e.demand, xs))
        return ArcSet(self.arc, self.q, self.t_max, tuple(entries), self.yvars)


def make_arc_set(arc: int, q: int, t_max: int, entries, yvars=None) -> ArcSet:
    """Build an :class:`ArcSet` from ``(commodity, demand, xvars)`` triples.

    Without ``yvars`` the selector columns are numbered after the path columns.
    """
    ents = [ArcEntry(int(k), int(d), tuple(int(v) for v in xs)) for k, d, xs in entries]
    ents.sort(key=lambda e: (e.demand, e.commodity))
    if yvars is None:
        top = max((v for e in ents for v in e.xvars), default=-1)
        yvars = tuple(range(top + 1, top + 1 + t_max))
    return ArcSet(arc, int(q), int(t_max), tuple(ents), tuple(yvars))


def arc_sets(model: ModelSpec, inst: Instance) -> list[ArcSet]:
    """One :class:`ArcSet` per capacitated arc of a BIN or arc-based model."""
    if model.kind not in ("BIN", "ARC"):
        raise ValueError(f"packing cuts need selector variables; model kind is {model.kind}")
    prof = inst.capacity_profile()
    out = []
    for a in inst.model_arcs:
        ys = model.cap_index[a]
        if model.kind == "ARC":
            entries = [(k.id, k.demand, (model.x_index[(k.id, a)],)) for k in inst.commodities]
        else:
            by_k: dict[int, list[int]] = {}
            for p in inst.paths_by_arc[a]:
                by_k.setdefault(inst.paths[p].commodity, []).append(model.x_index[p])
            entries = [(k, inst.commodities[k].demand, tuple(sorted(xs))) for k, xs in by_k.items()]
        out.append(make_arc_set(a, inst.arcs[a].capacity, prof.t_max[a] if model.kind == "BIN" else 1,
                                entries, tuple(ys)))
    return out
