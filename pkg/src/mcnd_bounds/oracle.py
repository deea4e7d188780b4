"""Exhaustive enumeration of the single-arc set and a brute-force cut checker.

The single-arc set holds every 0/1 path selection with at most one path per
commodity, paired with either no capacity or exactly one capacity level ``t``
large enough for the selected demand.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .arcset import ArcSet
from .model import Cut, LE

__all__ = ["EnumeratedArcSet", "Verdict", "enumerate_S", "validate_cut", "MAX_ENUM_PATHS"]

MAX_ENUM_PATHS = 14


@dataclass(frozen=True)
class EnumeratedArcSet:
    """All points of the single-arc set.

    ``masks[i]`` packs the path selection of point ``i`` (bit ``j`` is
    ``columns[j]``), ``levels[i]`` is its capacity level (0 means no capacity).
    """

    arc: ArcSet
    columns: tuple[int, ...]
    masks: np.ndarray
    levels: np.ndarray

    def __len__(self) -> int:
        return len(self.masks)

    def bits(self) -> np.ndarray:
        j = np.arange(len(self.columns), dtype=np.int64)
        return ((self.masks[:, None] >> j) & 1).astype(bool)

    def points(self):
        """Yield ``(selected columns, t)`` pairs."""
        for m, t in zip(self.masks.tolist(), self.levels.tolist()):
            yield tuple(c for j, c in enumerate(self.columns) if m >> j & 1), t


@dataclass(frozen=True)
class Verdict:
    valid: bool
    witness: tuple | None = None
    violation: float = 0.0


def enumerate_S(arc: ArcSet) -> EnumeratedArcSet:
    if arc.n_paths > MAX_ENUM_PATHS:
        raise ValueError(f"arc {arc.arc}: {arc.n_paths} paths exceeds the enumeration limit "
                         f"of {MAX_ENUM_PATHS}")
    columns = tuple(arc.xvars)
    bit = {c: 1 << j for j, c in enumerate(columns)}
    # every choice of at most one path per commodity, with its load
    selections = [(0, 0)]
    for e in arc.entries:
        nxt = []
        for mask, load in selections:
            nxt.append((mask, load))
            for c in e.xvars:
                nxt.append((mask | bit[c], load + e.demand))
        selections = nxt
    masks, levels = [], []
    for mask, load in selections:
        for t in range(arc.t_max + 1):
            if load <= t * arc.q and (t > 0 or mask == 0):
                masks.append(mask)
                levels.append(t)
    return EnumeratedArcSet(arc, columns, np.array(masks, dtype=np.int64),
                            np.array(levels, dtype=np.int64))


def validate_cut(cut: Cut, pts: EnumeratedArcSet, tol: float = 1e-9) -> Verdict:
    """Check ``cut`` at every enumerated point; report the worst violating point."""
    if cut.sense != LE:
        raise ValueError("only packing cuts (x part <= y part) can be checked on the arc set")
    pos = {c: j for j, c in enumerate(pts.columns)}
    coef = np.zeros(len(pts.columns))
    for i, c in cut.x_coefs:
        if i not in pos:
            raise ValueError(f"cut references column {i}, which is not a path on arc {pts.arc.arc}")
        coef[pos[i]] = c
    alpha = np.zeros(pts.arc.t_max + 1)
    ylev = {v: t + 1 for t, v in enumerate(pts.arc.yvars)}
    for i, c in cut.y_coefs:
        if i not in ylev:
            raise ValueError(f"cut references column {i}, which is not a selector of arc {pts.arc.arc}")
        alpha[ylev[i]] = c
    lhs = pts.bits() @ coef
    slack = alpha[pts.levels] + cut.rhs - lhs
    worst = int(np.argmin(slack)) if len(slack) else 0
    if len(slack) and slack[worst] < -tol:
        mask, t = int(pts.masks[worst]), int(pts.levels[worst])
        sel = tuple(c for j, c in enumerate(pts.columns) if mask >> j & 1)
        return Verdict(False, (sel, t), float(-slack[worst]))
    return Verdict(True)
