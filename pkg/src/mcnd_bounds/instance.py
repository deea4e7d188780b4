"""Network design instances and the canonical text format.

An :class:`Instance` is either *path-based* (each commodity picks one path from
an explicit path set, capacity is installed in integer multiples of ``q_a``) or
*arc-based* (commodities route over arc-flow variables, each arc is switched
on or off with fixed capacity ``q_a``).

Canonical format
----------------
A whitespace separated text document. Lines starting with ``#`` are comments.
All ids are zero-based and rows appear in id order::

    MCND 1
    NAME <name>
    KIND path|arc
    NODES <n>
    <id> <role> <x> <y>
    ARCS <m>
    <id> <tail> <head> <q> <f> <c> <l> <C|D>
    COMMODITIES <K>
    <id> <origin> <dest> <demand>
    PATHS <P>
    <id> <commodity> <arc id> [<arc id> ...]
    END

``role`` is one of ``vendor``, ``fc``, ``dest`` or ``node``. Arc rows carry
unit capacity ``q``, fixed cost per installed unit ``f``, variable cost per
unit of demand ``c``, length ``l`` and a kind flag: ``C`` for a consolidation
arc (capacity is modelled) or ``D`` for a direct arc whose cost is folded into
the path cost and which is left out of the optimisation models. Floats are
written with ``repr`` so a write/read cycle is exact.
"""

from __future__ import annotations

import math
from collections import defaultdict
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path as FsPath
from typing import TextIO

__all__ = [
    "Node",
    "Arc",
    "Commodity",
    "Path",
    "Instance",
    "CapacityProfile",
    "InstanceError",
    "read_canonical",
    "write_canonical",
    "loads_canonical",
    "dumps_canonical",
]

PATH_BASED = "path"
ARC_BASED = "arc"
NODE_ROLES = ("vendor", "fc", "dest", "node")


class InstanceError(ValueError):
    """Malformed instance data."""


@dataclass(frozen=True)
class Node:
    id: int
    role: str = "node"
    x: float = 0.0
    y: float = 0.0


@dataclass(frozen=True)
class Arc:
    id: int
    tail: int
    head: int
    capacity: int
    fixed_cost: float
    var_cost: float
    length: float = 0.0
    direct: bool = False


@dataclass(frozen=True)
class Commodity:
    id: int
    origin: int
    dest: int
    demand: int


@dataclass(frozen=True)
class Path:
    id: int
    commodity: int
    arcs: tuple[int, ...]


@dataclass(frozen=True)
class CapacityProfile:
    """Per-arc capacity data derived from the path sets.

    ``t_max[a]`` is the largest number of capacity units arc ``a`` can ever
    need, ``t_min[(a, k)]`` the smallest number of units commodity ``k`` alone
    needs on ``a``. ``commodities[a]`` lists the commodities with a path
    through ``a`` (the pairs with inclusion indicator one).
    """

    t_max: dict[int, int]
    t_min: dict[tuple[int, int], int]
    commodities: dict[int, tuple[int, ...]]

    def includes(self, arc: int, commodity: int) -> bool:
        return (arc, commodity) in self.t_min


@dataclass
class Instance:
    nodes: list[Node]
    arcs: list[Arc]
    commodities: list[Commodity]
    paths: list[Path] = field(default_factory=list)
    kind: str = PATH_BASED
    name: str = "instance"
    meta: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self) -> None:
        self.validate()

    # -- validation -------------------------------------------------------
    def validate(self) -> None:
        if self.kind not in (PATH_BASED, ARC_BASED):
            raise InstanceError(f"unknown instance kind {self.kind!r}")
        for i, n in enumerate(self.nodes):
            if n.id != i:
                raise InstanceError(f"node ids must be 0..n-1, got {n.id} at {i}")
            if n.role not in NODE_ROLES:
                raise InstanceError(f"node {n.id}: unknown role {n.role!r}")
        nn = len(self.nodes)
        for i, a in enumerate(self.arcs):
            if a.id != i:
                raise InstanceError(f"arc ids must be 0..m-1, got {a.id} at {i}")
            if not (0 <= a.tail < nn and 0 <= a.head < nn) or a.tail == a.head:
                raise InstanceError(f"arc {a.id}: bad endpoints {a.tail}->{a.head}")
            if int(a.capacity) != a.capacity or a.capacity <= 0:
                raise InstanceError(f"arc {a.id}: capacity must be a positive integer")
            if a.fixed_cost < 0 or a.var_cost < 0 or a.length < 0:
                raise InstanceError(f"arc {a.id}: negative cost or length")
        for i, k in enumerate(self.commodities):
            if k.id != i:
                raise InstanceError(f"commodity ids must be 0..K-1, got {k.id} at {i}")
            if int(k.demand) != k.demand or k.demand <= 0:
                raise InstanceError(f"commodity {k.id}: demand must be a positive integer")
            if not (0 <= k.origin < nn and 0 <= k.dest < nn) or k.origin == k.dest:
                raise InstanceError(f"commodity {k.id}: bad origin/destination")
        seen: set[tuple[int, tuple[int, ...]]] = set()
        for i, p in enumerate(self.paths):
            if p.id != i:
                raise InstanceError(f"path ids must be 0..P-1, got {p.id} at {i}")
            if not 0 <= p.commodity < len(self.commodities):
                raise InstanceError(f"path {p.id}: unknown commodity {p.commodity}")
            self._check_walk(p)
            key = (p.commodity, p.arcs)
            if key in seen:
                raise InstanceError(f"path {p.id}: duplicate path for commodity {p.commodity}")
            seen.add(key)
        if self.kind == PATH_BASED:
            have = {p.commodity for p in self.paths}
            missing = [k.id for k in self.commodities if k.id not in have]
            if missing:
                raise InstanceError(f"commodities without paths: {missing[:10]}")

    def _check_walk(self, p: Path) -> None:
        if not p.arcs:
            raise InstanceError(f"path {p.id}: empty arc sequence")
        k = self.commodities[p.commodity]
        at = k.origin
        for a_id in p.arcs:
            if not 0 <= a_id < len(self.arcs):
                raise InstanceError(f"path {p.id}: unknown arc {a_id}")
            a = self.arcs[a_id]
            if a.tail != at:
                raise InstanceError(
                    f"path {p.id}: arc {a_id} starts at {a.tail}, expected {at} (not adjoined)"
                )
            at = a.head
        if at != k.dest:
            raise InstanceError(f"path {p.id}: ends at {at}, expected destination {k.dest}")

    # -- derived data -----------------------------------------------------
    @cached_property
    def paths_by_commodity(self) -> dict[int, list[int]]:
        out: dict[int, list[int]] = defaultdict(list)
        for p in self.paths:
            out[p.commodity].append(p.id)
        return dict(out)

    @cached_property
    def paths_by_arc(self) -> dict[int, list[int]]:
        """Path ids crossing each capacitated arc (direct arcs excluded)."""
        out: dict[int, list[int]] = defaultdict(list)
        for p in self.paths:
            for a in p.arcs:
                if not self.arcs[a].direct:
                    out[a].append(p.id)
        return dict(out)

    @cached_property
    def model_arcs(self) -> list[int]:
        """Capacitated arcs that enter the optimisation models, ascending id."""
        if self.kind == ARC_BASED:
            return [a.id for a in self.arcs if not a.direct]
        return sorted(self.paths_by_arc)

    def path_cost(self, path_id: int) -> float:
        """Variable cost per unit of demand along a path."""
        return float(sum(self.arcs[a].var_cost for a in self.paths[path_id].arcs))

    def capacity_profile(self) -> CapacityProfile:
        if self.kind == ARC_BASED:
            comms = tuple(k.id for k in self.commodities)
            t_min = {}
            for a in self.model_arcs:
                for k in self.commodities:
                    t_min[(a, k.id)] = math.ceil(k.demand / self.arcs[a].capacity)
            return CapacityProfile(
                t_max={a: 1 for a in self.model_arcs},
                t_min=t_min,
                commodities={a: comms for a in self.model_arcs},
            )
        t_max: dict[int, int] = {}
        t_min: dict[tuple[int, int], int] = {}
        comms: dict[int, tuple[int, ...]] = {}
        for a, pids in self.paths_by_arc.items():
            ks = sorted({self.paths[p].commodity for p in pids})
            q = self.arcs[a].capacity
            total = sum(self.commodities[k].demand for k in ks)
            t_max[a] = math.ceil(total / q)
            if t_max[a] < 1:
                raise InstanceError(f"arc {a}: T_max computed as {t_max[a]}")
            for k in ks:
                t_min[(a, k)] = math.ceil(self.commodities[k].demand / q)
            comms[a] = tuple(ks)
        return CapacityProfile(t_max=t_max, t_min=t_min, commodities=comms)

    @property
    def total_demand(self) -> int:
        return sum(k.demand for k in self.commodities)

    def summary(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "nodes": len(self.nodes),
            "arcs": len(self.arcs),
            "consolidation_arcs": sum(not a.direct for a in self.arcs),
            "commodities": len(self.commodities),
            "paths": len(self.paths),
            "total_demand": self.total_demand,
        }


# -- canonical format -------------------------------------------------------

def _fmt(v: float) -> str:
    if float(v).is_integer() and abs(v) < 1e15:
        return str(int(v))
    return repr(float(v))


def dumps_canonical(inst: Instance) -> str:
    out = ["MCND 1", f"NAME {inst.name}", f"KIND {inst.kind}", f"NODES {len(inst.nodes)}"]
    out += [f"{n.id} {n.role} {_fmt(n.x)} {_fmt(n.y)}" for n in inst.nodes]
    out.append(f"ARCS {len(inst.arcs)}")
    out += [
        f"{a.id} {a.tail} {a.head} {a.capacity} {_fmt(a.fixed_cost)} {_fmt(a.var_cost)} "
        f"{_fmt(a.length)} {'D' if a.direct else 'C'}"
        for a in inst.arcs
    ]
    out.append(f"COMMODITIES {len(inst.commodities)}")
    out += [f"{k.id} {k.origin} {k.dest} {k.demand}" for k in inst.commodities]
    out.append(f"PATHS {len(inst.paths)}")
    out += [f"{p.id} {p.commodity} " + " ".join(map(str, p.arcs)) for p in inst.paths]
    out.append("END")
    return "\n".join(out) + "\n"


def write_canonical(inst: Instance, dest: str | FsPath | TextIO) -> None:
    text = dumps_canonical(inst)
    if hasattr(dest, "write"):
        dest.write(text)
    else:
        FsPath(dest).write_text(text)


def _records(lines: list[tuple[int, list[str]]], pos: int, header: str):
    lineno, toks = lines[pos]
    if toks[0] != header or len(toks) != 2:
        raise InstanceError(f"line {lineno}: expected '{header} <count>'")
    n = int(toks[1])
    body = lines[pos + 1 : pos + 1 + n]
    if len(body) != n:
        raise InstanceError(f"line {lineno}: {header} declares {n} rows, found {len(body)}")
    return body, pos + 1 + n


def loads_canonical(text: str) -> Instance:
    lines = [
        (i + 1, ln.split())
        for i, ln in enumerate(text.splitlines())
        if ln.strip() and not ln.lstrip().startswith("#")
    ]
    if not lines or lines[0][1][:1] != ["MCND"]:
        raise InstanceError("missing 'MCND' header")
    name = "instance"
    kind = PATH_BASED
    pos = 1
    while lines[pos][1][0] in ("NAME", "KIND"):
        key, *rest = lines[pos][1]
        if key == "NAME":
            name = " ".join(rest)
        else:
            kind = rest[0]
        pos += 1
    try:
        body, pos = _records(lines, pos, "NODES")
        nodes = [Node(int(t[0]), t[1], float(t[2]), float(t[3])) for _, t in body]
        body, pos = _records(lines, pos, "ARCS")
        arcs = []
        for ln, t in body:
            if len(t) != 8 or t[7] not in ("C", "D"):
                raise InstanceError(f"line {ln}: arc row needs 8 fields ending in C or D")
            arcs.append(
                Arc(int(t[0]), int(t[1]), int(t[2]), int(t[3]), float(t[4]), float(t[5]),
                    float(t[6]), t[7] == "D")
            )
        body, pos = _records(lines, pos, "COMMODITIES")
        comms = [Commodity(int(t[0]), int(t[1]), int(t[2]), int(t[3])) for _, t in body]
        body, pos = _records(lines, pos, "PATHS")
        paths = [Path(int(t[0]), int(t[1]), tuple(int(x) for x in t[2:])) for _, t in body]
    except (IndexError, ValueError) as exc:
        if isinstance(exc, InstanceError):
            raise
        raise InstanceError(f"malformed canonical instance: {exc}") from exc
    if pos >= len(lines) or lines[pos][1] != ["END"]:
        raise InstanceError("missing END marker")
    return Instance(nodes, arcs, comms, paths, kind=kind, name=name)


def read_canonical(source: str | FsPath | TextIO) -> Instance:
    if hasattr(source, "read"):
        return loads_canonical(source.read())
    return loads_canonical(FsPath(source).read_text())

