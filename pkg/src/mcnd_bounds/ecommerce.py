"""Synthetic e-commerce fulfillment instances.

Vendors ship to destinations either directly (truckload or less-than-truckload
on a direct arc whose cost is folded into the path) or through fulfillment
centers (FCs) on consolidation arcs that carry trucks of fixed capacity. FCs
also originate their own commodities.

Locations are uniform in a ``width x height`` mile rectangle and distances are
Euclidean. Demands are log-normal with the configured mean and shape; this is
a documented stand-in for the empirical volume data the real instances use.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import asdict, dataclass

import numpy as np

from .instance import Arc, Commodity, Instance, InstanceError, Node, Path

__all__ = [
    "LtlCostTable",
    "EcommerceGenParams",
    "GROUPS",
    "generate_ecommerce",
    "gen_group",
]


@dataclass(frozen=True)
class LtlCostTable:
    """Per-shipment cost of a direct arc of length ``l`` carrying volume ``v``.

    Truckload costs ``750 + 1.27 l`` per truck of ``truck_capacity`` lbs. The
    three less-than-truckload tiers cover ``(0, 2000]``, ``(2000, 2700]`` and
    ``(2700, 4000]``. The direct cost is the cheapest applicable mode.
    """

    truck_capacity: int = 12_000
    truck_base: float = 750.0
    truck_per_mile: float = 1.27
    ltl_share: float = 0.05
    rate_base: float = 0.234
    rate_per_mile: float = 0.0004
    ltl3_discount: float = 0.8
    breaks: tuple[int, int, int] = (2_000, 2_700, 4_000)

    def truckload(self, l: float) -> float:
        return self.truck_base + self.truck_per_mile * l

    def modes(self, v: float, l: float) -> dict[str, float]:
        """Cost of every mode that can carry ``v``."""
        if v <= 0:
            raise ValueError("volume must be positive")
        if l < 0:
            raise ValueError("length must be non-negative")
        rate = self.rate_base + self.rate_per_mile * l
        b1, b2, b3 = self.breaks
        out = {"TL": math.ceil(v / self.truck_capacity) * self.truckload(l)}
        if v <= b1:
            out["LTL1"] = self.ltl_share * self.truckload(l) + v * rate
        elif v <= b2:
            out["LTL2"] = self.ltl_share * self.truckload(l) + b1 * rate
        elif v <= b3:
            out["LTL3"] = self.ltl3_discount * v * rate
        return out

    def mode(self, v: float, l: float) -> str:
        m = self.modes(v, l)
        return min(m, key=m.get)

    def cost(self, v: float, l: float) -> float:
        return min(self.modes(v, l).values())


@dataclass(frozen=True)
class EcommerceGenParams:
    n_vendors: int
    n_fcs: int
    n_dests: int
    retention: float = 0.6
    fcs_per_dest: int = 5
    detour: float = 1.1
    max_arcs: int = 3
    capacity: int = 12_000
    demand_mean: float = 2_700.0
    demand_sigma: float = 1.0
    width: float = 3_000.0
    height: float = 1_500.0
    seed: int = 0

    def __post_init__(self) -> None:
        if min(self.n_vendors, self.n_fcs, self.n_dests) < 1:
            raise ValueError("need at least one vendor, FC and destination")
        if not 0 < self.retention <= 1:
            raise ValueError("retention must lie in (0, 1]")
        if self.detour < 1:
            raise ValueError("detour factor must be at least 1")
        if self.max_arcs < 1:
            raise ValueError("max_arcs must be at least 1")
        if self.fcs_per_dest > self.n_fcs:
            raise ValueError(f"{self.fcs_per_dest} FCs per destination requested but only "
                             f"{self.n_fcs} FCs exist")
        if self.capacity <= 0 or self.demand_mean <= 0 or self.demand_sigma < 0:
            raise ValueError("capacity and demand parameters must be positive")


GROUPS = {1: (20, 5, 15), 2: (90, 9, 55), 3: (105, 10, 65)}


def gen_group(group: int, seed: int, **overrides) -> Instance:
    """Instance with the vendor/FC/destination counts of size group 1, 2 or 3."""
    try:
        nv, nf, nd = GROUPS[group]
    except KeyError:
        raise ValueError(f"unknown group {group}; choose from {sorted(GROUPS)}") from None
    inst = generate_ecommerce(EcommerceGenParams(nv, nf, nd, seed=seed, **overrides))
    inst.name = f"ecom-g{group}-s{seed}"
    return inst


def generate_ecommerce(params: EcommerceGenParams, table: LtlCostTable | None = None) -> Instance:
    table = table or LtlCostTable()
    rng = np.random.default_rng(params.seed)
    nv, nf, nd = params.n_vendors, params.n_fcs, params.n_dests
    vendors = list(range(nv))
    fcs = list(range(nv, nv + nf))
    dests = list(range(nv + nf, nv + nf + nd))
    xy = np.column_stack([rng.uniform(0, params.width, nv + nf + nd),
                          rng.uniform(0, params.height, nv + nf + nd)])
    roles = ["vendor"] * nv + ["fc"] * nf + ["dest"] * nd
    nodes = [Node(i, roles[i], float(xy[i, 0]), float(xy[i, 1])) for i in range(len(roles))]

    def dist(i: int, j: int) -> float:
        return float(np.hypot(*(xy[i] - xy[j])))

    pairs = [(v, d) for v in vendors for d in dests]
    n_keep = max(1, round(params.retention * len(pairs)))
    keep = sorted(rng.choice(len(pairs), size=n_keep, replace=False).tolist())
    od = [pairs[i] for i in keep]
    for d in dests:
        nearest = sorted(fcs, key=lambda f: (dist(f, d), f))[: params.fcs_per_dest]
        od.extend((f, d) for f in sorted(nearest))
    mu = math.log(params.demand_mean) - params.demand_sigma ** 2 / 2
    demands = np.maximum(1, np.rint(rng.lognormal(mu, params.demand_sigma, len(od)))).astype(int)
    commodities = [Commodity(k, o, d, int(demands[k])) for k, (o, d) in enumerate(od)]

    def nearest_fc(node: int, exclude: int) -> int | None:
        cand = [f for f in fcs if f != exclude]
        return min(cand, key=lambda f: (dist(node, f), f)) if cand else None

    def length(seq: tuple[int, ...]) -> float:
        return sum(dist(a, b) for a, b in zip(seq, seq[1:]))

    node_paths: list[list[tuple[int, ...]]] = []
    for k in commodities:
        o, d = k.origin, k.dest
        direct = length((o, d))
        mids = [f for f in fcs if f != o]
        out: list[tuple[int, ...]] = [(o, d)]
        if params.max_arcs >= 2 and mids:
            out.append(min(((o, f, d) for f in mids), key=lambda s: (length(s), s)))
            f_o, f_d = nearest_fc(o, o), nearest_fc(d, o)
            out.append((o, f_o, d))
            out.append((o, f_d, d))
            if params.max_arcs >= 3 and f_o != f_d:
                out.append((o, f_o, f_d, d))
        limit = params.detour * direct
        extra = []
        if params.max_arcs >= 2:
            extra += [(o, f, d) for f in mids]
        if params.max_arcs >= 3:
            extra += [(o, f, g, d) for f, g in itertools.permutations(mids, 2)]
        extra = sorted((s for s in extra if length(s) <= limit + 1e-9), key=lambda s: (length(s), s))
        seen: set[tuple[int, ...]] = set()
        uniq = []
        for s in out + extra:
            if s not in seen:
                seen.add(s)
                uniq.append(s)
        node_paths.append(uniq)

    # arcs actually used, consolidation arcs first, each group by (tail, head)
    vendor_set = set(vendors)
    dest_set = set(dests)
    used = {(a, b) for seqs in node_paths for s in seqs for a, b in zip(s, s[1:])}
    is_direct = {e: e[0] in vendor_set and e[1] in dest_set for e in used}
    order = sorted(used, key=lambda e: (is_direct[e], e))
    arc_id = {e: i for i, e in enumerate(order)}
    direct_volume = {}
    for k in commodities:
        if (k.origin, k.dest) in arc_id and is_direct[(k.origin, k.dest)]:
            direct_volume[(k.origin, k.dest)] = k.demand
    arcs = []
    for e in order:
        l = dist(*e)
        if is_direct[e]:
            v = direct_volume[e]
            arcs.append(Arc(arc_id[e], e[0], e[1], params.capacity, 0.0, table.cost(v, l) / v, l, True))
        else:
            arcs.append(Arc(arc_id[e], e[0], e[1], params.capacity, table.truckload(l), 0.0, l, False))
    paths = []
    for k, seqs in zip(commodities, node_paths):
        for s in seqs:
            paths.append(Path(len(paths), k.id, tuple(arc_id[(a, b)] for a, b in zip(s, s[1:]))))
    try:
        inst = Instance(nodes, arcs, commodities, paths, name=f"ecom-{nv}-{nf}-{nd}-s{params.seed}")
    except InstanceError as exc:
        raise InstanceError(f"generator produced an invalid instance: {exc}") from exc
    inst.meta["params"] = asdict(params)
    inst.meta["ltl_table"] = asdict(table)
    inst.meta["direct_modes"] = {arc_id[e]: table.mode(v, dist(*e)) for e, v in direct_volume.items()}
    return inst
