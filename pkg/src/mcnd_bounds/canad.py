"""Reader for the Canad ``C`` fixed-charge network design instances.

Layout (one record per line, whitespace separated, node ids one-based)::

    [optional non-numeric title line, e.g. MULTIGEN.DAT:]
    <nodes> <arcs> <commodities>
    <tail> <head> <var cost> <capacity> <fixed cost> [extra fields ...]   # one per arc
    <origin> <dest> <demand>                                              # one per commodity

Extra trailing fields on arc lines are ignored. The result is an arc-based
:class:`~mcnd_bounds.instance.Instance` with zero-based node ids.
"""

from __future__ import annotations

import os
from pathlib import Path as FsPath

from .instance import ARC_BASED, Arc, Commodity, Instance, InstanceError, Node

__all__ = ["parse_canad", "read_canad", "find_canad", "CANAD_ENV"]

CANAD_ENV = "MCND_CANAD_DIR"


def _number(tok: str, lineno: int, what: str) -> float:
    try:
        return float(tok)
    except ValueError:
        raise InstanceError(f"line {lineno}: {what} {tok!r} is not a number") from None


def _integer(tok: str, lineno: int, what: str) -> int:
    v = _number(tok, lineno, what)
    if v != int(v):
        raise InstanceError(f"line {lineno}: {what} {tok!r} is not an integer")
    return int(v)


def parse_canad(text: str, name: str = "canad") -> Instance:
    lines = [(i + 1, ln.split()) for i, ln in enumerate(text.splitlines()) if ln.strip()]
    if lines and not lines[0][1][0].lstrip("+-").replace(".", "", 1).isdigit():
        lines = lines[1:]
    if not lines:
        raise InstanceError("line 1: missing header with node, arc and commodity counts")
    lineno, head = lines[0]
    if len(head) < 3:
        raise InstanceError(f"line {lineno}: header needs node, arc and commodity counts")
    n, m, K = (_integer(t, lineno, "count") for t in head[:3])
    if n < 1 or m < 0 or K < 0:
        raise InstanceError(f"line {lineno}: invalid counts {n} {m} {K}")
    body = lines[1:]
    if len(body) < m:
        last = body[-1][0] if body else lineno
        raise InstanceError(f"line {last}: header declares {m} arcs, found {len(body)} records")
    arcs = []
    for i, (ln, toks) in enumerate(body[:m]):
        if len(toks) < 5:
            raise InstanceError(f"line {ln}: arc record needs tail, head, var cost, capacity, fixed cost")
        tail, hd = _integer(toks[0], ln, "tail"), _integer(toks[1], ln, "head")
        c, cap, f = _number(toks[2], ln, "variable cost"), _integer(toks[3], ln, "capacity"), _number(toks[4], ln, "fixed cost")
        if not (1 <= tail <= n and 1 <= hd <= n):
            raise InstanceError(f"line {ln}: arc endpoint outside 1..{n}")
        if cap <= 0:
            raise InstanceError(f"line {ln}: capacity must be positive, got {cap}")
        if c < 0 or f < 0:
            raise InstanceError(f"line {ln}: costs must be non-negative")
        arcs.append(Arc(i, tail - 1, hd - 1, cap, f, c))
    rest = body[m:]
    if K == 0 or not rest:
        ln = rest[0][0] if rest else (body[-1][0] if body else lineno)
        raise InstanceError(f"line {ln}: commodity section is empty")
    if len(rest) != K:
        raise InstanceError(f"line {rest[-1][0]}: header declares {K} commodities, found {len(rest)} records")
    comms = []
    for k, (ln, toks) in enumerate(rest):
        if len(toks) != 3:
            raise InstanceError(f"line {ln}: commodity record needs origin, dest, demand")
        o, d, q = (_integer(t, ln, w) for t, w in zip(toks, ("origin", "dest", "demand")))
        if not (1 <= o <= n and 1 <= d <= n):
            raise InstanceError(f"line {ln}: commodity endpoint outside 1..{n}")
        if q <= 0:
            raise InstanceError(f"line {ln}: demand must be positive, got {q}")
        comms.append(Commodity(k, o - 1, d - 1, q))
    nodes = [Node(i) for i in range(n)]
    return Instance(nodes, arcs, comms, [], kind=ARC_BASED, name=name)


def read_canad(path: str | FsPath) -> Instance:
    path = FsPath(path)
    return parse_canad(path.read_text(), name=path.stem)


def find_canad(name: str, directory: str | FsPath | None = None) -> FsPath:
    """Locate the file for instance ``name`` (e.g. ``20-230-40-V-L``).

    Looks in ``directory`` or ``$MCND_CANAD_DIR`` for ``name``, ``name.dow``,
    ``name.txt`` and the ``c<name>.dow`` spelling used by the distributed set.
    """
    base = directory or os.environ.get(CANAD_ENV)
    if not base:
        raise FileNotFoundError(f"Canad data not found (set {CANAD_ENV})")
    base = FsPath(base)
    stem = name.replace("-", "")
    for cand in (name, f"{name}.dow", f"{name}.txt", f"c{name}.dow", f"c{stem}.dow", f"{stem}.dow"):
        p = base / cand
        if p.is_file():
            return p
    raise FileNotFoundError(f"Canad data for {name} not found in {base} (set {CANAD_ENV})")
