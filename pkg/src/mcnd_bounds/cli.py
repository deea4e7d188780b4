"""Command line entry point: ``mcnd <command> ...``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict
from pathlib import Path as FsPath

from .arcset import arc_sets, make_arc_set
from .bench import format_table, run_canad_suite, run_ladder, write_csv
from .canad import read_canad
from .ecommerce import gen_group
from .icg import IcgConfig, run_icg
from .instance import Instance, read_canonical, write_canonical
from .metric import aggregate, lagrangian_loop
from .model import Cut, build_arc_fixed_model, build_bin_model
from .oracle import enumerate_S, validate_cut
from .sacpack import ARC_CAP_SECONDS, DEFAULT_EPS, separate_sacpack
from .gensacpack import rowgen_separate
from .solver import get_backend


def _load(path: str, fmt: str = "auto") -> Instance:
    if fmt == "canad" or (fmt == "auto" and not FsPath(path).read_text()[:64].lstrip().startswith("MCND")):
        return read_canad(path)
    return read_canonical(path)


def _cut_json(c: Cut) -> dict:
    return asdict(c)


def _cut_from_json(d: dict) -> Cut:
    return Cut(x_coefs=tuple((int(i), float(v)) for i, v in d.get("x_coefs", ())),
               y_coefs=tuple((int(i), float(v)) for i, v in d.get("y_coefs", ())),
               rhs=float(d.get("rhs", 0.0)), sense=d.get("sense", "<="),
               tag=d.get("tag", ""), arc=d.get("arc"))


def cmd_gen_instance(args) -> int:
    inst = gen_group(args.group, args.seed)
    write_canonical(inst, args.out)
    print(json.dumps(inst.summary()))
    return 0


def cmd_convert(args) -> int:
    if args.src != "canad" or args.dst != "canonical":
        raise SystemExit("only --from canad --to canonical is supported")
    inst = read_canad(args.input)
    if args.out:
        write_canonical(inst, args.out)
    else:
        write_canonical(inst, sys.stdout)
    return 0


def cmd_separate(args) -> int:
    inst = _load(args.instance, args.format)
    model = build_bin_model(inst) if inst.kind == "path" else build_arc_fixed_model(inst)
    backend = get_backend(args.backend)
    point = backend.solve_lp(model)
    cuts = []
    counts: dict[str, int] = {}
    for s in arc_sets(model, inst):
        if args.family == "sacpack":
            r = separate_sacpack(s, point, eps=args.eps, time_cap=args.arc_cap_seconds, backend=backend)
        else:
            r = rowgen_separate(s, point, B=args.B, max_iters=args.max_iters, backend=backend)
        counts[r.status] = counts.get(r.status, 0) + 1
        if r.found:
            cuts.append(r.cut)
    print(f"LP {point.objective:.6f}; arcs {counts}; {len(cuts)} violated cuts")
    for c in sorted(cuts, key=lambda c: -c.violation(point.values))[: args.show]:
        print(f"  arc {c.arc}: violation {c.violation(point.values):.6f}  {c.tag}")
    if args.out:
        FsPath(args.out).write_text(json.dumps([_cut_json(c) for c in cuts], indent=1))
    return 0


def cmd_metric(args) -> int:
    inst = _load(args.instance, args.format)
    backend = get_backend(args.backend)
    agg = aggregate(inst, args.mode)
    lp, point = build_bin_model(inst), None
    for r in range(args.rounds):
        res = lagrangian_loop(lp, agg, point, backend)
        print(f"round {r + 1}: LP {res.base_value:.4f} -> {res.value:.4f}; "
              f"{len(res.helpers)} helper, {len(res.integrals)} integral cuts")
        lp, point = res.model, None
    return 0


def cmd_icg(args) -> int:
    inst = _load(args.instance, args.format)
    cfg = IcgConfig(budget_seconds=args.budget_seconds, B=args.B, rounds=args.rounds, seed=args.seed,
                    metric=not args.no_metric, sacpack=not args.no_sacpack, post=not args.no_post,
                    rowgen=not args.no_rowgen, root_cut_mode=args.root_cuts)
    report = run_icg(inst, cfg, get_backend(args.backend, seed=args.seed))
    doc = json.dumps(report.to_dict(), indent=1, default=str)
    if args.report:
        FsPath(args.report).write_text(doc)
    print(f"{inst.name}: bound {report.bound:.2f}, incumbent {report.incumbent:.2f}, "
          f"gap {report.gap:.4%}, {report.helper_cuts} helper / {report.user_cuts} user cuts")
    return 0


def cmd_bench(args) -> int:
    configs = [c.strip() for c in args.configs.split(",") if c.strip()]
    backend = get_backend(args.backend)
    if args.suite == "canad":
        names = args.instances.split(",") if args.instances else None
        rows = run_canad_suite(names, configs, args.data_dir, backend, time_limit=args.time_limit)
    else:
        rows = []
        for path in args.instance:
            inst = _load(path, args.format)
            rows.extend(run_ladder(inst, configs, args.best_obj, backend, time_limit=args.time_limit))
    print(format_table(rows))
    if args.out:
        write_csv(rows, args.out)
    return 0


def cmd_oracle(args) -> int:
    doc = json.loads(FsPath(args.arc_file).read_text())
    arc = make_arc_set(doc.get("arc", 0), doc["q"], doc["t_max"], doc["entries"], doc.get("yvars"))
    raw = json.loads(FsPath(args.cut_file).read_text())
    cuts = [_cut_from_json(d) for d in (raw if isinstance(raw, list) else [raw])]
    pts = enumerate_S(arc)
    bad = 0
    for j, c in enumerate(cuts):
        v = validate_cut(c, pts)
        if v.valid:
            print(f"cut {j}: valid on {len(pts)} points")
        else:
            bad += 1
            print(f"cut {j}: INVALID, violated by {v.violation:g} at {v.witness}")
    return 1 if bad else 0


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="mcnd", description="Dual bounds for unsplittable network design")
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    def inst_args(p, many=False):
        if many:
            p.add_argument("--instance", action="append", default=[])
        else:
            p.add_argument("--instance", required=True)
        p.add_argument("--format", choices=["auto", "canonical", "canad"], default="auto")
        p.add_argument("--backend", choices=["highs", "scipy"], default="highs")

    p = sub.add_parser("gen-instance", help="generate a synthetic e-commerce instance")
    p.add_argument("--group", type=int, choices=[1, 2, 3], required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_gen_instance)

    p = sub.add_parser("convert", help="convert a Canad file to the canonical format")
    p.add_argument("input")
    p.add_argument("--from", dest="src", default="canad")
    p.add_argument("--to", dest="dst", default="canonical")
    p.add_argument("--out")
    p.set_defaults(func=cmd_convert)

    p = sub.add_parser("separate", help="one separation pass at the LP optimum")
    inst_args(p)
    p.add_argument("--family", choices=["sacpack", "gensacpack"], default="sacpack")
    p.add_argument("--arc-cap-seconds", type=float, default=ARC_CAP_SECONDS)
    p.add_argument("--eps", type=float, default=DEFAULT_EPS)
    p.add_argument("--B", type=int, default=3)
    p.add_argument("--max-iters", type=int, default=100)
    p.add_argument("--show", type=int, default=10)
    p.add_argument("--out", help="write the cuts as JSON")
    p.set_defaults(func=cmd_separate)

    p = sub.add_parser("metric", help="metric-cut generation with Lagrangian re-weighting")
    inst_args(p)
    p.add_argument("--mode", choices=["origin", "destination"], default="origin")
    p.add_argument("--rounds", type=int, default=2)
    p.set_defaults(func=cmd_metric)

    p = sub.add_parser("icg", help="run the two-phase cut-generation pipeline")
    inst_args(p)
    p.add_argument("--budget-seconds", type=float, default=600.0)
    p.add_argument("--B", type=int, default=3)
    p.add_argument("--rounds", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--root-cuts", choices=["loop", "off"], default="loop")
    for fam in ("metric", "sacpack", "post", "rowgen"):
        p.add_argument(f"--no-{fam}", action="store_true")
    p.add_argument("--report", help="write the report as JSON")
    p.set_defaults(func=cmd_icg)

    p = sub.add_parser("bench", help="configuration ladder")
    inst_args(p, many=True)
    p.add_argument("--suite", choices=["canad", "files"], default="files")
    p.add_argument("--instances", help="comma separated Canad names (default: all)")
    p.add_argument("--data-dir", help="Canad directory (default: $MCND_CANAD_DIR)")
    p.add_argument("--configs", default="a,b,d,e,f,g")
    p.add_argument("--best-obj", type=float)
    p.add_argument("--time-limit", type=float)
    p.add_argument("--out")
    p.set_defaults(func=cmd_bench)

    p = sub.add_parser("oracle", help="check cuts against the enumerated single-arc set")
    p.add_argument("--arc-file", required=True)
    p.add_argument("--cut-file", required=True)
    p.set_defaults(func=cmd_oracle)
    return ap


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
