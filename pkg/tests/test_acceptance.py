"""Acceptance criteria, one test each; verdict lines appear in the terminal summary.

The two Canad criteria need the Canad C instances in ``$MCND_CANAD_DIR``.
The ICG and formulation criteria take roughly 100 and 50 minutes on one core.
"""

import statistics
import time

import numpy as np
import pytest

from mcnd_bounds.arcset import arc_sets, make_arc_set
from mcnd_bounds.bench import load_reference, run_canad_suite
from mcnd_bounds.ecommerce import EcommerceGenParams, gen_group, generate_ecommerce
from mcnd_bounds.gensacpack import rowgen_separate
from mcnd_bounds.icg import IcgConfig, bin_baseline, run_icg
from mcnd_bounds.knapsack import alpha_coefficients, min_knapsack_bisect
from mcnd_bounds.metric import aggregate, generate_metric_cuts
from mcnd_bounds.model import add_disaggregated_linking, build_bin_model, build_int_model
from mcnd_bounds.oracle import enumerate_S, validate_cut
from mcnd_bounds.sacpack import packing_cut, postprocess_lift, separate_sacpack
from mcnd_bounds.solver import get_backend, solve_lp
from conftest import single_arc_instance
from oracles import (
    brute_alpha,
    fenchel_value,
    integer_points,
    random_arc,
    random_point,
    tiny_instance,
    weight_dp_knapsack,
)

SPOT = ["20-230-40-V-L", "20-230-40-V-T", "20-300-40-V-L", "30-700-100-V-L"]
SEEDS = range(5)


def _installed_on_arc0(model, values):
    ys = model.cap_index[0]
    if model.kind == "INT":
        return values[ys[0]]
    return sum(t * values[c] for t, c in enumerate(ys, start=1))


def _pinned(model, inst, flows):
    bounds = {}
    for k, v in enumerate(flows):
        p = next(p for p in inst.paths_by_commodity[k] if inst.paths[p].arcs == (0,))
        bounds[model.x_index[p]] = (v, v)
    return model.with_bounds(bounds)


def test_worked_examples(criterion):
    with criterion("worked examples") as c:
        t0 = time.perf_counter()
        tol = 1e-6
        inst = single_arc_instance([5, 105])
        got = {}
        for build in (build_int_model, build_bin_model):
            m = _pinned(build(inst), inst, [0.75, 0.5])
            got[m.kind, 0] = _installed_on_arc0(m, solve_lp(m).values)
            add_disaggregated_linking(m, inst)
            got[m.kind, 1] = _installed_on_arc0(m, solve_lp(m).values)
        assert abs(got["BIN", 0] - 0.5625) < tol and abs(got["INT", 0] - 0.5625) < tol
        assert abs(got["INT", 1] - 1.0) < tol and abs(got["BIN", 1] - 1.25) < tol

        inst = single_arc_instance([60, 70])
        m = _pinned(build_bin_model(inst), inst, [0.5, 0.4])
        p = solve_lp(m)
        base = _installed_on_arc0(m, p.values)
        r = separate_sacpack(arc_sets(m, inst)[0], p)
        m.add_cut(r.cut)
        after = _installed_on_arc0(m, solve_lp(m).values)
        assert abs(base - 0.58) < tol and abs(after - 0.9) < tol

        arc = make_arc_set(0, 100, 2, [(1, 30, [0]), (2, 30, [1]), (3, 30, [2]), (4, 60, [3])])
        vals = np.array([0.5, 0.5, 0.5, 0.5, 0.75, 0.0])
        cut = packing_cut(arc, [0, 1, 2, 3])
        lifted = postprocess_lift(cut, arc, vals)
        assert cut.alphas == (3.0, 4.0) and lifted.alphas == (3.0, 5.0)
        assert abs(lifted.violation(vals) - 0.25) < tol
        elapsed = time.perf_counter() - t0
        c.detail = (f"tau {got['BIN', 0]:.4f}/{got['INT', 1]:.4f}/{got['BIN', 1]:.4f}, "
                    f"capacity {base:.2f}->{after:.2f}, alpha {cut.alphas}->{lifted.alphas}, "
                    f"violation {lifted.violation(vals):.4f}, {elapsed:.2f}s")
        assert elapsed < 1.0


def test_canad_spot_reproduction(criterion):
    with criterion("Canad spot LPR (a)/(b) within 0.01%, (d) within 0.5%") as c:
        ref = load_reference()
        worst = {"a": 0.0, "b": 0.0, "d": 0.0}
        for name in SPOT:
            t0 = time.perf_counter()
            rows = run_canad_suite([name], ["a", "b", "d"])
            assert time.perf_counter() - t0 < 600, f"{name} over 10 minutes"
            for r in rows:
                worst[r.config] = max(worst[r.config], abs(r.lpr - ref[name][f"lpr_{r.config}"]) / ref[name][f"lpr_{r.config}"])
        c.detail = ", ".join(f"({k}) max rel err {v:.4%}" for k, v in worst.items())
        assert worst["a"] <= 1e-4 and worst["b"] <= 1e-4 and worst["d"] <= 5e-3


def test_canad_aggregate(criterion):
    with criterion("Canad aggregate gap(d) <= 3.3%, improvement >= 83%") as c:
        rows = run_canad_suite(None, ["a", "d"])
        gap = {k: statistics.mean(r.gap for r in rows if r.config == k) for k in ("a", "d")}
        impr = 1 - gap["d"] / gap["a"]
        c.detail = f"gap(a) {gap['a']:.2%}, gap(d) {gap['d']:.2%}, improvement {impr:.1%}"
        assert gap["d"] <= 0.033 and impr >= 0.83


def test_oracle_suites(criterion):
    with criterion("oracle suites (i)-(vi)") as c:
        t0 = time.perf_counter()
        rng = np.random.default_rng(2024)
        counts = {}

        emitted = 0
        for _ in range(200):
            arc = random_arc(rng, max_paths=12, max_tmax=3)
            vals = random_point(rng, arc)
            pts = enumerate_S(arc)
            cuts = []
            r = separate_sacpack(arc, vals)
            if r.found:
                cuts += [r.cut, postprocess_lift(r.cut, arc, vals)]
            g = rowgen_separate(arc, vals, B=3)
            if g.found:
                cuts.append(g.cut)
            for cut in cuts:
                assert validate_cut(cut, pts).valid, cut
            emitted += len(cuts)
        counts["i"] = emitted

        for _ in range(500):
            n = int(rng.integers(1, 9))
            demands = rng.integers(1, 120, n).tolist()
            q, t_max = int(rng.integers(30, 200)), int(rng.integers(1, 5))
            assert alpha_coefficients(list(enumerate(demands)), q, t_max) == brute_alpha(demands, q, t_max)
        counts["ii"] = 500

        for _ in range(200):
            n = int(rng.integers(0, 11))
            profits, weights = rng.integers(0, 6, n).tolist(), rng.integers(1, 80, n).tolist()
            cap = int(rng.integers(0, 250))
            assert min_knapsack_bisect(profits, weights, cap)[0] == weight_dp_knapsack(profits, weights, cap)
        counts["iii"] = 200

        checked = 0
        while checked < 40:
            arc = random_arc(rng, max_paths=8, max_tmax=3)
            if len({e.commodity for e in arc.entries}) > 8:
                continue
            vals = random_point(rng, arc)
            r = rowgen_separate(arc, vals, B=3, threshold=-1.0)
            got = r.violation if r.cut is not None else 0.0
            assert abs(got - fenchel_value(arc, vals, 3)) < 1e-6
            checked += 1
        counts["iv"] = checked

        for seed in range(50):
            inst = generate_ecommerce(EcommerceGenParams(4, 2, 4, fcs_per_dest=2, seed=seed))
            m = build_bin_model(inst)
            p = solve_lp(m)
            for cut in generate_metric_cuts(p, aggregate(inst), m).helpers:
                m.add_cut(cut)
            assert abs(solve_lp(m).objective - p.objective) <= 1e-6 * max(1.0, abs(p.objective))
        counts["v"] = 50

        points = 0
        for seed in range(30):
            inst = tiny_instance(seed)
            assert len(inst.paths) <= 10
            m = build_bin_model(inst)
            cuts = generate_metric_cuts(solve_lp(m), aggregate(inst), m).integrals
            for _, tau in integer_points(inst):
                col = {}
                for a, ys in m.cap_index.items():
                    for t, cc in enumerate(ys, start=1):
                        col[cc] = 1.0 if tau[a] == t else 0.0
                for cut in cuts:
                    assert sum(v * col[j] for j, v in cut.y_coefs) >= cut.rhs - 1e-6
                points += 1
        counts["vi"] = points
        elapsed = time.perf_counter() - t0
        c.detail = f"checked {counts}, {elapsed:.0f}s"
        assert elapsed < 900


@pytest.mark.slow
def test_icg_dominance(criterion):
    with criterion("ICG >= BIN on 5 seeds, >= 0.1% on 3 (10 min each)") as c:
        t0 = time.perf_counter()
        rel = []
        for seed in SEEDS:
            inst = gen_group(1, seed)
            backend = get_backend(seed=seed)
            b = bin_baseline(inst, 600, backend).bound
            i = run_icg(inst, IcgConfig(budget_seconds=600, seed=seed), backend).bound
            rel.append((i - b) / abs(b))
        c.detail = "relative ICG-BIN " + ", ".join(f"{r:+.3%}" for r in rel) + \
            f"; {time.perf_counter() - t0:.0f}s"
        assert all(r >= 0 for r in rel) and sum(r >= 1e-3 for r in rel) >= 3
        assert time.perf_counter() - t0 <= 2 * 3600


@pytest.mark.slow
def test_formulation_comparison(criterion):
    with criterion("BIN bound >= INT bound on 5 seeds (5 min each)") as c:
        diffs = []
        for seed in SEEDS:
            inst = gen_group(1, seed)
            backend = get_backend(seed=seed)
            b = backend.solve_mip(build_bin_model(inst), time_limit=300, focus="bound").bound
            n = backend.solve_mip(build_int_model(inst), time_limit=300, focus="bound").bound
            diffs.append((b - n) / abs(n))
        c.detail = "relative BIN-INT " + ", ".join(f"{d:+.3%}" for d in diffs)
        assert all(d >= 0 for d in diffs)
