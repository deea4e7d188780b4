import math

import numpy as np
import pytest

from mcnd_bounds.arcset import arc_sets
from mcnd_bounds.model import (
    BINARY,
    GE,
    INTEGER,
    ModelError,
    ModelSpec,
    add_disaggregated_linking,
    build_arc_fixed_model,
    build_bin_model,
    build_int_model,
    compute_gap,
    compute_improvement,
)
from mcnd_bounds.canad import read_canad
from mcnd_bounds.sacpack import separate_sacpack
from mcnd_bounds.solver import OPTIMAL, get_backend, solve_lp, solve_mip
from oracles import tiny_instance

from pathlib import Path

DATA = Path(__file__).parent / "data"


def _fix_flows(model, inst, flows):
    """Pin the capacitated path of commodity k to ``flows[k]``."""
    bounds = {}
    for k, v in enumerate(flows):
        p = next(p for p in inst.paths_by_commodity[k] if inst.paths[p].arcs == (0,))
        bounds[model.x_index[p]] = (v, v)
    return model.with_bounds(bounds)


def _installed(model, values):
    ys = model.cap_index[0]
    if model.kind == "INT":
        return values[ys[0]]
    return sum(t * values[c] for t, c in enumerate(ys, start=1))


def test_disaggregated_linking_worked_example(make_single_arc):
    inst = make_single_arc([5, 105])
    flows = [0.75, 0.5]
    res = {}
    for build in (build_int_model, build_bin_model):
        m = _fix_flows(build(inst), inst, flows)
        res[m.kind, "base"] = _installed(m, solve_lp(m).values)
        add_disaggregated_linking(m, inst)
        p = solve_lp(m)
        res[m.kind, "linked"] = _installed(m, p.values)
        if m.kind == "BIN":
            y1, y2 = (p.values[c] for c in m.cap_index[0])
            assert (y1, y2) == pytest.approx((0.25, 0.5), abs=1e-6)
    assert res["INT", "base"] == pytest.approx(0.5625, abs=1e-6)
    assert res["BIN", "base"] == pytest.approx(0.5625, abs=1e-6)
    assert res["INT", "linked"] == pytest.approx(1.0, abs=1e-6)
    assert res["BIN", "linked"] == pytest.approx(1.25, abs=1e-6)


def test_sacpack_cut_lifts_installed_capacity(make_single_arc):
    inst = make_single_arc([60, 70])
    m = _fix_flows(build_bin_model(inst), inst, [0.5, 0.4])
    assert m.profile.t_max[0] == 2
    p = solve_lp(m)
    assert _installed(m, p.values) == pytest.approx(0.58, abs=1e-6)
    (arc,) = arc_sets(m, inst)
    r = separate_sacpack(arc, p)
    assert r.found and r.cut.alphas == (1.0, 2.0)
    m.add_cut(r.cut)
    assert _installed(m, solve_lp(m).values) == pytest.approx(0.9, abs=1e-6)


def test_disaggregated_linking_alone_does_not_move_example(make_single_arc):
    inst = make_single_arc([60, 70])
    m = _fix_flows(build_bin_model(inst), inst, [0.5, 0.4])
    add_disaggregated_linking(m, inst)
    assert _installed(m, solve_lp(m).values) == pytest.approx(0.58, abs=1e-6)


def test_bin_tmax_and_tmin(make_single_arc):
    inst = make_single_arc([5, 105, 40])
    prof = inst.capacity_profile()
    assert prof.t_max[0] == 2
    assert prof.t_min[(0, 0)] == 1 and prof.t_min[(0, 1)] == 2
    m = build_bin_model(inst)
    assert len(m.cap_index[0]) == 2
    assert m.count("choice") == 1 and m.count("assign") == 3


def test_int_and_bin_share_lp_value():
    for seed in range(3):
        inst = tiny_instance(seed, 3, 2, 3)
        a = solve_lp(build_int_model(inst)).objective
        b = solve_lp(build_bin_model(inst)).objective
        assert a == pytest.approx(b, rel=1e-9)


def test_int_and_bin_share_ip_optimum():
    inst = tiny_instance(1, 3, 2, 3)
    a = solve_mip(build_int_model(inst))
    b = solve_mip(build_bin_model(inst))
    assert a.status == b.status == OPTIMAL
    assert a.objective == pytest.approx(b.objective, rel=1e-7)


def test_mip_solution_satisfies_model():
    inst = tiny_instance(2, 3, 2, 3)
    m = build_bin_model(inst)
    r = solve_mip(m)
    assert m.is_feasible(r.values)
    assert m.evaluate(r.values) == pytest.approx(r.objective, rel=1e-7)


def test_backends_agree_on_lp_and_mip():
    highs, scipy = get_backend("highs"), get_backend("scipy")
    for seed in range(3):
        inst = tiny_instance(seed, 3, 2, 3)
        m = build_bin_model(inst)
        add_disaggregated_linking(m, inst)
        assert highs.solve_lp(m).objective == pytest.approx(scipy.solve_lp(m).objective, rel=1e-7)
        assert highs.solve_mip(m).objective == pytest.approx(scipy.solve_mip(m).objective, rel=1e-7)


def test_lp_duals_certify_optimality():
    inst = tiny_instance(0, 3, 2, 3)
    m = build_bin_model(inst)
    p = solve_lp(m)
    A = m.row_matrix().toarray()
    lo, hi = m.bounds()
    # reduced costs c - A^T pi vanish on columns strictly between their bounds
    rc = m.objective() - A.T @ p.duals
    inner = (p.values > lo + 1e-7) & (p.values < hi - 1e-7)
    assert np.allclose(rc[inner], 0.0, atol=1e-6)
    assert float(np.dot(m.objective(), p.values)) == pytest.approx(p.objective, rel=1e-9)


def test_arc_fixed_model_on_canad_fixture():
    inst = read_canad(DATA / "mini.dow")
    m = build_arc_fixed_model(inst)
    r = solve_mip(m)
    assert r.status == OPTIMAL
    lp = solve_lp(m).objective
    add_disaggregated_linking(m, inst)
    linked = solve_lp(m).objective
    assert lp <= linked + 1e-9 <= r.objective + 1e-6


def test_builders_reject_wrong_kind():
    inst = read_canad(DATA / "mini.dow")
    with pytest.raises(ModelError):
        build_bin_model(inst)
    with pytest.raises(ModelError):
        build_arc_fixed_model(tiny_instance(0))


def test_model_copy_is_independent():
    m = ModelSpec("T")
    x = m.add_variable(("x",), BINARY, 0, 1, 1.0)
    m.add_constraint([x], [1.0], GE, 0.5)
    c = m.copy()
    c.add_variable(("z",), INTEGER, 0, 3, 0.0)
    c.add_constraint([x], [1.0], GE, 0.0)
    assert (m.n_vars, m.n_rows) == (1, 1)
    with pytest.raises(Exception):
        m.with_objective([1.0, 2.0])


def test_gap_and_improvement():
    g = compute_gap(194_443, 163_198)
    assert g.gap == pytest.approx(0.1607, abs=1e-4)
    assert compute_improvement(185_881, 163_198, 194_443) == pytest.approx(
        (185_881 - 163_198) / (194_443 - 163_198))
    with pytest.raises(ValueError):
        compute_improvement(1.0, 5.0, 5.0)
    with pytest.raises(ValueError):
        compute_gap(0.0, 1.0)
    assert math.isclose(compute_gap(100.0, 100.0).gap, 0.0)
