import numpy as np
import pytest

from mcnd_bounds.arcset import make_arc_set
from mcnd_bounds.model import GE, Cut
from mcnd_bounds.oracle import MAX_ENUM_PATHS, enumerate_S, validate_cut
from oracles import random_arc, recursive_points


def _as_set(pts):
    return {(frozenset(cols), t) for cols, t in pts.points()}


def test_empty_arc_has_only_capacity_points():
    arc = make_arc_set(0, 100, 3, [])
    pts = enumerate_S(arc)
    assert _as_set(pts) == {(frozenset(), t) for t in range(4)}


def test_example_points_membership():
    arc = make_arc_set(0, 100, 2, [(1, 60, [0]), (2, 70, [1])])
    pts = _as_set(enumerate_S(arc))
    assert (frozenset({0, 1}), 1) not in pts
    assert (frozenset({0, 1}), 2) in pts
    assert (frozenset({0}), 0) not in pts


def test_at_most_one_path_per_commodity():
    arc = make_arc_set(0, 100, 2, [(1, 10, [0, 1]), (2, 20, [2])])
    for cols, _ in enumerate_S(arc).points():
        assert not {0, 1} <= set(cols)


def test_enumeration_matches_recursive_generator():
    rng = np.random.default_rng(3)
    for _ in range(60):
        arc = random_arc(rng, max_paths=10)
        pts = enumerate_S(arc)
        assert _as_set(pts) == recursive_points(arc)
        assert len(pts) == len(recursive_points(arc))
        assert len(pts) <= 2 ** arc.n_paths * (arc.t_max + 1)


def test_size_guard():
    arc = make_arc_set(0, 100, 1, [(k, 1, [k]) for k in range(MAX_ENUM_PATHS + 1)])
    with pytest.raises(ValueError, match="limit"):
        enumerate_S(arc)


def test_lifted_example_cut_is_valid():
    arc = make_arc_set(0, 100, 2, [(1, 30, [0]), (2, 30, [1]), (3, 30, [2]), (4, 60, [3])])
    cut = Cut(((0, 1.0), (1, 1.0), (2, 1.0), (3, 2.0)), ((4, 3.0), (5, 5.0)))
    assert validate_cut(cut, enumerate_S(arc)).valid


def test_invalid_cut_reports_witness():
    arc = make_arc_set(0, 100, 1, [(1, 30, [0])])
    v = validate_cut(Cut(((0, 1.0),), ()), enumerate_S(arc))
    assert not v.valid and v.witness == ((0,), 1) and v.violation == pytest.approx(1.0)


def test_oversized_alpha_claim_is_caught():
    arc = make_arc_set(0, 100, 2, [(1, 30, [0]), (2, 30, [1]), (3, 30, [2]), (4, 60, [3])])
    cut = Cut(((0, 1.0), (1, 1.0), (2, 1.0), (3, 2.0)), ((4, 3.0), (5, 4.0)))
    v = validate_cut(cut, enumerate_S(arc))
    assert not v.valid and v.witness[1] == 2


def test_foreign_columns_and_sense_are_rejected():
    arc = make_arc_set(0, 100, 1, [(1, 30, [0])])
    pts = enumerate_S(arc)
    with pytest.raises(ValueError):
        validate_cut(Cut(((7, 1.0),), ()), pts)
    with pytest.raises(ValueError):
        validate_cut(Cut((), ((1, 1.0),), 1.0, GE), pts)
