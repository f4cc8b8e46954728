"""Graph core: paths, reduction, stars, components."""
from __future__ import annotations

import pytest
from hypothesis import given, strategies as st

from epcouple.errors import DisconnectedGraph
from epcouple.graph import (FiniteGraph, inverse_path, parse_path, parse_step,
                            path_name, reduce_path, require_connected,
                            step_name)


def theta_graph():
    # 2 vertices, 3 parallel edges
    return FiniteGraph.build(["p", "q"],
                             [("e1", "p", "q"), ("e2", "p", "q"), ("e3", "p", "q")])


def rose(n):
    g = FiniteGraph.build(["v"], [])
    for i in range(n):
        g.add_edge(f"x{i + 1}", "v", "v")
    return g


# ----- steps and serialization -----

def test_parse_and_format_step():
    assert parse_step("e") == ("e", 1)
    assert parse_step("-e") == ("e", -1)
    assert step_name(("e", 1)) == "e"
    assert step_name(("e", -1)) == "-e"


def test_id_validation():
    g = FiniteGraph()
    with pytest.raises(ValueError):
        g.add_vertex("-v")
    with pytest.raises(ValueError):
        g.add_vertex("a b")
    with pytest.raises(ValueError):
        g.add_vertex("")
    g.add_vertex("v")
    with pytest.raises(ValueError):
        g.add_edge("e", "v", "missing")
    g.add_edge("e", "v", "v")
    with pytest.raises(ValueError):
        g.add_edge("e", "v", "v")


# ----- reduction -----

def naive_reduce_once(path):
    for i in range(len(path) - 1):
        if path[i][0] == path[i + 1][0] and path[i][1] == -path[i + 1][1]:
            return path[:i] + path[i + 2:], True
    return path, False


def naive_reduce(path):
    # independent oracle: cancel one adjacent pair at a time to a fixed point
    changed = True
    while changed:
        path, changed = naive_reduce_once(path)
    return tuple(path)


@given(st.lists(st.tuples(st.sampled_from("abc"), st.sampled_from([1, -1])),
                max_size=30))
def test_reduce_path_matches_naive_fixpoint(steps):
    path = tuple(steps)
    assert reduce_path(path) == naive_reduce(path)


@given(st.lists(st.tuples(st.sampled_from("ab"), st.sampled_from([1, -1])),
                max_size=20))
def test_reduce_path_is_reduced_and_idempotent(steps):
    r = reduce_path(tuple(steps))
    for i in range(len(r) - 1):
        assert not (r[i][0] == r[i + 1][0] and r[i][1] == -r[i + 1][1])
    assert reduce_path(r) == r


@given(st.lists(st.tuples(st.sampled_from("ab"), st.sampled_from([1, -1])),
                max_size=16))
def test_path_times_inverse_reduces_to_nothing(steps):
    path = tuple(steps)
    assert reduce_path(path + inverse_path(path)) == ()


def test_reduce_path_examples():
    assert reduce_path(parse_path(["e", "-e"])) == ()
    assert reduce_path(parse_path(["a", "b", "-b", "-a", "c"])) == (("c", 1),)
    # stored pair that only cancels after an inner cancellation
    assert reduce_path(parse_path(["a", "b", "-b", "a"])) == (("a", 1), ("a", 1))


# ----- stars, valence, paths -----

def test_star_order_and_loop_double_count():
    g = FiniteGraph.build(["v", "w"],
                          [("b", "v", "w"), ("a", "v", "v"), ("c", "w", "v")])
    assert g.star("v") == [("a", 1), ("a", -1), ("b", 1), ("c", -1)]
    assert g.valence("v") == 4
    assert g.valence("w") == 2


def test_check_path_endpoints():
    g = theta_graph()
    g.check_path(parse_path(["e1", "-e2"]), start="p", end="p")
    with pytest.raises(ValueError):
        g.check_path(parse_path(["e1", "e2"]))
    with pytest.raises(ValueError):
        g.check_path(parse_path(["e1"]), start="q")
    assert g.path_endpoints(parse_path(["e1", "-e3", "e2"])) == ("p", "q")
    g.check_path((), start="p", end="p")
    with pytest.raises(ValueError):
        g.check_path((), start="p", end="q")


# ----- components, euler -----

def test_components_and_connectivity():
    g = FiniteGraph.build(["a", "b", "c", "d"],
                          [("e", "a", "b"), ("f", "c", "c")])
    assert g.components() == [["a", "b"], ["c"], ["d"]]
    assert not g.is_connected()
    with pytest.raises(DisconnectedGraph):
        require_connected(g)
    assert g.component_of("a") == {"a", "b"}


def test_euler_characteristic():
    assert theta_graph().euler_characteristic() == -1
    assert rose(2).euler_characteristic() == -1
    assert FiniteGraph.build(["v"], []).euler_characteristic() == 1


# ----- serialization -----

def test_json_round_trip():
    g = theta_graph()
    g2 = FiniteGraph.from_data(g.to_data())
    assert g == g2
    assert g.to_json() == g2.to_json()


def test_dot_output_mentions_all_edges():
    dot = theta_graph().to_dot()
    for e in ("e1", "e2", "e3"):
        assert e in dot
    assert dot.startswith("digraph")


def test_path_name():
    assert path_name(parse_path(["a", "-b"])) == "a -b"
    assert path_name(()) == "(empty)"
