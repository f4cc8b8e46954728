"""Spanning trees, fundamental-group bases, induced maps on words."""
from __future__ import annotations

import pytest
from hypothesis import given
from hypothesis import strategies as st

from epcouple.errors import BasepointNotMapped, DisconnectedGraph
from epcouple.graph import FiniteGraph, parse_path, reduce_path
from epcouple.maps import GraphMap, compose
from epcouple.pi1 import (SpanningTree, basis_index, induced_pi1_map,
                          loop_to_word, pi1_basis, reduce_word, spanning_tree,
                          substitute)


def theta():
    return FiniteGraph.build(["p", "q"], [("e1", "p", "q"), ("e2", "p", "q"),
                                          ("e3", "p", "q")])


def rose(n):
    g = FiniteGraph.build(["v"], [])
    for i in range(n):
        g.add_edge(f"x{i + 1}", "v", "v")
    return g


def test_theta_tree_is_first_edge():
    t = spanning_tree(theta(), "p")
    assert t.tree_edges == frozenset({"e1"})
    assert [e for e, _ in pi1_basis(theta(), t)] == ["e2", "e3"]


def test_tree_paths_are_reduced_and_correct():
    g = theta()
    t = spanning_tree(g, "p")
    assert t.path_to_base("q") == parse_path(["-e1"])
    assert t.tree_path("q", "q") == ()
    path = t.tree_path("p", "q")
    assert g.path_endpoints(path) == ("p", "q")


def test_spanning_tree_requires_connected():
    g = FiniteGraph.build(["a", "b"], [])
    with pytest.raises(DisconnectedGraph):
        spanning_tree(g, "a")


def test_loop_to_word_retraction():
    g = theta()
    t = spanning_tree(g, "p")
    basis = pi1_basis(g, t)
    idx = basis_index(basis)
    for i, (_, loop) in enumerate(basis, start=1):
        assert loop_to_word(t, idx, loop) == (i,)
    # e2 then e3 backwards: x1 * x2^-1
    loop = parse_path(["e2", "-e3"])
    assert loop_to_word(t, idx, loop) == (1, -2)
    # tree edges alone retract to nothing
    assert loop_to_word(t, idx, parse_path(["e1", "-e1"])) == ()


def test_word_reduction_and_substitution():
    assert reduce_word((1, 2, -2, -1, 3)) == (3,)
    images = [(1, 2), (2,)]
    assert substitute(images, (1, -2)) == (1, 2, -2) or substitute(
        images, (1, -2)) == (1,)
    assert substitute(images, (1, -2)) == (1,)
    assert substitute(images, ()) == ()


@given(st.lists(st.integers(min_value=-3, max_value=3).filter(lambda n: n != 0),
                max_size=12))
def test_substitution_by_identity_is_reduction(word):
    images = [(1,), (2,), (3,)]
    w = tuple(word)
    assert substitute(images, w) == reduce_word(w)


def test_induced_pi1_map_on_rose_endomorphism():
    r2 = rose(2)
    m = GraphMap(r2, r2, {"v": "v"},
                 {"x1": parse_path(["x1", "x2"]), "x2": parse_path(["-x1"])})
    t = spanning_tree(r2, "v")
    words = induced_pi1_map(m, t, t)
    assert words == [(1, 2), (-1,)]


def test_induced_pi1_map_with_nontrivial_tree():
    # theta graph self-map swapping e2, e3 and fixing e1
    g = theta()
    m = GraphMap(g, g, {"p": "p", "q": "q"},
                 {"e1": parse_path(["e1"]), "e2": parse_path(["e3"]),
                  "e3": parse_path(["e2"])})
    t = spanning_tree(g, "p")
    words = induced_pi1_map(m, t, t)
    assert words == [(2,), (1,)]


def test_induced_pi1_map_requires_reachable_basepoint():
    g = theta()
    lone = FiniteGraph.build(["p", "q", "z"], [("e1", "p", "q"),
                                               ("e2", "p", "q"),
                                               ("e3", "p", "q")])
    m = GraphMap(g, lone, {"p": "z", "q": "z"},
                 {"e1": (), "e2": (), "e3": ()})
    t_dom = spanning_tree(g, "p")
    t_cod = SpanningTree(lone, "p", require_connected=False)
    with pytest.raises(BasepointNotMapped):
        induced_pi1_map(m, t_dom, t_cod)


@given(st.randoms(use_true_random=False))
def test_functoriality_for_basepoint_fixing_maps(rng):
    # (m o m)_* == m_* followed by substitution, for maps fixing the basepoint
    r3 = rose(3)
    edge_images = {}
    names = ["x1", "x2", "x3"]
    for e in names:
        length = rng.randint(1, 3)
        path = []
        for _ in range(length):
            pick = rng.choice(names)
            path.append(pick if rng.random() < 0.5 else "-" + pick)
        edge_images[e] = reduce_path(parse_path(path))
    m = GraphMap(r3, r3, {"v": "v"}, edge_images)
    t = spanning_tree(r3, "v")
    single = induced_pi1_map(m, t, t)
    double = induced_pi1_map(compose(m, m), t, t)
    assert double == [substitute(single, w) for w in single]
