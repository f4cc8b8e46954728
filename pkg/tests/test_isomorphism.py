"""Labeled graph isomorphism search."""
from __future__ import annotations

import pytest

from epcouple.errors import SearchOverflow
from epcouple.graph import FiniteGraph
from epcouple.isomorphism import graph_isomorphisms, is_isomorphic


def rose(n, prefix="x"):
    g = FiniteGraph.build(["v"], [])
    for i in range(n):
        g.add_edge(f"{prefix}{i + 1}", "v", "v")
    return g


def test_rose2_self_isomorphisms():
    r = rose(2)
    found = graph_isomorphisms(r, r)
    # 2 ways to pair the loops, each loop can flip: 2 * 2 * 2
    assert len(found) == 8
    for vmap, emap in found:
        assert vmap == {"v": "v"}
        assert set(emap) == {"x1", "x2"}


def test_segment_matches_reversed_segment():
    a = FiniteGraph.build(["p", "q"], [("e", "p", "q")])
    b = FiniteGraph.build(["s", "t"], [("f", "t", "s")])
    found = graph_isomorphisms(a, b)
    assert len(found) == 2
    images = {emap["e"] for _, emap in found}
    assert images == {("f", 1), ("f", -1)}


def test_vertex_labels_prune():
    r = rose(2)
    found = graph_isomorphisms(r, r, vertex_label=lambda g, v: "marked")
    assert len(found) == 8
    found = graph_isomorphisms(
        r, rose(2), vertex_label=lambda g, v: id(g))
    assert found == []


def test_edge_labels_can_be_orientation_sensitive():
    r = rose(1)

    def oriented(g, e, sign):
        return sign

    found = graph_isomorphisms(r, rose(1), edge_label=oriented)
    assert len(found) == 1
    assert found[0][1]["x1"] == ("x1", 1)


def test_limit_stops_early():
    r = rose(3)
    found = graph_isomorphisms(r, r, limit=5)
    assert len(found) == 5


def test_mismatched_sizes_fast_reject():
    assert not is_isomorphic(rose(2), rose(3))
    assert is_isomorphic(rose(3), rose(3, prefix="y"))


def test_budget_overflow():
    # 7 loops on one vertex: 7! * 2^7 orientation choices blow a small budget
    r = rose(7)
    with pytest.raises(SearchOverflow) as info:
        graph_isomorphisms(r, rose(7, prefix="y"), budget=50)
    assert info.value.budget == 50
    assert info.value.nodes >= 50
