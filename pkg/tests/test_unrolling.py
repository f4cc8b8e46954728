"""Unrolling presentations into finite windows."""
from __future__ import annotations

import pytest

from epcouple.errors import OutOfTruncation
from epcouple.fixtures import load_fixture
from epcouple.graph import parse_path
from epcouple.unrolling import (block_components, evaluate_map, level_name,
                                proper_core, split_level, unroll)


def test_level_names_round_trip():
    assert level_name("A1", 2) == "A1@2"
    assert level_name("c", 0) == "c"
    assert split_level("A1@2") == ("A1", 2)
    assert split_level("e_@-3") == ("e_", -3)
    assert split_level("k5") == ("k5", 0)


def test_line_window_is_a_path():
    t = unroll(load_fixture("line"), 2)
    assert len(t.graph.vertices) == 5
    assert len(t.graph.edges) == 4
    assert t.graph.is_connected()
    assert all(t.graph.valence(v) <= 2 for v in t.graph.vertices)
    assert t.graph.edge_ends("ep@1") == ("c", "p@1")
    assert t.graph.edge_ends("ep@2") == ("p@1", "p@2")
    assert t.graph.edge_ends("en@-2") == ("n@-1", "n@-2")
    assert evaluate_map(t, "p@1") == "p@2"
    assert evaluate_map(t, "en@-2") == parse_path(["en@-1"])
    assert evaluate_map(t, "en@-1") == parse_path(["-ep@1"])


def test_roseray_positive_side_counts():
    t = unroll(load_fixture("roseray"), 3)
    pos_vertices = [c for c in t.graph.vertices if t.cell_levels[c] > 0]
    pos_loops = [e for e in t.graph.edges if t.cell_levels.get(e, 0) > 0
                 and e.startswith("l1")]
    pos_joining = [e for e in t.graph.edges if e.startswith("t1")]
    assert pos_vertices == ["v1@1", "v1@2", "v1@3"]
    assert pos_loops == ["l1@1", "l1@2", "l1@3"]
    assert pos_joining == ["t1@1", "t1@2", "t1@3"]


def test_fig1_window_two_deep():
    t = unroll(load_fixture("fig1"), 2)
    for cell in ("A1@1", "C1@1", "D1@1", "A1@2", "C1@2", "D1@2",
                 "e_@-1", "e_@-2"):
        assert t.graph.has_edge(cell)
    # period-2 joining families keep their deep tails in the core
    assert t.graph.edge_ends("C1@2") == ("jE4", "y1@2")
    assert t.graph.edge_ends("D1@2") == ("jE4", "y1@2")
    assert t.graph.edge_ends("e_@-2") == ("k5", "k3_@-2")
    # the period-1 family climbs block by block
    assert t.graph.edge_ends("A1@2") == ("z1@1", "z1@2")
    assert evaluate_map(t, "A1@1") == parse_path(["A1@2"])
    assert evaluate_map(t, "e_@-2") == parse_path(["e_@-1"])


def test_fig1_deep_tails_leave_the_core():
    t = unroll(load_fixture("fig1"), 3)
    assert t.graph.edge_ends("C1@3") == ("y1@1", "y1@3")
    assert t.graph.edge_ends("e_@-3") == ("k5_@-1", "k3_@-3")


def test_blocks_shift_isomorphically():
    pres = load_fixture("fig1")
    t = unroll(pres, 3)
    for k in (2, 3):
        for eid in pres.block_pos.edge_ids:
            rec = pres.block_pos.edges[eid]
            if rec.is_joining:
                continue
            tail, head = t.graph.edge_ends(level_name(eid, k))
            assert tail == level_name(rec.tail, k)
            assert head == level_name(rec.head, k)
        for eid in pres.block_neg.edge_ids:
            rec = pres.block_neg.edges[eid]
            if rec.is_joining:
                continue
            tail, head = t.graph.edge_ends(level_name(eid, -k))
            assert tail == level_name(rec.tail, -k)
            assert head == level_name(rec.head, -k)


def test_windows_nest_and_maps_agree():
    pres = load_fixture("fig1")
    small, big = unroll(pres, 2), unroll(pres, 3)
    for v in small.graph.vertices:
        assert big.graph.has_vertex(v)
    for e in small.graph.edges:
        assert big.graph.edge_ends(e) == small.graph.edge_ends(e)
    for v in small.map.vertex_images:
        assert big.map.vertex_images[v] == small.map.vertex_images[v]
    for e in small.map.edge_images:
        assert big.map.edge_images[e] == small.map.edge_images[e]


def test_levels_partition_cells():
    t = unroll(load_fixture("fig1"), 2)
    assert set(t.cell_levels) == set(t.graph.vertices) | set(t.graph.edges)
    assert t.graph.is_connected()


def test_partial_map_validates_and_covers_the_right_cells():
    t = unroll(load_fixture("fig1"), 2)
    t.map.validate()
    assert not t.map.domain.has_edge("A1@2")
    assert t.map.domain.has_edge("e_@-2")
    assert t.map.domain.has_edge("A1@1")


def test_out_of_truncation():
    t = unroll(load_fixture("fig1"), 2)
    with pytest.raises(OutOfTruncation, match="unroll deeper"):
        evaluate_map(t, "A1@2")
    with pytest.raises(OutOfTruncation):
        evaluate_map(t, "z1@2")
    with pytest.raises(OutOfTruncation):
        evaluate_map(t, "A1@7")
    with pytest.raises(ValueError, match="unknown cell"):
        evaluate_map(t, "nope")
    with pytest.raises(ValueError):
        unroll(load_fixture("fig1"), 0)


def test_block_components_listing():
    pres = load_fixture("fig1")
    pos = block_components(pres, +1)
    neg = block_components(pres, -1)
    assert [end for end, _ in pos] == ["E3", "E5"]
    assert [end for end, _ in neg] == ["E1"]
    line = load_fixture("line")
    assert len(block_components(line, +1)) == 1
    assert len(block_components(line, -1)) == 1


def test_proper_core_trivial_cases():
    for name in ("line", "roseray"):
        pres = load_fixture(name)
        level, rebased = proper_core(pres)
        assert level == 0
        assert rebased is pres


def test_proper_core_enlarges_once():
    for name in ("rose2susp", "fig1"):
        pres = load_fixture(name)
        level, rebased = proper_core(pres)
        assert level == 1
        report = rebased.validate()
        assert report.period == pres.validate().period
        # non-combinatorial images now land inside the enlarged core
        block_edges = set(rebased.block_pos.edges)
        for e in rebased.core.edges:
            image = rebased.edge_map[e]
            if len(image) != 1:
                assert not any(s[0] in block_edges for s in image)


def test_proper_core_fig1_counts():
    pres = load_fixture("fig1")
    _, rebased = proper_core(pres)
    assert len(rebased.core.vertices) == 18
    assert len(rebased.core.edges) == 28
    assert rebased.core.euler_characteristic() == \
        pres.level_one_graph().euler_characteristic()
