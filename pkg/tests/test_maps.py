"""Graph maps: validation, composition, subdivision."""
from __future__ import annotations

import pytest

from epcouple.errors import CollapsedEdge
from epcouple.graph import FiniteGraph, parse_path
from epcouple.maps import (GraphMap, compose, identity_map, maps_equal_reduced,
                           subdivide_for)


def rose(n):
    g = FiniteGraph.build(["v"], [])
    for i in range(n):
        g.add_edge(f"x{i + 1}", "v", "v")
    return g


def test_validate_accepts_good_map():
    r2 = rose(2)
    m = GraphMap(r2, r2, {"v": "v"},
                 {"x1": parse_path(["x1", "x2"]), "x2": parse_path(["x2"])})
    m.validate()


def test_validate_rejects_broken_paths_and_missing_cells():
    r2 = rose(2)
    path = FiniteGraph.build(["a", "b"], [("e", "a", "b")])
    m = GraphMap(path, r2, {"a": "v"}, {})
    with pytest.raises(ValueError, match="no image"):
        m.validate()
    m2 = GraphMap(r2, path, {"v": "a"}, {"x1": parse_path(["e", "e"]),
                                          "x2": parse_path(["e", "-e"])})
    with pytest.raises(ValueError, match="x1"):
        m2.validate()


def test_evaluate_path_respects_orientation():
    r2 = rose(2)
    m = GraphMap(r2, r2, {"v": "v"},
                 {"x1": parse_path(["x1", "x2"]), "x2": parse_path(["x2"])})
    assert m.evaluate_path(parse_path(["-x1"])) == parse_path(["-x2", "-x1"])
    assert m.evaluate_path(parse_path(["x1", "-x1"])) == parse_path(
        ["x1", "x2", "-x2", "-x1"])


def test_compose_matches_pointwise_evaluation():
    r2 = rose(2)
    m = GraphMap(r2, r2, {"v": "v"},
                 {"x1": parse_path(["x1", "x2"]), "x2": parse_path(["x2", "x1"])})
    mm = compose(m, m)
    assert mm.edge_images["x1"] == m.evaluate_path(m.edge_images["x1"])
    assert compose(m, identity_map(r2)).edge_images == m.edge_images
    assert compose(identity_map(r2), m).edge_images == m.edge_images


def test_maps_equal_reduced_ignores_cancelling_pairs():
    r1 = rose(1)
    a = GraphMap(r1, r1, {"v": "v"}, {"x1": parse_path(["x1"])})
    b = GraphMap(r1, r1, {"v": "v"}, {"x1": parse_path(["x1", "-x1", "x1"])})
    assert maps_equal_reduced(a, b)


def test_subdivide_for_singleton_images_untouched():
    r1 = rose(1)
    m = GraphMap(r1, r1, {"v": "v"}, {"x1": parse_path(["x1"])})
    sub, collapse = subdivide_for(m)
    assert sub.domain == r1
    assert collapse.is_identity()


def test_subdivide_for_splits_long_images():
    # d0 -> alpha gamma: one subdivision point, halves map to the two edges
    g = FiniteGraph.build(["u", "v"], [("alpha", "u", "v"), ("gamma", "v", "v"),
                                       ("d0", "u", "v")])
    m = GraphMap(g, g, {"u": "u", "v": "v"},
                 {"alpha": parse_path(["alpha"]),
                  "gamma": parse_path(["gamma"]),
                  "d0": parse_path(["alpha", "gamma"])})
    sub, collapse = subdivide_for(m)
    assert sub.domain.has_vertex("d0#1")
    assert sub.domain.edge_ends("d0@1") == ("u", "d0#1")
    assert sub.domain.edge_ends("d0@2") == ("d0#1", "v")
    assert sub.edge_images["d0@1"] == parse_path(["alpha"])
    assert sub.edge_images["d0@2"] == parse_path(["gamma"])
    assert sub.is_combinatorial()
    # collapsing then mapping equals the original on cells
    assert collapse.vertex_images["d0#1"] == "u"
    m.validate()
    sub.validate()
    collapse.validate()


def test_subdivide_for_reduces_images_first():
    r2 = rose(2)
    m = GraphMap(r2, r2, {"v": "v"},
                 {"x1": parse_path(["x1", "x2", "-x2"]), "x2": parse_path(["x2"])})
    sub, _ = subdivide_for(m)
    assert sub.edge_images["x1"] == parse_path(["x1"])


def test_subdivide_for_raises_on_collapsed_image():
    r2 = rose(2)
    m = GraphMap(r2, r2, {"v": "v"},
                 {"x1": parse_path(["x2", "-x2"]), "x2": parse_path(["x2"])})
    with pytest.raises(CollapsedEdge, match="x1"):
        subdivide_for(m)
