"""Fold factorization and homotopy equivalence certificates."""

from __future__ import annotations

import random

import pytest

from epcouple.errors import CollapsedEdge, Valence1Vertex
from epcouple.fixtures import load_fixture
from epcouple.folding import (
    DEGENERATE,
    HOMEOMORPHISM,
    TYPE1,
    TYPE2,
    certify_homotopy_equivalence,
    collapse_degenerate,
    fold_decompose,
    fold_decompose_end_periodic,
)
from epcouple.graph import FiniteGraph
from epcouple.maps import GraphMap
from epcouple.pi1 import induced_pi1_map, pi1_basis, spanning_tree
from epcouple.presentation import EndPeriodicPresentation


def circle() -> FiniteGraph:
    return FiniteGraph.build(["v"], [("e", "v", "v")])


def rose2() -> FiniteGraph:
    return FiniteGraph.build(["v"], [("a", "v", "v"), ("b", "v", "v")])


def circle_identity() -> GraphMap:
    g = circle()
    return GraphMap(g, g, {"v": "v"}, {"e": (("e", 1),)})


def circle_degree2() -> GraphMap:
    g = circle()
    return GraphMap(g, g, {"v": "v"}, {"e": (("e", 1), ("e", 1))})


def rose2_nielsen() -> GraphMap:
    g = rose2()
    return GraphMap(
        g, g, {"v": "v"}, {"a": (("a", 1), ("b", 1)), "b": (("b", 1),)}
    )


def parallel_edges_map() -> GraphMap:
    dom = FiniteGraph.build(["v", "w"], [("e1", "v", "w"), ("e2", "v", "w")])
    cod = FiniteGraph.build(["x", "y"], [("f", "x", "y")])
    return GraphMap(
        dom, cod, {"v": "x", "w": "y"}, {"e1": (("f", 1),), "e2": (("f", 1),)}
    )


# Independent word-level oracle: a word map on a free group basis is an
# automorphism iff its image words generate the whole group, which the
# folded subgroup graph detects.  This shares no code with the folding
# module; it runs on labeled subgroup graphs, not graph maps.


def _subgroup_is_everything(words, rank: int) -> bool:
    if rank == 0:
        return all(not w for w in words)
    parent: dict[int, int] = {0: 0}

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    def union(x: int, y: int) -> None:
        parent[find(x)] = find(y)

    edges: list[tuple[int, int, int]] = []
    fresh = 1
    for word in words:
        if not word:
            continue
        prev = 0
        for i, letter in enumerate(word):
            last = i == len(word) - 1
            cur = 0 if last else fresh
            if not last:
                parent[fresh] = fresh
                fresh += 1
            if letter > 0:
                edges.append((prev, cur, letter))
            else:
                edges.append((cur, prev, -letter))
            prev = cur

    while True:
        outgoing: dict[tuple[int, int], int] = {}
        incoming: dict[tuple[int, int], int] = {}
        merged = False
        for t, h, letter in edges:
            ft, fh = find(t), find(h)
            seen = outgoing.get((ft, letter))
            if seen is not None and find(seen) != fh:
                union(find(seen), fh)
                merged = True
                break
            outgoing[(ft, letter)] = fh
            seen = incoming.get((fh, letter))
            if seen is not None and find(seen) != ft:
                union(find(seen), ft)
                merged = True
                break
            incoming[(fh, letter)] = ft
        if not merged:
            break

    folded = {(find(t), find(h), letter) for t, h, letter in edges}
    # trim hanging trees away from the base vertex
    while True:
        degree: dict[int, int] = {}
        for t, h, _ in folded:
            degree[t] = degree.get(t, 0) + 1
            degree[h] = degree.get(h, 0) + 1
        leaves = {
            v for v, d in degree.items() if d == 1 and v != find(0)
        }
        if not leaves:
            break
        folded = {
            (t, h, letter)
            for t, h, letter in folded
            if t not in leaves and h not in leaves
        }
    vertices = {v for t, h, _ in folded for v in (t, h)}
    if vertices != {find(0)}:
        return False
    return sorted(letter for _, _, letter in folded) == list(range(1, rank + 1))


def roseray_degree2() -> EndPeriodicPresentation:
    data = load_fixture("roseray").to_data()
    data["map"]["edges"]["l0"] = ["l1", "l1"]
    return EndPeriodicPresentation.from_data(data)


def test_oracle_self_checks():
    assert _subgroup_is_everything([(1,)], 1)
    assert not _subgroup_is_everything([(1, 1)], 1)
    assert _subgroup_is_everything([(1, 2), (2,)], 2)
    assert not _subgroup_is_everything([(2, 2), (1,)], 2)
    assert _subgroup_is_everything([(1, 2, -1), (1,)], 2)


def test_identity_zero_folds():
    seq = fold_decompose(circle_identity())
    assert seq.steps == ()
    assert seq.terminal_kind == HOMEOMORPHISM
    assert certify_homotopy_equivalence(circle_identity()).verdict is True


def test_parallel_edges_single_type2_fold():
    seq = fold_decompose(parallel_edges_map())
    assert len(seq.steps) == 1
    assert seq.steps[0].kind == TYPE2
    assert seq.steps[0].pair == (("e1", 1), ("e2", 1))
    cert = certify_homotopy_equivalence(parallel_edges_map())
    assert cert.verdict is False
    assert "type-2" in cert.failure


def test_rose2_nielsen_certifies():
    seq = fold_decompose(rose2_nielsen())
    assert seq.steps
    assert all(s.kind == TYPE1 for s in seq.steps)
    assert seq.terminal_kind == HOMEOMORPHISM
    assert certify_homotopy_equivalence(rose2_nielsen()).verdict is True


def test_circle_degree2_fails():
    cert = certify_homotopy_equivalence(circle_degree2())
    assert cert.verdict is False
    assert cert.failure == "terminal map is not bijective"
    assert cert.witness.steps == ()


def test_composition_identity_exact():
    for build in (
        circle_identity,
        circle_degree2,
        rose2_nielsen,
        parallel_edges_map,
    ):
        seq = fold_decompose(build())
        total = seq.composed()
        assert total.domain == seq.start.domain
        assert total.vertex_images == seq.start.vertex_images
        assert total.edge_images == seq.start.edge_images


def test_fold_count_bounded_by_edges():
    for build in (circle_degree2, rose2_nielsen, parallel_edges_map):
        seq = fold_decompose(build())
        assert len(seq.steps) <= seq.start.domain.num_edges()


def test_collapsed_edge_rejected():
    g = rose2()
    m = GraphMap(
        g, g, {"v": "v"}, {"a": (("b", 1), ("b", -1)), "b": (("b", 1),)}
    )
    with pytest.raises(CollapsedEdge):
        fold_decompose(m)


def test_valence1_rejected():
    seg = FiniteGraph.build(["v", "w"], [("e", "v", "w")])
    m = GraphMap(seg, seg, {"v": "v", "w": "w"}, {"e": (("e", 1),)})
    with pytest.raises(Valence1Vertex):
        certify_homotopy_equivalence(m)


def test_verdict_stable_under_random_fold_orders():
    for build, expected in (
        (rose2_nielsen, True),
        (circle_degree2, False),
        (parallel_edges_map, False),
    ):
        for seed in range(10):
            cert = certify_homotopy_equivalence(
                build(), rng=random.Random(seed)
            )
            assert cert.verdict is expected


def test_deterministic_fold_sequences():
    a = fold_decompose(rose2_nielsen())
    b = fold_decompose(rose2_nielsen())
    assert [s.pair for s in a.steps] == [s.pair for s in b.steps]
    assert [s.kind for s in a.steps] == [s.kind for s in b.steps]


def test_line_end_periodic_zero_folds():
    seq, cert = fold_decompose_end_periodic(load_fixture("line"))
    assert seq.steps == ()
    assert cert.verdict is True


def test_bundled_fixtures_certify():
    for name in ("line", "roseray", "rose2susp", "fig1"):
        _, cert = fold_decompose_end_periodic(load_fixture(name))
        assert cert.verdict is True, (name, cert.failure)


def test_degree2_roseray_fails():
    _, cert = fold_decompose_end_periodic(roseray_degree2())
    assert cert.verdict is False


def test_fig1_collapse_variant_certifies_false():
    # b0's image reduces to nothing; the degenerate edge is collapsed
    # before folding and the damaged map is honestly rejected.
    data = load_fixture("fig1").to_data()
    data["map"]["edges"]["b0"] = ["beta", "C0", "-C0", "-beta"]
    broken = EndPeriodicPresentation.from_data(data)
    broken.validate()
    _, cert = fold_decompose_end_periodic(broken)
    assert cert.verdict is False
    assert "type-2" in cert.failure


def test_degenerate_non_loop_edge_is_collapsed_before_folding():
    from epcouple.unrolling import proper_core

    data = load_fixture("fig1").to_data()
    data["map"]["edges"]["b0"] = ["beta", "C0", "-C0", "-beta"]
    broken = EndPeriodicPresentation.from_data(data)
    _, rebased = proper_core(broken)
    m = rebased.graph_map()
    reduced, failure = collapse_degenerate(m)
    assert failure is None
    assert m.domain.edge_ends("b0") == ("k2", "k3")
    assert reduced.domain.num_edges() == m.domain.num_edges() - 1
    assert not reduced.domain.has_edge("b0")
    assert not reduced.domain.has_vertex("k3")


def test_degenerate_loop_edge_fails_certification():
    g = FiniteGraph()
    g.add_vertex("v")
    g.add_edge("a", "v", "v")
    g.add_edge("b", "v", "v")
    m = GraphMap(g, g, {"v": "v"},
                 {"a": (("b", 1), ("b", -1)), "b": (("b", 1),)})
    m.validate()
    cert = certify_homotopy_equivalence(m)
    assert cert.verdict is False
    assert "degenerates to a loop" in cert.failure
    assert cert.witness.terminal_kind == DEGENERATE


def test_end_periodic_verdict_stable_under_random_orders():
    for name, expected in (("fig1", True), ("rose2susp", True)):
        for seed in range(10):
            _, cert = fold_decompose_end_periodic(
                load_fixture(name), rng=random.Random(seed)
            )
            assert cert.verdict is expected


def test_dangling_core_vertex_rejected():
    data = load_fixture("line").to_data()
    data["core"]["vertices"].append("d")
    data["core"]["edges"].append({"id": "w", "tail": "c", "head": "d"})
    data["map"]["vertices"]["d"] = "c"
    data["map"]["edges"]["w"] = ["-ep"]
    pres = EndPeriodicPresentation.from_data(data)
    pres.validate()
    with pytest.raises(Valence1Vertex):
        fold_decompose_end_periodic(pres)


def test_certificates_agree_with_pi1_oracle():
    from epcouple.unrolling import proper_core

    cases = [
        ("line", True),
        ("roseray", True),
        ("rose2susp", True),
        ("fig1", True),
    ]
    for name, expected in cases:
        pres = load_fixture(name)
        _, cert = fold_decompose_end_periodic(pres)
        assert cert.verdict is expected
        _, rebased = proper_core(pres)
        window = rebased.graph_map()
        t_dom = spanning_tree(window.domain, rebased.basepoint())
        t_cod = spanning_tree(window.codomain, window.vertex_images[rebased.basepoint()])
        words = induced_pi1_map(window, t_dom, t_cod)
        rank = len(pi1_basis(window.codomain, t_cod))
        assert len(pi1_basis(window.domain, t_dom)) == rank
        assert _subgroup_is_everything(words, rank) is expected

    bad = roseray_degree2()
    _, cert = fold_decompose_end_periodic(bad)
    window = bad.graph_map()
    t_dom = spanning_tree(window.domain, bad.basepoint())
    t_cod = spanning_tree(window.codomain, window.vertex_images[bad.basepoint()])
    words = induced_pi1_map(window, t_dom, t_cod)
    rank = len(pi1_basis(window.codomain, t_cod))
    assert _subgroup_is_everything(words, rank) is cert.verdict is False
