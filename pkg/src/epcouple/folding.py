"""Stallings folding for combinatorial graph maps.

A fold identifies two distinct edges that leave a common vertex and
carry the same single-edge image.  Identifying them when their far
endpoints differ (a type-1 fold) is a homotopy equivalence of the
domain; when the endpoints already agree (type-2) the fold kills a
loop.  Any graph map with no collapsed edge factors, after subdividing
to make it combinatorial, as a finite chain of folds followed by an
immersion.  The map is a homotopy equivalence exactly when every fold
in the chain is type-1 and the final immersion is a bijection.

For an end-periodic presentation the same test runs on a finite window.
Away from the core the map shifts blocks isomorphically, so every fold
of the infinite graph is forced to happen inside the level-one window
of the proper-core rebasing, and bijectivity of the folded window map
is equivalent to bijectivity over the whole infinite graph.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .errors import CollapsedEdge, Valence1Vertex
from .graph import FiniteGraph, Step, reduce_path, require_connected
from .maps import GraphMap, compose, identity_map, subdivide_for
from .presentation import EndPeriodicPresentation
from .unrolling import proper_core, unroll

__all__ = [
    "FoldStep",
    "FoldSequence",
    "HomotopyEquivalenceCertificate",
    "fold_decompose",
    "certify_homotopy_equivalence",
    "fold_decompose_end_periodic",
]

TYPE1 = "type1"
TYPE2 = "type2"
IMMERSION = "immersion"
HOMEOMORPHISM = "homeomorphism"
DEGENERATE = "degenerate"


@dataclass(frozen=True)
class FoldStep:
    """One fold: `pair` is the two signed edges identified (sharing a
    tail and an image), `quotient` is the projection of the domain."""

    pair: tuple[Step, Step]
    kind: str
    quotient: GraphMap


@dataclass(frozen=True)
class FoldSequence:
    start: GraphMap
    steps: tuple[FoldStep, ...]
    terminal: GraphMap
    terminal_kind: str

    def composed(self) -> GraphMap:
        total = identity_map(self.start.domain)
        for step in self.steps:
            total = compose(step.quotient, total)
        return compose(self.terminal, total)

    def all_type1(self) -> bool:
        return all(step.kind == TYPE1 for step in self.steps)


@dataclass(frozen=True)
class HomotopyEquivalenceCertificate:
    verdict: bool
    witness: FoldSequence
    failure: str | None


def _step_key(s: Step) -> tuple[str, int]:
    return (s[0], 0 if s[1] > 0 else 1)


def _offending_pairs(m: GraphMap) -> list[tuple[Step, Step]]:
    """All unordered pairs of distinct signed edges with a common tail
    and equal image steps, each pair sorted, the list sorted."""
    pairs = []
    for v in m.domain.vertices:
        by_image: dict[Step, list[Step]] = {}
        for s in m.domain.star(v):
            by_image.setdefault(m.edge_image(s)[0], []).append(s)
        for group in by_image.values():
            group.sort(key=_step_key)
            for i in range(len(group)):
                for j in range(i + 1, len(group)):
                    pairs.append((group[i], group[j]))
    pairs.sort(key=lambda p: (_step_key(p[0]), _step_key(p[1])))
    return pairs


def _fold_once(m: GraphMap, pair: tuple[Step, Step]) -> tuple[FoldStep, GraphMap]:
    (e1, s1), (e2, s2) = pair
    dom = m.domain
    h1 = dom.step_ends((e1, s1))[1]
    h2 = dom.step_ends((e2, s2))[1]
    kind = TYPE2 if h1 == h2 else TYPE1

    def project(v: str) -> str:
        return h1 if (kind == TYPE1 and v == h2) else v

    quotient_graph = FiniteGraph()
    for v in dom.vertices:
        if project(v) == v:
            quotient_graph.add_vertex(v)
    for e in dom.edges:
        if e == e2:
            continue
        t, h = dom.edge_ends(e)
        quotient_graph.add_edge(e, project(t), project(h))

    quotient = GraphMap(
        dom,
        quotient_graph,
        {v: project(v) for v in dom.vertices},
        {
            e: (((e1, s1 * s2),) if e == e2 else ((e, 1),))
            for e in dom.edges
        },
    )
    folded = GraphMap(
        quotient_graph,
        m.codomain,
        {v: m.vertex_images[v] for v in quotient_graph.vertices},
        {e: m.edge_images[e] for e in quotient_graph.edges},
    )
    return FoldStep(pair=pair, kind=kind, quotient=quotient), folded


def fold_decompose(m: GraphMap, rng: random.Random | None = None) -> FoldSequence:
    """Factor a graph map into folds followed by an immersion.

    The domain is subdivided first so every edge image is a single
    step.  Folds are applied to the lexicographically least offending
    pair, or to a random one when `rng` is given (the verdict does not
    depend on the order, which tests exercise).
    """
    require_connected(m.domain)
    start, _ = subdivide_for(m)
    current = start
    steps: list[FoldStep] = []
    while True:
        pairs = _offending_pairs(current)
        if not pairs:
            break
        pair = pairs[rng.randrange(len(pairs))] if rng else pairs[0]
        step, current = _fold_once(current, pair)
        steps.append(step)
    return FoldSequence(
        start=start,
        steps=tuple(steps),
        terminal=current,
        terminal_kind=HOMEOMORPHISM if _is_bijective(current) else IMMERSION,
    )


def _is_bijective(m: GraphMap) -> bool:
    dom, cod = m.domain, m.codomain
    if dom.num_vertices() != cod.num_vertices():
        return False
    if dom.num_edges() != cod.num_edges():
        return False
    if len({m.vertex_images[v] for v in dom.vertices}) != dom.num_vertices():
        return False
    hit = {m.edge_images[e][0][0] for e in dom.edges}
    return len(hit) == dom.num_edges()


def collapse_degenerate(m: GraphMap) -> tuple[GraphMap, str | None]:
    """Collapse domain edges whose reduced image is empty.

    Collapsing such an edge is a homotopy equivalence of the domain as
    long as the edge is not a loop, and the map factors through the
    quotient, so certification can proceed there.  A degenerate loop
    kills a generator outright; that is returned as a failure string
    instead of a quotient.
    """
    dead = [e for e in sorted(m.domain.edges)
            if not reduce_path(m.edge_images[e])]
    if not dead:
        return m, None
    parent = {v: v for v in m.domain.vertices}

    def find(v: str) -> str:
        while parent[v] != v:
            parent[v] = parent[parent[v]]
            v = parent[v]
        return v

    for e in dead:
        a, b = (find(x) for x in m.domain.edge_ends(e))
        if a == b:
            return m, f"edge {e!r} degenerates to a loop"
        parent[max(a, b)] = min(a, b)

    quotient = FiniteGraph()
    for v in sorted(m.domain.vertices):
        if find(v) == v:
            quotient.add_vertex(v)
    vertex_images = {}
    for v in m.domain.vertices:
        rep = find(v)
        assert m.vertex_images[v] == m.vertex_images[rep]
        if rep == v:
            vertex_images[v] = m.vertex_images[v]
    edge_images = {}
    for e in m.domain.edges:
        if e in dead:
            continue
        t, h = m.domain.edge_ends(e)
        quotient.add_edge(e, find(t), find(h))
        edge_images[e] = m.edge_images[e]
    return GraphMap(quotient, m.codomain, vertex_images, edge_images), None


def _degenerate_certificate(m: GraphMap,
                            failure: str) -> HomotopyEquivalenceCertificate:
    seq = FoldSequence(start=m, steps=(), terminal=m,
                       terminal_kind=DEGENERATE)
    return HomotopyEquivalenceCertificate(verdict=False, witness=seq,
                                          failure=failure)


def _certificate(seq: FoldSequence) -> HomotopyEquivalenceCertificate:
    for i, step in enumerate(seq.steps):
        if step.kind == TYPE2:
            return HomotopyEquivalenceCertificate(
                verdict=False,
                witness=seq,
                failure=f"type-2 fold at step {i} identifying "
                f"{step.pair[0]} with {step.pair[1]}",
            )
    if seq.terminal_kind != HOMEOMORPHISM:
        return HomotopyEquivalenceCertificate(
            verdict=False, witness=seq, failure="terminal map is not bijective"
        )
    return HomotopyEquivalenceCertificate(verdict=True, witness=seq, failure=None)


def certify_homotopy_equivalence(
    m: GraphMap, rng: random.Random | None = None
) -> HomotopyEquivalenceCertificate:
    """Fold-based homotopy equivalence test for a finite graph map.

    The domain must have no valence-1 vertices; otherwise a bijective
    terminal map would not be a conclusive verdict.
    """
    for v in m.domain.vertices:
        if m.domain.valence(v) == 1:
            raise Valence1Vertex(f"vertex {v!r} has valence 1")
    reduced, failure = collapse_degenerate(m)
    if failure is not None:
        return _degenerate_certificate(m, failure)
    return _certificate(fold_decompose(reduced, rng=rng))


def fold_decompose_end_periodic(
    p: EndPeriodicPresentation, rng: random.Random | None = None
) -> tuple[FoldSequence, HomotopyEquivalenceCertificate]:
    """Homotopy equivalence certificate for the infinite self-map.

    The valence condition is checked on the infinite graph: levels at
    distance up to one from the core see their full star once the
    truncation is one level deeper than the largest end period, and all
    deeper levels repeat level one up to shift.  The fold itself runs
    on the level-one window of the proper-core rebasing; vertices at
    the window frontier may look valence-1 there even though the
    infinite graph is fine, so the window fold skips the valence check.
    """
    report = p.validate()
    depth = max(2, max((p.end(e).period for e in report.orbits), default=1) + 1)
    t = unroll(p, depth)
    for v in t.graph.vertices:
        if abs(t.cell_levels[v]) <= 1 and t.graph.valence(v) == 1:
            raise Valence1Vertex(
                f"vertex {v!r} has valence 1 in the infinite graph"
            )
    _, rebased = proper_core(p)
    reduced, failure = collapse_degenerate(rebased.graph_map())
    if failure is not None:
        return (FoldSequence(start=rebased.graph_map(), steps=(),
                             terminal=rebased.graph_map(),
                             terminal_kind=DEGENERATE),
                _degenerate_certificate(rebased.graph_map(), failure))
    seq = fold_decompose(reduced, rng=rng)
    return seq, _certificate(seq)
