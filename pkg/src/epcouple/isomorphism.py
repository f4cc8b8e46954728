"""Labeled graph isomorphism by deterministic backtracking.

An isomorphism is a vertex bijection plus a signed edge bijection: edge e
may match edge f forwards (f, +1) or reversed (f, -1).  Labels are
callables taking (graph, vertex) or (graph, edge_id, sign); a match must
preserve them for the chosen orientation.  Search explores candidates in
ascending id order, so the result list is deterministic.
"""
from __future__ import annotations

from .errors import SearchOverflow
from .graph import FiniteGraph, Step

DEFAULT_BUDGET = 10 ** 6


def _no_label(*_args):
    return None


def graph_isomorphisms(g: FiniteGraph, h: FiniteGraph,
                       vertex_label=None, edge_label=None,
                       limit: int | None = None,
                       budget: int = DEFAULT_BUDGET):
    """All isomorphisms g -> h as (vertex_map, edge_map) pairs.

    edge_map sends each g-edge id to a signed h-edge.  Stops after
    `limit` results when given.  Raises SearchOverflow past `budget`
    search nodes.
    """
    vlabel = vertex_label or _no_label
    elabel = edge_label or _no_label

    if g.num_vertices() != h.num_vertices() or g.num_edges() != h.num_edges():
        return []

    gverts = g.vertices
    hverts = h.vertices
    gedges = g.edges
    hedges = h.edges

    results = []
    nodes = 0

    def vertex_ok(v, w, partial):
        if vlabel(g, v) != vlabel(h, w):
            return False
        if g.valence(v) != h.valence(w):
            return False
        # every already-placed neighbor must stay a neighbor
        for s in g.star(v):
            u = g.step_ends(s)[1]
            if u in partial:
                if not any(h.step_ends(t)[1] == partial[u] for t in h.star(w)):
                    return False
        return True

    def assign_edges(vmap):
        emap: dict[str, Step] = {}
        used: set[str] = set()

        def backtrack_edges(i):
            nonlocal nodes
            if i == len(gedges):
                results.append((dict(vmap), dict(emap)))
                return limit is not None and len(results) >= limit
            e = gedges[i]
            t, head = g.edge_ends(e)
            want = (vmap[t], vmap[head])
            for f in hedges:
                if f in used:
                    continue
                ft, fh = h.edge_ends(f)
                for sign, ends in (((1), (ft, fh)), ((-1), (fh, ft))):
                    nodes += 1
                    if nodes > budget:
                        raise SearchOverflow(nodes, budget)
                    if ends != want:
                        continue
                    if elabel(g, e, 1) != elabel(h, f, sign):
                        continue
                    emap[e] = (f, sign)
                    used.add(f)
                    if backtrack_edges(i + 1):
                        return True
                    used.discard(f)
                    del emap[e]
            return False

        return backtrack_edges(0)

    def backtrack_vertices(i, vmap, taken):
        nonlocal nodes
        if i == len(gverts):
            return assign_edges(vmap)
        v = gverts[i]
        for w in hverts:
            if w in taken:
                continue
            nodes += 1
            if nodes > budget:
                raise SearchOverflow(nodes, budget)
            if not vertex_ok(v, w, vmap):
                continue
            vmap[v] = w
            taken.add(w)
            if backtrack_vertices(i + 1, vmap, taken):
                return True
            del vmap[v]
            taken.discard(w)
        return False

    backtrack_vertices(0, {}, set())
    return results


def is_isomorphic(g: FiniteGraph, h: FiniteGraph, **kwargs) -> bool:
    return bool(graph_isomorphisms(g, h, limit=1, **kwargs))
