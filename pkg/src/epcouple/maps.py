"""Graph maps: vertices to vertices, edges to edge paths."""
from __future__ import annotations

from dataclasses import dataclass, field

from .errors import CollapsedEdge
from .graph import (EdgePath, FiniteGraph, Step, inverse_path, path_name,
                    reduce_path, step_name)


@dataclass
class GraphMap:
    domain: FiniteGraph
    codomain: FiniteGraph
    vertex_images: dict[str, str]
    edge_images: dict[str, EdgePath]

    def __post_init__(self):
        self.edge_images = {e: tuple(p) for e, p in self.edge_images.items()}

    def validate(self) -> None:
        problems = self.validation_problems()
        if problems:
            raise ValueError("invalid graph map: " + "; ".join(problems))

    def validation_problems(self) -> list[str]:
        problems = []
        for v in self.domain.vertices:
            if v not in self.vertex_images:
                problems.append(f"vertex {v!r} has no image")
            elif not self.codomain.has_vertex(self.vertex_images[v]):
                problems.append(f"vertex {v!r} maps to unknown {self.vertex_images[v]!r}")
        for e in self.domain.edges:
            if e not in self.edge_images:
                problems.append(f"edge {e!r} has no image")
                continue
            t, h = self.domain.edge_ends(e)
            try:
                self.codomain.check_path(
                    self.edge_images[e],
                    start=self.vertex_images.get(t),
                    end=self.vertex_images.get(h),
                )
            except (ValueError, KeyError) as exc:
                problems.append(f"edge {e!r}: {exc}")
        for v in self.vertex_images:
            if not self.domain.has_vertex(v):
                problems.append(f"image given for unknown vertex {v!r}")
        for e in self.edge_images:
            if not self.domain.has_edge(e):
                problems.append(f"image given for unknown edge {e!r}")
        return problems

    # ----- evaluation -----

    def vertex_image(self, v: str) -> str:
        return self.vertex_images[v]

    def edge_image(self, s: Step) -> EdgePath:
        path = self.edge_images[s[0]]
        return path if s[1] > 0 else inverse_path(path)

    def evaluate_path(self, path: EdgePath) -> EdgePath:
        out: list[Step] = []
        for s in path:
            out.extend(self.edge_image(s))
        return tuple(out)

    def is_combinatorial_on(self, edge_ids) -> bool:
        return all(len(self.edge_images[e]) == 1 for e in edge_ids)

    def is_combinatorial(self) -> bool:
        return self.is_combinatorial_on(self.domain.edges)

    def is_identity(self) -> bool:
        if self.domain != self.codomain:
            return False
        if any(self.vertex_images[v] != v for v in self.domain.vertices):
            return False
        return all(self.edge_images[e] == ((e, 1),) for e in self.domain.edges)

    def copy(self) -> "GraphMap":
        return GraphMap(self.domain.copy(), self.codomain.copy(),
                        dict(self.vertex_images), dict(self.edge_images))

    def describe(self) -> str:
        lines = []
        for v in self.domain.vertices:
            lines.append(f"{v} -> {self.vertex_images[v]}")
        for e in self.domain.edges:
            lines.append(f"{e} -> {path_name(self.edge_images[e])}")
        return "\n".join(lines)


def identity_map(g: FiniteGraph) -> GraphMap:
    return GraphMap(g, g,
                    {v: v for v in g.vertices},
                    {e: ((e, 1),) for e in g.edges})


def compose(outer: GraphMap, inner: GraphMap) -> GraphMap:
    """outer after inner."""
    return GraphMap(
        inner.domain,
        outer.codomain,
        {v: outer.vertex_images[inner.vertex_images[v]]
         for v in inner.domain.vertices},
        {e: outer.evaluate_path(inner.edge_images[e])
         for e in inner.domain.edges},
    )


def maps_equal_reduced(a: GraphMap, b: GraphMap) -> bool:
    """Equality up to free reduction of edge images."""
    if a.domain != b.domain:
        return False
    if any(a.vertex_images[v] != b.vertex_images[v] for v in a.domain.vertices):
        return False
    return all(reduce_path(a.edge_images[e]) == reduce_path(b.edge_images[e])
               for e in a.domain.edges)


def subdivision_vertex(eid: str, k: int) -> str:
    return f"{eid}#{k}"


def subdivision_edge(eid: str, k: int) -> str:
    return f"{eid}@{k}"


def subdivide_for(m: GraphMap) -> tuple[GraphMap, GraphMap]:
    """Subdivide domain edges so the induced map is combinatorial.

    Image paths are freely reduced first; an edge whose reduced image is
    empty raises CollapsedEdge.  Returns (combinatorial map on the
    subdivided domain, collapse map from the subdivided domain back onto
    the original domain).  An edge e with reduced image of length L >= 2
    is replaced by e@1 ... e@L through fresh vertices e#1 ... e#(L-1).
    """
    reduced = {}
    for e in m.domain.edges:
        r = reduce_path(m.edge_images[e])
        if not r:
            raise CollapsedEdge(
                f"edge {e!r} has image {path_name(m.edge_images[e])} reducing to nothing")
        reduced[e] = r

    dom = FiniteGraph()
    for v in m.domain.vertices:
        dom.add_vertex(v)
    new_vertex_images = dict(m.vertex_images)
    new_edge_images: dict[str, EdgePath] = {}
    collapse_vertex = {v: v for v in m.domain.vertices}
    collapse_edge: dict[str, EdgePath] = {}

    for e in m.domain.edges:
        tail, head = m.domain.edge_ends(e)
        path = reduced[e]
        if len(path) == 1:
            dom.add_edge(e, tail, head)
            new_edge_images[e] = path
            collapse_edge[e] = ((e, 1),)
            continue
        prev = tail
        at = m.vertex_images[tail]
        for k, s in enumerate(path, start=1):
            last = k == len(path)
            nxt = head if last else subdivision_vertex(e, k)
            if not last:
                dom.add_vertex(nxt)
                at = m.codomain.step_ends(s)[1]
                new_vertex_images[nxt] = at
                collapse_vertex[nxt] = tail
            piece = subdivision_edge(e, k)
            dom.add_edge(piece, prev, nxt)
            new_edge_images[piece] = (s,)
            collapse_edge[piece] = ((e, 1),) if last else ()
            prev = nxt

    combinatorial = GraphMap(dom, m.codomain, new_vertex_images, new_edge_images)
    collapse = GraphMap(dom, m.domain, collapse_vertex, collapse_edge)
    return combinatorial, collapse
