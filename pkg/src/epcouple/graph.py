"""Finite graphs with oriented edges and edge paths.

Vertices and edges are identified by nonempty strings.  An oriented
traversal of an edge is a *step* ``(edge_id, sign)`` with sign +1 for the
stored orientation and -1 for the reverse.  Paths are tuples of steps.
Steps serialize as the edge id, prefixed with ``-`` when reversed.
"""
from __future__ import annotations

import json
from .errors import DisconnectedGraph

Step = tuple[str, int]
EdgePath = tuple[Step, ...]


def _check_id(name: str, kind: str) -> str:
    if not isinstance(name, str) or not name:
        raise ValueError(f"{kind} id must be a nonempty string, got {name!r}")
    if name.startswith("-"):
        raise ValueError(f"{kind} id {name!r} may not start with '-'")
    if any(ch.isspace() for ch in name):
        raise ValueError(f"{kind} id {name!r} may not contain whitespace")
    return name


def step(edge_id: str, sign: int = 1) -> Step:
    if sign not in (1, -1):
        raise ValueError(f"step sign must be +1 or -1, got {sign}")
    return (edge_id, sign)


def step_name(s: Step) -> str:
    return s[0] if s[1] > 0 else "-" + s[0]


def parse_step(text: str) -> Step:
    if text.startswith("-"):
        return (text[1:], -1)
    return (text, 1)


def path_name(path: EdgePath) -> str:
    return " ".join(step_name(s) for s in path) if path else "(empty)"


def parse_path(texts) -> EdgePath:
    return tuple(parse_step(t) for t in texts)


def inverse_path(path: EdgePath) -> EdgePath:
    return tuple((eid, -sign) for eid, sign in reversed(path))


def reduce_path(path: EdgePath) -> EdgePath:
    """Freely reduce a path by cancelling adjacent inverse steps.

    One stack pass reaches the fixed point: a new cancellation can only
    appear where a pair was just removed, and the stack top is re-checked
    there.
    """
    out: list[Step] = []
    for eid, sign in path:
        if out and out[-1][0] == eid and out[-1][1] == -sign:
            out.pop()
        else:
            out.append((eid, sign))
    return tuple(out)


class FiniteGraph:
    """A finite graph: a vertex set plus oriented edges (loops allowed)."""

    def __init__(self):
        self._vertices: set[str] = set()
        self._edges: dict[str, tuple[str, str]] = {}

    # ----- construction -----

    def add_vertex(self, v: str) -> None:
        _check_id(v, "vertex")
        self._vertices.add(v)

    def add_edge(self, eid: str, tail: str, head: str) -> None:
        _check_id(eid, "edge")
        if eid in self._edges:
            raise ValueError(f"duplicate edge id {eid!r}")
        for v in (tail, head):
            if v not in self._vertices:
                raise ValueError(f"edge {eid!r} references unknown vertex {v!r}")
        self._edges[eid] = (tail, head)

    @classmethod
    def build(cls, vertices, edges) -> "FiniteGraph":
        """Construct from iterables of vertex ids and (id, tail, head) triples."""
        g = cls()
        for v in vertices:
            g.add_vertex(v)
        for eid, tail, head in edges:
            g.add_edge(eid, tail, head)
        return g

    def copy(self) -> "FiniteGraph":
        g = FiniteGraph()
        g._vertices = set(self._vertices)
        g._edges = dict(self._edges)
        return g

    def remove_edge(self, eid: str) -> None:
        del self._edges[eid]

    def remove_vertex(self, v: str) -> None:
        for eid, (t, h) in self._edges.items():
            if t == v or h == v:
                raise ValueError(f"vertex {v!r} still has incident edge {eid!r}")
        self._vertices.remove(v)

    # ----- access -----

    @property
    def vertices(self) -> list[str]:
        return sorted(self._vertices)

    @property
    def edges(self) -> list[str]:
        return sorted(self._edges)

    def has_vertex(self, v: str) -> bool:
        return v in self._vertices

    def has_edge(self, eid: str) -> bool:
        return eid in self._edges

    def edge_ends(self, eid: str) -> tuple[str, str]:
        return self._edges[eid]

    def step_ends(self, s: Step) -> tuple[str, str]:
        tail, head = self._edges[s[0]]
        return (tail, head) if s[1] > 0 else (head, tail)

    def num_vertices(self) -> int:
        return len(self._vertices)

    def num_edges(self) -> int:
        return len(self._edges)

    def euler_characteristic(self) -> int:
        return len(self._vertices) - len(self._edges)

    def star(self, v: str) -> list[Step]:
        """Outgoing steps at v, ascending by (edge id, orientation).

        A loop at v contributes both of its orientations.
        """
        out = []
        for eid, (tail, head) in self._edges.items():
            if tail == v:
                out.append((eid, 1))
            if head == v:
                out.append((eid, -1))
        out.sort(key=lambda s: (s[0], 0 if s[1] > 0 else 1))
        return out

    def valence(self, v: str) -> int:
        return len(self.star(v))

    # ----- paths -----

    def check_path(self, path: EdgePath, start: str | None = None,
                   end: str | None = None) -> None:
        """Raise ValueError unless path is a genuine edge path (with the
        given endpoints, when specified).  The empty path is valid and
        satisfies any endpoint constraint with start == end."""
        at = start
        for s in path:
            if s[0] not in self._edges:
                raise ValueError(f"path references unknown edge {s[0]!r}")
            src, dst = self.step_ends(s)
            if at is not None and src != at:
                raise ValueError(
                    f"path breaks at {step_name(s)}: expected tail {at!r}, got {src!r}")
            at = dst
        if end is not None:
            if not path:
                if start is not None and start != end:
                    raise ValueError("empty path cannot connect distinct vertices")
            elif at != end:
                raise ValueError(f"path ends at {at!r}, expected {end!r}")

    def path_endpoints(self, path: EdgePath) -> tuple[str, str]:
        if not path:
            raise ValueError("empty path has no endpoints")
        self.check_path(path)
        return self.step_ends(path[0])[0], self.step_ends(path[-1])[1]

    # ----- connectivity -----

    def components(self) -> list[list[str]]:
        """Vertex sets of connected components, each sorted, ordered by
        least vertex."""
        seen: set[str] = set()
        comps = []
        for v in sorted(self._vertices):
            if v in seen:
                continue
            comp = [v]
            seen.add(v)
            stack = [v]
            while stack:
                u = stack.pop()
                for s in self.star(u):
                    w = self.step_ends(s)[1]
                    if w not in seen:
                        seen.add(w)
                        comp.append(w)
                        stack.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def component_of(self, v: str) -> set[str]:
        seen = {v}
        stack = [v]
        while stack:
            u = stack.pop()
            for s in self.star(u):
                w = self.step_ends(s)[1]
                if w not in seen:
                    seen.add(w)
                    stack.append(w)
        return seen

    def edges_within(self, vertex_set) -> list[str]:
        vs = set(vertex_set)
        return sorted(e for e, (t, h) in self._edges.items() if t in vs and h in vs)

    def subgraph(self, vertices, edges) -> "FiniteGraph":
        sub = FiniteGraph()
        for v in vertices:
            if v not in self._vertices:
                raise ValueError(f"unknown vertex {v!r}")
            sub.add_vertex(v)
        for eid in edges:
            t, h = self._edges[eid]
            sub.add_edge(eid, t, h)
        return sub

    # ----- comparison / serialization -----

    def __eq__(self, other) -> bool:
        return (isinstance(other, FiniteGraph)
                and self._vertices == other._vertices
                and self._edges == other._edges)

    def __repr__(self) -> str:
        return (f"FiniteGraph({len(self._vertices)} vertices, "
                f"{len(self._edges)} edges)")

    def to_data(self) -> dict:
        return {
            "vertices": self.vertices,
            "edges": [{"id": e, "tail": t, "head": h}
                      for e, (t, h) in sorted(self._edges.items())],
        }

    @classmethod
    def from_data(cls, data: dict) -> "FiniteGraph":
        g = cls()
        for v in data["vertices"]:
            g.add_vertex(v)
        for rec in data["edges"]:
            g.add_edge(rec["id"], rec["tail"], rec["head"])
        return g

    def to_json(self) -> str:
        return json.dumps(self.to_data(), sort_keys=True, indent=2)

    def to_dot(self, name: str = "G", edge_labels: dict | None = None) -> str:
        lines = [f"digraph {name} {{"]
        for v in self.vertices:
            lines.append(f'  "{v}";')
        for e in self.edges:
            t, h = self._edges[e]
            label = edge_labels.get(e, e) if edge_labels else e
            lines.append(f'  "{t}" -> "{h}" [label="{label}"];')
        lines.append("}")
        return "\n".join(lines)


def require_connected(g: FiniteGraph) -> None:
    comps = g.components()
    if len(comps) > 1:
        heads = ", ".join(c[0] for c in comps)
        raise DisconnectedGraph(f"graph has {len(comps)} components (at {heads})")
