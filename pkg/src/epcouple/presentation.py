"""Finite presentations of end-periodic self-maps of infinite graphs.

An infinite graph with finitely many ends, carrying a self-map that
eventually translates toward or away from each end, is presented by
finite data: a core graph, one repeating block per side, end bookkeeping,
and the map on the non-repeating part.  Everything deeper is a shifted
copy of the level-one blocks.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

from .errors import InvalidPresentation
from .graph import (EdgePath, FiniteGraph, inverse_path, parse_path,
                    path_name, step_name)
from .maps import GraphMap

ATTRACTING = "attracting"
REPELLING = "repelling"
SUBGRAPH = "subgraph"
JOINING = "joining"


@dataclass(frozen=True)
class EndRecord:
    """One end of the infinite graph.

    period is the size of the end's orbit under the map; orbit_leader
    names the chosen representative of that orbit.
    """
    id: str
    sign: str
    period: int
    orbit_leader: str


@dataclass(frozen=True)
class BlockEdge:
    id: str
    tail: str
    head: str
    end: str
    kind: str

    @property
    def is_joining(self) -> bool:
        return self.kind == JOINING


@dataclass(frozen=True)
class BlockComponent:
    """A connected piece of a level-one block.

    Joining edges belong to the component of their block-side head;
    components never connect through core junctures.
    """
    end: str
    vertices: tuple[str, ...]
    edges: tuple[str, ...]
    joining: tuple[str, ...]


class BlockGraph:
    """One level of the repeating structure on one side of the core.

    Vertices live inside the block and carry the leading end id of
    their component's orbit.  Joining edges run from a core juncture
    vertex (tail) into the block (head); subgraph edges stay inside.
    """

    def __init__(self) -> None:
        self.vertex_ends: dict[str, str] = {}
        self.edges: dict[str, BlockEdge] = {}

    def add_vertex(self, vid: str, end: str) -> None:
        if vid in self.vertex_ends:
            raise ValueError(f"duplicate block vertex {vid!r}")
        self.vertex_ends[vid] = end

    def add_edge(self, eid: str, tail: str, head: str, end: str,
                 kind: str) -> None:
        if eid in self.edges:
            raise ValueError(f"duplicate block edge {eid!r}")
        if kind not in (SUBGRAPH, JOINING):
            raise ValueError(f"edge {eid!r} has unknown kind {kind!r}")
        self.edges[eid] = BlockEdge(eid, tail, head, end, kind)

    @property
    def vertices(self) -> list[str]:
        return sorted(self.vertex_ends)

    @property
    def edge_ids(self) -> list[str]:
        return sorted(self.edges)

    def joining_edges(self) -> list[BlockEdge]:
        return [self.edges[e] for e in self.edge_ids if self.edges[e].is_joining]

    def subgraph_edges(self) -> list[BlockEdge]:
        return [self.edges[e] for e in self.edge_ids
                if not self.edges[e].is_joining]

    def is_empty(self) -> bool:
        return not self.vertex_ends and not self.edges

    def components(self) -> list[BlockComponent]:
        """Connected pieces, never routing through core junctures."""
        neighbors: dict[str, set[str]] = {v: set() for v in self.vertex_ends}
        for rec in self.subgraph_edges():
            if rec.tail in neighbors and rec.head in neighbors:
                neighbors[rec.tail].add(rec.head)
                neighbors[rec.head].add(rec.tail)
        seen: set[str] = set()
        out = []
        for start in self.vertices:
            if start in seen:
                continue
            group = {start}
            queue = [start]
            while queue:
                v = queue.pop()
                for w in sorted(neighbors.get(v, ())):
                    if w not in group:
                        group.add(w)
                        queue.append(w)
            seen |= group
            edges = []
            joining = []
            for eid in self.edge_ids:
                rec = self.edges[eid]
                anchor = rec.head if rec.is_joining else rec.tail
                if anchor in group:
                    edges.append(eid)
                    if rec.is_joining:
                        joining.append(eid)
            ends = sorted({self.vertex_ends[v] for v in group}
                          | {self.edges[e].end for e in edges})
            out.append(BlockComponent(ends[0] if ends else "",
                                      tuple(sorted(group)), tuple(edges),
                                      tuple(joining)))
        return out

    def to_data(self) -> dict:
        return {
            "vertices": [{"id": v, "end": self.vertex_ends[v]}
                         for v in self.vertices],
            "edges": [{"id": r.id, "tail": r.tail, "head": r.head,
                       "end": r.end, "kind": r.kind}
                      for r in (self.edges[e] for e in self.edge_ids)],
        }


@dataclass
class ValidationReport:
    """Derived structure confirmed by validate()."""
    period: int
    orbits: dict[str, tuple[str, ...]]
    positive_components: tuple[BlockComponent, ...]
    negative_components: tuple[BlockComponent, ...]
    junctures_pos: tuple[str, ...]
    junctures_neg: tuple[str, ...]
    # per positive joining edge: (tail, g(tail), ..., g^q(tail)); last entry
    # is the block vertex the deep tails shift along, earlier entries core
    forward_chains: dict[str, tuple[str, ...]]
    # per negative joining edge: (m_1, ..., m_q, w) with g(m_{j+1}) = m_j,
    # m_1 the stored tail, w the block vertex with g(w) = m_q
    backward_chains: dict[str, tuple[str, ...]]

    def describe(self) -> str:
        lines = [f"period: {self.period}"]
        for leader in sorted(self.orbits):
            members = ", ".join(self.orbits[leader])
            lines.append(f"orbit of {leader}: {{{members}}}")
        lines.append(f"positive components: {len(self.positive_components)}"
                     f" (leaders {', '.join(c.end for c in self.positive_components)})")
        lines.append(f"negative components: {len(self.negative_components)}"
                     f" (leaders {', '.join(c.end for c in self.negative_components)})")
        lines.append(f"positive junctures: {', '.join(self.junctures_pos) or '-'}")
        lines.append(f"negative junctures: {', '.join(self.junctures_neg) or '-'}")
        return "\n".join(lines)


class EndPeriodicPresentation:
    """Core graph + level-one blocks + ends + the map on coreand block_-1."""

    def __init__(self, core: FiniteGraph, block_pos: BlockGraph,
                 block_neg: BlockGraph, ends: list[EndRecord],
                 vertex_map: dict[str, str],
                 edge_map: dict[str, EdgePath],
                 name: str = "", reconstructed: bool = False) -> None:
        self.core = core
        self.block_pos = block_pos
        self.block_neg = block_neg
        self.ends = tuple(sorted(ends, key=lambda r: r.id))
        self.vertex_map = dict(vertex_map)
        self.edge_map = {e: tuple(p) for e, p in edge_map.items()}
        self.name = name
        self.reconstructed = reconstructed

    # ----- lookups -----

    def end(self, end_id: str) -> EndRecord:
        for rec in self.ends:
            if rec.id == end_id:
                return rec
        raise KeyError(end_id)

    def has_end(self, end_id: str) -> bool:
        return any(rec.id == end_id for rec in self.ends)

    def block(self, sign: int) -> BlockGraph:
        return self.block_pos if sign > 0 else self.block_neg

    def junctures(self, sign: int) -> tuple[str, ...]:
        tails = {rec.tail for rec in self.block(sign).joining_edges()}
        return tuple(sorted(tails))

    # ----- assembled graphs -----

    def _with_block(self, graph: FiniteGraph, block: BlockGraph) -> FiniteGraph:
        for v in block.vertices:
            graph.add_vertex(v)
        for rec in (block.edges[e] for e in block.edge_ids):
            graph.add_edge(rec.id, rec.tail, rec.head)
        return graph

    def upper_graph(self) -> FiniteGraph:
        """Core together with the positive block: where images live."""
        return self._with_block(self.core.copy(), self.block_pos)

    def lower_graph(self) -> FiniteGraph:
        """Core together with the negative block: where the map is defined."""
        return self._with_block(self.core.copy(), self.block_neg)

    def level_one_graph(self) -> FiniteGraph:
        return self._with_block(self.lower_graph(), self.block_pos)

    def graph_map(self) -> GraphMap:
        return GraphMap(self.lower_graph(), self.upper_graph(),
                        dict(self.vertex_map), dict(self.edge_map))

    def basepoint(self) -> str:
        return self.core.vertices[0]

    # ----- validation -----

    def validate(self) -> ValidationReport:
        problems: list[str] = []

        problems.extend(self._check_ends())
        periods = [r.period for r in self.ends
                   if isinstance(r.period, int) and r.period >= 1]
        period = math.lcm(*periods) if periods else 1
        structural = self._check_block_structure()
        problems.extend(structural)
        if structural:
            raise InvalidPresentation(problems)

        if not self.core.vertices:
            problems.append("core has no vertices")
            raise InvalidPresentation(problems)
        if not self.core.is_connected():
            problems.append("core is not connected")

        problems.extend(self._check_components(self.block_pos, ATTRACTING))
        problems.extend(self._check_components(self.block_neg, REPELLING))

        # Junctures of opposite sign may coincide (LINE: a one-vertex core
        # joins both sides at the same vertex), so overlap is not rejected.
        junct_pos = self.junctures(+1)
        junct_neg = self.junctures(-1)

        map_problems = self._check_map()
        problems.extend(map_problems)

        forward: dict[str, tuple[str, ...]] = {}
        backward: dict[str, tuple[str, ...]] = {}
        if not map_problems:
            problems.extend(self._check_chains(forward, backward))

        if problems:
            raise InvalidPresentation(problems)

        orbits: dict[str, list[str]] = {}
        for rec in self.ends:
            orbits.setdefault(rec.orbit_leader, []).append(rec.id)
        return ValidationReport(
            period=period,
            orbits={k: tuple(sorted(v)) for k, v in orbits.items()},
            positive_components=tuple(self.block_pos.components()),
            negative_components=tuple(self.block_neg.components()),
            junctures_pos=junct_pos,
            junctures_neg=junct_neg,
            forward_chains=forward,
            backward_chains=backward,
        )

    def _check_ends(self) -> list[str]:
        problems = []
        ids = [r.id for r in self.ends]
        if len(set(ids)) != len(ids):
            problems.append("duplicate end ids")
        by_id = {r.id: r for r in self.ends}
        orbits: dict[str, list[EndRecord]] = {}
        for rec in self.ends:
            if rec.sign not in (ATTRACTING, REPELLING):
                problems.append(f"end {rec.id!r} has unknown sign {rec.sign!r}")
            if not isinstance(rec.period, int) or rec.period < 1:
                problems.append(f"end {rec.id!r} has invalid period {rec.period!r}")
            if rec.orbit_leader not in by_id:
                problems.append(f"end {rec.id!r} names unknown leader"
                                f" {rec.orbit_leader!r}")
                continue
            orbits.setdefault(rec.orbit_leader, []).append(rec)
        for leader, members in sorted(orbits.items()):
            lead = by_id[leader]
            if lead.orbit_leader != leader:
                problems.append(f"leader {leader!r} does not lead itself")
            for rec in members:
                if rec.sign != lead.sign:
                    problems.append(f"end {rec.id!r} disagrees with leader"
                                    f" {leader!r} on sign")
                if rec.period != lead.period:
                    problems.append(f"end {rec.id!r} disagrees with leader"
                                    f" {leader!r} on period")
            if all(isinstance(r.period, int) for r in members) and \
                    len(members) != lead.period:
                problems.append(
                    f"orbit of {leader!r} has {len(members)} ends but period"
                    f" {lead.period}")
        return problems

    def _check_block_structure(self) -> list[str]:
        """Problems that stop the level-one graphs from assembling."""
        problems = []
        seen: dict[str, str] = {}
        for v in self.core.vertices:
            seen[v] = "core vertex"
        for e in self.core.edges:
            if e in seen:
                problems.append(f"id {e!r} used as both {seen[e]} and core edge")
            seen[e] = "core edge"
        for label, block in (("positive", self.block_pos),
                             ("negative", self.block_neg)):
            for v in block.vertices:
                if v in seen:
                    problems.append(f"id {v!r} used as both {seen[v]} and"
                                    f" {label} block vertex")
                seen[v] = f"{label} block vertex"
            for eid in block.edge_ids:
                if eid in seen:
                    problems.append(f"id {eid!r} used as both {seen[eid]} and"
                                    f" {label} block edge")
                seen[eid] = f"{label} block edge"
                rec = block.edges[eid]
                if rec.is_joining:
                    if not self.core.has_vertex(rec.tail):
                        problems.append(f"joining edge {eid!r} tail"
                                        f" {rec.tail!r} is not a core vertex")
                    if rec.head not in block.vertex_ends:
                        problems.append(f"joining edge {eid!r} head"
                                        f" {rec.head!r} is not a block vertex")
                else:
                    for end_v in (rec.tail, rec.head):
                        if end_v not in block.vertex_ends:
                            problems.append(
                                f"subgraph edge {eid!r} endpoint"
                                f" {end_v!r} is not a block vertex")
        return problems

    def _check_components(self, block: BlockGraph, sign: str) -> list[str]:
        problems = []
        side = "positive" if sign == ATTRACTING else "negative"
        for v in block.vertices:
            end_id = block.vertex_ends[v]
            if not self.has_end(end_id):
                problems.append(f"block vertex {v!r} carries unknown end"
                                f" {end_id!r}")
        for eid in block.edge_ids:
            end_id = block.edges[eid].end
            if not self.has_end(end_id):
                problems.append(f"block edge {eid!r} carries unknown end"
                                f" {end_id!r}")
        if problems:
            return problems

        comps = block.components()
        for comp in comps:
            cell_ends = {block.vertex_ends[v] for v in comp.vertices}
            cell_ends |= {block.edges[e].end for e in comp.edges}
            if len(cell_ends) > 1:
                problems.append(
                    f"{side} component of {comp.vertices[0]!r} mixes ends"
                    f" {sorted(cell_ends)}")
                continue
            end_id = comp.end
            rec = self.end(end_id)
            if rec.sign != sign:
                problems.append(f"{side} block carries {rec.sign} end"
                                f" {end_id!r}")
            if rec.orbit_leader != end_id:
                problems.append(f"{side} component carries non-leading end"
                                f" {end_id!r}")
            if not comp.joining:
                problems.append(f"{side} component of {comp.vertices[0]!r}"
                                " has no joining edge")
        leaders = sorted(r.id for r in self.ends
                         if r.sign == sign and r.orbit_leader == r.id)
        seen = sorted(c.end for c in comps)
        if seen != leaders:
            problems.append(
                f"{side} block components are keyed by {seen}, expected one"
                f" per orbit: {leaders}")
        return problems

    def _check_map(self) -> list[str]:
        problems = []
        lower = self.lower_graph()
        for v in lower.vertices:
            if v not in self.vertex_map:
                problems.append(f"vertex {v!r} has no image")
        for e in lower.edges:
            if e not in self.edge_map:
                problems.append(f"edge {e!r} has no image")
        for v in self.vertex_map:
            if not lower.has_vertex(v):
                problems.append(f"image given for unknown vertex {v!r}")
        for e in self.edge_map:
            if not lower.has_edge(e):
                problems.append(f"image given for unknown edge {e!r}")
        if problems:
            return problems
        problems.extend(self.graph_map().validation_problems())
        if problems:
            return problems

        image_cells: dict[str, str] = {}
        for v in self.block_neg.vertices:
            image = self.vertex_map[v]
            if image in image_cells:
                problems.append(
                    f"block vertices {image_cells[image]!r} and {v!r} share"
                    f" image {image!r}")
            image_cells[image] = v
        for eid in self.block_neg.edge_ids:
            path = self.edge_map[eid]
            if len(path) != 1:
                problems.append(f"negative block edge {eid!r} has"
                                f" non-combinatorial image {path_name(path)}")
                continue
            image = path[0][0]
            if image in image_cells:
                problems.append(
                    f"block edges {image_cells[image]!r} and {eid!r} share"
                    f" image {image!r}")
            image_cells[image] = eid
        return problems

    def _check_chains(self, forward: dict[str, tuple[str, ...]],
                      backward: dict[str, tuple[str, ...]]) -> list[str]:
        problems = []
        for rec in self.block_pos.joining_edges():
            if not self.has_end(rec.end):
                continue
            q = self.end(rec.end).period
            chain = [rec.tail]
            ok = True
            for step in range(q):
                image = self.vertex_map.get(chain[-1])
                if image is None:
                    problems.append(
                        f"juncture orbit of {rec.id!r} leaves the map's"
                        f" domain at {chain[-1]!r}")
                    ok = False
                    break
                if step < q - 1 and not self.core.has_vertex(image):
                    problems.append(
                        f"juncture orbit of {rec.id!r} leaves the core too"
                        f" early at {image!r}")
                    ok = False
                    break
                chain.append(image)
            if not ok:
                continue
            landing = chain[-1]
            if landing not in self.block_pos.vertex_ends:
                problems.append(
                    f"juncture orbit of {rec.id!r} ends at {landing!r},"
                    " not a positive block vertex")
            elif self.block_pos.vertex_ends[landing] != rec.end:
                problems.append(
                    f"juncture orbit of {rec.id!r} lands in the component of"
                    f" {self.block_pos.vertex_ends[landing]!r},"
                    f" expected {rec.end!r}")
            else:
                forward[rec.id] = tuple(chain)
        core_preimages: dict[str, list[str]] = {}
        for v in self.core.vertices:
            core_preimages.setdefault(self.vertex_map[v], []).append(v)
        block_preimages: dict[str, list[str]] = {}
        for v in self.block_neg.vertices:
            block_preimages.setdefault(self.vertex_map[v], []).append(v)
        for rec in self.block_neg.joining_edges():
            if not self.has_end(rec.end):
                continue
            q = self.end(rec.end).period
            chain = [rec.tail]
            ok = True
            for _ in range(q - 1):
                pulls = core_preimages.get(chain[-1], [])
                if not pulls:
                    problems.append(
                        f"joining edge {rec.id!r}: no core vertex maps to"
                        f" juncture {chain[-1]!r}")
                    ok = False
                    break
                if len(pulls) > 1:
                    problems.append(
                        f"joining edge {rec.id!r}: ambiguous juncture"
                        f" pullback, {sorted(pulls)} all map to {chain[-1]!r}")
                    ok = False
                    break
                chain.append(pulls[0])
            if not ok:
                continue
            pulls = block_preimages.get(chain[-1], [])
            if not pulls:
                problems.append(
                    f"joining edge {rec.id!r}: no negative block vertex maps"
                    f" to {chain[-1]!r}")
                continue
            if len(pulls) > 1:
                problems.append(
                    f"joining edge {rec.id!r}: ambiguous juncture pullback,"
                    f" {sorted(pulls)} all map to {chain[-1]!r}")
                continue
            w = pulls[0]
            if self.block_neg.vertex_ends[w] != rec.end:
                problems.append(
                    f"joining edge {rec.id!r}: pullback {w!r} lies in the"
                    f" component of {self.block_neg.vertex_ends[w]!r},"
                    f" expected {rec.end!r}")
                continue
            backward[rec.id] = tuple(chain) + (w,)
        return problems

    # ----- serialization -----

    def to_data(self) -> dict:
        data = {
            "core": {
                "vertices": list(self.core.vertices),
                "edges": [{"id": e, "tail": self.core.edge_ends(e)[0],
                           "head": self.core.edge_ends(e)[1]}
                          for e in self.core.edges],
            },
            "ends": [{"id": r.id, "sign": r.sign, "period": r.period,
                      "orbit_leader": r.orbit_leader} for r in self.ends],
            "block_pos": self.block_pos.to_data(),
            "block_neg": self.block_neg.to_data(),
            "map": {
                "vertices": {v: self.vertex_map[v]
                             for v in sorted(self.vertex_map)},
                "edges": {e: [step_name(s) for s in self.edge_map[e]]
                          for e in sorted(self.edge_map)},
            },
        }
        if self.name:
            data["name"] = self.name
        if self.reconstructed:
            data["reconstructed"] = True
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_data(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_data(cls, data: dict) -> "EndPeriodicPresentation":
        problems = []
        for key in ("core", "ends", "block_pos", "block_neg", "map"):
            if key not in data:
                problems.append(f"missing field {key!r}")
        if problems:
            raise InvalidPresentation(problems)
        try:
            core = FiniteGraph()
            for v in data["core"].get("vertices", []):
                core.add_vertex(v)
            for rec in data["core"].get("edges", []):
                core.add_edge(rec["id"], rec["tail"], rec["head"])
            blocks = {}
            for key in ("block_pos", "block_neg"):
                block = BlockGraph()
                for rec in data[key].get("vertices", []):
                    block.add_vertex(rec["id"], rec["end"])
                for rec in data[key].get("edges", []):
                    block.add_edge(rec["id"], rec["tail"], rec["head"],
                                   rec["end"], rec["kind"])
                blocks[key] = block
            ends = [EndRecord(rec["id"], rec["sign"], rec["period"],
                              rec["orbit_leader"])
                    for rec in data["ends"]]
            vertex_map = dict(data["map"].get("vertices", {}))
            edge_map = {e: parse_path(steps)
                        for e, steps in data["map"].get("edges", {}).items()}
        except (KeyError, TypeError, ValueError) as exc:
            raise InvalidPresentation([f"malformed presentation data: {exc}"])
        pres = cls(core, blocks["block_pos"], blocks["block_neg"], ends,
                   vertex_map, edge_map,
                   name=data.get("name", ""),
                   reconstructed=bool(data.get("reconstructed", False)))
        pres._normalize_joining_orientation()
        return pres

    @classmethod
    def from_json(cls, text: str) -> "EndPeriodicPresentation":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InvalidPresentation([f"not valid JSON: {exc}"])
        if not isinstance(data, dict):
            raise InvalidPresentation(["top level is not an object"])
        return cls.from_data(data)

    @classmethod
    def load(cls, path) -> "EndPeriodicPresentation":
        with open(path, encoding="utf-8") as handle:
            return cls.from_json(handle.read())

    def _normalize_joining_orientation(self) -> None:
        """Flip joining edges stored block-to-core into standard orientation.

        Flipping an edge reverses what its id denotes, so every occurrence
        in an image path changes sign and the edge's own image reverses.
        """
        flipped: set[str] = set()
        for block in (self.block_pos, self.block_neg):
            for eid in block.edge_ids:
                rec = block.edges[eid]
                if not rec.is_joining:
                    continue
                if rec.tail in block.vertex_ends and \
                        self.core.has_vertex(rec.head):
                    block.edges[eid] = BlockEdge(eid, rec.head, rec.tail,
                                                 rec.end, rec.kind)
                    flipped.add(eid)
        if not flipped:
            return
        self.edge_map = {
            e: tuple((eid, -s if eid in flipped else s) for eid, s in path)
            for e, path in self.edge_map.items()
        }
        for eid in flipped:
            if eid in self.edge_map:
                self.edge_map[eid] = inverse_path(self.edge_map[eid])
