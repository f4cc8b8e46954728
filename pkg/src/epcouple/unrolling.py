"""Finite windows of the presented infinite graph.

Block cells at level n are named by suffixing the stored id with "@n";
core cells keep their bare ids.  These labels make every truncation a
labeled subgraph of every deeper one.
"""
from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidPresentation, OutOfTruncation
from .graph import EdgePath, FiniteGraph, Step, inverse_path, parse_step
from .maps import GraphMap
from .presentation import (BlockGraph, EndPeriodicPresentation,
                           ValidationReport)


def level_name(local: str, level: int) -> str:
    return local if level == 0 else f"{local}@{level}"


def split_level(cell: str) -> tuple[str, int]:
    """Inverse of level_name for ids produced by unroll."""
    base, sep, tail = cell.rpartition("@")
    if sep:
        try:
            return base, int(tail)
        except ValueError:
            pass
    return cell, 0


@dataclass
class Truncation:
    """The subgraph spanned by blocks -n..n, with the map where it stays."""
    presentation: EndPeriodicPresentation
    report: ValidationReport
    level: int
    graph: FiniteGraph
    map: GraphMap
    cell_levels: dict[str, int]

    def cells_at(self, level: int) -> list[str]:
        return sorted(c for c, lv in self.cell_levels.items() if lv == level)


def _rename_upper(path: EdgePath, block: BlockGraph) -> EdgePath:
    """Stored image paths live in core + block_pos; tag block steps @1."""
    return tuple((level_name(e, 1) if e in block.edges else e, s)
                 for e, s in path)


def unroll(pres: EndPeriodicPresentation, n: int) -> Truncation:
    if n < 1:
        raise ValueError(f"truncation level must be >= 1, got {n}")
    report = pres.validate()

    graph = pres.core.copy()
    cell_levels: dict[str, int] = {c: 0 for c in pres.core.vertices}
    cell_levels.update({c: 0 for c in pres.core.edges})

    for signed, block, chains in (
            (+1, pres.block_pos, report.forward_chains),
            (-1, pres.block_neg, report.backward_chains)):
        for k in range(1, n + 1):
            level = signed * k
            for v in block.vertices:
                graph.add_vertex(level_name(v, level))
                cell_levels[level_name(v, level)] = level
            for rec in (block.edges[e] for e in block.edge_ids):
                name = level_name(rec.id, level)
                head = level_name(rec.head, level)
                if not rec.is_joining:
                    tail = level_name(rec.tail, level)
                else:
                    chain = chains[rec.id]
                    q = pres.end(rec.end).period
                    if k <= q:
                        tail = chain[k - 1]
                    else:
                        tail = level_name(chain[q], signed * (k - q))
                graph.add_edge(name, tail, head)
                cell_levels[name] = level

    vertex_images: dict[str, str] = {}
    edge_images: dict[str, EdgePath] = {}
    for v in pres.core.vertices:
        vertex_images[v] = level_name(pres.vertex_map[v], 1) \
            if pres.vertex_map[v] in pres.block_pos.vertex_ends \
            else pres.vertex_map[v]
    for e in pres.core.edges:
        edge_images[e] = _rename_upper(pres.edge_map[e], pres.block_pos)
    for v in pres.block_neg.vertices:
        image = pres.vertex_map[v]
        vertex_images[level_name(v, -1)] = level_name(image, 1) \
            if image in pres.block_pos.vertex_ends else image
    for e in pres.block_neg.edge_ids:
        edge_images[level_name(e, -1)] = _rename_upper(pres.edge_map[e],
                                                       pres.block_pos)
    for k in range(1, n):
        for v in pres.block_pos.vertices:
            vertex_images[level_name(v, k)] = level_name(v, k + 1)
        for e in pres.block_pos.edge_ids:
            edge_images[level_name(e, k)] = ((level_name(e, k + 1), 1),)
    for k in range(2, n + 1):
        for v in pres.block_neg.vertices:
            vertex_images[level_name(v, -k)] = level_name(v, -(k - 1))
        for e in pres.block_neg.edge_ids:
            edge_images[level_name(e, -k)] = ((level_name(e, -(k - 1)), 1),)

    domain = graph.subgraph(sorted(vertex_images), sorted(edge_images))
    partial = GraphMap(domain, graph, vertex_images, edge_images)
    return Truncation(pres, report, n, graph, partial, cell_levels)


def evaluate_map(t: Truncation, cell: str):
    """Image of a cell: a vertex id for vertices, a path for edges.

    Edges may be passed with a "-" prefix.  Cells whose image leaves the
    window (positive block at level n) raise OutOfTruncation.
    """
    eid, sign = parse_step(cell)
    if t.graph.has_vertex(eid):
        if eid in t.map.vertex_images:
            return t.map.vertex_images[eid]
        raise OutOfTruncation(
            f"image of {eid!r} lies outside level {t.level}; unroll deeper")
    if t.graph.has_edge(eid):
        if eid in t.map.edge_images:
            path = t.map.edge_images[eid]
            return path if sign > 0 else inverse_path(path)
        raise OutOfTruncation(
            f"image of {eid!r} lies outside level {t.level}; unroll deeper")
    base, level = split_level(eid)
    known = (t.presentation.core.has_vertex(base)
             or t.presentation.core.has_edge(base)
             or base in t.presentation.block_pos.vertex_ends
             or base in t.presentation.block_pos.edges
             or base in t.presentation.block_neg.vertex_ends
             or base in t.presentation.block_neg.edges)
    if known and abs(level) > t.level:
        raise OutOfTruncation(
            f"{eid!r} lies outside level {t.level}; unroll deeper")
    raise ValueError(f"unknown cell {cell!r}")


def block_components(pres: EndPeriodicPresentation, sign: int):
    """One (leading end, component) pair per end orbit on the given side."""
    pres.validate()
    block = pres.block(sign)
    return [(comp.end, comp) for comp in block.components()]


def proper_core(pres: EndPeriodicPresentation) -> tuple[int, EndPeriodicPresentation]:
    """Enlarge the core until it holds every non-combinatorial edge image.

    Stored images already live in core + block 1, so one enlargement
    always suffices; N is 0 or 1 and the N = 0 case returns the input.
    """
    pres.validate()
    needs = False
    block_edges = set(pres.block_pos.edges)
    block_vertices = set(pres.block_pos.vertex_ends)
    for e in pres.core.edges:
        image = pres.edge_map[e]
        if len(image) == 1:
            continue
        if any(step[0] in block_edges for step in image):
            needs = True
        if not image:
            t, h = pres.core.edge_ends(e)
            if pres.vertex_map[t] in block_vertices:
                needs = True
    if not needs:
        return 0, pres
    return 1, rebase_once(pres)


def rebase_once(pres: EndPeriodicPresentation) -> EndPeriodicPresentation:
    """Absorb blocks +-1 into the core, presenting the same map.

    The new core is the |level| <= 1 window, the new blocks sit at
    levels +-2, and the map data comes from the depth-2 truncation.
    """
    t2 = unroll(pres, 2)
    core = t2.graph.subgraph(
        [v for v in t2.graph.vertices if abs(t2.cell_levels[v]) <= 1],
        [e for e in t2.graph.edges if abs(t2.cell_levels[e]) <= 1])

    block_pos = BlockGraph()
    for v in pres.block_pos.vertices:
        block_pos.add_vertex(level_name(v, 2), pres.block_pos.vertex_ends[v])
    for rec in (pres.block_pos.edges[e] for e in pres.block_pos.edge_ids):
        name = level_name(rec.id, 2)
        tail, head = t2.graph.edge_ends(name)
        block_pos.add_edge(name, tail, head, rec.end, rec.kind)
    block_neg = BlockGraph()
    for v in pres.block_neg.vertices:
        block_neg.add_vertex(level_name(v, -2), pres.block_neg.vertex_ends[v])
    for rec in (pres.block_neg.edges[e] for e in pres.block_neg.edge_ids):
        name = level_name(rec.id, -2)
        tail, head = t2.graph.edge_ends(name)
        block_neg.add_edge(name, tail, head, rec.end, rec.kind)

    return EndPeriodicPresentation(
        core, block_pos, block_neg, list(pres.ends),
        dict(t2.map.vertex_images), dict(t2.map.edge_images),
        name=f"{pres.name}+1" if pres.name else "",
        reconstructed=pres.reconstructed)
