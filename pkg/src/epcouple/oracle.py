"""Independent check of a coupling's first-return map.

The mapping-torus squares of each side, stacked one level deeper than
the coupling window, give a discrete model of the suspension flow: each
edge's square has the edge at the bottom and its one-step image along
the top, vertical cells join a vertex to its image, and the identified
ideal neighborhoods become rectangles crossed by the subdividing edges.
Flowing every coupled cell upward through this model until it lands
back in the coupled graph recomputes the first return one edge at a
time, without reading the map stored on the coupling.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .boundary import compute_boundary
from .coupling import ThetaComplex
from .errors import TruncationTooShallow
from .graph import EdgePath, Step, path_name
from .presentation import JOINING
from .unrolling import level_name, split_level, unroll


@dataclass(frozen=True)
class IdealRectangle:
    """One glued ideal neighborhood with its chain of crossings."""

    side: str
    end: str
    edge: str
    entry: str
    crossings: tuple[str, ...]
    exit: Step


@dataclass
class DiscreteSemiflow:
    """Cellular scaffolding of the suspension flow on both sides.

    squares maps each deep edge to the top of its mapping-torus square;
    verticals maps each deep vertex one step up.  Both run one level
    past the coupling window, so every upward chain out of a coupled
    cell is visible until it returns.
    """

    depth: int
    squares: dict[str, EdgePath]
    verticals: dict[str, str]
    rectangles: tuple[IdealRectangle, ...]


@dataclass
class OracleReport:
    """Edge-by-edge agreement between the semiflow and the stored map."""

    semiflow: DiscreteSemiflow
    expected: dict[str, EdgePath]
    per_edge: dict[str, bool]
    disagreements: tuple[str, ...]
    vertex_disagreements: tuple[str, ...] = field(default_factory=tuple)

    def agreed(self) -> bool:
        return not self.disagreements and not self.vertex_disagreements

    def describe(self) -> str:
        lines = []
        for e in sorted(self.per_edge):
            want = path_name(self.expected[e]) if e in self.expected else "?"
            if self.per_edge[e]:
                lines.append(f"ok      {e} -> {want}")
            else:
                lines.append(f"DIFFER  {e} -> {want}")
        good = sum(1 for ok in self.per_edge.values() if ok)
        lines.append(f"agreement: {good}/{len(self.per_edge)}")
        if self.vertex_disagreements:
            lines.append("vertex disagreements: "
                         + ", ".join(self.vertex_disagreements))
        return "\n".join(lines) + "\n"


def first_return_oracle(theta: ThetaComplex,
                        depth: int | None = None) -> OracleReport:
    """Recompute the first return of every coupled cell from the flow.

    Interior cells flow one period up their own mapping torus; deepest
    positive blocks chase tail and head columns through the glued
    rectangles, one vertical step per crossing, validating every
    crossing endpoint on the way.
    """
    m = theta.cutoff
    if depth is None:
        depth = m + 1
    if depth < m + 1:
        raise TruncationTooShallow(
            f"the semiflow needs depth {m + 1}, got {depth}")

    big = {"L": unroll(theta.left, depth), "R": unroll(theta.right, depth)}
    windows = {"L": unroll(theta.left, m), "R": unroll(theta.right, m)}

    squares: dict[str, EdgePath] = {}
    verticals: dict[str, str] = {}
    for tag in ("L", "R"):
        for e, path in sorted(big[tag].map.edge_images.items()):
            squares[f"{tag}:{e}"] = tuple((f"{tag}:{c}", s) for c, s in path)
        for v, image in sorted(big[tag].map.vertex_images.items()):
            verticals[f"{tag}:{v}"] = f"{tag}:{image}"

    expected: dict[str, EdgePath] = {}
    expected_vertices: dict[str, str] = {}
    broken: set[str] = set()

    # interior cells: one flow period, landing inside the window
    for tag in ("L", "R"):
        levels = big[tag].cell_levels
        for e in windows[tag].map.edge_images:
            path = big[tag].map.edge_images[e]
            assert all(abs(levels[c]) <= m for c, _ in path)
            expected[f"{tag}:{e}"] = tuple((f"{tag}:{c}", s) for c, s in path)
        for v in windows[tag].map.vertex_images:
            image = big[tag].map.vertex_images[v]
            assert abs(levels[image]) <= m
            expected_vertices[f"{tag}:{v}"] = f"{tag}:{image}"

    rectangles: list[IdealRectangle] = []
    rectangles += _chase_crossings(theta, big, "+",
                                   compute_boundary(theta.left, 1),
                                   compute_boundary(theta.right, -1),
                                   theta.pairing.forward, "L", "R",
                                   expected, expected_vertices, broken)
    rectangles += _chase_crossings(theta, big, "-",
                                   compute_boundary(theta.right, 1),
                                   compute_boundary(theta.left, -1),
                                   theta.pairing.backward, "R", "L",
                                   expected, expected_vertices, broken)

    per_edge: dict[str, bool] = {}
    for e in theta.graph.edges:
        assert e in expected, f"no semiflow successor derived for {e!r}"
        actual = theta.first_return.edge_images[e]
        per_edge[e] = expected[e] == actual and e not in broken
    vertex_bad = []
    for v in theta.graph.vertices:
        assert v in expected_vertices, v
        if theta.first_return.vertex_images[v] != expected_vertices[v]:
            vertex_bad.append(v)

    semiflow = DiscreteSemiflow(depth=depth, squares=squares,
                                verticals=verticals,
                                rectangles=tuple(rectangles))
    return OracleReport(
        semiflow=semiflow,
        expected=expected,
        per_edge=per_edge,
        disagreements=tuple(sorted(e for e, ok in per_edge.items() if not ok)),
        vertex_disagreements=tuple(sorted(vertex_bad)))


def _chase_crossings(theta: ThetaComplex, big: dict, sign: str,
                     b_pos, b_neg, half, src: str, dst: str,
                     expected: dict[str, EdgePath],
                     expected_vertices: dict[str, str],
                     broken: set[str]) -> list[IdealRectangle]:
    m = theta.cutoff
    big_src, big_dst = big[src], big[dst]
    rectangles = []
    for pos_end, neg_end in sorted(half.pairs):
        comp = b_pos.component(pos_end)
        b_neg.component(neg_end)
        vmap = half.vertex_maps[pos_end]
        emap = half.edge_maps[pos_end]

        for x in sorted(comp.graph.vertices):
            expected_vertices[f"{src}:{level_name(x, m)}"] = \
                f"{dst}:{level_name(vmap[x], -m)}"

        for e in sorted(comp.graph.edges):
            e2, s2 = emap[e]
            entry = f"{src}:{level_name(e, m)}"
            far_edge = level_name(e2, -m)
            far = f"{dst}:{far_edge}"
            deep_t, deep_h = big_src.graph.edge_ends(level_name(e, m))
            far_t, far_h = big_dst.graph.edge_ends(far_edge)

            if comp.edge_class[e] != JOINING:
                expected[entry] = ((far, s2),)
                want = (level_name(vmap[split_level(deep_t)[0]], -m),
                        level_name(vmap[split_level(deep_h)[0]], -m))
                got = (far_t, far_h) if s2 > 0 else (far_h, far_t)
                if want != got:
                    broken.add(entry)
                continue

            q = comp.subdivision_count[e]
            chain = [f"S{sign}:{e}:{j}" for j in range(1, q + 1)]
            expected[entry] = ((chain[0], 1),)
            # tail column climbs by g, head column descends ahead of g'
            v = deep_t
            u = level_name(vmap[split_level(deep_h)[0]], -m)
            for j, sid in enumerate(chain, start=1):
                v = big_src.map.vertex_images[v]
                if not theta.graph.has_edge(sid) or \
                        theta.graph.edge_ends(sid) != \
                        (f"{src}:{v}", f"{dst}:{u}"):
                    broken.add(sid if theta.graph.has_edge(sid) else entry)
                expected[sid] = ((chain[j], 1),) if j < q else ((far, -1),)
                u = big_dst.map.vertex_images[u]
            # rectangle exit: the far edge reversed must continue both columns
            if level_name(vmap[split_level(v)[0]], -m) != far_h or \
                    u != far_t:
                broken.add(chain[-1])
            rectangles.append(IdealRectangle(
                side=sign, end=pos_end, edge=e, entry=entry,
                crossings=tuple(chain), exit=(far, -1)))
    return rectangles
