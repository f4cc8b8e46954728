"""Decorated boundary graphs of an end-periodic presentation.

Each leading end E of sign +1 or -1 contributes one boundary component.
The component is the closure of the level-one block of E, with every
juncture vertex identified with its image under the |E|-th power of the
map (forward power on the attracting side, backward on the repelling
side).  Since those powers land inside the block, the quotient graph
lives entirely on block vertices and we name its cells by their block
local ids.

On top of the quotient graph each component carries three decorations:

* ``edge_class``: every edge is either ``subgraph`` or ``joining``;
* ``subdivision_count``: each joining edge is marked with |E| implied
  subdivision points (counts only, never materialized here);
* ``derived_orientation``: joining edges carry a sign relative to their
  stored orientation, -1 on attracting-side components and +1 on
  repelling-side ones.

A decoration map pairs the attracting-side boundary of one presentation
with the repelling-side boundary of another via isomorphisms that
preserve all three layers.  Matching derived orientations across sides
forces joining edges to map with reversed stored orientation, which is
exactly the coorientation-reversing behaviour gluing requires.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations, product
from typing import Callable, Mapping

from .graph import FiniteGraph, Step
from .isomorphism import graph_isomorphisms
from .presentation import (
    JOINING,
    SUBGRAPH,
    EndPeriodicPresentation,
    ValidationReport,
)
from .unrolling import block_components

__all__ = [
    "BoundaryComponent",
    "DecoratedBoundary",
    "DecorationMap",
    "compute_boundary",
    "check_euler",
    "component_isomorphisms",
    "find_decoration_maps",
]


@dataclass(frozen=True)
class BoundaryComponent:
    """One boundary component with its decorations."""

    end: str
    graph: FiniteGraph
    edge_class: Mapping[str, str]
    subdivision_count: Mapping[str, int]
    derived_orientation: Mapping[str, int]

    def joining_edges(self) -> tuple[str, ...]:
        return tuple(
            e for e in self.graph.edges if self.edge_class[e] == JOINING
        )

    def subgraph_edges(self) -> tuple[str, ...]:
        return tuple(
            e for e in self.graph.edges if self.edge_class[e] == SUBGRAPH
        )

    def euler_characteristic(self) -> int:
        return self.graph.euler_characteristic()


@dataclass(frozen=True)
class DecoratedBoundary:
    """All boundary components on one side of a presentation."""

    sign: int
    components: tuple[BoundaryComponent, ...]

    def component(self, end: str) -> BoundaryComponent:
        for comp in self.components:
            if comp.end == end:
                return comp
        raise KeyError(f"no boundary component for end {end!r}")

    def ends(self) -> tuple[str, ...]:
        return tuple(comp.end for comp in self.components)

    def euler_characteristic(self) -> int:
        return sum(comp.euler_characteristic() for comp in self.components)

    def to_dot(self) -> str:
        """Graphviz rendering; joining edges colored, arrowhead follows
        the derived orientation, subdivision count shown as the label."""
        lines = ["digraph boundary {"]
        for comp in self.components:
            lines.append(f'  subgraph "cluster_{comp.end}" {{')
            lines.append(f'    label="{comp.end}";')
            for v in comp.graph.vertices:
                lines.append(f'    "{comp.end}/{v}";')
            for e in comp.graph.edges:
                tail, head = comp.graph.edge_ends(e)
                if comp.edge_class[e] == JOINING:
                    attrs = [
                        f'label="{e} ({comp.subdivision_count[e]})"',
                        "color=blue",
                    ]
                    if comp.derived_orientation[e] < 0:
                        attrs.append("dir=back")
                else:
                    attrs = [f'label="{e}"']
                lines.append(
                    f'    "{comp.end}/{tail}" -> "{comp.end}/{head}"'
                    f' [{", ".join(attrs)}];'
                )
            lines.append("  }")
        lines.append("}")
        return "\n".join(lines) + "\n"


@dataclass(frozen=True)
class DecorationMap:
    """A pairing of attracting-side components with repelling-side ones,
    plus one decoration-preserving isomorphism per pair, keyed by the
    attracting-side end id."""

    pairs: tuple[tuple[str, str], ...]
    vertex_maps: Mapping[str, Mapping[str, str]]
    edge_maps: Mapping[str, Mapping[str, Step]]

    def paired_end(self, positive_end: str) -> str:
        for pos, neg in self.pairs:
            if pos == positive_end:
                return neg
        raise KeyError(f"no pair for end {positive_end!r}")


def _merged_tail(report: ValidationReport, sign: int, edge_id: str) -> str:
    # Both chain tables end at the block vertex the juncture identifies
    # with: forward chains run tail, g(tail), ..., g^|E|(tail); backward
    # chains run tail, then the unique g-preimages down to level -1.
    chains = report.forward_chains if sign > 0 else report.backward_chains
    return chains[edge_id][-1]


def compute_boundary(p: EndPeriodicPresentation, sign: int) -> DecoratedBoundary:
    if sign not in (1, -1):
        raise ValueError("sign must be +1 or -1")
    report = p.validate()
    derived = -1 if sign > 0 else 1
    components = []
    for end_id, block_comp in block_components(p, sign):
        period = p.end(end_id).period
        graph = FiniteGraph()
        for v in sorted(block_comp.vertices):
            graph.add_vertex(v)
        edge_class: dict[str, str] = {}
        subdivision: dict[str, int] = {}
        orientation: dict[str, int] = {}
        block = p.block(sign)
        for eid in sorted(block_comp.edges):
            edge = block.edges[eid]
            if edge.is_joining:
                tail = _merged_tail(report, sign, eid)
                edge_class[eid] = JOINING
                subdivision[eid] = period
                orientation[eid] = derived
            else:
                tail = edge.tail
                edge_class[eid] = SUBGRAPH
            graph.add_edge(eid, tail, edge.head)
        components.append(
            BoundaryComponent(
                end=end_id,
                graph=graph,
                edge_class=edge_class,
                subdivision_count=subdivision,
                derived_orientation=orientation,
            )
        )
    return DecoratedBoundary(sign=sign, components=tuple(components))


def check_euler(p: EndPeriodicPresentation) -> tuple[int, int, bool]:
    """Euler characteristics of both boundaries; equal for maps that are
    homotopy equivalences (the caller asserts that, see the folding
    module for certificates)."""
    chi_pos = compute_boundary(p, 1).euler_characteristic()
    chi_neg = compute_boundary(p, -1).euler_characteristic()
    return chi_pos, chi_neg, chi_pos == chi_neg


def _decoration_edge_label(
    a: BoundaryComponent, b: BoundaryComponent
) -> Callable[[FiniteGraph, str, int], tuple]:
    def label(graph: FiniteGraph, edge_id: str, sign: int) -> tuple:
        comp = a if graph is a.graph else b
        if comp.edge_class[edge_id] == SUBGRAPH:
            return (SUBGRAPH,)
        # Signed derived orientation: matching labels across sides with
        # opposite derived values forces the joining edge to map with
        # reversed stored orientation; same-side comparisons keep it.
        return (
            JOINING,
            comp.subdivision_count[edge_id],
            sign * comp.derived_orientation[edge_id],
        )

    return label


def component_isomorphisms(
    a: BoundaryComponent,
    b: BoundaryComponent,
    limit: int | None = None,
    budget: int = 10**6,
) -> list[tuple[dict[str, str], dict[str, Step]]]:
    """Decoration-preserving isomorphisms between two components.

    Works across sides (derived orientations then force joining edges
    to reverse) and within one side (they force joining edges to keep
    their stored orientation, as rebasing invariance expects).
    """
    return graph_isomorphisms(
        a.graph,
        b.graph,
        edge_label=_decoration_edge_label(a, b),
        limit=limit,
        budget=budget,
    )


def find_decoration_maps(
    a: DecoratedBoundary,
    b: DecoratedBoundary,
    limit: int | None = None,
) -> list[DecorationMap]:
    """All decoration maps from an attracting-side boundary to a
    repelling-side one, in deterministic order.  Empty means the two
    boundaries cannot be glued."""
    if a.sign != 1 or b.sign != -1:
        raise ValueError("expected an attracting-side and a repelling-side boundary")
    if len(a.components) != len(b.components):
        return []
    pos_ends = a.ends()
    results: list[DecorationMap] = []
    for neg_order in permutations(b.ends()):
        per_pair: list[list[tuple[dict[str, str], dict[str, Step]]]] = []
        for pos_end, neg_end in zip(pos_ends, neg_order):
            isos = component_isomorphisms(
                a.component(pos_end), b.component(neg_end)
            )
            if not isos:
                per_pair = []
                break
            per_pair.append(isos)
        if not per_pair:
            continue
        pairs = tuple(zip(pos_ends, neg_order))
        for combo in product(*per_pair):
            results.append(
                DecorationMap(
                    pairs=pairs,
                    vertex_maps={
                        end: combo[i][0] for i, end in enumerate(pos_ends)
                    },
                    edge_maps={
                        end: combo[i][1] for i, end in enumerate(pos_ends)
                    },
                )
            )
            if limit is not None and len(results) >= limit:
                return results
    return results
