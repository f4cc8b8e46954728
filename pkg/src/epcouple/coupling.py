"""Coupling two end-periodic presentations along their boundaries.

Two presentations whose decorated boundaries match can be glued: the
attracting side of each is identified with the repelling side of the
other.  The glued object is carried by one finite graph, built from a
truncation window of each presentation plus crossing edges that
subdivide the identified ideal neighborhoods.  The first return of the
combined flow is a self-map of that graph; its mapping torus presents
the glued space, so a free-by-cyclic presentation with certificates
falls out of the fold machinery.
"""
from __future__ import annotations

import json
import random
from dataclasses import dataclass
from typing import Mapping

from .boundary import (DecoratedBoundary, DecorationMap, compute_boundary)
from .errors import (CutoffTooSmall, IncompatibleDecoration,
                     NotBoundaryCollapsed)
from .folding import (HomotopyEquivalenceCertificate,
                      certify_homotopy_equivalence,
                      fold_decompose_end_periodic)
from .graph import EdgePath, FiniteGraph
from .maps import GraphMap
from .pi1 import (SpanningTree, Word, induced_pi1_map, pi1_basis,
                  reduce_word)
from .presentation import JOINING, BlockGraph, EndPeriodicPresentation
from .unrolling import level_name, unroll

LEFT = "left"
RIGHT = "right"
_TAG = {LEFT: "L", RIGHT: "R"}


def _cutoff_floor(left: EndPeriodicPresentation,
                  right: EndPeriodicPresentation) -> int:
    periods = [rec.period for rec in left.ends] + \
              [rec.period for rec in right.ends]
    return max(2, max(periods, default=1))


@dataclass(frozen=True)
class CouplingConfig:
    """Truncation depth used on both sides of a coupling.

    A single uniform cutoff.  Paired ideal neighborhoods share their
    crossing rectangles, so per-component depths cannot disagree; mixed
    requests are rejected outright instead of being averaged.
    """

    cutoff: int

    @classmethod
    def for_pair(cls, left: EndPeriodicPresentation,
                 right: EndPeriodicPresentation) -> "CouplingConfig":
        return cls(cutoff=_cutoff_floor(left, right))

    @classmethod
    def from_cutoffs(cls, cutoffs) -> "CouplingConfig":
        if isinstance(cutoffs, Mapping):
            values = sorted(set(int(v) for v in cutoffs.values()))
            if len(values) > 1:
                raise CutoffTooSmall(
                    f"mixed cutoffs {values} cannot be matched across the"
                    " glued components; use one uniform depth")
            if not values:
                raise CutoffTooSmall("no cutoff given")
            return cls(cutoff=values[0])
        return cls(cutoff=int(cutoffs))


@dataclass(frozen=True)
class CouplingMap:
    """Both halves of a boundary identification.

    forward glues the left presentation's attracting boundary to the
    right one's repelling boundary; backward glues the right one's
    attracting boundary back to the left.  Each half keeps the
    find_decoration_maps convention: keyed by the attracting-side end.
    """

    forward: DecorationMap
    backward: DecorationMap

    def to_data(self) -> dict:
        return {"forward": _decoration_to_data(self.forward),
                "backward": _decoration_to_data(self.backward)}

    def to_json(self) -> str:
        return json.dumps(self.to_data(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_data(cls, data: dict) -> "CouplingMap":
        try:
            return cls(forward=_decoration_from_data(data["forward"]),
                       backward=_decoration_from_data(data["backward"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise IncompatibleDecoration(f"malformed pairing data: {exc}")

    @classmethod
    def from_json(cls, text: str) -> "CouplingMap":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise IncompatibleDecoration(f"not valid JSON: {exc}")
        return cls.from_data(data)


def _decoration_to_data(dm: DecorationMap) -> dict:
    return {
        "pairs": [list(pair) for pair in dm.pairs],
        "vertex_maps": {end: dict(sorted(vm.items()))
                        for end, vm in sorted(dm.vertex_maps.items())},
        "edge_maps": {end: {e: [s[0], s[1]] for e, s in sorted(em.items())}
                      for end, em in sorted(dm.edge_maps.items())},
    }


def _decoration_from_data(data: dict) -> DecorationMap:
    pairs = tuple((str(a), str(b)) for a, b in data["pairs"])
    vertex_maps = {end: dict(vm) for end, vm in data["vertex_maps"].items()}
    edge_maps = {end: {e: (str(s[0]), int(s[1])) for e, s in em.items()}
                 for end, em in data["edge_maps"].items()}
    return DecorationMap(pairs=pairs, vertex_maps=vertex_maps,
                         edge_maps=edge_maps)


@dataclass(frozen=True)
class Provenance:
    """Where a coupled cell came from.

    Interior cells remember their side and level; crossing cells
    remember which ideal neighborhood they subdivide and their position
    in the chain of crossings.
    """

    kind: str
    side: str
    level: int | None = None
    end: str | None = None
    ideal_edge: str | None = None
    index: int | None = None


@dataclass
class ThetaComplex:
    """The glued finite graph with its first-return self-map.

    The graph is the disjoint union of the two truncation windows, all
    cells prefixed "L:" or "R:", plus crossing edges "S+:e:j" and
    "S-:e:j" that subdivide the identified ideal neighborhoods: one
    chain of period-many edges per paired joining edge.
    """

    left: EndPeriodicPresentation
    right: EndPeriodicPresentation
    pairing: CouplingMap
    cutoff: int
    graph: FiniteGraph
    first_return: GraphMap
    provenance: dict[str, Provenance]
    crossings_plus: tuple[str, ...]
    crossings_minus: tuple[str, ...]

    def euler_characteristic(self) -> int:
        return self.graph.euler_characteristic()

    def interior_edges(self, side: str) -> tuple[str, ...]:
        tag = _TAG[side] + ":"
        return tuple(e for e in self.graph.edges if e.startswith(tag))

    def crossing_edges(self) -> tuple[str, ...]:
        return self.crossings_plus + self.crossings_minus

    def to_data(self) -> dict:
        return {
            "left": self.left.to_data(),
            "right": self.right.to_data(),
            "pairing": self.pairing.to_data(),
            "cutoff": self.cutoff,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_data(), indent=2, sort_keys=True) + "\n"

    @classmethod
    def from_data(cls, data: dict) -> "ThetaComplex":
        left = EndPeriodicPresentation.from_data(data["left"])
        right = EndPeriodicPresentation.from_data(data["right"])
        pairing = CouplingMap.from_data(data["pairing"])
        config = CouplingConfig(cutoff=int(data["cutoff"]))
        return couple(left, right, pairing, config)

    @classmethod
    def from_json(cls, text: str) -> "ThetaComplex":
        return cls.from_data(json.loads(text))

    def to_dot(self) -> str:
        lines = ["digraph coupled {"]
        color = {"interior": "black", "crossing": "blue"}
        for v in self.graph.vertices:
            lines.append(f'  "{v}";')
        for e in self.graph.edges:
            tail, head = self.graph.edge_ends(e)
            kind = self.provenance[e].kind
            lines.append(f'  "{tail}" -> "{head}"'
                         f' [label="{e}", color={color[kind]}];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def _check_half(b_pos: DecoratedBoundary, b_neg: DecoratedBoundary,
                dm: DecorationMap, label: str) -> None:
    """Reject a half pairing unless it is a decoration isomorphism."""
    pos_ends = [pos for pos, _ in dm.pairs]
    neg_ends = [neg for _, neg in dm.pairs]
    if sorted(pos_ends) != sorted(b_pos.ends()):
        raise IncompatibleDecoration(
            f"{label}: pairs cover {sorted(pos_ends)}, the attracting side"
            f" has {sorted(b_pos.ends())}")
    if sorted(neg_ends) != sorted(b_neg.ends()):
        raise IncompatibleDecoration(
            f"{label}: pairs hit {sorted(neg_ends)}, the repelling side"
            f" has {sorted(b_neg.ends())}")
    for pos_end, neg_end in dm.pairs:
        a = b_pos.component(pos_end)
        b = b_neg.component(neg_end)
        vmap = dm.vertex_maps.get(pos_end)
        emap = dm.edge_maps.get(pos_end)
        if vmap is None or emap is None:
            raise IncompatibleDecoration(
                f"{label}: pair {pos_end!r} carries no isomorphism")
        if sorted(vmap) != sorted(a.graph.vertices) or \
                sorted(vmap.values()) != sorted(b.graph.vertices):
            raise IncompatibleDecoration(
                f"{label}: {pos_end!r} vertex map is not a bijection onto"
                f" the {neg_end!r} component")
        if sorted(emap) != sorted(a.graph.edges) or \
                sorted(e2 for e2, _ in emap.values()) != sorted(b.graph.edges):
            raise IncompatibleDecoration(
                f"{label}: {pos_end!r} edge map is not a bijection onto"
                f" the {neg_end!r} component")
        for e, (e2, s) in sorted(emap.items()):
            if a.edge_class[e] != b.edge_class[e2]:
                raise IncompatibleDecoration(
                    f"{label}: {e!r} and {e2!r} differ in class")
            if a.edge_class[e] == JOINING:
                if a.subdivision_count[e] != b.subdivision_count[e2]:
                    raise IncompatibleDecoration(
                        f"{label}: {e!r} and {e2!r} differ in subdivision"
                        f" count")
                if s * a.derived_orientation[e] != b.derived_orientation[e2]:
                    raise IncompatibleDecoration(
                        f"{label}: {e!r} -> {e2!r} breaks the derived"
                        f" orientation")
            ta, ha = a.graph.edge_ends(e)
            tb, hb = b.graph.edge_ends(e2)
            if s < 0:
                tb, hb = hb, tb
            if (vmap[ta], vmap[ha]) != (tb, hb):
                raise IncompatibleDecoration(
                    f"{label}: {e!r} -> {e2!r} does not respect endpoints")


def _block_identification(src: BlockGraph, dst: BlockGraph) -> dict[str, str]:
    """Name correspondence between two presentations' copies of one block.

    A homotopy inverse carries the original blocks either verbatim or
    displaced by one rebasing level, so the correspondence is a pure
    renaming; anything else is not a canonical pairing.
    """
    src_vertices = sorted(src.vertex_ends)
    src_edges = sorted(src.edges)
    dst_vertices = set(dst.vertex_ends)
    dst_edges = set(dst.edges)
    candidates = [
        {x: x for x in src_vertices + src_edges},
        {x: level_name(x, 2) for x in src_vertices + src_edges},
        {x: level_name(x, -2) for x in src_vertices + src_edges},
    ]
    for shift in (2, -2):
        back = {level_name(y, shift): y
                for y in list(dst_vertices) + list(dst_edges)}
        if all(x in back for x in src_vertices + src_edges):
            candidates.append({x: back[x] for x in src_vertices + src_edges})
    for ren in candidates:
        if {ren[v] for v in src_vertices} == dst_vertices and \
                {ren[e] for e in src_edges} == dst_edges:
            return ren
    raise IncompatibleDecoration(
        "no name correspondence between the paired blocks")


def canonical_h(p: EndPeriodicPresentation, inverse_result) -> CouplingMap:
    """The canonical identification of a collapsed presentation's
    boundary with its homotopy inverse's.

    Composes the cell-by-cell identification of the shared blocks with
    the reversal of every joining edge.  Reversal is well defined only
    when every boundary component has a single vertex, hence the
    collapsed hypothesis on both presentations.
    """
    inv = getattr(inverse_result, "presentation", inverse_result)
    for pres, who in ((p, "the presentation"), (inv, "the inverse")):
        report = pres.validate()
        for comp in (report.positive_components +
                     report.negative_components):
            if len(comp.vertices) != 1:
                raise NotBoundaryCollapsed(
                    f"{who}: component {comp.end!r} has"
                    f" {len(comp.vertices)} vertices; collapse first")
    forward_names = _block_identification(p.block_pos, inv.block_neg)
    backward_names = _block_identification(inv.block_pos, p.block_neg)
    forward = _canonical_half(compute_boundary(p, 1),
                              compute_boundary(inv, -1), forward_names)
    backward = _canonical_half(compute_boundary(inv, 1),
                               compute_boundary(p, -1), backward_names)
    _check_half(compute_boundary(p, 1), compute_boundary(inv, -1),
                forward, "forward")
    _check_half(compute_boundary(inv, 1), compute_boundary(p, -1),
                backward, "backward")
    return CouplingMap(forward=forward, backward=backward)


def _canonical_half(b_pos: DecoratedBoundary, b_neg: DecoratedBoundary,
                    names: dict[str, str]) -> DecorationMap:
    pairs = []
    vertex_maps = {}
    edge_maps = {}
    for comp in b_pos.components:
        try:
            b_neg.component(comp.end)
        except KeyError:
            raise IncompatibleDecoration(
                f"no repelling component for end {comp.end!r}")
        pairs.append((comp.end, comp.end))
        vertex_maps[comp.end] = {v: names[v] for v in comp.graph.vertices}
        edge_maps[comp.end] = {
            e: (names[e], -1 if comp.edge_class[e] == JOINING else 1)
            for e in comp.graph.edges}
    return DecorationMap(pairs=tuple(pairs), vertex_maps=vertex_maps,
                         edge_maps=edge_maps)


def couple(left: EndPeriodicPresentation, right: EndPeriodicPresentation,
           pairing: CouplingMap,
           config: CouplingConfig | None = None) -> ThetaComplex:
    """Glue two presentations along their boundaries.

    Builds the coupled graph from the depth-m windows of both sides and
    the crossing chains, and assembles the first return: one flow period
    on the interiors, the correspondence across the glued neighborhoods
    on the deepest positive blocks.
    """
    left.validate()
    right.validate()
    if config is None:
        config = CouplingConfig.for_pair(left, right)
    m = config.cutoff
    floor = _cutoff_floor(left, right)
    if m < floor:
        raise CutoffTooSmall(f"cutoff {m} is below the minimum {floor}")

    b_left_pos = compute_boundary(left, 1)
    b_left_neg = compute_boundary(left, -1)
    b_right_pos = compute_boundary(right, 1)
    b_right_neg = compute_boundary(right, -1)
    _check_half(b_left_pos, b_right_neg, pairing.forward, "forward")
    _check_half(b_right_pos, b_left_neg, pairing.backward, "backward")

    windows = {LEFT: unroll(left, m), RIGHT: unroll(right, m)}
    graph = FiniteGraph()
    provenance: dict[str, Provenance] = {}
    vertex_images: dict[str, str] = {}
    edge_images: dict[str, EdgePath] = {}

    for side in (LEFT, RIGHT):
        t = windows[side]
        tag = _TAG[side]
        for v in sorted(t.graph.vertices):
            graph.add_vertex(f"{tag}:{v}")
            provenance[f"{tag}:{v}"] = Provenance(
                kind="interior", side=side, level=t.cell_levels[v])
        for e in sorted(t.graph.edges):
            a, b = t.graph.edge_ends(e)
            graph.add_edge(f"{tag}:{e}", f"{tag}:{a}", f"{tag}:{b}")
            provenance[f"{tag}:{e}"] = Provenance(
                kind="interior", side=side, level=t.cell_levels[e])
        # one flow period wherever it stays inside the window
        for v, image in sorted(t.map.vertex_images.items()):
            vertex_images[f"{tag}:{v}"] = f"{tag}:{image}"
        for e, path in sorted(t.map.edge_images.items()):
            edge_images[f"{tag}:{e}"] = tuple(
                (f"{tag}:{c}", s) for c, s in path)

    crossings_plus = _attach_crossings(
        graph, provenance, vertex_images, edge_images, "+",
        b_left_pos, b_right_neg, pairing.forward, m, _TAG[LEFT], _TAG[RIGHT])
    crossings_minus = _attach_crossings(
        graph, provenance, vertex_images, edge_images, "-",
        b_right_pos, b_left_neg, pairing.backward, m, _TAG[RIGHT], _TAG[LEFT])

    first_return = GraphMap(graph, graph, vertex_images, edge_images)
    problems = first_return.validation_problems()
    assert not problems, problems
    assert graph.is_connected()

    chi = windows[LEFT].graph.euler_characteristic() + \
        windows[RIGHT].graph.euler_characteristic() - \
        len(crossings_plus) - len(crossings_minus)
    assert graph.euler_characteristic() == chi
    assert len(crossings_plus) == sum(
        comp.subdivision_count[e]
        for comp in b_left_pos.components for e in comp.joining_edges())

    theta = ThetaComplex(
        left=left, right=right, pairing=pairing, cutoff=m, graph=graph,
        first_return=first_return, provenance=provenance,
        crossings_plus=crossings_plus, crossings_minus=crossings_minus)
    assert _crossing_restriction_bijective(theta, "+")
    assert _crossing_restriction_bijective(theta, "-")
    return theta


def _attach_crossings(graph: FiniteGraph, provenance: dict[str, Provenance],
                      vertex_images: dict[str, str],
                      edge_images: dict[str, EdgePath], sign: str,
                      b_pos: DecoratedBoundary, b_neg: DecoratedBoundary,
                      half: DecorationMap, m: int, src_tag: str,
                      dst_tag: str) -> tuple[str, ...]:
    """Crossing chains and first-return rules for one glued side.

    The deepest positive block on the source side maps across the
    gluing: subgraph cells and vertices to their correspondents at
    depth -m, each joining edge into its chain of crossings, and the
    last crossing onto the far joining edge reversed.
    """
    made: list[str] = []
    for pos_end, neg_end in sorted(half.pairs):
        comp = b_pos.component(pos_end)
        ncomp = b_neg.component(neg_end)
        vmap = half.vertex_maps[pos_end]
        emap = half.edge_maps[pos_end]
        for x in sorted(comp.graph.vertices):
            vertex_images[f"{src_tag}:{level_name(x, m)}"] = \
                f"{dst_tag}:{level_name(vmap[x], -m)}"
        for e in sorted(comp.graph.edges):
            e2, s = emap[e]
            entry = f"{src_tag}:{level_name(e, m)}"
            far = f"{dst_tag}:{level_name(e2, -m)}"
            if comp.edge_class[e] != JOINING:
                edge_images[entry] = ((far, s),)
                continue
            q = comp.subdivision_count[e]
            near_tail = comp.graph.edge_ends(e)[0]
            far_tail = ncomp.graph.edge_ends(e2)[0]
            chain = [f"S{sign}:{e}:{j}" for j in range(1, q + 1)]
            for j, sid in enumerate(chain, start=1):
                graph.add_edge(
                    sid,
                    f"{src_tag}:{level_name(near_tail, m - q + j)}",
                    f"{dst_tag}:{level_name(far_tail, j - 1 - m)}")
                provenance[sid] = Provenance(
                    kind="crossing", side=sign, end=pos_end,
                    ideal_edge=e, index=j)
            edge_images[entry] = ((chain[0], 1),)
            for j in range(q - 1):
                edge_images[chain[j]] = ((chain[j + 1], 1),)
            edge_images[chain[-1]] = ((far, -1),)
            made.extend(chain)
    return tuple(made)


def _crossing_restriction_bijective(theta: ThetaComplex, sign: str) -> bool:
    """The first return restricted to the deepest source block plus its
    crossings must be a bijection onto the crossings plus the deepest
    far block."""
    src_tag, dst_tag = ("L", "R") if sign == "+" else ("R", "L")
    crossings = theta.crossings_plus if sign == "+" else \
        theta.crossings_minus
    src = [e for e in theta.graph.edges
           if e.startswith(src_tag + ":")
           and theta.provenance[e].level == theta.cutoff]
    dst = [e for e in theta.graph.edges
           if e.startswith(dst_tag + ":")
           and theta.provenance[e].level == -theta.cutoff]
    domain = src + list(crossings)
    target = list(crossings) + dst
    images = []
    for e in domain:
        path = theta.first_return.edge_images[e]
        if len(path) != 1:
            return False
        images.append(path[0][0])
    return sorted(images) == sorted(target)


def certify_f(theta: ThetaComplex,
              rng: random.Random | None = None
              ) -> HomotopyEquivalenceCertificate:
    """Fold certification of the first-return map."""
    return certify_homotopy_equivalence(theta.first_return, rng=rng)


def word_text(word: Word) -> str:
    if not word:
        return "1"
    return " ".join(f"x{abs(k)}" + ("" if k > 0 else "^-1") for k in word)


@dataclass(frozen=True)
class FreeByCyclicPresentation:
    """Certified free-by-cyclic presentation of a coupled space.

    rank generators, one monodromy word per generator, and the evidence
    bundle: both constituents certified, the first return certified,
    the boundary checks, and the semiflow oracle's verdict.
    """

    rank: int
    basis_edges: tuple[str, ...]
    monodromy: tuple[Word, ...]
    constituent_certificates: tuple[HomotopyEquivalenceCertificate, ...]
    return_certificate: HomotopyEquivalenceCertificate
    boundary_reports: tuple
    oracle_report: object
    k_max: int

    def boundary_injective(self) -> bool:
        return all(rep.injective() for rep in self.boundary_reports)

    def certified(self) -> bool:
        return (all(c.verdict for c in self.constituent_certificates)
                and self.return_certificate.verdict
                and self.boundary_injective()
                and self.oracle_report.agreed())

    def describe(self) -> str:
        lines = [f"rank: {self.rank}", "monodromy:"]
        for i, word in enumerate(self.monodromy, start=1):
            lines.append(f"  x{i} -> {word_text(word)}")
        parts = [
            "constituents=" + (
                "HE" if all(c.verdict for c in self.constituent_certificates)
                else "FAIL"),
            "f=" + ("HE" if self.return_certificate.verdict else "FAIL"),
            "boundary=" + (f"INJ(k<={self.k_max})"
                           if self.boundary_injective() else "FAIL"),
            "oracle=" + ("OK" if self.oracle_report.agreed() else "FAIL"),
        ]
        lines.append("certificates: " + ", ".join(parts))
        return "\n".join(lines) + "\n"


def present_free_by_cyclic(theta: ThetaComplex, k_max: int = 8,
                           rng: random.Random | None = None
                           ) -> FreeByCyclicPresentation:
    """Read a certified free-by-cyclic presentation off a coupling.

    The coupled graph is finite and connected, so its fundamental group
    is free of rank 1 - chi; the first return induces the monodromy.
    """
    from .injectivity import boundary_injectivity_check
    from .oracle import first_return_oracle

    _, left_cert = fold_decompose_end_periodic(theta.left, rng=rng)
    _, right_cert = fold_decompose_end_periodic(theta.right, rng=rng)
    return_cert = certify_f(theta, rng=rng)

    base = min(theta.graph.vertices)
    tree = SpanningTree(theta.graph, base)
    basis = pi1_basis(theta.graph, tree)
    words = tuple(reduce_word(w) for w in
                  induced_pi1_map(theta.first_return, tree, tree))
    rank = len(basis)
    assert rank == 1 - theta.graph.euler_characteristic()

    reports = []
    for pres in (theta.left, theta.right):
        report = pres.validate()
        for end_id in sorted(report.orbits):
            reports.append(boundary_injectivity_check(pres, end_id, k_max))
    oracle = first_return_oracle(theta)

    return FreeByCyclicPresentation(
        rank=rank,
        basis_edges=tuple(e for e, _ in basis),
        monodromy=words,
        constituent_certificates=(left_cert, right_cert),
        return_certificate=return_cert,
        boundary_reports=tuple(reports),
        oracle_report=oracle,
        k_max=k_max)
