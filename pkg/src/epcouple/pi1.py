"""Spanning trees, fundamental-group bases, and free-group words.

Words are tuples of nonzero ints: letter k > 0 is the k-th generator,
-k its inverse (generators are numbered from 1).
"""
from __future__ import annotations

from .errors import BasepointNotMapped, DisconnectedGraph
from .graph import (EdgePath, FiniteGraph, Step, inverse_path, reduce_path)
from .maps import GraphMap

Word = tuple[int, ...]


def reduce_word(word) -> Word:
    out: list[int] = []
    for letter in word:
        if letter == 0:
            raise ValueError("word letters must be nonzero")
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def invert_word(word) -> Word:
    return tuple(-letter for letter in reversed(word))


def substitute(images: list[Word], word) -> Word:
    """Apply the endomorphism sending generator k to images[k-1]."""
    out: list[int] = []
    for letter in word:
        img = images[letter - 1] if letter > 0 else invert_word(images[-letter - 1])
        for x in img:
            if out and out[-1] == -x:
                out.pop()
            else:
                out.append(x)
    return tuple(out)


class SpanningTree:
    """BFS spanning tree rooted at a basepoint.

    The frontier is explored in star order (ascending edge id, forward
    orientation first), so the tree is deterministic.  When allowed_edges
    is given only those edges are walked; the restriction must still
    reach every vertex for the connectedness check to pass.
    """

    def __init__(self, graph: FiniteGraph, base: str, require_connected: bool = True,
                 allowed_edges=None):
        if not graph.has_vertex(base):
            raise ValueError(f"unknown basepoint {base!r}")
        self.graph = graph
        self.base = base
        self.parent_step: dict[str, Step] = {}
        order = [base]
        seen = {base}
        i = 0
        while i < len(order):
            v = order[i]
            i += 1
            for s in graph.star(v):
                if allowed_edges is not None and s[0] not in allowed_edges:
                    continue
                w = graph.step_ends(s)[1]
                if w not in seen:
                    seen.add(w)
                    self.parent_step[w] = s
                    order.append(w)
        if require_connected and len(seen) != graph.num_vertices():
            missing = sorted(set(graph.vertices) - seen)
            raise DisconnectedGraph(
                f"vertices unreachable from {base!r}: {', '.join(missing)}")
        self.spanned = seen
        self.tree_edges = frozenset(s[0] for s in self.parent_step.values())

    def path_to_base(self, v: str) -> EdgePath:
        """Tree path from v up to the basepoint."""
        if v not in self.spanned:
            raise ValueError(f"vertex {v!r} is not spanned by the tree")
        steps = []
        while v != self.base:
            s = self.parent_step[v]
            steps.append((s[0], -s[1]))
            v = self.graph.step_ends(s)[0]
        return tuple(steps)

    def tree_path(self, u: str, v: str) -> EdgePath:
        """Reduced tree path from u to v."""
        return reduce_path(self.path_to_base(u) + inverse_path(self.path_to_base(v)))


def spanning_tree(graph: FiniteGraph, root: str) -> SpanningTree:
    return SpanningTree(graph, root)


def pi1_basis(graph: FiniteGraph, tree: SpanningTree) -> list[tuple[str, EdgePath]]:
    """Generating loops of pi1 at the tree's basepoint.

    One generator per non-tree edge, ascending by edge id; the loop runs
    base -> tail, the edge, head -> base through the tree.
    """
    basis = []
    for e in graph.edges:
        if e in tree.tree_edges:
            continue
        tail, head = graph.edge_ends(e)
        loop = reduce_path(
            inverse_path(tree.path_to_base(tail))
            + ((e, 1),)
            + tree.path_to_base(head))
        basis.append((e, loop))
    return basis


def loop_to_word(tree: SpanningTree, basis_index: dict[str, int], path: EdgePath) -> Word:
    """Retract a loop to a word in the pi1 basis.

    Tree edges map to nothing; the non-tree edge e maps to the generator
    basis_index[e] (1-based), respecting orientation.
    """
    out: list[int] = []
    for eid, sign in path:
        if eid in tree.tree_edges:
            continue
        letter = basis_index[eid] * (1 if sign > 0 else -1)
        if out and out[-1] == -letter:
            out.pop()
        else:
            out.append(letter)
    return tuple(out)


def basis_index(basis: list[tuple[str, EdgePath]]) -> dict[str, int]:
    return {e: i + 1 for i, (e, _) in enumerate(basis)}


def induced_pi1_map(m: GraphMap, t_dom: SpanningTree, t_cod: SpanningTree) -> list[Word]:
    """Images of the domain pi1 basis under the map, as words in the
    codomain basis.

    The image basepoint is connected back to the codomain basepoint by
    the codomain tree path, so the result is a genuine endomorphism
    between the two based groups.
    """
    image_base = m.vertex_images[t_dom.base]
    if image_base not in t_cod.spanned:
        raise BasepointNotMapped(
            f"image basepoint {image_base!r} is not in the codomain tree")
    conj = t_cod.tree_path(t_cod.base, image_base)
    dom_basis = pi1_basis(m.domain, t_dom)
    cod_basis = pi1_basis(m.codomain, t_cod)
    idx = basis_index(cod_basis)
    words = []
    for _, loop in dom_basis:
        image_loop = conj + m.evaluate_path(loop) + inverse_path(conj)
        words.append(loop_to_word(t_cod, idx, image_loop))
    return words
