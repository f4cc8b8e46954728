"""Injectivity evidence for the loops of one boundary component.

Crossing a joining edge shifts any lift of a boundary loop by that
edge's period worth of block levels; subgraph edges keep the level.
The signed total of these winding weights therefore decides whether a
loop lifts closed: zero-winding loops lift to honest loops in a deep
truncation.  The lift's reduced word, and its images under iterates of
the map, witness that the loop stays nontrivial as far as the check
runs; a basis loop whose lift already reduces to nothing is flagged,
since it kills injectivity outright.
"""
from __future__ import annotations

from dataclasses import dataclass

from .boundary import BoundaryComponent, compute_boundary
from .errors import InvalidComponent
from .graph import EdgePath
from .pi1 import (SpanningTree, Word, basis_index, loop_to_word, pi1_basis,
                  reduce_word)
from .presentation import ATTRACTING, JOINING, EndPeriodicPresentation
from .unrolling import Truncation, level_name, unroll


@dataclass(frozen=True)
class CheckedLoop:
    """One zero-winding loop with its lift and power evidence."""

    label: str
    loop: EdgePath
    lift: EdgePath
    word: Word
    reduced_trivial: bool
    powers_nontrivial: bool
    failed_power: int | None = None


@dataclass(frozen=True)
class BoundaryInjectivityReport:
    """Winding weights and checked loops for one boundary component."""

    end: str
    sign: int
    winding: dict[str, int]
    checked: tuple[CheckedLoop, ...]
    k_max: int

    def certified_by_winding(self) -> bool:
        return not self.checked

    def injective(self) -> bool:
        return all(c.powers_nontrivial for c in self.checked)

    def describe(self) -> str:
        lines = [f"component {self.end} (sign {self.sign:+d})"]
        for e in sorted(self.winding):
            lines.append(f"  winding {e}: {self.winding[e]}")
        if not self.checked:
            lines.append("  no zero-winding basis loops; certified by"
                         " winding alone")
        for c in self.checked:
            state = "trivial lift" if c.reduced_trivial else (
                "nontrivial through k<=%d" % self.k_max
                if c.powers_nontrivial else
                f"trivial at power {c.failed_power}")
            lines.append(f"  loop {c.label}: {state}")
        return "\n".join(lines) + "\n"


def _winding(comp: BoundaryComponent, sign: int) -> dict[str, int]:
    out = {}
    for e in comp.graph.edges:
        if comp.edge_class[e] == JOINING:
            out[e] = -comp.subdivision_count[e] if sign > 0 else \
                comp.subdivision_count[e]
        else:
            out[e] = 0
    return out


def _loop_winding(comp: BoundaryComponent, winding: dict[str, int],
                  loop: EdgePath) -> int:
    return sum(s * winding[e] for e, s in loop)


def _lift(comp: BoundaryComponent, sign: int,
          loop: EdgePath) -> tuple[EdgePath, int, int]:
    """Closed lift of a zero-winding loop: the path, its start level,
    and how deep it reaches.

    Joining edges at block level k have their tail a period higher up
    the juncture column, so a forward crossing raises the working level
    by the period and a reverse crossing lowers it; the start level is
    padded so the walk never leaves the blocks.
    """
    total = sum(comp.subdivision_count.get(e, 0) for e, _ in loop)
    start = max(2, total + 1)
    level = start
    lifted = []
    for e, s in loop:
        if comp.edge_class[e] != JOINING:
            lifted.append((level_name(e, sign * level), s))
        elif s > 0:
            level += comp.subdivision_count[e]
            lifted.append((level_name(e, sign * level), 1))
        else:
            lifted.append((level_name(e, sign * level), -1))
            level -= comp.subdivision_count[e]
    assert level == start
    return tuple(lifted), start, start + total


def _check_one(comp: BoundaryComponent, sign: int, label: str,
               loop: EdgePath, k_max: int, t: Truncation,
               tree: SpanningTree, idx: dict[str, int]) -> CheckedLoop:
    if not loop:
        return CheckedLoop(label=label, loop=(), lift=(), word=(),
                           reduced_trivial=True, powers_nontrivial=False)
    lifted, start, _ = _lift(comp, sign, loop)
    v0 = comp.graph.step_ends(loop[0])[0]
    base = level_name(v0, sign * start)
    t.graph.check_path(lifted, start=base, end=base)

    word = reduce_word(loop_to_word(tree, idx, lifted))
    if not word:
        return CheckedLoop(label=label, loop=tuple(loop), lift=lifted,
                           word=(), reduced_trivial=True,
                           powers_nontrivial=False)
    path = lifted
    for k in range(1, k_max + 1):
        path = t.map.evaluate_path(path)
        if not reduce_word(loop_to_word(tree, idx, path)):
            return CheckedLoop(label=label, loop=tuple(loop), lift=lifted,
                               word=word, reduced_trivial=False,
                               powers_nontrivial=False, failed_power=k)
    return CheckedLoop(label=label, loop=tuple(loop), lift=lifted,
                       word=word, reduced_trivial=False,
                       powers_nontrivial=True)


def _component(p: EndPeriodicPresentation,
               component: str) -> tuple[BoundaryComponent, int]:
    try:
        rec = p.end(component)
    except KeyError:
        raise InvalidComponent(f"unknown end {component!r}")
    if rec.orbit_leader != component:
        raise InvalidComponent(
            f"end {component!r} is not its orbit's leader; boundary"
            f" components are keyed by {rec.orbit_leader!r}")
    sign = 1 if rec.sign == ATTRACTING else -1
    return compute_boundary(p, sign).component(component), sign


def _deep_window(p: EndPeriodicPresentation, reach: int, k_max: int):
    t = unroll(p, reach + k_max + 1)
    tree = SpanningTree(t.graph, min(t.graph.vertices))
    idx = basis_index(pi1_basis(t.graph, tree))
    return t, tree, idx


def check_loop(p: EndPeriodicPresentation, component: str, loop: EdgePath,
               k_max: int = 8) -> CheckedLoop:
    """Check one explicit boundary loop of the named component.

    The loop must be a closed path in the component's boundary graph
    with zero winding; anything else has no closed lift to test.
    """
    comp, sign = _component(p, component)
    if loop:
        v0 = comp.graph.step_ends(loop[0])[0]
        comp.graph.check_path(loop, start=v0, end=v0)
        wind = _loop_winding(comp, _winding(comp, sign), loop)
        if wind != 0:
            raise ValueError(
                f"loop has winding {wind}; only zero-winding loops lift"
                " closed")
        _, _, reach = _lift(comp, sign, loop)
    else:
        reach = 2
    t, tree, idx = _deep_window(p, reach, k_max)
    return _check_one(comp, sign, "explicit", loop, k_max, t, tree, idx)


def boundary_injectivity_check(p: EndPeriodicPresentation, component: str,
                               k_max: int = 8) -> BoundaryInjectivityReport:
    """Winding weights plus power evidence for one boundary component.

    Every basis loop of the component with zero winding is lifted and
    its images under the first k_max iterates checked for reduced
    nontriviality.  Components with no zero-winding basis loops are
    certified by the winding weights alone.
    """
    comp, sign = _component(p, component)
    winding = _winding(comp, sign)
    tree = SpanningTree(comp.graph, min(comp.graph.vertices))
    basis = pi1_basis(comp.graph, tree)
    zero = [(eid, loop) for eid, loop in basis
            if _loop_winding(comp, winding, loop) == 0]
    checked = []
    if zero:
        reach = max(_lift(comp, sign, loop)[2] for _, loop in zero)
        t, deep_tree, idx = _deep_window(p, reach, k_max)
        for eid, loop in zero:
            checked.append(_check_one(comp, sign, eid, loop, k_max, t,
                                      deep_tree, idx))
    return BoundaryInjectivityReport(end=component, sign=sign,
                                     winding=winding,
                                     checked=tuple(checked), k_max=k_max)
