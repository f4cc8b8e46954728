"""Shared exception types.

Every error raised by the library derives from EpcoupleError so the CLI
can map failures onto exit codes in one place.
"""
from __future__ import annotations


class EpcoupleError(Exception):
    """Base class for all library errors."""


class DisconnectedGraph(EpcoupleError):
    """A connected graph was required."""


class CollapsedEdge(EpcoupleError):
    """An edge's reduced image is empty where a nondegenerate one is needed."""


class Valence1Vertex(EpcoupleError):
    """A valence-1 vertex is present where the construction forbids one."""


class InvalidPresentation(EpcoupleError):
    """An end-periodic presentation failed validation.

    Carries the individual diagnostics so callers can report them all.
    """

    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("; ".join(self.diagnostics) or "invalid presentation")


class OutOfTruncation(EpcoupleError):
    """A cell image lies outside the current truncation; unroll deeper."""


class IncompatibleDecoration(EpcoupleError):
    """Boundary decorations do not match under the proposed pairing."""


class CutoffTooSmall(EpcoupleError):
    """The coupling cutoff is below the minimum the construction needs."""


class TruncationTooShallow(EpcoupleError):
    """The oracle needs a deeper truncation to simulate the semiflow."""


class NotHomotopyEquivalence(EpcoupleError):
    """A map certified as required to be a homotopy equivalence is not one."""


class NotBoundaryCollapsed(EpcoupleError):
    """Boundary components must be collapsed to single vertices first."""


class BasepointNotMapped(EpcoupleError):
    """No tree path connects the codomain basepoint to the image basepoint."""


class InvalidComponent(EpcoupleError):
    """The named boundary component does not exist."""


class SearchOverflow(EpcoupleError):
    """Backtracking search exceeded its node budget."""

    def __init__(self, nodes, budget):
        self.nodes = nodes
        self.budget = budget
        super().__init__(
            f"isomorphism search exceeded {budget} nodes (visited {nodes})"
        )


class BasepointMove(EpcoupleError):
    """Raised only as a report: the basepoint had to be moved.

    homotopy_inverse handles the move itself; this class doubles as the
    record attached to the result, so it is an Exception only for parity
    with the other diagnostics.
    """

    def __init__(self, old_vertex, new_vertex, conjugating_path):
        self.old_vertex = old_vertex
        self.new_vertex = new_vertex
        self.conjugating_path = conjugating_path
        super().__init__(f"basepoint moved {old_vertex} -> {new_vertex}")
