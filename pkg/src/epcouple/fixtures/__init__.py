"""Bundled example presentations.

LINE: the integer line with unit translation.
ROSERAY: a bi-infinite chain of circles with the shift.
ROSE2SUSP: the shift on a chain of 2-roses, twisted through one rose
    automorphism on the core.
FIG1: a five-ended period-2 example.  Its full incidence structure is a
    reconstruction (flagged in the file): the published picture pins down
    the end data, the joining-edge families, and several image rules, and
    the remaining wiring was chosen to validate and to be a homotopy
    equivalence.
"""
from __future__ import annotations

from importlib import resources

from ..presentation import EndPeriodicPresentation

FIXTURE_NAMES = ("line", "roseray", "rose2susp", "fig1")


def fixture_text(name: str) -> str:
    if name not in FIXTURE_NAMES:
        raise KeyError(f"unknown fixture {name!r}; have {FIXTURE_NAMES}")
    return (resources.files(__package__) / f"{name}.json").read_text("utf-8")


def load_fixture(name: str) -> EndPeriodicPresentation:
    return EndPeriodicPresentation.from_json(fixture_text(name))
