"""Which check covers which claim.

Each entry names the claim, the function that exercises it and the pytest
node that runs the check.  ``python -m spiraldelone registry`` prints it.
"""
from __future__ import annotations

from typing import NamedTuple


class Entry(NamedTuple):
    lemma: str
    module: str
    test: str


_T = "tests/"

REGISTRY: tuple[Entry, ...] = (
    Entry("Lemma 2", "relmetric.scalar_lemma_suite", _T + "test_relmetric.py::test_scalar_lemma[Lemma 2]"),
    Entry("Lemma 3", "delone.covering_scan", _T + "test_delone.py::test_covering_golden_bound"),
    Entry("Lemma 5", "scenery.covering_radius", _T + "test_scenery.py::test_window_golden"),
    Entry("Lemma 8", "contfrac.lemma8_check", _T + "test_contfrac.py::test_lemma8_suite"),
    Entry("Lemma 12", "relmetric.scalar_lemma_suite", _T + "test_relmetric.py::test_scalar_lemma[Lemma 12]"),
    Entry("Lemma 13", "delone.bounds", _T + "test_delone.py::test_covering_golden_bound"),
    Entry("Lemma 15", "relmetric.scalar_lemma_suite", _T + "test_relmetric.py::test_scalar_lemma[Lemma 15]"),
    Entry("Lemma 18", "relmetric.scalar_lemma_suite", _T + "test_relmetric.py::test_scalar_lemma[Lemma 18]"),
    Entry("Lemma 19", "relmetric.scalar_lemma_suite", _T + "test_relmetric.py::test_scalar_lemma[Lemma 19]"),
    Entry("Lemma (1-h)^delta", "relmetric.scalar_lemma_suite",
          _T + "test_relmetric.py::test_scalar_lemma[Lemma (1-h)^delta]"),
    Entry("Lemma 21", "relmetric.scalar_lemma_suite", _T + "test_relmetric.py::test_scalar_lemma[Lemma 21]"),
    Entry("Lemma 22", "scenery.hole_witness_lattice", _T + "test_scenery.py::test_lattice_holes_arith"),
    Entry("Lemma 23", "scenery.shortest_vector", _T + "test_scenery.py::test_shortest_at_critical_time"),
    Entry("Lemma 24", "scenery.shortest_vector", _T + "test_scenery.py::test_window_golden"),
    Entry("Lemma 26", "delone.packing_scan", _T + "test_delone.py::test_packing_golden_bound"),
    Entry("Lemma 38", "contfrac.farey_classify", _T + "test_contfrac.py::test_farey_classify"),
    Entry("Lemma 41", "delone.exponent_trend", _T + "test_delone.py::test_exponent_trend"),
    Entry("Lemma 42", "delone.exponent_trend", _T + "test_delone.py::test_exponent_trend"),
    Entry("Lemma 43", "delone.rational_gap", _T + "test_delone.py::test_rational_degeneration"),
    Entry("Lemma 45", "delone.packing_scan", _T + "test_delone.py::test_packing_golden_bound"),
    Entry("Lemma 46", "delone.spiral_hole_witness", _T + "test_delone.py::test_spiral_holes_arith"),
    Entry("Richards", "scenery.richards_check", _T + "test_scenery.py::test_richards_exact"),
    Entry("Prop. 7", "scenery.scenery_scan", _T + "test_scenery.py::test_window_golden"),
    Entry("Thm. 44", "delone.packing_scan+covering_scan", _T + "test_acceptance.py::test_criterion_4_packing"),
)


def registry() -> list[Entry]:
    return list(REGISTRY)


def lookup(lemma: str) -> list[Entry]:
    return [e for e in REGISTRY if e.lemma == lemma]
