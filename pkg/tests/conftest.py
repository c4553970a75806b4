"""Session fixtures: the five bundled systems plus cached heavy reports.

The per-module suites share separation and dichotomy runs through these
fixtures; the acceptance suite deliberately does not, so its timings
reflect cold runs.
"""

from pathlib import Path

import pytest

from conformal_dim.dimension import dichotomy_report
from conformal_dim.separation import separation_verdict
from conformal_dim.system import load_system_file
from conformal_dim.tangents import select_tangent_pairs

GALLERY = Path(__file__).resolve().parents[1] / "gallery"

NAMES = ("cantor3", "full_interval", "overlap_pi", "overlap_golden",
         "moebius_cf")


@pytest.fixture(scope="session")
def systems():
    return {name: load_system_file(GALLERY / f"{name}.ifs")
            for name in NAMES}


@pytest.fixture(scope="session")
def cantor(systems):
    return systems["cantor3"]


@pytest.fixture(scope="session")
def full(systems):
    return systems["full_interval"]


@pytest.fixture(scope="session")
def pi_sys(systems):
    return systems["overlap_pi"]


@pytest.fixture(scope="session")
def golden(systems):
    return systems["overlap_golden"]


@pytest.fixture(scope="session")
def moe(systems):
    return systems["moebius_cf"]


@pytest.fixture(scope="session")
def sep_reports(systems):
    return {name: separation_verdict(s) for name, s in systems.items()}


@pytest.fixture(scope="session")
def dicho_reports(systems):
    return {name: dichotomy_report(s) for name, s in systems.items()}


@pytest.fixture(scope="session")
def pi_pairs(pi_sys, sep_reports):
    return select_tangent_pairs(pi_sys, report=sep_reports["overlap_pi"])


@pytest.fixture(scope="session")
def golden_pairs(golden, sep_reports):
    return select_tangent_pairs(golden, report=sep_reports["overlap_golden"])


@pytest.fixture(scope="session")
def gallery_dir():
    return GALLERY
