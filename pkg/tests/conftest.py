"""Shared strategies and builders for the test suite."""

import re
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import strategies as st

from starweyl import HerglotzRep, ScalarMeasure

_ACCEPTANCE: dict = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_criterion_(\d+)", report.nodeid)
    if m and report.when == "call":
        _ACCEPTANCE[int(m.group(1))] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(_ACCEPTANCE):
        word = "PASS" if _ACCEPTANCE[k] == "passed" else "FAIL"
        terminalreporter.write_line(f"criterion {k}: {word}")


def rationals(lo=-10, hi=10, den=16):
    return st.fractions(
        min_value=Fraction(lo), max_value=Fraction(hi), max_denominator=den
    )


def positive_rationals(hi=8, den=16):
    return st.fractions(
        min_value=Fraction(1, den), max_value=Fraction(hi), max_denominator=den
    )


@st.composite
def atomic_measures(draw, max_atoms=5):
    n = draw(st.integers(min_value=1, max_value=max_atoms))
    positions = draw(
        st.lists(rationals(), min_size=n, max_size=n, unique=True)
    )
    masses = draw(st.lists(positive_rationals(), min_size=n, max_size=n))
    return ScalarMeasure.of(atoms=list(zip(positions, masses)))


@st.composite
def atomic_reps(draw, max_atoms=5, allow_slope=True):
    omega = draw(atomic_measures(max_atoms=max_atoms))
    a = draw(rationals(-5, 5))
    b = draw(positive_rationals(2)) if allow_slope and draw(st.booleans()) else Fraction(0)
    return HerglotzRep.of(a, b, omega)


@st.composite
def upper_half_points(draw):
    re = draw(st.floats(min_value=-5, max_value=5, allow_nan=False))
    im = draw(st.floats(min_value=0.05, max_value=4, allow_nan=False))
    return complex(re, im)


@pytest.fixture
def rng():
    return np.random.default_rng(20260814)
