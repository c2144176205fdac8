"""Shared fixtures: the four-pole reference loop and cached synthesis runs."""

from fractions import Fraction

import pytest

from tdsynth.cli import example_config
from tdsynth.diophantine import solve_d_minimal
from tdsynth.poly import RatPoly
from tdsynth.response import Reference, decompose
from tdsynth.synthesis import synthesize
from tdsynth.transfer import PoleSpec, target_poly

# plant 1/(s+1); closed-loop poles -1 +/- 2j and -2 +/- 4j
A = RatPoly([1, 1])
B = RatPoly([1])
POLES = PoleSpec(complex_pairs=((1, 2), (2, 4)))
Z = RatPoly([100, 60, 33, 6, 1])

Q_BOUNDS = (-32, -23, -3)                # optimum of the exponential-bounds design
Q_PEAK = (Fraction(-32), Fraction("-17.0607"), Fraction("-3.0227"))   # tabulated peak design


@pytest.fixture(scope="session")
def family():
    return solve_d_minimal(A, B, target_poly(POLES))


@pytest.fixture(scope="session")
def step_dec(family):
    dec, lrs = decompose(Reference.step(), family, POLES)
    return dec


@pytest.fixture(scope="session")
def step_lrs(family):
    dec, lrs = decompose(Reference.step(), family, POLES)
    return lrs


@pytest.fixture(scope="session")
def bounds_result():
    return synthesize(example_config("exp_bounds.yaml"))


@pytest.fixture(scope="session")
def peak_result():
    return synthesize(example_config("overshoot.yaml"))


# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])
