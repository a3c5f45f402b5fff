import os
import sys

import pytest
from mpmath import mp, mpf

sys.path.insert(0, os.path.dirname(__file__))

from phi4wave.elliptic import default_closed_form  # noqa: E402
from phi4wave.galerkin import galerkin_solve  # noqa: E402

WORKING_DIGITS = 40


@pytest.fixture(autouse=True)
def _working_precision():
    old = mp.dps
    mp.dps = WORKING_DIGITS
    yield
    mp.dps = old


@pytest.fixture(scope="session")
def closed_form():
    with mp.workdps(WORKING_DIGITS):
        return default_closed_form()


@pytest.fixture(scope="session")
def params(closed_form):
    return closed_form.params


@pytest.fixture(scope="session")
def report8():
    with mp.workdps(WORKING_DIGITS):
        return galerkin_solve(8, mpf("1e-11"))


@pytest.fixture(scope="session")
def solution(params):
    from phi4wave.perturbation import build_solution

    with mp.workdps(WORKING_DIGITS):
        return build_solution(1, mpf("0.01"), params=params)
