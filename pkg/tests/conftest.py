import sys

import numpy as np
import pytest

from dtoda import models


@pytest.fixture
def toda():
    return models.toda_1d()


@pytest.fixture
def al():
    return models.ablowitz_ladik()


@pytest.fixture
def case2():
    return models.case2_simple()


@pytest.fixture
def k1():
    return models.k1_fixture()


@pytest.fixture
def dz3():
    return models.dz_k3()


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(mod.RESULTS):
        terminalreporter.write_line(mod.RESULTS[n])
