import numpy as np
import pytest

from scripts.potential import parse_potential
from scripts.schrodinger import DecayingPotential, ScatteringProblem
from scripts.sturm_liouville import BoundedPotential, SturmLiouvilleProblem


@pytest.fixture(autouse=True)
def report_dir(tmp_path, monkeypatch):
    """Keep every report written during a test inside tmp_path."""
    folder = tmp_path / "reports"
    monkeypatch.setenv("LAB_REPORT_DIR", str(folder))
    return folder


@pytest.fixture
def rng():
    return np.random.default_rng(20240101)


@pytest.fixture(scope="session")
def free_sl():
    return SturmLiouvilleProblem(BoundedPotential(parse_potential("0")))


@pytest.fixture(scope="session")
def quadratic_sl():
    return SturmLiouvilleProblem(BoundedPotential(parse_potential("x^2")))


@pytest.fixture(scope="session")
def sech_well():
    """v = -2 sech^2 x: reflectionless, a(k) = (k - i)/(k + i), one bound state at kappa = 1."""
    return ScatteringProblem(DecayingPotential(parse_potential("-2*sech(x)^2")))


@pytest.fixture(scope="session")
def gaussian_well():
    return ScatteringProblem(DecayingPotential(parse_potential("-exp(-x^2)")))
