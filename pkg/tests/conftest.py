import os

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from geofix.geometry import Euclidean, Lp, PoincareDisk
from geofix.trees import tripod

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow]
)
settings.register_profile("ci", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


@pytest.fixture(params=["euclidean", "lp4", "disk", "tripod"])
def model_space(request):
    return {
        "euclidean": Euclidean(2),
        "lp4": Lp(3, 4.0),
        "disk": PoincareDisk(),
        "tripod": tripod(),
    }[request.param]


@pytest.fixture(autouse=True)
def _no_seed_env(monkeypatch):
    monkeypatch.delenv("GEOFIX_SEED", raising=False)
