import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from optensor.oracle import ProblemSpec, make_problem

settings.register_profile("default", deadline=None, max_examples=40,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")

SMALL_SPECS = [
    ProblemSpec("quadratic", 6, 3, {"mu": 0.1}),
    ProblemSpec("logistic", 6, 3, {"n_samples": 30}),
    ProblemSpec("logsumexp", 6, 3),
    ProblemSpec("power", 6, 3),
]


@pytest.fixture(params=SMALL_SPECS, ids=lambda s: s.kind)
def small_problem(request):
    return make_problem(request.param)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(RESULTS, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
