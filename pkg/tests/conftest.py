import numpy as np
import pytest

from qtrack.bloch import TrackingProblem

# filled by tests/test_acceptance.py, printed at the end of the run
ACCEPTANCE_LINES = []


def random_bloch(rng, pure=False):
    v = rng.standard_normal(3)
    v /= np.linalg.norm(v)
    return v if pure else v * rng.uniform() ** (1 / 3)


def random_problem(rng, k=None, pi_range=(0.05, 0.95)):
    """Stratified random problem: ``k`` cycles through pure/mixed sources and targets."""
    k = int(rng.integers(16)) if k is None else k
    flags = [(k >> i) & 1 == 1 for i in range(4)]
    while True:
        r1, r2 = random_bloch(rng, flags[0]), random_bloch(rng, flags[1])
        if np.linalg.norm(r1 - r2) > 1e-6:
            break
    t1, t2 = random_bloch(rng, flags[2]), random_bloch(rng, flags[3])
    return TrackingProblem(r1, r2, t1, t2, rng.uniform(*pi_range))


def problems(seed, n, **kw):
    rng = np.random.default_rng(seed)
    return [random_problem(rng, k % 16, **kw) for k in range(n)]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
