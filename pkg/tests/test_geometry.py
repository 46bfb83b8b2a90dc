import numpy as np

from conftest import problems
from qtrack.bloch import TrackingProblem
from qtrack.geometry import indicator, summarize


def test_orthogonal_identity_problem():
    g = summarize(TrackingProblem([0, 0, 1], [0, 0, -1], [0, 0, 1], [0, 0, -1], 0.5))
    assert g.R_minus_norm == 2.0
    assert g.R_cross_norm == 0.0
    assert abs(g.Gamma_b - 1.0) < 1e-15
    assert indicator(g) <= 0


def test_t_by_expansion(rng):
    for p in problems(1, 200):
        g = summarize(p)
        R, Rb = (g.R1, g.R2), (g.Rbar1, g.Rbar2)
        T = sum((1 - R[i] @ R[j]) * (Rb[i] @ Rb[j]) for i in range(2) for j in range(2))
        assert abs(T - g.T) < 1e-14
        assert abs(g.Omega - (g.S + g.T - 2 * g.Rbar_cross_norm * g.R_cross_norm)) < 1e-14


def test_xi_identity():
    for p in problems(2, 500):
        g = summarize(p)
        lhs = g.Xi**2 + g.xi**2
        rhs = g.R_minus_norm**2 * g.Rbar_plus_norm**2 * g.Gamma_b**2
        assert abs(lhs - rhs) < 1e-10


def test_gamma_a_positive_when_nonunitary():
    for p in problems(3, 500):
        g = summarize(p)
        if g.Omega > 0:
            assert g.S + g.T > 0
            assert g.Gamma_a > 0


def test_chord_longer_than_cross(rng):
    # two distinct vectors in the unit ball: |R1 - R2| > |R1 x R2|
    worst = np.inf
    for _ in range(10_000):
        a = rng.standard_normal(3)
        b = rng.standard_normal(3)
        a *= rng.uniform() ** (1 / 3) / np.linalg.norm(a)
        b *= rng.uniform() ** (1 / 3) / np.linalg.norm(b)
        worst = min(worst, np.linalg.norm(a - b) ** 2 - np.linalg.norm(np.cross(a, b)) ** 2)
    assert worst > 0


def test_to_dict_round_trip():
    g = summarize(problems(4, 1)[0])
    d = g.to_dict()
    assert d["procedure"] in ("A", "B")
    assert d["T"] == g.T
    assert len(d["R1"]) == 3
