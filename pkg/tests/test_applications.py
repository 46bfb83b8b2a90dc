import numpy as np
import pytest

from conftest import random_bloch
from qtrack.applications import (
    CloningSpec,
    PurificationSpec,
    aggregate_sources,
    clone,
    discriminate,
    discrimination_T,
    helstrom_probability,
    indicator_grid,
    n_state_figure_of_merit,
    pure_tracking,
    purification_closed_form,
    purification_sweep,
    purify,
    stabilization_closed_form,
    stabilize,
)
from qtrack.bloch import QubitState
from qtrack.channel import choi_of_solution
from qtrack.exceptions import EmptyGroup, IdenticalStates, OutOfRange, WeightsNotNormalized
from qtrack.tracker import solve


def test_discrimination_examples():
    r = discriminate([0, 0, 1], [0, 0, -1], 0.5)
    assert abs(r.P_track - 1) < 1e-15
    a = np.pi / 4
    r = discriminate([np.sin(a), 0, np.cos(a)], [-np.sin(a), 0, np.cos(a)], 0.7)
    assert abs(r.P_track - (0.5 + 0.5 * np.sqrt(0.58))) < 1e-12
    assert abs(r.T + 0.42) < 1e-12
    assert r.branch == "measure"
    with pytest.raises(IdenticalStates):
        discriminate([0, 0, 0.3], [0, 0, 0.3], 0.4)


def test_discrimination_prepare_branch():
    # nearly indistinguishable states with a skewed prior: just announce the likelier one
    r = discriminate([0, 0, 0.1], [0, 0, 0.05], 0.9)
    assert r.T > 0
    assert r.branch == "prepare"
    assert abs(r.P_track - 0.9) < 1e-12


def test_helstrom_random(rng):
    for _ in range(300):
        a, b = random_bloch(rng), random_bloch(rng)
        p1 = rng.uniform(0.01, 0.99)
        r = discriminate(a, b, p1)
        assert abs(r.P_track - helstrom_probability(a, b, p1)) < 1e-12


def test_threshold_surface_grows_with_bias():
    R = np.linspace(0, 1, 21)
    c = np.cos(np.linspace(0, np.pi, 21))
    R1, R2, C = np.meshgrid(R, R, c, indexing="ij")
    frac = [np.mean(discrimination_T(R1, R2, C, p1) > 0) for p1 in (0.5, 0.6, 0.7, 0.8)]
    assert frac[0] == 0.0
    assert all(b > a for a, b in zip(frac, frac[1:]))


def test_purification_examples():
    r = purify(PurificationSpec(0.6, np.pi / 2))
    assert abs(r.Omega) < 1e-12
    assert abs(r.fidelity - 0.8) < 1e-12
    assert abs(purify(PurificationSpec(0.8, np.pi / 3)).fidelity - 0.911877) < 1e-5
    for th in np.linspace(0.05, 1.5, 10):
        assert purify(PurificationSpec(0.7, th)).Omega > 0


def test_purification_general_priors(rng):
    for _ in range(200):
        purify(PurificationSpec(rng.uniform(0.05, 1), rng.uniform(0.01, np.pi / 2), rng.uniform(0, np.pi / 2), rng.uniform(0.05, 0.95)))


def test_purification_sweep_decreasing():
    rows = purification_sweep(0.8, np.linspace(0.02, np.pi / 2, 60))
    fids = [r["fidelity"] for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(fids, fids[1:]))
    # the map jumps to the identity once the indicator reaches zero
    assert rows[-1]["mu1"] == 1.0 and rows[-2]["mu1"] < 1.0


def test_purification_range_checks():
    with pytest.raises(OutOfRange):
        PurificationSpec(1.2, 0.3)
    with pytest.raises(OutOfRange):
        PurificationSpec(0.5, 0.0)


def test_stabilization_examples():
    assert abs(stabilize(np.pi / 4, 0.25).fidelity - (0.5 + 0.5 * np.sqrt(0.5 + 0.25 / 0.875))) < 1e-12
    assert abs(stabilize(np.pi / 4, 0.5).fidelity - (0.5 + 0.5 * np.sqrt(0.5 + 0.25))) < 1e-12
    assert stabilize(np.pi / 4, 1e-6).fidelity > 1 - 1e-4
    assert stabilization_closed_form(0.3, 0.2)[0] > 0
    with pytest.raises(OutOfRange):
        stabilize(np.pi / 2, 0.1)


def test_cloning():
    om, fid = clone(CloningSpec(np.pi / 8))
    assert abs(om - 2 * (np.pi / 4 - np.pi / 3)) < 1e-12
    assert abs(fid - (0.5 + 0.5 * np.cos(np.pi / 12))) < 1e-12
    assert clone(CloningSpec(0.0)) == (0.0, 1.0)
    for phi in np.linspace(0.01, np.pi / 4 - 0.01, 20):
        assert clone(CloningSpec(phi, 0.3))[0] <= 0
    with pytest.raises(OutOfRange):
        CloningSpec(np.pi / 4)


def test_pure_tracking():
    assert pure_tracking(0.9, 0.4, 0.3).fidelity == pytest.approx(1.0, abs=1e-12)
    assert abs(pure_tracking(np.pi / 6, np.pi / 3).fidelity - (0.5 + 0.5 * np.cos(np.pi / 6))) < 1e-12
    assert pure_tracking(0.3, 0.9, 1 - 1e-7).fidelity > 1 - 1e-6


def test_aggregate_identity_and_duplicates():
    s1, s2 = QubitState([0, 0, 1]), QubitState([1, 0, 0])
    targets = ([0, 0, 1], [0, 1, 0])
    p = aggregate_sources([[(s1, 0.5)], [(s2, 0.5)]], targets)
    assert p.rho1 == s1 and p.rho2 == s2 and p.pi1 == 0.5
    p = aggregate_sources([[(s1, 0.3), (s1, 0.2)], [(s2, 0.5)]], targets)
    assert np.abs(p.rho1.bloch - s1.bloch).max() < 1e-15
    assert abs(p.pi1 - 0.5) < 1e-15
    p = aggregate_sources([[([0, 0, 1], 0.25), ([0, 0, -1], 0.25)], [(s2, 0.5)]], targets)
    assert np.abs(p.rho1.bloch).max() < 1e-15


def test_aggregate_errors():
    with pytest.raises(EmptyGroup):
        aggregate_sources([[], [([0, 0, 1], 1.0)]], ([0, 0, 1], [1, 0, 0]))
    with pytest.raises(WeightsNotNormalized):
        aggregate_sources([[([0, 0, 1], 0.2)], [([1, 0, 0], 0.2)]], ([0, 0, 1], [1, 0, 0]))
    with pytest.raises(WeightsNotNormalized):
        aggregate_sources([[([0, 0, 1], -0.2)], [([1, 0, 0], 1.2)]], ([0, 0, 1], [1, 0, 0]))


def test_aggregate_matches_n_state_merit(rng):
    for _ in range(100):
        sizes = rng.integers(1, 3, 2)
        w = rng.uniform(0.1, 1, sizes.sum())
        w /= w.sum()
        states = [random_bloch(rng) for _ in range(sizes.sum())]
        groups = [list(zip(states[: sizes[0]], w[: sizes[0]])), list(zip(states[sizes[0]:], w[sizes[0]:]))]
        targets = (random_bloch(rng, True), random_bloch(rng))
        p = aggregate_sources(groups, targets)
        if np.linalg.norm(p.rho1.bloch - p.rho2.bloch) < 1e-6:
            continue
        sol = solve(p)
        ch = choi_of_solution(sol)
        assert abs(n_state_figure_of_merit(ch, groups, targets) - sol.fidelity) < 1e-12


def test_indicator_grid_pure_sign():
    h = (np.pi / 2) / 20
    th = h * np.arange(1, 21)
    tb = h * (np.arange(20) + 0.5)
    om = indicator_grid(1.0, th, tb)
    assert np.all(np.sign(om) == np.sign(th[:, None] - tb[None, :]))
