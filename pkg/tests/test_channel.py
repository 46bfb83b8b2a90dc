import numpy as np
import pytest

from conftest import problems
from qtrack.bloch import I2, X, Z, TrackingProblem, bloch_to_density, density_to_bloch
from qtrack.channel import (
    QuantumChannel,
    choi_from_kraus,
    choi_of_solution,
    cptp_check,
    dephasing,
    depolarizing_channel,
    identity_channel,
    kraus_of_solution,
)
from qtrack.exceptions import OutOfRange
from qtrack.tracker import solve

PSI_PLUS = np.array([1, 0, 0, 1], dtype=complex)


def test_identity_problem_gives_unitary_choi():
    sol = solve(TrackingProblem([0, 0, 1], [0, 0, -1], [0, 0, 1], [0, 0, -1], 0.5))
    ch = choi_of_solution(sol)
    ev = np.linalg.eigvalsh(ch.choi)
    assert ch.rank() == 1
    assert abs(ev.max() - 2) < 1e-12
    assert np.abs(ch.choi - np.outer(PSI_PLUS, PSI_PLUS)).max() < 1e-12


def test_collapse_channel_is_constant():
    # parallel targets make the cross product of the weighted targets vanish
    sol = solve(TrackingProblem([0.3, 0, 0.6], [-0.5, 0.2, 0], [0, 1, 0], [0, 0.5, 0], 0.4))
    ch = choi_of_solution(sol)
    out = ch.apply([0, 0, 1]).bloch
    for b in ([0, 0, -1], [1, 0, 0], [0, 0, 0], [0.2, -0.3, 0.1]):
        assert np.abs(ch.apply(b).bloch - out).max() < 1e-12
    assert abs(np.linalg.norm(out) - 1) < 1e-12


def test_collapse_kraus():
    sol = solve(TrackingProblem([0.3, 0, 0.6], [-0.5, 0.2, 0], [0, 1, 0], [0, 0.5, 0], 0.4))
    ks = kraus_of_solution(sol)
    assert len(ks) == 2
    assert np.abs(sum(k.conj().T @ k for k in ks) - I2).max() < 1e-12


def test_random_solutions_are_cptp_and_consistent():
    for p in problems(20, 1000):
        sol = solve(p)
        ch = choi_of_solution(sol)
        rep = cptp_check(ch)
        assert rep["passed"], rep
        assert np.abs(choi_from_kraus(kraus_of_solution(sol)) - ch.choi).max() < 1e-10
        assert abs(p.figure_of_merit(ch) - sol.fidelity) < 1e-10
        if sol.procedure == "A":
            assert ch.rank() <= 2
            assert len(ch.kraus) == 2
        else:
            assert len(ch.kraus) == 1


def test_apply_agrees_across_representations(rng):
    for p in problems(21, 50):
        ch = choi_of_solution(solve(p))
        for _ in range(5):
            b = rng.standard_normal(3)
            b *= rng.uniform() / np.linalg.norm(b)
            rho = bloch_to_density(b)
            via_affine = ch.apply(b).bloch
            assert np.abs(density_to_bloch(ch.apply_kraus(rho)) - via_affine).max() < 1e-12
            assert np.abs(density_to_bloch(ch.apply_choi(rho)) - via_affine).max() < 1e-12


def test_trivial_channels():
    b = np.array([0.3, -0.4, 0.5])
    assert np.abs(identity_channel().apply(b).bloch - b).max() < 1e-15
    assert np.abs(depolarizing_channel().apply(b).bloch).max() < 1e-15
    assert np.abs(dephasing(0.5).apply([1, 0, 0]).bloch).max() < 1e-15


def test_dephasing_affine_form():
    d = dephasing(0.25)
    assert np.abs(d.M - np.diag([0.5, 0.5, 1.0])).max() < 1e-15
    assert np.abs(d.c).max() < 1e-15
    assert np.abs(d.apply([1, 0, 0]).bloch - [0.5, 0, 0]).max() < 1e-15
    assert np.abs(dephasing(0.5).M - np.diag([0, 0, 1.0])).max() < 1e-15
    assert np.abs(dephasing(1e-9).M - np.eye(3)).max() < 1e-8
    with pytest.raises(OutOfRange):
        dephasing(0.0)
    with pytest.raises(OutOfRange):
        dephasing(0.6)


def test_non_cp_maps_fail():
    bad = np.outer(PSI_PLUS, PSI_PLUS) - 0.3 * np.eye(4)
    rep = cptp_check(QuantumChannel(bad, (), np.eye(3), np.zeros(3)))
    assert not rep["passed"]
    assert rep["min_choi_eigenvalue"] < 0

    # transpose map: Choi is the swap operator
    swap = np.eye(4)[[0, 2, 1, 3]].astype(complex)
    M = np.diag([1.0, -1.0, 1.0])
    rep = cptp_check(QuantumChannel(swap, (), M, np.zeros(3)))
    assert not rep["passed"]
    assert abs(rep["min_choi_eigenvalue"] + 1) < 1e-12


def test_from_affine_round_trip(rng):
    for _ in range(50):
        ch = QuantumChannel.from_affine(np.diag(rng.uniform(-0.3, 0.3, 3)), rng.uniform(-0.3, 0.3, 3))
        back = QuantumChannel.from_choi(ch.choi)
        assert np.abs(back.M - ch.M).max() < 1e-14
        assert np.abs(back.c - ch.c).max() < 1e-14
        assert cptp_check(ch)["passed"]


def test_feedback_flag():
    sol = solve(TrackingProblem([0, 0, 0.5], [0, 0, -0.5], [1, 0, 0], [0, 1, 0], 0.5))
    assert sol.procedure == "A"
    ch = choi_of_solution(sol)
    assert ch.feedback_index == 1
    d = ch.to_dict()
    assert d["feedback_index"] == 1
    assert len(d["choi"]) == 4 and len(d["choi"][0][0]) == 2


def test_stabilization_composition():
    # dephase first, then correct: same value as the solver reports
    tb, p = 0.6, 0.3
    psi = [np.array([np.cos(tb), 0, np.sin(tb)]), np.array([np.cos(tb), 0, -np.sin(tb)])]
    noise = dephasing(p)
    sol = solve(TrackingProblem(noise.apply(psi[0]), noise.apply(psi[1]), psi[0], psi[1], 0.5))
    corr = choi_of_solution(sol)
    achieved = np.mean([0.5 * (1 + corr.apply(noise.apply(s)).bloch @ s) for s in psi])
    assert abs(achieved - sol.fidelity) < 1e-10


def test_kraus_diagonal_middle_map():
    # with V = U = I the Kraus pair must reproduce diag(mu1, mu2, mu3) + s1 x
    sol = solve(TrackingProblem([0, 0, 0.5], [0, 0, -0.5], [1, 0, 0], [0, 1, 0], 0.5))
    d = sol.affine
    chi, eta = np.arcsin(d.mu3), np.arcsin(d.mu2)
    plus = 0.5 * np.array([[1, 1], [1, 1]])
    minus = 0.5 * np.array([[1, -1], [-1, 1]])
    m1 = np.cos((chi - eta) / 2) * plus + np.sin((chi + eta) / 2) * minus
    m2 = np.sin((chi - eta) / 2) * plus - np.cos((chi + eta) / 2) * minus
    from qtrack.bloch import Y

    ch = QuantumChannel.from_kraus([m1, Y @ m2])
    assert np.abs(ch.M - np.diag([d.mu1, d.mu2, d.mu3])).max() < 1e-12
    assert np.abs(ch.c - [d.s1, 0, 0]).max() < 1e-12
