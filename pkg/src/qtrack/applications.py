"""Closed-form presets: discrimination, purification, stabilization, cloning, pure tracking.

Every preset builds explicit Bloch vectors, runs the generic :func:`solve`,
and checks the closed form against it. Sources sit in the xz-plane
symmetric about a fixed axis; by rotation invariance this loses nothing.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bloch import DISTINCT_TOL, QubitState, TrackingProblem, as_state
from .channel import choi_of_solution, dephasing
from .exceptions import (
    EmptyGroup,
    IdenticalStates,
    InternalInconsistency,
    InvalidPrior,
    OutOfRange,
    WeightsNotNormalized,
)
from .tracker import AffineParams, TrackingSolution, solve

PIPELINE_TOL = 1e-10
HELSTROM_TOL = 1e-12
WEIGHT_SUM_TOL = 1e-12


def _check_prior(pi1: float) -> float:
    if not 0.0 < pi1 < 1.0:
        raise InvalidPrior(f"pi1 must lie in (0, 1), got {pi1!r}")
    return float(pi1)


def _agree(closed: float, pipeline: float, what: str, tol: float = PIPELINE_TOL) -> None:
    if abs(closed - pipeline) > tol:
        raise InternalInconsistency(
            f"{what}: closed form {closed:.17g} differs from solve() {pipeline:.17g}"
        )


def symmetric_pair(length: float, half_angle: float) -> tuple[np.ndarray, np.ndarray]:
    """Bloch vectors ``length * (+-sin a, 0, cos a)``."""
    s, c = np.sin(half_angle), np.cos(half_angle)
    return length * np.array([s, 0.0, c]), length * np.array([-s, 0.0, c])


# -- discrimination ---------------------------------------------------------


@dataclass(frozen=True)
class DiscriminationResult:
    P_track: float
    P_helstrom: float
    T: float
    branch: str
    fidelity: float

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def helstrom_probability(rho1, rho2, p1: float) -> float:
    """``1/2 + 1/2 ||p1 rho1 - p2 rho2||_tr`` via a Hermitian eigensolver."""
    a, b = as_state(rho1), as_state(rho2)
    ev = np.linalg.eigvalsh(p1 * a.density - (1.0 - p1) * b.density)
    return 0.5 + 0.5 * float(np.abs(ev).sum())


def discrimination_T(R1, R2, cos_angle, p1):
    """``T = (p1 - p2)^2 - |p1 R1 - p2 R2|^2`` from lengths and the angle between the vectors.

    Broadcasts over array arguments (used for the threshold-surface sweep).
    """
    p2 = 1.0 - np.asarray(p1)
    p1 = np.asarray(p1)
    w2 = (p1 * R1) ** 2 + (p2 * R2) ** 2 - 2.0 * p1 * p2 * R1 * R2 * cos_angle
    return (p1 - p2) ** 2 - w2


def discriminate(rho1, rho2, p1: float) -> DiscriminationResult:
    """Minimum-error discrimination read as tracking onto ``|0>, |1>``."""
    p1 = _check_prior(p1)
    a, b = as_state(rho1), as_state(rho2)
    if np.linalg.norm(a.bloch - b.bloch) <= DISTINCT_TOL:
        raise IdenticalStates("the two states coincide")
    p2 = 1.0 - p1
    w = np.linalg.norm(p1 * a.bloch - p2 * b.bloch)
    T = (p1 - p2) ** 2 - w**2
    if T > 0:
        branch, P = "prepare", 0.5 + 0.5 * abs(p1 - p2)
    else:
        branch, P = "measure", 0.5 + 0.5 * w
    P_h = helstrom_probability(a, b, p1)
    _agree(P, P_h, "Helstrom probability", HELSTROM_TOL)
    sol = solve(TrackingProblem(a, b, [0.0, 0.0, 1.0], [0.0, 0.0, -1.0], p1))
    _agree(P, sol.fidelity, "discrimination fidelity")
    return DiscriminationResult(float(P), float(P_h), float(T), branch, float(sol.fidelity))


# -- purification -----------------------------------------------------------


@dataclass(frozen=True)
class PurificationSpec:
    R: float
    theta: float
    theta_bar: Optional[float] = None
    pi1: float = 0.5

    def __post_init__(self):
        if self.theta_bar is None:
            object.__setattr__(self, "theta_bar", self.theta)
        if not 0.0 < self.R <= 1.0:
            raise OutOfRange(f"R must lie in (0, 1], got {self.R!r}")
        if not 0.0 < self.theta <= np.pi / 2:
            raise OutOfRange(f"theta must lie in (0, pi/2], got {self.theta!r}")
        if not 0.0 <= self.theta_bar <= np.pi / 2:
            raise OutOfRange(f"theta_bar must lie in [0, pi/2], got {self.theta_bar!r}")
        _check_prior(self.pi1)

    def problem(self) -> TrackingProblem:
        r1, r2 = symmetric_pair(self.R, self.theta)
        t1, t2 = symmetric_pair(1.0, self.theta_bar)
        return TrackingProblem(r1, r2, t1, t2, self.pi1)


@dataclass(frozen=True)
class PresetResult:
    Omega: float
    fidelity: float
    params: Optional[AffineParams]
    solution: TrackingSolution

    def to_dict(self) -> dict:
        return {
            "Omega": self.Omega,
            "fidelity": self.fidelity,
            "procedure": self.solution.procedure,
            "affine": None if self.params is None else self.params.to_dict(),
        }


def purification_scalars(spec: PurificationSpec) -> dict:
    """``R_x Rbar_x``, ``T``, ``S`` and ``Omega`` for equal-length sources and pure targets, any prior."""
    Rc = (spec.R * np.cos(spec.theta)) ** 2
    Rs = (spec.R * np.sin(spec.theta)) ** 2
    pi1, pi2 = spec.pi1, 1.0 - spec.pi1
    delta = (pi1 - pi2) ** 2
    c2 = np.cos(2.0 * spec.theta_bar)
    Pp = pi1**2 + pi2**2 + 2.0 * pi1 * pi2 * c2
    Pm = pi1**2 + pi2**2 - 2.0 * pi1 * pi2 * c2
    cross = np.sqrt(max(Rs * Rc * (Pp * Pm - delta), 0.0))
    T = (1.0 - Rc) * Pp - Rs * Pm
    S = np.sqrt(max(((1.0 - Rc) * Pp + Rs * Pm) ** 2 - 4.0 * delta * Rs * (1.0 - Rc), 0.0))
    return {"cross": float(cross), "T": float(T), "S": float(S), "Omega": float(S + T - 2.0 * cross)}


def purification_closed_form(R: float, theta: float, theta_bar: float) -> tuple[float, float]:
    """Uniform-prior ``(Omega, fidelity)``."""
    ct, st, cb, sb = np.cos(theta), np.sin(theta), np.cos(theta_bar), np.sin(theta_bar)
    omega = 2.0 * (cb**2 - R**2 * ct * cb * np.cos(theta - theta_bar))
    if omega > 0:
        fid = 0.5 + 0.5 * np.sqrt(cb**2 + R**2 * st**2 * sb**2 / (1.0 - R**2 * ct**2))
    else:
        fid = 0.5 + 0.5 * R * np.cos(theta - theta_bar)
    return float(omega), float(fid)


def purify(spec: PurificationSpec) -> PresetResult:
    sol = solve(spec.problem())
    g = sol.geometry
    sc = purification_scalars(spec)
    _agree(sc["Omega"], g.Omega, "purification Omega")
    if spec.pi1 == 0.5:
        omega, fid = purification_closed_form(spec.R, spec.theta, spec.theta_bar)
        _agree(omega, g.Omega, "purification Omega (uniform)")
        # on Omega = 0 both branches give the same fidelity, so a roundoff sign flip is harmless
        _agree(fid, sol.fidelity, "purification fidelity")
    return PresetResult(g.Omega, sol.fidelity, sol.affine, sol)


def purification_sweep(R: float, thetas: Sequence[float], theta_bar: Optional[float] = None, pi1: float = 0.5) -> list[dict]:
    """Rows of ``theta, fidelity, mu1, mu2, mu3, s1``; ``theta_bar`` defaults to ``theta``."""
    rows = []
    for th in thetas:
        res = purify(PurificationSpec(R, float(th), theta_bar, pi1))
        d = res.solution.diagonal_map
        rows.append({"theta": float(th), "fidelity": res.fidelity, "mu1": d.mu1, "mu2": d.mu2, "mu3": d.mu3, "s1": d.s1})
    return rows


# -- stabilization against dephasing ----------------------------------------


def stabilization_states(theta_bar: float) -> tuple[np.ndarray, np.ndarray]:
    """Bloch vectors of ``cos(a/2)|+> +- sin(a/2)|->``: ``(cos a, 0, +-sin a)``."""
    return np.array([np.cos(theta_bar), 0.0, np.sin(theta_bar)]), np.array([np.cos(theta_bar), 0.0, -np.sin(theta_bar)])


def stabilization_closed_form(theta_bar: float, p: float) -> tuple[float, float]:
    cb, sb = np.cos(theta_bar), np.sin(theta_bar)
    R2 = ((1.0 - 2.0 * p) * cb) ** 2 + sb**2
    omega = 2.0 * cb**2 * (1.0 - R2 + 2.0 * p * sb**2)
    fid = 0.5 + 0.5 * np.sqrt(cb**2 + sb**4 / (1.0 - ((1.0 - 2.0 * p) * cb) ** 2))
    return float(omega), float(fid)


def stabilize(theta_bar: float, p: float) -> PresetResult:
    """Best correction after dephasing two equiprobable pure states."""
    if not 0.0 < theta_bar < np.pi / 2:
        raise OutOfRange(f"theta_bar must lie in (0, pi/2), got {theta_bar!r}")
    if not 0.0 < p <= 0.5:
        raise OutOfRange(f"p must lie in (0, 1/2], got {p!r}")
    psi1, psi2 = stabilization_states(theta_bar)
    noise = dephasing(p)
    src1, src2 = noise.apply(psi1), noise.apply(psi2)
    sol = solve(TrackingProblem(src1, src2, psi1, psi2, 0.5))
    omega, fid = stabilization_closed_form(theta_bar, p)
    if not sol.geometry.Omega > 0:
        raise InternalInconsistency(f"stabilization produced Omega = {sol.geometry.Omega:.3e} <= 0")
    _agree(omega, sol.geometry.Omega, "stabilization Omega")
    _agree(fid, sol.fidelity, "stabilization fidelity")

    # run the actual pipeline: noise, then correction, on the original pure states
    corr = choi_of_solution(sol)
    achieved = 0.5 * sum(0.5 * (1.0 + corr.apply(noise.apply(s)).bloch @ s) for s in (psi1, psi2))
    _agree(fid, achieved, "stabilization pipeline")
    return PresetResult(sol.geometry.Omega, sol.fidelity, sol.affine, sol)


# -- pure-state tracking and cloning ----------------------------------------


def pure_tracking_closed_form(theta: float, theta_bar: float, pi1: float) -> tuple[float, float]:
    pi2 = 1.0 - pi1
    omega = 8.0 * pi1 * pi2 * np.sin(theta) * np.cos(theta_bar) * np.sin(theta - theta_bar)
    if theta >= theta_bar:
        fid = 1.0
    else:
        fid = 0.5 + 0.5 * np.sqrt(pi1**2 + pi2**2 + 2.0 * pi1 * pi2 * np.cos(2.0 * theta - 2.0 * theta_bar))
    return float(omega), float(fid)


def pure_tracking_problem(theta: float, theta_bar: float, pi1: float) -> TrackingProblem:
    r1, r2 = symmetric_pair(1.0, theta)
    t1, t2 = symmetric_pair(1.0, theta_bar)
    return TrackingProblem(r1, r2, t1, t2, pi1)


def pure_tracking(theta: float, theta_bar: float, pi1: float = 0.5) -> PresetResult:
    """Pure sources at half-angle ``theta`` to pure targets at half-angle ``theta_bar``."""
    for name, a in (("theta", theta), ("theta_bar", theta_bar)):
        if not 0.0 < a <= np.pi / 2:
            raise OutOfRange(f"{name} must lie in (0, pi/2], got {a!r}")
    pi1 = _check_prior(pi1)
    sol = solve(pure_tracking_problem(theta, theta_bar, pi1))
    omega, fid = pure_tracking_closed_form(theta, theta_bar, pi1)
    _agree(omega, sol.geometry.Omega, "pure-tracking Omega")
    _agree(fid, sol.fidelity, "pure-tracking fidelity")
    return PresetResult(sol.geometry.Omega, sol.fidelity, sol.affine, sol)


@dataclass(frozen=True)
class CloningSpec:
    phi: float
    pi1: float = 0.5

    def __post_init__(self):
        if not 0.0 <= self.phi < np.pi / 4:
            raise OutOfRange(f"phi must lie in [0, pi/4), got {self.phi!r}")
        _check_prior(self.pi1)

    @property
    def theta(self) -> float:
        """Half Bloch angle between ``cos(phi)|0> + sin(phi)|1>`` and ``sin(phi)|0> + cos(phi)|1>``."""
        return float(np.arccos(np.sin(2.0 * self.phi)))

    @property
    def theta_bar(self) -> float:
        """Same for the two-copy states, whose overlap is squared."""
        return float(np.arccos(np.sin(2.0 * self.phi) ** 2))


def clone(spec: CloningSpec) -> tuple[float, float]:
    """``(Omega_tilde, fidelity)`` for state-dependent 1 -> 2 cloning."""
    th, tb = spec.theta, spec.theta_bar
    omega_t = 2.0 * th - 2.0 * tb
    pi1, pi2 = spec.pi1, 1.0 - spec.pi1
    fid = 0.5 + 0.5 * np.sqrt(pi1**2 + pi2**2 + 2.0 * pi1 * pi2 * np.cos(omega_t))
    if spec.phi == 0.0:
        return float(omega_t), 1.0
    sol = solve(pure_tracking_problem(th, tb, pi1))
    _agree(fid, sol.fidelity, "cloning fidelity")
    return float(omega_t), float(fid)


# -- many states in two groups ----------------------------------------------


def aggregate_sources(groups, targets) -> TrackingProblem:
    """Reduce weighted groups of source states to a two-state problem.

    ``groups`` holds two lists of ``(state, q_j)``; all ``q_j`` together must sum
    to 1. Group ``i`` becomes one source with prior ``sum q_j`` and Bloch vector
    the ``q``-weighted average; the figure of merit is linear, so nothing is lost.
    """
    if len(groups) != 2:
        raise EmptyGroup(f"expected two groups, got {len(groups)}")
    total = 0.0
    sources, priors = [], []
    for k, grp in enumerate(groups):
        if len(grp) == 0:
            raise EmptyGroup(f"group {k + 1} is empty")
        w = np.array([float(q) for _, q in grp])
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise WeightsNotNormalized(f"group {k + 1} has a non-positive weight")
        vecs = np.array([as_state(s).bloch for s, _ in grp])
        priors.append(w.sum())
        sources.append(QubitState(w @ vecs / w.sum()))
        total += w.sum()
    if abs(total - 1.0) > WEIGHT_SUM_TOL:
        raise WeightsNotNormalized(f"weights sum to {total:.17g}, not 1")
    return TrackingProblem(sources[0], sources[1], targets[0], targets[1], priors[0] / total)


def n_state_figure_of_merit(channel, groups, targets) -> float:
    """``sum_i sum_{j in group i} q_j Tr[C(tau_j) rhobar_i]``."""
    out = 0.0
    for grp, t in zip(groups, targets):
        tb = as_state(t).bloch
        for s, q in grp:
            out += q * 0.5 * (1.0 + channel.apply(s).bloch @ tb)
    return float(out)


# -- indicator map over source/target closeness ----------------------------


def indicator_grid(R: float, thetas, theta_bars) -> np.ndarray:
    """``Omega`` for sources ``R(+-sin t, 0, cos t)`` and pure targets at ``tb``, uniform priors.

    Returns an array of shape ``(len(thetas), len(theta_bars))``.
    """
    from .geometry import summarize

    out = np.empty((len(thetas), len(theta_bars)))
    for i, th in enumerate(thetas):
        r1, r2 = symmetric_pair(R, th)
        for j, tb in enumerate(theta_bars):
            t1, t2 = symmetric_pair(1.0, tb)
            out[i, j] = summarize(TrackingProblem(r1, r2, t1, t2, 0.5)).Omega
    return out


def indicator_sweep(R: float, n: int = 100) -> list[dict]:
    """Rows of ``source_fidelity = 1 - R^2 sin^2 t``, ``target_fidelity = cos^2 tb`` and ``omega``."""
    h = (np.pi / 2) / n
    thetas = h * np.arange(1, n + 1)
    theta_bars = h * (np.arange(n) + 0.5)
    om = indicator_grid(R, thetas, theta_bars)
    rows = []
    for i, th in enumerate(thetas):
        for j, tb in enumerate(theta_bars):
            rows.append({
                "source_fidelity": float(1.0 - R**2 * np.sin(th) ** 2),
                "target_fidelity": float(np.cos(tb) ** 2),
                "omega": float(om[i, j]),
            })
    return rows
