"""Can two source states be mapped exactly onto two target states?

Two qubit states ``rho_i`` can be sent to ``rhobar_i`` by one channel iff
``||rhobar_1 - t rhobar_2||_tr <= ||rho_1 - t rho_2||_tr`` for every ``t >= 0``
(Alberti-Uhlmann). For pure distinct targets this reduces to: both sources
pure and the sources at least as far apart as the targets.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bloch import STATE_TOL, TrackingProblem, validate_problem
from .exceptions import TargetsIdentical, TargetsNotPure

PURE_TOL = 1e-10
VIOLATION_TOL = 1e-12
GRID_POINTS = 4001
GRID_RANGE = (1e-4, 1e4)


@dataclass(frozen=True, eq=False)
class FeasibilityReport:
    feasible: bool
    witness_t: Optional[float]
    margin: float
    method: str
    curve: Optional[tuple] = field(default=None, repr=False)

    def to_dict(self) -> dict:
        return {
            "feasible": self.feasible,
            "witness_t": self.witness_t,
            "margin": self.margin,
            "method": self.method,
        }


def t_grid() -> np.ndarray:
    """Log-spaced ``t`` values with the endpoint ``t = 0`` prepended."""
    return np.r_[0.0, np.logspace(np.log10(GRID_RANGE[0]), np.log10(GRID_RANGE[1]), GRID_POINTS)]


def _trace_norms(a: np.ndarray, b: np.ndarray, t: np.ndarray) -> np.ndarray:
    """``||rho_a - t rho_b||_tr`` for Bloch vectors ``a, b`` and an array of ``t``.

    ``rho_a - t rho_b = ((1-t) I + (a - t b).sigma) / 2`` has eigenvalues
    ``((1-t) +- |a - t b|) / 2``, so the trace norm is ``max(|1-t|, |a - t b|)``.
    """
    diff = a[None, :] - t[:, None] * b[None, :]
    return np.maximum(np.abs(1.0 - t), np.linalg.norm(diff, axis=1))


def margin_curve(p: TrackingProblem, t: Optional[np.ndarray] = None) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """``(t, lhs, rhs)`` with lhs the target-side and rhs the source-side trace norm."""
    t = t_grid() if t is None else np.asarray(t, dtype=float)
    lhs = _trace_norms(p.target1.bloch, p.target2.bloch, t)
    rhs = _trace_norms(p.rho1.bloch, p.rho2.bloch, t)
    return t, lhs, rhs


def alberti_uhlmann(p: TrackingProblem) -> FeasibilityReport:
    """Grid test of the trace-norm criterion; priors play no role."""
    p = validate_problem(p)
    t, lhs, rhs = margin_curve(p)
    # the t -> infinity limit (both sides over t) is 1 <= 1 and never binds
    gap = rhs - lhs
    margin = float(gap.min())
    bad = np.flatnonzero(gap < -VIOLATION_TOL)
    witness = float(t[bad[0]]) if bad.size else None
    return FeasibilityReport(bad.size == 0, witness, margin, "grid", (t, lhs, rhs))


def _cos_between(a: np.ndarray, b: np.ndarray) -> float:
    return float(np.clip(a @ b / (np.linalg.norm(a) * np.linalg.norm(b)), -1.0, 1.0))


def is_pure(b: np.ndarray, tol: float = PURE_TOL) -> bool:
    return 1.0 - float(np.linalg.norm(b)) <= tol


def pure_target_corollary(p: TrackingProblem) -> FeasibilityReport:
    """Exact test for pure, distinct targets.

    The margin is ``cos(target angle) - cos(source angle)`` when both sources
    are pure, and ``min |R_i| - 1`` (negative) otherwise.
    """
    p = validate_problem(p)
    t1, t2 = p.target1.bloch, p.target2.bloch
    if not (is_pure(t1) and is_pure(t2)):
        raise TargetsNotPure("the corollary applies to pure targets only")
    cos_t = _cos_between(t1, t2)
    if cos_t >= 1.0 - STATE_TOL:
        raise TargetsIdentical("the corollary requires distinct targets")
    r1, r2 = p.rho1.bloch, p.rho2.bloch
    if not (is_pure(r1) and is_pure(r2)):
        margin = min(np.linalg.norm(r1), np.linalg.norm(r2)) - 1.0
        return FeasibilityReport(False, None, float(margin), "corollary")
    margin = cos_t - _cos_between(r1, r2)
    return FeasibilityReport(bool(margin >= -VIOLATION_TOL), None, float(margin), "corollary")


def feasibility(p: TrackingProblem) -> FeasibilityReport:
    """Exact corollary when it applies, grid criterion otherwise."""
    p = validate_problem(p)
    t1, t2 = p.target1.bloch, p.target2.bloch
    if is_pure(t1) and is_pure(t2) and _cos_between(t1, t2) < 1.0 - STATE_TOL:
        return pure_target_corollary(p)
    return alberti_uhlmann(p)


def perfect_value(p: TrackingProblem) -> float:
    """Figure of merit an exact tracker would reach: ``sum_i pi_i Tr[rhobar_i^2]``."""
    return sum(pi * 0.5 * (1.0 + t.norm**2) for pi, t in zip(p.priors, p.targets))
