"""Derived scalars and vectors of a tracking problem.

Sources enter through their Bloch vectors ``R1, R2``. Targets enter through
the *prior-weighted* Bloch vectors ``Rbar_i = pi_i * t_i`` (the Bloch vectors of
``pi_i * target_i``), so every quantity that mentions a barred vector already
carries the priors.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import TrackingProblem, validate_problem
from .exceptions import DegenerateDivisor

ROUNDOFF = 1e-12
EPS = float(np.finfo(float).eps)


def _sqrt_clamped(x: float, name: str) -> float:
    if x < 0.0:
        if x < -ROUNDOFF:
            raise DegenerateDivisor(f"{name} has negative square-root argument {x:.3e}")
        return 0.0
    return float(np.sqrt(x))


@dataclass(frozen=True, eq=False)
class GeometrySummary:
    R1: np.ndarray
    R2: np.ndarray
    Rbar1: np.ndarray
    Rbar2: np.ndarray
    pi1: float
    R_plus: np.ndarray
    R_minus: np.ndarray
    R_cross: np.ndarray
    Rbar_plus: np.ndarray
    Rbar_minus: np.ndarray
    Rbar_cross: np.ndarray
    R_plus_norm: float
    R_minus_norm: float
    R_cross_norm: float
    Rbar_plus_norm: float
    Rbar_minus_norm: float
    Rbar_cross_norm: float
    T: float
    S: float
    S_plus_T: float
    Omega: float
    Xi: float
    xi: float
    Gamma_a: float
    Gamma_b: float

    @property
    def pi2(self) -> float:
        return 1.0 - self.pi1

    @property
    def nonunitary(self) -> bool:
        """True when the optimal map is non-unitary (procedure A)."""
        return self.Omega > 0.0

    def to_dict(self) -> dict:
        out = {}
        for k, v in self.__dict__.items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else float(v)
        out["procedure"] = "A" if self.nonunitary else "B"
        return out


def _t_value(R1, R2, Rb1, Rb2) -> float:
    Rs, Rbs = (R1, R2), (Rb1, Rb2)
    return float(sum((1.0 - Rs[i] @ Rs[j]) * (Rbs[i] @ Rbs[j]) for i in range(2) for j in range(2)))


def summarize(p: TrackingProblem) -> GeometrySummary:
    p = validate_problem(p)
    R1, R2 = p.rho1.bloch, p.rho2.bloch
    Rb1, Rb2 = p.pi1 * p.target1.bloch, p.pi2 * p.target2.bloch

    Rp, Rm, Rx = R1 + R2, R1 - R2, np.cross(R1, R2)
    Rbp, Rbm, Rbx = Rb1 + Rb2, Rb1 - Rb2, np.cross(Rb1, Rb2)
    rp, rm, rx = (float(np.linalg.norm(v)) for v in (Rp, Rm, Rx))
    rbp, rbm, rbx = (float(np.linalg.norm(v)) for v in (Rbp, Rbm, Rbx))

    T = _t_value(R1, R2, Rb1, Rb2)
    gap = rm**2 - rx**2  # positive for distinct sources
    D = 4.0 * rbx**2 * gap
    # hypot avoids underflow in T^2 for nearly vanishing targets
    S = float(np.hypot(T, 2.0 * rbx * _sqrt_clamped(gap, "|R_-|^2 - |R_x|^2")))
    # S + T cancels when T < 0; S^2 - T^2 = D gives the same sum without cancellation
    # |Rbar_x| is accurate to EPS |Rbar_1| |Rbar_2| in absolute terms, not relative ones
    scale = float(np.linalg.norm(Rb1) * np.linalg.norm(Rb2))
    if T >= 0.0:
        S_plus_T = S + T
        rel_err = 4.0 * EPS
    else:
        S_plus_T = D / (S - T)
        rel_err = 4.0 * EPS * (1.0 + scale / max(rbx, EPS * scale, 1e-300) + 1.0 / gap)
    Omega = S_plus_T - 2.0 * rbx * rx
    omega_err = rel_err * S_plus_T + 4.0 * EPS * (scale * rx + rbx)
    if Omega <= omega_err:
        # not distinguishable from zero: the unitary branch, whose value agrees at Omega = 0
        Omega = min(Omega, 0.0)

    Xi = float((R1 @ Rm) * (Rb1 @ Rbp) + (R2 @ Rm) * (Rb2 @ Rbp))
    xi = rx * rbp**2 + rbx * rm**2

    # Gamma_a needs S + T > 0, which Omega > 0 forces; elsewhere report nan
    if S_plus_T > 0.0:
        # 2 rm^2 rbx^2 / (S + T), rewritten for T < 0 so that it stays finite as rbx -> 0
        ratio = 2.0 * rm**2 * rbx**2 / S_plus_T if T >= 0.0 else rm**2 * (S - T) / (2.0 * gap)
        Gamma_a = _sqrt_clamped(rbp**2 + ratio, "Gamma_a")
    else:
        Gamma_a = float("nan")
    Gamma_b = _sqrt_clamped(rbp**2 - T + 2.0 * rx * rbx, "Gamma_b")

    return GeometrySummary(
        R1=R1, R2=R2, Rbar1=Rb1, Rbar2=Rb2, pi1=p.pi1,
        R_plus=Rp, R_minus=Rm, R_cross=Rx,
        Rbar_plus=Rbp, Rbar_minus=Rbm, Rbar_cross=Rbx,
        R_plus_norm=rp, R_minus_norm=rm, R_cross_norm=rx,
        Rbar_plus_norm=rbp, Rbar_minus_norm=rbm, Rbar_cross_norm=rbx,
        T=T, S=S, S_plus_T=S_plus_T, Omega=Omega, Xi=Xi, xi=xi, Gamma_a=Gamma_a, Gamma_b=Gamma_b,
    )


def indicator(g: GeometrySummary) -> float:
    """Indicator ``Omega = S + T - 2 |Rbar_x| |R_x|``; positive means non-unitary dynamics."""
    return g.Omega


def xi_pair(g: GeometrySummary) -> tuple[float, float]:
    return g.Xi, g.xi


def gamma_a(g: GeometrySummary) -> float:
    if g.S_plus_T <= 1e-14:
        if g.Omega > 0:
            raise DegenerateDivisor("S + T vanishes although Omega > 0")
        return float("nan")
    return g.Gamma_a


def gamma_b(g: GeometrySummary) -> float:
    return g.Gamma_b
