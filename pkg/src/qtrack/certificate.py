"""Dual feasible point proving optimality of a tracking solution.

The primal problem maximizes ``-Tr[F0 K]`` over Choi matrices ``K`` with
``Tr_B K = I``. A Hermitian ``F = F0 + sum_k x_k sigma_k (x) I`` that is PSD
and satisfies ``F K = 0`` certifies that ``K`` is optimal with value ``2 x0``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .bloch import I2, X, Y, Z, TrackingProblem, su2_from_so3, validate_problem
from .channel import diagonal_choi
from .exceptions import ProcedureMismatch, SingularGamma
from .geometry import GeometrySummary
from .tracker import TrackingSolution

PSD_TOL = 1e-9
SLACKNESS_TOL = 1e-9
DUALITY_TOL = 1e-9
ROOT_TOL = 1e-8
SIGN_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class DualCertificate:
    x0: float
    x1: float
    x2: float
    x3: float
    F: np.ndarray
    F_tilde0: np.ndarray
    eigenvalues: np.ndarray
    slackness_residual: float
    duality_residual: float
    procedure: str

    @property
    def min_eigenvalue(self) -> float:
        return float(self.eigenvalues.min())

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        return self.x0, self.x1, self.x2, self.x3

    @property
    def dual_value(self) -> float:
        return 2.0 * self.x0

    @property
    def valid(self) -> bool:
        return (
            self.min_eigenvalue >= -PSD_TOL
            and self.slackness_residual <= SLACKNESS_TOL
            and self.duality_residual <= DUALITY_TOL
        )

    def to_dict(self) -> dict:
        return {
            "procedure": self.procedure,
            "coefficients": {"x0": self.x0, "x1": self.x1, "x2": self.x2, "x3": self.x3},
            "dual_value": self.dual_value,
            "eigenvalues": self.eigenvalues.tolist(),
            "min_eigenvalue": self.min_eigenvalue,
            "slackness_residual": self.slackness_residual,
            "duality_residual": self.duality_residual,
            "psd": self.min_eigenvalue >= -PSD_TOL,
            "slackness": self.slackness_residual <= SLACKNESS_TOL,
            "duality": self.duality_residual <= DUALITY_TOL,
            "valid": self.valid,
        }


def dual_coefficients(g: GeometrySummary, sol: TrackingSolution) -> tuple[float, float, float, float]:
    if (sol.procedure == "A") != (g.Omega > 0):
        raise ProcedureMismatch(f"solution uses procedure {sol.procedure} but Omega = {g.Omega:.3e}")
    rm, rx = g.R_minus_norm, g.R_cross_norm
    mean_source = g.pi1 * g.R1 + g.pi2 * g.R2
    gamma = g.Gamma_a if sol.procedure == "A" else g.Gamma_b
    if not gamma > 0:
        raise SingularGamma(f"Gamma = {gamma!r} inside procedure {sol.procedure}")
    x0 = (1.0 + gamma) / 4.0
    if sol.procedure == "A":
        x1 = rx * (1.0 + gamma) / (4.0 * rm)
    else:
        x1 = (rx + g.xi / gamma) / (4.0 * rm)
    x3 = (mean_source @ g.R_minus + g.Xi / gamma) / (4.0 * rm)
    return float(x0), float(x1), 0.0, float(x3)


def objective_matrix(p: TrackingProblem, sol: TrackingSolution) -> np.ndarray:
    """``F0 = -sum_i (V rho_i V^dag)^T (x) U^dag pi_i rhobar_i U`` in the frame of the diagonal map."""
    v, u = su2_from_so3(sol.V), su2_from_so3(sol.U)
    F0 = np.zeros((4, 4), dtype=complex)
    for pi, s, t in zip(p.priors, p.sources, p.targets):
        a = (v @ s.density @ v.conj().T).T
        b = u.conj().T @ (pi * t.density) @ u
        F0 -= np.kron(a, b)
    return 0.5 * (F0 + F0.conj().T)


def build_f(p: TrackingProblem, sol: TrackingSolution, coeffs=None) -> DualCertificate:
    p = validate_problem(p)
    x0, x1, x2, x3 = dual_coefficients(sol.geometry, sol) if coeffs is None else coeffs
    F0 = objective_matrix(p, sol)
    F = F0 + x0 * np.kron(I2, I2) + x1 * np.kron(X, I2) + x2 * np.kron(Y, I2) + x3 * np.kron(Z, I2)
    KD = diagonal_choi(sol)
    return DualCertificate(
        float(x0), float(x1), float(x2), float(x3),
        F, F0,
        np.linalg.eigvalsh(F),
        float(np.linalg.norm(F @ KD)),
        float(abs(2.0 * x0 + np.trace(F0 @ KD).real)),
        sol.procedure,
    )


def certify(sol: TrackingSolution) -> DualCertificate:
    return build_f(sol.problem, sol)


def _poly_roots(g: GeometrySummary, procedure: str) -> tuple[np.ndarray, dict]:
    rm, rx, rbx = g.R_minus_norm, g.R_cross_norm, g.Rbar_cross_norm
    S, T, Xi, xi = g.S, g.T, g.Xi, g.xi
    if procedure == "A":
        G = g.Gamma_a
        sp = g.S_plus_T
        upsilon = (4 * rm**2 * rbx**2 + sp**2) / (8 * rm**2 * G**2 * S * sp)
        const = upsilon * ((rm**2 - rx**2) * G**4 - Xi**2)
        roots = np.r_[0.0, 0.0, np.roots([1.0, -G, const])]
        return roots, {"upsilon": float(upsilon), "constant_term": float(const)}
    G = g.Gamma_b
    varpi = ((1 + rx * xi / (rm**2 * G**2)) * rm**4 * G**4 - (rm**2 + rx**2) * (xi**2 + Xi**2)) / (4 * rm**4 * G**2)
    omega = -(rx * G**2 - xi) * (rm**2 * G**2 * xi - rx * (xi**2 + Xi**2)) / (8 * rm**4 * G**3)
    roots = np.r_[0.0, np.roots([1.0, -G, varpi, omega])]
    return roots, {"varpi": float(varpi), "omega": float(omega)}


def char_poly_check(cert: DualCertificate, g: GeometrySummary) -> dict:
    """Compare eigenvalues of ``F`` with the closed-form roots of its characteristic polynomial."""
    roots, extra = _poly_roots(g, cert.procedure)
    if np.abs(roots.imag).max() > ROOT_TOL:
        return {"procedure": cert.procedure, "passed": False, "reason": "complex roots", **extra}
    roots = np.sort(roots.real)
    eig = np.sort(cert.eigenvalues)
    tol = np.maximum(ROOT_TOL, ROOT_TOL * np.abs(eig))
    mismatch = float(np.abs(eig - roots).max())
    ok = bool(np.all(np.abs(eig - roots) <= tol))

    report = {
        "procedure": cert.procedure,
        "eigenvalues": eig.tolist(),
        "roots": roots.tolist(),
        "max_mismatch": mismatch,
        "roots_nonnegative": bool(roots.min() >= -ROOT_TOL),
        **extra,
    }
    if cert.procedure == "B":
        varpi_alt = (-g.Omega + g.S + g.R_cross_norm * g.Rbar_cross_norm) / 4.0
        bracket = g.R_cross_norm * g.Gamma_b**2 - g.xi
        report.update(
            varpi_alternative=float(varpi_alt),
            varpi_nonnegative=extra["varpi"] >= -SIGN_TOL,
            omega_nonpositive=extra["omega"] <= SIGN_TOL,
            bracket=float(bracket),
            bracket_nonnegative=bool(bracket >= -SIGN_TOL),
        )
        ok = ok and report["varpi_nonnegative"] and report["omega_nonpositive"] and report["bracket_nonnegative"]
        ok = ok and abs(varpi_alt - extra["varpi"]) <= ROOT_TOL
    report["passed"] = bool(ok and report["roots_nonnegative"])
    return report
