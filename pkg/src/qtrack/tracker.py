"""Closed-form optimal tracking map ``C(rho) = U D(V rho V^dag) U^dag``.

All rotations here act on Bloch vectors (3x3 real). The lift to 2x2 unitaries
happens in :mod:`qtrack.channel`.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .bloch import TrackingProblem, ValidatedProblem, check_rotation, validate_problem
from .exceptions import DegenerateSources, InternalInconsistency, ProcedureMismatch
from .geometry import GeometrySummary, summarize

ROTATION_TOL = 1e-10
# below this |Rbar_x| the targets are treated as exactly collinear
COLLINEAR_TOL = 1e-14
# tracked-image checks lose ~eps/|Rbar_x| digits; skip them below this
IMAGE_CHECK_MIN_CROSS = 1e-4


@dataclass(frozen=True)
class AffineParams:
    """Diagonal contraction ``(mu1, mu2, mu3)`` followed by a shift ``s1`` along x."""

    mu1: float
    mu2: float
    mu3: float
    s1: float
    # sqrt(1 - mu2^2) and sqrt(1 - mu3^2) when known more accurately than from mu
    co2: Optional[float] = field(default=None, repr=False, compare=False)
    co3: Optional[float] = field(default=None, repr=False, compare=False)

    @classmethod
    def identity(cls) -> "AffineParams":
        return cls(1.0, 1.0, 1.0, 0.0, 0.0, 0.0)

    @property
    def complements(self) -> tuple[float, float]:
        def co(mu, known):
            return float(np.sqrt(max(1.0 - mu * mu, 0.0))) if known is None else known

        return co(self.mu2, self.co2), co(self.mu3, self.co3)

    @property
    def matrix(self) -> np.ndarray:
        return np.diag([self.mu1, self.mu2, self.mu3])

    @property
    def translation(self) -> np.ndarray:
        return np.array([self.s1, 0.0, 0.0])

    def extremality_residual(self) -> float:
        # squared form: sqrt(1 - mu^2) is ill-conditioned as mu -> 1
        r1 = abs(self.mu1 - self.mu2 * self.mu3)
        r2 = abs(self.s1**2 - (1 - self.mu2**2) * (1 - self.mu3**2))
        return max(r1, r2)

    def to_dict(self) -> dict:
        return {"mu1": self.mu1, "mu2": self.mu2, "mu3": self.mu3, "s1": self.s1}


@dataclass(frozen=True, eq=False)
class TrackingSolution:
    procedure: str
    V: np.ndarray
    affine: Optional[AffineParams]
    U: np.ndarray
    fidelity: float
    alpha: float
    beta1: Optional[float]
    beta2: Optional[float]
    vartheta: Optional[float]
    problem: ValidatedProblem = field(repr=False)
    geometry: GeometrySummary = field(repr=False)

    @property
    def diagonal_map(self) -> AffineParams:
        """The middle affine map; the identity for procedure B."""
        return self.affine if self.affine is not None else AffineParams.identity()

    def bloch_map(self) -> tuple[np.ndarray, np.ndarray]:
        """Composite affine action ``r -> M r + c`` on Bloch vectors."""
        d = self.diagonal_map
        return self.U @ d.matrix @ self.V, self.U @ d.translation

    def outputs(self) -> tuple[np.ndarray, np.ndarray]:
        M, c = self.bloch_map()
        return M @ self.geometry.R1 + c, M @ self.geometry.R2 + c

    def to_dict(self) -> dict:
        return {
            "procedure": self.procedure,
            "V": self.V.tolist(),
            "U": self.U.tolist(),
            "affine": None if self.affine is None else self.affine.to_dict(),
            "fidelity": self.fidelity,
            "alpha": self.alpha,
            "beta1": self.beta1,
            "beta2": self.beta2,
            "vartheta": self.vartheta,
        }


def _unit(v: np.ndarray) -> np.ndarray:
    return v / np.linalg.norm(v)


def _orthogonal_to(u: np.ndarray) -> np.ndarray:
    e = np.eye(3)[int(np.argmin(np.abs(u)))]
    return _unit(np.cross(u, e))


def best_rotation(a, b) -> np.ndarray:
    """Proper rotation maximizing ``sum_i (W a_i) . b_i`` (orthogonal Procrustes / Kabsch).

    Rank-deficient inputs are fine: any maximizer is returned.
    """
    H = sum(np.outer(bi, ai) for ai, bi in zip(a, b))
    W, _, Zt = np.linalg.svd(H)
    d = 1.0 if np.linalg.det(W @ Zt) >= 0 else -1.0
    return W @ np.diag([1.0, 1.0, d]) @ Zt


def _rotation_taking(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    """A rotation taking unit vector ``src`` to unit vector ``dst``."""
    c = float(src @ dst)
    if c < 0.0:
        # flip src first by a half turn so the remaining rotation is well conditioned
        axis = _orthogonal_to(src)
        return _rotation_taking(-src, dst) @ (2.0 * np.outer(axis, axis) - np.eye(3))
    v = np.cross(src, dst)
    vx = np.array([[0, -v[2], v[1]], [v[2], 0, -v[0]], [-v[1], v[0], 0]])
    return np.eye(3) + vx + vx @ vx / (1.0 + c)


def rotation_v(g: GeometrySummary) -> np.ndarray:
    """Rotation putting both sources in the xz-plane with a common positive x-component.

    The frame ``(m, n, u)`` with ``u = R_-/|R_-|``, ``n = R_x/|R_x|`` and
    ``m = n x u`` is mapped onto ``(x, y, z)``.
    """
    if g.R_minus_norm <= 1e-10:
        raise DegenerateSources("sources coincide")
    u = g.R_minus / g.R_minus_norm
    # m is the direction of the part of R_1 orthogonal to u (shared by R_2);
    # two Gram-Schmidt passes keep it orthogonal to u even when that part is tiny
    w = g.R1 - (g.R1 @ u) * u
    w = w - (w @ u) * u
    if np.linalg.norm(w) > 1e-13:
        m = w / np.linalg.norm(w)
        n = np.cross(u, m)
    else:
        # w is rounding noise: collinear sources, any frame around u will do
        n = _orthogonal_to(u)
        m = np.cross(n, u)
    V = np.array([m, n, u])

    expected = [
        np.array([g.R_cross_norm / g.R_minus_norm, 0.0, (Ri @ g.R_minus) / g.R_minus_norm])
        for Ri in (g.R1, g.R2)
    ]
    err = max(np.linalg.norm(V @ Ri - e) for Ri, e in zip((g.R1, g.R2), expected))
    if err > ROTATION_TOL:
        raise InternalInconsistency(f"rotation V misplaces the sources by {err:.3e}")
    return check_rotation(V, tol=ROTATION_TOL)


def affine_params(g: GeometrySummary) -> AffineParams:
    """Extremal contraction-plus-shift used when ``Omega > 0``."""
    if not g.Omega > 0:
        raise ProcedureMismatch("affine parameters are defined only for Omega > 0")
    S, sp, Om = g.S, g.S_plus_T, g.Omega
    rm, rx, rbx = g.R_minus_norm, g.R_cross_norm, g.Rbar_cross_norm
    # rbx^2 / (S + T), finite as rbx -> 0 when T < 0
    q = rbx**2 / sp if g.T >= 0.0 else (S - g.T) / (4.0 * (rm**2 - rx**2))
    mu2 = 2.0 * rbx * rx / sp
    mu3 = rm * np.sqrt(2.0 * q / S)
    mu1 = mu2 * mu3
    # sqrt(1 - mu2^2) and sqrt(1 - mu3^2) in product form, free of cancellation
    # as mu -> 1; Omega / (S + T) = 1 - mu2 exactly
    co2 = np.sqrt(Om / sp * (1.0 + mu2))
    co3 = co2 * np.sqrt(sp / (2.0 * S))
    s1 = co2 * co3
    return AffineParams(float(mu1), float(mu2), float(mu3), float(s1), float(co2), float(co3))


def _alpha_beta_a(g: GeometrySummary) -> tuple[float, float, float]:
    S, sp = g.S, g.S_plus_T
    alpha = np.sqrt(sp / (2.0 * S))
    k = np.sqrt(2.0 / S) / np.sqrt(sp)
    return float(alpha), float(k * (g.R1 @ g.R_minus)), float(k * (g.R2 @ g.R_minus))


def _alpha_beta_b(g: GeometrySummary) -> tuple[float, Optional[float], Optional[float]]:
    alpha = g.R_cross_norm / g.R_minus_norm
    # collinearity is a statement about the angle, so compare with the lengths
    if g.Rbar_cross_norm <= COLLINEAR_TOL * np.linalg.norm(g.Rbar1) * np.linalg.norm(g.Rbar2):
        return float(alpha), None, None
    d = g.Rbar_cross_norm * g.R_minus_norm
    return float(alpha), float((g.R1 @ g.R_minus) / d), float((g.R2 @ g.R_minus) / d)


def tracked_images(g: GeometrySummary, alpha: float, beta1: float, beta2: float) -> tuple[np.ndarray, np.ndarray, float]:
    """Images ``k_i1 Rbar_1 + k_i2 Rbar_2`` of the two pre-rotation vectors, and ``Gamma``."""
    Rb = (g.Rbar1, g.Rbar2)
    beta = (beta1, beta2)
    rbx2 = g.Rbar_cross_norm**2
    db = beta1 - beta2
    gamma = np.sqrt(
        alpha**2 * g.Rbar_plus_norm**2
        + (np.linalg.norm(beta1 * Rb[0] + beta2 * Rb[1]) ** 2 + 2.0 * alpha * db) * rbx2
    )
    k = np.empty((2, 2))
    for i in range(2):
        for j in range(2):
            k[i, j] = (
                alpha**2 + beta[i] * beta[j] * rbx2 + (-1) ** (i + j) * alpha * db * (Rb[1 - i] @ Rb[1 - j])
            ) / gamma
    return k[0, 0] * Rb[0] + k[0, 1] * Rb[1], k[1, 0] * Rb[0] + k[1, 1] * Rb[1], float(gamma)


def _check_u(U, pre, g, alpha, beta1, beta2, gamma_closed):
    check_rotation(U, tol=ROTATION_TOL)
    achieved = float(sum((U @ a) @ b for a, b in zip(pre, (g.Rbar1, g.Rbar2))))
    if abs(achieved - gamma_closed) > ROTATION_TOL:
        raise InternalInconsistency(
            f"rotation U reaches overlap {achieved:.17g}, closed form gives {gamma_closed:.17g}"
        )
    if beta1 is not None and g.Rbar_cross_norm >= IMAGE_CHECK_MIN_CROSS:
        img1, img2, _ = tracked_images(g, alpha, beta1, beta2)
        err = max(np.linalg.norm(U @ pre[0] - img1), np.linalg.norm(U @ pre[1] - img2))
        if err > ROTATION_TOL:
            raise InternalInconsistency(f"rotation U misses the tracked images by {err:.3e}")


def rotation_u_a(g: GeometrySummary, V: Optional[np.ndarray] = None, affine: Optional[AffineParams] = None) -> np.ndarray:
    """Rotation taking the contracted, shifted sources onto the target plane (``Omega > 0``).

    ``U`` is the proper rotation that maximizes the overlap of its images with
    the weighted targets; for non-collinear targets this is exactly the map
    onto ``k_i1 Rbar_1 + k_i2 Rbar_2``, and for collinear targets it aligns x
    with ``Rbar_+``.
    """
    if not g.Omega > 0:
        raise ProcedureMismatch("rotation_u_a requires Omega > 0")
    V = rotation_v(g) if V is None else V
    d = affine_params(g) if affine is None else affine
    pre = [d.matrix @ (V @ Ri) + d.translation for Ri in (g.R1, g.R2)]
    U = best_rotation(pre, (g.Rbar1, g.Rbar2))
    alpha, b1, b2 = _alpha_beta_a(g)
    _check_u(U, pre, g, alpha, b1, b2, g.Gamma_a)
    return U


def rotation_u_b(g: GeometrySummary, V: Optional[np.ndarray] = None) -> tuple[np.ndarray, Optional[float]]:
    """Rotation for the unitary branch (``Omega <= 0``) and, for collinear targets, the angle vartheta."""
    if g.Omega > 0:
        raise ProcedureMismatch("rotation_u_b requires Omega <= 0")
    V = rotation_v(g) if V is None else V
    pre = [V @ Ri for Ri in (g.R1, g.R2)]
    alpha, b1, b2 = _alpha_beta_b(g)

    if b1 is not None:
        U = best_rotation(pre, (g.Rbar1, g.Rbar2))
        _check_u(U, pre, g, alpha, b1, b2, g.Gamma_b)
        return U, None

    # collinear (necessarily antiparallel) targets: rotate in the xz-plane by
    # vartheta, then take z onto the direction of Rbar_1
    n1, n2 = np.linalg.norm(g.Rbar1), np.linalg.norm(g.Rbar2)
    # Rbar_- has length n1 + n2, so its direction survives a vanishing Rbar_1
    axis = g.Rbar_minus / g.Rbar_minus_norm
    root = np.sqrt(g.Rbar_plus_norm**2 - g.T)
    sin_t = g.R_cross_norm * (n1 - n2) / (g.R_minus_norm * root)
    if abs(sin_t) > 1.0 + 1e-12:
        raise InternalInconsistency(f"|sin(vartheta)| = {abs(sin_t):.17g} exceeds 1")
    sin_t = float(np.clip(sin_t, -1.0, 1.0))
    cos_t = np.sqrt(1.0 - sin_t**2)
    in_plane = np.array([[cos_t, 0.0, -sin_t], [0.0, 1.0, 0.0], [sin_t, 0.0, cos_t]])
    U = _rotation_taking(np.array([0.0, 0.0, 1.0]), axis) @ in_plane
    _check_u(U, pre, g, alpha, None, None, g.Gamma_b)
    return U, float(np.arctan2(sin_t, cos_t))


def solve(p: TrackingProblem) -> TrackingSolution:
    """Optimal tracking map for a two-state problem, dispatched on the sign of Omega."""
    p = validate_problem(p)
    g = summarize(p)
    V = rotation_v(g)
    if g.Omega > 0:
        d = affine_params(g)
        if d.extremality_residual() > 1e-12:
            raise InternalInconsistency(f"affine map is not extremal (residual {d.extremality_residual():.3e})")
        U = rotation_u_a(g, V, d)
        alpha, b1, b2 = _alpha_beta_a(g)
        return TrackingSolution("A", V, d, U, 0.5 + 0.5 * g.Gamma_a, alpha, b1, b2, None, p, g)
    U, vartheta = rotation_u_b(g, V)
    alpha, b1, b2 = _alpha_beta_b(g)
    return TrackingSolution("B", V, None, U, 0.5 + 0.5 * g.Gamma_b, alpha, b1, b2, vartheta, p, g)
