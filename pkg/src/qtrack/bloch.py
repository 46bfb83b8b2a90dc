"""Qubit states in Bloch form, conversions and problem validation.

The Bloch vector is the canonical representation everywhere in the package;
density matrices are derived from it on demand.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .exceptions import (
    BothTargetsMaximallyMixed,
    IdenticalSources,
    InvalidPrior,
    NonPhysicalState,
    NotARotation,
)

STATE_TOL = 1e-12
DISTINCT_TOL = 1e-10

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (X, Y, Z)


def _frozen(a) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def bloch_to_density(b) -> np.ndarray:
    """Return ``(I + b.sigma) / 2``."""
    b = np.asarray(b, dtype=float)
    if b.shape != (3,):
        raise NonPhysicalState(f"Bloch vector must have 3 components, got shape {b.shape}")
    if np.linalg.norm(b) > 1 + STATE_TOL:
        raise NonPhysicalState(f"Bloch vector norm {np.linalg.norm(b):.17g} exceeds 1")
    return 0.5 * (I2 + b[0] * X + b[1] * Y + b[2] * Z)


def density_to_bloch(rho) -> np.ndarray:
    """Inverse of :func:`bloch_to_density`, after checking the density-matrix invariants."""
    rho = np.asarray(rho, dtype=complex)
    if rho.shape != (2, 2):
        raise NonPhysicalState(f"density matrix must be 2x2, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > STATE_TOL:
        raise NonPhysicalState("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > STATE_TOL:
        raise NonPhysicalState(f"density matrix trace {np.trace(rho).real:.17g} != 1")
    if np.linalg.eigvalsh(rho).min() < -STATE_TOL:
        raise NonPhysicalState("density matrix has a negative eigenvalue")
    # Tr[rho X] etc. written out for the 2x2 case
    return np.array([2 * rho[0, 1].real, -2 * rho[0, 1].imag, (rho[0, 0] - rho[1, 1]).real]) + 0.0


@dataclass(frozen=True, eq=False)
class QubitState:
    """A single-qubit state held by its Bloch vector."""

    bloch: np.ndarray

    def __post_init__(self):
        b = _frozen(self.bloch)
        if b.shape != (3,) or not np.all(np.isfinite(b)):
            raise NonPhysicalState(f"Bloch vector must be 3 finite reals, got {self.bloch!r}")
        if np.linalg.norm(b) > 1 + STATE_TOL:
            raise NonPhysicalState(f"Bloch vector norm {np.linalg.norm(b):.17g} exceeds 1")
        object.__setattr__(self, "bloch", b)

    @classmethod
    def from_density(cls, rho) -> "QubitState":
        return cls(density_to_bloch(rho))

    @cached_property
    def density(self) -> np.ndarray:
        rho = bloch_to_density(self.bloch)
        rho.setflags(write=False)
        return rho

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.bloch))

    def is_pure(self, tol: float = 1e-10) -> bool:
        return 1 - self.norm <= tol

    def __eq__(self, other):
        if not isinstance(other, QubitState):
            return NotImplemented
        return bool(np.array_equal(self.bloch, other.bloch))

    def __hash__(self):
        return hash(self.bloch.tobytes())

    def __repr__(self):
        x, y, z = self.bloch
        return f"QubitState(bloch=[{x:.6g}, {y:.6g}, {z:.6g}])"


def as_state(s) -> QubitState:
    """Coerce a QubitState, a Bloch 3-vector or a 2x2 density matrix into a QubitState."""
    if isinstance(s, QubitState):
        return s
    a = np.asarray(s)
    if a.shape == (2, 2):
        return QubitState.from_density(a)
    return QubitState(a)


def hs_inner(a, b) -> float:
    """Hilbert-Schmidt inner product ``Tr[rho_a rho_b] = (1 + r_a.r_b) / 2``."""
    a, b = as_state(a), as_state(b)
    return 0.5 * (1.0 + float(a.bloch @ b.bloch))


def trace_norm_diff(a, b, t: float) -> float:
    """``||a - t b||_tr`` for 2x2 density matrices, from trace and determinant.

    For a Hermitian 2x2 matrix with trace ``tr`` and determinant ``det`` the
    eigenvalues are ``(tr +- sqrt(tr^2 - 4 det)) / 2``; the trace norm is
    ``|tr|`` when they share a sign and ``sqrt(tr^2 - 4 det)`` otherwise.
    """
    if t < 0:
        raise ValueError("t must be nonnegative")
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    m = a - t * b
    tr = (m[0, 0] + m[1, 1]).real
    det = (m[0, 0] * m[1, 1] - m[0, 1] * m[1, 0]).real
    disc = np.sqrt(max(tr * tr - 4.0 * det, 0.0))
    return float(max(abs(tr), disc))


def check_rotation(r, tol: float = STATE_TOL) -> np.ndarray:
    """Return ``r`` as a float array after checking it is a proper 3x3 rotation."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3, 3):
        raise NotARotation(f"expected a 3x3 matrix, got shape {r.shape}")
    if np.abs(r.T @ r - np.eye(3)).max() > tol:
        raise NotARotation("matrix is not orthogonal")
    if abs(np.linalg.det(r) - 1.0) > tol:
        raise NotARotation("determinant is not +1")
    return r


def su2_from_so3(r) -> np.ndarray:
    """Lift a Bloch-space rotation to a 2x2 unitary ``u`` with ``u (b.sigma) u^dag = (r b).sigma``.

    ``u = cos(phi/2) I - i sin(phi/2) n.sigma`` for the axis ``n`` and angle
    ``phi`` in ``[0, pi]``. The four half-angle components are read off the
    matrix entries, starting from the largest one so no step divides by a
    small number (arccos of the trace is ill-conditioned near ``phi = pi``).
    The overall sign of ``u`` is irrelevant under conjugation.
    """
    r = check_rotation(r, tol=1e-10)
    diag = np.array([
        1.0 + r[0, 0] + r[1, 1] + r[2, 2],
        1.0 + r[0, 0] - r[1, 1] - r[2, 2],
        1.0 - r[0, 0] + r[1, 1] - r[2, 2],
        1.0 - r[0, 0] - r[1, 1] + r[2, 2],
    ])
    k = int(np.argmax(diag))
    big = 0.5 * np.sqrt(diag[k])
    f = 0.25 / big
    if k == 0:
        q = [big, (r[2, 1] - r[1, 2]) * f, (r[0, 2] - r[2, 0]) * f, (r[1, 0] - r[0, 1]) * f]
    elif k == 1:
        q = [(r[2, 1] - r[1, 2]) * f, big, (r[0, 1] + r[1, 0]) * f, (r[0, 2] + r[2, 0]) * f]
    elif k == 2:
        q = [(r[0, 2] - r[2, 0]) * f, (r[0, 1] + r[1, 0]) * f, big, (r[1, 2] + r[2, 1]) * f]
    else:
        q = [(r[1, 0] - r[0, 1]) * f, (r[0, 2] + r[2, 0]) * f, (r[1, 2] + r[2, 1]) * f, big]
    q = np.array(q) / np.linalg.norm(q)
    if q[0] < 0:
        q = -q
    w, x, y, z = q
    return w * I2 - 1j * (x * X + y * Y + z * Z)


def so3_from_su2(u) -> np.ndarray:
    """Bloch-space action of a 2x2 unitary: ``r[j, k] = Tr[sigma_j u sigma_k u^dag] / 2``."""
    u = np.asarray(u, dtype=complex)
    return np.array([[0.5 * np.trace(sj @ u @ sk @ u.conj().T).real for sk in PAULIS] for sj in PAULIS])


@dataclass(frozen=True)
class TrackingProblem:
    """Two sources, two targets and the prior of the first source."""

    rho1: QubitState
    rho2: QubitState
    target1: QubitState
    target2: QubitState
    pi1: float

    def __post_init__(self):
        for name in ("rho1", "rho2", "target1", "target2"):
            object.__setattr__(self, name, as_state(getattr(self, name)))
        object.__setattr__(self, "pi1", float(self.pi1))

    @property
    def pi2(self) -> float:
        return 1.0 - self.pi1

    @property
    def sources(self) -> tuple[QubitState, QubitState]:
        return self.rho1, self.rho2

    @property
    def targets(self) -> tuple[QubitState, QubitState]:
        return self.target1, self.target2

    @property
    def priors(self) -> tuple[float, float]:
        return self.pi1, self.pi2

    def figure_of_merit(self, channel) -> float:
        """Prior-weighted Hilbert-Schmidt overlap achieved by ``channel`` (any object with ``apply``)."""
        return sum(
            p * hs_inner(channel.apply(s), t)
            for p, s, t in zip(self.priors, self.sources, self.targets)
        )


class ValidatedProblem(TrackingProblem):
    """A :class:`TrackingProblem` that has passed :func:`validate_problem`."""


def validate_problem(p: TrackingProblem) -> ValidatedProblem:
    if isinstance(p, ValidatedProblem):
        return p
    if not np.isfinite(p.pi1) or not 0.0 < p.pi1 < 1.0:
        raise InvalidPrior(f"pi1 must lie in (0, 1), got {p.pi1!r}")
    if np.linalg.norm(p.rho1.bloch - p.rho2.bloch) <= DISTINCT_TOL:
        raise IdenticalSources("source states coincide (Bloch distance <= 1e-10)")
    if p.target1.norm <= STATE_TOL and p.target2.norm <= STATE_TOL:
        raise BothTargetsMaximallyMixed(
            "both targets are I/2; the completely depolarizing channel is trivially optimal"
        )
    return ValidatedProblem(p.rho1, p.rho2, p.target1, p.target2, p.pi1)
