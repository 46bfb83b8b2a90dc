"""Qubit channels as Choi matrix, Kraus operators and Bloch-affine map.

Conventions
-----------
The Choi matrix is *unnormalized*: ``K = (I (x) C)(|Psi+><Psi+|)`` with
``|Psi+> = |00> + |11>``, so ``Tr K = 2``. The first tensor factor (A) is the
channel input and the second (B) the output, so trace preservation reads
``Tr_B K = I`` and ``C(rho) = Tr_A[(rho^T (x) I) K]``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .bloch import I2, PAULIS, X, Y, Z, QubitState, as_state, su2_from_so3
from .exceptions import InternalInconsistency, OutOfRange
from .tracker import AffineParams, TrackingSolution

PSD_TOL = 1e-10
TP_TOL = 1e-12
CONSISTENCY_TOL = 1e-10

_SIGMA = (I2, X, Y, Z)
# Tr[rho^T sigma_a] = (1, x, -y, z)
_TRANSPOSE_SIGN = np.array([1.0, -1.0, 1.0])
_PROBE_STATES = (
    np.array([0.0, 0.0, 1.0]),
    np.array([0.0, 0.0, -1.0]),
    np.array([1.0, 0.0, 0.0]),
    np.array([0.0, 1.0, 0.0]),
)


def choi_from_affine(M, c) -> np.ndarray:
    M = np.asarray(M, dtype=float)
    c = np.asarray(c, dtype=float)
    K = np.kron(I2, I2).astype(complex)
    for b in range(3):
        K = K + c[b] * np.kron(I2, PAULIS[b])
        for a in range(3):
            K = K + _TRANSPOSE_SIGN[a] * M[b, a] * np.kron(PAULIS[a], PAULIS[b])
    return 0.5 * K


def affine_from_choi(K) -> tuple[np.ndarray, np.ndarray]:
    K = np.asarray(K, dtype=complex)
    w = np.array([[np.trace(K @ np.kron(sa, sb)).real / 2.0 for sb in _SIGMA] for sa in _SIGMA])
    c = w[0, 1:]
    M = (w[1:, 1:] * _TRANSPOSE_SIGN[:, None]).T
    return M, c


def choi_from_kraus(kraus: Sequence[np.ndarray]) -> np.ndarray:
    K = np.zeros((4, 4), dtype=complex)
    for E in kraus:
        # (I (x) E)|Psi+> has component [i, j] = E[j, i]
        v = np.asarray(E, dtype=complex).T.reshape(4)
        K += np.outer(v, v.conj())
    return K


def kraus_from_choi(K, tol: float = PSD_TOL) -> list[np.ndarray]:
    vals, vecs = np.linalg.eigh(np.asarray(K, dtype=complex))
    return [np.sqrt(lam) * vecs[:, k].reshape(2, 2).T for k, lam in enumerate(vals) if lam > tol][::-1]


def partial_trace_output(K) -> np.ndarray:
    """``Tr_B K``: trace over the output (second) qubit."""
    return np.einsum("ajbj->ab", np.asarray(K).reshape(2, 2, 2, 2))


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    choi: np.ndarray
    kraus: tuple
    M: np.ndarray
    c: np.ndarray
    # index into ``kraus`` of the branch that carries the conditional Y correction
    feedback_index: Optional[int] = field(default=None)

    @property
    def affine(self) -> tuple[np.ndarray, np.ndarray]:
        return self.M, self.c

    @classmethod
    def from_affine(cls, M, c) -> "QuantumChannel":
        K = choi_from_affine(M, c)
        return cls(K, tuple(kraus_from_choi(K)), np.asarray(M, float), np.asarray(c, float))

    @classmethod
    def from_kraus(cls, kraus, feedback_index=None) -> "QuantumChannel":
        kraus = tuple(np.asarray(E, dtype=complex) for E in kraus)
        K = choi_from_kraus(kraus)
        M, c = affine_from_choi(K)
        return cls(K, kraus, M, c, feedback_index)

    @classmethod
    def from_choi(cls, K) -> "QuantumChannel":
        K = np.asarray(K, dtype=complex)
        M, c = affine_from_choi(K)
        return cls(K, tuple(kraus_from_choi(K)), M, c)

    def apply(self, s) -> QubitState:
        return QubitState(self.apply_bloch(as_state(s).bloch))

    def apply_bloch(self, r) -> np.ndarray:
        """Affine action on a Bloch vector (or an ``(n, 3)`` batch)."""
        r = np.asarray(r, dtype=float)
        out = r @ self.M.T + self.c
        # roundoff can push a pure output a hair outside the ball
        norms = np.linalg.norm(out, axis=-1, keepdims=True)
        return np.where(norms > 1.0, out / np.maximum(norms, 1.0), out)

    def apply_kraus(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return sum(E @ rho @ E.conj().T for E in self.kraus)

    def apply_choi(self, rho) -> np.ndarray:
        rho = np.asarray(rho, dtype=complex)
        return np.einsum("abac->bc", (np.kron(rho.T, I2) @ self.choi).reshape(2, 2, 2, 2))

    def rank(self, tol: float = PSD_TOL) -> int:
        return int((np.linalg.eigvalsh(self.choi) > tol).sum())

    def to_dict(self) -> dict:
        def cplx(m):
            return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]

        return {
            "choi": cplx(self.choi),
            "kraus": [cplx(E) for E in self.kraus],
            "affine": {"M": self.M.tolist(), "c": self.c.tolist()},
            "feedback_index": self.feedback_index,
        }


def identity_channel() -> QuantumChannel:
    return QuantumChannel.from_kraus([I2])


def depolarizing_channel() -> QuantumChannel:
    """Completely depolarizing channel ``rho -> I/2``."""
    return QuantumChannel.from_affine(np.zeros((3, 3)), np.zeros(3))


def dephasing(p: float) -> QuantumChannel:
    """``rho -> p Z rho Z + (1 - p) rho`` for ``p`` in ``(0, 1/2]``."""
    if not 0.0 < p <= 0.5:
        raise OutOfRange(f"dephasing probability must lie in (0, 1/2], got {p!r}")
    return QuantumChannel.from_kraus([np.sqrt(1.0 - p) * I2, np.sqrt(p) * Z])


def _diagonal_choi(d: AffineParams) -> np.ndarray:
    return 0.5 * (
        np.kron(I2, I2)
        + d.s1 * np.kron(I2, X)
        + d.mu1 * np.kron(X, X)
        - d.mu2 * np.kron(Y, Y)
        + d.mu3 * np.kron(Z, Z)
    )


def diagonal_choi(sol: TrackingSolution) -> np.ndarray:
    """Choi matrix of the middle map ``D`` alone (``|Psi+><Psi+|`` for procedure B)."""
    return _diagonal_choi(sol.diagonal_map)


def lifted_unitaries(sol: TrackingSolution) -> tuple[np.ndarray, np.ndarray]:
    return su2_from_so3(sol.V), su2_from_so3(sol.U)


def kraus_of_solution(sol: TrackingSolution) -> list[np.ndarray]:
    """Two-outcome feedback form for procedure A, the single unitary ``U V`` for B."""
    v, u = lifted_unitaries(sol)
    if sol.procedure == "B":
        ops = [u @ v]
    else:
        d = sol.affine
        co2, co3 = d.complements
        chi = np.arctan2(d.mu3, co3)
        eta = np.arctan2(d.mu2, co2)
        plus = 0.5 * np.array([[1, 1], [1, 1]], dtype=complex)
        minus = 0.5 * np.array([[1, -1], [-1, 1]], dtype=complex)
        m1 = np.cos((chi - eta) / 2) * plus + np.sin((chi + eta) / 2) * minus
        m2 = np.sin((chi - eta) / 2) * plus - np.cos((chi + eta) / 2) * minus
        ops = [u @ m1 @ v, u @ Y @ m2 @ v]
    residual = np.abs(sum(E.conj().T @ E for E in ops) - I2).max()
    if residual > TP_TOL:
        raise InternalInconsistency(f"Kraus completeness residual {residual:.3e}")
    return ops


def choi_of_solution(sol: TrackingSolution) -> QuantumChannel:
    """Materialize a solution as a channel carrying all three representations."""
    v, u = lifted_unitaries(sol)
    W = np.kron(v.T, u)
    K = W @ diagonal_choi(sol) @ W.conj().T
    K = 0.5 * (K + K.conj().T)
    M, c = sol.bloch_map()
    ch = QuantumChannel(
        K,
        tuple(kraus_of_solution(sol)),
        M,
        c,
        feedback_index=1 if sol.procedure == "A" else None,
    )
    report = cptp_check(ch)
    if not report["passed"]:
        raise InternalInconsistency(f"solution channel failed CPTP checks: {report}")
    return ch


def channel_of_solution(sol: TrackingSolution) -> QuantumChannel:
    return choi_of_solution(sol)


def apply(ch: QuantumChannel, s) -> QubitState:
    return ch.apply(s)


def cptp_check(ch: QuantumChannel) -> dict:
    """Report on complete positivity, trace preservation and representation consistency."""
    K = np.asarray(ch.choi)
    herm = float(np.abs(K - K.conj().T).max())
    min_eig = float(np.linalg.eigvalsh(0.5 * (K + K.conj().T)).min())
    tp = float(np.abs(partial_trace_output(K) - I2).max())
    completeness = float(np.abs(sum(E.conj().T @ E for E in ch.kraus) - I2).max()) if ch.kraus else float("inf")

    consistency = 0.0
    for r in _PROBE_STATES:
        rho = 0.5 * (I2 + r[0] * X + r[1] * Y + r[2] * Z)
        out_affine = ch.M @ r + ch.c
        rho_affine = 0.5 * (I2 + out_affine[0] * X + out_affine[1] * Y + out_affine[2] * Z)
        consistency = max(
            consistency,
            float(np.abs(ch.apply_choi(rho) - rho_affine).max()),
            float(np.abs(ch.apply_kraus(rho) - rho_affine).max()) if ch.kraus else float("inf"),
        )
    return {
        "min_choi_eigenvalue": min_eig,
        "choi_hermiticity": herm,
        "partial_trace_deviation": tp,
        "kraus_completeness_residual": completeness,
        "representation_mismatch": consistency,
        "passed": bool(
            min_eig >= -PSD_TOL
            and herm <= TP_TOL
            and tp <= TP_TOL
            and completeness <= TP_TOL
            and consistency <= CONSISTENCY_TOL
        ),
    }
