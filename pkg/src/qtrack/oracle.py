"""Brute-force lower bounds on the optimal figure of merit.

Two independent searches, neither of which uses the closed-form solution:

* random CPTP maps from Haar-random Stinespring isometries (environment of
  dimension 4, enough to reach every qubit channel);
* coordinate-wise golden-section ascent over extremal maps
  ``r -> U (diag(mu2 mu3, mu2, mu3) V r + s1 x)`` from several random starts.

Randomness comes from numpy's PCG64 generator. A root ``SeedSequence`` built
from ``OracleConfig.seed`` is split into one child stream per sampling chunk
and one for the climber, so results depend only on the seed and sizes.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .bloch import TrackingProblem, validate_problem
from .channel import QuantumChannel
from .tracker import solve

CHUNK = 10_000
GOLDEN = (np.sqrt(5.0) - 1.0) / 2.0
_PAULI = np.array([[[0, 1], [1, 0]], [[0, -1j], [1j, 0]], [[1, 0], [0, -1]]])
_ID = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class OracleConfig:
    seed: int = 20240601
    n_samples: int = 1000
    n_climb_iters: int = 60
    climb_step: float = np.pi
    restarts: int = 20
    line_evals: int = 30

    def __post_init__(self):
        if self.n_samples < 1:
            raise ValueError("n_samples must be at least 1")
        if self.restarts < 1 or self.n_climb_iters < 0:
            raise ValueError("restarts must be positive and n_climb_iters non-negative")


@dataclass(frozen=True, eq=False)
class OracleResult:
    best_value: float
    best_channel: QuantumChannel = field(repr=False)
    gap: float
    sample_best: float
    climb_best: float
    climb_values: np.ndarray = field(repr=False)
    closed_form: float

    def to_dict(self) -> dict:
        return {
            "best_value": self.best_value,
            "closed_form": self.closed_form,
            "gap": self.gap,
            "sample_best": self.sample_best,
            "climb_best": self.climb_best,
            "climb_values": np.sort(self.climb_values)[::-1].tolist(),
            "best_channel": self.best_channel.to_dict(),
        }


def _rng(stream) -> np.random.Generator:
    if isinstance(stream, np.random.Generator):
        return stream
    return np.random.Generator(np.random.PCG64(stream))


def random_isometries(rng, n: int) -> np.ndarray:
    """``n`` Haar-random isometries C^2 -> C^2 (x) C^4 as an ``(n, 8, 2)`` array."""
    g = rng.standard_normal((n, 8, 2)) + 1j * rng.standard_normal((n, 8, 2))
    q, r = np.linalg.qr(g)
    # fix the phase freedom of QR so the distribution is exactly Haar
    d = np.diagonal(r, axis1=1, axis2=2)
    return q * (d / np.abs(d))[:, None, :]


def affine_from_isometries(W: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Bloch-affine forms ``(M, c)`` of the channels ``rho -> Tr_E[W rho W^dag]``."""
    # W[out * 4 + e, in] -> A[n, out, e, in]
    A = W.reshape(-1, 2, 4, 2)
    basis = np.concatenate([_ID[None], _PAULI])
    # images of I, X, Y, Z
    img = np.einsum("noei,kij,npej->nkop", A, basis, A.conj())
    w = 0.5 * np.einsum("jpo,nkop->njk", _PAULI, img).real
    return w[:, :, 1:], w[:, :, 0]


def kraus_from_isometry(W: np.ndarray) -> list[np.ndarray]:
    A = np.asarray(W).reshape(2, 4, 2)
    return [A[:, e, :] for e in range(4)]


def random_cptp(stream=None) -> QuantumChannel:
    """One Haar-style random qubit channel; ``stream`` is a Generator or a seed."""
    W = random_isometries(_rng(stream), 1)[0]
    return QuantumChannel.from_kraus(kraus_from_isometry(W))


def merit_affine(p: TrackingProblem, M: np.ndarray, c: np.ndarray) -> np.ndarray:
    """Figure of merit of a batch of affine maps ``(n, 3, 3), (n, 3)``."""
    out = np.zeros(M.shape[0])
    for pi, s, t in zip(p.priors, p.sources, p.targets):
        img = M @ s.bloch + c
        out += pi * 0.5 * (1.0 + img @ t.bloch)
    return out


def sample_best(p: TrackingProblem, n_samples: int, streams) -> tuple[float, np.ndarray]:
    """Best value over random channels, drawn in chunks from the given child seeds."""
    best, best_W = -np.inf, None
    left = n_samples
    for ss in streams:
        if left <= 0:
            break
        n = min(CHUNK, left)
        left -= n
        W = random_isometries(_rng(ss), n)
        vals = merit_affine(p, *affine_from_isometries(W))
        k = int(np.argmax(vals))
        if vals[k] > best:
            best, best_W = float(vals[k]), W[k]
    return best, best_W


# -- hill climbing over the extremal family ----------------------------------


def _axis_rotation(axis: int, angle: np.ndarray) -> np.ndarray:
    """Batch of rotations by ``angle`` about coordinate axis ``axis``."""
    c, s = np.cos(angle), np.sin(angle)
    i, j = [(1, 2), (2, 0), (0, 1)][axis]
    R = np.zeros(np.shape(angle) + (3, 3))
    R[..., axis, axis] = 1.0
    R[..., i, i] = c
    R[..., j, j] = c
    R[..., i, j] = -s
    R[..., j, i] = s
    return R


def _haar_rotations(rng, n: int) -> np.ndarray:
    q = rng.standard_normal((n, 4))
    q /= np.linalg.norm(q, axis=1, keepdims=True)
    w, x, y, z = q.T
    return np.stack([
        np.stack([1 - 2 * (y * y + z * z), 2 * (x * y - w * z), 2 * (x * z + w * y)], -1),
        np.stack([2 * (x * y + w * z), 1 - 2 * (x * x + z * z), 2 * (y * z - w * x)], -1),
        np.stack([2 * (x * z - w * y), 2 * (y * z + w * x), 1 - 2 * (x * x + y * y)], -1),
    ], -2)


def extremal_affine(V, U, a, b) -> tuple[np.ndarray, np.ndarray]:
    """Batch affine maps for ``mu2 = sin a``, ``mu3 = sin b``, ``mu1 = mu2 mu3``."""
    mu2, mu3 = np.sin(a), np.sin(b)
    s1 = np.abs(np.cos(a) * np.cos(b))
    D = np.zeros(np.shape(a) + (3, 3))
    D[..., 0, 0] = mu2 * mu3
    D[..., 1, 1] = mu2
    D[..., 2, 2] = mu3
    shift = np.zeros(np.shape(a) + (3,))
    shift[..., 0] = s1
    return U @ D @ V, np.einsum("...ij,...j->...i", U, shift)


class _Climber:
    """State of ``r`` simultaneous coordinate-ascent runs.

    Coordinates 0-2 rotate ``V`` about the x, y, z axes (applied on the left),
    3-5 rotate ``U`` (applied on the right), 6 and 7 shift ``a`` and ``b``.
    Rotations are always taken relative to the current point, so the angle
    coordinates never hit a singularity. Each run keeps one bracket
    half-width per coordinate, reset after every line search to a few times
    the step just taken; fixed shrink schedules stall on the flat ridges that
    appear when ``mu2, mu3`` are small.
    """

    def __init__(self, p, rng, restarts, step):
        self.p = p
        self.V = _haar_rotations(rng, restarts)
        self.U = _haar_rotations(rng, restarts)
        self.a = rng.uniform(-np.pi, np.pi, restarts)
        self.b = rng.uniform(-np.pi, np.pi, restarts)
        self.h = np.full((restarts, 8), float(step))
        self.value = self._eval(self.V, self.U, self.a, self.b)

    def _eval(self, V, U, a, b):
        return merit_affine(self.p, *extremal_affine(V, U, a, b))

    def _moved(self, k, t):
        V, U, a, b = self.V, self.U, self.a, self.b
        if k < 3:
            V = _axis_rotation(k, t) @ V
        elif k < 6:
            U = U @ _axis_rotation(k - 3, t)
        elif k == 6:
            a = a + t
        else:
            b = b + t
        return V, U, a, b

    def line_search(self, k, n_evals):
        """Golden-section search for the offset of coordinate ``k`` in ``[-h, h]``; keep only improvements."""
        f = lambda t: self._eval(*self._moved(k, t))
        h = self.h[:, k]
        lo, hi = -h, h.copy()
        x1 = hi - GOLDEN * (hi - lo)
        x2 = lo + GOLDEN * (hi - lo)
        f1, f2 = f(x1), f(x2)
        for _ in range(n_evals):
            left = f1 >= f2
            hi = np.where(left, x2, hi)
            lo = np.where(left, lo, x1)
            new = np.where(left, hi - GOLDEN * (hi - lo), lo + GOLDEN * (hi - lo))
            fn = f(new)
            x1, x2, f1, f2 = (
                np.where(left, new, x2),
                np.where(left, x1, new),
                np.where(left, fn, f2),
                np.where(left, f1, fn),
            )
        t = np.where(f1 >= f2, x1, x2)
        fbest = np.maximum(f1, f2)
        better = fbest > self.value
        t = np.where(better, t, 0.0)
        self.V, self.U, self.a, self.b = self._moved(k, t)
        self.value = np.where(better, fbest, self.value)
        self.h[:, k] = np.clip(2.5 * np.abs(t), 1e-9, np.pi)

    def sweep(self, n_evals):
        for k in range(8):
            self.line_search(k, n_evals)


def climb(p: TrackingProblem, rng, iters: int, restarts: int = 20, step: float = np.pi, line_evals: int = 30):
    """Run ``restarts`` coordinate ascents of ``iters`` sweeps each."""
    c = _Climber(p, rng, restarts, step)
    for _ in range(iters):
        c.sweep(line_evals)
    return c


def oracle_max(p: TrackingProblem, cfg: OracleConfig = OracleConfig()) -> OracleResult:
    p = validate_problem(p)
    closed = solve(p).fidelity
    root = np.random.SeedSequence(cfg.seed)
    n_chunks = -(-cfg.n_samples // CHUNK)
    children = root.spawn(n_chunks + 1)

    s_best, s_W = sample_best(p, cfg.n_samples, children[:n_chunks])
    c = climb(p, _rng(children[-1]), cfg.n_climb_iters, cfg.restarts, cfg.climb_step, cfg.line_evals)
    k = int(np.argmax(c.value))
    c_best = float(c.value[k])

    if c_best >= s_best:
        M, t = extremal_affine(c.V[k], c.U[k], c.a[k], c.b[k])
        ch = QuantumChannel.from_affine(M, t)
        best = c_best
    else:
        ch = QuantumChannel.from_kraus(kraus_from_isometry(s_W))
        best = s_best
    return OracleResult(best, ch, closed - best, s_best, c_best, np.asarray(c.value), closed)
