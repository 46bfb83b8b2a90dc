"""Estimator-style wrapper: learn the optimal channel from labelled source states."""
from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_array, check_is_fitted, column_or_1d

from .applications import aggregate_sources
from .bloch import STATE_TOL
from .certificate import certify
from .channel import choi_of_solution
from .exceptions import (
    EmptyGroup,
    InternalInconsistency,
    MalformedInput,
    NonPhysicalState,
    WeightsNotNormalized,
)
from .geometry import summarize
from .tracker import solve


def _check_bloch_rows(X) -> np.ndarray:
    X = check_array(X, dtype=np.float64)
    if X.shape[1] != 3:
        raise MalformedInput(f"expected Bloch vectors with 3 columns, got {X.shape[1]}")
    norms = np.linalg.norm(X, axis=1)
    if np.any(norms > 1.0 + STATE_TOL):
        raise NonPhysicalState(f"row {int(np.argmax(norms))} has Bloch norm {norms.max():.17g} > 1")
    return X


class OptimalTracker(TransformerMixin, BaseEstimator):
    """Optimal qubit channel sending group-0 states towards ``targets[0]`` and group-1 states towards ``targets[1]``.

    Parameters
    ----------
    targets : array of shape (2, 3)
        Bloch vectors of the two target states.
    certify : bool, default True
        Build and check the dual certificate during ``fit``.

    Attributes
    ----------
    solution_ : TrackingSolution
    channel_ : QuantumChannel
    certificate_ : DualCertificate or None
    geometry_ : GeometrySummary
    fidelity_ : float
        Optimal value of the weighted figure of merit on the training data.
    """

    def __init__(self, targets=None, certify=True):
        self.targets = targets
        self.certify = certify

    def fit(self, X, y, sample_weight=None):
        """``X`` holds source Bloch vectors, ``y`` labels in {0, 1}, ``sample_weight`` the weights ``q_j``.

        Weights are rescaled to sum to one.
        """
        X = _check_bloch_rows(X)
        y = column_or_1d(y, warn=True)
        if y.shape[0] != X.shape[0]:
            raise MalformedInput(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
        if not np.all(np.isin(y, (0, 1))):
            raise MalformedInput("labels must be 0 or 1")
        if self.targets is None:
            raise MalformedInput("targets must be given")
        targets = _check_bloch_rows(self.targets)
        if targets.shape[0] != 2:
            raise MalformedInput(f"expected 2 targets, got {targets.shape[0]}")

        w = np.ones(X.shape[0]) if sample_weight is None else column_or_1d(sample_weight).astype(float)
        if w.shape[0] != X.shape[0]:
            raise WeightsNotNormalized("sample_weight length does not match X")
        if np.any(~np.isfinite(w)) or np.any(w <= 0):
            raise WeightsNotNormalized("sample weights must be positive")
        w = w / w.sum()

        groups = [[(X[j], w[j]) for j in np.flatnonzero(y == k)] for k in (0, 1)]
        if not groups[0] or not groups[1]:
            raise EmptyGroup("both labels must occur in y")
        # renormalization above leaves the sum within a few ulps of 1
        problem = aggregate_sources(groups, targets)

        self.solution_ = solve(problem)
        self.geometry_ = summarize(problem)
        self.channel_ = choi_of_solution(self.solution_)
        self.fidelity_ = self.solution_.fidelity
        self.certificate_ = None
        if self.certify:
            cert = certify(self.solution_)
            if not cert.valid:
                raise InternalInconsistency(f"dual certificate failed: {cert.to_dict()}")
            self.certificate_ = cert
        self.n_features_in_ = 3
        return self

    def transform(self, X):
        """Bloch vectors of the channel outputs."""
        check_is_fitted(self, "channel_")
        X = _check_bloch_rows(X)
        return self.channel_.apply_bloch(X)

    def score(self, X, y, sample_weight=None):
        """Weighted mean of ``Tr[C(tau_j) rhobar_{y_j}]``."""
        check_is_fitted(self, "channel_")
        X = _check_bloch_rows(X)
        y = column_or_1d(y).astype(int)
        w = np.ones(X.shape[0]) if sample_weight is None else column_or_1d(sample_weight).astype(float)
        t = _check_bloch_rows(self.targets)[y]
        out = self.channel_.apply_bloch(X)
        return float(np.sum(w * 0.5 * (1.0 + np.einsum("ij,ij->i", out, t))) / w.sum())
