"""Optimal channels for steering a qubit prepared in one of two states towards matching targets."""
from .bloch import QubitState, TrackingProblem, ValidatedProblem, validate_problem
from .certificate import DualCertificate, build_f, certify, char_poly_check, dual_coefficients
from .channel import QuantumChannel, apply, choi_of_solution, cptp_check, dephasing, kraus_of_solution
from .estimator import OptimalTracker
from .exceptions import InternalInconsistency, TrackingError, TrackingInputError
from .feasibility import FeasibilityReport, alberti_uhlmann, perfect_value, pure_target_corollary
from .geometry import GeometrySummary, indicator, summarize
from .oracle import OracleConfig, OracleResult, oracle_max, random_cptp
from .tracker import AffineParams, TrackingSolution, solve

__version__ = "0.1.0"

__all__ = [
    "AffineParams",
    "DualCertificate",
    "FeasibilityReport",
    "GeometrySummary",
    "InternalInconsistency",
    "OptimalTracker",
    "OracleConfig",
    "OracleResult",
    "QuantumChannel",
    "QubitState",
    "TrackingError",
    "TrackingInputError",
    "TrackingProblem",
    "TrackingSolution",
    "ValidatedProblem",
    "alberti_uhlmann",
    "apply",
    "build_f",
    "certify",
    "char_poly_check",
    "choi_of_solution",
    "cptp_check",
    "dephasing",
    "dual_coefficients",
    "indicator",
    "kraus_of_solution",
    "oracle_max",
    "perfect_value",
    "pure_target_corollary",
    "random_cptp",
    "solve",
    "summarize",
    "validate_problem",
]
