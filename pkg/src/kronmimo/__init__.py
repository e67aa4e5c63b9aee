"""Deterministic equivalents and CLT checks for the mutual information of
Kronecker-correlated MIMO Rayleigh channels."""

from .equivalents import Equivalents, eta, outage, sigma2_by_integration, v_by_integration, v_of_rho
from .errors import (
    InsufficientSamples,
    NoConvergence,
    NumericalFailure,
    RejectNegativeEntry,
    RejectZeroTrace,
)
from .fixed_point import FixedPoint, derived_quantities, solve, solve_path
from .montecarlo import TrialBatch, mutual_information, normality_test, run_batch, sample_channel
from .profile import ValidatedProfile, VarianceProfile, generate, validate
from .resolvent_diag import DiagnosticSeries, empirical_alpha, r_matrices, rate_fit

__version__ = "0.1.0"
