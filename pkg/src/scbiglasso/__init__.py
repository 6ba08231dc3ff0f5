"""Scalable Bigraphical Lasso: sparse row and column precision matrices under a Kronecker-sum model."""

__version__ = "0.1.0"

from .covariance import CovEstimatorKind, CovPair, estimate_cov_pair
from .data import DataStack
from .evaluate import Adjacency, RecoveryReport, beta_sweep, bic, binarize, recovery_metrics
from .linalg import EigenDecomposition, KsModel, ks_logdet, sym_eigen
from .nonparanormal import NpnFitRequest, npn_fit
from .simulate import CountParams, SimSpec, simulate
from .solver import FitResult, SolverConfig, fit, objective_value

__all__ = [
    "Adjacency", "CountParams", "CovEstimatorKind", "CovPair", "DataStack", "EigenDecomposition",
    "FitResult", "KsModel", "NpnFitRequest", "RecoveryReport", "SimSpec", "SolverConfig",
    "beta_sweep", "bic", "binarize", "estimate_cov_pair", "fit", "ks_logdet", "npn_fit",
    "objective_value", "recovery_metrics", "simulate", "sym_eigen",
]
