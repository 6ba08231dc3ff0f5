"""Rank-based fit for count or other ordinal data.

The marginal transforms are never estimated: Kendall's tau or Spearman's
rho, mapped through the sine transform, stand in for the latent Gaussian
covariances and are handed to the Gaussian solver unchanged.
"""
from __future__ import annotations

from dataclasses import dataclass, field

from .covariance import CovEstimatorKind, estimate_cov_pair
from .data import DataStack
from .errors import DimensionError
from .linalg import KsModel
from .solver import FitResult, SolverConfig, fit


@dataclass(frozen=True)
class NpnFitRequest:
    data: DataStack
    estimator: CovEstimatorKind = CovEstimatorKind.KENDALL
    solver_cfg: SolverConfig = field(default_factory=SolverConfig)
    init: KsModel | None = None

    def __post_init__(self):
        kind = CovEstimatorKind(self.estimator)
        if not kind.rank_based:
            raise ValueError("the nonparanormal fit needs a rank-based estimator (kendall or spearman)")
        object.__setattr__(self, "estimator", kind)


def npn_fit(req: NpnFitRequest) -> FitResult:
    if req.data.p < 2 or req.data.n < 2:
        raise DimensionError(f"need p, n >= 2, got p={req.data.p}, n={req.data.n}")
    cov = estimate_cov_pair(req.data, req.estimator)
    return fit(cov, req.solver_cfg, req.init)
