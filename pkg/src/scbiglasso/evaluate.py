"""Support-recovery metrics, regularization sweeps and BIC scoring."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, replace
from typing import Callable, Literal, Optional, Sequence, Union

import numpy as np

from .covariance import CovPair
from .errors import DimensionError, ScbiglassoError
from .linalg import KsModel, ks_logdet
from .solver import SolverConfig, fit

BinarizeMode = Literal["any_nonzero", "negative_only"]


@dataclass(frozen=True)
class Adjacency:
    """Undirected graph stored as the strict upper triangle, row-major."""

    dim: int
    edges: np.ndarray

    def __post_init__(self):
        if self.edges.shape != (self.dim * (self.dim - 1) // 2,):
            raise DimensionError("edge vector length does not match dim")

    @classmethod
    def from_matrix(cls, a) -> "Adjacency":
        a = np.asarray(a, dtype=bool)
        a = a | a.T
        return cls(a.shape[0], a[np.triu_indices(a.shape[0], k=1)])

    def matrix(self) -> np.ndarray:
        out = np.zeros((self.dim, self.dim), dtype=bool)
        out[np.triu_indices(self.dim, k=1)] = self.edges
        return out | out.T

    @property
    def n_edges(self) -> int:
        return int(self.edges.sum())


def binarize(m, zero_threshold: float = 0.0, mode: BinarizeMode = "any_nonzero") -> Adjacency:
    m = np.asarray(m, dtype=float)
    upper = m[np.triu_indices(m.shape[0], k=1)]
    if mode == "any_nonzero":
        edges = np.abs(upper) > zero_threshold
    elif mode == "negative_only":
        edges = upper < -zero_threshold
    else:
        raise ValueError(f"unknown binarize mode {mode!r}")
    return Adjacency(m.shape[0], edges)


@dataclass(frozen=True)
class RecoveryReport:
    """Confusion counts over unordered off-diagonal pairs.

    Empty denominators follow fixed conventions: precision is 1 when nothing
    is predicted, recall/TPR is 1 when the truth has no edges, FPR is 0 when
    the truth has no non-edges.
    """

    tp: int
    tn: int
    fp: int
    fn: int
    precision: float
    recall: float
    accuracy: float
    tpr: float
    fpr: float
    side: str = "psi"

    def to_dict(self) -> dict:
        return asdict(self)


def recovery_metrics(est: Adjacency, truth: Adjacency, side: str = "psi") -> RecoveryReport:
    if est.dim != truth.dim:
        raise DimensionError(f"estimate has dim {est.dim}, truth has dim {truth.dim}")
    e, t = est.edges, truth.edges
    tp = int(np.sum(e & t))
    tn = int(np.sum(~e & ~t))
    fp = int(np.sum(e & ~t))
    fn = int(np.sum(~e & t))
    total = tp + tn + fp + fn
    precision = tp / (tp + fp) if tp + fp else 1.0
    recall = tp / (tp + fn) if tp + fn else 1.0
    accuracy = (tp + tn) / total if total else 1.0
    fpr = fp / (tn + fp) if tn + fp else 0.0
    return RecoveryReport(tp, tn, fp, fn, precision, recall, accuracy, recall, fpr, side)


def log_likelihood(model: KsModel, cov: CovPair) -> float:
    """-p tr(psi T) - n tr(theta S) + log|psi (+) theta|, constants dropped."""
    lam1, lam2 = model.eigenvalues()
    return float(-model.p * np.sum(model.psi * cov.t_hat)
                 - model.n * np.sum(model.theta * cov.s_hat)
                 + ks_logdet(lam1, lam2))


def _offdiag_nonzeros(a: np.ndarray, zero_threshold: float) -> int:
    return int(np.sum(np.abs(a[np.triu_indices(a.shape[0], k=1)]) > zero_threshold))


def bic(model: KsModel, cov: CovPair, n_samples_effective: Union[int, tuple[int, int]],
        zero_threshold: float = 0.0) -> tuple[float, float]:
    """Per-side BIC, -2 loglik + k log N_eff, with k the nonzero upper off-diagonals.

    Both sides share the joint log-likelihood; only the parameter count and
    N_eff are side specific.  Pass an int to use one N_eff for both sides.
    """
    if isinstance(n_samples_effective, tuple):
        n_psi, n_theta = n_samples_effective
    else:
        n_psi = n_theta = n_samples_effective
    ll = log_likelihood(model, cov)
    k_psi = _offdiag_nonzeros(model.psi, zero_threshold)
    k_theta = _offdiag_nonzeros(model.theta, zero_threshold)
    return -2.0 * ll + k_psi * math.log(n_psi), -2.0 * ll + k_theta * math.log(n_theta)


def parse_grid(text: str) -> list[float]:
    """Parse ``start:step:stop`` (stop included within half a step) or a comma list."""
    text = text.strip()
    if ":" not in text:
        return [float(v) for v in text.split(",") if v.strip()]
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"grid {text!r} is not start:step:stop")
    start, step, stop = (float(v) for v in parts)
    if step <= 0:
        raise ValueError("grid step must be positive")
    if stop < start - 0.5 * step:
        raise ValueError(f"grid stop {stop} lies below start {start}")
    count = int(math.floor((stop - start) / step + 0.5)) + 1
    # rounding keeps values such as 0.007 free of accumulated float noise
    return [round(start + k * step, 12) for k in range(count)]


@dataclass
class SweepRow:
    beta1: float
    beta2: float
    iterations: int = 0
    converged: bool = False
    objective: float = float("nan")
    bic_psi: float = float("nan")
    bic_theta: float = float("nan")
    psi: Optional[RecoveryReport] = None
    theta: Optional[RecoveryReport] = None
    warm_started: bool = False
    error: str = ""
    model: Optional[KsModel] = None

    def to_record(self) -> dict:
        rec = {
            "beta1": self.beta1, "beta2": self.beta2, "iterations": self.iterations,
            "converged": self.converged, "objective": self.objective,
            "bic_psi": self.bic_psi, "bic_theta": self.bic_theta,
            "warm_started": self.warm_started, "error": self.error,
        }
        for side, rep in (("psi", self.psi), ("theta", self.theta)):
            for key in ("tp", "tn", "fp", "fn", "precision", "recall", "accuracy", "tpr", "fpr"):
                rec[f"{side}_{key}"] = getattr(rep, key) if rep is not None else ""
        return rec


def beta_sweep(data_cov_provider: Union[CovPair, Callable[[], CovPair]],
               beta1_grid: Sequence[float], beta2_grid: Sequence[float],
               cfg: Optional[SolverConfig] = None, truth: Optional[KsModel] = None,
               warm_start: bool = False, mode: BinarizeMode = "any_nonzero",
               n_eff: Optional[tuple[int, int]] = None, keep_models: bool = False) -> list[SweepRow]:
    """Fit every (beta1, beta2) grid point in grid-major order.

    A failing fit is recorded in its row's ``error`` field and the sweep
    carries on.  Metrics are filled in only when ``truth`` is given.
    """
    if not len(beta1_grid) or not len(beta2_grid):
        raise ValueError("beta grids must be nonempty")
    cfg = cfg or SolverConfig()
    cov = data_cov_provider() if callable(data_cov_provider) else data_cov_provider
    if n_eff is None:
        n_eff = (cov.n, cov.p)
    if truth is not None:
        true_psi = binarize(truth.psi, 0.0, "any_nonzero")
        true_theta = binarize(truth.theta, 0.0, "any_nonzero")
    rows: list[SweepRow] = []
    previous: Optional[KsModel] = None
    for b1 in beta1_grid:
        for b2 in beta2_grid:
            row = SweepRow(float(b1), float(b2))
            row.warm_started = warm_start and previous is not None
            try:
                res = fit(cov, replace(cfg, beta1=float(b1), beta2=float(b2)),
                          previous if row.warm_started else None)
            except (ScbiglassoError, ArithmeticError, ValueError) as exc:
                row.error = f"{type(exc).__name__}: {exc}"
                rows.append(row)
                continue
            row.iterations, row.converged, row.objective = res.iterations_run, res.converged, res.objective
            row.bic_psi, row.bic_theta = bic(res.model, cov, n_eff, cfg.zero_threshold)
            if truth is not None:
                row.psi = recovery_metrics(binarize(res.model.psi, cfg.zero_threshold, mode),
                                           true_psi, "psi")
                row.theta = recovery_metrics(binarize(res.model.theta, cfg.zero_threshold, mode),
                                             true_theta, "theta")
            if keep_models:
                row.model = res.model
            previous = res.model
            rows.append(row)
    return rows
