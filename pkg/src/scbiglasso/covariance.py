"""Row- and column-side covariance estimates.

Data matrices are p x n (features along rows, samples along columns).  The
"rows" statistics compare columns across the p rows and produce an n x n
matrix that pairs with psi; the "cols" statistics produce a p x p matrix
that pairs with theta.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.stats import rankdata

from .data import DataStack
from .errors import ConstantVectorWarning, DataFormatError, DimensionError

SINE_SLACK = 1e-12


class CovEstimatorKind(str, Enum):
    EMPIRICAL = "empirical"
    KENDALL = "kendall"
    SPEARMAN = "spearman"

    @property
    def rank_based(self) -> bool:
        return self is not CovEstimatorKind.EMPIRICAL


@dataclass(frozen=True)
class CovPair:
    t_hat: np.ndarray  # n x n, pairs with psi
    s_hat: np.ndarray  # p x p, pairs with theta

    @property
    def n(self) -> int:
        return self.t_hat.shape[0]

    @property
    def p(self) -> int:
        return self.s_hat.shape[0]


def center(y) -> np.ndarray:
    """Subtract the scalar grand mean of a single data matrix."""
    y = np.asarray(y, dtype=float)
    return y - y.mean()


def center_stack(data: DataStack) -> np.ndarray:
    """Remove the empirical mean matrix across replicates.

    A single replicate has no across-replicate mean, so its grand mean is
    subtracted instead.
    """
    reps = data.replicates.astype(float)
    if data.m == 1:
        return reps - reps.mean()
    return reps - reps.mean(axis=0, keepdims=True)


def empirical_cov_pair(y) -> CovPair:
    y = np.asarray(y, dtype=float)
    p, n = y.shape
    return CovPair(t_hat=(y.T @ y) / p, s_hat=(y @ y.T) / n)


def kendall_tau_rows(y) -> np.ndarray:
    """Kendall's tau between every pair of columns, over the p rows.

    Ties contribute sign(0) = 0 (tau-a).  Returns an n x n matrix.
    """
    y = np.asarray(y, dtype=float)
    p, n = y.shape
    if p < 2:
        raise DimensionError(f"row-wise Kendall's tau needs at least 2 rows, got {p}")
    acc = np.zeros((n, n))
    for i in range(p - 1):
        d = np.sign(y[i] - y[i + 1:])
        # entries are integer-valued, so the float accumulation is exact
        acc += d.T @ d
    tau = acc * (2.0 / (p * (p - 1)))
    np.fill_diagonal(tau, 1.0)
    return tau


def kendall_tau_cols(y) -> np.ndarray:
    """Kendall's tau between every pair of rows, over the n columns (p x p)."""
    return kendall_tau_rows(np.asarray(y).T)


def _spearman_between_columns(y: np.ndarray) -> np.ndarray:
    ranks = rankdata(y, method="average", axis=0)
    ranks -= ranks.mean(axis=0, keepdims=True)
    ss = np.einsum("ij,ij->j", ranks, ranks)
    constant = ss == 0.0
    if np.any(constant):
        warnings.warn(
            f"{int(constant.sum())} constant vector(s) in Spearman's rho; "
            f"correlations with them set to 0 (indices {np.flatnonzero(constant).tolist()})",
            ConstantVectorWarning,
            stacklevel=3,
        )
    norm = np.sqrt(np.where(constant, 1.0, ss))
    z = ranks / norm
    rho = z.T @ z
    rho[constant, :] = 0.0
    rho[:, constant] = 0.0
    rho = 0.5 * (rho + rho.T)
    np.clip(rho, -1.0, 1.0, out=rho)
    np.fill_diagonal(rho, 1.0)
    return rho


def spearman_rho_rows(y) -> np.ndarray:
    """Spearman's rho between every pair of columns, using mid-ranks down each column."""
    y = np.asarray(y, dtype=float)
    if y.shape[0] < 2:
        raise DimensionError(f"row-wise Spearman's rho needs at least 2 rows, got {y.shape[0]}")
    return _spearman_between_columns(y)


def spearman_rho_cols(y) -> np.ndarray:
    y = np.asarray(y, dtype=float)
    if y.shape[1] < 2:
        raise DimensionError(f"column-wise Spearman's rho needs at least 2 columns, got {y.shape[1]}")
    return _spearman_between_columns(y.T)


def sine_transform(r, kind) -> np.ndarray:
    """Map a rank-correlation matrix to a latent Gaussian correlation estimate."""
    kind = CovEstimatorKind(kind)
    r = np.asarray(r, dtype=float)
    if not kind.rank_based:
        raise ValueError("the sine transform applies to kendall or spearman only")
    if np.any(np.abs(r) > 1.0 + SINE_SLACK):
        raise ValueError(f"rank correlation outside [-1, 1]: max |r| = {np.max(np.abs(r))!r}")
    r = np.clip(r, -1.0, 1.0)
    if kind is CovEstimatorKind.KENDALL:
        out = np.sin(0.5 * np.pi * r)
    else:
        out = 2.0 * np.sin(np.pi / 6.0 * r)
    np.fill_diagonal(out, 1.0)
    return out


def _single_pair(y: np.ndarray, kind: CovEstimatorKind) -> CovPair:
    if kind is CovEstimatorKind.EMPIRICAL:
        return empirical_cov_pair(y)
    if kind is CovEstimatorKind.KENDALL:
        rows, cols = kendall_tau_rows(y), kendall_tau_cols(y)
    else:
        rows, cols = spearman_rho_rows(y), spearman_rho_cols(y)
    return CovPair(sine_transform(rows, kind), sine_transform(cols, kind))


def estimate_cov_pair(data: DataStack, kind="empirical") -> CovPair:
    """Per-replicate estimates averaged over the stack.

    The empirical estimator works on centered data; rank statistics are
    shift invariant and see the raw values.
    """
    kind = CovEstimatorKind(kind)
    if not isinstance(data, DataStack):
        raise DataFormatError("estimate_cov_pair expects a DataStack")
    reps = center_stack(data) if kind is CovEstimatorKind.EMPIRICAL else data.replicates
    t_sum = np.zeros((data.n, data.n))
    s_sum = np.zeros((data.p, data.p))
    for y in reps:
        pair = _single_pair(np.asarray(y, dtype=float), kind)
        t_sum += pair.t_hat
        s_sum += pair.s_hat
    t_hat, s_hat = t_sum / data.m, s_sum / data.m
    return CovPair(0.5 * (t_hat + t_hat.T), 0.5 * (s_hat + s_hat.T))
