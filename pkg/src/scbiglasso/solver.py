"""Scalable Bigraphical Lasso flip-flop solver.

Each column update of psi solves an l1-penalized quadratic program whose
Hessian is assembled from the eigendecompositions of psi and theta alone,
so nothing of size np x np is ever allocated.  The theta pass is the same
code with the roles of (T, psi, p, beta1) and (S, theta, n, beta2) swapped.
"""
from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field

import numba
import numpy as np

from .covariance import CovPair
from .errors import DimensionError, LassoConvergenceWarning, NotPositiveDefiniteError
from .linalg import EigenDecomposition, KsModel, ks_logdet, sym_eigen

log = logging.getLogger(__name__)

MAX_HALVINGS = 20


@dataclass(frozen=True)
class SolverConfig:
    beta1: float = 0.01
    beta2: float = 0.01
    max_iter: int = 100
    tol: float = 1e-6
    lasso_max_iter: int = 200
    lasso_tol: float = 1e-8
    zero_threshold: float = 0.0
    diag_floor: float = 1e-8
    track_objective: bool = False

    def __post_init__(self):
        if self.beta1 < 0 or self.beta2 < 0:
            raise ValueError("penalties beta1, beta2 must be nonnegative")
        if self.max_iter < 1 or self.lasso_max_iter < 1:
            raise ValueError("iteration caps must be positive")
        if not 0 < self.tol < 1:
            raise ValueError("tol must lie in (0, 1)")
        if self.lasso_tol <= 0 or self.diag_floor <= 0:
            raise ValueError("lasso_tol and diag_floor must be positive")
        if self.zero_threshold < 0:
            raise ValueError("zero_threshold must be nonnegative")


@dataclass(frozen=True)
class FitResult:
    model: KsModel
    iterations_run: int
    converged: bool
    delta_history: list[tuple[float, float]]
    objective: float
    objective_history: list[float] = field(default_factory=list)
    lasso_failures: int = 0


@numba.njit(cache=True)
def _cd_lasso(a, b, beta, x0, tol, max_iter):
    """Cyclic coordinate descent for min 1/2 x'Ax + b'x + beta*|x|_1.

    Stops once a full sweep moves no coordinate by more than ``tol`` and the
    KKT residual is within ``tol``.  Returns (x, sweeps, converged).
    """
    k = b.shape[0]
    x = x0.copy()
    g = a @ x + b
    for sweep in range(1, max_iter + 1):
        max_step = 0.0
        for j in range(k):
            ajj = a[j, j]
            z = x[j] - g[j] / ajj
            thr = beta / ajj
            if z > thr:
                xn = z - thr
            elif z < -thr:
                xn = z + thr
            else:
                xn = 0.0
            step = xn - x[j]
            if step != 0.0:
                for r in range(k):
                    g[r] += a[r, j] * step
                x[j] = xn
                if abs(step) > max_step:
                    max_step = abs(step)
        if max_step < tol:
            g = a @ x + b
            worst = 0.0
            for j in range(k):
                if x[j] == 0.0:
                    v = abs(g[j]) - beta
                elif x[j] > 0.0:
                    v = abs(g[j] + beta)
                else:
                    v = abs(g[j] - beta)
                if v > worst:
                    worst = v
            if worst <= tol:
                return x, sweep, True
    return x, max_iter, False


def _kkt_residual(a, b, beta, x) -> float:
    g = a @ x + b
    zero = x == 0
    viol = np.where(zero, np.abs(g) - beta, np.abs(g + beta * np.sign(x)))
    return float(max(viol.max(initial=0.0), 0.0))


def lasso_column(a, t_col, p_dim, beta, cfg: SolverConfig | None = None, x0=None,
                 return_info: bool = False):
    """Sparse solution of p_dim * t + A x = 0.

    Minimizes 1/2 x'Ax + p_dim * t'x + beta * |x|_1 with A symmetrized.
    On hitting ``cfg.lasso_max_iter`` a ``LassoConvergenceWarning`` is emitted
    and the last iterate is returned.
    """
    cfg = cfg or SolverConfig()
    a = np.asarray(a, dtype=float)
    a = 0.5 * (a + a.T)
    b = p_dim * np.asarray(t_col, dtype=float)
    if a.shape != (b.shape[0], b.shape[0]):
        raise DimensionError(f"A has shape {a.shape} but t has length {b.shape[0]}")
    if not (np.all(np.isfinite(a)) and np.all(np.isfinite(b))):
        raise ValueError("lasso inputs must be finite")
    if b.shape[0] == 0:
        out = np.zeros(0)
        return (out, True) if return_info else out
    if np.any(np.diag(a) <= 0):
        raise NotPositiveDefiniteError("lasso Hessian has a nonpositive diagonal entry")
    x0 = np.zeros_like(b) if x0 is None else np.asarray(x0, dtype=float).copy()
    x, _, ok = _cd_lasso(a, b, float(beta), x0, cfg.lasso_tol, cfg.lasso_max_iter)
    if not ok:
        warnings.warn(
            f"lasso coordinate descent stopped at {cfg.lasso_max_iter} sweeps "
            f"(KKT residual {_kkt_residual(a, b, beta, x):.3g})",
            LassoConvergenceWarning,
            stacklevel=2,
        )
    return (x, ok) if return_info else x


def _column_weights(lam_own, lam_partner, own_ii, column):
    denom_diag = own_ii + lam_partner
    if np.any(denom_diag <= 0):
        j = int(np.argmin(denom_diag))
        raise NotPositiveDefiniteError(
            f"diagonal entry {own_ii:.6g} + lambda2[{j}] = {denom_diag[j]:.6g} is not positive",
            index=(column, j), column=column,
        )
    pair = lam_own[:, None] + lam_partner[None, :]
    if np.any(pair <= 0):
        q, j = np.unravel_index(np.argmin(pair), pair.shape)
        raise NotPositiveDefiniteError(
            f"eigenvalue pair lambda1[{q}] + lambda2[{j}] = {pair[q, j]:.6g} is not positive",
            index=(int(q), int(j)), column=column,
        )
    # c_q = sum_j 1 / ((lambda1_q + lambda2_j) * (psi_ii + lambda2_j))
    return (1.0 / pair) @ (1.0 / denom_diag)


def build_A(i: int, eig_psi: EigenDecomposition, lambda2, psi_ii: float) -> np.ndarray:
    """The (n-1) x (n-1) lasso Hessian for column ``i`` (0-based).

    Entry (l, k) is sum_j 1/(psi_ii + lambda2_j) * sum_q u_lq u_kq / (lambda1_q + lambda2_j)
    over l, k != i, i.e. the block-wise trace of the reduced inverse
    precision times (psi_ii I + Lambda2)^-1, without forming either.
    """
    lam2 = np.asarray(lambda2, dtype=float)
    n = eig_psi.dim
    if not 0 <= i < n:
        raise IndexError(f"column index {i} out of range for dimension {n}")
    c = _column_weights(eig_psi.values, lam2, float(psi_ii), i)
    u = np.delete(eig_psi.vectors, i, axis=0)
    a = (u * c) @ u.T
    return 0.5 * (a + a.T)


def _precision_pass(mat, cov_side, lam_partner, beta, cfg, iteration=0, side="psi"):
    """One sweep of column updates over ``mat``.  Returns (new_mat, eig, lasso_failures)."""
    mat = np.array(mat, dtype=float, copy=True)
    dim = mat.shape[0]
    scale = lam_partner.shape[0]
    eig = sym_eigen(mat)
    failures = 0
    floor = cfg.diag_floor
    for i in range(dim):
        if dim == 1:
            break
        a = build_A(i, eig, lam_partner, mat[i, i])
        idx = np.r_[0:i, i + 1:dim]
        x_old = mat[idx, i].copy()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", LassoConvergenceWarning)
                x_new, ok = lasso_column(a, cov_side[idx, i], scale, beta, cfg,
                                         x0=x_old, return_info=True)
        except NotPositiveDefiniteError as exc:
            exc.iteration, exc.column = iteration, i
            raise
        failures += not ok
        step = x_new - x_old
        for _ in range(MAX_HALVINGS + 1):
            mat[idx, i] = x_old + step
            mat[i, idx] = x_old + step
            new_eig = sym_eigen(mat)
            if new_eig.values[0] + lam_partner[0] > floor:
                break
            step = 0.5 * step
        else:
            raise NotPositiveDefiniteError(
                f"{side} update at iteration {iteration}, column {i} could not keep the "
                f"Kronecker sum positive definite after {MAX_HALVINGS} halvings",
                iteration=iteration, column=i,
            )
        eig = new_eig
    return mat, eig, failures


def update_psi_pass(psi, t_hat, lambda2, cfg: SolverConfig, beta: float | None = None):
    """One column-by-column pass over psi with theta's eigenvalues held fixed.

    Diagonal entries are left as they are.  The theta pass is this same
    function called with (theta, s_hat, eigenvalues of psi, beta2).
    """
    psi = np.asarray(psi, dtype=float)
    t_hat = np.asarray(t_hat, dtype=float)
    if psi.shape != t_hat.shape:
        raise DimensionError(f"psi {psi.shape} and t_hat {t_hat.shape} disagree")
    beta = cfg.beta1 if beta is None else beta
    lam2 = np.sort(np.asarray(lambda2, dtype=float))
    out, _, _ = _precision_pass(psi, t_hat, lam2, beta, cfg)
    return out


def objective_value(model: KsModel, cov: CovPair, cfg: SolverConfig) -> float:
    """n tr(theta S) + p tr(psi T) - log|psi (+) theta| + beta1 |psi|_1 + beta2 |theta|_1."""
    n, p = model.n, model.p
    if cov.t_hat.shape != (n, n) or cov.s_hat.shape != (p, p):
        raise DimensionError("covariance pair does not match the model dimensions")
    lam1, lam2 = model.eigenvalues()
    k = ks_logdet(lam1, lam2)
    fit_term = n * np.sum(model.theta * cov.s_hat) + p * np.sum(model.psi * cov.t_hat)
    penalty = cfg.beta1 * np.abs(model.psi).sum() + cfg.beta2 * np.abs(model.theta).sum()
    return float(fit_term - k + penalty)


def fit(cov: CovPair, cfg: SolverConfig | None = None, init: KsModel | None = None) -> FitResult:
    """Alternate psi and theta passes until the delta rule or the iteration cap stops it."""
    cfg = cfg or SolverConfig()
    t_hat = np.asarray(cov.t_hat, dtype=float)
    s_hat = np.asarray(cov.s_hat, dtype=float)
    n, p = t_hat.shape[0], s_hat.shape[0]
    if init is None:
        init = KsModel.identity(n, p)
    if init.psi.shape != (n, n) or init.theta.shape != (p, p):
        raise DimensionError("initial model does not match the covariance dimensions")
    psi = np.array(init.psi, dtype=float)
    theta = np.array(init.theta, dtype=float)
    eig_theta = sym_eigen(theta)
    lam1 = sym_eigen(psi).values
    if not lam1[0] + eig_theta.values[0] > cfg.diag_floor:
        raise NotPositiveDefiniteError("initial model is not positive definite as a Kronecker sum",
                                       iteration=0)

    deltas: list[tuple[float, float]] = []
    objectives: list[float] = []
    failures = 0
    converged = False
    for it in range(1, cfg.max_iter + 1):
        psi_new, eig_psi, f1 = _precision_pass(psi, t_hat, eig_theta.values, cfg.beta1, cfg, it, "psi")
        theta_new, eig_theta, f2 = _precision_pass(theta, s_hat, eig_psi.values, cfg.beta2, cfg, it, "theta")
        failures += f1 + f2
        d_psi = float(np.sum((psi_new - psi) ** 2))
        d_theta = float(np.sum((theta_new - theta) ** 2))
        deltas.append((d_psi, d_theta))
        psi, theta = psi_new, theta_new
        if cfg.track_objective:
            objectives.append(objective_value(KsModel(psi, theta), cov, cfg))
        log.debug("iteration %d: dpsi=%.3e dtheta=%.3e", it, d_psi, d_theta)
        if it >= 3 and max(a + b for a, b in deltas[-3:]) < cfg.tol:
            converged = True
            break

    if failures:
        warnings.warn(f"{failures} lasso sub-problems hit the sweep cap", LassoConvergenceWarning,
                      stacklevel=2)
    model = KsModel(psi, theta)
    return FitResult(
        model=model,
        iterations_run=len(deltas),
        converged=converged,
        delta_history=deltas,
        objective=objective_value(model, cov, cfg),
        objective_history=objectives,
        lasso_failures=failures,
    )
