"""Dense symmetric linear algebra and Kronecker-sum utilities.

The solver path only ever touches n x n and p x p matrices plus their
eigendecompositions.  ``kronecker_sum_dense`` and ``block_trace_p`` build
np x np objects and exist purely as test oracles, so they refuse to run
beyond ``DENSE_GUARD``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionError, EigenConvergenceError, NotPositiveDefiniteError

DENSE_GUARD = 4096


def as_symmetric(m, strict: bool = False, atol: float = 0.0) -> np.ndarray:
    """Return ``m`` as a float64 symmetric matrix.

    With ``strict=False`` the input is symmetrized by averaging with its
    transpose; with ``strict=True`` any asymmetry larger than ``atol``
    raises.  Non-finite entries always raise.
    """
    a = np.array(m, dtype=float, copy=True)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    if strict:
        dev = np.max(np.abs(a - a.T)) if a.size else 0.0
        if dev > atol:
            raise ValueError(f"matrix is not symmetric (max deviation {dev:.3g})")
    # Averaging gives an exactly symmetric result: (a_ij + a_ji) is commutative.
    return 0.5 * (a + a.T)


@dataclass(frozen=True)
class EigenDecomposition:
    """Orthogonal eigenvectors (columns) and ascending eigenvalues."""

    vectors: np.ndarray
    values: np.ndarray

    @property
    def dim(self) -> int:
        return self.values.shape[0]

    def reconstruct(self) -> np.ndarray:
        return (self.vectors * self.values) @ self.vectors.T


def _fix_signs(u: np.ndarray) -> np.ndarray:
    # Largest-magnitude component of each column made positive; first index wins ties.
    idx = np.argmax(np.abs(u), axis=0)
    signs = np.sign(u[idx, np.arange(u.shape[1])])
    signs[signs == 0] = 1.0
    return u * signs


def sym_eigen(m) -> EigenDecomposition:
    """Eigendecomposition of a symmetric matrix.

    Eigenvalues come back ascending.  Each eigenvector is oriented so that
    its largest-magnitude component is positive, which makes the result
    reproducible for a fixed input.
    """
    a = np.asarray(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    try:
        values, vectors = np.linalg.eigh(a)
    except np.linalg.LinAlgError as exc:
        off = a - np.diag(np.diag(a))
        raise EigenConvergenceError(
            f"symmetric eigensolver did not converge: {exc}",
            residual=float(np.linalg.norm(off)),
        ) from exc
    return EigenDecomposition(vectors=_fix_signs(vectors), values=values)


@dataclass(frozen=True)
class KsModel:
    """Row precision ``psi`` (n x n) and column precision ``theta`` (p x p).

    The joint precision is the Kronecker sum psi (+) theta; it is never formed.
    """

    psi: np.ndarray
    theta: np.ndarray

    @property
    def n(self) -> int:
        return self.psi.shape[0]

    @property
    def p(self) -> int:
        return self.theta.shape[0]

    @classmethod
    def identity(cls, n: int, p: int) -> "KsModel":
        return cls(np.eye(n), np.eye(p))

    def eigenvalues(self) -> tuple[np.ndarray, np.ndarray]:
        return np.linalg.eigvalsh(self.psi), np.linalg.eigvalsh(self.theta)

    def is_positive_definite(self, floor: float = 0.0) -> bool:
        lam1, lam2 = self.eigenvalues()
        return bool(lam1[0] + lam2[0] > floor)

    def check_positive_definite(self, floor: float = 0.0) -> None:
        lam1, lam2 = self.eigenvalues()
        if not lam1[0] + lam2[0] > floor:
            raise NotPositiveDefiniteError(
                f"Kronecker sum is not positive definite: smallest eigenvalue "
                f"{lam1[0] + lam2[0]:.6g} <= {floor:g}",
                index=(0, 0),
            )


def kronecker_sum_dense(psi, theta) -> np.ndarray:
    """psi (x) I_p + I_n (x) theta, materialized.  Oracle use only."""
    psi = np.asarray(psi, dtype=float)
    theta = np.asarray(theta, dtype=float)
    n, p = psi.shape[0], theta.shape[0]
    if n * p > DENSE_GUARD:
        raise DimensionError(
            f"dense Kronecker sum of size {n * p} exceeds the guard of {DENSE_GUARD}"
        )
    return np.kron(psi, np.eye(p)) + np.kron(np.eye(n), theta)


def block_trace_p(m, p: int) -> np.ndarray:
    """Matrix of traces of the p x p blocks of an np x np matrix."""
    m = np.asarray(m, dtype=float)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {m.shape}")
    if p < 1 or m.shape[0] % p:
        raise DimensionError(f"dimension {m.shape[0]} is not divisible by p={p}")
    if m.shape[0] > DENSE_GUARD:
        raise DimensionError(f"block trace input exceeds the guard of {DENSE_GUARD}")
    n = m.shape[0] // p
    # blocks[i, a, j, b] = M[i*p + a, j*p + b]
    blocks = m.reshape(n, p, n, p)
    return np.einsum("iaja->ij", blocks)


def ks_logdet(lambda1, lambda2) -> float:
    """log |psi (+) theta| from the eigenvalues of psi and theta."""
    lam1 = np.asarray(lambda1, dtype=float)
    lam2 = np.asarray(lambda2, dtype=float)
    sums = lam1[:, None] + lam2[None, :]
    if not np.all(sums > 0):
        i, j = np.unravel_index(np.argmin(sums), sums.shape)
        raise NotPositiveDefiniteError(
            f"eigenvalue pair sum lambda1[{i}] + lambda2[{j}] = {sums[i, j]:.6g} is not positive",
            index=(int(i), int(j)),
        )
    return float(np.log(sums).sum())
