"""Synthetic truth matrices, Kronecker-sum matrix-normal draws and copula counts."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, Optional

import numpy as np
from scipy.special import erfc

from .data import DataStack
from .errors import NotPositiveDefiniteError
from .linalg import KsModel, sym_eigen

RNG_ALGORITHM = "numpy.random.PCG64 seeded via SeedSequence"
DIAG_MARGIN = 0.1


@dataclass(frozen=True)
class CountParams:
    r: int = 2
    prob: float = 0.5

    def __post_init__(self):
        if self.r < 1 or int(self.r) != self.r:
            raise ValueError("r must be a positive integer")
        if not 0 < self.prob < 1:
            raise ValueError("prob must lie in (0, 1)")


@dataclass(frozen=True)
class SimSpec:
    n: int
    p: int
    m: int = 1
    sparsity: float = 0.1
    offdiag_mean: float = 1.0
    offdiag_sd: float = math.sqrt(2.0)
    seed: int = 0
    count_params: Optional[CountParams] = None
    truth: Literal["random", "block"] = "random"
    theta_blocks: int = 3
    block_value: float = 0.5
    block_noise_sd: float = 0.01
    center: bool = True

    def __post_init__(self):
        if self.n < 1 or self.p < 1 or self.m < 1:
            raise ValueError("n, p and m must be positive")
        if not 0 < self.sparsity < 1:
            raise ValueError("sparsity must lie in (0, 1)")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must be a 64-bit unsigned integer")
        if self.truth not in ("random", "block"):
            raise ValueError("truth must be 'random' or 'block'")
        if self.truth == "block" and not 1 <= self.theta_blocks <= self.p:
            raise ValueError("theta_blocks must lie in [1, p]")


@dataclass
class Simulation:
    truth: KsModel
    latent: DataStack
    data: DataStack
    spec: SimSpec
    metadata: dict = field(default_factory=dict)


def spawn_rngs(seed: int, count: int) -> list[np.random.Generator]:
    children = np.random.SeedSequence(seed).spawn(count)
    return [np.random.Generator(np.random.PCG64(c)) for c in children]


def _dominant_diagonal(a: np.ndarray) -> np.ndarray:
    np.fill_diagonal(a, 0.0)
    np.fill_diagonal(a, np.abs(a).sum(axis=1) + DIAG_MARGIN)
    return a


def gen_sparse_pd(dim, sparsity, offdiag_mean, offdiag_sd, rng) -> np.ndarray:
    """Sparse symmetric matrix made positive definite by strict diagonal dominance."""
    iu = np.triu_indices(dim, k=1)
    mask = rng.random(iu[0].size) < sparsity
    vals = rng.normal(offdiag_mean, offdiag_sd, size=iu[0].size)
    a = np.zeros((dim, dim))
    a[iu] = np.where(mask, vals, 0.0)
    a = a + a.T
    return _dominant_diagonal(a)


def gen_block_pd(dim, blocks, value, noise_sd, rng) -> np.ndarray:
    """Block-diagonal matrix of ``value`` blocks plus symmetric Gaussian noise."""
    sizes = [len(b) for b in np.array_split(np.arange(dim), blocks)]
    a = np.zeros((dim, dim))
    start = 0
    for s in sizes:
        a[start:start + s, start:start + s] = value
        start += s
    noise = np.triu(rng.normal(0.0, noise_sd, size=(dim, dim)), k=1)
    a = a + noise + noise.T
    return _dominant_diagonal(a)


def block_labels(dim: int, blocks: int) -> np.ndarray:
    return np.concatenate([np.full(len(b), k) for k, b in
                           enumerate(np.array_split(np.arange(dim), blocks))])


def sample_ks_normal(model: KsModel, m: int, rng, center: bool = False) -> DataStack:
    """Draw m p x n matrices X with vec(X) ~ N(0, (psi (+) theta)^-1).

    Uses X = V G U' with G_jq = e_jq / sqrt(lambda1_q + lambda2_j), which has the
    required covariance and needs only n x n, p x p and p x n arrays.  With
    ``center=True`` each draw has its own grand mean removed.
    """
    eu = sym_eigen(model.psi)
    ev = sym_eigen(model.theta)
    sums = ev.values[:, None] + eu.values[None, :]  # p x n
    if not np.all(sums > 0):
        raise NotPositiveDefiniteError("cannot sample: Kronecker sum is not positive definite")
    scale = 1.0 / np.sqrt(sums)
    rngs = rng if isinstance(rng, (list, tuple)) else [rng] * m
    out = np.empty((m, model.p, model.n))
    for k in range(m):
        g = rngs[k].standard_normal((model.p, model.n)) * scale
        x = ev.vectors @ g @ eu.vectors.T
        if center:
            x -= x.mean()
        out[k] = x
    return DataStack(out, "gaussian")


def normal_cdf(x):
    """Standard normal CDF via the complementary error function."""
    return 0.5 * erfc(-np.asarray(x, dtype=float) / math.sqrt(2.0))


def _nb_cdf_table(r: int, prob: float, target: float) -> np.ndarray:
    # pmf(k+1) = pmf(k) * (k + r) / (k + 1) * (1 - prob)
    pmf = prob ** r
    cdf = [pmf]
    k = 0
    while cdf[-1] < target:
        pmf *= (k + r) / (k + 1) * (1.0 - prob)
        k += 1
        if pmf == 0.0 or cdf[-1] + pmf == cdf[-1]:
            break
        cdf.append(cdf[-1] + pmf)
    return np.array(cdf)


def nb_quantile(P, r: int, prob: float):
    """Smallest k >= 0 with CDF(k) >= P for NB(r, prob) counting failures before the r-th success."""
    arr = np.asarray(P, dtype=float)
    if np.any(arr >= 1.0):
        raise ValueError("negative binomial quantile is unbounded at P = 1")
    if np.any(arr < 0.0):
        raise ValueError("P must lie in [0, 1)")
    CountParams(r, prob)
    table = _nb_cdf_table(r, prob, float(arr.max(initial=0.0)))
    k = np.searchsorted(table, arr, side="left")
    k = np.minimum(k, table.size - 1).astype(np.int64)
    return int(k) if k.ndim == 0 else k


def gaussian_to_counts(x_stack: DataStack, r: int, prob: float) -> DataStack:
    u = normal_cdf(x_stack.replicates)
    # Phi saturates to exactly 1.0 beyond ~8.3 sd; keep the quantile finite.
    u = np.minimum(u, np.nextafter(1.0, 0.0))
    return DataStack(nb_quantile(u, r, prob), "counts")


def make_truth(spec: SimSpec, rng_psi, rng_theta) -> KsModel:
    psi = gen_sparse_pd(spec.n, spec.sparsity, spec.offdiag_mean, spec.offdiag_sd, rng_psi)
    if spec.truth == "block":
        theta = gen_block_pd(spec.p, spec.theta_blocks, spec.block_value, spec.block_noise_sd,
                             rng_theta)
    else:
        theta = gen_sparse_pd(spec.p, spec.sparsity, spec.offdiag_mean, spec.offdiag_sd,
                              rng_theta)
    return KsModel(psi, theta)


def simulate(spec: SimSpec) -> Simulation:
    """Truth matrices, latent Gaussian draws and (optionally) copula counts for a spec.

    Streams are spawned from ``spec.seed``: one for each truth matrix and one
    per replicate, so a run is reproducible and growing m leaves earlier
    replicates unchanged.
    """
    rngs = spawn_rngs(spec.seed, 2 + spec.m)
    truth = make_truth(spec, rngs[0], rngs[1])
    latent = sample_ks_normal(truth, spec.m, rngs[2:], center=spec.center)
    if spec.count_params is not None:
        data = gaussian_to_counts(latent, spec.count_params.r, spec.count_params.prob)
    else:
        data = latent
    meta = {
        "rng_algorithm": RNG_ALGORITHM,
        "nb_parametrization": "failures before the r-th success, pmf C(k+r-1,k) prob^r (1-prob)^k",
    }
    return Simulation(truth=truth, latent=latent, data=data, spec=spec, metadata=meta)
