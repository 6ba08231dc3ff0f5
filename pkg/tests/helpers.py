import numpy as np

from scbiglasso.linalg import block_trace_p, kronecker_sum_dense


def random_spd(d, rng, shift=1.0):
    b = rng.normal(size=(d, d))
    return b @ b.T / d + shift * np.eye(d)


def dense_hat_w(eig_psi, eig_theta):
    """(U (x) I_p) D (U' (x) I_p) with D the inverse pairwise eigenvalue sums."""
    u = eig_psi.vectors
    p = eig_theta.dim
    d = 1.0 / (eig_psi.values[:, None] + eig_theta.values[None, :]).ravel()
    left = np.kron(u, np.eye(p))
    return (left * d) @ left.T


def dense_A(i, psi, eig_psi, eig_theta):
    """Block traces of the reduced hat-W blocks times (psi_ii I + Lambda2)^-1."""
    n, p = psi.shape[0], eig_theta.dim
    w_hat = dense_hat_w(eig_psi, eig_theta)
    inv = np.diag(1.0 / (psi[i, i] + eig_theta.values))
    keep = [k for k in range(n) if k != i]
    out = np.empty((n - 1, n - 1))
    for a, l in enumerate(keep):
        for b, k in enumerate(keep):
            out[a, b] = np.trace(w_hat[l * p:(l + 1) * p, k * p:(k + 1) * p] @ inv)
    return out


def dense_objective(psi, theta, t_hat, s_hat, beta1, beta2):
    n, p = psi.shape[0], theta.shape[0]
    _, logdet = np.linalg.slogdet(kronecker_sum_dense(psi, theta))
    return (n * np.trace(theta @ s_hat) + p * np.trace(psi @ t_hat) - logdet
            + beta1 * np.abs(psi).sum() + beta2 * np.abs(theta).sum())


def dense_block_traces(psi, theta):
    """tr_p of the dense inverse Kronecker sum, and of hat-W."""
    w = np.linalg.inv(kronecker_sum_dense(psi, theta))
    return block_trace_p(w, theta.shape[0])
