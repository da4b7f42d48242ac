import numpy as np


def random_correlation(d, rng, n_factors=None):
    """Random full-rank correlation matrix (Wishart-style, symmetrized)."""
    a = rng.standard_normal((d, n_factors or 2 * d))
    m = a @ a.T / a.shape[1]
    s = np.sqrt(np.diag(m))
    c = m / np.outer(s, s)
    c = 0.5 * (c + c.T)
    np.fill_diagonal(c, 1.0)
    return c


def correlation_pair(d, seed):
    rng = np.random.default_rng(seed)
    return random_correlation(d, rng), random_correlation(d, rng)


def materialize_hessian(sigma, sigma_prime):
    """Dense Kronecker-average oracle for the implicit operator."""
    return 0.5 * (np.kron(sigma_prime, sigma) + np.kron(sigma, sigma_prime))
