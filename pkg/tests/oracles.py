"""Independent reference computations used by the tests."""
import numpy as np


def posterior_information_form(mu, cov, sigma2, observed, values):
    """Gaussian posterior of one column via the precision (information) form.

    Independent of the gain/Schur-complement route: requires ``sigma2 > 0`` and
    an invertible prior covariance.
    """
    n = mu.size
    a = np.eye(n)[observed]
    prior_prec = np.linalg.inv(cov)
    post_prec = prior_prec + a.T @ a / sigma2
    post_cov = np.linalg.inv(post_prec)
    post_mean = post_cov @ (prior_prec @ mu + a.T @ values / sigma2)
    return post_mean, post_cov


def soft_threshold_divergence_fd(z, tau, h=1e-6):
    """Central finite-difference divergence of the spectral soft-threshold map."""
    from gridrecover.svt import soft_threshold

    div = 0.0
    for i in range(z.shape[0]):
        for j in range(z.shape[1]):
            zp = z.copy()
            zm = z.copy()
            zp[i, j] += h
            zm[i, j] -= h
            div += (soft_threshold(zp, tau)[i, j] - soft_threshold(zm, tau)[i, j]) / (2 * h)
    return div


def random_spd(rng, n, floor=0.1):
    g = rng.standard_normal((n, n))
    return g @ g.T / n + floor * np.eye(n)
