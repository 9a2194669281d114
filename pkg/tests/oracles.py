"""Independent high-precision oracles used to derive frozen expected values.

Everything here goes through mpmath at 40+ digits, so it shares no code
path with the package under test.
"""

import mpmath as mp
import numpy as np

mp.mp.dps = 40


def vectorized(cdf):
    """Wrap a scalar CDF so scipy.stats.kstest can call it with arrays."""

    def wrapped(x):
        arr = np.atleast_1d(np.asarray(x, dtype=np.float64))
        return np.array([cdf(float(v)) for v in arr])

    return wrapped


def phi_oracle(x) -> float:
    """Standard normal CDF via high-precision erfc."""
    return float(0.5 * mp.erfc(-mp.mpf(x) / mp.sqrt(2)))


def pdf_oracle(x) -> float:
    return float(mp.exp(-mp.mpf(x) ** 2 / 2) / mp.sqrt(2 * mp.pi))


def quantile_oracle(p) -> float:
    """Inverse CDF by root finding against the high-precision CDF."""
    target = mp.mpf(p)
    return float(
        mp.findroot(lambda x: 0.5 * mp.erfc(-x / mp.sqrt(2)) - target, mp.mpf(0))
    )


def truncated_moments_oracle(mu, sigma, lower, upper):
    """Mean and variance of a truncated normal by adaptive quadrature."""
    mu, sigma = mp.mpf(mu), mp.mpf(sigma)
    a = (mp.mpf(lower) - mu) / sigma
    b = (mp.mpf(upper) - mu) / sigma

    def dens(z):
        return mp.exp(-z * z / 2) / mp.sqrt(2 * mp.pi)

    mass = mp.quad(dens, [a, b])
    m1 = mp.quad(lambda z: z * dens(z), [a, b]) / mass
    m2 = mp.quad(lambda z: z * z * dens(z), [a, b]) / mass
    return float(mu + sigma * m1), float(sigma * sigma * (m2 - m1 * m1))


def truncated_cdf_oracle(mu, sigma, lower, upper, x) -> float:
    mu, sigma = mp.mpf(mu), mp.mpf(sigma)
    a = (mp.mpf(lower) - mu) / sigma
    b = (mp.mpf(upper) - mu) / sigma
    z = (mp.mpf(x) - mu) / sigma

    def cdf(t):
        return 0.5 * mp.erfc(-t / mp.sqrt(2))

    return float((cdf(z) - cdf(a)) / (cdf(b) - cdf(a)))
