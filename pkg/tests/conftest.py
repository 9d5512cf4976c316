"""Shared fixtures and independent numerical oracles.

The oracles deliberately avoid the code paths under test: direct
quadrature for the Faddeeva function, scipy matrix exponentials for
mean propagation, and the Van Loan block-exponential identity for
covariance propagation.
"""

from __future__ import annotations

import numpy as np
import pytest
from scipy.linalg import expm

RNG_SEED = 20260819


@pytest.fixture
def rng():
    return np.random.default_rng(RNG_SEED)


def simpson_faddeeva(z: complex, half_range: float = 20.0, n: int = 200_001) -> complex:
    """Faddeeva function via its defining principal-value-free integral.

    w(z) = (i/pi) * int_-inf^inf exp(-t^2) / (z - t) dt  for Im z > 0.
    The integrand decays like exp(-400) at |t|=20, far below any
    tolerance used in the tests.
    """
    if z.imag <= 0:
        raise ValueError("quadrature oracle needs Im z > 0")
    t = np.linspace(-half_range, half_range, n)
    integrand = np.exp(-t * t) / (z - t)
    h = t[1] - t[0]
    weights = np.ones(n)
    weights[1:-1:2] = 4.0
    weights[2:-1:2] = 2.0
    return complex(1j / np.pi * (h / 3.0) * np.sum(weights * integrand))


def expm_mean(drift: np.ndarray, y0: np.ndarray, times: np.ndarray) -> np.ndarray:
    """First-moment propagation by dense matrix exponentials."""
    out = np.empty((times.size, y0.size))
    for k, t in enumerate(times):
        out[k] = expm(drift * t) @ y0
    return out


def vanloan_covariance(
    drift: np.ndarray, noise: np.ndarray, gamma0: np.ndarray, times: np.ndarray
) -> np.ndarray:
    """Exact propagation of d(gamma)/dt = A gamma + gamma A^T + N.

    Uses the Van Loan block identity: with B = [[-A, N], [0, A^T]],
    expm(B t) = [[F11, F12], [0, F22]] gives e^{A t} = F22^T and
    int_0^t e^{A s} N e^{A^T s} ds = F22^T F12.
    """
    n = drift.shape[0]
    block = np.zeros((2 * n, 2 * n))
    block[:n, :n] = -drift
    block[:n, n:] = noise
    block[n:, n:] = drift.T
    out = np.empty((times.size, n, n))
    for k, t in enumerate(times):
        full = expm(block * t)
        prop = full[n:, n:].T
        accumulated = prop @ full[:n, n:]
        out[k] = prop @ gamma0 @ prop.T + accumulated
    return out


def fit_exponential_rate(times: np.ndarray, values: np.ndarray) -> float:
    """Least-squares slope of log|values| against time."""
    mask = np.abs(values) > 0
    coeffs = np.polyfit(times[mask], np.log(np.abs(values[mask])), 1)
    return coeffs[0]
