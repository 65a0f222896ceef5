"""Shared helpers for the test suite."""

import numpy as np

from volterra_lab import CompactOperatorModel


def random_model(rng: np.random.Generator, n_dim: int, scale: float = 1.0,
                 complex_entries: bool = True) -> CompactOperatorModel:
    z = rng.standard_normal((n_dim, n_dim))
    if complex_entries:
        z = z + 1j * rng.standard_normal((n_dim, n_dim))
    return CompactOperatorModel.from_matrix(scale * z / np.sqrt(n_dim))


def max_ky_fan_violation(s_c: np.ndarray, s_t: np.ndarray, s_sum: np.ndarray) -> float:
    """max over valid (n, m) of s_{n+m-1}(C+T) - (s_n(C) + s_m(T))."""
    n_dim = len(s_sum)
    bound = np.full(n_dim, np.inf)
    for n in range(n_dim):
        m_count = n_dim - n                  # indices with n + m - 1 <= N
        k = n + np.arange(m_count)           # zero-based rank of n + m - 1
        np.minimum.at(bound, k, s_c[n] + s_t[:m_count])
    return float(np.max(s_sum - bound))
