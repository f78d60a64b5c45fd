import numpy as np
import pytest

from ssmforge import random_matrix


def sample_matrices(count, seed, n_range=(4, 10), m_range=(3, 10),
                    densities=(0.3, 0.5, 0.7)):
    """Random test matrices drawn from the ranges used by the cross-check suites."""
    rng = np.random.default_rng(seed)
    out = []
    for _ in range(count):
        n = int(rng.integers(n_range[0], n_range[1] + 1))
        M = int(rng.integers(m_range[0], m_range[1] + 1))
        density = float(rng.choice(densities))
        out.append(random_matrix(n, M, density, rng))
    return out


@pytest.fixture(scope="session")
def small_matrix_pool():
    return sample_matrices(120, seed=20240817)
