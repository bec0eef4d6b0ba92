import numpy as np
import pytest


def random_confusion(rng, n, floor=0.0):
    """Random joint distribution over (label, prediction) with total mass 1."""
    C = rng.dirichlet(np.ones(n * n)).reshape(n, n) + floor
    return C / C.sum()


def random_noise_matrix(rng, n, max_off=0.4):
    """Diagonally dominant column-stochastic matrix."""
    T = np.empty((n, n))
    for j in range(n):
        off = rng.dirichlet(np.ones(n - 1)) * rng.uniform(0.0, max_off)
        T[:, j] = np.insert(off, j, 1.0 - off.sum())
    return T


def central_difference(f, C, h=1e-6):
    G = np.empty_like(C)
    for idx in np.ndindex(C.shape):
        up, down = C.copy(), C.copy()
        up[idx] += h
        down[idx] -= h
        G[idx] = (f(up) - f(down)) / (2 * h)
    return G


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
