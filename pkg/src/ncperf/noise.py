"""Class-conditional label noise: the channel and its correction operators.

``T[i, j]`` is the probability that a clean label ``j`` is observed as ``i``,
so every column of ``T`` is a distribution.
"""

from dataclasses import dataclass, field

import numpy as np

from .exceptions import InvalidSigma, NotColumnStochastic, ShapeMismatch, SingularMatrix
from .numerics import as_matrix, induced_one_norm, invert

STOCHASTIC_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """A validated noise matrix together with its cached inverse."""

    T: np.ndarray
    T_inv: np.ndarray = field(repr=False)
    one_norm_of_inv: float

    @property
    def n(self):
        return self.T.shape[0]

    @property
    def is_identity(self):
        return bool(np.array_equal(self.T, np.eye(self.n)))


def build(T):
    """Validate ``T`` and return a :class:`NoiseModel`.

    Column sums must be 1 within ``STOCHASTIC_TOL`` and entries must lie in
    [0, 1]. Estimated matrices go through this same path.
    """
    T = as_matrix(T, "noise matrix")
    if T.shape[0] != T.shape[1]:
        raise ShapeMismatch(f"noise matrix must be square, got {T.shape}")
    if np.any(T < 0.0) or np.any(T > 1.0):
        raise NotColumnStochastic("noise matrix entries must lie in [0, 1]")
    col_sums = T.sum(axis=0)
    if np.any(np.abs(col_sums - 1.0) > STOCHASTIC_TOL):
        raise NotColumnStochastic(f"noise matrix column sums {col_sums} are not 1")
    T = T.copy()
    T.setflags(write=False)
    T_inv = invert(T)
    T_inv.setflags(write=False)
    return NoiseModel(T=T, T_inv=T_inv, one_norm_of_inv=induced_one_norm(T_inv))


def identity(n):
    return build(np.eye(n))


def uniform_ccn(n, sigma):
    """Symmetric channel: keep a label with probability ``1 - sigma``, otherwise
    move it to one of the other ``n - 1`` classes uniformly."""
    if n < 2:
        raise InvalidSigma("symmetric noise needs at least two classes")
    if not 0.0 <= sigma < (n - 1) / n:
        raise InvalidSigma(f"sigma must lie in [0, {(n - 1) / n:.4g}) for n={n}, got {sigma}")
    T = np.full((n, n), sigma / (n - 1))
    np.fill_diagonal(T, 1.0 - sigma)
    return build(T)


def random_column_ccn(n, sigma, rng, max_tries=1000):
    """Noise matrix with diagonal ``1 - sigma`` and random off-diagonal mass.

    In each column the ``n - 1`` off-diagonal entries are independent uniforms
    rescaled to sum to ``sigma``. Singular draws are rejected and redrawn.
    """
    if n < 2:
        raise InvalidSigma("random-column noise needs at least two classes")
    if not 0.0 <= sigma < 1.0:
        raise InvalidSigma(f"sigma must lie in [0, 1), got {sigma}")
    for _ in range(max_tries):
        T = np.empty((n, n))
        for j in range(n):
            raw = rng.uniform(0.0, 1.0, size=n - 1)
            off = sigma * raw / raw.sum() if sigma > 0 else np.zeros(n - 1)
            T[:, j] = np.insert(off, j, 1.0 - sigma)
        try:
            return build(T)
        except SingularMatrix:
            continue
    raise SingularMatrix(f"no invertible noise matrix after {max_tries} draws")


def flip_labels(labels, noise, rng):
    """Corrupt each label ``y`` with a draw from column ``y`` of ``T``."""
    labels = np.asarray(labels, dtype=np.intp)
    if labels.size == 0:
        return labels.copy()
    cdf = np.cumsum(noise.T, axis=0)
    cdf[-1, :] = 1.0
    u = rng.random(labels.shape[0])
    # first row index whose cumulative mass exceeds u
    return np.argmax(u[:, None] < cdf[:, labels].T, axis=1).astype(np.intp)


def correct_loss(noise, L):
    """Loss matrix ``(T^T)^{-1} L`` whose noisy risk equals the clean risk of ``L``."""
    L = as_matrix(L, "loss matrix")
    if L.shape[0] != noise.n:
        raise ShapeMismatch(f"loss matrix has {L.shape[0]} rows, noise model has {noise.n} classes")
    return noise.T_inv.T @ L


def correct_probs(noise, p_noisy):
    """Map noisy class probabilities back through ``T^{-1}``.

    Accepts a single vector or an (m, n) array of row vectors. The result sums
    to one but may leave the simplex.
    """
    p = np.asarray(p_noisy, dtype=float)
    if p.shape[-1] != noise.n:
        raise ShapeMismatch(f"probabilities have {p.shape[-1]} classes, noise model has {noise.n}")
    return p @ noise.T_inv.T


def correct_confusion(noise, C_noisy):
    """Estimate the clean confusion matrix as ``T^{-1} C_noisy``."""
    C = as_matrix(C_noisy, "confusion matrix")
    if C.shape != (noise.n, noise.n):
        raise ShapeMismatch(f"confusion matrix shape {C.shape} does not match n={noise.n}")
    return noise.T_inv @ C
