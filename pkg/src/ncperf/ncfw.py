"""Noise-corrected Frank-Wolfe for monotonic convex measures.

The iterate is a randomized classifier whose noisy confusion on the held-out
half of the sample is tracked directly; the measure and its gradient are only
ever evaluated on the corrected confusion ``T^{-1} C``. With the identity
noise model this is the plain Frank-Wolfe method.
"""

from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import measures as M
from .confusion import CostSensitiveClassifier, RandomizedClassifier, confusion_from_predictions, decide
from .cpe import TrainConfig, train, validate_labels
from .data import Dataset, split_halves
from .exceptions import ConfigError, EmptySample
from .noise import build, correct_loss, identity


@dataclass
class FwTrace:
    """Per-step diagnostics of a Frank-Wolfe run (arrays indexed by ``t - 1``).

    ``psi[t - 1]`` is the corrected measure at ``C^t``; ``psi_init`` is its
    value at the initial classifier.
    """

    psi_init: float
    loss_matrices: np.ndarray
    psi: np.ndarray
    step_sizes: np.ndarray

    @property
    def steps(self):
        return np.arange(1, len(self.psi) + 1)


def zero_one_loss(n):
    return 1.0 - np.eye(n)


def fw_weights(steps):
    """Final mixture weights after ``steps`` updates ``h <- (1 - g) h + g g_t``
    with ``g = 2 / (t + 1)``.

    Index 0 is the initial classifier; index ``t`` is the classifier added at
    step ``t``, whose weight is ``2 t / (T (T + 1))``.
    """
    if steps < 1:
        raise ConfigError("steps must be at least 1")
    w = np.empty(steps + 1)
    w[0] = 0.0
    t = np.arange(1, steps + 1, dtype=float)
    w[1:] = 2.0 * t / (steps * (steps + 1.0))
    return w


def fw_weights_exact(steps):
    """Same weights as :func:`fw_weights`, as exact fractions from the products."""
    weights = [Fraction(1)]
    for t in range(1, steps + 1):
        g = Fraction(2, t + 1)
        weights = [w * (1 - g) for w in weights] + [g]
    return weights


def frank_wolfe(measure, P2, y2, noise, steps, cpe=None):
    """Run the Frank-Wolfe loop on precomputed class probabilities.

    ``P2`` holds the CPE outputs on the held-out sample with labels ``y2``.
    Returns ``(classifier, trace, C)`` where ``C`` is the final noisy
    confusion estimate.
    """
    if not measure.is_monotonic:
        raise ConfigError(f"Frank-Wolfe needs a monotonic convex measure, got {measure.name!r}")
    if steps < 1:
        raise ConfigError("steps must be at least 1")
    n = noise.n
    if len(y2) == 0:
        raise EmptySample("the confusion-estimation half of the sample is empty")

    init_loss = correct_loss(noise, zero_one_loss(n))
    C = confusion_from_predictions(y2, decide(P2, init_loss), n)
    psi_init = M.evaluate_corrected(measure, noise, C)

    losses = np.empty((steps + 1, n, n))
    losses[0] = init_loss
    weights = np.zeros(steps + 1)
    weights[0] = 1.0
    psi = np.empty(steps)
    gammas = np.empty(steps)
    inv_t = noise.T_inv.T
    for t in range(1, steps + 1):
        gamma = 2.0 / (t + 1)
        L = inv_t @ M.gradient(measure, noise.T_inv @ C)
        Gamma = confusion_from_predictions(y2, decide(P2, L), n)
        weights[:t] *= 1.0 - gamma
        weights[t] = gamma
        C = (1.0 - gamma) * C + gamma * Gamma
        losses[t] = L
        psi[t - 1] = M.evaluate_corrected(measure, noise, C)
        gammas[t - 1] = gamma

    components = [(w, CostSensitiveClassifier(cpe, L)) for w, L in zip(weights, losses)]
    trace = FwTrace(psi_init=psi_init, loss_matrices=losses[1:], psi=psi, step_sizes=gammas)
    return RandomizedClassifier(components), trace, C


def run_ncfw(measure, X, y, noise, steps=5000, cpe_cfg=None, rng=None):
    """Learn a randomized classifier for ``measure`` from noisy labels.

    The sample is split in order: the first ``ceil(m / 2)`` rows train the
    class-probability estimator, the rest estimate confusion matrices.
    ``rng`` only seeds cross-validation folds when they are enabled.

    Returns ``(RandomizedClassifier, FwTrace)``.
    """
    X = np.asarray(X, dtype=float)
    y = validate_labels(y, noise.n)
    (X1, y1), (X2, y2) = split_halves(Dataset(X, y))
    seed = None if rng is None else int(rng.integers(2**32))
    cpe = train(X1, y1, noise.n, cpe_cfg or TrainConfig(), random_state=seed)
    h, trace, _ = frank_wolfe(measure, cpe.predict_proba(X2), y2, noise, steps, cpe=cpe)
    return h, trace


def noise_from_param(noise_matrix, n):
    """Resolve an estimator's ``noise_matrix`` parameter; None is no noise."""
    if noise_matrix is None:
        return identity(n)
    if hasattr(noise_matrix, "T_inv"):
        return noise_matrix
    return build(noise_matrix)


class NCFWClassifier(ClassifierMixin, BaseEstimator):
    """Estimator wrapper around :func:`run_ncfw`.

    Parameters
    ----------
    measure : {"hmean", "qmean", "gmean"}
    noise_matrix : array-like of shape (n, n), NoiseModel or None
        Column-stochastic noise matrix used for correction. None means no
        correction, i.e. plain Frank-Wolfe.
    steps : int
    l2_lambda, max_iters, grad_tol, lr, cv_folds :
        Settings of the class-probability estimator.
    random_state : int or None
        Seeds cross-validation folds and the draws made by :meth:`predict`.
    """

    def __init__(self, measure="qmean", noise_matrix=None, steps=5000, l2_lambda=1e-4,
                 max_iters=2000, grad_tol=1e-6, lr=1.0, cv_folds=0, random_state=None):
        self.measure = measure
        self.noise_matrix = noise_matrix
        self.steps = steps
        self.l2_lambda = l2_lambda
        self.max_iters = max_iters
        self.grad_tol = grad_tol
        self.lr = lr
        self.cv_folds = cv_folds
        self.random_state = random_state

    def _cpe_config(self):
        return TrainConfig(self.l2_lambda, self.max_iters, self.grad_tol, self.lr, self.cv_folds)

    def fit(self, X, y):
        X = check_array(X, dtype=float)
        y = np.asarray(y)
        self.noise_ = noise_from_param(self.noise_matrix, int(np.max(y)) + 1)
        n = self.noise_.n
        self.measure_ = M.monotonic(self.measure, n)
        self.classes_ = np.arange(n)
        rng = np.random.default_rng(self.random_state)
        self.classifier_, self.trace_ = run_ncfw(
            self.measure_, X, y, self.noise_, self.steps, self._cpe_config(), rng
        )
        self.n_features_in_ = X.shape[1]
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "classifier_")
        return self.classifier_.predict_proba(check_array(X, dtype=float))

    def predict(self, X):
        check_is_fitted(self, "classifier_")
        return self.classifier_.predict(check_array(X, dtype=float), np.random.default_rng(self.random_state))
