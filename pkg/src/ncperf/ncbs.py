"""Noise-corrected bisection for ratio-of-linear measures ``<A, C> / <B, C>``.

Each step halves the interval ``[alpha, beta]`` known to bracket the optimal
value, testing the midpoint ``gamma`` with the cost-sensitive classifier for
the corrected loss ``(T^T)^{-1} (A - gamma B)``.
"""

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from . import measures as M
from .confusion import CostSensitiveClassifier, confusion_from_predictions, decide
from .cpe import TrainConfig, train, validate_labels
from .data import Dataset, split_halves
from .exceptions import ConfigError, EmptySample
from .ncfw import noise_from_param, zero_one_loss
from .noise import correct_loss


@dataclass
class BsTrace:
    """Per-step record of a bisection run; arrays are indexed by ``t - 1``.

    ``alpha[t - 1]`` and ``beta[t - 1]`` bound the interval after step ``t``.
    Endpoints are dyadic rationals; ``alpha_exact``/``beta_exact`` keep them
    exactly, since after about 50 halvings the float copies can no longer
    be told apart.
    """

    gamma: np.ndarray
    accepted: np.ndarray
    psi: np.ndarray
    alpha: np.ndarray
    beta: np.ndarray
    alpha_exact: list = field(default_factory=list)
    beta_exact: list = field(default_factory=list)

    @property
    def steps(self):
        return np.arange(1, len(self.gamma) + 1)


def bisection(A, B, P2, y2, noise, steps, cpe=None):
    """Bisection on precomputed class probabilities ``P2`` for labels ``y2``.

    Returns ``(CostSensitiveClassifier, BsTrace)``.
    """
    if steps < 1:
        raise ConfigError("steps must be at least 1")
    if len(y2) == 0:
        raise EmptySample("the confusion-estimation half of the sample is empty")
    n = noise.n
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    inv_t = noise.T_inv.T
    A_corr, B_corr = inv_t @ A, inv_t @ B

    best_loss = correct_loss(noise, zero_one_loss(n))
    alpha, beta = Fraction(0), Fraction(1)
    trace = BsTrace(
        gamma=np.empty(steps), accepted=np.zeros(steps, dtype=bool), psi=np.empty(steps),
        alpha=np.empty(steps), beta=np.empty(steps),
    )
    for t in range(1, steps + 1):
        mid = (alpha + beta) / 2
        gamma = float(mid)
        L = inv_t @ (A - gamma * B)
        Gamma = confusion_from_predictions(y2, decide(P2, L), n)
        num, den = M.ratio_parts(A_corr, B_corr, Gamma, step=t)
        psi = num / den
        if psi <= gamma:
            beta, best_loss = mid, L
            trace.accepted[t - 1] = True
        else:
            alpha = mid
        trace.gamma[t - 1] = gamma
        trace.psi[t - 1] = psi
        trace.alpha[t - 1] = float(alpha)
        trace.beta[t - 1] = float(beta)
        trace.alpha_exact.append(alpha)
        trace.beta_exact.append(beta)
    return CostSensitiveClassifier(cpe, best_loss), trace


def run_ncbs(A, B, X, y, noise, steps=200, cpe_cfg=None, rng=None):
    """Learn a deterministic classifier for ``<A, C> / <B, C>`` from noisy labels.

    Splits and trains exactly as :func:`ncperf.ncfw.run_ncfw`. Raises
    :class:`NonPositiveDenominator` (with ``.step`` set) if a corrected
    confusion has a non-positive denominator.
    """
    X = np.asarray(X, dtype=float)
    y = validate_labels(y, noise.n)
    (X1, y1), (X2, y2) = split_halves(Dataset(X, y))
    seed = None if rng is None else int(rng.integers(2**32))
    cpe = train(X1, y1, noise.n, cpe_cfg or TrainConfig(), random_state=seed)
    return bisection(A, B, cpe.predict_proba(X2), y2, noise, steps, cpe=cpe)


def micro_f1_run(X, y, noise, steps=200, cpe_cfg=None, rng=None):
    """:func:`run_ncbs` for the micro F1 loss; the class count comes from ``noise``."""
    A, B = M.micro_f1_parts(noise.n)
    return run_ncbs(A, B, X, y, noise, steps, cpe_cfg, rng)


class NCBSClassifier(ClassifierMixin, BaseEstimator):
    """Estimator wrapper around :func:`run_ncbs`.

    ``measure`` is ``"microf1"`` or a pair ``(A, B)`` of arrays. Other
    parameters mirror :class:`ncperf.ncfw.NCFWClassifier`.
    """

    def __init__(self, measure="microf1", noise_matrix=None, steps=200, l2_lambda=1e-4,
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

    def fit(self, X, y):
        X = check_array(X, dtype=float)
        y = np.asarray(y)
        self.noise_ = noise_from_param(self.noise_matrix, int(np.max(y)) + 1)
        n = self.noise_.n
        if isinstance(self.measure, str):
            self.measure_ = M.get_measure(self.measure, n)
            if not self.measure_.is_ratio:
                raise ConfigError(f"bisection needs a ratio-of-linear measure, got {self.measure!r}")
        else:
            self.measure_ = M.ratio_of_linear(*self.measure)
        self.classes_ = np.arange(n)
        cfg = TrainConfig(self.l2_lambda, self.max_iters, self.grad_tol, self.lr, self.cv_folds)
        self.classifier_, self.trace_ = run_ncbs(
            self.measure_.A, self.measure_.B, X, y, self.noise_, self.steps, cfg,
            np.random.default_rng(self.random_state),
        )
        self.n_features_in_ = X.shape[1]
        return self

    def predict(self, X):
        check_is_fitted(self, "classifier_")
        return self.classifier_.predict(check_array(X, dtype=float))

    def predict_proba(self, X):
        pred = self.predict(X)
        out = np.zeros((pred.shape[0], len(self.classes_)))
        out[np.arange(pred.shape[0]), pred] = 1.0
        return out
