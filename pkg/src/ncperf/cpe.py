"""Class-probability estimation with L2-regularised multiclass logistic regression.

The optimiser is full-batch proximal gradient descent with an adaptive
backtracking step. The smooth part is the mean per-example loss; the L2
penalty on the weights is handled by its closed-form proximal map, so large
penalties do not force tiny steps on the biases. The per-example loss is
pluggable, which is how the noise-corrected logistic-regression baselines
reuse this optimiser.
"""

import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import log_softmax, softmax
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_array, check_is_fitted

from .exceptions import ConfigError, DegenerateLabels, EmptySample, ShapeMismatch

logger = logging.getLogger(__name__)

LAMBDA_GRID = (1e-2, 1e-3, 1e-4, 1e-5)


@dataclass(frozen=True)
class TrainConfig:
    l2_lambda: float = 1e-4
    max_iters: int = 2000
    grad_tolerance: float = 1e-6
    learning_rate: float = 1.0
    cv_folds: int = 0

    def __post_init__(self):
        if self.l2_lambda < 0:
            raise ConfigError("l2_lambda must be non-negative")
        if self.max_iters < 1:
            raise ConfigError("max_iters must be at least 1")
        if not self.grad_tolerance > 0:
            raise ConfigError("grad_tolerance must be positive")
        if not self.learning_rate > 0:
            raise ConfigError("learning_rate must be positive")
        if self.cv_folds == 1 or self.cv_folds < 0:
            raise ConfigError("cv_folds must be 0 (off) or at least 2")


def cross_entropy_loss(logits, y):
    """Mean softmax cross-entropy and its gradient w.r.t. the logits."""
    m = logits.shape[0]
    logp = log_softmax(logits, axis=1)
    value = -np.mean(logp[np.arange(m), y])
    d = np.exp(logp)
    d[np.arange(m), y] -= 1.0
    return value, d / m


def fit_standardizer(X):
    std = X.std(axis=0)
    varying = std > 0.0
    # zero-variance features pass through untouched
    return np.where(varying, X.mean(axis=0), 0.0), np.where(varying, std, 1.0)


def objective(W, b, Xs, y, l2_lambda, loss=cross_entropy_loss):
    """Regularised training objective and its gradients ``(value, dW, db)``."""
    value, d = loss(Xs @ W.T + b, y)
    value += l2_lambda * np.sum(W * W)
    dW = d.T @ Xs + 2.0 * l2_lambda * W
    db = d.sum(axis=0)
    return value, dW, db


def minimize(Xs, y, n_classes, cfg, loss=cross_entropy_loss, history=None):
    """Fit ``(W, b)`` on standardised features.

    ``history``, when a list, receives the objective value after every
    accepted step (with the starting value first).
    """
    d = Xs.shape[1]
    lam = cfg.l2_lambda
    W = np.zeros((n_classes, d))
    b = np.zeros(n_classes)
    f, gW, gb = _smooth(W, b, Xs, y, loss)
    step = cfg.learning_rate
    if history is not None:
        history.append(f + lam * np.sum(W * W))
    for it in range(cfg.max_iters):
        full_gW = gW + 2.0 * lam * W
        if max(np.max(np.abs(full_gW), initial=0.0), np.max(np.abs(gb))) < cfg.grad_tolerance:
            break
        while True:
            W_new = (W - step * gW) / (1.0 + 2.0 * lam * step)
            b_new = b - step * gb
            f_new, gW_new, gb_new = _smooth(W_new, b_new, Xs, y, loss)
            dW, db = W_new - W, b_new - b
            quad = np.sum(gW * dW) + np.sum(gb * db) + (np.sum(dW * dW) + np.sum(db * db)) / (2.0 * step)
            if f_new <= f + quad + 1e-15 * abs(f):
                break
            step *= 0.5
            if step < 1e-20:
                logger.warning("backtracking stalled at iteration %d", it)
                return W, b
        W, b, f, gW, gb = W_new, b_new, f_new, gW_new, gb_new
        if history is not None:
            history.append(f + lam * np.sum(W * W))
        step *= 2.0
    else:
        logger.debug("optimiser stopped at max_iters=%d", cfg.max_iters)
    return W, b


def _smooth(W, b, Xs, y, loss):
    value, d = loss(Xs @ W.T + b, y)
    return value, d.T @ Xs, d.sum(axis=0)


def validate_labels(y, n_classes):
    y = np.asarray(y)
    if y.size == 0:
        raise EmptySample("empty sample")
    if not np.issubdtype(y.dtype, np.integer):
        if not np.all(np.equal(np.mod(y, 1), 0)):
            raise DegenerateLabels("labels must be integer class indices")
        y = y.astype(np.intp)
    if y.min() < 0 or y.max() >= n_classes:
        raise DegenerateLabels(f"labels must lie in [0, {n_classes - 1}], got range [{y.min()}, {y.max()}]")
    return y.astype(np.intp)


class SoftmaxRegression(ClassifierMixin, BaseEstimator):
    """Linear softmax class-probability estimator.

    Parameters
    ----------
    n_classes : int or None
        Number of classes; inferred as ``max(y) + 1`` when None. Labels are
        class indices ``0 .. n_classes - 1``.
    l2_lambda, max_iters, grad_tol, lr :
        See :class:`TrainConfig`.
    cv_folds : int
        When >= 2, ``l2_lambda`` is replaced by the best value of
        ``LAMBDA_GRID`` under k-fold held-out cross-entropy.
    random_state : int or None
        Seeds the fold assignment only.
    """

    def __init__(self, n_classes=None, l2_lambda=1e-4, max_iters=2000, grad_tol=1e-6,
                 lr=1.0, cv_folds=0, random_state=None):
        self.n_classes = n_classes
        self.l2_lambda = l2_lambda
        self.max_iters = max_iters
        self.grad_tol = grad_tol
        self.lr = lr
        self.cv_folds = cv_folds
        self.random_state = random_state

    def _config(self, l2_lambda=None):
        return TrainConfig(
            l2_lambda=self.l2_lambda if l2_lambda is None else l2_lambda,
            max_iters=self.max_iters,
            grad_tolerance=self.grad_tol,
            learning_rate=self.lr,
            cv_folds=self.cv_folds,
        )

    def _loss(self):
        return cross_entropy_loss

    def _resolve_classes(self, y):
        return self.n_classes if self.n_classes is not None else int(np.max(y)) + 1

    def fit(self, X, y):
        X = check_array(X, dtype=float)
        if X.shape[0] == 0:
            raise EmptySample("empty sample")
        n = self._resolve_classes(y)
        y = validate_labels(y, n)
        if y.shape[0] != X.shape[0]:
            raise ShapeMismatch(f"X has {X.shape[0]} rows but y has {y.shape[0]} labels")
        self.n_classes_ = n
        self.classes_ = np.arange(n)
        self.mean_, self.scale_ = fit_standardizer(X)
        Xs = (X - self.mean_) / self.scale_
        lam = self.l2_lambda
        if self.cv_folds and self.cv_folds >= 2:
            lam = self._select_lambda(Xs, y)
        self.l2_lambda_ = lam
        self.history_ = []
        W, b = minimize(Xs, y, n, self._config(lam), loss=self._loss(), history=self.history_)
        self.coef_, self.intercept_ = W, b
        self.n_features_in_ = X.shape[1]
        return self

    def _select_lambda(self, Xs, y):
        rng = np.random.default_rng(self.random_state)
        folds = rng.permutation(Xs.shape[0]) % self.cv_folds
        scores = []
        for lam in LAMBDA_GRID:
            total = 0.0
            for k in range(self.cv_folds):
                tr, te = folds != k, folds == k
                if not tr.any() or not te.any():
                    continue
                W, b = minimize(Xs[tr], y[tr], self.n_classes_, self._config(lam), loss=self._loss())
                total += self._loss()(Xs[te] @ W.T + b, y[te])[0] * te.sum()
            scores.append(total)
        best = LAMBDA_GRID[int(np.argmin(scores))]
        logger.debug("cross-validated l2_lambda=%g (scores %s)", best, scores)
        return best

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        X = check_array(X, dtype=float)
        if X.shape[1] != self.n_features_in_:
            raise ShapeMismatch(f"expected {self.n_features_in_} features, got {X.shape[1]}")
        return ((X - self.mean_) / self.scale_) @ self.coef_.T + self.intercept_

    def predict_proba(self, X):
        return softmax(self.decision_function(X), axis=1)

    def predict(self, X):
        return np.argmax(self.predict_proba(X), axis=1)

    def objective(self, X, y):
        """Training objective of the fitted parameters on ``(X, y)``."""
        check_is_fitted(self, "coef_")
        Xs = (check_array(X, dtype=float) - self.mean_) / self.scale_
        y = validate_labels(y, self.n_classes_)
        return objective(self.coef_, self.intercept_, Xs, y, self.l2_lambda_, loss=self._loss())[0]


def train(X, y, n_classes, cfg=None, random_state=None):
    """Fit a :class:`SoftmaxRegression` from a :class:`TrainConfig`."""
    cfg = cfg or TrainConfig()
    return SoftmaxRegression(
        n_classes=n_classes,
        l2_lambda=cfg.l2_lambda,
        max_iters=cfg.max_iters,
        grad_tol=cfg.grad_tolerance,
        lr=cfg.learning_rate,
        cv_folds=cfg.cv_folds,
        random_state=random_state,
    ).fit(X, y)
