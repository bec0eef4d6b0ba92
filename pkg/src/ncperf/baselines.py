"""Comparison methods.

Uncorrected Frank-Wolfe and bisection are the noise-corrected solvers run
with the identity noise model. The logistic-regression baselines reuse the
CPE optimiser with a corrected per-example loss.
"""

import numpy as np
from scipy.special import log_softmax, logsumexp
from sklearn.utils.validation import check_is_fitted

from .confusion import CostSensitiveClassifier
from .cpe import SoftmaxRegression, TrainConfig, train
from .ncbs import run_ncbs
from .ncfw import noise_from_param, run_ncfw, zero_one_loss
from .noise import correct_loss, identity


def run_fw(measure, X, y, steps=5000, cpe_cfg=None, rng=None):
    return run_ncfw(measure, X, y, identity(measure.n), steps, cpe_cfg, rng)


def run_bs(A, B, X, y, steps=200, cpe_cfg=None, rng=None):
    return run_ncbs(A, B, X, y, identity(np.shape(A)[0]), steps, cpe_cfg, rng)


def plugin_classifier(cpe, noise):
    """Predict ``argmax T^{-1} eta(x)`` via the corrected 0-1 loss."""
    return CostSensitiveClassifier(cpe, correct_loss(noise, zero_one_loss(noise.n)))


def backward_loss(K):
    """Per-example loss ``sum_c K[y, c] * (-log p_c)`` with ``K = (T^T)^{-1}``."""

    def loss(logits, y):
        m = logits.shape[0]
        logp = log_softmax(logits, axis=1)
        coef = K[y]
        value = -np.sum(coef * logp) / m
        d = coef.sum(axis=1, keepdims=True) * np.exp(logp) - coef
        return value, d / m

    return loss


def forward_loss(T):
    """Per-example loss ``-log (T p)_y``: cross-entropy of the noisy-label
    prediction pushed through the channel."""
    with np.errstate(divide="ignore"):
        log_T = np.log(T)

    def loss(logits, y):
        m = logits.shape[0]
        logp = log_softmax(logits, axis=1)
        joint = log_T[y] + logp
        log_noisy = logsumexp(joint, axis=1, keepdims=True)
        value = -np.mean(log_noisy)
        d = np.exp(logp) - np.exp(joint - log_noisy)
        return value, d / m

    return loss


class _CorrectedLR(SoftmaxRegression):
    def __init__(self, noise_matrix=None, l2_lambda=1e-4, max_iters=2000, grad_tol=1e-6,
                 lr=1.0, cv_folds=0, random_state=None):
        super().__init__(n_classes=None, l2_lambda=l2_lambda, max_iters=max_iters,
                         grad_tol=grad_tol, lr=lr, cv_folds=cv_folds, random_state=random_state)
        self.noise_matrix = noise_matrix

    def _resolve_classes(self, y):
        self.noise_ = noise_from_param(self.noise_matrix, int(np.max(y)) + 1)
        return self.noise_.n


class BackwardCorrectedLR(_CorrectedLR):
    """Logistic regression trained on backward-corrected losses."""

    def _loss(self):
        return backward_loss(self.noise_.T_inv.T)


class ForwardCorrectedLR(_CorrectedLR):
    """Logistic regression whose softmax output is pushed through ``T``
    before the cross-entropy against noisy labels."""

    def _loss(self):
        return forward_loss(self.noise_.T)


class PluginLR(_CorrectedLR):
    """Plain logistic regression on noisy labels, predicting ``argmax T^{-1} eta``."""

    def predict(self, X):
        check_is_fitted(self, "coef_")
        return plugin_classifier(self, self.noise_).predict(X)


def _config(cfg):
    cfg = cfg or TrainConfig()
    return dict(l2_lambda=cfg.l2_lambda, max_iters=cfg.max_iters, grad_tol=cfg.grad_tolerance,
                lr=cfg.learning_rate, cv_folds=cfg.cv_folds)


def train_backward_lr(X, y, noise, cfg=None, random_state=None):
    return BackwardCorrectedLR(noise, random_state=random_state, **_config(cfg)).fit(X, y)


def train_forward_lr(X, y, noise, cfg=None, random_state=None):
    return ForwardCorrectedLR(noise, random_state=random_state, **_config(cfg)).fit(X, y)


def train_plugin(X, y, noise, cfg=None, random_state=None):
    """Fit a CPE on all of ``(X, y)`` and wrap it as a plug-in classifier."""
    return plugin_classifier(train(X, y, noise.n, cfg, random_state=random_state), noise)
