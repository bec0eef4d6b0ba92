import numpy as np
import pytest

from ncperf.confusion import (
    CostSensitiveClassifier, RandomizedClassifier, classify, confusion_from_predictions, decide,
    empirical_confusion, expected_confusion, mixture_proba,
)
from ncperf.exceptions import EmptySample, ShapeMismatch
from ncperf.noise import correct_loss, identity


class FixedProba:
    def __init__(self, P):
        self.P = np.asarray(P, dtype=float)

    def predict_proba(self, X):
        return self.P[np.asarray(X, dtype=int)[:, 0]]


class Constant:
    """Deterministic classifier that always predicts ``k``."""

    n_classes = 3

    def __init__(self, k):
        self.k = k
        self.cpe = FixedProba(np.eye(3))
        self.loss = np.ones((3, 3))
        self.loss[:, k] = 0.0

    def predict(self, X):
        return np.full(len(X), self.k)


ZERO_ONE = 1 - np.eye(3)


def test_decide_examples():
    P = np.array([[0.2, 0.5, 0.3]])
    assert decide(P, ZERO_ONE)[0] == 1
    assert decide(P, np.ones((3, 3)))[0] == 0
    assert decide(P, correct_loss(identity(3), ZERO_ONE))[0] == 1


def test_classify_single_point():
    clf = CostSensitiveClassifier(FixedProba([[0.1, 0.1, 0.8]]), ZERO_ONE)
    assert classify(clf, [0]) == 2
    with pytest.raises(ShapeMismatch):
        CostSensitiveClassifier(FixedProba([[0.5, 0.5]]), ZERO_ONE).predict([[0]])


def test_empirical_confusion_examples():
    np.testing.assert_array_equal(confusion_from_predictions([0, 1], [0, 0], 2), [[0.5, 0], [0.5, 0]])
    np.testing.assert_array_equal(confusion_from_predictions([0, 1], [0, 1], 2), np.diag([0.5, 0.5]))
    with pytest.raises(EmptySample):
        confusion_from_predictions([], [], 2)
    with pytest.raises(ShapeMismatch):
        confusion_from_predictions([0, 1], [0], 2)


def test_empirical_confusion_matches_enumeration():
    # full support {0..3} with multiplicities 1, 2, 3, 4
    X = np.repeat(np.arange(4), [1, 2, 3, 4])[:, None]
    y = np.array([0, 1, 1, 2, 2, 0, 1, 1, 1, 2])
    P = np.array([[0.6, 0.3, 0.1], [0.1, 0.8, 0.1], [0.2, 0.2, 0.6], [0.3, 0.5, 0.2]])
    clf = CostSensitiveClassifier(FixedProba(P), ZERO_ONE)
    C = empirical_confusion(clf, X, y, 3)
    expected = np.zeros((3, 3))
    for x, label in zip(X[:, 0], y):
        expected[label, np.argmax(P[x])] += 0.1
    np.testing.assert_allclose(C, expected, atol=1e-15)
    assert C.sum() == pytest.approx(1.0, abs=1e-15)


def test_expected_confusion_examples():
    X = np.zeros((4, 1), dtype=int)
    y = np.array([0, 1, 2, 0])
    one = RandomizedClassifier([(1.0, Constant(1))])
    np.testing.assert_array_equal(expected_confusion(one, X, y), empirical_confusion(Constant(1), X, y, 3))
    twice = RandomizedClassifier([(0.3, Constant(2)), (0.7, Constant(2))])
    np.testing.assert_allclose(expected_confusion(twice, X, y), empirical_confusion(Constant(2), X, y, 3))
    y_bal = np.array([0, 1, 0, 1])
    half = RandomizedClassifier([(0.5, Constant(0)), (0.5, Constant(1))])
    np.testing.assert_allclose(expected_confusion(half, X, y_bal).sum(axis=0), [0.5, 0.5, 0.0])
    with pytest.raises(EmptySample):
        expected_confusion(half, X[:0], y[:0])


def random_mixture(rng, k, cpe):
    w = rng.dirichlet(np.ones(k))
    return [(wi, CostSensitiveClassifier(cpe, rng.normal(size=(3, 3)))) for wi in w]


def test_expected_confusion_affine_in_weights(rng):
    m = 200
    cpe = FixedProba(rng.dirichlet(np.ones(3), size=m))
    X, y = np.arange(m)[:, None], rng.integers(0, 3, size=m)
    comps = random_mixture(rng, 6, cpe)
    single = [empirical_confusion(c, X, y, 3) for _, c in comps]
    expected = sum(w * C for (w, _), C in zip(comps, single))
    np.testing.assert_allclose(expected_confusion(RandomizedClassifier(comps), X, y), expected, atol=1e-12)


def test_mixture_proba_matches_loop_and_tiling(rng):
    P = rng.dirichlet(np.ones(3), size=500)
    losses = rng.normal(size=(40, 3, 3))
    losses[3] = 1.0  # all ties: always label 0
    w = rng.dirichlet(np.ones(40))
    direct = sum(wk * np.eye(3)[decide(P, L)] for wk, L in zip(w, losses))
    np.testing.assert_allclose(mixture_proba(P, losses, w), direct, atol=1e-12)
    np.testing.assert_allclose(mixture_proba(P, losses, w, row_block=37, comp_block=7), direct, atol=1e-12)


def test_sampling_approximates_expectation(rng):
    m = 100_000
    cpe = FixedProba(rng.dirichlet(np.ones(3), size=50))
    X, y = rng.integers(0, 50, size=m)[:, None], rng.integers(0, 3, size=m)
    h = RandomizedClassifier(random_mixture(rng, 5, cpe))
    sampled = confusion_from_predictions(y, h.predict(X, rng), 3)
    assert np.max(np.abs(sampled - expected_confusion(h, X, y))) <= 0.01


def test_randomized_classifier_validation():
    with pytest.raises(ValueError):
        RandomizedClassifier([(0.5, Constant(0)), (0.4, Constant(1))])
    h = RandomizedClassifier([(0.0, Constant(0)), (1.0, Constant(1))])
    assert len(h.components) == 1 and h.n_classes == 3
