from fractions import Fraction

import numpy as np
import pytest
from sklearn.base import clone

from ncperf import measures as M
from ncperf.data import DEFAULT_SPEC, gen_synthetic
from ncperf.exceptions import NonPositiveDenominator
from ncperf.ncbs import NCBSClassifier, bisection, micro_f1_run, run_ncbs
from ncperf.noise import correct_loss, flip_labels, identity, uniform_ccn


@pytest.fixture(scope="module")
def noisy_sample():
    rng = np.random.default_rng(4)
    ds = gen_synthetic(DEFAULT_SPEC, 3000, rng)
    noise = uniform_ccn(3, 0.3)
    return ds.X, flip_labels(ds.y, noise, rng), noise


@pytest.fixture(scope="module")
def run(noisy_sample):
    X, y, noise = noisy_sample
    return micro_f1_run(X, y, noise, steps=60)


def test_interval_halves_exactly(run):
    _, trace = run
    for t, a, b in zip(trace.steps, trace.alpha_exact, trace.beta_exact):
        assert b - a == Fraction(1, 2 ** int(t))
    early = trace.steps <= 40
    np.testing.assert_array_equal((trace.beta - trace.alpha)[early], 2.0 ** -trace.steps[early])


def test_interval_monotone(run):
    _, trace = run
    assert np.all(np.diff(trace.alpha) >= 0)
    assert np.all(np.diff(trace.beta) <= 0)
    assert np.all(trace.alpha < trace.beta)


def test_returns_last_accepted(noisy_sample, run):
    X, y, noise = noisy_sample
    clf, trace = run
    A, B = M.micro_f1_parts(3)
    t = np.flatnonzero(trace.accepted)[-1]
    expected = noise.T_inv.T @ (A - trace.gamma[t] * B)
    np.testing.assert_array_equal(clf.loss, expected)


def test_no_acceptance_returns_plugin():
    P = np.eye(3)[[0, 1, 2, 1]]
    y = np.array([0, 1, 2, 1])
    # impossible target: numerator always exceeds gamma * denominator
    A, B = np.ones((3, 3)), np.full((3, 3), 0.5)
    clf, trace = bisection(A, B, P, y, identity(3), steps=5)
    assert not trace.accepted.any()
    np.testing.assert_array_equal(clf.loss, correct_loss(identity(3), 1 - np.eye(3)))


def test_matches_explicit_parts(noisy_sample, run):
    X, y, noise = noisy_sample
    A, B = M.micro_f1_parts(3)
    clf, trace = run_ncbs(A, B, X, y, noise, steps=60)
    np.testing.assert_array_equal(trace.gamma, run[1].gamma)
    np.testing.assert_array_equal(clf.loss, run[0].loss)


def test_separable_reaches_small_loss():
    rng = np.random.default_rng(0)
    y = rng.integers(0, 3, size=2000)
    X = np.eye(3)[y] * 10 + rng.normal(scale=0.5, size=(2000, 3))
    _, trace = micro_f1_run(X, y, identity(3), steps=200)
    assert trace.alpha[-1] <= 0.05


def test_nonpositive_denominator_reports_step():
    # a single-class held-out half whose every prediction is the negative class
    P = np.tile([1.0, 0.0], (4, 1))
    y = np.zeros(4, dtype=int)
    A, B = M.micro_f1_parts(2)
    with pytest.raises(NonPositiveDenominator) as err:
        bisection(A, B, P, y, identity(2), steps=3)
    assert err.value.step == 1


def test_deterministic(noisy_sample, run):
    X, y, noise = noisy_sample
    again = micro_f1_run(X, y, noise, steps=60)
    np.testing.assert_array_equal(again[1].psi, run[1].psi)


def test_estimator(noisy_sample):
    X, y, noise = noisy_sample
    est = NCBSClassifier(noise_matrix=noise.T, steps=30)
    assert clone(est).get_params()["measure"] == "microf1"
    est.fit(X, y)
    P = est.predict_proba(X[:20])
    np.testing.assert_array_equal(P.argmax(axis=1), est.predict(X[:20]))
    custom = NCBSClassifier(measure=M.micro_f1_parts(3), noise_matrix=noise.T, steps=30).fit(X, y)
    np.testing.assert_array_equal(custom.predict(X), est.predict(X))
    with pytest.raises(Exception):
        NCBSClassifier(measure="qmean").fit(X, y)
