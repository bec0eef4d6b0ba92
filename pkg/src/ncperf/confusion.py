"""Cost-sensitive classifiers, their mixtures, and empirical confusion matrices."""

import numpy as np

from .exceptions import EmptySample, ShapeMismatch
from .numerics import as_matrix

MIN_COMPONENT_WEIGHT = 1e-12


def decide(P, loss):
    """Row-wise ``argmin_y P[i] @ loss[:, y]``; ties go to the smallest index."""
    return np.argmin(P @ loss, axis=1)


class CostSensitiveClassifier:
    """Deterministic classifier minimising expected loss under a CPE.

    ``loss[y, k]`` is the cost of predicting ``k`` when the label is ``y``;
    an instance gets the ``k`` minimising ``cpe.predict_proba(x) @ loss[:, k]``.
    """

    def __init__(self, cpe, loss):
        self.cpe = cpe
        self.loss = as_matrix(loss, "loss matrix")

    @property
    def n_classes(self):
        return self.loss.shape[1]

    def predict_from_proba(self, P):
        P = np.asarray(P, dtype=float)
        if P.shape[1] != self.loss.shape[0]:
            raise ShapeMismatch(f"probabilities have {P.shape[1]} classes, loss has {self.loss.shape[0]} rows")
        return decide(P, self.loss)

    def predict(self, X):
        return self.predict_from_proba(self.cpe.predict_proba(X))

    def __repr__(self):
        return f"CostSensitiveClassifier(n_classes={self.n_classes})"


def classify(clf, x):
    """Predicted class of a single feature vector."""
    return int(clf.predict(np.asarray(x, dtype=float).reshape(1, -1))[0])


class RandomizedClassifier:
    """Convex combination of deterministic classifiers.

    For an instance ``x`` the mixture predicts component ``k``'s label with
    probability ``weights[k]``.
    """

    def __init__(self, components):
        kept = [(float(w), c) for w, c in components if w >= MIN_COMPONENT_WEIGHT]
        if not kept:
            raise ValueError("randomized classifier needs at least one component with positive weight")
        weights = np.array([w for w, _ in kept])
        if abs(weights.sum() - 1.0) > 1e-9:
            raise ValueError(f"component weights sum to {weights.sum():.12g}, not 1")
        self.weights = weights
        self.classifiers = [c for _, c in kept]

    @property
    def components(self):
        return list(zip(self.weights.tolist(), self.classifiers))

    @property
    def n_classes(self):
        return self.classifiers[0].n_classes

    def predict_proba(self, X):
        """Probability of each label under the mixture, shape (m, n)."""
        probs = {}
        groups = {}
        for k, clf in enumerate(self.classifiers):
            if id(clf.cpe) not in probs:
                probs[id(clf.cpe)] = clf.cpe.predict_proba(X)
            groups.setdefault(id(clf.cpe), []).append(k)
        out = 0.0
        for key, idx in groups.items():
            losses = np.stack([self.classifiers[k].loss for k in idx])
            out = out + mixture_proba(probs[key], losses, self.weights[idx])
        return out

    def predict(self, X, rng=None):
        """Draw one label per instance from the mixture."""
        rng = rng if rng is not None else np.random.default_rng()
        P = self.predict_proba(X)
        cdf = np.cumsum(P, axis=1)
        cdf[:, -1] = np.inf
        return np.argmax(rng.random(P.shape[0])[:, None] < cdf, axis=1)


def mixture_proba(P, losses, weights, row_block=4096, comp_block=256):
    """Label distribution of a mixture of cost-sensitive rules sharing ``P``.

    ``losses`` has shape (k, n, n) and ``weights`` shape (k,). Work is tiled
    so intermediate (rows x components) arrays stay small.
    """
    m, n = P.shape
    cols = [np.ascontiguousarray(losses[:, :, j].T) for j in range(n)]
    out = np.zeros((m, n))
    for r in range(0, m, row_block):
        Pr = P[r:r + row_block]
        for c in range(0, len(weights), comp_block):
            best = Pr @ cols[0][:, c:c + comp_block]
            label = np.zeros(best.shape, dtype=np.int16)
            # strict comparison keeps ties on the smallest label
            for j in range(1, n):
                s_j = Pr @ cols[j][:, c:c + comp_block]
                better = s_j < best
                np.copyto(best, s_j, where=better)
                label[better] = j
            w = weights[c:c + comp_block]
            for j in range(n):
                out[r:r + row_block, j] += (label == j) @ w
    return out


def confusion_from_predictions(y, pred, n):
    """Joint frequencies of ``(label, prediction)`` as an n x n matrix."""
    y = np.asarray(y, dtype=np.intp)
    pred = np.asarray(pred, dtype=np.intp)
    m = y.shape[0]
    if m == 0:
        raise EmptySample("cannot estimate a confusion matrix from an empty sample")
    if pred.shape[0] != m:
        raise ShapeMismatch(f"{m} labels but {pred.shape[0]} predictions")
    counts = np.bincount(y * n + pred, minlength=n * n)
    return counts.reshape(n, n) / m


def empirical_confusion(clf, X, y, n=None):
    n = clf.n_classes if n is None else n
    if len(y) == 0:
        raise EmptySample("cannot estimate a confusion matrix from an empty sample")
    return confusion_from_predictions(y, clf.predict(X), n)


def expected_confusion(h, X, y, n=None):
    """Confusion of a randomized classifier, averaged exactly over its components."""
    n = h.n_classes if n is None else n
    y = np.asarray(y, dtype=np.intp)
    if y.shape[0] == 0:
        raise EmptySample("cannot estimate a confusion matrix from an empty sample")
    H = h.predict_proba(X)
    C = np.zeros((n, n))
    np.add.at(C, y, H)
    return C / y.shape[0]
