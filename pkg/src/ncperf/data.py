"""Datasets: synthetic generation, CSV input/output, splitting, and a
reference optimum computed with the true class probabilities."""

import csv
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import NamedTuple

import numpy as np
from scipy.special import softmax

from . import measures as M
from .confusion import confusion_from_predictions
from .exceptions import ConfigError, EmptySample, MissingLabelColumn, ParseError


class Dataset(NamedTuple):
    X: np.ndarray
    y: np.ndarray

    @property
    def m(self):
        return self.y.shape[0]


@dataclass(frozen=True)
class SyntheticSpec:
    """Gaussian-mixture features with softmax-linear class probabilities.

    ``mix_weights`` (k,), ``means`` (k, d) and ``variances`` (k, d) describe
    a mixture of axis-aligned Gaussians; ``eta_weights`` (n, d) and
    ``eta_biases`` (n,) define ``eta(x) = softmax(W x + b)``.
    """

    mix_weights: tuple
    means: tuple
    variances: tuple
    eta_weights: tuple
    eta_biases: tuple

    def __post_init__(self):
        w = np.asarray(self.mix_weights, dtype=float)
        means = np.asarray(self.means, dtype=float)
        var = np.asarray(self.variances, dtype=float)
        W = np.asarray(self.eta_weights, dtype=float)
        b = np.asarray(self.eta_biases, dtype=float)
        if np.any(w < 0) or abs(w.sum() - 1.0) > 1e-9:
            raise ConfigError("mixture weights must lie in the simplex")
        if means.shape != var.shape or means.shape[0] != w.shape[0]:
            raise ConfigError("means and variances must both have shape (components, d)")
        if np.any(var <= 0):
            raise ConfigError("mixture variances must be positive")
        if W.ndim != 2 or W.shape[1] != means.shape[1] or b.shape != (W.shape[0],):
            raise ConfigError("eta weights must be (n, d) and eta biases (n,)")

    @property
    def n(self):
        return len(self.eta_biases)

    @property
    def d(self):
        return len(self.means[0])

    def to_json(self, path):
        Path(path).write_text(json.dumps(asdict(self), indent=2) + "\n")

    @classmethod
    def from_json(cls, path):
        try:
            raw = json.loads(Path(path).read_text())
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}: {exc}") from None
        missing = {"mix_weights", "means", "variances", "eta_weights", "eta_biases"} - raw.keys()
        if missing:
            raise ParseError(f"{path}: missing keys {sorted(missing)}")
        return cls(**{k: _tuples(raw[k]) for k in raw})


def _tuples(v):
    return tuple(_tuples(x) for x in v) if isinstance(v, list) else v


# Three unit-variance blobs on a right angle. Under the pinned eta the label
# prior is roughly (0.25, 0.43, 0.32), so the classes are mildly imbalanced.
DEFAULT_SPEC = SyntheticSpec(
    mix_weights=(1 / 3, 1 / 3, 1 / 3),
    means=((0.0, 0.0), (3.0, 0.0), (0.0, 3.0)),
    variances=((1.0, 1.0), (1.0, 1.0), (1.0, 1.0)),
    eta_weights=((-1.0, -1.0), (1.0, -0.5), (-0.5, 1.0)),
    eta_biases=(1.5, 0.0, -1.0),
)


def true_eta(spec, X):
    """Exact class probabilities; accepts one point or an (m, d) array."""
    X = np.asarray(X, dtype=float)
    single = X.ndim == 1
    scores = np.atleast_2d(X) @ np.asarray(spec.eta_weights).T + np.asarray(spec.eta_biases)
    P = softmax(scores, axis=1)
    return P[0] if single else P


class TrueEta:
    """Adapter exposing :func:`true_eta` through ``predict_proba``."""

    def __init__(self, spec):
        self.spec = spec

    def predict_proba(self, X):
        return true_eta(self.spec, X)


def sample_features(spec, m, rng):
    comp = rng.choice(len(spec.mix_weights), size=m, p=np.asarray(spec.mix_weights))
    means = np.asarray(spec.means)[comp]
    std = np.sqrt(np.asarray(spec.variances))[comp]
    return means + std * rng.standard_normal((m, spec.d))


def sample_labels(P, rng):
    """One categorical draw per row of ``P``."""
    cdf = np.cumsum(P, axis=1)
    cdf[:, -1] = np.inf
    return np.argmax(rng.random(P.shape[0])[:, None] < cdf, axis=1).astype(np.intp)


def gen_synthetic(spec, m, rng):
    if m < 1:
        raise ConfigError("sample size must be at least 1")
    X = sample_features(spec, m, rng)
    return Dataset(X, sample_labels(true_eta(spec, X), rng))


def load_csv(path, label_column="label", drop_columns=("clean_label",), relabel=False):
    """Read a headed CSV of numeric features plus an integer label column.

    ``label_column`` is a column name or a 0-based index. Columns named in
    ``drop_columns`` are ignored. With ``relabel`` the sorted distinct labels
    are mapped to ``0 .. k-1``.
    """
    path = Path(path)
    with path.open(newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or not rows[0]:
        raise ParseError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    if isinstance(label_column, int):
        if not 0 <= label_column < len(header):
            raise MissingLabelColumn(f"{path}: no column index {label_column}")
        label_idx = label_column
    elif label_column in header:
        label_idx = header.index(label_column)
    else:
        raise MissingLabelColumn(f"{path}: no column named {label_column!r} in {header}")
    feat_idx = [i for i, h in enumerate(header) if i != label_idx and h not in drop_columns]
    body = [r for r in rows[1:] if any(tok.strip() for tok in r)]
    if not body:
        raise ParseError(f"{path}: no data rows")
    X = np.empty((len(body), len(feat_idx)))
    y = np.empty(len(body), dtype=np.intp)
    for r, row in enumerate(body, start=2):
        if len(row) != len(header):
            raise ParseError(f"{path}: row {r} has {len(row)} fields, expected {len(header)}")
        for c, i in enumerate(feat_idx):
            try:
                X[r - 2, c] = float(row[i])
            except ValueError:
                raise ParseError(f"{path}: row {r}, column {header[i]!r}: non-numeric value {row[i]!r}") from None
        try:
            label = float(row[label_idx])
        except ValueError:
            label = math.nan
        if not label.is_integer():
            raise ParseError(f"{path}: row {r}, column {header[label_idx]!r}: label {row[label_idx]!r} is not an integer")
        y[r - 2] = int(label)
    if relabel:
        _, y = np.unique(y, return_inverse=True)
        y = y.astype(np.intp)
    return Dataset(X, y)


def write_csv(path, ds, extra=None):
    """Write ``x0..x{d-1}`` feature columns, a ``label`` column, then any
    ``extra`` integer columns given as ``{name: array}``."""
    extra = extra or {}
    d = ds.X.shape[1]
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow([f"x{j}" for j in range(d)] + ["label"] + list(extra))
        cols = list(extra.values())
        for i in range(ds.m):
            w.writerow([repr(float(v)) for v in ds.X[i]] + [int(ds.y[i])] + [int(c[i]) for c in cols])


def split_train_test(ds, ratio, rng):
    """Shuffle and cut into ``round(ratio * m)`` training rows and the rest."""
    if not 0.0 < ratio < 1.0:
        raise ConfigError(f"split ratio must lie in (0, 1), got {ratio}")
    m = ds.m
    if m == 0:
        raise EmptySample("cannot split an empty dataset")
    perm = rng.permutation(m)
    k = int(round(ratio * m))
    a, b = perm[:k], perm[k:]
    return Dataset(ds.X[a], ds.y[a]), Dataset(ds.X[b], ds.y[b])


def split_halves(ds):
    """First ``ceil(m / 2)`` rows and the remainder, order preserved."""
    m = ds.m
    if m < 2:
        raise EmptySample(f"need at least two examples to split into halves, got {m}")
    k = (m + 1) // 2
    return Dataset(ds.X[:k], ds.y[:k]), Dataset(ds.X[k:], ds.y[k:])


def bayes_oracle(spec, measure, eval_points=10**6, rng=None, steps=None, return_classifier=False):
    """Estimate the optimal value of ``measure`` for ``spec``.

    Runs Frank-Wolfe (monotonic measures, default 1000 steps) or bisection
    (ratio-of-linear, default 200 steps) with the exact class probabilities
    and no noise, estimating confusions on ``eval_points`` Monte Carlo draws.
    Returns the value reached at the final iterate.
    """
    from .ncbs import bisection
    from .ncfw import frank_wolfe
    from .noise import identity

    rng = rng if rng is not None else np.random.default_rng(0)
    ds = gen_synthetic(spec, eval_points, rng)
    eta = TrueEta(spec)
    P = eta.predict_proba(ds.X)
    noise = identity(spec.n)
    if measure.is_ratio:
        h, _ = bisection(measure.A, measure.B, P, ds.y, noise, steps or 200, cpe=eta)
        value = M.evaluate(measure, confusion_from_predictions(ds.y, h.predict_from_proba(P), spec.n))
    else:
        h, _, C = frank_wolfe(measure, P, ds.y, noise, steps or 1000, cpe=eta)
        value = M.evaluate(measure, C)
    return (value, h) if return_classifier else value
