"""Performance measures of confusion matrices, in loss form (lower is better).

Two families are supported:

* monotonic convex measures (``hmean``, ``qmean``, ``gmean``), evaluated
  through per-class recalls and differentiated analytically;
* ratio-of-linear measures ``<A, C> / <B, C>`` such as micro F1.

Recall computations clamp row sums below by ``EPS`` and recalls into
``[EPS, 1]`` so that noise-corrected confusions, which can carry small
negative entries, stay inside the domain.
"""

from dataclasses import dataclass

import numpy as np

from .exceptions import ConfigError, NonPositiveDenominator, ShapeMismatch
from .numerics import as_matrix

EPS = 1e-8

MONOTONIC = ("hmean", "qmean", "gmean")
MEASURE_NAMES = MONOTONIC + ("microf1",)


@dataclass(frozen=True, eq=False)
class MeasureSpec:
    """A performance measure over ``n x n`` confusion matrices.

    For monotonic convex measures ``name`` selects the formula and ``A``/``B``
    are ``None``; ratio-of-linear measures carry both matrices.
    """

    name: str
    n: int
    A: np.ndarray = None
    B: np.ndarray = None

    @property
    def is_ratio(self):
        return self.A is not None

    @property
    def is_monotonic(self):
        return self.name in MONOTONIC and self.A is None


def monotonic(name, n):
    if name not in MONOTONIC:
        raise ConfigError(f"unknown monotonic convex measure {name!r}; expected one of {MONOTONIC}")
    return MeasureSpec(name=name, n=int(n))


def ratio_of_linear(A, B, name="ratio"):
    A = as_matrix(A, "A")
    B = as_matrix(B, "B")
    if A.shape != B.shape or A.shape[0] != A.shape[1]:
        raise ShapeMismatch(f"A {A.shape} and B {B.shape} must be equal square shapes")
    return MeasureSpec(name=name, n=A.shape[0], A=A, B=B)


def micro_f1_parts(n):
    """Linear parts ``(A, B)`` of the micro F1 loss with class 0 as negative.

    ``B[i, j] = 2 - [i == 0] - [j == 0]`` uses ``sum(C) == 1`` to write the
    constant 2 as ``2 * sum(C)``; ``A`` subtracts ``2 * C[i, i]`` for i >= 1.
    """
    if n < 2:
        raise ConfigError("micro F1 needs at least two classes")
    ind = np.zeros(n)
    ind[0] = 1.0
    B = 2.0 - ind[:, None] - ind[None, :]
    A = B - 2.0 * np.diag(1.0 - ind)
    return A, B


def micro_f1(n):
    A, B = micro_f1_parts(n)
    return ratio_of_linear(A, B, name="microf1")


def get_measure(name, n):
    """Look up a measure by its command-line name."""
    if name == "microf1":
        return micro_f1(n)
    if name in MONOTONIC:
        return monotonic(name, n)
    raise ConfigError(f"unknown measure {name!r}; expected one of {MEASURE_NAMES}")


def _check(measure, C):
    C = np.asarray(C, dtype=float)
    if C.shape != (measure.n, measure.n):
        raise ShapeMismatch(f"confusion shape {C.shape} does not match measure n={measure.n}")
    return C


def _recalls(C):
    R = np.maximum(C.sum(axis=1), EPS)
    r = np.clip(np.diag(C) / R, EPS, 1.0)
    return r, R


def _value_from_recalls(name, r):
    n = r.shape[0]
    if name == "hmean":
        return 1.0 - n / np.sum(1.0 / r)
    if name == "qmean":
        return np.sqrt(np.mean((1.0 - r) ** 2))
    if name == "gmean":
        return 1.0 - np.exp(np.mean(np.log(r)))
    raise ConfigError(f"{name!r} is not a monotonic convex measure")


def ratio_parts(A, B, C, step=None):
    num = float(np.sum(A * C))
    den = float(np.sum(B * C))
    if not den > 0.0:
        where = "" if step is None else f" at step {step}"
        raise NonPositiveDenominator(f"<B, C> = {den:.6g} is not positive{where}", step=step)
    return num, den


def evaluate(measure, C):
    """Loss-form value of ``measure`` at confusion ``C``."""
    C = _check(measure, C)
    if measure.is_ratio:
        num, den = ratio_parts(measure.A, measure.B, C)
        return num / den
    r, _ = _recalls(C)
    return float(_value_from_recalls(measure.name, r))


def gradient(measure, C):
    """Analytic gradient of a monotonic convex measure w.r.t. ``C``.

    The gradient is taken at the clamped point: recalls are held in
    ``[EPS, 1]`` and row sums at least ``EPS``. For Q-mean the zero matrix
    is returned at a zero loss.
    """
    if not measure.is_monotonic:
        raise ConfigError(f"gradient is only defined for {MONOTONIC}, not {measure.name!r}")
    C = _check(measure, C)
    n = measure.n
    r, R = _recalls(C)
    if measure.name == "hmean":
        s = np.sum(1.0 / r)
        d_r = -n / (s * s * r * r)
    elif measure.name == "qmean":
        psi = np.sqrt(np.mean((1.0 - r) ** 2))
        if psi == 0.0:
            return np.zeros((n, n))
        d_r = -(1.0 - r) / (n * psi)
    else:
        g = np.exp(np.mean(np.log(r)))
        d_r = -g / (n * r)
    # r_i = C_ii / R_i; derivatives evaluated at the clamped (r, R)
    grad = (-d_r * r / R)[:, None] * np.ones((1, n))
    grad[np.diag_indices(n)] = d_r * (1.0 - r) / R
    return grad


def evaluate_corrected(measure, noise, C_noisy):
    """Value of the noise-corrected measure ``psi(T^{-1} C_noisy)``.

    Ratio-of-linear measures use the corrected linear forms
    ``<(T^T)^{-1} A, C> / <(T^T)^{-1} B, C>`` with no clamping.
    """
    C_noisy = _check(measure, C_noisy)
    if measure.is_ratio:
        inv_t = noise.T_inv.T
        num, den = ratio_parts(inv_t @ measure.A, inv_t @ measure.B, C_noisy)
        return num / den
    return evaluate(measure, noise.T_inv @ C_noisy)
