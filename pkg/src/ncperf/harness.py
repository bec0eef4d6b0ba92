"""Experiment runner behind the command-line interface.

A run draws (or loads) a training sample, corrupts its labels with a noise
matrix, trains one algorithm, and scores it on a clean test set. Results
are flat records written one JSON object per line.
"""

import json
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path

import numpy as np

from . import baselines, data
from . import measures as M
from . import noise as N
from .confusion import RandomizedClassifier, confusion_from_predictions
from .cpe import TrainConfig
from .exceptions import ConfigError, EmptyResults, ParseError
from .ncbs import run_ncbs
from .ncfw import run_ncfw
from .numerics import induced_one_norm, read_matrix_csv, write_matrix_csv

logger = logging.getLogger(__name__)

ALGOS = ("ncfw", "fw", "ncbs", "bs", "plugin", "nclr-backward", "nclr-forward")
NOISE_SCHEMES = ("uniform", "random-column")
DEFAULT_STEPS = {"ncfw": 5000, "fw": 5000, "ncbs": 200, "bs": 200}


@dataclass(frozen=True)
class RunConfig:
    algo: str = "ncfw"
    measure: str = "qmean"
    sigma: float = 0.0
    noise_scheme: str = "uniform"
    noise_matrix: str = None
    noise_matrix_estimate: str = None
    identity_noise: bool = False
    steps: int = None
    seed: int = 0
    m: int = 1000
    m_test: int = 100_000
    train: str = None
    test: str = None
    spec: str = None
    ratio_a: str = None
    ratio_b: str = None
    l2_lambda: float = 1e-4
    cv_folds: int = 0
    max_iters: int = 2000
    grad_tol: float = 1e-6
    lr: float = 1.0

    def __post_init__(self):
        if self.algo not in ALGOS:
            raise ConfigError(f"unknown algo {self.algo!r}; expected one of {', '.join(ALGOS)}")
        if self.noise_scheme not in NOISE_SCHEMES:
            raise ConfigError(f"unknown noise scheme {self.noise_scheme!r}; expected one of {', '.join(NOISE_SCHEMES)}")
        if self.measure not in M.MEASURE_NAMES + ("ratio",):
            raise ConfigError(f"unknown measure {self.measure!r}; expected one of {', '.join(M.MEASURE_NAMES)}")
        if self.measure == "ratio" and not (self.ratio_a and self.ratio_b):
            raise ConfigError("measure 'ratio' needs both --ratio-a and --ratio-b matrix files")
        if self.algo in ("ncfw", "fw") and self.measure not in M.MONOTONIC:
            raise ConfigError(f"{self.algo} needs one of {', '.join(M.MONOTONIC)}, got {self.measure!r}")
        if self.algo in ("ncbs", "bs") and self.measure not in ("microf1", "ratio"):
            raise ConfigError(f"{self.algo} needs a ratio-of-linear measure (microf1), got {self.measure!r}")
        if self.steps is not None and self.steps < 1:
            raise ConfigError("steps must be at least 1")
        if (self.train is None) != (self.test is None):
            raise ConfigError("--train and --test must be given together")
        if self.train is None and self.m < 2:
            raise ConfigError("m must be at least 2")

    @property
    def effective_steps(self):
        if self.steps is not None:
            return self.steps
        return DEFAULT_STEPS.get(self.algo, 0)

    @property
    def noise_label(self):
        return self.noise_matrix if self.noise_matrix else self.noise_scheme

    def cpe_config(self):
        return TrainConfig(self.l2_lambda, self.max_iters, self.grad_tol, self.lr, self.cv_folds)


@dataclass
class RunResult:
    algo: str
    measure: str
    sigma: float
    noise: str
    m: int
    steps: int
    seed: int
    clean_test_loss: float
    noisy_test_loss: float
    one_norm_of_T_inv: float
    estimate_inv_error: float
    m_test: int
    wall_ms: int

    def to_json(self):
        return json.dumps(asdict(self), sort_keys=True, allow_nan=True)


def _streams(seed):
    names = ("data", "noise", "flip", "test_flip", "algo")
    children = np.random.SeedSequence(seed).spawn(len(names))
    return {k: np.random.default_rng(s) for k, s in zip(names, children)}


def load_spec(path):
    return data.SyntheticSpec.from_json(path) if path else data.DEFAULT_SPEC


def resolve_noise(cfg, n, rng):
    """True noise model of the run."""
    if cfg.noise_matrix:
        model = N.build(read_matrix_csv(cfg.noise_matrix))
        if model.n != n:
            raise ConfigError(f"noise matrix is {model.n}x{model.n} but the data has {n} classes")
        return model
    if cfg.noise_scheme == "uniform":
        return N.uniform_ccn(n, cfg.sigma)
    return N.random_column_ccn(n, cfg.sigma, rng)


def make_synthetic(cfg):
    """Draw the synthetic experiment of ``cfg``.

    Returns ``(train, clean_train_labels, test, noise)`` where ``train``
    carries the noisy labels and ``test`` the clean ones.
    """
    spec = load_spec(cfg.spec)
    rngs = _streams(cfg.seed)
    clean = data.gen_synthetic(spec, cfg.m, rngs["data"])
    test = data.gen_synthetic(spec, cfg.m_test, rngs["data"])
    noise = resolve_noise(cfg, spec.n, rngs["noise"])
    noisy = data.Dataset(clean.X, N.flip_labels(clean.y, noise, rngs["flip"]))
    return noisy, clean.y, test, noise


def _correction_model(cfg, noise):
    if cfg.algo in ("fw", "bs") or cfg.identity_noise:
        return N.identity(noise.n), 0.0
    if cfg.noise_matrix_estimate:
        est = N.build(read_matrix_csv(cfg.noise_matrix_estimate))
        if est.n != noise.n:
            raise ConfigError(f"estimated noise matrix is {est.n}x{est.n}, expected {noise.n}x{noise.n}")
        return est, induced_one_norm(est.T_inv - noise.T_inv)
    return noise, 0.0


def _measure(cfg, n):
    if cfg.measure == "ratio":
        return M.ratio_of_linear(read_matrix_csv(cfg.ratio_a), read_matrix_csv(cfg.ratio_b))
    return M.get_measure(cfg.measure, n)


def fit_algorithm(cfg, measure, X, y, correction, rng):
    """Train ``cfg.algo``; returns a classifier with ``predict`` (and, for
    Frank-Wolfe, a randomized mixture)."""
    cpe_cfg = cfg.cpe_config()
    steps = cfg.effective_steps
    seed = int(rng.integers(2**32))
    if cfg.algo in ("ncfw", "fw"):
        return run_ncfw(measure, X, y, correction, steps, cpe_cfg, rng)[0]
    if cfg.algo in ("ncbs", "bs"):
        return run_ncbs(measure.A, measure.B, X, y, correction, steps, cpe_cfg, rng)[0]
    if cfg.algo == "plugin":
        return baselines.train_plugin(X, y, correction, cpe_cfg, random_state=seed)
    if cfg.algo == "nclr-backward":
        return baselines.train_backward_lr(X, y, correction, cpe_cfg, random_state=seed)
    return baselines.train_forward_lr(X, y, correction, cpe_cfg, random_state=seed)


def score(clf, measure, X, labelings, n):
    """Measure value of ``clf`` against each label vector in ``labelings``.

    Randomized classifiers are scored by their exact expected confusion.
    """
    if isinstance(clf, RandomizedClassifier):
        H = clf.predict_proba(X)
        confusions = []
        for y in labelings:
            C = np.zeros((n, n))
            np.add.at(C, y, H)
            confusions.append(C / len(y))
    else:
        pred = clf.predict(X)
        confusions = [confusion_from_predictions(y, pred, n) for y in labelings]
    return [M.evaluate(measure, C) for C in confusions]


def run_experiment(cfg):
    """Run one configuration and return its :class:`RunResult`."""
    start = time.perf_counter()
    rngs = _streams(cfg.seed)
    if cfg.train:
        train = data.load_csv(cfg.train)
        test = data.load_csv(cfg.test)
        n = int(max(train.y.max(), test.y.max())) + 1
        if cfg.noise_matrix:
            n = max(n, read_matrix_csv(cfg.noise_matrix).shape[0])
        noise = resolve_noise(cfg, n, rngs["noise"])
        m = train.m
    else:
        train, _, test, noise = make_synthetic(cfg)
        n, m = noise.n, cfg.m
    measure = _measure(cfg, n)
    correction, inv_error = _correction_model(cfg, noise)
    clf = fit_algorithm(cfg, measure, train.X, train.y, correction, rngs["algo"])
    noisy_test_y = N.flip_labels(test.y, noise, rngs["test_flip"])
    clean_loss, noisy_loss = score(clf, measure, test.X, [test.y, noisy_test_y], n)
    return RunResult(
        algo=cfg.algo,
        measure=cfg.measure,
        sigma=cfg.sigma,
        noise=cfg.noise_label,
        m=m,
        steps=cfg.effective_steps,
        seed=cfg.seed,
        clean_test_loss=clean_loss,
        noisy_test_loss=noisy_loss,
        one_norm_of_T_inv=noise.one_norm_of_inv,
        estimate_inv_error=inv_error,
        m_test=test.m,
        wall_ms=int(round((time.perf_counter() - start) * 1000)),
    )


def write_synthetic(cfg, out_dir):
    """Write ``train.csv`` (noisy ``label`` plus ``clean_label``), ``test.csv``
    (clean labels), ``noise_matrix.csv`` and ``spec.json`` into ``out_dir``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    train, clean_y, test, noise = make_synthetic(cfg)
    data.write_csv(out / "train.csv", train, extra={"clean_label": clean_y})
    data.write_csv(out / "test.csv", test)
    write_matrix_csv(out / "noise_matrix.csv", noise.T)
    load_spec(cfg.spec).to_json(out / "spec.json")
    return [out / "train.csv", out / "test.csv", out / "noise_matrix.csv", out / "spec.json"]


RECORD_KEY = ("algo", "measure", "sigma", "noise", "m", "steps", "seed")


def record_key(rec):
    return tuple(rec[k] for k in RECORD_KEY)


def sweep_configs(base, algos_measures, sigmas, ms, seeds):
    """Cross product of the grids, algo/measure pairs varying slowest."""
    return [
        replace(base, algo=algo, measure=measure, sigma=sigma, m=m, seed=seed)
        for algo, measure in algos_measures
        for sigma in sigmas
        for m in ms
        for seed in seeds
    ]


def _config_key(cfg):
    return (cfg.algo, cfg.measure, cfg.sigma, cfg.noise_label, cfg.m, cfg.effective_steps, cfg.seed)


def _run_to_json(cfg):
    return run_experiment(cfg).to_json()


def read_records(path):
    path = Path(path)
    if not path.exists():
        return []
    records = []
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        if not line.strip():
            continue
        try:
            records.append(json.loads(line))
        except json.JSONDecodeError as exc:
            raise ParseError(f"{path}:{lineno}: {exc}") from None
    return records


def run_sweep(configs, out_path, jobs=1):
    """Run every configuration not yet recorded in ``out_path``.

    Records are appended in grid order by this process only; workers just
    compute. Returns the number of new records.
    """
    out_path = Path(out_path)
    done = {record_key(r) for r in read_records(out_path)}
    todo = [c for c in configs if _config_key(c) not in done]
    logger.info("%d of %d runs already recorded", len(configs) - len(todo), len(configs))
    if not todo:
        return 0
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("a") as fh:
        if jobs > 1:
            with ProcessPoolExecutor(max_workers=jobs) as pool:
                for line in pool.map(_run_to_json, todo):
                    fh.write(line + "\n")
                    fh.flush()
        else:
            for cfg in todo:
                fh.write(_run_to_json(cfg) + "\n")
                fh.flush()
    return len(todo)


def summarize(records, value="clean_test_loss"):
    """Mean and standard error of ``value`` per (algo, measure, sigma, m).

    Rows are sorted by (measure, algo, sigma, m); the standard error is the
    sample standard deviation over ``sqrt(k)``, and 0 for a single record.
    """
    if not records:
        raise EmptyResults("no result records to summarize")
    groups = {}
    for rec in records:
        groups.setdefault((rec["algo"], rec["measure"], rec["sigma"], rec["m"]), []).append(rec[value])
    rows = []
    for (algo, measure, sigma, m), vals in groups.items():
        v = np.asarray(vals, dtype=float)
        sem = float(np.std(v, ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
        rows.append(dict(measure=measure, algo=algo, sigma=sigma, m=m, k=len(v), mean=float(v.mean()), sem=sem))
    rows.sort(key=lambda r: (r["measure"], r["algo"], r["sigma"], r["m"]))
    return rows
