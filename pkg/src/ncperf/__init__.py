"""Learning multiclass classifiers for non-decomposable performance measures
from labels corrupted by class-conditional noise."""

from .baselines import BackwardCorrectedLR, ForwardCorrectedLR, PluginLR
from .cpe import SoftmaxRegression, TrainConfig
from .data import DEFAULT_SPEC, Dataset, SyntheticSpec
from .measures import MeasureSpec, get_measure
from .ncbs import NCBSClassifier, run_ncbs
from .ncfw import NCFWClassifier, run_ncfw
from .noise import NoiseModel, random_column_ccn, uniform_ccn

__version__ = "0.1.0"

__all__ = [
    "BackwardCorrectedLR",
    "DEFAULT_SPEC",
    "Dataset",
    "ForwardCorrectedLR",
    "MeasureSpec",
    "NCBSClassifier",
    "NCFWClassifier",
    "NoiseModel",
    "PluginLR",
    "SoftmaxRegression",
    "SyntheticSpec",
    "TrainConfig",
    "get_measure",
    "random_column_ccn",
    "run_ncbs",
    "run_ncfw",
    "uniform_ccn",
]
