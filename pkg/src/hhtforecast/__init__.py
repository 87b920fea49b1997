"""Hybrid short-term forecasting for non-stationary power-system series.

The pipeline decomposes each input into intrinsic mode functions, derives
instantaneous amplitude/frequency attributes, ranks the lagged components
with random-forest and boosted-tree importances, prunes weak features, and
fits per-horizon SVR or RBF-network forecasters next to naive baselines.
"""

from .baselines import MetricsReport, exp_smoothing, metrics, persistence
from .config import PipelineConfig, config_from_dict, load_config
from .emd import EmdConfig, EmdResult, decompose, envelope, find_extrema, sift_once
from .errors import ConfigError, ConvergenceError, DataError
from .features import FeatureColumn, FeatureMatrix, build_matrix, prune_by_importance
from .forest import (
    ForestModel,
    ImportanceReport,
    TreeNode,
    fit_gbt,
    fit_random_forest,
    fit_tree,
    importance,
    predict,
)
from .pipeline import (
    ModelBundle,
    Workspace,
    run_cv,
    run_decompose,
    run_evaluate,
    run_forecast,
    run_rank,
    run_train,
)
from .rbfnet import RbfNetwork, fit_rbf, kmeans, predict_rbf
from .series_io import NormParams, TimeSeries, load_csv, normalize, split_holdout
from .spectral import InstAttributes, analytic_signal, fft, ifft, inst_attributes
from .svr import KernelSpec, SvrModel, fit_svr, kernel_eval, predict_svr

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "ConvergenceError",
    "DataError",
    "EmdConfig",
    "EmdResult",
    "FeatureColumn",
    "FeatureMatrix",
    "ForestModel",
    "ImportanceReport",
    "InstAttributes",
    "KernelSpec",
    "MetricsReport",
    "ModelBundle",
    "NormParams",
    "PipelineConfig",
    "RbfNetwork",
    "SvrModel",
    "TimeSeries",
    "TreeNode",
    "Workspace",
    "analytic_signal",
    "build_matrix",
    "config_from_dict",
    "decompose",
    "envelope",
    "exp_smoothing",
    "fft",
    "find_extrema",
    "fit_gbt",
    "fit_random_forest",
    "fit_rbf",
    "fit_svr",
    "fit_tree",
    "ifft",
    "importance",
    "inst_attributes",
    "kernel_eval",
    "kmeans",
    "load_config",
    "load_csv",
    "metrics",
    "normalize",
    "persistence",
    "predict",
    "predict_rbf",
    "predict_svr",
    "prune_by_importance",
    "run_cv",
    "run_decompose",
    "run_evaluate",
    "run_forecast",
    "run_rank",
    "run_train",
    "sift_once",
    "split_holdout",
]
