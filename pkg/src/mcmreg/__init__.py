"""Minimal Complexity Machine regression trained by linear programming."""

from .dataset import (Dataset, DatasetError, FoldPlan, ScalingParams, fit_scaling, kfold_split,
                      load_csv, standardize)
from .harness import CvReport, HyperGrid, HyperPoint, cross_validate, grid_search, loo_bound
from .kernel import KernelSpec, cross_gram, gram, kernel_eval
from .lp import LpProblem, LpSolution, LpStatus, lp_enumerate_oracle, lp_solve
from .mcm import (Hyper, KernelMcmModel, LinearMcmModel, TrainingError, fit_kernel, fit_linear,
                  predict_kernel, predict_linear)

__all__ = [
    "CvReport", "Dataset", "DatasetError", "FoldPlan", "Hyper", "HyperGrid", "HyperPoint",
    "KernelMcmModel", "KernelSpec", "LinearMcmModel", "LpProblem", "LpSolution", "LpStatus",
    "ScalingParams", "TrainingError", "cross_gram", "cross_validate", "fit_kernel", "fit_linear",
    "fit_scaling", "gram", "grid_search", "kernel_eval", "kfold_split", "load_csv", "loo_bound",
    "lp_enumerate_oracle", "lp_solve", "predict_kernel", "predict_linear", "standardize",
]
