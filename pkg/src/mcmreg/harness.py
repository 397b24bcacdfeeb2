"""k-fold cross-validation and grid search for MCM regressors.

Each fold is standardized with statistics of its own training split, so the
validation rows never influence the scaling. MSE is reported in standardized
target units unless ``raw_units`` is set, in which case every fold's MSE is
multiplied by that fold's squared target std.

Grid search tunes and reports on the same folds, which biases the reported
MSE of the chosen point optimistically; there is no nested loop.
"""

from __future__ import annotations

import json
import logging
import math
import time
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from .dataset import Dataset, DatasetError, ScalingParams, fit_scaling, kfold_split
from .kernel import KernelSpec
from .mcm import Hyper, TrainingError, fit_kernel, fit_linear, predict_kernel, predict_linear

log = logging.getLogger(__name__)

Kind = Literal["linear", "kernel"]

DEFAULT_C = (1e-2, 1e-1, 1.0, 1e1, 1e2, 1e3)
DEFAULT_EPSILON = (0.01, 0.05, 0.1, 0.2)
DEFAULT_GAMMA = tuple(2.0 ** p for p in range(-6, 3))


class GridSearchError(RuntimeError):
    """Every grid point failed; ``diagnostics`` maps each point to its failure messages."""

    def __init__(self, message: str, diagnostics: list[dict]):
        super().__init__(message)
        self.diagnostics = diagnostics


@dataclass(frozen=True)
class HyperPoint:
    """One hyperparameter setting. ``C=None`` is the hard margin (linear only)."""

    epsilon: float
    C: float | None = None
    gamma: float | None = None
    kernel_kind: str = "rbf"

    def hyper(self) -> Hyper:
        return Hyper(self.epsilon, self.C)

    def kernel_spec(self) -> KernelSpec:
        if self.kernel_kind == "rbf":
            return KernelSpec("rbf", gamma=1.0 if self.gamma is None else self.gamma)
        return KernelSpec(self.kernel_kind)

    def to_dict(self) -> dict:
        return {"epsilon": self.epsilon, "C": self.C, "gamma": self.gamma,
                "kernel_kind": self.kernel_kind}


def _check_values(name: str, values, required: bool = True) -> tuple[float, ...]:
    vals = tuple(float(v) for v in values)
    if required and not vals:
        raise ValueError(f"{name} must be nonempty")
    if any(not v > 0 or not math.isfinite(v) for v in vals):
        raise ValueError(f"{name} entries must be positive and finite, got {vals}")
    if list(vals) != sorted(vals):
        raise ValueError(f"{name} must be sorted ascending, got {vals}")
    return vals


@dataclass(frozen=True)
class HyperGrid:
    C_values: tuple[float, ...] = DEFAULT_C
    epsilon_values: tuple[float, ...] = DEFAULT_EPSILON
    gamma_values: tuple[float, ...] = DEFAULT_GAMMA
    kernel_kind: str = "rbf"

    def __post_init__(self):
        object.__setattr__(self, "C_values", _check_values("C_values", self.C_values))
        object.__setattr__(self, "epsilon_values",
                           _check_values("epsilon_values", self.epsilon_values))
        needs_gamma = self.kernel_kind == "rbf"
        object.__setattr__(self, "gamma_values",
                           _check_values("gamma_values", self.gamma_values, needs_gamma))

    def points(self, kind: Kind) -> list[HyperPoint]:
        """Grid points in a fixed order: C, then gamma, then epsilon."""
        gammas: tuple[float | None, ...] = (None,)
        if kind == "kernel" and self.kernel_kind == "rbf":
            gammas = self.gamma_values
        return [HyperPoint(eps, C, g, self.kernel_kind)
                for C in self.C_values for g in gammas for eps in self.epsilon_values]


def loo_bound(sv_count: float, train_count: int) -> float:
    """Expected SV fraction, an upper bound on leave-one-out error."""
    if train_count < 1:
        raise ValueError(f"train_count must be positive, got {train_count}")
    if not 0 <= sv_count <= train_count:
        raise ValueError(f"sv_count must lie in [0, {train_count}], got {sv_count}")
    return sv_count / train_count


@dataclass(eq=False)
class CvReport:
    kind: str
    hyper: HyperPoint
    k: int
    seed: int
    fold_mse: list[float]
    fold_failures: list[str | None]
    fold_train_sizes: list[int]
    fold_sv_counts: list[int | None] | None = None
    raw_units: bool = False
    wall_time: list[float] = field(default_factory=list)

    @property
    def chosen_hyper(self) -> HyperPoint:
        return self.hyper

    @property
    def ok_folds(self) -> list[int]:
        return [i for i, f in enumerate(self.fold_failures) if f is None]

    @property
    def failed(self) -> bool:
        return not self.ok_folds

    def _agg(self, values) -> tuple[float, float]:
        v = np.array([values[i] for i in self.ok_folds], dtype=float)
        if len(v) == 0:
            return math.nan, math.nan
        std = float(v.std(ddof=1)) if len(v) > 1 else math.nan
        return float(v.mean()), std

    @property
    def mse_mean(self) -> float:
        return self._agg(self.fold_mse)[0]

    @property
    def mse_std(self) -> float:
        return self._agg(self.fold_mse)[1]

    @property
    def sv_mean(self) -> float:
        if self.fold_sv_counts is None:
            return math.nan
        return self._agg(self.fold_sv_counts)[0]

    @property
    def sv_std(self) -> float:
        if self.fold_sv_counts is None:
            return math.nan
        return self._agg(self.fold_sv_counts)[1]

    @property
    def loo_bound(self) -> float:
        """Mean SV count over mean training-fold size (kernel runs only)."""
        if self.fold_sv_counts is None or self.failed:
            return math.nan
        n = float(np.mean([self.fold_train_sizes[i] for i in self.ok_folds]))
        return min(1.0, self.sv_mean / n)

    def to_dict(self, include_timings: bool = True) -> dict:
        d = {
            "kind": self.kind,
            "hyper": self.hyper.to_dict(),
            "k": self.k,
            "seed": self.seed,
            "raw_units": self.raw_units,
            "fold_mse": [_num(v) for v in self.fold_mse],
            "fold_failures": list(self.fold_failures),
            "fold_train_sizes": list(self.fold_train_sizes),
            "fold_sv_counts": self.fold_sv_counts,
            "mse_mean": _num(self.mse_mean),
            "mse_std": _num(self.mse_std),
            "sv_mean": _num(self.sv_mean),
            "sv_std": _num(self.sv_std),
            "loo_bound": _num(self.loo_bound),
        }
        if include_timings:
            d["wall_time"] = list(self.wall_time)
        return d


def _num(v) -> float | None:
    """NaN becomes JSON null."""
    if v is None:
        return None
    v = float(v)
    return None if math.isnan(v) else v


def _fit_predict(kind: Kind, train: Dataset, val_X: np.ndarray, point: HyperPoint,
                 solver_kw: dict):
    if kind == "linear":
        m = fit_linear(train, point.hyper(), **solver_kw)
        return predict_linear(m, val_X), None
    if point.C is None:
        raise ValueError("kernel runs need a finite C")
    m = fit_kernel(train, point.kernel_spec(), point.hyper(), **solver_kw)
    return predict_kernel(m, val_X), m.n_support


def cross_validate(d: Dataset, hyper: HyperPoint, k: int = 5, seed: int = 0,
                   kind: Kind = "linear", standardize: bool = True, raw_units: bool = False,
                   **solver_kw) -> CvReport:
    """k-fold CV at one hyperparameter point; failed folds are marked, not raised."""
    if kind not in ("linear", "kernel"):
        raise ValueError(f"kind must be 'linear' or 'kernel', got {kind!r}")
    plan = kfold_split(d, k, seed)
    report = CvReport(kind, hyper, k, seed, [], [], [],
                      [] if kind == "kernel" else None, raw_units)
    for fold in range(k):
        t0 = time.perf_counter()
        train = d.subset(plan.train_indices(fold))
        val = d.subset(plan.validation_indices(fold))
        report.fold_train_sizes.append(train.n_samples)
        try:
            scaling = fit_scaling(train) if standardize else ScalingParams.identity(d.n_features)
            pred, n_sv = _fit_predict(kind, scaling.apply(train),
                                      scaling.transform_features(val.features), hyper, solver_kw)
            err = pred - scaling.transform_targets(val.targets)
            mse = float(np.mean(err * err))
            if raw_units:
                mse *= scaling.target_std ** 2
            report.fold_mse.append(mse)
            report.fold_failures.append(None)
        except (TrainingError, DatasetError) as exc:
            log.warning("fold %d failed at %s: %s", fold, hyper, exc)
            report.fold_mse.append(math.nan)
            report.fold_failures.append(f"{type(exc).__name__}: {exc}")
            n_sv = None
        if report.fold_sv_counts is not None:
            report.fold_sv_counts.append(n_sv)
        report.wall_time.append(time.perf_counter() - t0)
    n_failed = sum(f is not None for f in report.fold_failures)
    if n_failed:
        log.warning("%d of %d folds failed at %s; excluded from aggregates", n_failed, k, hyper)
    return report


def _rank_key(r: CvReport):
    sv = r.sv_mean
    return (r.mse_mean, 0.0 if math.isnan(sv) else sv,
            math.inf if r.hyper.C is None else r.hyper.C,
            0.0 if r.hyper.gamma is None else r.hyper.gamma, r.hyper.epsilon)


def grid_search(d: Dataset, grid: HyperGrid, k: int = 5, seed: int = 0,
                kind: Kind = "linear", standardize: bool = True, raw_units: bool = False,
                **solver_kw) -> tuple[HyperPoint, CvReport, list[CvReport]]:
    """Cross-validate every grid point; lowest mean MSE wins.

    Ties go to smaller mean SV count, then smaller C, smaller gamma and
    smaller epsilon. Every point shares one fold plan.
    """
    table = [cross_validate(d, p, k, seed, kind, standardize, raw_units, **solver_kw)
             for p in grid.points(kind)]
    usable = [r for r in table if not math.isnan(r.mse_mean)]
    if not usable:
        diagnostics = [{"hyper": r.hyper.to_dict(), "failures": r.fold_failures} for r in table]
        raise GridSearchError(f"all {len(table)} grid points failed", diagnostics)
    best = min(usable, key=_rank_key)
    return best.hyper, best, table


def report_json(best: CvReport | None, table: list[CvReport],
                include_timings: bool = True) -> str:
    """Canonical JSON: sorted keys, so equal runs give identical text."""
    doc = {
        "format_version": 1,
        "best": None if best is None else best.to_dict(include_timings),
        "grid": [r.to_dict(include_timings) for r in table],
    }
    return json.dumps(doc, sort_keys=True, indent=2, allow_nan=False)


def _pm(mean: float, std: float, fmt: str) -> str:
    if math.isnan(mean):
        return "-"
    if math.isnan(std):
        return format(mean, fmt)
    return f"{format(mean, fmt)} +/- {format(std, fmt)}"


def format_table(table: list[CvReport], best: CvReport | None = None) -> str:
    """Aligned text table: one row per grid point, the chosen one starred."""
    header = ["", "epsilon", "C", "gamma", "MSE", "SVs", "LOO bound", "failed"]
    rows = []
    for r in table:
        h = r.hyper
        rows.append([
            "*" if r is best else "",
            f"{h.epsilon:g}",
            "hard" if h.C is None else f"{h.C:g}",
            "-" if h.gamma is None else f"{h.gamma:g}",
            _pm(r.mse_mean, r.mse_std, ".4g"),
            _pm(r.sv_mean, r.sv_std, ".1f"),
            "-" if math.isnan(r.loo_bound) else f"{r.loo_bound:.4f}",
            f"{sum(f is not None for f in r.fold_failures)}/{r.k}",
        ])
    widths = [max(len(x) for x in col) for col in zip(header, *rows)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(header, widths)).rstrip()]
    lines.append("  ".join("-" * w for w in widths))
    for row in rows:
        lines.append("  ".join(c.ljust(w) for c, w in zip(row, widths)).rstrip())
    return "\n".join(lines)
