"""Regression datasets: CSV loading, z-score standardization, k-fold plans."""

from __future__ import annotations

import logging
import os
from dataclasses import dataclass, field

import numpy as np

log = logging.getLogger(__name__)


class DatasetError(ValueError):
    """Malformed or unusable input data."""


def _frozen(arr) -> np.ndarray:
    arr = np.array(arr, dtype=float)
    arr.flags.writeable = False
    return arr


@dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    targets: np.ndarray
    feature_names: tuple[str, ...] | None = None

    def __post_init__(self):
        X = np.asarray(self.features, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        y = np.asarray(self.targets, dtype=float).reshape(-1)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DatasetError(f"features must be a nonempty M x n matrix, got shape {X.shape}")
        if X.shape[0] != len(y):
            raise DatasetError(f"{X.shape[0]} feature rows but {len(y)} targets")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(y))):
            raise DatasetError("dataset contains NaN or Inf")
        names = self.feature_names
        if names is not None:
            names = tuple(names)
            if len(names) != X.shape[1]:
                raise DatasetError(f"{len(names)} feature names for {X.shape[1]} columns")
        object.__setattr__(self, "features", _frozen(X))
        object.__setattr__(self, "targets", _frozen(y))
        object.__setattr__(self, "feature_names", names)

    @property
    def n_samples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, idx) -> "Dataset":
        idx = np.asarray(idx, dtype=int)
        return Dataset(self.features[idx], self.targets[idx], self.feature_names)


@dataclass(frozen=True, eq=False)
class ScalingParams:
    """Per-column means and sample stds; constant columns carry std 1."""

    feature_means: np.ndarray
    feature_stds: np.ndarray
    target_mean: float
    target_std: float
    constant_columns: tuple[int, ...] = ()
    constant_target: bool = False

    def __post_init__(self):
        object.__setattr__(self, "feature_means", _frozen(self.feature_means))
        object.__setattr__(self, "feature_stds", _frozen(self.feature_stds))
        if np.any(self.feature_stds <= 0) or not self.target_std > 0:
            raise DatasetError("scaling stds must be positive")

    @classmethod
    def identity(cls, n_features: int) -> "ScalingParams":
        return cls(np.zeros(n_features), np.ones(n_features), 0.0, 1.0)

    def transform_features(self, X) -> np.ndarray:
        return (np.asarray(X, dtype=float) - self.feature_means) / self.feature_stds

    def transform_targets(self, y) -> np.ndarray:
        return (np.asarray(y, dtype=float) - self.target_mean) / self.target_std

    def inverse_features(self, Xs) -> np.ndarray:
        return np.asarray(Xs, dtype=float) * self.feature_stds + self.feature_means

    def inverse_targets(self, ys) -> np.ndarray:
        return np.asarray(ys, dtype=float) * self.target_std + self.target_mean

    def apply(self, d: Dataset) -> Dataset:
        return Dataset(self.transform_features(d.features), self.transform_targets(d.targets),
                       d.feature_names)

    def invert(self, d: Dataset) -> Dataset:
        return Dataset(self.inverse_features(d.features), self.inverse_targets(d.targets),
                       d.feature_names)

    def to_dict(self) -> dict:
        return {
            "feature_means": self.feature_means.tolist(),
            "feature_stds": self.feature_stds.tolist(),
            "target_mean": self.target_mean,
            "target_std": self.target_std,
            "constant_columns": list(self.constant_columns),
            "constant_target": self.constant_target,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ScalingParams":
        return cls(np.array(d["feature_means"], dtype=float),
                   np.array(d["feature_stds"], dtype=float),
                   float(d["target_mean"]), float(d["target_std"]),
                   tuple(d.get("constant_columns", ())), bool(d.get("constant_target", False)))


def fit_scaling(d: Dataset) -> ScalingParams:
    """z-score parameters for features and target, using the sample std (divisor M - 1)."""
    if d.n_samples < 2:
        raise DatasetError(f"standardization needs at least 2 samples, got {d.n_samples}")
    means = d.features.mean(axis=0)
    stds = d.features.std(axis=0, ddof=1)
    # exact constancy; a mean that rounds away from the shared value would
    # otherwise leave a tiny nonzero std
    flat = (np.ptp(d.features, axis=0) == 0) | ~(stds > 0)
    const = tuple(int(j) for j in np.flatnonzero(flat))
    if const:
        names = [d.feature_names[j] for j in const] if d.feature_names else list(const)
        log.warning("constant feature columns left unscaled: %s", names)
        means = np.where(flat, 0.0, means)
        stds = np.where(flat, 1.0, stds)
    t_mean = float(d.targets.mean())
    t_std = float(d.targets.std(ddof=1))
    const_target = bool(np.ptp(d.targets) == 0 or not t_std > 0)
    if const_target:
        log.warning("constant target left unscaled")
        t_mean, t_std = 0.0, 1.0
    return ScalingParams(means, stds, t_mean, t_std, const, const_target)


def standardize(d: Dataset) -> tuple[Dataset, ScalingParams]:
    params = fit_scaling(d)
    return params.apply(d), params


@dataclass(frozen=True, eq=False)
class FoldPlan:
    k: int
    assignments: np.ndarray = field(repr=False)

    def __post_init__(self):
        a = np.array(self.assignments, dtype=int)
        a.flags.writeable = False
        object.__setattr__(self, "assignments", a)

    def validation_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignments != fold)

    def sizes(self) -> list[int]:
        return np.bincount(self.assignments, minlength=self.k).tolist()


def kfold_split(d: Dataset | int, k: int, seed: int) -> FoldPlan:
    """Shuffled, balanced fold assignment; a pure function of ``(M, k, seed)``."""
    M = d if isinstance(d, (int, np.integer)) else d.n_samples
    if k < 2 or k > M:
        raise DatasetError(f"k must satisfy 2 <= k <= M={M}, got {k}")
    perm = np.random.default_rng(seed).permutation(M)
    assignments = np.empty(M, dtype=int)
    assignments[perm] = np.arange(M) % k
    return FoldPlan(k, assignments)


def load_csv(path: str | os.PathLike, has_header: bool = False,
             target_column: int | str = "last") -> Dataset:
    """Read a comma-separated numeric file; the target column is removed from the features."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = fh.read().splitlines()
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    lines = [ln for ln in lines if ln.strip()]
    header = None
    if has_header and lines:
        header = [h.strip() for h in lines[0].split(",")]
        lines = lines[1:]
    if not lines:
        raise DatasetError(f"{path}: no data rows")

    rows = []
    width = None
    for r, line in enumerate(lines):
        cells = line.split(",")
        if width is None:
            width = len(cells)
        elif len(cells) != width:
            raise DatasetError(f"{path}: row {r + 1} has {len(cells)} cells, expected {width}")
        row = []
        for c, cell in enumerate(cells):
            try:
                row.append(float(cell))
            except ValueError:
                raise DatasetError(
                    f"{path}: non-numeric cell {cell.strip()!r} at row {r + 1}, column {c + 1}"
                ) from None
        rows.append(row)
    data = np.array(rows)
    if header is not None and len(header) != width:
        raise DatasetError(f"{path}: header has {len(header)} names for {width} columns")

    if target_column == "last":
        t = width - 1
    else:
        t = int(target_column)
        if t < 0:
            t += width
    if not 0 <= t < width or width < 2:
        raise DatasetError(f"{path}: target column {target_column} invalid for {width} columns")
    keep = [j for j in range(width) if j != t]
    names = tuple(header[j] for j in keep) if header else None
    return Dataset(data[:, keep], data[:, t], names)


def load_features_csv(path: str | os.PathLike, has_header: bool = False) -> np.ndarray:
    """Feature-only CSV (no target column); an empty file yields a 0-row matrix."""
    try:
        with open(path, encoding="utf-8") as fh:
            lines = [ln for ln in fh.read().splitlines() if ln.strip()]
    except OSError as exc:
        raise DatasetError(f"cannot read {path}: {exc}") from exc
    if has_header and lines:
        lines = lines[1:]
    rows = []
    for r, line in enumerate(lines):
        try:
            rows.append([float(c) for c in line.split(",")])
        except ValueError:
            raise DatasetError(f"{path}: non-numeric cell in row {r + 1}") from None
    if rows and len({len(r) for r in rows}) != 1:
        raise DatasetError(f"{path}: ragged rows")
    return np.array(rows, dtype=float).reshape(len(rows), -1 if rows else 0)


def write_csv(d: Dataset, path: str | os.PathLike, header: bool | None = None) -> None:
    """Write features then target as the last column, at full float precision."""
    if header is None:
        header = d.feature_names is not None
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            names = d.feature_names or tuple(f"x{j}" for j in range(d.n_features))
            fh.write(",".join(names + ("target",)) + "\n")
        for x, y in zip(d.features, d.targets):
            fh.write(",".join(repr(float(v)) for v in (*x, y)) + "\n")
