"""Kernel functions and dense Gram matrices."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Literal

import numpy as np

KernelKind = Literal["linear", "rbf", "polynomial"]


@dataclass(frozen=True)
class KernelSpec:
    """Kernel choice and parameters.

    ``rbf`` is ``exp(-gamma * ||p - q||**2)``; ``polynomial`` is
    ``(p @ q + coef0) ** degree``.
    """

    kind: KernelKind = "rbf"
    gamma: float = 1.0
    degree: int = 3
    coef0: float = 1.0

    def __post_init__(self):
        if self.kind not in ("linear", "rbf", "polynomial"):
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.kind == "rbf" and not self.gamma > 0:
            raise ValueError(f"rbf kernel needs gamma > 0, got {self.gamma}")
        if self.kind == "polynomial" and (int(self.degree) != self.degree or self.degree < 1):
            raise ValueError(f"polynomial kernel needs integer degree >= 1, got {self.degree}")

    def to_dict(self) -> dict:
        return {"kind": self.kind, "gamma": self.gamma, "degree": self.degree, "coef0": self.coef0}

    @classmethod
    def from_dict(cls, d: dict) -> "KernelSpec":
        return cls(kind=d["kind"], gamma=float(d.get("gamma", 1.0)),
                   degree=int(d.get("degree", 3)), coef0=float(d.get("coef0", 1.0)))


def kernel_eval(spec: KernelSpec, p, q) -> float:
    p = np.asarray(p, dtype=float).reshape(-1)
    q = np.asarray(q, dtype=float).reshape(-1)
    if p.shape != q.shape:
        raise ValueError(f"dimension mismatch: {p.shape[0]} vs {q.shape[0]}")
    if spec.kind == "linear":
        return float(p @ q)
    if spec.kind == "rbf":
        diff = p - q
        return float(np.exp(-spec.gamma * (diff @ diff)))
    return float((p @ q + spec.coef0) ** spec.degree)


def _as_matrix(X) -> np.ndarray:
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X.reshape(-1, 1)
    if X.ndim != 2:
        raise ValueError(f"expected a 2-D matrix, got shape {X.shape}")
    return X


def _pairwise(spec: KernelSpec, X: np.ndarray, Z: np.ndarray) -> np.ndarray:
    if spec.kind == "rbf":
        # direct differences; the expanded ||x||^2 - 2 x.z + ||z||^2 form
        # loses the exact zero diagonal
        sq = ((X[:, None, :] - Z[None, :, :]) ** 2).sum(axis=2)
        return np.exp(-spec.gamma * sq)
    dots = X @ Z.T
    if spec.kind == "linear":
        return dots
    return (dots + spec.coef0) ** spec.degree


def gram(spec: KernelSpec, X) -> np.ndarray:
    """Symmetric M x M matrix of kernel values; the upper triangle is mirrored."""
    X = _as_matrix(X)
    if X.shape[0] < 1:
        raise ValueError("gram needs at least one point")
    K = _pairwise(spec, X, X)
    upper = np.triu(K)
    return upper + np.triu(K, 1).T


def cross_gram(spec: KernelSpec, X, Z) -> np.ndarray:
    """Kernel values between training rows ``X`` (M x n) and query rows ``Z`` (P x n)."""
    X = _as_matrix(X)
    Z = _as_matrix(Z)
    if X.shape[1] != Z.shape[1]:
        raise ValueError(f"dimension mismatch: {X.shape[1]} vs {Z.shape[1]}")
    return _pairwise(spec, X, Z)
