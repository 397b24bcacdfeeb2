"""Minimal Complexity Machine: LP builders, model extraction and prediction.

Regression is posed as classification of two target-shifted copies of the
data in n+1 dimensions: the points ``(x_i, y_i + eps)`` form class +1 and
``(x_i, y_i - eps)`` class -1. A separating hyperplane
``w @ x + eta * y + b = 0`` gives the regressor ``y = -(w @ x + b) / eta``.
The LP minimizes ``h``, an upper bound on the largest functional margin
while every margin is at least 1, plus ``C`` times the total slack in the
soft-margin variant.

``eta`` is a decision variable constrained to be nonnegative. ``h`` is also
constrained nonnegative; at any useful optimum ``h >= eta * eps`` anyway.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular
from scipy.linalg.lapack import dpstrf

from .dataset import Dataset
from .kernel import KernelSpec, cross_gram, gram
from .lp import LpProblem, LpSolution, LpStatus, lp_solve

ETA_TOL = 1e-8
TOL_SV = 1e-6
GRAM_RANK_TOL = 1e-8  # relative Schur-complement pivot below which a Gram column counts as dependent


class TrainingError(RuntimeError):
    """The LP could not produce a usable model."""


class InfeasibleTrainingError(TrainingError):
    pass


class DegenerateModelError(TrainingError):
    pass


@dataclass(frozen=True)
class Hyper:
    epsilon: float
    C: float | None = None  # None selects the hard-margin formulation

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if self.C is not None and not self.C > 0:
            raise ValueError(f"C must be positive, got {self.C}")


@dataclass(frozen=True)
class VariableLayout:
    """Maps each named block of model variables to LP columns.

    ``blocks[name] = (pos, neg)`` where ``neg`` is None for sign-constrained
    blocks; a free block's value is ``z[pos] - z[neg]``.
    """

    blocks: dict[str, tuple[np.ndarray, np.ndarray | None]]
    n_columns: int
    n_samples: int = 0

    def __post_init__(self):
        used = []
        for pos, neg in self.blocks.values():
            used.extend(np.asarray(pos).tolist())
            if neg is not None:
                used.extend(np.asarray(neg).tolist())
        if sorted(used) != list(range(self.n_columns)):
            raise ValueError("layout is not a bijection onto the LP columns")

    def value(self, name: str, z: np.ndarray) -> np.ndarray:
        pos, neg = self.blocks[name]
        out = z[pos]
        if neg is not None:
            out = out - z[neg]
        return np.asarray(out, dtype=float)

    def scalar(self, name: str, z: np.ndarray) -> float:
        return float(self.value(name, z)[0])


class _Columns:
    def __init__(self):
        self.n = 0
        self.blocks = {}
        self.nonneg = []

    def add(self, name: str, size: int, free: bool):
        pos = np.arange(self.n, self.n + size)
        self.n += size
        neg = None
        if free:
            neg = np.arange(self.n, self.n + size)
            self.n += size
        self.nonneg.extend(range(pos[0], self.n))
        self.blocks[name] = (pos, neg)

    def layout(self, n_samples: int) -> VariableLayout:
        return VariableLayout(self.blocks, self.n, n_samples)


def _check_xy(F, targets):
    F = np.asarray(F, dtype=float)
    if F.ndim == 1:
        F = F.reshape(-1, 1)
    y = np.asarray(targets, dtype=float).reshape(-1)
    if F.shape[0] != len(y):
        raise ValueError(f"{F.shape[0]} rows but {len(y)} targets")
    if len(y) < 1:
        raise ValueError("need at least one sample")
    return F, y


def _tube_lp(F: np.ndarray, y: np.ndarray, epsilon: float, C: float | None,
             coef_name: str) -> tuple[LpProblem, VariableLayout]:
    """Shared builder: ``F @ coef`` plays the role of ``w @ x_i``.

    Row families per sample i, with f_i = F[i] @ coef + b:
        h - f_i - eta*(y_i + eps)        >= 0
        f_i + eta*(y_i + eps) [+ q+_i]   >= 1
        h + f_i + eta*(y_i - eps)        >= 0
        -f_i - eta*(y_i - eps) [+ q-_i]  >= 1
    """
    M, p = F.shape
    cols = _Columns()
    cols.add(coef_name, p, free=True)
    cols.add("b", 1, free=True)
    cols.add("eta", 1, free=False)
    cols.add("h", 1, free=False)
    soft = C is not None
    if soft:
        cols.add("q_plus", M, free=False)
        cols.add("q_minus", M, free=False)
    layout = cols.layout(M)

    def put(block, rows, vals):
        pos, neg = layout.blocks[block]
        A[np.ix_(rows, pos)] = vals
        if neg is not None:
            A[np.ix_(rows, neg)] = -vals

    A = np.zeros((4 * M, cols.n))
    rhs = np.zeros(4 * M)
    r1 = np.arange(0, 4 * M, 4)
    r2, r3, r4 = r1 + 1, r1 + 2, r1 + 3
    ones = np.ones((M, 1))
    h_col = layout.blocks["h"][0][0]
    eta_col = layout.blocks["eta"][0][0]

    put(coef_name, r1, -F)
    put("b", r1, -ones)
    A[r1, eta_col] = -(y + epsilon)
    A[r1, h_col] = 1.0

    put(coef_name, r2, F)
    put("b", r2, ones)
    A[r2, eta_col] = y + epsilon
    rhs[r2] = 1.0

    put(coef_name, r3, F)
    put("b", r3, ones)
    A[r3, eta_col] = y - epsilon
    A[r3, h_col] = 1.0

    put(coef_name, r4, -F)
    put("b", r4, -ones)
    A[r4, eta_col] = -(y - epsilon)
    rhs[r4] = 1.0

    c = np.zeros(cols.n)
    c[h_col] = 1.0
    if soft:
        qp = layout.blocks["q_plus"][0]
        qm = layout.blocks["q_minus"][0]
        A[r2, qp] = 1.0
        A[r4, qm] = 1.0
        c[qp] = C
        c[qm] = C
    return LpProblem(c, A, rhs, frozenset(cols.nonneg)), layout


def build_linear_hard(d: Dataset, epsilon: float) -> tuple[LpProblem, VariableLayout]:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    return _tube_lp(d.features, d.targets, epsilon, None, "w")


def build_linear_soft(d: Dataset, epsilon: float, C: float) -> tuple[LpProblem, VariableLayout]:
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    return _tube_lp(d.features, d.targets, epsilon, C, "w")


def build_kernel_soft(G, targets, epsilon: float, C: float) -> tuple[LpProblem, VariableLayout]:
    """Soft-margin LP over expansion coefficients ``lambda``; ``G`` is the training Gram matrix."""
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    if not C > 0:
        raise ValueError(f"C must be positive, got {C}")
    G = np.asarray(G, dtype=float)
    if G.ndim != 2 or G.shape[0] != G.shape[1]:
        raise ValueError(f"Gram matrix must be square, got shape {G.shape}")
    if np.max(np.abs(G - G.T), initial=0.0) > 1e-10:
        raise ValueError("Gram matrix is not symmetric")
    G, y = _check_xy(G, targets)
    return _tube_lp(G, y, epsilon, C, "lambda")


def build_classifier_hard(X, labels) -> tuple[LpProblem, VariableLayout]:
    """Hard-margin MCM classifier LP: min h, h >= y_i (w @ x_i + b) >= 1."""
    X, y = _check_xy(X, labels)
    if not np.all(np.isin(y, (-1.0, 1.0))):
        raise ValueError("labels must be +1 or -1")
    if len(np.unique(y)) < 2:
        raise ValueError("both classes must be present")
    M, n = X.shape
    cols = _Columns()
    cols.add("w", n, free=True)
    cols.add("b", 1, free=True)
    cols.add("h", 1, free=False)
    layout = cols.layout(M)
    A = np.zeros((2 * M, cols.n))
    rhs = np.zeros(2 * M)
    signed = np.column_stack([X * y[:, None], y])  # y_i * [x_i, 1]
    wb_pos = np.concatenate([layout.blocks["w"][0], layout.blocks["b"][0]])
    wb_neg = np.concatenate([layout.blocks["w"][1], layout.blocks["b"][1]])
    h_col = layout.blocks["h"][0][0]
    top, bottom = np.arange(M), np.arange(M, 2 * M)
    A[np.ix_(top, wb_pos)] = -signed
    A[np.ix_(top, wb_neg)] = signed
    A[top, h_col] = 1.0
    A[np.ix_(bottom, wb_pos)] = signed
    A[np.ix_(bottom, wb_neg)] = -signed
    rhs[bottom] = 1.0
    c = np.zeros(cols.n)
    c[h_col] = 1.0
    return LpProblem(c, A, rhs, frozenset(cols.nonneg)), layout


@dataclass(frozen=True, eq=False)
class LinearMcmClassifier:
    w: np.ndarray
    b: float
    h: float

    def decision(self, X) -> np.ndarray:
        return np.atleast_2d(np.asarray(X, dtype=float)) @ self.w + self.b


def extract_classifier(sol: LpSolution, layout: VariableLayout) -> LinearMcmClassifier:
    if sol.status is not LpStatus.OPTIMAL:
        raise InfeasibleTrainingError(f"classifier LP not solved: {sol.status.value}")
    return LinearMcmClassifier(layout.value("w", sol.z), layout.scalar("b", sol.z),
                               layout.scalar("h", sol.z))


def classify(m: LinearMcmClassifier, x) -> int:
    """Sign of ``w @ x + b``; zero maps to +1."""
    f = float(np.asarray(x, dtype=float).reshape(-1) @ m.w + m.b)
    return 1 if f >= 0 else -1


@dataclass(frozen=True, eq=False)
class LinearMcmModel:
    w: np.ndarray
    b: float
    eta: float
    h: float
    slacks_plus: np.ndarray
    slacks_minus: np.ndarray
    hyper: Hyper

    @property
    def total_slack(self) -> float:
        return float(self.slacks_plus.sum() + self.slacks_minus.sum())


@dataclass(frozen=True, eq=False)
class KernelMcmModel:
    lam: np.ndarray
    b: float
    eta: float
    h: float
    support_indices: np.ndarray
    train_X: np.ndarray
    spec: KernelSpec
    hyper: Hyper
    slacks_plus: np.ndarray = field(default_factory=lambda: np.zeros(0))
    slacks_minus: np.ndarray = field(default_factory=lambda: np.zeros(0))

    @property
    def n_support(self) -> int:
        return len(self.support_indices)

    @property
    def total_slack(self) -> float:
        return float(self.slacks_plus.sum() + self.slacks_minus.sum())


def _common(sol: LpSolution, layout: VariableLayout):
    if sol.status is not LpStatus.OPTIMAL:
        raise InfeasibleTrainingError(f"training LP not solved to optimality: {sol.status.value}")
    z = sol.z
    eta = layout.scalar("eta", z)
    if abs(eta) <= ETA_TOL:
        raise DegenerateModelError(
            f"degenerate regressor: eta={eta:.3g} <= {ETA_TOL:g}; "
            "try a smaller epsilon or a larger C"
        )
    if "q_plus" in layout.blocks:
        qp = np.maximum(layout.value("q_plus", z), 0.0)
        qm = np.maximum(layout.value("q_minus", z), 0.0)
    else:
        qp = qm = np.zeros(layout.n_samples)
    return z, eta, layout.scalar("h", z), qp, qm


def extract_linear(sol: LpSolution, layout: VariableLayout, hyper: Hyper) -> LinearMcmModel:
    z, eta, h, qp, qm = _common(sol, layout)
    return LinearMcmModel(layout.value("w", z), layout.scalar("b", z), eta, h, qp, qm, hyper)


def support_set(lam: np.ndarray, tol_sv: float = TOL_SV) -> np.ndarray:
    scale = np.max(np.abs(lam), initial=0.0)
    if scale == 0:
        return np.zeros(0, dtype=int)
    return np.flatnonzero(np.abs(lam) > tol_sv * scale)


def extract_kernel(sol: LpSolution, layout: VariableLayout, train_X, spec: KernelSpec,
                   hyper: Hyper, tol_sv: float = TOL_SV) -> KernelMcmModel:
    z, eta, h, qp, qm = _common(sol, layout)
    lam = layout.value("lambda", z)
    X = np.array(train_X, dtype=float).reshape(len(lam), -1)
    return KernelMcmModel(lam, layout.scalar("b", z), eta, h, support_set(lam, tol_sv), X, spec,
                          hyper, qp, qm)


def predict_linear(m: LinearMcmModel, X) -> np.ndarray:
    if abs(m.eta) <= ETA_TOL:
        raise DegenerateModelError(f"eta={m.eta:.3g} too small to predict")
    X = np.asarray(X, dtype=float).reshape(-1, len(m.w))
    return -(X @ m.w + m.b) / m.eta


def predict_kernel(m: KernelMcmModel, X, full_sum: bool = False) -> np.ndarray:
    """Kernel regressor output; by default only support vectors enter the sum."""
    if abs(m.eta) <= ETA_TOL:
        raise DegenerateModelError(f"eta={m.eta:.3g} too small to predict")
    X = np.asarray(X, dtype=float).reshape(-1, m.train_X.shape[1])
    idx = np.arange(len(m.lam)) if full_sum else m.support_indices
    if len(idx) == 0 or len(X) == 0:
        return np.full(len(X), -m.b / m.eta)
    K = cross_gram(m.spec, m.train_X[idx], X)
    return -(m.lam[idx] @ K + m.b) / m.eta


def duplicate_conflicts(X, y, epsilon: float) -> list[tuple[int, int]]:
    """Index pairs with identical inputs whose targets differ by at least ``2 * epsilon``.

    Any such pair makes the hard-margin problem infeasible.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    groups: dict[bytes, list[int]] = {}
    for i, row in enumerate(X):
        groups.setdefault(row.tobytes(), []).append(i)
    out = []
    for members in groups.values():
        if len(members) < 2:
            continue
        lo = min(members, key=lambda i: y[i])
        hi = max(members, key=lambda i: y[i])
        if y[hi] - y[lo] >= 2 * epsilon:
            out.append((min(lo, hi), max(lo, hi)))
    return sorted(out)


def fit_linear(d: Dataset, hyper: Hyper, **solver_kw) -> LinearMcmModel:
    """Build, solve and extract a linear MCM regressor (hard margin when ``hyper.C`` is None)."""
    if hyper.C is None:
        conflicts = duplicate_conflicts(d.features, d.targets, hyper.epsilon)
        if conflicts:
            i, j = conflicts[0]
            raise InfeasibleTrainingError(
                f"hard-margin problem infeasible: rows {i} and {j} share inputs but their "
                f"targets differ by {abs(d.targets[i] - d.targets[j]):g} >= 2*epsilon"
            )
        lp, layout = build_linear_hard(d, hyper.epsilon)
    else:
        lp, layout = build_linear_soft(d, hyper.epsilon, hyper.C)
    sol = _solve(lp, **solver_kw)
    if sol.status is LpStatus.INFEASIBLE:
        raise InfeasibleTrainingError("hard-margin problem infeasible: no hyperplane fits every "
                                      "epsilon-tube; use the soft margin (set C)")
    return extract_linear(sol, layout, hyper)


def _solve(lp: LpProblem, **solver_kw) -> LpSolution:
    try:
        return lp_solve(lp, **solver_kw)
    except np.linalg.LinAlgError as exc:
        raise TrainingError(f"LP solver hit a numerically singular basis: {exc}") from exc


def gram_factor(G: np.ndarray, rank_tol: float | None = None) -> tuple[np.ndarray, np.ndarray]:
    """Pivoted Cholesky factor of a PSD Gram matrix.

    Elimination stops once the largest remaining pivot is at most
    ``rank_tol * max(diag(G))``; ``None`` uses LAPACK's roundoff default.

    Returns ``(L, piv)`` with ``G[:, piv] == L @ L[piv].T`` (to rounding),
    ``L`` of shape ``M x r`` and ``L[piv]`` lower triangular. Columns outside
    ``piv`` are numerically dependent on those inside.
    """
    M = G.shape[0]
    tol = -1.0 if rank_tol is None else rank_tol * float(np.max(np.diag(G), initial=0.0))
    c, perm, rank, info = dpstrf(np.array(G, dtype=float, order="F"), lower=1, tol=tol)
    if info < 0:
        raise ValueError(f"pivoted Cholesky failed (info={info})")
    if rank == 0:
        return np.zeros((M, 0)), np.zeros(0, dtype=int)
    perm = perm - 1
    L = np.empty((M, rank))
    L[perm] = np.tril(c)[:, :rank]
    return L, perm[:rank].copy()


def fit_kernel(d: Dataset, spec: KernelSpec, hyper: Hyper, tol_sv: float = TOL_SV,
               factored: bool = True, rank_tol: float | None = GRAM_RANK_TOL,
               **solver_kw) -> KernelMcmModel:
    """Train a soft-margin kernel MCM regressor.

    With ``factored`` (the default) the LP is posed over ``beta = L[piv].T @ lam``
    where ``L`` is the pivoted Cholesky factor of the Gram matrix. The feasible
    set of fitted values is that of ``lam`` restricted to the numerically
    independent columns ``piv``, and the basis matrices are far better
    conditioned than with raw Gram columns. ``lam`` is recovered by a
    triangular solve; dependent columns get ``lam = 0``.

    ``rank_tol`` drops columns whose remaining kernel variance is below
    ``rank_tol * max(diag(G))``. Keeping such columns admits LP vertices with
    enormous coefficients along nearly flat directions, which the simplex
    method cannot resolve in double precision.
    """
    if hyper.C is None:
        raise ValueError("the kernel MCM is soft-margin only; set C")
    G = gram(spec, d.features)
    if not factored:
        lp, layout = build_kernel_soft(G, d.targets, hyper.epsilon, hyper.C)
        return extract_kernel(_solve(lp, **solver_kw), layout, d.features, spec, hyper, tol_sv)

    if not hyper.epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {hyper.epsilon}")
    L, piv = gram_factor(G, rank_tol)
    lp, layout = _tube_lp(L, d.targets, hyper.epsilon, hyper.C, "beta")
    sol = _solve(lp, **solver_kw)
    z, eta, h, qp, qm = _common(sol, layout)
    lam = np.zeros(d.n_samples)
    if len(piv):
        lam[piv] = solve_triangular(L[piv].T, layout.value("beta", z), lower=False)
    return KernelMcmModel(lam, layout.scalar("b", z), eta, h, support_set(lam, tol_sv),
                          np.array(d.features), spec, hyper, qp, qm)
