"""Linear programming: a dense revised two-phase simplex and a vertex-enumeration oracle.

Every problem is posed as::

    minimize    c @ z
    subject to  A @ z >= b
                z[j] >= 0   for j in nonneg (all other variables are free)

The solver converts this to standard form (free variables split into positive
and negative parts, one surplus column per row), finds a feasible basis with
artificial variables where needed, then optimizes the true objective.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass, field
from typing import IO

import numpy as np

__all__ = [
    "LpProblem",
    "LpSolution",
    "LpStatus",
    "OracleTooLargeError",
    "dump_problem",
    "load_problem",
    "lp_enumerate_oracle",
    "lp_solve",
]

REFACTOR_EVERY = 50
PIVOT_TOL = 1e-7
# tolerated disagreement between row- and column-computed pivot elements,
# after updates and right after a refactorization
PIVOT_MISMATCH = 1e-6
PIVOT_MISMATCH_FRESH = 1e-3
CERTIFY_TOL = 1e-7
ORACLE_MAX_VARS = 14
ORACLE_MAX_ROWS = 10


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration_limit"


@dataclass(frozen=True, eq=False)
class LpProblem:
    """``min c @ z`` subject to ``A @ z >= b``, ``z[j] >= 0`` for ``j in nonneg``."""

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    nonneg: frozenset[int] = field(default_factory=frozenset)

    def __post_init__(self):
        c = np.array(self.c, dtype=float).reshape(-1)
        A = np.array(self.A, dtype=float)
        b = np.array(self.b, dtype=float).reshape(-1)
        if A.ndim != 2:
            if A.size == 0:
                A = A.reshape(len(b), len(c))
            else:
                raise ValueError(f"A must be 2-D, got shape {A.shape}")
        if A.shape != (len(b), len(c)):
            raise ValueError(
                f"shape mismatch: A is {A.shape}, c has {len(c)} entries, b has {len(b)}"
            )
        for name, arr in (("c", c), ("A", A), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains NaN or Inf")
        nonneg = frozenset(int(j) for j in self.nonneg)
        bad = [j for j in nonneg if not 0 <= j < len(c)]
        if bad:
            raise ValueError(f"nonneg indices out of range: {sorted(bad)}")
        for arr in (c, A, b):
            arr.flags.writeable = False
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "nonneg", nonneg)

    @property
    def n_vars(self) -> int:
        return len(self.c)

    @property
    def n_rows(self) -> int:
        return len(self.b)

    @classmethod
    def all_nonneg(cls, c, A, b) -> "LpProblem":
        return cls(c, A, b, frozenset(range(len(np.ravel(c)))))


@dataclass(frozen=True, eq=False)
class LpSolution:
    status: LpStatus
    z: np.ndarray | None
    objective: float
    iterations: int

    @property
    def optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _StandardForm:
    """Column bookkeeping for ``A_std @ x = rhs, x >= 0``.

    Columns are laid out as: one column per nonneg variable or two per free
    variable (``+A_j``, ``-A_j``), then one surplus column per row, then
    artificial columns. Rows with negative right-hand side are negated so
    that ``rhs >= 0``.
    """

    def __init__(self, problem: LpProblem):
        R, N = problem.A.shape
        self.R = R
        self.row_sign = np.where(problem.b < 0, -1.0, 1.0)
        self.A_eff = problem.A * self.row_sign[:, None]
        self.rhs = problem.b * self.row_sign

        orig, sign = [], []
        for j in range(N):
            orig.append(j)
            sign.append(1.0)
            if j not in problem.nonneg:
                orig.append(j)
                sign.append(-1.0)
        self.n_struct = len(orig)
        self.col_orig = np.array(orig, dtype=int)
        self.col_sign = np.array(sign)
        self.c_struct = problem.c[self.col_orig] * self.col_sign

        # twin[j] = k when structural columns j and k are exact negatives
        # (a split free variable); both must never be basic together
        self.twin = np.full(self.n_struct, -1, dtype=int)
        seen: dict[bytes, int] = {}
        for j in range(self.n_struct):
            col = self.A_eff[:, self.col_orig[j]] * self.col_sign[j] + 0.0
            partner = seen.get((-col + 0.0).tobytes())
            if partner is not None and self.twin[partner] == -1:
                self.twin[j] = partner
                self.twin[partner] = j
            else:
                seen.setdefault(col.tobytes(), j)

        # surplus for row i is -e_i before the row flip
        self.surplus_coef = -self.row_sign
        self.n_artificial = 0
        self.art_row = np.zeros(0, dtype=int)

    @property
    def n_cols(self) -> int:
        return self.n_struct + self.R + self.n_artificial

    def kind(self, j: int) -> str:
        if j < self.n_struct:
            return "struct"
        if j < self.n_struct + self.R:
            return "surplus"
        return "artificial"

    def column(self, j: int) -> np.ndarray:
        if j < self.n_struct:
            return self.A_eff[:, self.col_orig[j]] * self.col_sign[j]
        col = np.zeros(self.R)
        if j < self.n_struct + self.R:
            i = j - self.n_struct
            col[i] = self.surplus_coef[i]
        else:
            col[self.art_row[j - self.n_struct - self.R]] = 1.0
        return col

    def matrix(self, cols) -> np.ndarray:
        if not len(cols):
            return np.zeros((self.R, 0))
        return np.column_stack([self.column(j) for j in cols])

    def row_products(self, rho: np.ndarray) -> np.ndarray:
        """``rho @ A_std`` for every column."""
        out = np.empty(self.n_cols)
        supp = np.flatnonzero(rho)
        if 2 * len(supp) < self.R:
            base = rho[supp] @ self.A_eff[supp]
        else:
            base = rho @ self.A_eff
        out[: self.n_struct] = base[self.col_orig] * self.col_sign
        out[self.n_struct : self.n_struct + self.R] = rho * self.surplus_coef
        out[self.n_struct + self.R :] = rho[self.art_row]
        return out

    def initial_basis(self, problem: LpProblem) -> list[int]:
        """Diagonal starting basis; artificials only where no column fits."""
        basis = [-1] * self.R
        # singleton nonneg columns with a positive entry can start basic
        # in a row with positive rhs
        nz = self.A_eff != 0
        used = set()
        for j in range(self.n_struct):
            if self.col_sign[j] < 0:
                continue
            k = self.col_orig[j]
            if k not in problem.nonneg:
                continue
            rows = np.flatnonzero(nz[:, k])
            if len(rows) != 1:
                continue
            i = rows[0]
            if basis[i] == -1 and self.rhs[i] > 0 and self.A_eff[i, k] > 0 and k not in used:
                basis[i] = j
                used.add(k)
        art_rows = []
        for i in range(self.R):
            if basis[i] != -1:
                continue
            if self.rhs[i] == 0 or self.surplus_coef[i] > 0:
                basis[i] = self.n_struct + i
            else:
                art_rows.append(i)
        self.art_row = np.array(art_rows, dtype=int)
        self.n_artificial = len(art_rows)
        for a, i in enumerate(art_rows):
            basis[i] = self.n_struct + self.R + a
        self._index_singletons(nz)
        return basis

    def _index_singletons(self, nz: np.ndarray):
        # single_row[j] is the only row where column j is nonzero, or -1
        counts = nz.sum(axis=0)[self.col_orig]
        single = counts == 1
        struct_row = np.full(self.n_struct, -1)
        struct_coef = np.zeros(self.n_struct)
        if single.any():
            first = np.argmax(nz, axis=0)[self.col_orig[single]]
            struct_row[single] = first
            struct_coef[single] = (self.A_eff[first, self.col_orig[single]]
                                   * self.col_sign[single])
        self.single_row = np.concatenate([struct_row, np.arange(self.R), self.art_row])
        self.single_coef = np.concatenate([struct_coef, self.surplus_coef,
                                           np.ones(self.n_artificial)])

    def recover(self, x: np.ndarray, n_vars: int) -> np.ndarray:
        z = np.zeros(n_vars)
        np.add.at(z, self.col_orig, x[: self.n_struct] * self.col_sign)
        return z


class _BorderedBasis:
    """Basis inverse that exploits singleton columns.

    Basic columns with a single nonzero (surplus, artificial and slack-like
    structural columns) cover a row set ``U``. The remaining ``k`` dense basic
    columns ``S`` are matched with the uncovered rows ``W``, and only the
    ``k x k`` block ``K = B[W, S]`` is inverted. Pivots update ``inv(K)`` by
    rank-one column or row replacement, bordering, or deletion.
    """

    def __init__(self, sf: _StandardForm, basis: np.ndarray):
        self.sf = sf
        self.basis = basis
        self.refactor()

    def refactor(self):
        sf = self.sf
        R = sf.R
        self.pos_row = sf.single_row[self.basis].copy()
        self.pos_coef = sf.single_coef[self.basis].copy()
        sing = np.flatnonzero(self.pos_row >= 0)
        covered = np.zeros(R, dtype=bool)
        covered[self.pos_row[sing]] = True
        if covered.sum() != len(sing):
            raise np.linalg.LinAlgError("singular basis: two singletons share a row")
        self.dense = list(np.flatnonzero(self.pos_row < 0))
        self.W = list(np.flatnonzero(~covered))
        self.BS = sf.matrix(self.basis[self.dense]) if self.dense else np.zeros((R, 0))
        k = len(self.dense)
        self.Kinv = np.linalg.inv(self.BS[self.W]) if k else np.zeros((0, 0))
        self.since = 0

    def ftran(self, a: np.ndarray) -> np.ndarray:
        """``inv(B) @ a``."""
        alpha = np.zeros(len(self.basis))
        if self.dense:
            a_S = self.Kinv @ a[self.W]
            alpha[self.dense] = a_S
            a = a - self.BS @ a_S
        sing = self.pos_row >= 0
        alpha[sing] = a[self.pos_row[sing]] / self.pos_coef[sing]
        return alpha

    def btran(self, c_B: np.ndarray) -> np.ndarray:
        """``c_B @ inv(B)``."""
        y = np.zeros(self.sf.R)
        sing = self.pos_row >= 0
        y[self.pos_row[sing]] = c_B[sing] / self.pos_coef[sing]
        if self.dense:
            rhs = c_B[self.dense] - y @ self.BS
            y[self.W] = rhs @ self.Kinv
        return y

    def row(self, r: int) -> np.ndarray:
        e = np.zeros(len(self.basis))
        e[r] = 1.0
        return self.btran(e)

    def replace(self, r: int, q: int, col: np.ndarray):
        """Basis position ``r`` now holds column ``q`` (``col`` is its dense form)."""
        sf = self.sf
        q_row = sf.single_row[q]
        Kinv = self.Kinv
        if self.pos_row[r] < 0 and q_row < 0:
            j = self.dense.index(r)
            v = Kinv @ col[self.W]
            row_j = Kinv[j] / v[j]
            Kinv -= np.outer(v, row_j)
            Kinv[j] = row_j
            self.BS[:, j] = col
        elif q_row < 0:
            # a singleton leaves row u uncovered; border K with that row and the new column
            u = self.pos_row[r]
            c = col[self.W]
            g = self.BS[u]
            Kc = Kinv @ c
            gK = g @ Kinv
            s = col[u] - g @ Kc
            k = len(self.dense)
            out = np.empty((k + 1, k + 1))
            out[:k, :k] = Kinv + np.outer(Kc / s, gK)
            out[:k, k] = -Kc / s
            out[k, :k] = -gK / s
            out[k, k] = 1.0 / s
            self.Kinv = out
            self.W.append(u)
            self.dense.append(r)
            self.BS = np.column_stack([self.BS, col])
            self.pos_row[r] = -1
        elif self.pos_row[r] < 0:
            # a dense column leaves and a singleton covers row w: drop row w and that column
            i = self.W.index(q_row)
            j = self.dense.index(r)
            keep_c = [t for t in range(len(self.dense)) if t != j]
            keep_r = [t for t in range(len(self.W)) if t != i]
            self.Kinv = (Kinv[np.ix_(keep_c, keep_r)]
                         - np.outer(Kinv[keep_c, i], Kinv[j, keep_r]) / Kinv[j, i])
            del self.W[i]
            del self.dense[j]
            self.BS = np.delete(self.BS, j, axis=1)
            self.pos_row[r] = q_row
            self.pos_coef[r] = sf.single_coef[q]
        else:
            u = self.pos_row[r]
            if q_row != u:
                # singleton moves from row u to row w: row w of K is replaced by row u
                i = self.W.index(q_row)
                gK = self.BS[u] @ Kinv
                pivot = gK[i]
                gK[i] -= 1.0
                Kinv -= np.outer(Kinv[:, i] / pivot, gK)
                self.W[i] = u
            self.pos_row[r] = q_row
            self.pos_coef[r] = sf.single_coef[q]
        self.basis[r] = q
        self.since += 1


class _RevisedSimplex:
    """One solve's mutable state. Not shareable between solves."""

    def __init__(self, sf: _StandardForm, basis: list[int], tol_feas: float, tol_opt: float,
                 max_iter: int, bland_after: int, pricing: str = "dantzig"):
        self.sf = sf
        self.pricing = pricing
        self.basis = np.array(basis, dtype=int)
        self.tol_feas = tol_feas
        self.tol_opt = tol_opt
        self.max_iter = max_iter
        self.bland_after = max(1, bland_after)
        self.iterations = 0
        self.bland = False
        self.degenerate_run = 0
        self.refactor()

    @property
    def since_refactor(self) -> int:
        return self.fac.since

    def refactor(self):
        if not hasattr(self, "fac"):
            self.fac = _BorderedBasis(self.sf, self.basis)
        else:
            self.fac.refactor()
        self.x_B = self.fac.ftran(self.sf.rhs)
        self.x_B[np.abs(self.x_B) < 1e-13] = 0.0

    def run(self, cost: np.ndarray, allowed: np.ndarray) -> LpStatus:
        """Optimize ``cost`` from the current basis; ``allowed`` masks enterable columns."""
        self.bland = False
        self.degenerate_run = 0
        cost_scale = 1.0 + float(np.max(np.abs(cost), initial=0.0))
        weights = np.ones(self.sf.n_cols)
        d = None
        rejected: list[int] = []
        while True:
            if d is None or self.since_refactor >= REFACTOR_EVERY:
                if d is not None:
                    self.refactor()
                d = cost - self.sf.row_products(self.fac.btran(cost[self.basis]))
                d[self.basis] = 0.0
            candidates = allowed & (d < -self.tol_opt * cost_scale)
            twins = self.sf.twin[self.basis[self.basis < self.sf.n_struct]]
            candidates[twins[twins >= 0]] = False
            candidates[rejected] = False
            if not candidates.any():
                if rejected and self.since_refactor == 0:
                    raise np.linalg.LinAlgError(
                        "every improving column gives an unreliable pivot")
                if self.since_refactor == 0:
                    return LpStatus.OPTIMAL
                self.refactor()  # confirm optimality with exact reduced costs
                d = None
                continue
            if self.iterations >= self.max_iter:
                return LpStatus.ITERATION_LIMIT
            if self.bland:
                q = int(np.flatnonzero(candidates)[0])
            elif self.pricing == "devex":
                q = int(np.argmax(np.where(candidates, d * d / weights, -1.0)))
            else:
                q = int(np.argmin(np.where(candidates, d, np.inf)))
            col_q = self.sf.column(q)
            alpha = self.fac.ftran(col_q)
            d_q = cost[q] - cost[self.basis] @ alpha
            if d_q >= -self.tol_opt * cost_scale:
                d[q] = d_q  # the incremental update drifted; reject this candidate
                continue
            d[q] = d_q
            r = self._ratio_test(alpha)
            if r < 0:
                if self.since_refactor > 0:
                    # certify the ray against a fresh factorization
                    self.refactor()
                    d = None
                    continue
                self.ray = (q, alpha)
                return LpStatus.UNBOUNDED
            theta = self.x_B[r] / alpha[r]
            if theta <= self.tol_feas:
                self.degenerate_run += 1
                if self.degenerate_run >= self.bland_after:
                    self.bland = True
            else:
                self.degenerate_run = 0

            leaving = self.basis[r]
            pivot_row = self.sf.row_products(self.fac.row(r)) / alpha[r]
            mismatch = abs(pivot_row[q] - 1.0)
            if mismatch > (PIVOT_MISMATCH_FRESH if self.since_refactor == 0 else PIVOT_MISMATCH):
                # row- and column-wise pivot elements disagree
                if self.since_refactor == 0:
                    rejected.append(q)  # fresh factorization: the pivot itself is unstable
                    continue
                self.refactor()  # the updated inverse has drifted
                d = None
                continue
            self._pivot(r, q, col_q, alpha, theta)
            rejected.clear()
            d -= d[q] * pivot_row
            d[self.basis] = 0.0
            if self.pricing == "devex":
                wq = weights[q]
                np.maximum(weights, pivot_row * pivot_row * wq, out=weights)
                weights[leaving] = max(wq / (alpha[r] * alpha[r]), 1.0)
                if weights.max() > 1e12:
                    weights[:] = 1.0
            self.iterations += 1

    def _ratio_test(self, alpha: np.ndarray) -> int:
        """Harris two-pass ratio test; returns -1 when no row limits the step."""
        idx = np.flatnonzero(alpha > PIVOT_TOL * max(1.0, float(np.max(np.abs(alpha), initial=0.0))))
        if len(idx) == 0:
            # every positive entry is small next to the column's largest entry;
            # a small pivot still beats a false unboundedness verdict
            idx = np.flatnonzero(alpha > PIVOT_TOL)
            if len(idx) == 0:
                return -1
        a = alpha[idx]
        x = np.maximum(self.x_B[idx], 0.0)
        if self.bland:
            ratios = x / a
            ties = idx[ratios <= ratios.min() + self.tol_feas]
            return int(ties[np.argmin(self.basis[ties])])
        bound = np.min((x + self.tol_feas) / a)
        ok = x / a <= bound
        return int(idx[ok][np.argmax(a[ok])])

    def _pivot(self, r: int, q: int, col_q: np.ndarray, alpha: np.ndarray, theta: float):
        theta = max(theta, 0.0)
        self.x_B -= theta * alpha
        self.x_B[r] = theta
        self.x_B[np.abs(self.x_B) < 1e-13] = 0.0
        self.fac.replace(r, q, col_q)

    def drive_out(self, is_artificial: np.ndarray, allowed: np.ndarray):
        """Pivot zero-level artificials out of the basis where a column allows it."""
        for r in range(len(self.basis)):
            if not is_artificial[self.basis[r]]:
                continue
            row = self.sf.row_products(self.fac.row(r))
            row[~allowed] = 0.0
            row[self.basis] = 0.0
            q = int(np.argmax(np.abs(row)))
            if abs(row[q]) <= PIVOT_TOL:
                continue  # redundant row; artificial stays basic at zero
            col_q = self.sf.column(q)
            self._pivot(r, q, col_q, self.fac.ftran(col_q), 0.0)
            self.iterations += 1

    def x_full(self) -> np.ndarray:
        x = np.zeros(self.sf.n_cols)
        x[self.basis] = np.maximum(self.x_B, 0.0)
        return x


def lp_solve(problem: LpProblem, tol_feas: float = 1e-9, tol_opt: float = 1e-9,
             max_iter: int | None = None, pricing: str = "devex") -> LpSolution:
    """Solve ``problem`` with the two-phase revised simplex method.

    Columns are scaled to unit max-norm first. Entering columns are chosen by
    Devex (or ``pricing="dantzig"``) until ``n_vars`` consecutive degenerate
    pivots occur, after which Bland's rule is engaged for the rest of that
    phase. The basis inverse is refactorized every ``REFACTOR_EVERY`` pivots.
    May raise ``numpy.linalg.LinAlgError`` when no numerically safe pivot exists.
    """
    if pricing not in ("dantzig", "devex"):
        raise ValueError(f"unknown pricing rule {pricing!r}")
    scale = np.max(np.abs(problem.A), axis=0, initial=0.0)
    scale[scale == 0] = 1.0
    scaled = LpProblem(problem.c / scale, problem.A / scale, problem.b, problem.nonneg)
    sol = _two_phase(scaled, tol_feas, tol_opt, max_iter, pricing)
    if sol.z is None:
        return sol
    z = sol.z / scale
    return LpSolution(sol.status, z, float(problem.c @ z), sol.iterations)


def _two_phase(problem: LpProblem, tol_feas: float, tol_opt: float, max_iter: int | None,
               pricing: str) -> LpSolution:
    sf = _StandardForm(problem)
    basis = sf.initial_basis(problem)
    n_cols = sf.n_cols
    if max_iter is None:
        max_iter = 50 * (sf.R + n_cols)
    solver = _RevisedSimplex(sf, basis, tol_feas, tol_opt, max_iter, bland_after=problem.n_vars,
                             pricing=pricing)

    is_art = np.zeros(n_cols, dtype=bool)
    is_art[sf.n_struct + sf.R:] = True
    real = ~is_art
    b_scale = 1.0 + float(np.max(np.abs(problem.b), initial=0.0))

    if sf.n_artificial:
        cost1 = is_art.astype(float)
        status = solver.run(cost1, np.ones(n_cols, dtype=bool))
        if status is LpStatus.ITERATION_LIMIT:
            return LpSolution(status, None, math.nan, solver.iterations)
        solver.refactor()
        infeas = float(solver.x_full() @ cost1)
        if infeas > tol_feas * b_scale:
            return LpSolution(LpStatus.INFEASIBLE, None, math.nan, solver.iterations)
        solver.drive_out(is_art, real)

    cost2 = np.zeros(n_cols)
    cost2[: sf.n_struct] = sf.c_struct
    paired = np.flatnonzero(sf.twin >= 0)
    if np.any(sf.c_struct[paired] + sf.c_struct[sf.twin[paired]] < -tol_opt):
        # raising both halves of a pair is a feasible improving ray
        return LpSolution(LpStatus.UNBOUNDED, None, -math.inf, solver.iterations)
    status = solver.run(cost2, real)
    if status is LpStatus.OPTIMAL:
        solver.refactor()
        _certify_primal(solver)
        x = solver.x_full()
        z = sf.recover(x, problem.n_vars)
        return LpSolution(status, z, float(problem.c @ z), solver.iterations)
    if status is LpStatus.UNBOUNDED:
        return LpSolution(status, None, -math.inf, solver.iterations)
    return LpSolution(status, None, math.nan, solver.iterations)


def _certify_primal(solver: _RevisedSimplex):
    """A freshly factorized basis must reproduce a nonnegative point."""
    x = solver.x_B
    tol = CERTIFY_TOL * (1.0 + float(np.max(np.abs(x), initial=0.0)))
    if np.min(x, initial=0.0) < -tol:
        raise np.linalg.LinAlgError(
            f"final basis is primal infeasible by {-np.min(x):.3g}; the LP is too ill-conditioned")


class OracleTooLargeError(ValueError):
    pass


def lp_enumerate_oracle(problem: LpProblem, tol: float = 1e-9) -> LpSolution:
    """Exact optimum of a small LP by enumerating every basic solution.

    Independent of :func:`lp_solve`: the standard form is rebuilt here and no
    pivoting is done. Unboundedness is decided by enumerating the extreme rays
    of the recession cone ``{d >= 0 : A_std d = 0, sum(d) = 1}``.
    """
    A, b, c = problem.A, problem.b, problem.c
    R, N = A.shape
    cols, costs, owner = [], [], []
    for j in range(N):
        cols.append(A[:, j])
        costs.append(c[j])
        owner.append((j, 1.0))
        if j not in problem.nonneg:
            cols.append(-A[:, j])
            costs.append(-c[j])
            owner.append((j, -1.0))
    for i in range(R):
        e = np.zeros(R)
        e[i] = -1.0
        cols.append(e)
        costs.append(0.0)
        owner.append((None, 0.0))
    M = np.column_stack(cols) if cols else np.zeros((R, 0))
    cost = np.array(costs)
    n_std = M.shape[1]
    if n_std > ORACLE_MAX_VARS or R > ORACLE_MAX_ROWS:
        raise OracleTooLargeError(
            f"enumeration limited to {ORACLE_MAX_VARS} variables and {ORACLE_MAX_ROWS} rows; "
            f"got {n_std} and {R}"
        )

    def to_z(x):
        z = np.zeros(N)
        for k, (j, s) in enumerate(owner):
            if j is not None:
                z[j] += s * x[k]
        return z

    best = None
    for subset in itertools.combinations(range(n_std), R):
        B = M[:, subset]
        if abs(np.linalg.det(B)) < 1e-10:
            continue
        xb = np.linalg.solve(B, b)
        if np.any(xb < -tol * (1 + np.abs(b).max(initial=0.0))):
            continue
        obj = float(cost[list(subset)] @ xb)
        if best is None or obj < best[0] - 1e-12:
            best = (obj, subset, xb)
    if best is None:
        return LpSolution(LpStatus.INFEASIBLE, None, math.nan, 0)

    # recession cone rays
    Mc = np.vstack([M, np.ones(n_std)])
    rhs = np.zeros(R + 1)
    rhs[-1] = 1.0
    for subset in itertools.combinations(range(n_std), R + 1):
        B = Mc[:, subset]
        if abs(np.linalg.det(B)) < 1e-10:
            continue
        d = np.linalg.solve(B, rhs)
        if np.any(d < -tol):
            continue
        if float(cost[list(subset)] @ d) < -1e-9:
            return LpSolution(LpStatus.UNBOUNDED, None, -math.inf, 0)

    obj, subset, xb = best
    x = np.zeros(n_std)
    x[list(subset)] = xb
    z = to_z(x)
    return LpSolution(LpStatus.OPTIMAL, z, float(c @ z), 0)


def dump_problem(problem: LpProblem, fh: IO[str]) -> None:
    """Write ``problem`` in the plain-text debug layout described in docs/formats.md."""
    R, N = problem.A.shape
    fh.write(f"{R} {N}\n")
    fh.write(" ".join(repr(float(v)) for v in problem.c) + "\n")
    for row in problem.A:
        fh.write(" ".join(repr(float(v)) for v in row) + "\n")
    fh.write(" ".join(repr(float(v)) for v in problem.b) + "\n")
    fh.write(" ".join(str(j) for j in sorted(problem.nonneg)) + "\n")


def load_problem(fh: IO[str]) -> LpProblem:
    lines = fh.read().split("\n")
    R, N = (int(t) for t in lines[0].split())

    def floats(line):
        return [float(t) for t in line.split()]

    c = floats(lines[1])
    A = [floats(lines[2 + i]) for i in range(R)]
    b = floats(lines[2 + R])
    nonneg = frozenset(int(t) for t in lines[3 + R].split())
    return LpProblem(np.array(c), np.array(A).reshape(R, N), np.array(b), nonneg)
