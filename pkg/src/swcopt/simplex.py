"""Self-contained two-phase revised simplex with Bland's anti-cycling rule.

Desk-scale by design: dense basis inverse maintained by product-form
updates with a full refactorization every 64 pivots.  Instances whose
standardized size exceeds the limit are refused (route those to HiGHS or
an external solver) unless force=True.
"""
from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .lp import LPInstance, SolveResult, SolverError, Status
from .model import EQ, GE, LE

REFACTOR_EVERY = 64
DEFAULT_SIZE_LIMIT = 6000
_PIVOT_TOL = 1e-9


class BuiltinSizeLimitError(SolverError):
    """Raised when an instance is too large for the dense builtin solver."""


@dataclass
class _StandardForm:
    A: np.ndarray          # (m, n) equality system A x = b, x >= 0
    b: np.ndarray
    c: np.ndarray
    offset: float          # objective constant from bound shifts
    # per original variable: (constant, [(std col, coefficient), ...])
    recover: list[tuple[float, list[tuple[int, float]]]]
    slack_plus: np.ndarray  # per row: slack column with +1 coefficient, or -1


def _standardize(lp: LPInstance) -> _StandardForm | None:
    """Rewrite into equality standard form with nonnegative variables.

    Returns None when a trivially empty row is inconsistent (infeasible).
    """
    cols_of: list[list[tuple[int, float]]] = []
    const_of: list[float] = []
    ncols = 0
    extra_rows: list[tuple[int, float]] = []  # (std col, upper) for boxed vars
    for j in range(lp.ncols):
        lo, hi = lp.lower[j], lp.upper[j]
        if np.isinf(lo) and np.isinf(hi):
            cols_of.append([(ncols, 1.0), (ncols + 1, -1.0)])
            const_of.append(0.0)
            ncols += 2
        elif np.isinf(hi):
            cols_of.append([(ncols, 1.0)])
            const_of.append(float(lo))
            ncols += 1
        elif np.isinf(lo):
            cols_of.append([(ncols, -1.0)])
            const_of.append(float(hi))
            ncols += 1
        else:
            cols_of.append([(ncols, 1.0)])
            const_of.append(float(lo))
            extra_rows.append((ncols, float(hi - lo)))
            ncols += 1

    rows: list[dict[int, float]] = []
    rhs: list[float] = []
    senses: list[str] = []
    for i in range(lp.nrows):
        cols, vals = lp.row(i)
        coefs: dict[int, float] = {}
        shift = 0.0
        for col, val in zip(cols, vals):
            shift += val * const_of[col]
            for std_col, a in cols_of[col]:
                coefs[std_col] = coefs.get(std_col, 0.0) + val * a
        coefs = {k: v for k, v in coefs.items() if v != 0.0}
        r = lp.rhs[i] - shift
        if not coefs:
            s = lp.senses[i]
            ok = (s == LE and r >= -1e-12) or (s == GE and r <= 1e-12) or (
                s == EQ and abs(r) <= 1e-12
            )
            if not ok:
                return None
            continue  # trivially satisfied empty row
        rows.append(coefs)
        rhs.append(r)
        senses.append(lp.senses[i])
    for std_col, width in extra_rows:
        rows.append({std_col: 1.0})
        rhs.append(width)
        senses.append(LE)

    m = len(rows)
    n_slack = sum(1 for s in senses if s != EQ)
    n = ncols + n_slack
    A = np.zeros((m, n))
    b = np.array(rhs)
    slack_plus = np.full(m, -1, dtype=np.int64)
    k = ncols
    for i, (coefs, s) in enumerate(zip(rows, senses)):
        for col, val in coefs.items():
            A[i, col] = val
        if s != EQ:
            A[i, k] = 1.0 if s == LE else -1.0
            if s == LE:
                slack_plus[i] = k
            k += 1
    # normalize to b >= 0
    neg = b < 0
    A[neg] *= -1.0
    b[neg] = -b[neg]
    for i in np.nonzero(neg)[0]:
        slack_plus[i] = -1
        srow = np.nonzero(A[i, ncols:])[0]
        if srow.size and A[i, ncols + srow[0]] == 1.0:
            slack_plus[i] = ncols + srow[0]

    c = np.zeros(n)
    offset = 0.0
    for j in range(lp.ncols):
        offset += lp.obj[j] * const_of[j]
        for std_col, a in cols_of[j]:
            c[std_col] += lp.obj[j] * a
    recover = [(const_of[j], cols_of[j]) for j in range(lp.ncols)]
    return _StandardForm(A, b, c, offset, recover, slack_plus)


class _Core:
    """Revised simplex over one coefficient matrix, shared by both phases."""

    def __init__(self, A: np.ndarray, b: np.ndarray, tol: float, max_iter: int):
        self.A = A
        self.b = b
        self.tol = tol
        self.max_iter = max_iter
        self.iterations = 0
        self.basis: np.ndarray
        self.B_inv: np.ndarray
        self.xB: np.ndarray

    def set_basis(self, basis: np.ndarray) -> None:
        self.basis = basis.copy()
        self.refactor()

    def refactor(self) -> None:
        B = self.A[:, self.basis]
        try:
            self.B_inv = np.linalg.inv(B)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - guarded by pivots
            raise SolverError("basis became singular") from exc
        self.xB = self.B_inv @ self.b

    def run(self, c: np.ndarray, allowed: np.ndarray, on_leave=None) -> Status:
        """Minimize c'x from the current basis; Bland's rule throughout."""
        A, tol = self.A, self.tol
        since_refactor = 0
        while True:
            if self.iterations >= self.max_iter:
                return Status.ITERATION_LIMIT
            if since_refactor >= REFACTOR_EVERY:
                self.refactor()
                since_refactor = 0
            y = c[self.basis] @ self.B_inv
            reduced = c - y @ A
            reduced[~allowed] = 0.0
            reduced[self.basis] = 0.0
            entering = np.nonzero(reduced < -tol)[0]
            if entering.size == 0:
                return Status.OPTIMAL
            j = int(entering[0])
            d = self.B_inv @ A[:, j]
            pos = d > _PIVOT_TOL
            if not pos.any():
                return Status.UNBOUNDED
            xB_pos = np.maximum(self.xB, 0.0)
            ratios = np.full(d.shape, np.inf)
            ratios[pos] = xB_pos[pos] / d[pos]
            theta = ratios.min()
            ties = np.nonzero(ratios <= theta + 1e-12 * (1.0 + abs(theta)))[0]
            r = int(ties[np.argmin(self.basis[ties])])
            leaving = int(self.basis[r])
            self.basis[r] = j
            self.xB -= theta * d
            self.xB[r] = theta
            piv = d[r]
            self.B_inv[r] /= piv
            d_others = d.copy()
            d_others[r] = 0.0
            self.B_inv -= np.outer(d_others, self.B_inv[r])
            self.iterations += 1
            since_refactor += 1
            if on_leave is not None:
                on_leave(leaving)


def solve_builtin(
    lp: LPInstance,
    tol: float = 1e-9,
    max_iter: int | None = None,
    size_limit: int = DEFAULT_SIZE_LIMIT,
    force: bool = False,
) -> SolveResult:
    """Two-phase revised simplex.  Optimal solutions satisfy every row and
    bound within tol; Bland's rule makes the pivot sequence deterministic."""
    t0 = time.perf_counter()
    std = _standardize(lp)
    if std is None:
        return SolveResult(Status.INFEASIBLE, None, None, 0, time.perf_counter() - t0)
    m, n = std.A.shape
    if not force and m + n > size_limit:
        raise BuiltinSizeLimitError(
            f"standardized instance has {m} rows + {n} cols > limit {size_limit}; "
            "use solver='highs', an external solver, or force=True"
        )
    if max_iter is None:
        max_iter = 50 * (m + n)

    # initial basis: row slack where it has +1 coefficient, else artificial
    n_art = 0
    basis = np.empty(m, dtype=np.int64)
    art_rows = []
    for i in range(m):
        if std.slack_plus[i] >= 0:
            basis[i] = std.slack_plus[i]
        else:
            art_rows.append(i)
            n_art += 1
    if n_art:
        A = np.hstack([std.A, np.zeros((m, n_art))])
        for k, i in enumerate(art_rows):
            A[i, n + k] = 1.0
            basis[i] = n + k
    else:
        A = std.A

    core = _Core(A, std.b, tol, max_iter)
    core.set_basis(basis)
    allowed = np.ones(A.shape[1], dtype=bool)

    if n_art:
        c1 = np.zeros(A.shape[1])
        c1[n:] = 1.0

        def drop_artificial(leaving: int) -> None:
            if leaving >= n:
                allowed[leaving] = False

        status = core.run(c1, allowed, on_leave=drop_artificial)
        if status is Status.ITERATION_LIMIT:
            return SolveResult(status, None, None, core.iterations, time.perf_counter() - t0)
        feas_gap = float(c1[core.basis] @ np.maximum(core.xB, 0.0))
        if status is not Status.OPTIMAL or feas_gap > tol * (1.0 + abs(std.b).max(initial=0.0)) * 100:
            return SolveResult(
                Status.INFEASIBLE, None, None, core.iterations, time.perf_counter() - t0
            )
        keep = _purge_artificials(core, n, allowed)
        if keep is not None:
            core = keep

    c2 = np.concatenate([std.c, np.zeros(core.A.shape[1] - n)]) if core.A.shape[1] > n else std.c
    allowed2 = np.ones(core.A.shape[1], dtype=bool)
    allowed2[n:] = False  # any artificial column still present stays out
    status = core.run(c2.copy(), allowed2)
    elapsed = time.perf_counter() - t0
    if status is Status.OPTIMAL:
        x_std = np.zeros(core.A.shape[1])
        x_std[core.basis] = np.maximum(core.xB, 0.0)
        x = np.empty(lp.ncols)
        for j, (const, refs) in enumerate(std.recover):
            x[j] = const + sum(coef * x_std[col] for col, coef in refs)
        return SolveResult(Status.OPTIMAL, float(lp.obj @ x), x, core.iterations, elapsed)
    if status is Status.UNBOUNDED:
        return SolveResult(Status.UNBOUNDED, None, None, core.iterations, elapsed)
    return SolveResult(Status.ITERATION_LIMIT, None, None, core.iterations, elapsed)


def _purge_artificials(core: _Core, n: int, allowed: np.ndarray) -> _Core | None:
    """Pivot zero-level artificials out of the basis; drop rows that prove
    linearly dependent.  Returns a rebuilt core when rows were dropped."""
    redundant = []
    for r in range(core.basis.size):
        if core.basis[r] < n:
            continue
        row = core.B_inv[r] @ core.A[:, :n]
        candidates = np.nonzero(np.abs(row) > 1e-7)[0]
        picked = -1
        in_basis = set(core.basis.tolist())
        for j in candidates:
            if j not in in_basis and allowed[j]:
                picked = int(j)
                break
        if picked < 0:
            redundant.append(r)
            continue
        d = core.B_inv @ core.A[:, picked]
        piv = d[r]
        core.basis[r] = picked
        core.B_inv[r] /= piv
        d_others = d.copy()
        d_others[r] = 0.0
        core.B_inv -= np.outer(d_others, core.B_inv[r])
        core.xB = core.B_inv @ core.b
    if not redundant:
        return None
    keep_rows = np.setdiff1d(np.arange(core.basis.size), np.array(redundant, dtype=np.int64))
    new = _Core(core.A[keep_rows][:, :], core.b[keep_rows], core.tol, core.max_iter)
    new.iterations = core.iterations
    new.set_basis(core.basis[keep_rows])
    return new
