"""Dense LP solver for ``min c^T v  s.t.  A v >= b,  lower <= v <= upper``.

The method is a bounded-variable primal simplex (an active-set method on the
inequality form): every row gets a surplus ``s_i = a_i^T v - b_i >= 0`` and a
vertex is described by which structural variables and surpluses sit at a
bound.  Infeasible starting points are repaired by minimising the sum of
bound violations, so any basis, cold or warm, is a valid starting point.
The iteration loop runs in :mod:`onebit_bnb.kernels`; this module builds
and refactors the tableau and packages the result.
"""

from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionError, IterationLimitError

TOL_FEAS = 1e-9
TOL_OPT = 1e-9
TOL_PIVOT = 1e-11
REFACTOR_EVERY = 50


@dataclass
class LinearProgram:
    """Inequality-plus-box linear program; infinite bounds are allowed."""

    cost: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lower: np.ndarray = None
    upper: np.ndarray = None

    def __post_init__(self):
        self.cost = np.asarray(self.cost, dtype=float).ravel()
        n = self.cost.shape[0]
        self.A = np.atleast_2d(np.asarray(self.A, dtype=float))
        self.b = np.asarray(self.b, dtype=float).ravel()
        self.lower = np.full(n, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float).ravel()
        self.upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float).ravel()
        m = self.b.shape[0]
        if n < 1 or m < 1:
            raise DimensionError("LP needs at least one variable and one inequality row")
        if self.A.shape != (m, n):
            raise DimensionError(f"A has shape {self.A.shape}, expected {(m, n)}")
        if self.lower.shape != (n,) or self.upper.shape != (n,):
            raise DimensionError("bounds must have one entry per variable")
        if np.any(self.lower > self.upper):
            raise ValueError("lower bound exceeds upper bound")
        if np.any(self.lower == np.inf) or np.any(self.upper == -np.inf):
            raise ValueError("bounds must not exclude every finite value")
        if not (np.all(np.isfinite(self.A)) and np.all(np.isfinite(self.b)) and np.all(np.isfinite(self.cost))):
            raise ValueError("LP data must be finite")

    @property
    def n(self):
        return self.cost.shape[0]

    @property
    def m(self):
        return self.b.shape[0]


@dataclass(frozen=True)
class WarmStart:
    """Basis descriptor of a solved LP, reusable on a program with the same
    ``A`` and ``cost`` but different ``b`` or bounds.

    Indices ``0..n-1`` are structural variables, ``n..n+m-1`` the row surpluses.
    """

    basic: tuple
    status: tuple
    n: int
    m: int

    def drop_leading(self, k=1):
        """Handle for the program whose first ``k`` variables were fixed and removed."""
        if not 0 <= k <= self.n:
            raise ValueError("cannot drop more variables than the program has")
        basic = tuple(j - k for j in self.basic if j >= k)
        return WarmStart(basic, self.status[k:], self.n - k, self.m)


@dataclass
class LpSolution:
    status: str
    v: np.ndarray = None
    objective: float = None
    iterations: int = 0
    warm_handle: WarmStart = None
    duals: np.ndarray = field(default=None, repr=False)
    reduced_costs: np.ndarray = field(default=None, repr=False)


def _nonbasic_status(lo, hi):
    status = np.where(np.isfinite(lo), kernels.AT_LOWER,
                      np.where(np.isfinite(hi), kernels.AT_UPPER, kernels.FREE))
    status[lo == hi] = kernels.FIXED
    return status.astype(np.int64)


def _sanitize(status, lo, hi):
    """Make nonbasic statuses consistent with (possibly changed) bounds."""
    fresh = _nonbasic_status(lo, hi)
    nb = status != kernels.BASIC
    keep = nb & (
        ((status == kernels.AT_LOWER) & np.isfinite(lo) & (lo != hi))
        | ((status == kernels.AT_UPPER) & np.isfinite(hi) & (lo != hi))
    )
    out = status.copy()
    out[nb & ~keep] = fresh[nb & ~keep]
    return out


def _warm_basis(warm, Afull, lo, hi, n, m):
    """Rebuild a nonsingular basis from a (possibly trimmed) handle, or None."""
    if warm.n != n or warm.m != m or len(warm.status) != n + m:
        return None
    status = np.array(warm.status, dtype=np.int64)
    basic = [j for j in warm.basic if status[j] == kernels.BASIC]
    # variables dropped from the basis are replaced by surpluses in index order
    for j in range(n, n + m):
        if len(basic) == m:
            break
        if status[j] == kernels.BASIC:
            continue
        trial = basic + [j]
        if np.linalg.matrix_rank(Afull[:, trial]) == len(trial):
            basic.append(j)
            status[j] = kernels.BASIC
    if len(basic) != m:
        return None
    status = _sanitize(status, lo, hi)
    return np.array(basic, dtype=np.int64), status


def _basis_solve(A, basic, rhs):
    """Solve ``B z = rhs`` for the basis ``B`` of ``[A, -I]``.

    Only the square block of ``A`` on the basic structural columns and the
    rows whose surplus is nonbasic is factored; surplus rows follow by
    substitution.
    """
    m, n = A.shape
    pos_struct = np.flatnonzero(basic < n)
    pos_slack = np.flatnonzero(basic >= n)
    cols = basic[pos_struct]
    slack_rows = basic[pos_slack] - n
    tight = np.ones(m, dtype=bool)
    tight[slack_rows] = False
    z = np.empty((m,) + rhs.shape[1:])
    if cols.size:
        zs = np.linalg.solve(A[np.ix_(tight, cols)], rhs[tight])
        z[pos_struct] = zs
        z[pos_slack] = A[np.ix_(slack_rows, cols)] @ zs - rhs[slack_rows]
    else:
        z[pos_slack] = -rhs[slack_rows]
    return z


def _factor(Afull, b, basic, status, lo, hi):
    m, N = Afull.shape
    xN = np.where(status == kernels.AT_LOWER, lo,
                  np.where(status == kernels.AT_UPPER, hi,
                           np.where(status == kernels.FIXED, lo, 0.0)))
    xN[basic] = 0.0
    rhs = np.empty((m, N + 1))
    rhs[:, :N] = Afull
    rhs[:, N] = b - Afull @ xN
    z = _basis_solve(Afull[:, : N - m], basic, rhs)
    T = np.ascontiguousarray(z[:, :N])
    T[:, basic] = np.eye(m)
    return T, np.ascontiguousarray(z[:, N]), xN


def solve_lp(p, warm=None, *, max_iter=None, kernel=None):
    """Solve ``p``; ``warm`` is a :class:`WarmStart` from a related program.

    Returns an :class:`LpSolution` with status ``optimal``, ``infeasible`` or
    ``unbounded``.  Raises :class:`IterationLimitError` when ``max_iter``
    iterations pass without a verdict.
    """
    loop = kernels.simplex_loop if kernel is None else kernel
    n, m = p.n, p.m
    Afull = np.hstack([p.A, -np.eye(m)])
    cfull = np.concatenate([p.cost, np.zeros(m)])
    lo = np.concatenate([p.lower, np.zeros(m)])
    hi = np.concatenate([p.upper, np.full(m, np.inf)])
    if max_iter is None:
        max_iter = 50 * (n + m) + 1000

    start = _warm_basis(warm, Afull, lo, hi, n, m) if warm is not None else None
    if start is None:
        basic = np.arange(n, n + m, dtype=np.int64)
        status = _nonbasic_status(lo, hi)
        status[basic] = kernels.BASIC
    else:
        basic, status = start

    total = 0
    while True:
        try:
            T, beta, xN = _factor(Afull, p.b, basic, status, lo, hi)
        except np.linalg.LinAlgError:
            # singular warm basis; restart cold
            basic = np.arange(n, n + m, dtype=np.int64)
            status = _nonbasic_status(lo, hi)
            status[basic] = kernels.BASIC
            continue
        budget = min(REFACTOR_EVERY, max_iter - total)
        code, its = loop(T, beta, basic, status, cfull, lo, hi, budget, TOL_FEAS, TOL_OPT, TOL_PIVOT)
        total += its
        if code == kernels.BUDGET:
            if total >= max_iter:
                raise IterationLimitError(f"no verdict after {total} iterations")
            continue
        if code == kernels.OPTIMAL and its > 0:
            continue  # confirm on a fresh factorization
        break

    handle = WarmStart(tuple(int(j) for j in basic), tuple(int(k) for k in status), n, m)
    if code == kernels.INFEASIBLE:
        return LpSolution("infeasible", iterations=total, warm_handle=handle)
    if code == kernels.UNBOUNDED:
        return LpSolution("unbounded", iterations=total, warm_handle=handle)

    x = xN.copy()
    x[basic] = beta
    v = x[:n]
    # surplus-basic rows carry zero multipliers
    y = np.zeros(m)
    cols = basic[basic < n]
    tight = np.ones(m, dtype=bool)
    tight[basic[basic >= n] - n] = False
    if cols.size:
        y[tight] = np.linalg.solve(p.A[np.ix_(tight, cols)].T, p.cost[cols])
    reduced = p.cost - p.A.T @ y
    return LpSolution(
        "optimal",
        v=v,
        objective=float(p.cost @ v),
        iterations=total,
        warm_handle=handle,
        duals=y,
        reduced_costs=reduced,
    )
