"""Independent checks for LP solutions, shared by the LP and acceptance tests."""

import numpy as np
from scipy.optimize import nnls

ACTIVE_TOL = 1e-8


def random_feasible_lp(rng, n_max=40, m_max=80, unbounded_frac=0.1):
    """Random program with a known interior-ish feasible point."""
    n = int(rng.integers(1, n_max + 1))
    m = int(rng.integers(1, m_max + 1))
    A = rng.standard_normal((m, n))
    lo = -rng.uniform(0.5, 2.0, n)
    hi = rng.uniform(0.5, 2.0, n)
    lo[rng.random(n) < unbounded_frac] = -np.inf
    hi[rng.random(n) < unbounded_frac] = np.inf
    v0 = rng.uniform(np.where(np.isfinite(lo), lo, -1.0), np.where(np.isfinite(hi), hi, 1.0))
    b = A @ v0 - rng.uniform(0.0, 1.0, m)
    return rng.standard_normal(n), A, b, lo, hi


def feasibility_violation(p, v):
    rows = np.max(np.maximum(p.b - p.A @ v, 0.0), initial=0.0)
    box = max(np.max(np.maximum(p.lower - v, 0.0)), np.max(np.maximum(v - p.upper, 0.0)))
    return max(rows, box)


def kkt_residual(p, v):
    """Smallest ``||sum lambda_i g_i - c||_inf`` over nonnegative multipliers on
    the constraints active at ``v`` (found by NNLS, not taken from the solver)."""
    grads = []
    for i in np.flatnonzero(p.A @ v - p.b <= ACTIVE_TOL * (1 + np.abs(p.b))):
        grads.append(p.A[i])
    n = p.n
    for j in range(n):
        e = np.zeros(n)
        if np.isfinite(p.lower[j]) and v[j] - p.lower[j] <= ACTIVE_TOL:
            e[j] = 1.0
            grads.append(e.copy())
        if np.isfinite(p.upper[j]) and p.upper[j] - v[j] <= ACTIVE_TOL:
            e[j] = -1.0
            grads.append(e.copy())
    if not grads:
        return float(np.max(np.abs(p.cost)))
    Gm = np.array(grads).T
    lam, _ = nnls(Gm, p.cost, maxiter=50 * Gm.shape[1])
    return float(np.max(np.abs(Gm @ lam - p.cost)))
