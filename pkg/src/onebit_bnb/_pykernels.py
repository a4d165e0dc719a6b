"""Pure-Python/numpy versions of the hot kernels.

Both kernels have compiled twins in ``_ckernels.pyx`` with identical
signatures and pivoting rules; :mod:`onebit_bnb.kernels` picks one at import.
"""

import numpy as np

BASIC, AT_LOWER, AT_UPPER, FREE, FIXED = 0, 1, 2, 3, 4
OPTIMAL, INFEASIBLE, UNBOUNDED, BUDGET = 0, 1, 2, 3

_TIE = 1e-12


def simplex_loop(T, beta, basic, status, c, lo, hi, max_pivots, tol_feas, tol_opt, tol_piv):
    """Bounded-variable primal simplex iterations on a dense tableau.

    ``T = B^-1 [A, -I]`` (m x N) and ``beta`` (basic values) are updated in
    place together with ``basic`` and ``status``.  While some basic variable
    violates its bounds the cost is the sum of infeasibilities (phase 1),
    otherwise ``c``.  Entering and leaving choices follow Bland's lowest-index
    rule.  Returns ``(code, iterations)``; ``BUDGET`` means ``max_pivots``
    iterations were spent without a verdict.
    """
    m, N = T.shape
    its = 0
    while True:
        bl = lo[basic]
        bh = hi[basic]
        below = beta < bl - tol_feas
        above = beta > bh + tol_feas
        phase1 = bool(below.any() or above.any())
        if phase1:
            cb = above.astype(float) - below.astype(float)
            d = -(cb @ T)
        else:
            d = c - c[basic] @ T

        eligible = (
            ((status == AT_LOWER) & (d < -tol_opt))
            | ((status == AT_UPPER) & (d > tol_opt))
            | ((status == FREE) & (np.abs(d) > tol_opt))
        )
        cand = np.flatnonzero(eligible)
        if cand.size == 0:
            return (INFEASIBLE if phase1 else OPTIMAL), its
        if its >= max_pivots:
            return BUDGET, its

        q = int(cand[0])
        direction = 1.0 if (status[q] == AT_LOWER or (status[q] == FREE and d[q] < 0)) else -1.0
        alpha = direction * T[:, q]

        t_row = np.full(m, np.inf)
        leave_at = np.zeros(m, dtype=np.int64)
        dec = alpha > tol_piv
        inc = alpha < -tol_piv
        feasible = ~(below | above)
        # decreasing basics stop at their lower bound, or at the violated upper bound
        sel = dec & above
        t_row[sel] = (beta[sel] - bh[sel]) / alpha[sel]
        leave_at[sel] = AT_UPPER
        sel = dec & feasible & np.isfinite(bl)
        t_row[sel] = (beta[sel] - bl[sel]) / alpha[sel]
        leave_at[sel] = AT_LOWER
        sel = inc & below
        t_row[sel] = (bl[sel] - beta[sel]) / -alpha[sel]
        leave_at[sel] = AT_LOWER
        sel = inc & feasible & np.isfinite(bh)
        t_row[sel] = (bh[sel] - beta[sel]) / -alpha[sel]
        leave_at[sel] = AT_UPPER
        np.maximum(t_row, 0.0, out=t_row)

        t_min = t_row.min() if m else np.inf
        t_flip = hi[q] - lo[q]
        if np.isinf(t_min) and np.isinf(t_flip):
            if phase1:
                raise FloatingPointError("unbounded ray in phase 1")
            return UNBOUNDED, its

        its += 1
        if t_flip <= t_min:
            beta -= t_flip * alpha
            status[q] = AT_UPPER if status[q] == AT_LOWER else AT_LOWER
            continue

        ties = np.flatnonzero(t_row <= t_min + _TIE)
        r = int(ties[np.argmin(basic[ties])])
        leaving = basic[r]
        if status[q] == AT_LOWER:
            x_q = lo[q]
        elif status[q] == AT_UPPER:
            x_q = hi[q]
        else:
            x_q = 0.0
        beta -= t_min * alpha
        beta[r] = x_q + direction * t_min

        pivot_row = T[r] / T[r, q]
        T -= np.outer(T[:, q], pivot_row)
        T[r] = pivot_row
        basic[r] = q
        status[q] = BASIC
        status[leaving] = FIXED if lo[leaving] == hi[leaving] else leave_at[r]


def _lex_smaller(a, b):
    """True when sign mask ``a`` is the lexicographically smaller real vector.

    Bit j set means coordinate j is negative.
    """
    diff = a ^ b
    if diff == 0:
        return False
    low = diff & -diff
    return bool(a & low)


def best_sign_pattern(G, amp, tie_tol, chunk=1 << 15):
    """Exhaustive max-min search over all sign vectors ``amp * (+-1)^n``.

    Returns ``(mask, value)``: the mask of the lexicographically smallest
    vector among those whose smallest entry of ``G @ x`` lies within
    ``tie_tol`` of the maximum, and that maximum.
    """
    R, n = G.shape
    total = 1 << n
    bits = np.arange(n, dtype=np.int64)

    def chunks():
        for start in range(0, total, chunk):
            masks = np.arange(start, min(start + chunk, total), dtype=np.int64)
            signs = 1.0 - 2.0 * ((masks[:, None] >> bits) & 1)
            yield masks, (amp * signs @ G.T).min(axis=1)

    best = -np.inf
    for _, eps in chunks():
        best = max(best, float(eps.max()))
    pick = -1
    for masks, eps in chunks():
        for mask in masks[eps >= best - tie_tol]:
            mask = int(mask)
            if pick < 0 or _lex_smaller(mask, pick):
                pick = mask
    return pick, best
