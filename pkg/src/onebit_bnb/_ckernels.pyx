# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled twins of the kernels in ``_pykernels``.

Same signatures, same pivoting and tie rules.
"""

from libc.math cimport INFINITY, fabs, isinf, isfinite
import numpy as np

cdef enum:
    BASIC = 0
    AT_LOWER = 1
    AT_UPPER = 2
    FREE = 3
    FIXED = 4

cdef enum:
    OPTIMAL = 0
    INFEASIBLE = 1
    UNBOUNDED = 2
    BUDGET = 3

cdef double _TIE = 1e-12


def simplex_loop(double[:, ::1] T, double[::1] beta, long long[::1] basic,
                 long long[::1] status, const double[::1] c, const double[::1] lo,
                 const double[::1] hi, long long max_pivots, double tol_feas,
                 double tol_opt, double tol_piv):
    cdef Py_ssize_t m = T.shape[0], N = T.shape[1]
    cdef Py_ssize_t i, j, r, q
    cdef long long its = 0, leaving, leave_kind
    cdef double[::1] cb = np.empty(m)
    cdef double[::1] d = np.empty(N)
    cdef double[::1] alpha = np.empty(m)
    cdef double[::1] pivot_row = np.empty(N)
    cdef bint phase1
    cdef double bl, bh, acc, direction, t, t_min, t_flip, x_q, piv, f
    cdef long long kind

    while True:
        phase1 = False
        for i in range(m):
            bl = lo[basic[i]]
            bh = hi[basic[i]]
            if beta[i] < bl - tol_feas:
                cb[i] = -1.0
                phase1 = True
            elif beta[i] > bh + tol_feas:
                cb[i] = 1.0
                phase1 = True
            else:
                cb[i] = 0.0
        if not phase1:
            for i in range(m):
                cb[i] = c[basic[i]]

        q = -1
        for j in range(N):
            kind = status[j]
            if kind == BASIC or kind == FIXED:
                continue
            acc = 0.0 if phase1 else c[j]
            for i in range(m):
                acc -= cb[i] * T[i, j]
            d[j] = acc
            if ((kind == AT_LOWER and acc < -tol_opt) or (kind == AT_UPPER and acc > tol_opt)
                    or (kind == FREE and fabs(acc) > tol_opt)):
                q = j
                break

        if q < 0:
            return (INFEASIBLE if phase1 else OPTIMAL), its
        if its >= max_pivots:
            return BUDGET, its

        if status[q] == AT_LOWER or (status[q] == FREE and d[q] < 0):
            direction = 1.0
        else:
            direction = -1.0

        for i in range(m):
            alpha[i] = direction * T[i, q]
        t_min = INFINITY
        for i in range(m):
            t = _row_step(alpha[i], beta[i], lo[basic[i]], hi[basic[i]], tol_piv, tol_feas, &kind)
            if kind != 0 and t < t_min:
                t_min = t
        leave_kind = 0
        r = _pick_tie(alpha, beta, basic, lo, hi, m, t_min, tol_piv, tol_feas, &leave_kind)

        t_flip = hi[q] - lo[q]
        if isinf(t_min) and isinf(t_flip):
            if phase1:
                raise FloatingPointError("unbounded ray in phase 1")
            return UNBOUNDED, its

        its += 1
        if t_flip <= t_min:
            for i in range(m):
                beta[i] -= t_flip * alpha[i]
            status[q] = AT_UPPER if status[q] == AT_LOWER else AT_LOWER
            continue

        leaving = basic[r]
        if status[q] == AT_LOWER:
            x_q = lo[q]
        elif status[q] == AT_UPPER:
            x_q = hi[q]
        else:
            x_q = 0.0
        for i in range(m):
            beta[i] -= t_min * alpha[i]
        beta[r] = x_q + direction * t_min

        piv = T[r, q]
        for j in range(N):
            pivot_row[j] = T[r, j] / piv
        for i in range(m):
            if i == r:
                continue
            f = T[i, q]
            if f != 0.0:
                for j in range(N):
                    T[i, j] -= f * pivot_row[j]
        for j in range(N):
            T[r, j] = pivot_row[j]
        basic[r] = q
        status[q] = BASIC
        if lo[leaving] == hi[leaving]:
            status[leaving] = FIXED
        else:
            status[leaving] = leave_kind


cdef inline double _row_step(double a, double b, double bl, double bh, double tol_piv,
                             double tol_feas, long long* kind):
    """Step length at which a basic variable blocks, and the bound it leaves at."""
    cdef double t = INFINITY
    kind[0] = 0
    if a > tol_piv:
        if b > bh + tol_feas:
            t = (b - bh) / a
            kind[0] = AT_UPPER
        elif b >= bl - tol_feas and isfinite(bl):
            t = (b - bl) / a
            kind[0] = AT_LOWER
    elif a < -tol_piv:
        if b < bl - tol_feas:
            t = (bl - b) / -a
            kind[0] = AT_LOWER
        elif b <= bh + tol_feas and isfinite(bh):
            t = (bh - b) / -a
            kind[0] = AT_UPPER
    if t < 0.0:
        t = 0.0
    return t


cdef Py_ssize_t _pick_tie(double[::1] alpha, double[::1] beta, long long[::1] basic,
                          const double[::1] lo, const double[::1] hi, Py_ssize_t m,
                          double t_min, double tol_piv, double tol_feas,
                          long long* leave_kind):
    """Lowest basic index among rows whose step is within the tie tolerance."""
    cdef Py_ssize_t i, r = -1
    cdef double t
    cdef long long kind
    for i in range(m):
        t = _row_step(alpha[i], beta[i], lo[basic[i]], hi[basic[i]], tol_piv, tol_feas, &kind)
        if kind != 0 and t <= t_min + _TIE and (r < 0 or basic[i] < basic[r]):
            r = i
            leave_kind[0] = kind
    return r


cdef inline bint _lex_smaller(unsigned long long a, unsigned long long b):
    cdef unsigned long long diff = a ^ b
    if diff == 0:
        return False
    return (a & (diff & (~diff + 1))) != 0


def best_sign_pattern(const double[:, ::1] G, double amp, double tie_tol):
    """Gray-code enumeration of all sign vectors; see the numpy twin."""
    cdef Py_ssize_t R = G.shape[0], n = G.shape[1]
    cdef Py_ssize_t i, j, p
    cdef unsigned long long total = 1ULL << n
    cdef unsigned long long k, gray, pick = 0
    cdef double[::1] base = np.empty(R)
    cdef double[::1] marg = np.empty(R)
    cdef double[:, ::1] step = np.empty((n, R))
    cdef double best = -INFINITY, eps
    cdef bint have = False

    for i in range(R):
        base[i] = 0.0
        for j in range(n):
            base[i] += amp * G[i, j]
            step[j, i] = 2.0 * amp * G[i, j]

    for p in range(2):
        for i in range(R):
            marg[i] = base[i]
        gray = 0
        k = 0
        while True:
            eps = marg[0]
            for i in range(1, R):
                if marg[i] < eps:
                    eps = marg[i]
            if p == 0:
                if eps > best:
                    best = eps
            elif eps >= best - tie_tol:
                if not have or _lex_smaller(gray, pick):
                    pick = gray
                    have = True
            k += 1
            if k == total:
                break
            j = 0
            while not ((k >> j) & 1ULL):
                j += 1
            gray ^= 1ULL << j
            if (gray >> j) & 1ULL:
                for i in range(R):
                    marg[i] -= step[j, i]
            else:
                for i in range(R):
                    marg[i] += step[j, i]
    return int(pick), best
