"""Max-margin precoders.

All precoders take a complex channel ``H`` (``K*L x M``) and QPSK symbols
``s`` and return a :class:`PrecodeResult` whose ``epsilon`` is the smallest
signed distance of the noise-free receive samples to the quantizer
threshold.  The 1-bit precoders work on the real expansion, where each of
the ``2M`` coordinates takes the value ``+-1/sqrt(2M)``.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import DimensionError, RankDeficientError, SizeCapError, SolverError
from .lp import LinearProgram, solve_lp
from .model import (
    QPSK,
    check_channel,
    check_symbols,
    complexify_vector,
    margin_matrix,
    min_threshold_distance,
    one_bit_amplitude,
    realify_vector,
)

BNB_MAX_ANTENNAS = 16
EXHAUSTIVE_MAX_ANTENNAS = 12
TABLE_MAX_STREAMS = 8
MAX_SURVIVORS = 1 << 22
# lower bounds within this distance of the incumbent survive pruning
PRUNE_TOL = 1e-9
TIE_TOL = 1e-12


@dataclass
class SolveStats:
    visited_per_level: list = field(default_factory=list)
    lp_iterations_total: int = 0
    lp_solves: int = 0
    wall_time: float = 0.0
    upper_bound_trace: list = field(default_factory=list)
    relaxed_epsilon: float = None

    @property
    def visited_branches(self):
        return int(sum(self.visited_per_level))


@dataclass
class PrecodeResult:
    x: np.ndarray
    epsilon: float
    stats: SolveStats
    mode: str = "one-bit"

    @property
    def x_real(self):
        return realify_vector(self.x)


def _prepare(H, s):
    H = check_channel(H)
    s = check_symbols(s, H.shape[0])
    return H, s


def round_to_alphabet(x_real):
    """Nearest point of ``{+-1/sqrt(2M)}^{2M}``: a sign map, zeros go to ``+``."""
    x_real = np.asarray(x_real, dtype=float)
    if x_real.ndim != 1 or x_real.shape[0] % 2:
        raise DimensionError("real-expanded transmit vector must have even length")
    amp = one_bit_amplitude(x_real.shape[0] // 2)
    return np.where(x_real < 0, -amp, amp)


def _margin_program(G, amp, prefix):
    """LP over the free coordinates and the margin, given a fixed prefix."""
    d = len(prefix)
    R, n = G.shape
    free = n - d
    A = np.empty((R, free + 1))
    A[:, :free] = G[:, d:]
    A[:, free] = -1.0
    b = -(G[:, :d] @ np.asarray(prefix, dtype=float)) if d else np.zeros(R)
    cost = np.zeros(free + 1)
    cost[-1] = -1.0
    lower = np.concatenate([np.full(free, -amp), [-np.inf]])
    upper = np.concatenate([np.full(free, amp), [np.inf]])
    return LinearProgram(cost, A, b, lower, upper)


def build_margin_program(H, s, prefix=()):
    """LP bounding every completion of the fixed real-coordinate ``prefix``.

    Variables are the ``2M - d`` remaining coordinates followed by the margin;
    the cost is ``-margin``, rows are ``G2 v2 - margin >= -G1 prefix`` with
    ``G = diag(s_r) H_r`` split after column ``d``, and free coordinates are
    boxed by ``1/sqrt(2M)``.
    """
    H, s = _prepare(H, s)
    M = H.shape[1]
    prefix = np.asarray(prefix, dtype=float).ravel()
    if prefix.shape[0] > 2 * M:
        raise DimensionError(f"prefix length {prefix.shape[0]} exceeds 2M = {2 * M}")
    amp = one_bit_amplitude(M)
    if not np.allclose(np.abs(prefix), amp, rtol=0, atol=1e-15):
        raise ValueError("prefix entries must be +-1/sqrt(2M)")
    return _margin_program(margin_matrix(H, s), amp, prefix)


def relax_precode(H, s):
    """Box relaxation of the 1-bit problem.

    Returns the relaxed real transmit vector (length ``2M``) and its margin,
    which upper-bounds the best margin of any 1-bit vector.
    """
    H, s = _prepare(H, s)
    sol = solve_lp(build_margin_program(H, s))
    if sol.status != "optimal":
        raise SolverError(f"relaxation ended with status {sol.status}", node=())
    return sol.v[:-1], float(sol.v[-1])


def approx_1bit_precode(H, s):
    """Relaxation followed by the nearest 1-bit vector."""
    t0 = time.perf_counter()
    H, s = _prepare(H, s)
    G = margin_matrix(H, s)
    M = H.shape[1]
    sol = solve_lp(_margin_program(G, one_bit_amplitude(M), ()))
    if sol.status != "optimal":
        raise SolverError(f"relaxation ended with status {sol.status}", node=())
    x = complexify_vector(round_to_alphabet(sol.v[:-1]))
    stats = SolveStats(lp_iterations_total=sol.iterations, lp_solves=1, relaxed_epsilon=float(sol.v[-1]))
    stats.wall_time = time.perf_counter() - t0
    return PrecodeResult(x, min_threshold_distance(H, s, x), stats)


def bnb_precode(H, s, *, max_antennas=BNB_MAX_ANTENNAS, max_survivors=MAX_SURVIVORS,
                prune=True, warm_start=True):
    """Exact 1-bit max-margin precoder by breadth-first branch-and-bound.

    Coordinates of the real transmit vector are fixed in natural order, each
    child pair ordered ``(+, -)``.  Every node of a level is bounded by the
    LP over its free coordinates (warm-started from the parent's basis) and
    yields an upper bound by rounding the LP point; after the level, nodes
    whose lower bound exceeds the best upper bound are dropped.  The last
    level is evaluated exactly.  ``prune=False`` keeps every node.
    """
    t0 = time.perf_counter()
    H, s = _prepare(H, s)
    M = H.shape[1]
    if M > max_antennas:
        raise SizeCapError("bnb transmit antennas M", M, max_antennas)
    n = 2 * M
    amp = one_bit_amplitude(M)
    G = margin_matrix(H, s)
    stats = SolveStats()

    root = solve_lp(_margin_program(G, amp, ()))
    if root.status != "optimal":
        raise SolverError(f"relaxation ended with status {root.status}", node=())
    stats.lp_solves += 1
    stats.lp_iterations_total += root.iterations
    stats.relaxed_epsilon = float(root.v[-1])
    incumbent = round_to_alphabet(root.v[:-1])
    best_ub = -float(np.min(G @ incumbent))
    stats.upper_bound_trace.append(best_ub)

    signs = np.array([amp, -amp])
    prefixes = signs[:, None]
    handles = [root.warm_handle] * 2
    for d in range(1, n):
        lbs = np.empty(len(prefixes))
        child_handles = []
        for i, prefix in enumerate(prefixes):
            warm = handles[i].drop_leading(1) if warm_start else None
            sol = solve_lp(_margin_program(G, amp, prefix), warm)
            if sol.status != "optimal":
                raise SolverError(f"subproblem ended with status {sol.status}", node=tuple(prefix))
            stats.lp_solves += 1
            stats.lp_iterations_total += sol.iterations
            lbs[i] = -sol.v[-1]
            full = np.concatenate([prefix, round_to_alphabet(np.concatenate([np.zeros(d), sol.v[:-1]]))[d:]])
            ub = -float(np.min(G @ full))
            if ub < best_ub:
                best_ub = ub
                incumbent = full
            stats.upper_bound_trace.append(best_ub)
            child_handles.append(sol.warm_handle)
        stats.visited_per_level.append(len(prefixes))

        keep = np.flatnonzero(lbs <= best_ub + PRUNE_TOL) if prune else np.arange(len(prefixes))
        if 2 * len(keep) > max_survivors:
            raise SizeCapError("bnb survivor count", 2 * len(keep), max_survivors)
        kept = prefixes[keep]
        prefixes = np.empty((2 * len(kept), d + 1))
        prefixes[0::2, :d] = kept
        prefixes[1::2, :d] = kept
        prefixes[0::2, d] = amp
        prefixes[1::2, d] = -amp
        handles = [child_handles[k] for k in keep for _ in range(2)]

    margins = (prefixes @ G.T).min(axis=1)
    stats.visited_per_level.append(len(prefixes))
    best = int(np.argmax(margins))
    x = complexify_vector(prefixes[best])
    stats.wall_time = time.perf_counter() - t0
    return PrecodeResult(x, min_threshold_distance(H, s, x), stats)


def exhaustive_precode(H, s, *, max_antennas=EXHAUSTIVE_MAX_ANTENNAS):
    """Exact 1-bit precoder by enumerating all ``4^M`` transmit vectors.

    Among vectors whose margin ties the maximum (to ``1e-12``) the
    lexicographically smallest real expansion is returned.
    """
    t0 = time.perf_counter()
    H, s = _prepare(H, s)
    M = H.shape[1]
    if M > max_antennas:
        raise SizeCapError("exhaustive transmit antennas M", M, max_antennas)
    amp = one_bit_amplitude(M)
    G = np.ascontiguousarray(margin_matrix(H, s))
    mask, _ = kernels.best_sign_pattern(G, amp, TIE_TOL)
    bits = (mask >> np.arange(2 * M)) & 1
    x = complexify_vector(amp * (1.0 - 2.0 * bits))
    stats = SolveStats(visited_per_level=[4 ** M], wall_time=time.perf_counter() - t0)
    return PrecodeResult(x, min_threshold_distance(H, s, x), stats)


def pop_precode(H, s, n_gon=64):
    """Phase-only (constant envelope) max-margin precoder.

    Each disc ``|x_m| <= 1/sqrt(M)`` is replaced by the inscribed regular
    ``n_gon`` with vertices at angles ``pi/4 + 2 pi k / n_gon``, which keeps the
    LP exact on the 1-bit points.  The LP solution is then scaled entrywise to
    magnitude ``1/sqrt(M)``; entries at the origin get phase ``pi/4``.
    """
    t0 = time.perf_counter()
    H, s = _prepare(H, s)
    if n_gon < 8:
        raise ValueError("n_gon must be at least 8")
    KL, M = H.shape
    G = margin_matrix(H, s)
    radius = 1.0 / np.sqrt(M)
    normals = np.pi / 4 + (2 * np.arange(n_gon) + 1) * np.pi / n_gon
    apothem = radius * np.cos(np.pi / n_gon)

    rows = 2 * KL + M * n_gon
    A = np.zeros((rows, 2 * M + 1))
    b = np.zeros(rows)
    A[: 2 * KL, : 2 * M] = G
    A[: 2 * KL, -1] = -1.0
    for m in range(M):
        block = slice(2 * KL + m * n_gon, 2 * KL + (m + 1) * n_gon)
        A[block, m] = -np.cos(normals)
        A[block, M + m] = -np.sin(normals)
        b[block] = -apothem
    cost = np.zeros(2 * M + 1)
    cost[-1] = -1.0
    sol = solve_lp(LinearProgram(cost, A, b))
    if sol.status != "optimal":
        raise SolverError(f"phase-only LP ended with status {sol.status}")

    x = complexify_vector(sol.v[:-1])
    mag = np.abs(x)
    x = np.where(mag > 1e-15, x / np.where(mag > 1e-15, mag, 1.0), np.exp(1j * np.pi / 4)) * radius
    stats = SolveStats(lp_iterations_total=sol.iterations, lp_solves=1, relaxed_epsilon=float(sol.v[-1]),
                       wall_time=time.perf_counter() - t0)
    return PrecodeResult(x, min_threshold_distance(H, s, x), stats, mode="continuous")


def zero_forcing(H, s):
    """Unquantized zero-forcing vector ``H^H (H H^H)^-1 s``."""
    H, s = _prepare(H, s)
    KL, M = H.shape
    if M < KL or np.linalg.matrix_rank(H) < KL:
        raise RankDeficientError(f"channel of shape {H.shape} has no right pseudo-inverse")
    return H.conj().T @ np.linalg.solve(H @ H.conj().T, s)


def zf_quantized_precode(H, s):
    """Zero-forcing followed by entrywise 1-bit quantization."""
    t0 = time.perf_counter()
    H, s = _prepare(H, s)
    x = complexify_vector(round_to_alphabet(realify_vector(zero_forcing(H, s))))
    stats = SolveStats(wall_time=time.perf_counter() - t0)
    return PrecodeResult(x, min_threshold_distance(H, s, x), stats)


PRECODERS = {
    "bnb": bnb_precode,
    "approx": approx_1bit_precode,
    "pop": pop_precode,
    "zf": zf_quantized_precode,
    "exhaustive": exhaustive_precode,
}

# s[0] = ROTATIONS[q] * (1 + 1j)
ROTATIONS = np.array([1, 1j, -1, -1j])


def _rotation_index(first):
    ratio = np.asarray(first) / (1 + 1j)
    return np.argmin(np.abs(ratio[..., None] - ROTATIONS), axis=-1)


@dataclass
class LookupTable:
    """Precoding vectors for one representative per rotation class of ``s``.

    Representatives have first symbol ``1+j``; entry ``i`` stores the vector
    for the representative whose remaining symbols, read as base-4 digits in
    :data:`~onebit_bnb.model.QPSK` order, spell ``i``.
    """

    representatives: np.ndarray
    entries: np.ndarray
    epsilons: np.ndarray
    stats: list = field(default_factory=list, repr=False)

    def index(self, s):
        """Return ``(table index, q)`` with ``s = j^q * representatives[index]``."""
        s = np.atleast_2d(np.asarray(s, dtype=complex))
        q = _rotation_index(s[:, 0])
        rep = s / ROTATIONS[q][:, None]
        digits = np.argmin(np.abs(rep[:, 1:, None] - QPSK), axis=-1)
        weights = 4 ** np.arange(digits.shape[1] - 1, -1, -1)
        return digits @ weights, q

    def lookup(self, s):
        """Precoding vector(s) for one symbol vector or a stack of them."""
        single = np.asarray(s).ndim == 1
        idx, q = self.index(s)
        x = ROTATIONS[q][:, None] * self.entries[idx]
        return x[0] if single else x


def canonical_representatives(KL):
    digits = (np.arange(4 ** (KL - 1))[:, None] // 4 ** np.arange(KL - 2, -1, -1)) % 4
    return np.column_stack([np.full(4 ** (KL - 1), 1 + 1j), QPSK[digits]])


def build_lookup_table(H, precoder, *, max_streams=TABLE_MAX_STREAMS):
    """Precode the ``4^(KL-1)`` canonical symbol vectors of channel ``H``.

    Valid for precoders that commute with rotating ``s`` by ``j``, which holds
    for every precoder here because the 1-bit alphabet, the phase-only
    polygon and the margin constraints all rotate together.
    """
    H = check_channel(H)
    KL = H.shape[0]
    if KL > max_streams:
        raise SizeCapError("lookup table streams K*L", KL, max_streams)
    if isinstance(precoder, str):
        precoder = PRECODERS[precoder]
    reps = canonical_representatives(KL)
    results = [precoder(H, s) for s in reps]
    return LookupTable(
        representatives=reps,
        entries=np.array([r.x for r in results]),
        epsilons=np.array([r.epsilon for r in results]),
        stats=[r.stats for r in results],
    )
