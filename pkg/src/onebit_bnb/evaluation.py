"""Monte Carlo BER, exact sum-rate of the quantized channel, and B&B complexity.

Randomness is split per channel draw: channel ``c`` of a run with master
seed ``seed`` uses ``numpy.random.default_rng([seed, c])``, so results do not
depend on how channels are distributed over workers.
"""

import functools
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np
from scipy.special import erfc

from .model import QPSK, draw_channel, draw_symbols, quantize_1bit
from .precoders import PRECODERS, bnb_precode, build_lookup_table

NOISE_CONVENTIONS = ("complex", "per_real")


@dataclass
class BerRecord:
    snr_db: float
    precoder: str
    trials: int
    bit_errors: int
    ber: float
    bits: int = 0

    @property
    def std_error(self):
        """Binomial standard error of ``ber``."""
        return float(np.sqrt(self.ber * (1 - self.ber) / self.bits))


@dataclass
class SumRateRecord:
    snr_db: float
    precoder: str
    rate_bpcu: float
    channels_averaged: int
    normalization_error: float = 0.0


@dataclass
class SumRateResult:
    per_user: np.ndarray
    total: float
    normalization_error: float


@dataclass
class ComplexityReport:
    K: int
    L: int
    antennas: list
    instances: int
    mean_visited: list
    mean_lp_iterations: list
    mean_wall_time: list
    slope: float


def snr_to_sigma(snr_db, x_energy=1.0):
    """Noise variance ``||x||^2 / 10^(snr_db/10)``."""
    return x_energy / 10.0 ** (np.asarray(snr_db, dtype=float) / 10.0)


def sigma_to_snr(sigma_n_sq, x_energy=1.0):
    return 10.0 * np.log10(x_energy / np.asarray(sigma_n_sq, dtype=float))


def resolve_precoder(precoder, n_gon=64):
    """Return ``(name, callable)`` for a registry name or a callable."""
    if callable(precoder):
        return getattr(precoder, "__name__", "custom"), precoder
    fn = PRECODERS[precoder]
    if precoder == "pop":
        fn = functools.partial(fn, n_gon=n_gon)
    return precoder, fn


def _channel_transmit(fn, H, S, use_table):
    if use_table:
        return build_lookup_table(H, fn).lookup(S)
    return np.array([fn(H, s).x for s in S])


def _ber_channel(job):
    precoder, n_gon, K, L, M, snr_db, seed, c, count, use_table = job
    _, fn = resolve_precoder(precoder, n_gon)
    rng = np.random.default_rng([seed, c])
    H = draw_channel(rng, K, L, M)
    S = draw_symbols(rng, (count, K * L))
    X = _channel_transmit(fn, H, S, use_table)
    energy = np.sum(np.abs(X) ** 2, axis=1)
    R = X @ H.T
    errors = []
    for snr in snr_db:
        sigma = np.sqrt(snr_to_sigma(snr, energy) / 2.0)[:, None]
        noise = sigma * (rng.standard_normal(R.shape) + 1j * rng.standard_normal(R.shape))
        Y = quantize_1bit(R + noise)
        errors.append(int(np.sum(Y.real != S.real) + np.sum(Y.imag != S.imag)))
    return errors


def simulate_ber(precoder, K, L, M, snr_db, trials, seed, *, symbols_per_channel=100,
                 use_table=True, n_gon=64, workers=1):
    """Uncoded BER of the 1-bit receive chain, one record per SNR point.

    ``trials`` symbol vectors are transmitted over ``ceil(trials /
    symbols_per_channel)`` independent channels.  With ``use_table`` each
    channel is precoded once per rotation class of ``s``.  Two bits per
    receive antenna are compared per trial.  Runs with the same seed share
    channels, symbols and noise across precoders.
    """
    if trials < 1:
        raise ValueError("trials must be at least 1")
    if isinstance(precoder, str) and precoder not in PRECODERS:
        raise KeyError(f"unknown precoder {precoder!r}")
    name = precoder if isinstance(precoder, str) else resolve_precoder(precoder)[0]
    snr_db = [float(v) for v in snr_db]
    n_channels = -(-trials // symbols_per_channel)
    jobs = [
        (precoder, n_gon, K, L, M, snr_db, seed, c,
         min(symbols_per_channel, trials - c * symbols_per_channel), use_table)
        for c in range(n_channels)
    ]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            per_channel = list(pool.map(_ber_channel, jobs))
    else:
        per_channel = [_ber_channel(job) for job in jobs]
    totals = np.sum(per_channel, axis=0)
    bits = 2 * K * L * trials
    return [BerRecord(snr, name, trials, int(e), int(e) / bits, bits) for snr, e in zip(snr_db, totals)]


def snr_at_ber(records, target):
    """SNR where the BER curve crosses ``target``, interpolating log10(BER) linearly.

    Returns ``None`` if the curve never reaches the target.
    """
    snr = np.array([r.snr_db for r in records])
    ber = np.array([r.ber for r in records])
    order = np.argsort(snr)
    snr, ber = snr[order], ber[order]
    if ber[0] <= target:
        return float(snr[0])
    for i in range(1, len(snr)):
        if ber[i] <= target:
            lo, hi = np.log10(ber[i - 1]), np.log10(max(ber[i], 1e-300))
            frac = (lo - np.log10(target)) / (lo - hi)
            return float(snr[i - 1] + frac * (snr[i] - snr[i - 1]))
    return None


def all_symbol_vectors(KL):
    """All ``4^KL`` QPSK vectors, first stream most significant."""
    digits = (np.arange(4 ** KL)[:, None] // 4 ** np.arange(KL - 1, -1, -1)) % 4
    return QPSK[digits]


def _sign_patterns(n):
    bits = (np.arange(2 ** n)[:, None] >> np.arange(n - 1, -1, -1)) & 1
    return 1.0 - 2.0 * bits


def sum_rate(H, K, L, precoder_table, sigma_n_sq, *, convention="complex"):
    """Mutual information of each user's quantized channel, in bits per use.

    ``precoder_table`` maps a symbol vector to a transmit vector: a
    :class:`~onebit_bnb.precoders.LookupTable` or any callable.  Inputs are
    uniform.  ``P(y_k | s_k)`` averages, over the other users' symbols, the
    product of ``erfc(-y r / sigma_n) / 2`` over the user's ``2L`` real
    dimensions.  ``convention="complex"`` uses ``sigma_n^2`` as the complex
    noise variance (``sigma_n^2 / 2`` per real dimension); ``"per_real"``
    treats ``sigma_n^2`` as the per-dimension variance.
    """
    if convention not in NOISE_CONVENTIONS:
        raise ValueError(f"convention must be one of {NOISE_CONVENTIONS}")
    if not sigma_n_sq > 0:
        raise ValueError("noise variance must be positive")
    KL = K * L
    S = all_symbol_vectors(KL)
    if hasattr(precoder_table, "lookup"):
        X = precoder_table.lookup(S)
    else:
        X = np.array([precoder_table(s) for s in S])
    Rc = X @ np.asarray(H).T
    scale = np.sqrt(sigma_n_sq) * (1.0 if convention == "complex" else np.sqrt(2.0))
    Y = _sign_patterns(2 * L)

    per_user = np.empty(K)
    norm_err = 0.0
    for k in range(K):
        cols = slice(k * L, (k + 1) * L)
        r = np.concatenate([Rc[:, cols].real, Rc[:, cols].imag], axis=1)
        # (4^KL, patterns, 2L) per-dimension probabilities
        p = 0.5 * erfc(-Y[None, :, :] * r[:, None, :] / scale)
        joint = np.prod(p, axis=2)
        # streams of user k are digits k*L..k*L+L-1 of the symbol index
        shape = (4 ** (k * L), 4 ** L, 4 ** (KL - (k + 1) * L), Y.shape[0])
        p_y_given_s = joint.reshape(shape).mean(axis=(0, 2))
        norm_err = max(norm_err, float(np.max(np.abs(p_y_given_s.sum(axis=1) - 1.0))))
        p_y = p_y_given_s.mean(axis=0)
        with np.errstate(divide="ignore", invalid="ignore"):
            terms = p_y_given_s * np.log2(p_y_given_s / p_y[None, :])
        per_user[k] = float(np.sum(np.where(p_y_given_s > 0, terms, 0.0)) / 4 ** L)
    return SumRateResult(per_user, float(per_user.sum()), norm_err)


def sum_rate_sweep(precoder, K, L, M, snr_db, channels=50, seed=0, *, n_gon=64,
                   convention="complex"):
    """Channel-averaged sum-rate for each SNR point, via per-channel lookup tables."""
    name, fn = resolve_precoder(precoder, n_gon)
    snr_db = [float(v) for v in snr_db]
    rates = np.zeros(len(snr_db))
    norm = np.zeros(len(snr_db))
    for c in range(channels):
        rng = np.random.default_rng([seed, c])
        H = draw_channel(rng, K, L, M)
        table = build_lookup_table(H, fn)
        energy = float(np.mean(np.sum(np.abs(table.entries) ** 2, axis=1)))
        for i, snr in enumerate(snr_db):
            res = sum_rate(H, K, L, table, snr_to_sigma(snr, energy), convention=convention)
            rates[i] += res.total
            norm[i] = max(norm[i], res.normalization_error)
    return [SumRateRecord(snr, name, rates[i] / channels, channels, norm[i]) for i, snr in enumerate(snr_db)]


def complexity_profile(K, L, antennas, instances, seed):
    """Mean visited B&B branches per antenna count and the log-log slope vs 2M."""
    if instances < 10:
        raise ValueError("need at least 10 instances per antenna count")
    visited, iters, wall = [], [], []
    for M in antennas:
        v, it, w = [], [], []
        for i in range(instances):
            rng = np.random.default_rng([seed, M, i])
            H = draw_channel(rng, K, L, M)
            s = draw_symbols(rng, K * L)
            t0 = time.perf_counter()
            res = bnb_precode(H, s)
            w.append(time.perf_counter() - t0)
            v.append(res.stats.visited_branches)
            it.append(res.stats.lp_iterations_total)
        visited.append(float(np.mean(v)))
        iters.append(float(np.mean(it)))
        wall.append(float(np.mean(w)))
    if len(antennas) >= 2:
        slope = float(np.polyfit(np.log(2 * np.asarray(antennas, dtype=float)), np.log(visited), 1)[0])
    else:
        slope = float("nan")
    return ComplexityReport(K, L, list(antennas), instances, visited, iters, wall, slope)
