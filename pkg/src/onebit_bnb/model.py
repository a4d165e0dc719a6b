"""Downlink system model with 1-bit receivers.

The channel ``H`` is a complex ``(K*L, M)`` matrix, the symbols ``s`` are
QPSK points ``{+-1 +- 1j}`` and the transmit vector ``x`` has length ``M``.
Precoding works on the real expansion

    H_r = [[Re H, -Im H], [Im H, Re H]],   x_r = [Re x; Im x],

so that ``H_r @ x_r`` stacks the real and imaginary parts of ``H @ x``.
"""

import numpy as np

from .errors import DimensionError

QPSK = np.array([1 + 1j, 1 - 1j, -1 + 1j, -1 - 1j])


def one_bit_alphabet(M):
    """Return the four points ``e^{j(2q+1)pi/4} / sqrt(M)``, q = 0..3."""
    return np.exp(1j * np.pi / 4 * np.array([1, 3, 5, 7])) / np.sqrt(M)


def one_bit_amplitude(M):
    """Per-real-coordinate amplitude ``1/sqrt(2M)`` of the 1-bit alphabet."""
    return 1.0 / np.sqrt(2.0 * M)


def check_channel(H, K=None, L=None):
    H = np.asarray(H)
    if H.ndim != 2 or H.shape[0] < 1 or H.shape[1] < 1:
        raise DimensionError(f"channel must be a non-empty 2-D array, got shape {H.shape}")
    if K is not None and L is not None and H.shape[0] != K * L:
        raise DimensionError(f"channel has {H.shape[0]} rows, expected K*L = {K * L}")
    if not np.all(np.isfinite(H)):
        raise ValueError("channel entries must be finite")
    return H.astype(complex, copy=False)


def check_symbols(s, KL=None):
    s = np.asarray(s, dtype=complex)
    if s.ndim != 1:
        raise DimensionError("symbol vector must be 1-D")
    if KL is not None and s.shape[0] != KL:
        raise DimensionError(f"symbol vector has length {s.shape[0]}, expected {KL}")
    if not np.all((np.abs(s.real) == 1) & (np.abs(s.imag) == 1)):
        raise ValueError("symbols must be QPSK points +-1 +- 1j")
    return s


def realify_channel(H):
    """Real block expansion ``[[Re H, -Im H], [Im H, Re H]]``."""
    H = np.asarray(H, dtype=complex)
    return np.block([[H.real, -H.imag], [H.imag, H.real]])


def realify_vector(v):
    """Stack real parts over imaginary parts."""
    v = np.asarray(v, dtype=complex)
    return np.concatenate([v.real, v.imag])


def complexify_vector(v_r):
    """Inverse of :func:`realify_vector`."""
    v_r = np.asarray(v_r, dtype=float)
    if v_r.ndim != 1 or v_r.shape[0] % 2:
        raise DimensionError("real-expanded vector must be 1-D with even length")
    n = v_r.shape[0] // 2
    return v_r[:n] + 1j * v_r[n:]


def margin_matrix(H, s):
    """Return ``diag(s_r) @ H_r``; row k times ``x_r`` is the k-th signed margin."""
    H = check_channel(H)
    s = check_symbols(s, H.shape[0])
    return realify_vector(s)[:, None] * realify_channel(H)


def threshold_margins(H, s, x):
    """Signed distances ``diag(s_r) H_r x_r`` of all ``2KL`` real receive dimensions."""
    H = check_channel(H)
    x = np.asarray(x, dtype=complex)
    if x.shape != (H.shape[1],):
        raise DimensionError(f"transmit vector must have length {H.shape[1]}")
    s = check_symbols(s, H.shape[0])
    return realify_vector(s) * realify_vector(H @ x)


def min_threshold_distance(H, s, x):
    """Smallest signed distance to the quantizer threshold over all real rows.

    A positive value means ``quantize_1bit(H @ x) == s`` without noise.
    """
    return float(np.min(threshold_margins(H, s, x)))


def apply_channel(H, x, n):
    """Received samples ``z = H x + n``."""
    H = check_channel(H)
    x = np.asarray(x, dtype=complex)
    n = np.asarray(n, dtype=complex)
    if x.shape != (H.shape[1],):
        raise DimensionError(f"transmit vector must have length {H.shape[1]}, got {x.shape}")
    if n.shape != (H.shape[0],):
        raise DimensionError(f"noise vector must have length {H.shape[0]}, got {n.shape}")
    return H @ x + n


def quantize_1bit(z):
    """Sign quantizer applied separately to real and imaginary parts.

    Exact zeros map to +1.
    """
    z = np.asarray(z, dtype=complex)
    re = np.where(z.real < 0, -1.0, 1.0)
    im = np.where(z.imag < 0, -1.0, 1.0)
    return re + 1j * im


def draw_channel(rng, K, L, M):
    """i.i.d. CN(0, 1) channel of shape ``(K*L, M)``."""
    if min(K, L, M) < 1:
        raise ValueError("K, L and M must be positive")
    shape = (K * L, M)
    return (rng.standard_normal(shape) + 1j * rng.standard_normal(shape)) / np.sqrt(2.0)


def draw_noise(rng, size, sigma_n_sq):
    """i.i.d. CN(0, sigma_n_sq) samples; ``size`` may be an int or a shape."""
    if not sigma_n_sq > 0:
        raise ValueError("noise variance must be positive")
    scale = np.sqrt(sigma_n_sq / 2.0)
    return scale * (rng.standard_normal(size) + 1j * rng.standard_normal(size))


def draw_symbols(rng, size):
    """Uniform QPSK symbols."""
    return QPSK[rng.integers(0, 4, size=size)]
