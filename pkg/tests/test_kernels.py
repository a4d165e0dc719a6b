import itertools

import numpy as np
import pytest

from lp_oracles import random_feasible_lp
from onebit_bnb import _pykernels, kernels
from onebit_bnb.lp import LinearProgram, solve_lp
from onebit_bnb.model import draw_channel, draw_symbols, margin_matrix, one_bit_amplitude


def _brute_force_best(G, amp):
    """Max-min margin by itertools enumeration; ties go to the lexicographically smallest vector."""
    n = G.shape[1]
    best_val, best_v = -np.inf, None
    for signs in itertools.product([-1.0, 1.0], repeat=n):
        v = amp * np.array(signs)
        val = float(np.min(G @ v))
        if val > best_val + 1e-12:
            best_val, best_v = val, v
    return best_val, best_v


def test_backend_selection():
    assert kernels.BACKEND in ("compiled", "python")
    expected = kernels.compiled_backend if kernels.BACKEND == "compiled" else _pykernels
    assert kernels.simplex_loop is expected.simplex_loop


def test_best_sign_pattern_matches_brute_force(backend, rng):
    for _ in range(30):
        M = int(rng.integers(1, 5))
        KL = int(rng.integers(1, 3))
        G = np.ascontiguousarray(margin_matrix(draw_channel(rng, KL, 1, M), draw_symbols(rng, KL)))
        amp = one_bit_amplitude(M)
        mask, best = backend.best_sign_pattern(G, amp, 1e-12)
        ref_val, ref_v = _brute_force_best(G, amp)
        v = amp * (1.0 - 2.0 * ((mask >> np.arange(2 * M)) & 1))
        assert best == pytest.approx(ref_val, abs=1e-12)
        np.testing.assert_array_equal(v, ref_v)


def test_best_sign_pattern_tie_break(backend):
    # all-zero rows: every vector ties, the smallest is all minus
    G = np.zeros((2, 4))
    mask, best = backend.best_sign_pattern(G, 0.5, 1e-12)
    assert best == 0.0
    assert mask == 0b1111


def test_simplex_backends_agree(rng):
    if kernels.compiled_backend is None:
        pytest.skip("compiled backend not built")
    for _ in range(200):
        c, A, b, lo, hi = random_feasible_lp(rng, 25, 40)
        p = LinearProgram(c, A, b, lo, hi)
        a = solve_lp(p, kernel=_pykernels.simplex_loop)
        z = solve_lp(p, kernel=kernels.compiled_backend.simplex_loop)
        assert a.status == z.status
        assert a.iterations == z.iterations
        if a.status == "optimal":
            np.testing.assert_allclose(a.v, z.v, rtol=1e-9, atol=1e-9)
