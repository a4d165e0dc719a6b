import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from onebit_bnb.errors import DimensionError
from onebit_bnb.model import (
    apply_channel,
    complexify_vector,
    draw_channel,
    draw_noise,
    draw_symbols,
    min_threshold_distance,
    one_bit_alphabet,
    quantize_1bit,
    realify_channel,
    realify_vector,
    threshold_margins,
)

finite = st.floats(-1e6, 1e6, allow_nan=False)
complex_vectors = st.integers(1, 12).flatmap(
    lambda n: st.tuples(arrays(float, n, elements=finite), arrays(float, n, elements=finite))
).map(lambda p: p[0] + 1j * p[1])


def test_realify_channel_blocks():
    np.testing.assert_array_equal(realify_channel([[1 + 1j]]), [[1, -1], [1, 1]])
    np.testing.assert_array_equal(realify_channel([[1j]]), [[0, -1], [1, 0]])


def test_realify_channel_matches_complex_product(rng):
    H = rng.standard_normal((2, 3)) + 1j * rng.standard_normal((2, 3))
    Hr = realify_channel(H)
    for _ in range(10):
        x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
        z = H @ x
        np.testing.assert_allclose(Hr @ realify_vector(x), np.concatenate([z.real, z.imag]), rtol=1e-12, atol=1e-12)


def test_realify_vector_examples():
    np.testing.assert_array_equal(realify_vector([1 + 2j]), [1, 2])
    np.testing.assert_array_equal(realify_vector([0]), [0, 0])


@given(complex_vectors)
def test_realify_roundtrip(v):
    np.testing.assert_array_equal(complexify_vector(realify_vector(v)), v)


def _naive_matvec(H, x):
    out = []
    for i in range(len(H)):
        acc = 0j
        for j in range(len(x)):
            acc += H[i][j] * x[j]
        out.append(acc)
    return np.array(out)


def test_apply_channel_identity():
    x = np.array([(1 + 1j) / np.sqrt(2)])
    assert apply_channel([[1]], x, [0]) == pytest.approx((1 + 1j) / np.sqrt(2))


def test_apply_channel_noise_flips_sign():
    z = apply_channel([[1]], np.array([0.5 + 0.5j]), [-2 + 0j])
    assert z[0].real < 0 < z[0].imag


def test_apply_channel_matches_naive_oracle(rng):
    for _ in range(20):
        KL, M = rng.integers(1, 5, size=2)
        H = rng.standard_normal((KL, M)) + 1j * rng.standard_normal((KL, M))
        x = rng.standard_normal(M) + 1j * rng.standard_normal(M)
        n = rng.standard_normal(KL) + 1j * rng.standard_normal(KL)
        np.testing.assert_allclose(apply_channel(H, x, n), _naive_matvec(H.tolist(), x.tolist()) + n, rtol=1e-13)


def test_apply_channel_dimension_mismatch():
    with pytest.raises(DimensionError):
        apply_channel(np.ones((2, 3)), np.ones(2), np.zeros(2))
    with pytest.raises(DimensionError):
        apply_channel(np.ones((2, 3)), np.ones(3), np.zeros(3))


@pytest.mark.parametrize("z, y", [(0.3 - 0.7j, 1 - 1j), (-2 + 0.01j, -1 + 1j), (0j, 1 + 1j), (-0.0 - 1j, 1 - 1j)])
def test_quantize_examples(z, y):
    assert quantize_1bit([z])[0] == y


@given(complex_vectors)
def test_quantize_idempotent(z):
    y = quantize_1bit(z)
    np.testing.assert_array_equal(quantize_1bit(y), y)


def test_min_threshold_distance_examples():
    x = np.array([(1 + 1j) / np.sqrt(2)])
    assert min_threshold_distance([[1]], [1 + 1j], x) == pytest.approx(1 / np.sqrt(2), abs=1e-15)
    assert min_threshold_distance([[1]], [-1 - 1j], x) == pytest.approx(-1 / np.sqrt(2), abs=1e-15)


def test_positive_margin_iff_correct_detection(rng):
    checked = 0
    for _ in range(2000):
        KL, M = rng.integers(1, 4), rng.integers(1, 5)
        H = draw_channel(rng, KL, 1, M)
        s = draw_symbols(rng, KL)
        x = one_bit_alphabet(M)[rng.integers(0, 4, M)]
        eps = min_threshold_distance(H, s, x)
        if abs(eps) < 1e-12:
            continue
        assert (eps > 0) == bool(np.all(quantize_1bit(H @ x) == s))
        checked += 1
    assert checked > 1900


def test_margins_are_rowwise_products(rng):
    H = draw_channel(rng, 2, 2, 3)
    s = draw_symbols(rng, 4)
    x = rng.standard_normal(3) + 1j * rng.standard_normal(3)
    z = H @ x
    expected = np.concatenate([s.real * z.real, s.imag * z.imag])
    np.testing.assert_allclose(threshold_margins(H, s, x), expected)


@pytest.mark.parametrize("M", [1, 2, 5, 16])
def test_one_bit_vectors_have_unit_energy(rng, M):
    for _ in range(20):
        x = one_bit_alphabet(M)[rng.integers(0, 4, M)]
        assert abs(np.sum(np.abs(x) ** 2) - 1.0) < 1e-14


def test_channel_statistics_and_determinism():
    H = draw_channel(np.random.default_rng(5), 100, 1, 1000)
    assert 0.98 <= np.mean(np.abs(H) ** 2) <= 1.02
    assert abs(np.mean(H.real ** 2) - 0.5) < 0.01
    np.testing.assert_array_equal(H, draw_channel(np.random.default_rng(5), 100, 1, 1000))


def test_noise_variance():
    n = draw_noise(np.random.default_rng(9), 100_000, 0.04)
    assert 0.039 <= np.mean(np.abs(n) ** 2) <= 0.041
    with pytest.raises(ValueError):
        draw_noise(np.random.default_rng(9), 3, 0.0)
