#!/usr/bin/env python3
"""
Test suite for DCT and DFT coefficient features
"""

import math
import os
import sys

import numpy as np
import pytest

# Add parent directory to path
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from src.errors import BadKError
from src.spectral import dct2, dct_features, dft2, dft_features, low_frequency_order, zigzag_order
from src.types import GrayImage


def random_image(seed: int, w: int, h: int) -> GrayImage:
    rng = np.random.default_rng(seed)
    return GrayImage(rng.integers(0, 256, (h, w), dtype=np.uint8))


def constant_image(value: int, w: int, h: int) -> GrayImage:
    return GrayImage(np.full((h, w), value, dtype=np.uint8))


def direct_dct(img: GrayImage) -> np.ndarray:
    M, N = img.width, img.height
    f = img.pixels.astype(float)
    out = np.zeros((M, N))
    for a in range(M):
        for b in range(N):
            total = 0.0
            for x in range(M):
                for y in range(N):
                    total += (
                        f[y, x]
                        * math.cos((2 * x + 1) * a * math.pi / (2 * M))
                        * math.cos((2 * y + 1) * b * math.pi / (2 * N))
                    )
            alpha_a = 1 / math.sqrt(2) if a == 0 else 1.0
            alpha_b = 1 / math.sqrt(2) if b == 0 else 1.0
            out[a, b] = alpha_a * alpha_b * total / math.sqrt(M * N)
    return out


def direct_dft(img: GrayImage) -> np.ndarray:
    M, N = img.width, img.height
    f = img.pixels.astype(float)
    out = np.zeros((M, N), dtype=complex)
    for a in range(M):
        for b in range(N):
            total = 0j
            for x in range(M):
                for y in range(N):
                    total += f[y, x] * np.exp(-2j * math.pi * (a * x / M + b * y / N))
            out[a, b] = total
    return out


class TestDct:
    def test_constant_image(self):
        grid = dct2(constant_image(40, 6, 4))

        assert grid.values[0, 0] == pytest.approx(40 * math.sqrt(24) / 2, rel=1e-12)
        rest = grid.values.copy()
        rest[0, 0] = 0.0
        assert np.allclose(rest, 0.0, atol=1e-9)

    def test_zero_image(self):
        assert np.all(dct2(constant_image(0, 5, 5)).values == 0.0)

    @pytest.mark.parametrize("w,h", [(4, 4), (5, 3), (8, 8)])
    def test_matches_double_sum(self, w, h):
        img = random_image(w * 10 + h, w, h)
        expected = direct_dct(img)

        grid = dct2(img)

        assert grid.values.shape == (w, h)
        assert np.allclose(grid.values, expected, rtol=1e-9, atol=1e-9 * np.abs(expected).max())

    def test_parseval(self):
        img = random_image(3, 8, 6)
        values = dct2(img).values
        f = img.pixels.astype(float)

        # twice the coefficients form an orthonormal transform
        assert (values**2).sum() == pytest.approx((f**2).sum() / 4, rel=1e-9)

    def test_first_coefficient_of_working_size(self):
        fv = dct_features(constant_image(10, 144, 144), 1)

        assert fv.values.tolist() == pytest.approx([720.0], rel=1e-12)

    def test_full_k_is_permutation(self):
        img = random_image(9, 4, 3)

        fv = dct_features(img, 12)

        assert sorted(fv.values.tolist()) == sorted(dct2(img).values.ravel().tolist())

    def test_zigzag_3x3(self):
        assert zigzag_order(3, 3) == (
            (0, 0), (0, 1), (1, 0), (2, 0), (1, 1), (0, 2), (1, 2), (2, 1), (2, 2),
        )

    @pytest.mark.parametrize("k", [-1, 13])
    def test_bad_k(self, k):
        with pytest.raises(BadKError):
            dct_features(random_image(1, 4, 3), k)


class TestDft:
    def test_constant_image(self):
        grid = dft2(constant_image(7, 5, 4))

        assert grid.values[0, 0] == pytest.approx(5 * 4 * 7)
        rest = np.abs(grid.values)
        rest[0, 0] = 0.0
        assert np.allclose(rest, 0.0, atol=1e-9)

    def test_impulse_has_flat_magnitude(self):
        pixels = np.zeros((6, 6), dtype=np.uint8)
        pixels[4, 1] = 1

        magnitudes = np.abs(dft2(GrayImage(pixels)).values)

        assert np.allclose(magnitudes, 1.0, atol=1e-12)

    @pytest.mark.parametrize("w,h", [(4, 4), (6, 5)])
    def test_matches_double_sum(self, w, h):
        img = random_image(w + h, w, h)
        expected = direct_dft(img)

        grid = dft2(img)

        assert np.allclose(grid.values, expected, rtol=1e-9, atol=1e-9 * np.abs(expected).max())

    def test_first_feature(self):
        assert dft_features(constant_image(3, 6, 4), 1).values.tolist() == pytest.approx([72.0])

    def test_k_zero_is_empty(self):
        assert dft_features(random_image(2, 4, 4), 0).dim == 0

    def test_circular_shift_invariance(self):
        img = random_image(17, 8, 8)
        shifted = GrayImage(np.roll(img.pixels, (3, 2), axis=(0, 1)))

        a = dft_features(img, 20).values
        b = dft_features(shifted, 20).values

        assert np.allclose(a, b, rtol=1e-9, atol=1e-9 * a.max())

    def test_low_frequency_order_starts_at_dc(self):
        order = low_frequency_order(4, 4)

        assert order[0] == (0, 0)
        assert set(order[1:5]) == {(0, 1), (0, 3), (1, 0), (3, 0)}
        assert len(order) == 16
