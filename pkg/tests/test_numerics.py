"""Numerical helper tests against closed-form optima and quadrature rules."""
from __future__ import annotations

import numpy as np
import pytest

from magflow.numerics import (
    GOLDEN,
    bisect_root,
    gauss_nodes,
    golden_max,
    grid_roots,
    grid_sup,
)


def test_golden_constant_is_inverse_ratio():
    assert GOLDEN == pytest.approx((np.sqrt(5) - 1) / 2)
    assert GOLDEN * (GOLDEN + 1) == pytest.approx(1.0)


class TestGaussNodes:
    def test_polynomial_exactness(self):
        # degree 2n-1 polynomials integrate exactly on [0, 1]
        x, w = gauss_nodes(6)
        for k in range(12):
            assert np.dot(w, x**k) == pytest.approx(1.0 / (k + 1), rel=1e-13)

    def test_nodes_interior_and_weights_positive(self):
        x, w = gauss_nodes(32)
        assert np.all((x > 0) & (x < 1))
        assert np.all(w > 0)
        assert np.sum(w) == pytest.approx(1.0, rel=1e-14)

    def test_cached_identity(self):
        assert gauss_nodes(16)[0] is gauss_nodes(16)[0]


class TestGoldenMax:
    def test_sine_peak(self):
        # comparison-based search plateaus at sqrt(eps) near a quadratic top
        x, v = golden_max(np.sin, 0.0, np.pi, tol=1e-12)
        assert x == pytest.approx(np.pi / 2, abs=1e-7)
        assert v == pytest.approx(1.0, abs=1e-14)

    def test_quadratic(self):
        x, v = golden_max(lambda t: -(t - 0.3) ** 2, -1.0, 1.0)
        assert x == pytest.approx(0.3, abs=1e-7)


class TestGridSup:
    def test_multimodal(self):
        # two humps; frozen oracle from an independent bounded minimizer
        f = lambda t: np.exp(-20 * (t - 0.21) ** 2) + 1.3 * np.exp(
            -30 * (t - 0.77) ** 2)
        x, v = grid_sup(f, 0.0, 1.0, n=512)
        assert x == pytest.approx(0.769451508351757, abs=1e-7)
        assert v == pytest.approx(1.301900048567712, rel=1e-12)

    def test_endpoint_value_wins(self):
        f = lambda t: np.cos(t)
        x, v = grid_sup(f, 0.0, 1.0, n=128, endpoint_values=(2.0, None))
        assert x == 0.0 and v == 2.0

    def test_monotone_no_interior_max(self):
        x, v = grid_sup(lambda t: np.asarray(t), 0.0, 1.0, n=64)
        assert v == pytest.approx(1.0, abs=1e-2)


class TestRoots:
    def test_grid_roots_sine(self):
        roots = grid_roots(np.sin, 0.5, 10.0, n=512)
        assert np.allclose(roots, [np.pi, 2 * np.pi, 3 * np.pi], atol=1e-10)

    def test_bisect_root(self):
        r = bisect_root(lambda t: t**3 - 2.0, 0.0, 2.0, tol=1e-12)
        assert r == pytest.approx(2.0 ** (1 / 3), abs=1e-10)

    def test_bisect_requires_bracket(self):
        with pytest.raises(ValueError):
            bisect_root(lambda t: t * t + 1.0, -1.0, 1.0)
