"""Spectral factorization: symbols, roots, per-order constants, masks."""

import math
from fractions import Fraction

import numpy as np
import pytest

from blwave.errors import InvalidParams, OrderTooLarge
from blwave.symbol import (
    TrigPolynomial,
    bspline_fourier,
    geom_factor,
    modulus_sq_script_A,
    order_tables,
    scaling_mask,
    symbol,
    wavelet_mask,
)

from _exact import bspline_value

GRID = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)

SQRT3 = math.sqrt(3.0)


def test_symbol_order_zero_is_one():
    s = symbol(0)
    assert s.coeffs == (Fraction(1),)
    assert s(0.37) == 1.0


def test_symbol_order_one_frozen():
    # (2 + cos w)/3
    assert symbol(1).coeffs == (Fraction(2, 3), Fraction(1, 3))


def test_symbol_order_two_frozen():
    # (33 + 26 cos w + cos 2w)/60
    assert symbol(2).coeffs == (Fraction(11, 20), Fraction(13, 30), Fraction(1, 60))


@pytest.mark.parametrize("n", range(6))
def test_symbol_strictly_positive(n):
    assert symbol(n).min_on_grid() > 0.0


@pytest.mark.parametrize("n", range(6))
def test_symbol_equals_periodized_modulus_sum(n):
    """Independent oracle: truncate sum_m |B_hat(w + 2 pi m)|^2 at |m| <= M."""
    M = 64
    s = symbol(n)
    w = np.linspace(0.0, 2.0 * np.pi, 37)
    acc = np.zeros_like(w)
    for m in range(-M, M + 1):
        u = w + 2.0 * np.pi * m
        acc += np.abs(bspline_fourier(n, u)) ** 2
    # |B_hat_n(u)|^2 <= (2/|u|)^{2n+2}, so the discarded tail is at most
    # 2 pi^{-(2n+2)} sum_{k >= M} k^{-(2n+2)}, bounded by the integral test
    expo = 2 * n + 2
    ztail = M ** (-expo) + M ** (1 - expo) / (expo - 1)
    tail = 2.0 * np.pi ** (-expo) * ztail + 1e-12
    assert np.max(np.abs(acc - s(w))) <= tail


class TestOrderTables:
    def test_first_order_frozen(self):
        t = order_tables(1)
        assert t.roots[0] == pytest.approx(2.0 - SQRT3, abs=1e-12)
        assert t.rho[0] == pytest.approx(4.0, abs=1e-12)
        assert t.alpha[0] == pytest.approx(1.5, abs=1e-12)
        assert t.beta == pytest.approx(3.0 - SQRT3, abs=1e-12)
        np.testing.assert_allclose(t.lambdas, [4.0, 2.0], atol=1e-12)

    def test_second_order_frozen(self):
        # u^2 + 26 u + 64 = 0  =>  rho = 13 -+ sqrt(105)
        t = order_tables(2)
        s105 = math.sqrt(105.0)
        np.testing.assert_allclose(t.rho, [13.0 - s105, 13.0 + s105], atol=1e-10)
        r1 = (t.rho[0] - math.sqrt(t.rho[0] ** 2 - 4.0)) / 2.0
        assert t.roots[0] == pytest.approx(r1, abs=1e-13)
        assert t.roots[0] == pytest.approx(0.4305753470999737, abs=1e-12)
        assert t.roots[1] == pytest.approx(0.0430962882032641, abs=1e-12)
        # lambda_0 = 2 + rho1 rho2 = 66, lambda_1 = 2 (rho1 + rho2) = 52
        np.testing.assert_allclose(t.lambdas, [66.0, 52.0, 2.0], atol=1e-9)

    @pytest.mark.parametrize("n", range(1, 9))
    def test_root_window_and_ordering(self, n):
        t = order_tables(n)
        assert all(0.0 < r < 1.0 for r in t.roots)
        assert list(t.roots) == sorted(t.roots, reverse=True)
        assert all(p > 2.0 for p in t.rho)
        assert all(a > 1.0 for a in t.alpha)

    @pytest.mark.parametrize("n", range(1, 7))
    def test_lambda_top_and_positivity(self, n):
        lam = order_tables(n).lambdas
        assert lam[n] == pytest.approx(2.0, abs=1e-9)
        assert all(v > 0.0 for v in lam)

    @pytest.mark.parametrize("n", range(1, 6))
    def test_factorization_on_grid(self, n):
        t = order_tables(n)
        prod = np.ones_like(GRID)
        for r in t.roots:
            prod *= 1.0 + r * r + 2.0 * r * np.cos(GRID)
        resid = np.abs(symbol(n)(GRID) - prod / t.beta ** 2)
        assert np.max(resid) <= 1e-10

    @pytest.mark.parametrize("n", range(1, 6))
    def test_beta_two_formulas(self, n):
        t = order_tables(n)
        other = 2.0 ** n * math.sqrt(float(np.prod(t.alpha)) * float(np.prod(t.roots)))
        assert abs(t.beta - other) <= 1e-10

    @pytest.mark.parametrize("n", range(1, 6))
    def test_reciprocal_pairing(self, n):
        """Q vanishes at -r_j and -1/r_j; the 2n roots multiply to 1."""
        from blwave.symbol import _symbol_poly_coefficients

        q = _symbol_poly_coefficients(n)
        scale = max(abs(c) for c in q)

        def qval(z):
            v = 0.0
            for c in reversed(q):
                v = v * z + c
            return v / scale

        prod = 1.0
        for r in order_tables(n).roots:
            assert abs(qval(-r)) <= 1e-9
            assert abs(qval(-1.0 / r)) <= 1e-9 * (1.0 / r) ** (2 * n)
            prod *= (-r) * (-1.0 / r)
        assert prod == pytest.approx(1.0, abs=1e-9)

    def test_order_bounds(self):
        with pytest.raises(InvalidParams):
            order_tables(0)
        with pytest.raises(OrderTooLarge):
            order_tables(13)

    def test_as_dict_keys(self):
        d = order_tables(2).as_dict()
        assert set(d) == {"order", "roots", "rho", "alpha", "beta", "lambda"}


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_modulus_sq_script_A_identity(n):
    """prod (1 + r^2 - 2 r cos t) == [prod r] sum (-1)^j lambda_j cos(jt)."""
    t = order_tables(n)
    trig = modulus_sq_script_A(t)
    theta = np.linspace(0.0, 2.0 * np.pi, 2048, endpoint=False)
    direct = np.ones_like(theta)
    for r in t.roots:
        direct *= 1.0 + r * r - 2.0 * r * np.cos(theta)
    assert np.max(np.abs(direct - trig(theta))) <= 1e-10


@pytest.mark.parametrize("n", [1, 2, 3])
def test_script_A_matches_geom_factor(n):
    t = order_tables(n)
    w = np.linspace(-6.0, 6.0, 301)
    lhs = np.abs(geom_factor(t, w + np.pi, conjugate=True)) ** 2
    assert np.max(np.abs(lhs - modulus_sq_script_A(t)(w))) <= 1e-10


class TestMasks:
    @pytest.mark.parametrize("n", [1, 2, 3, 5])
    def test_scaling_mask_endpoints(self, n):
        t = order_tables(n)
        assert scaling_mask(t, 3, 0.0) == pytest.approx(1.0, abs=1e-12)
        assert abs(scaling_mask(t, 0, np.pi)) <= 1e-12

    @pytest.mark.parametrize("n", range(1, 6))
    def test_qmf_identity(self, n):
        t = order_tables(n)
        w = np.linspace(0.0, 2.0 * np.pi, 1024, endpoint=False)
        total = np.abs(scaling_mask(t, 0, w)) ** 2 + np.abs(scaling_mask(t, 0, w + np.pi)) ** 2
        assert np.max(np.abs(total - 1.0)) <= 1e-10

    def test_scaling_mask_self_consistency(self):
        """m agrees with phi_hat(2w)/phi_hat(w) for the orthonormalized spline."""
        t = order_tables(2)
        w = np.linspace(0.1, 2.0, 64)

        def phi_hat(u):
            return t.beta * bspline_fourier(2, u) / geom_factor(t, u)

        np.testing.assert_allclose(scaling_mask(t, 0, w),
                                   phi_hat(2.0 * w) / phi_hat(w), atol=1e-12)

    def test_wavelet_mask_modulus(self):
        t = order_tables(3)
        w = np.linspace(0.0, 2.0 * np.pi, 257)
        np.testing.assert_allclose(np.abs(wavelet_mask(t, 1, 2, w)),
                                   np.abs(scaling_mask(t, 1, w + np.pi)), atol=1e-12)

    def test_wavelet_mask_vanishes_at_zero(self):
        t = order_tables(2)
        assert abs(wavelet_mask(t, 0, 0, 0.0)) <= 1e-12

    @pytest.mark.parametrize("n", [1, 2, 4])
    def test_wavelet_qmf(self, n):
        t = order_tables(n)
        w = np.linspace(0.0, 2.0 * np.pi, 1024, endpoint=False)
        total = (np.abs(wavelet_mask(t, 0, 0, w)) ** 2
                 + np.abs(wavelet_mask(t, 0, 0, w + np.pi)) ** 2)
        assert np.max(np.abs(total - 1.0)) <= 1e-10


def test_trig_polynomial_requires_constant():
    with pytest.raises(InvalidParams):
        TrigPolynomial([])


def test_symbol_coefficients_are_bspline_samples():
    # cross-check the construction path against the independent recursion
    n = 3
    s = symbol(n)
    assert s.coeffs[0] == bspline_value(2 * n + 1, Fraction(n + 1))
    for j in range(1, n + 1):
        assert s.coeffs[j] == 2 * bspline_value(2 * n + 1, Fraction(n + 1 + j))
