"""Orthonormal generator tests: truncation certificates, Gram identities,
refinement filters, and the explicit low-order displays."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from blwave.bsplines import bspline
from blwave.errors import InvalidParams, ToleranceUnreachable
from blwave.orthonormal import (
    TruncatedGenerator,
    comb_convolve,
    gamma_constant,
    homogeneous_sums,
    lambda_binomial_comb,
    psi_explicit_check,
    scaling_phi,
    spline_comb,
    wavelet_psi,
)
from blwave.symbol import order_tables, scaling_mask

TOL = 1e-10

R1 = 2.0 - math.sqrt(3.0)          # the single order-1 root
BETA1 = 3.0 - math.sqrt(3.0)


@pytest.fixture(scope="module")
def tables():
    return {n: order_tables(n) for n in (1, 2, 3, 4)}


# ---------------------------------------------------------------- helpers

def test_homogeneous_sums_single_root_is_geometric():
    h = homogeneous_sums([0.5], 6)
    assert h == pytest.approx([0.5 ** a for a in range(7)], abs=1e-15)


def test_homogeneous_sums_two_roots():
    # h_2(a, b) = a^2 + ab + b^2
    a, b = 0.3, 0.2
    h = homogeneous_sums([a, b], 2)
    assert h[0] == 1.0
    assert h[1] == pytest.approx(a + b, abs=1e-15)
    assert h[2] == pytest.approx(a * a + a * b + b * b, abs=1e-15)


def test_comb_convolve_matches_polynomial_product():
    # (1 + 2z)(3 - z) = 3 + 5z - 2z^2
    out = comb_convolve({0: 1.0, 1: 2.0}, {0: 3.0, 1: -1.0})
    assert out == {0: 3.0, 1: 5.0, 2: -2.0}


def test_spline_comb_single_term_is_plain_spline():
    f = spline_comb(2, 1, 0.0, {0: 1.0})
    g = bspline(2)
    xs = np.linspace(-1, 4, 101)
    np.testing.assert_allclose(f(xs), g(xs), atol=0.0)


def test_spline_comb_rejects_empty():
    with pytest.raises(InvalidParams):
        spline_comb(1, 1, 0.0, {})


def test_spline_comb_halved_lattice():
    f = spline_comb(1, 2, 0.25, {0: 1.0, -1: 1.0})
    # B_1(2(x - 1/4)) + B_1(2(x - 1/4) - 1): knots at 1/4 + {0, .5, 1, 1.5}
    assert f.support == (0.25, 1.75)
    assert f(0.75) == pytest.approx(1.0)


# ------------------------------------------------------- scaling function

def test_gamma_frozen_order_one():
    t = order_tables(1)
    expected = R1 * (1.0 + R1) / 2.0
    assert gamma_constant(t, 0) == pytest.approx(expected, abs=1e-12)
    assert gamma_constant(t, 1) == pytest.approx(-expected, abs=1e-12)
    assert gamma_constant(t, 0) == pytest.approx(0.1698729810778068, abs=1e-12)


def test_scaling_phi_certificate_and_fields(tables):
    for n in (1, 2, 3):
        gen = scaling_phi(tables[n], 0, TOL)
        assert isinstance(gen, TruncatedGenerator)
        assert gen.order == n
        assert gen.s is None
        assert 0.0 <= gen.tail_bound <= TOL
        assert len(gen.depths) == n
        # support: [k - depth, k + n + 1] exactly at the knot level
        assert gen.support == (-gen.depths[0], n + 1)


def test_scaling_phi_shift_is_exact_translation(tables):
    a = scaling_phi(tables[2], 0, 1e-8)
    b = scaling_phi(tables[2], 3, 1e-8)
    assert b.base.pieces == a.base.pieces
    np.testing.assert_allclose(np.array(b.base.breakpoints),
                               np.array(a.base.breakpoints) + 3.0, atol=0.0)


def test_scaling_phi_leading_series_values_order_one(tables):
    # phi(1/2) = beta (1 - r)/2 and phi(-1/2) = beta (r^2 - r)/2: only the
    # first terms of the series reach these points, so equality is exact.
    gen = scaling_phi(tables[1], 0, TOL)
    assert gen(0.5) == pytest.approx(BETA1 * (1.0 - R1) / 2.0, abs=1e-14)
    assert gen(-0.5) == pytest.approx(BETA1 * (R1 * R1 - R1) / 2.0, abs=1e-14)


def test_scaling_phi_orthonormal_translates(tables):
    for n in (1, 2, 3):
        gen = scaling_phi(tables[n], 0, TOL)
        for tau in range(0, 6):
            val = gen.base.inner_product(gen.base.translate(float(tau)))
            target = 1.0 if tau == 0 else 0.0
            assert abs(val - target) < 10.0 * TOL, (n, tau, val)


def test_scaling_phi_unreachable_tolerance(tables):
    with pytest.raises(ToleranceUnreachable):
        scaling_phi(tables[1], 0, 1e-30)


def test_scaling_phi_rejects_bad_tolerance(tables):
    with pytest.raises(InvalidParams):
        scaling_phi(tables[1], 0, 0.0)
    with pytest.raises(InvalidParams):
        scaling_phi(tables[1], 0, -1e-3)


def test_refinement_filter_matches_scaling_mask(tables):
    # h[j] = 2 <phi, phi(2 . - j)> should reproduce the mask: the transfer
    # function sum_j (h[j]/2) e^{-ij w} equals m_{n,0}(w).
    for n in (1, 2):
        t = tables[n]
        gen = scaling_phi(t, 0, TOL)
        lo, hi = gen.support
        filt = {}
        for j in range(int(2 * lo - hi) - 1, int(2 * hi - lo) + 2):
            v = gen.base.inner_product(gen.base.affine_arg(2.0, float(j)))
            if v != 0.0:
                filt[j] = 2.0 * v
        omega = np.linspace(-math.pi, math.pi, 65)
        transfer = np.zeros_like(omega, dtype=complex)
        for j, hj in filt.items():
            transfer += 0.5 * hj * np.exp(-1j * j * omega)
        mask = scaling_mask(t, 0, omega)
        assert np.max(np.abs(transfer - mask)) < 1e-8


# ----------------------------------------------------------------- wavelet

def test_wavelet_psi_certificate_and_halved_knots(tables):
    for n in (1, 2, 3):
        gen = wavelet_psi(tables[n], 0, 0, TOL)
        assert gen.order == n
        assert gen.s == 0
        assert 0.0 <= gen.tail_bound <= TOL
        bps = np.array(gen.base.breakpoints)
        np.testing.assert_allclose(2.0 * bps, np.round(2.0 * bps), atol=0.0)


def test_wavelet_psi_orthonormal_translates(tables):
    for n in (1, 2, 3):
        gen = wavelet_psi(tables[n], 0, 0, TOL)
        for tau in range(0, 6):
            val = gen.base.inner_product(gen.base.translate(float(tau)))
            target = 1.0 if tau == 0 else 0.0
            assert abs(val - target) < 10.0 * TOL, (n, tau, val)


def test_wavelet_scaling_cross_pairings_vanish(tables):
    for n in (1, 2, 3):
        psi = wavelet_psi(tables[n], 0, 0, TOL)
        phi = scaling_phi(tables[n], 0, TOL)
        for tau in range(-5, 6):
            val = psi.base.inner_product(phi.base.translate(float(tau)))
            assert abs(val) < 10.0 * TOL, (n, tau, val)


def test_wavelet_vanishing_moments(tables):
    for n in (1, 2, 3):
        gen = wavelet_psi(tables[n], 0, 0, 1e-12)
        for p in range(0, n + 1):
            assert abs(gen.base.moment(p)) < 1e-10, (n, p)


def test_wavelet_position_parameter_translates(tables):
    a = wavelet_psi(tables[2], 0, 0, 1e-9)
    b = wavelet_psi(tables[2], 0, 4, 1e-9)
    assert b.base.pieces == a.base.pieces
    np.testing.assert_allclose(np.array(b.base.breakpoints),
                               np.array(a.base.breakpoints) + 4.0, atol=0.0)


def test_wavelet_k_parameter_flips_sign(tables):
    a = wavelet_psi(tables[1], 0, 0, 1e-9)
    b = wavelet_psi(tables[1], 1, 0, 1e-9)
    xs = np.linspace(-8.0, 16.0, 257)
    np.testing.assert_allclose(b.base(xs), -a.base(xs), atol=0.0)


def test_wavelet_rejects_bad_tolerance(tables):
    with pytest.raises(InvalidParams):
        wavelet_psi(tables[1], 0, 0, -0.5)


def test_lambda_binomial_comb_order_one_values():
    t = order_tables(1)
    aligned = lambda_binomial_comb(t, aligned=True)
    # [lam comb -1@+-1, 4@0] (*) [1@+1, -2@0, 1@-1]
    assert aligned == pytest.approx({2: -1.0, 1: 6.0, 0: -10.0,
                                     -1: 6.0, -2: -1.0})
    shifted = lambda_binomial_comb(t, aligned=False)
    assert shifted == pytest.approx({w - 1: c for w, c in aligned.items()})


def test_wavelet_two_scale_consistency(tables):
    # psi should lie in V_1: expanding in the orthonormal basis
    # {sqrt 2 phi(2 . - j)} and resynthesising must reproduce it.
    t = tables[1]
    psi = wavelet_psi(t, 0, 0, 1e-9)
    phi = scaling_phi(t, 0, 1e-9)
    lo, hi = psi.support
    xs = np.linspace(lo - 0.5, hi + 0.5, 513)
    recon = np.zeros_like(xs)
    for j in range(int(2 * lo) - 40, int(2 * hi) + 41):
        fine = phi.base.affine_arg(2.0, float(j))
        c = 2.0 * psi.base.inner_product(fine)
        if c != 0.0:
            recon += c * fine(xs)
    assert np.max(np.abs(recon - psi.base(xs))) < 1e-6


# --------------------------------------------------------- explicit forms

@pytest.mark.parametrize("n", [1, 2])
def test_explicit_display_matches_generator(n):
    rep = psi_explicit_check(n, 0, 0, TOL)
    assert rep["passed"] is True
    assert rep["max_deviation"] <= 2.0 * TOL
    assert rep["order"] == n


def test_explicit_display_with_offsets():
    rep = psi_explicit_check(2, 1, 3, 1e-8)
    assert rep["passed"] is True


def test_explicit_display_rejects_high_order():
    with pytest.raises(InvalidParams):
        psi_explicit_check(3, 0, 0, TOL)


@settings(max_examples=20, deadline=None)
@given(k=st.integers(-3, 3), s=st.integers(-3, 3))
def test_wavelet_offsets_cover_lattice(k, s):
    t = order_tables(1)
    gen = wavelet_psi(t, k, s, 1e-6)
    lo, hi = gen.support
    # support always brackets the working interval around s
    assert lo < s < hi
    sign = 1.0 if (k % 2 == 0) else -1.0
    ref = wavelet_psi(t, 0, s, 1e-6)
    xs = np.linspace(lo, hi, 101)
    np.testing.assert_allclose(gen.base(xs), sign * ref.base(xs), atol=0.0)
