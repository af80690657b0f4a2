import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aotomo.fields import (FrequencyBand, GridField, analysis, analysis_aperture, eval_w_jk, eval_w_jk_lg,
                           inner_product, l2_norm, random_bandlimited, synthesis, synthesis_aperture)
from aotomo.geometry import Aperture, AtmosphereConfig, GuideStar, TorusDomain

T = 3.0
TORUS = TorusDomain(T, 32)


def w_field(j, k, torus=TORUS):
    x, y = torus.mesh()
    return GridField(eval_w_jk(torus.T, j, k, x, y), torus.T)


def test_inner_product_area():
    one = GridField(np.ones((32, 32)), T)
    assert inner_product(one, one) == pytest.approx(4 * T * T)


def test_orthonormality():
    assert abs(inner_product(w_field(1, 0), w_field(0, 1))) < 1e-12
    assert inner_product(w_field(3, -2), w_field(3, -2)) == pytest.approx(1, abs=1e-12)


def test_inner_product_conjugate_symmetric(rng):
    f = GridField(rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32)), T)
    g = GridField(rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32)), T)
    assert inner_product(f, g) == np.conj(inner_product(g, f))
    with pytest.raises(ValueError):
        inner_product(f, GridField(np.zeros((16, 16)), T))


@given(st.floats(-50, 50), st.floats(-50, 50), st.integers(-40, 40), st.integers(-40, 40))
def test_w_modulus_and_period(x, y, j, k):
    v = eval_w_jk(T, j, k, x, y)
    assert abs(abs(v) - 1 / (2 * T)) < 1e-12
    assert abs(eval_w_jk(T, j, k, x + 2 * T, y) - v) < 1e-9
    assert abs(eval_w_jk(T, 0, 0, x, y) - 1 / (2 * T)) < 1e-15


def test_band_indices():
    assert list(FrequencyBand(2).indices(16)) == [-2, -1, 0, 1, 2]
    assert FrequencyBand().size(16) == 16
    with pytest.raises(ValueError):
        FrequencyBand(8).indices(16)
    assert FrequencyBand(7).size(16) == 15
    assert FrequencyBand(3).position(16, -3, 2) == (0, 5)


def test_analysis_matches_direct_quadrature(rng):
    f = rng.standard_normal((32, 32)) + 1j * rng.standard_normal((32, 32))
    band = FrequencyBand(5)
    c = analysis(f, TORUS, band)
    for j, k in [(0, 0), (2, -3), (-5, 5)]:
        a, b = band.position(32, j, k)
        assert c[a, b] == pytest.approx(inner_product(GridField(f, T), w_field(j, k)), abs=1e-12)


def test_scaled_analysis_matches_quadrature(rng):
    f = rng.standard_normal((32, 32)) + 0j
    band = FrequencyBand(4)
    c = analysis(f, TORUS, band, scale=0.8)
    x, y = TORUS.mesh()
    ref = inner_product(GridField(f, T), GridField(eval_w_jk(T, 2, -1, x / 0.8, y / 0.8) / 0.8, T))
    assert c[band.position(32, 2, -1)] == pytest.approx(ref, abs=1e-12)
    one = np.zeros((9, 9))
    one[band.position(32, 2, -1)] = 1
    back = synthesis(one, TORUS, band, scale=0.8)
    np.testing.assert_allclose(back, eval_w_jk(T, 2, -1, x / 0.8, y / 0.8) / 0.8, atol=1e-12)


def test_analysis_square_aperture_unit_coefficient():
    full = FrequencyBand(15)
    c = analysis_aperture(GridField(w_field(0, 0).samples, T, np.ones((32, 32), bool)), full)
    expect = np.zeros_like(c)
    expect[15, 15] = 1
    np.testing.assert_allclose(c, expect, atol=1e-12)
    assert not analysis_aperture(GridField(np.zeros((32, 32)), T), full).any()


def test_parseval_on_disk(rng):
    torus = TorusDomain(21.0, 64)
    x, y = torus.mesh()
    mask = Aperture.disk(42).indicator(x, y)
    psi = random_bandlimited(torus, 4, rng, mask=mask)
    c = analysis_aperture(GridField(psi, 21.0, mask), FrequencyBand())
    assert (np.abs(c) ** 2).sum() == pytest.approx(l2_norm(psi, torus.delta) ** 2, rel=1e-12)


def test_synthesis_inverts_analysis(rng):
    band = FrequencyBand(6)
    f = random_bandlimited(TORUS, 6, rng)
    np.testing.assert_allclose(synthesis(analysis(f, TORUS, band), TORUS, band), f, atol=1e-10)
    coeffs = rng.standard_normal((13, 13)) + 1j * rng.standard_normal((13, 13))
    np.testing.assert_allclose(analysis(synthesis(coeffs, TORUS, band), TORUS, band), coeffs, atol=1e-10)
    full = FrequencyBand()
    g = rng.standard_normal((32, 32)) + 0j
    np.testing.assert_allclose(synthesis(analysis(g, TORUS, full), TORUS, full), g, atol=1e-12)


def test_synthesis_single_coefficient_and_linearity(rng):
    band = FrequencyBand(3)
    c = np.zeros((7, 7), complex)
    c[band.position(32, 2, -1)] = 1
    np.testing.assert_allclose(synthesis_aperture(c, band, TORUS).samples, w_field(2, -1).samples, atol=1e-14)
    a = rng.standard_normal((7, 7)) + 0j
    b = rng.standard_normal((7, 7)) + 0j
    np.testing.assert_allclose(synthesis(a + b, TORUS, band),
                               synthesis(a, TORUS, band) + synthesis(b, TORUS, band), atol=1e-12)
    with pytest.raises(ValueError):
        synthesis(np.zeros((5, 5)), TORUS, band)


@settings(max_examples=15, deadline=None)
@given(st.integers(-5, 5), st.integers(-5, 5), st.integers(0, 3))
def test_frame_function_energy(j, k, l):
    rho = 0.000290888
    atm = AtmosphereConfig([0, 3000, 9000, 18000], [GuideStar((rho, 0)), GuideStar((-rho, rho), "LGS")])
    ap = Aperture.disk(42)
    torus = TorusDomain(30.0, 128)
    for g in range(2):
        w = eval_w_jk_lg(atm, ap, torus, j, k, l, g)
        c = 1.0 if g == 0 else 1 - atm.heights[l] / atm.h_lgs_m
        pixels = w.mask.sum() * torus.delta ** 2
        assert w.norm() ** 2 == pytest.approx(pixels / (4 * torus.T ** 2 * c * c), rel=1e-12)
        # the sampled footprint area converges to the scaled disk area
        assert pixels / (c * c * ap.area) == pytest.approx(1, abs=0.03)
        assert not w.samples[~w.mask].any()


def test_frame_function_ground_ngs():
    atm = AtmosphereConfig([0], [GuideStar((0, 0))])
    ap = Aperture.disk(4)
    w = eval_w_jk_lg(atm, ap, TORUS, 2, 1, 0, 0)
    x, y = TORUS.mesh()
    np.testing.assert_allclose(w.samples, np.where(ap.indicator(x, y), eval_w_jk(T, 2, 1, x, y), 0))
