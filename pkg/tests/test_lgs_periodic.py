import numpy as np
import pytest

from aotomo.fields import FrequencyBand, analysis, synthesis
from aotomo.geometry import AtmosphereConfig, GuideStar, TorusDomain
from aotomo.lgs_periodic import (periodic_block, periodic_entries, periodic_forward, periodic_layer_coefficients,
                                 periodic_pseudoinverse, picard_diagnostic)

RHO = 0.000290888
HEIGHTS = [0, 140, 281, 562, 1125, 2250, 4500, 9000, 18000]


def lgs6():
    a, b = 0.5 * RHO, 0.866025 * RHO
    pts = [(RHO, 0), (a, b), (-a, b), (-RHO, 0), (-a, -b), (a, -b)]
    return AtmosphereConfig(HEIGHTS, [GuideStar(p, "LGS") for p in pts])


def layer_fields(atm, torus, coeffs, band):
    c = 1 - atm.heights / atm.h_lgs_m
    return np.stack([synthesis(coeffs[l], torus, band) / c[l] for l in range(atm.L)])


def test_rejects_ngs():
    atm = AtmosphereConfig([0], [GuideStar((0, 0))])
    with pytest.raises(ValueError):
        periodic_block(atm, TorusDomain(1.0, 8), 0, 0)


def test_identity_case(rng):
    atm = AtmosphereConfig([0], [GuideStar((0, 0), "LGS")])
    torus = TorusDomain(2.0, 16)
    f = rng.standard_normal((1, 16, 16)) + 0j
    for method in ("fourier", "bilinear"):
        np.testing.assert_allclose(periodic_forward(atm, torus, f, method)[0], f[0], atol=1e-12)
        assert not periodic_forward(atm, torus, np.zeros_like(f), method).any()
    with pytest.raises(ValueError):
        periodic_forward(atm, torus, f, "cubic")


def test_single_block_examples():
    atm = AtmosphereConfig([9000], [GuideStar((0, 0), "LGS")])
    torus = TorusDomain(5.0, 16)
    blk = periodic_block(atm, torus, 2, 1)
    assert blk.matrix[0, 0] == pytest.approx(1 / 0.9)
    assert blk.sigma[0] == pytest.approx(1 / 0.9)
    assert periodic_pseudoinverse(blk, np.array([2.0 + 1j]))[0] == pytest.approx(0.9 * (2 + 1j))


def test_basis_function_expansion():
    atm = lgs6()
    torus = TorusDomain(27.0, 64)
    band = FrequencyBand(10)
    j, k, l = 3, -2, 7
    coeffs = np.zeros((9, 21, 21), complex)
    coeffs[(l,) + band.position(64, j, k)] = 1
    out = periodic_forward(atm, torus, layer_fields(atm, torus, coeffs, band))
    x, y = torus.mesh()
    M = periodic_entries(atm, torus, j, k)
    for g in range(6):
        expect = M[g, l] * np.exp(1j * torus.omega * (j * x + k * y)) / (2 * torus.T)
        np.testing.assert_allclose(out[g], expect, atol=1e-12)


def test_block_structure_and_svd(rng):
    atm = lgs6()
    torus = TorusDomain(27.0, 64)
    c = 1 - atm.heights / atm.h_lgs_m
    for j, k in rng.integers(-31, 32, size=(8, 2)):
        blk = periodic_block(atm, torus, j, k)
        np.testing.assert_allclose(np.abs(blk.matrix), np.broadcast_to(1 / c, (6, 9)), atol=1e-13)
        assert blk.rank <= 6
        assert np.all(np.diff(blk.sigma) <= 0) and np.all(blk.sigma > 0)
        rec = (blk.u * blk.sigma) @ blk.v.conj().T
        np.testing.assert_allclose(rec, blk.matrix, atol=1e-12)
        x = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        assert np.linalg.norm(blk.matrix @ x) <= blk.sigma[0] * np.linalg.norm(x) * (1 + 1e-12)


def test_pseudoinverse_min_norm(rng):
    atm = lgs6()
    torus = TorusDomain(27.0, 64)
    for j, k in [(0, 0), (3, 2), (-17, 9), (25, -30)]:
        blk = periodic_block(atm, torus, j, k)
        x = rng.standard_normal(9) + 1j * rng.standard_normal(9)
        y = blk.matrix @ x
        xh = periodic_pseudoinverse(blk, y)
        ref = np.linalg.lstsq(blk.matrix, y, rcond=1e-12)[0]
        np.testing.assert_allclose(xh, ref, atol=1e-9 * np.linalg.norm(ref))
        np.testing.assert_allclose(blk.matrix @ xh, y, atol=1e-12 * np.linalg.norm(y))
        assert not periodic_pseudoinverse(blk, np.zeros(6)).any()


def test_bilinear_wraps_consistently(rng):
    atm = lgs6()
    torus = TorusDomain(27.0, 128)
    band = FrequencyBand(3)
    coeffs = rng.standard_normal((9, 7, 7)) + 1j * rng.standard_normal((9, 7, 7))
    lay = layer_fields(atm, torus, coeffs, band)
    a = periodic_forward(atm, torus, lay, "fourier")
    b = periodic_forward(atm, torus, lay, "bilinear")
    assert np.abs(a - b).max() <= 5e-3 * np.abs(a).max()


def test_picard_profile(rng):
    atm = lgs6()
    torus = TorusDomain(27.0, 32)
    band = FrequencyBand(4)
    zero = picard_diagnostic(atm, torus, np.zeros((6, 9, 9)), band)
    assert not zero["partial_sums"].any()
    # consistent data: profile bounded by the coefficient energy of the layers
    coeffs = rng.standard_normal((9, 9, 9)) + 1j * rng.standard_normal((9, 9, 9))
    data = analysis(periodic_forward(atm, torus, layer_fields(atm, torus, coeffs, band)), torus, band)
    prof = picard_diagnostic(atm, torus, data, band)
    assert np.all(np.diff(prof["partial_sums"]) >= 0)
    assert prof["partial_sums"][-1] <= (np.abs(coeffs) ** 2).sum() * (1 + 1e-8)
    # energy along the weakest singular direction grows the sum fastest
    idx = band.indices(32)
    weak = np.zeros((6, 9, 9), complex)
    strong = np.zeros((6, 9, 9), complex)
    for a, j in enumerate(idx):
        for b, k in enumerate(idx):
            blk = periodic_block(atm, torus, j, k)
            weak[:, a, b] = blk.u[:, -1]
            strong[:, a, b] = blk.u[:, 0]
    pw = picard_diagnostic(atm, torus, weak, band)["partial_sums"][-1]
    ps = picard_diagnostic(atm, torus, strong, band)["partial_sums"][-1]
    assert pw > 100 * ps


def test_layer_coefficients_roundtrip(rng):
    atm = lgs6()
    torus = TorusDomain(27.0, 32)
    band = FrequencyBand(5)
    coeffs = rng.standard_normal((9, 11, 11)) + 1j * rng.standard_normal((9, 11, 11))
    back = periodic_layer_coefficients(atm, torus, layer_fields(atm, torus, coeffs, band), band)
    np.testing.assert_allclose(back, coeffs, atol=1e-12)
