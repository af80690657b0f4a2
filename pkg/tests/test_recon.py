import numpy as np
import pytest

from aotomo.fields import FrequencyBand, LayerSet, l2_norm, random_bandlimited
from aotomo.frame import build_dual_cache
from aotomo.geometry import Aperture, AtmosphereConfig, GuideStar, TorusDomain
from aotomo.operator import forward, layer_coefficients
from aotomo.recon import coefficient_solution_equals_pinv, consistency_defect, operator_norm_bound, reconstruct

HEIGHTS = [0, 140, 281, 562, 1125, 2250, 4500, 9000, 18000]
FULL = FrequencyBand()


def aperture_mask(ap, torus):
    x, y = torus.mesh()
    return ap.indicator(x, y)


def test_norm_bound_examples():
    ngs = AtmosphereConfig(HEIGHTS, [GuideStar((0, 0))] * 2)
    assert operator_norm_bound(ngs) == pytest.approx(1 / 3, abs=1e-15)
    for L in (1, 2, 5):
        cfg = AtmosphereConfig(list(range(0, 100 * L, 100)), [GuideStar((0, 0))])
        assert operator_norm_bound(cfg) == pytest.approx(L ** -0.5)
    one_lgs = AtmosphereConfig(HEIGHTS, [GuideStar((0, 0), "LGS")])
    expect = sum((1 - h / 9e4) ** -2 for h in HEIGHTS) ** -0.5
    assert operator_norm_bound(one_lgs) == pytest.approx(expect, rel=1e-14)
    assert operator_norm_bound(one_lgs) < 1 / 3
    mixed = AtmosphereConfig(HEIGHTS, [GuideStar((0, 0)), GuideStar((0, 0), "LGS")])
    assert operator_norm_bound(mixed) == pytest.approx(1 / 3)


def test_single_star_single_layer(rng):
    atm = AtmosphereConfig([0], [GuideStar((0, 0))])
    ap, torus = Aperture.disk(8), TorusDomain(4.0, 32)
    m = aperture_mask(ap, torus)
    psi = random_bandlimited(torus, 3, rng, count=1, mask=m)
    rep = reconstruct(atm, ap, torus, psi, FULL, iterations=5)
    np.testing.assert_allclose(rep.layers.fields[0], psi[0], atol=1e-12)
    assert rep.forward_residual <= 1e-6
    assert rep.defects[0] <= 1e-12
    assert coefficient_solution_equals_pinv(atm, ap, torus, rep, [(0, 0), (3, -1), (-7, 5)]) <= 1e-8


def test_zero_data(maory64):
    atm, ap, torus = maory64
    rep = reconstruct(atm, ap, torus, np.zeros((6, 64, 64)), FrequencyBand(8), iterations=3)
    assert not rep.layers.fields.any()
    assert rep.forward_residual == 0 and not rep.defects.any()
    assert consistency_defect(rep, 4) == 0


def test_consistent_instance(aligned, rng):
    atm, ap, torus = aligned
    m = aperture_mask(ap, torus)
    psi = random_bandlimited(torus, 4, rng, count=2, mask=m)
    rep = reconstruct(atm, ap, torus, psi, FULL, iterations=60)
    assert rep.forward_residual <= 1e-12
    assert rep.defects.max() <= 1e-12
    assert rep.norm_ratio <= rep.norm_bound * (1 + 1e-12)
    dev = coefficient_solution_equals_pinv(atm, ap, torus, rep, [(0, 0), (5, -3), (-20, 11)])
    assert dev <= 1e-10
    data = forward(atm, ap, torus, LayerSet.for_config(random_bandlimited(torus, 3, rng, count=2), atm, ap, torus))
    assert reconstruct(atm, ap, torus, data, FULL, iterations=60).forward_residual <= 1e-12


def test_inconsistent_data_reports_defects(maory64, rng):
    atm, ap, torus = maory64
    m = aperture_mask(ap, torus)
    psi = random_bandlimited(torus, 3, rng, count=6, mask=m)
    rep = reconstruct(atm, ap, torus, psi, FULL, iterations=30)
    assert np.all(rep.defects > 1e-3) and np.all(rep.defects <= 1)
    dev = coefficient_solution_equals_pinv(atm, ap, torus, rep, [(0, 0), (2, 1)])
    assert np.isfinite(dev) and dev > 0
    assert rep.to_dict()["route"] == "operator"


def test_linearity(maory64, rng):
    atm, ap, torus = maory64
    m = aperture_mask(ap, torus)
    band = FrequencyBand(10)
    p = random_bandlimited(torus, 3, rng, count=6, mask=m)
    q = random_bandlimited(torus, 3, rng, count=6, mask=m)
    a, b = 0.7 - 0.2j, -1.3
    lhs = reconstruct(atm, ap, torus, a * p + b * q, band, iterations=20).layers.fields
    rhs = (a * reconstruct(atm, ap, torus, p, band, iterations=20).layers.fields
           + b * reconstruct(atm, ap, torus, q, band, iterations=20).layers.fields)
    assert np.abs(lhs - rhs).max() <= 1e-10 * np.abs(rhs).max()


def test_stability_and_radon_scaling(maory64, rng):
    atm, ap, torus = maory64
    m = aperture_mask(ap, torus)
    L = atm.L
    for _ in range(5):
        psi = random_bandlimited(torus, 3, rng, count=6, mask=m)
        rep = reconstruct(atm, ap, torus, psi, FrequencyBand(15), iterations=30)
        assert rep.norm_ratio <= 1.05 * operator_norm_bound(atm)
        assert L * rep.norm_ratio <= 1.05 * np.sqrt(L)
        # (A / L) applied to (L x) is A x
        scaled = forward(atm, ap, torus, L * rep.layers.fields).fields / L
        resid = l2_norm(scaled - psi, torus.delta) / l2_norm(psi, torus.delta)
        assert resid == pytest.approx(rep.forward_residual, rel=1e-12)


def test_cache_route(maory64, rng):
    atm, ap, torus = maory64
    m = aperture_mask(ap, torus)
    band = FrequencyBand(3)
    cache = build_dual_cache(atm, ap, torus, band, 15)
    psi = random_bandlimited(torus, 2, rng, count=6, mask=m)
    a = reconstruct(atm, ap, torus, psi, band, cache=cache)
    b = reconstruct(atm, ap, torus, psi, band, iterations=15)
    np.testing.assert_allclose(a.layers.fields, b.layers.fields, atol=1e-12 * np.abs(b.layers.fields).max())
    assert a.meta["route"] == "cache"
    with pytest.raises(ValueError):
        reconstruct(atm, ap, torus, psi, FrequencyBand(5), cache=cache)


def test_minimum_coefficient_property(aligned, rng):
    atm, ap, torus = aligned
    m = aperture_mask(ap, torus)
    psi = random_bandlimited(torus, 4, rng, count=2, mask=m)
    rep = reconstruct(atm, ap, torus, psi, FULL, iterations=60)
    eta1 = np.roll(random_bandlimited(torus, 3, rng, mask=m), 10, axis=0)
    eta = np.stack([eta1, -np.roll(eta1, 8, axis=0)])
    assert np.abs(forward(atm, ap, torus, eta).fields).max() <= 1e-12
    alt = rep.layers.fields + eta
    mass = lambda f: (np.abs(layer_coefficients(atm, ap, torus, f, FULL)) ** 2).sum()
    assert mass(rep.layers.fields) < mass(alt)
    assert mass(rep.layers.fields) == pytest.approx(mass(rep.layers.fields + 0 * eta))
