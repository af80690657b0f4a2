"""Property checks run by ``aotomo validate`` on an arbitrary configuration."""
from __future__ import annotations

import numpy as np

from . import config as cfgmod
from .fields import FrequencyBand, LayerSet, analysis, l2_norm, random_bandlimited
from .frame import LayerFrame, dual_error_bound, frame_bounds_estimate
from .operator import build_block_matrix, explicit_svd, forward, residual_identity
from .recon import operator_norm_bound, reconstruct


def _check(name, passed, detail):
    return {"name": name, "passed": bool(passed), "detail": detail}


def run_checks(doc, cache=None, seed=0, trials=3):
    atm, ap, torus = cfgmod.atmosphere(doc), cfgmod.aperture(doc), cfgmod.torus(doc)
    rng = np.random.default_rng(seed)
    x, y = torus.mesh()
    mask = ap.indicator(x, y)
    full = FrequencyBand()
    jb = max(1, min(8, doc["band_j"] // 4))
    out = []

    psi = random_bandlimited(torus, jb, rng, count=trials, mask=mask)
    energy = (np.abs(analysis(psi, torus, full)) ** 2).sum(axis=(-2, -1))
    norm2 = l2_norm(psi, torus.delta, axis=(-2, -1)) ** 2
    err = float(np.max(np.abs(energy - norm2) / norm2))
    out.append(_check("parseval", err <= 1e-6, f"max relative error {err:.2e}"))

    bounds = []
    for l in sorted({0, atm.L - 1}):
        b = frame_bounds_estimate(LayerFrame(atm, ap, torus, l), iterations=300, rng=rng)
        bounds.append((l + 1, b.lower, b.upper))
    ok = all(1 - 1e-3 <= lo <= hi <= atm.G + 1e-3 for _, lo, hi in bounds)
    out.append(_check("frame_bounds", ok, "; ".join(f"l={l}: [{lo:.4f}, {hi:.4f}]" for l, lo, hi in bounds)))

    worst = 0.0
    for j, k in rng.integers(-doc["band_j"], doc["band_j"] + 1, size=(20, 2)):
        A = build_block_matrix(atm, torus, j, k).dense()
        svd = explicit_svd(atm, torus, j, k)
        s_num = np.linalg.svd(A, compute_uv=False)
        worst = max(worst, float(np.max(np.abs(np.sort(svd.sigma)[::-1] - s_num) / s_num)),
                    float(np.abs(svd.matrix() - A).max()))
    out.append(_check("explicit_svd", worst <= 1e-10, f"max deviation {worst:.2e}"))

    N = doc["dual_iters"]
    lf = LayerFrame(atm, ap, torus, atm.L - 1)
    f = random_bandlimited(torus, jb, rng, mask=lf.union)
    rec = lf.inverse(lf.apply_S(f), N)
    err = float(l2_norm(rec - f, torus.delta) / l2_norm(f, torus.delta))
    limit = max(1e-6, dual_error_bound(1.0, atm.G, N))
    out.append(_check("dual_decay", err <= limit, f"error {err:.2e} after {N} steps (limit {limit:.2e})"))

    lay = LayerSet.for_config(random_bandlimited(torus, jb, rng, count=atm.L), atm, ap, torus)
    psi = random_bandlimited(torus, jb, rng, count=atm.G, mask=mask)
    lhs, rhs = residual_identity(atm, ap, torus, lay, psi)
    rel = abs(lhs - rhs) / max(lhs, rhs)
    out.append(_check("residual_equivalence", rel <= 1e-4, f"relative difference {rel:.2e}"))

    band = cfgmod.band(doc)
    data = forward(atm, ap, torus, lay)
    # all resolvable frequencies, so band truncation does not enter the residual
    rep = reconstruct(atm, ap, torus, data, full, iterations=N, frame_band=cfgmod.frame_band(doc))
    ok = rep.forward_residual <= 1e-2 and rep.defects.max() <= 1e-2
    out.append(_check("round_trip", ok, f"residual {rep.forward_residual:.2e}, max defect {rep.defects.max():.2e}"))

    bound = operator_norm_bound(atm)
    ratios = []
    for _ in range(trials):
        psi = random_bandlimited(torus, jb, rng, count=atm.G, mask=mask)
        ratios.append(reconstruct(atm, ap, torus, psi, band, iterations=N).norm_ratio)
    out.append(_check("stability", max(ratios) <= 1.05 * bound,
                      f"max ratio {max(ratios):.4f}, bound {bound:.4f}"))

    if cache is not None:
        cb = FrequencyBand(cache.J)
        a = reconstruct(atm, ap, torus, data, cb, cache=cache)
        b = reconstruct(atm, ap, torus, data, cb, iterations=cache.N, frame_band=cfgmod.frame_band(doc))
        diff = float(l2_norm(a.layers.fields - b.layers.fields, torus.delta) /
                     max(l2_norm(b.layers.fields, torus.delta), 1e-300))
        out.append(_check("cache_matches_operator", diff <= 1e-10, f"relative difference {diff:.2e}"))
    return out
