"""Periodic operator for laser guide stars only, its per-frequency blocks and pseudoinverse.

Layer ``l`` is stored as a periodic field on its own scaled torus
``c_l [-T, T]^2`` sampled at ``n`` cell centres, so its natural basis is
``w_jk,l(x) = c_l^-1 w_jk(x / c_l)``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from . import kernels
from .fields import FrequencyBand, analysis, eval_w_jk, fft_workers
from .geometry import LGS


def _layer_scales(config) -> np.ndarray:
    if any(s.kind != LGS for s in config.guide_stars):
        raise ValueError("periodic operator requires laser guide stars only")
    return 1.0 - config.heights / config.h_lgs_m


@dataclass(frozen=True)
class PeriodicBlock:
    j: int
    k: int
    matrix: np.ndarray  # (G, L)
    sigma: np.ndarray
    u: np.ndarray  # columns
    v: np.ndarray  # columns

    @property
    def rank(self) -> int:
        return len(self.sigma)


def periodic_entries(config, torus, j, k) -> np.ndarray:
    c = _layer_scales(config)
    pts = config.alphas[:, None, :] * config.heights[None, :, None] / c[None, :, None]
    return 2 * torus.T / c[None, :] * eval_w_jk(torus.T, j, k, pts[..., 0], pts[..., 1])


def periodic_block(config, torus, j, k, rtol: float = 1e-12) -> PeriodicBlock:
    M = periodic_entries(config, torus, j, k)
    u, s, vh = np.linalg.svd(M, full_matrices=False)
    r = int((s > rtol * s[0]).sum())
    return PeriodicBlock(j, k, M, s[:r], u[:, :r], vh[:r].conj().T)


def periodic_pseudoinverse(block: PeriodicBlock, data) -> np.ndarray:
    return block.v @ ((block.u.conj().T @ np.asarray(data)) / block.sigma)


def _shift_phase(freq, shift, delta):
    ph = np.exp(1j * freq * shift)
    if len(freq) % 2 == 0:
        # split the Nyquist term symmetrically so real fields stay real
        ph[len(freq) // 2] = np.cos(np.pi / delta * shift)
    return ph


def periodic_forward(config, torus, layers, method: str = "fourier") -> np.ndarray:
    """``sum_l phi_l(c_l r + alpha_g h_l)`` on the torus grid, wrapping around each layer's torus.

    ``layers[l]`` holds samples on the cell centres of ``c_l [-T, T]^2``. On that
    grid the mapped points form the torus grid shifted by ``alpha_g h_l / c_l``,
    so ``method="fourier"`` applies the shift as a phase ramp (exact for
    resolved trigonometric polynomials); ``"bilinear"`` interpolates with
    periodic index reduction.
    """
    c = _layer_scales(config)
    layers = np.asarray(layers, dtype=np.complex128)
    n = torus.n
    out = np.zeros((config.G, n, n), np.complex128)
    freq = sfft.fftfreq(n, d=torus.delta) * 2 * np.pi  # angular frequency on the unit-scale grid
    for l in range(config.L):
        F = sfft.fft2(layers[l], workers=fft_workers()) if method == "fourier" else None
        for g in range(config.G):
            sx, sy = config.alphas[g] * config.heights[l]
            if method == "fourier":
                ph = _shift_phase(freq, sx / c[l], torus.delta)[:, None] * \
                    _shift_phase(freq, sy / c[l], torus.delta)[None, :]
                out[g] += sfft.ifft2(F * ph, workers=fft_workers())
            elif method == "bilinear":
                x = torus.centers(c[l])
                out[g] += kernels.bilinear_tensor(layers[l], x + sx, x + sy, -c[l] * torus.T,
                                                  c[l] * torus.delta, periodic=True)
            else:
                raise ValueError(f"unknown method {method!r}")
    return out


def periodic_layer_coefficients(config, torus, layers, band: FrequencyBand) -> np.ndarray:
    """``<phi_l, w_jk,l>`` over each layer's torus, ``(L, nb, nb)``."""
    c = _layer_scales(config)
    # the layer grid is the torus grid scaled by c_l; the substitution x -> c_l x leaves a factor c_l
    return np.stack([c[l] * analysis(layers[l], torus, band) for l in range(config.L)])


def picard_diagnostic(config, torus, data, band: FrequencyBand):
    """Shell-ordered partial sums of ``|u_n^H psi_jk|^2 / sigma_n^2``.

    ``data`` holds wavefront coefficients ``(G, nb, nb)``. Returns a dict with
    the shell radii ``max(|j|, |k|)``, cumulative sums after each shell, the
    per-shell contributions and the smallest singular value met.
    """
    idx = band.indices(torus.n)
    data = np.asarray(data)
    J = int(np.abs(idx).max())
    per_shell = np.zeros(J + 1)
    smin = np.inf
    for a, j in enumerate(idx):
        for b, k in enumerate(idx):
            blk = periodic_block(config, torus, j, k)
            proj = blk.u.conj().T @ data[:, a, b]
            per_shell[max(abs(j), abs(k))] += float((np.abs(proj) ** 2 / blk.sigma ** 2).sum())
            smin = min(smin, float(blk.sigma.min()))
    return {"shells": np.arange(J + 1), "partial_sums": np.cumsum(per_shell),
            "per_shell": per_shell, "sigma_min": smin}
