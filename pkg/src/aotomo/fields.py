"""Grid fields, midpoint-rule inner products and analysis/synthesis against the exponentials w_jk.

Grids are cell centred: on ``[-s, s]^2`` with ``n`` cells per axis the centres
are ``-s + (i + 1/2) * 2s/n``. Arrays are indexed ``[ix, iy]``.

Coefficient arrays are indexed ``[..., j, k]`` in the ascending order returned
by :meth:`FrequencyBand.indices`. Unscaled transforms go through one FFT; scaled
ones (cone-effect factor ``c != 1``) use a separable dense transform.
"""
from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Optional

import numpy as np
import scipy.fft as sfft

from .geometry import star_mask, scaling_factor, layer_domain_masks


def fft_workers() -> int:
    try:
        return max(1, int(os.environ.get("AOTOMO_THREADS", "1")))
    except ValueError:
        return 1


@dataclass(frozen=True)
class FrequencyBand:
    """Index set ``|j|, |k| <= J``; ``J=None`` means every frequency the grid resolves."""

    J: Optional[int] = None

    def __post_init__(self):
        if self.J is not None and self.J < 0:
            raise ValueError("J must be non-negative")

    @property
    def is_full(self) -> bool:
        return self.J is None

    def indices(self, n: int, scale: float = 1.0) -> np.ndarray:
        if self.J is None:
            if scale == 1.0:
                return np.arange(-(n // 2), n - n // 2)
            m = int(np.floor((scale * n - 1) / 2))
            return np.arange(-m, m + 1)
        if self.J / scale >= n / 2:
            raise ValueError(f"band J={self.J} exceeds the Nyquist limit of an n={n} grid")
        return np.arange(-self.J, self.J + 1)

    def size(self, n: int, scale: float = 1.0) -> int:
        return len(self.indices(n, scale))

    def position(self, n: int, j: int, k: int, scale: float = 1.0):
        idx = self.indices(n, scale)
        lo = idx[0]
        if not (lo <= j <= idx[-1] and lo <= k <= idx[-1]):
            raise IndexError(f"(j, k) = ({j}, {k}) outside band")
        return j - lo, k - lo

    def describe(self):
        return "full" if self.J is None else int(self.J)


@dataclass
class GridField:
    """Complex samples on the cell-centred grid of ``[-s, s]^2`` with an optional domain mask."""

    samples: np.ndarray
    half_width: float
    mask: Optional[np.ndarray] = None

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.complex128)
        if self.samples.ndim != 2 or self.samples.shape[0] != self.samples.shape[1]:
            raise ValueError("samples must be a square 2-D array")
        if self.samples.shape[0] < 2:
            raise ValueError("need n >= 2")
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != self.samples.shape:
                raise ValueError("mask shape mismatch")

    @classmethod
    def masked(cls, samples, half_width, mask):
        mask = np.asarray(mask, dtype=bool)
        return cls(np.where(mask, samples, 0), half_width, mask)

    @property
    def n(self) -> int:
        return self.samples.shape[0]

    @property
    def delta(self) -> float:
        return 2.0 * self.half_width / self.n

    def norm(self) -> float:
        return float(np.sqrt(inner_product(self, self).real))


def l2_inner(a, b, delta, mask=None) -> complex:
    """Midpoint rule for the L2 inner product on a grid of cell size ``delta``."""
    prod = a * np.conj(b)
    if mask is not None:
        prod = np.where(mask, prod, 0)
    return complex(delta * delta * prod.sum())


def l2_norm(a, delta, mask=None, axis=None) -> float:
    sq = np.abs(a) ** 2
    if mask is not None:
        sq = np.where(mask, sq, 0)
    return np.sqrt(delta * delta * sq.sum(axis=axis))


def inner_product(f: GridField, g: GridField, mask=None) -> complex:
    if f.samples.shape != g.samples.shape or not np.isclose(f.half_width, g.half_width, rtol=0, atol=1e-14):
        raise ValueError("fields live on different grids")
    return l2_inner(f.samples, g.samples, f.delta, mask)


def eval_w_jk(T: float, j, k, x, y):
    """``w_jk(x, y) = exp(i j w x) exp(i k w y) / (2T)`` with ``w = pi / T``."""
    om = np.pi / T
    return np.exp(1j * om * (np.asarray(j) * np.asarray(x) + np.asarray(k) * np.asarray(y))) / (2.0 * T)


def _theta(idx, n):
    # phase of exp(-i j w x_0) relative to the FFT's exp(-2 pi i j a / n) at cell a
    return np.where(idx % 2 == 0, 1.0, -1.0) * np.exp(-1j * np.pi * idx / n)


def _dense_matrix(torus, idx, scale):
    x = torus.centers()
    return np.exp(-1j * torus.omega * np.outer(idx, x) / scale)


def analysis(f, torus, band: FrequencyBand, scale: float = 1.0, mask=None) -> np.ndarray:
    """Inner products of ``f`` (shape ``(..., n, n)``) with ``c^-1 w_jk(r / c)`` over ``mask``."""
    f = np.asarray(f, dtype=np.complex128)
    if mask is not None:
        f = np.where(mask, f, 0)
    n = torus.n
    idx = band.indices(n, scale)
    if scale == 1.0:
        F = sfft.fft2(f, axes=(-2, -1), workers=fft_workers())
        th = _theta(idx, n)
        sel = F[..., (idx % n)[:, None], (idx % n)[None, :]]
        return (torus.delta ** 2 / (2 * torus.T)) * th[:, None] * th[None, :] * sel
    E = _dense_matrix(torus, idx, scale)
    return (torus.delta ** 2 / (2 * torus.T * scale)) * (E @ f @ E.T)


def synthesis(coeffs, torus, band: FrequencyBand, scale: float = 1.0, mask=None) -> np.ndarray:
    """``sum_jk coeffs_jk c^-1 w_jk(r / c)`` on the torus grid, restricted to ``mask``."""
    coeffs = np.asarray(coeffs, dtype=np.complex128)
    n = torus.n
    idx = band.indices(n, scale)
    if coeffs.shape[-2:] != (len(idx), len(idx)):
        raise ValueError("coefficient array does not match band")
    if scale == 1.0:
        th = np.conj(_theta(idx, n))
        weighted = coeffs * th[:, None] * th[None, :]
        if len(idx) == n:
            full = sfft.ifftshift(weighted, axes=(-2, -1))
        else:
            full = np.zeros(coeffs.shape[:-2] + (n, n), np.complex128)
            full[..., (idx % n)[:, None], (idx % n)[None, :]] = weighted
        out = (n * n / (2 * torus.T)) * sfft.ifft2(full, axes=(-2, -1), workers=fft_workers())
    else:
        E = _dense_matrix(torus, idx, scale)
        out = (1.0 / (2 * torus.T * scale)) * (E.conj().T @ coeffs @ E.conj())
    if mask is not None:
        out = np.where(mask, out, 0)
    return out


def analysis_aperture(psi: GridField, band: FrequencyBand) -> np.ndarray:
    """Coefficients ``<psi, w_jk>`` over the aperture (``psi.mask``) for every ``(j, k)`` in band."""
    from .geometry import TorusDomain
    torus = TorusDomain(psi.half_width, psi.n)
    return analysis(psi.samples, torus, band, mask=psi.mask)


def synthesis_aperture(coeffs, band: FrequencyBand, torus, mask=None) -> GridField:
    return GridField(synthesis(coeffs, torus, band, mask=mask), torus.T, mask)


def eval_w_jk_lg(config, aperture, torus, j, k, l, g) -> GridField:
    """Frame function ``c^-1 w_jk(r / c)`` times the footprint indicator of star ``g`` on layer ``l``."""
    c = scaling_factor(config, l, g)
    mask = star_mask(config, aperture, torus, l, g)
    x = torus.centers()
    vals = eval_w_jk(torus.T, j, k, x[:, None] / c, x[None, :] / c) / c
    return GridField.masked(vals, torus.T, mask)


def random_bandlimited(torus, jb: int, rng, count=None, scale: float = 1.0, mask=None, real=False):
    """Random trigonometric polynomial with ``|j|, |k| <= jb`` sampled on the torus grid."""
    band = FrequencyBand(jb)
    nb = 2 * jb + 1
    shape = (nb, nb) if count is None else (count, nb, nb)
    coeffs = rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    out = synthesis(coeffs, torus, band, scale=scale)
    if real:
        out = out.real.astype(np.complex128)
    if mask is not None:
        out = np.where(mask, out, 0)
    return out


@dataclass
class WavefrontSet:
    """G wavefronts on the torus grid, each restricted to the aperture mask."""

    fields: np.ndarray  # (G, n, n)
    half_width: float
    mask: np.ndarray  # (n, n)

    def __post_init__(self):
        self.fields = np.where(self.mask, np.asarray(self.fields, np.complex128), 0)

    @property
    def delta(self):
        return 2.0 * self.half_width / self.fields.shape[-1]

    def field(self, g) -> GridField:
        return GridField(self.fields[g], self.half_width, self.mask)

    def norm(self) -> float:
        return float(l2_norm(self.fields, self.delta))


@dataclass
class LayerSet:
    """L layer fields on the torus grid, each restricted to its layer domain."""

    fields: np.ndarray  # (L, n, n)
    half_width: float
    masks: np.ndarray  # (L, n, n)

    def __post_init__(self):
        self.fields = np.where(self.masks, np.asarray(self.fields, np.complex128), 0)

    @classmethod
    def for_config(cls, fields, config, aperture, torus):
        masks = np.stack([layer_domain_masks(config, aperture, torus, l)[0] for l in range(config.L)])
        return cls(fields, torus.T, masks)

    @property
    def delta(self):
        return 2.0 * self.half_width / self.fields.shape[-1]

    def field(self, l) -> GridField:
        return GridField(self.fields[l], self.half_width, self.masks[l])

    def norm(self) -> float:
        return float(l2_norm(self.fields, self.delta))
