"""The tomography operator in physical and coefficient form, its blocks A_jk and their closed-form SVD.

Layer and star indices are 0-based. Flattened block vectors use the layer-major
index ``l + g * L``.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels
from .fields import FrequencyBand, WavefrontSet, analysis, eval_w_jk, l2_norm
from .geometry import scaling_table
from .frame import LayerFrame


class GeometryError(ValueError):
    """Raised when a mapped sample point leaves the layer grid."""


def _aperture_mask(aperture, torus):
    x, y = torus.mesh()
    return aperture.indicator(x, y)


def forward(config, aperture, torus, layers, check: bool = True) -> WavefrontSet:
    """``(A phi)_g(r) = sum_l phi_l(c_lg r + alpha_g h_l)`` on the aperture by bilinear interpolation.

    ``layers`` is a :class:`LayerSet` or an ``(L, n, n)`` array on the torus grid.
    """
    fields = getattr(layers, "fields", layers)
    fields = np.asarray(fields, dtype=np.complex128)
    if fields.shape != (config.L, torus.n, torus.n):
        raise ValueError("layer array shape does not match configuration")
    mask = _aperture_mask(aperture, torus)
    x = torus.centers()
    rows = np.flatnonzero(mask.any(axis=1))
    cols = np.flatnonzero(mask.any(axis=0))
    c = scaling_table(config).c
    out = np.zeros((config.G, torus.n, torus.n), np.complex128)
    for g in range(config.G):
        acc = np.zeros((len(rows), len(cols)), np.complex128)
        for l in range(config.L):
            sx, sy = config.shift(l, g)
            xs = c[l, g] * x[rows] + sx
            ys = c[l, g] * x[cols] + sy
            if check and (np.abs(xs).max() > torus.T or np.abs(ys).max() > torus.T):
                raise GeometryError(f"layer {l} seen from star {g} maps outside the torus")
            acc += kernels.bilinear_tensor(fields[l], xs, ys, -torus.T, torus.delta)
        out[g][np.ix_(rows, cols)] = acc
    return WavefrontSet(out, torus.T, mask)


@dataclass(frozen=True)
class BlockMatrix:
    """Block-diagonal ``A_jk``; ``rows[g]`` holds the L entries of the g-th diagonal block."""

    j: int
    k: int
    rows: np.ndarray  # (G, L)

    def dense(self) -> np.ndarray:
        G, L = self.rows.shape
        out = np.zeros((G, L * G), np.complex128)
        for g in range(G):
            out[g, g * L:(g + 1) * L] = self.rows[g]
        return out

    def apply(self, x) -> np.ndarray:
        """Apply to coefficients shaped ``(L, G)`` or flattened layer-major."""
        G, L = self.rows.shape
        x = np.asarray(x).reshape(G, L) if np.ndim(x) == 1 else np.asarray(x).T
        return np.einsum("gl,gl->g", self.rows, x)


def block_entries(config, torus, j, k, sign: float = 1.0) -> np.ndarray:
    """``(2T) c_lg^-1 w_jk(sign * alpha_g h_l / c_lg)`` as a ``(G, L)`` array.

    ``j`` and ``k`` may be arrays (broadcast onto trailing axes).
    """
    c = scaling_table(config).c.T  # (G, L)
    shifts = config.alphas[:, None, :] * config.heights[None, :, None] / c[..., None]
    j = np.asarray(j)
    k = np.asarray(k)
    extra = (None,) * max(j.ndim, k.ndim)
    sx = shifts[..., 0][(...,) + extra]
    sy = shifts[..., 1][(...,) + extra]
    inv_c = (1.0 / c)[(...,) + extra]
    return 2 * torus.T * inv_c * eval_w_jk(torus.T, j, k, sign * sx, sign * sy)


def build_block_matrix(config, torus, j, k) -> BlockMatrix:
    return BlockMatrix(j, k, block_entries(config, torus, j, k))


def wavefront_coefficient(config, torus, phi_coeffs, j, k) -> np.ndarray:
    """``<(A phi)_g, w_jk>`` for every g from frame coefficients ``phi_coeffs[l, g]`` at ``(j, k)``."""
    rows = block_entries(config, torus, j, k)
    return np.einsum("gl,lg->g", rows, np.asarray(phi_coeffs))


def singular_values(config) -> np.ndarray:
    """``sigma_g = sqrt(sum_l c_lg^-2)``, the same for every (j, k)."""
    c = scaling_table(config).c
    return np.sqrt((c ** -2.0).sum(axis=0))


@dataclass(frozen=True)
class ExplicitSvd:
    j: int
    k: int
    sigma: np.ndarray  # (G,)
    v_blocks: np.ndarray  # (G, L): nonzero block of v_n

    @property
    def rank(self) -> int:
        return len(self.sigma)

    @property
    def u(self) -> np.ndarray:
        return np.eye(len(self.sigma))

    @property
    def v(self) -> np.ndarray:
        """Right singular vectors as columns of an ``(L G, G)`` array."""
        G, L = self.v_blocks.shape
        out = np.zeros((L * G, G), np.complex128)
        for g in range(G):
            out[g * L:(g + 1) * L, g] = self.v_blocks[g]
        return out

    def matrix(self) -> np.ndarray:
        return (self.u * self.sigma) @ self.v.conj().T


def explicit_svd(config, torus, j, k) -> ExplicitSvd:
    sigma = singular_values(config)
    v = block_entries(config, torus, j, k, sign=-1.0) / sigma[:, None]
    return ExplicitSvd(j, k, sigma, v)


def block_pseudoinverse(svd: ExplicitSvd, data) -> np.ndarray:
    """Minimum-norm solution of ``A_jk x = data`` flattened layer-major (length ``L G``)."""
    data = np.asarray(data)
    return ((data / svd.sigma)[:, None] * svd.v_blocks).reshape(-1)


def layer_coefficients(config, aperture, torus, layers, band: FrequencyBand) -> np.ndarray:
    """Frame coefficients ``<phi_l, w_jk,lg>`` as an ``(L, G, nb, nb)`` array."""
    fields = getattr(layers, "fields", layers)
    out = []
    for l in range(config.L):
        lf = LayerFrame(config, aperture, torus, l, band)
        out.append(np.stack(lf.analysis(fields[l])))
    return np.stack(out)


def apply_blocks(config, torus, coeffs, band: FrequencyBand) -> np.ndarray:
    """``A_jk phi_jk`` for every (j, k): ``(L, G, nb, nb)`` -> ``(G, nb, nb)``."""
    idx = band.indices(torus.n)
    rows = block_entries(config, torus, idx[:, None], idx[None, :])  # (G, L, nb, nb)
    return np.einsum("glab,lgab->gab", rows, coeffs)


def residual_identity(config, aperture, torus, layers, wavefronts, band=None):
    """Squared residual of ``A phi = psi`` computed physically and from coefficients.

    Returns ``(lhs, rhs)``: the midpoint-rule norm of ``A phi - psi`` on the
    aperture and the band sum of ``|A_jk phi_jk - psi_jk|^2``.
    """
    band = band or FrequencyBand()
    wf = getattr(wavefronts, "fields", wavefronts)
    mask = _aperture_mask(aperture, torus)
    res = forward(config, aperture, torus, layers).fields - np.where(mask, wf, 0)
    lhs = float(l2_norm(res, torus.delta, mask) ** 2)
    coeffs = layer_coefficients(config, aperture, torus, layers, band)
    psi = analysis(wf, torus, band, mask=mask)
    rhs = float((np.abs(apply_blocks(config, torus, coeffs, band) - psi) ** 2).sum())
    return lhs, rhs
