"""Frame operators, Neumann-series dual frames and the per-layer frame {w_jk,lg}."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Optional

import numpy as np

from . import kernels
from .fields import FrequencyBand, GridField, analysis, l2_inner, l2_norm, synthesis
from .geometry import layer_domain_masks, scaling_table


class FiniteFrame:
    """Frame of finitely many vectors (rows of ``vectors``) in C^d."""

    def __init__(self, vectors):
        self.vectors = np.atleast_2d(np.asarray(vectors, dtype=np.complex128))

    def analysis(self, f):
        return self.vectors.conj() @ f

    def synthesis(self, a):
        return self.vectors.T @ a

    @property
    def S(self):
        return self.vectors.T @ self.vectors.conj()

    def bounds(self):
        ev = np.linalg.eigvalsh(self.S)
        return float(ev[0]), float(ev[-1])

    def dual(self):
        """Canonical dual vectors ``S^-1 e_k`` as rows."""
        return np.linalg.solve(self.S, self.vectors.T).T

    def kernel_basis(self):
        """Orthonormal basis (columns) of the null space of the synthesis operator."""
        _, s, vh = np.linalg.svd(self.vectors.T)
        rank = int((s > 1e-12 * s[0]).sum())
        return vh[rank:].conj().T


class FrameBounds(NamedTuple):
    lower: float
    upper: float
    converged: bool


def dual_error_bound(A: float, B: float, N: int) -> float:
    """Relative error ``((B - A) / (B + A))^(N + 1)`` of the N-step dual approximation."""
    if not 0 < A <= B:
        raise ValueError("frame bounds must satisfy 0 < A <= B")
    return ((B - A) / (B + A)) ** (N + 1)


def neumann_inverse(apply_S: Callable, f, iterations: int, bounds, callback=None, tol: float = 1e-14):
    """Approximate ``S^-1 f`` by the damped Neumann series with factor ``2 / (A + B)``.

    ``callback(m, w_m)`` is invoked for every iterate including ``m = 0``. The
    loop stops early once an update is below ``tol`` relative to the iterate.
    """
    A, B = bounds
    c0 = 2.0 / (A + B)
    f = np.asarray(f, dtype=np.complex128)
    w = c0 * f
    if callback is not None:
        callback(0, w)
    for m in range(1, iterations + 1):
        new = kernels.neumann_update(f, w, apply_S(w), c0)
        step = np.linalg.norm(new - w)
        w = new
        if callback is not None:
            callback(m, w)
        if step <= tol * np.linalg.norm(w):
            break
    return w


class LayerFrame:
    """The functions ``c_lg^-1 w_jk(r / c_lg)`` restricted to each footprint of layer ``l``.

    ``band`` selects the frequencies entering the frame operator; the default
    uses every frequency the grid resolves. With that band and no cone scaling
    the frame operator is multiplication by the footprint count, which
    :meth:`apply_S` exploits unless ``fast=False``.
    """

    def __init__(self, config, aperture, torus, l, band: Optional[FrequencyBand] = None):
        self.config, self.aperture, self.torus, self.l = config, aperture, torus, l
        self.band = band or FrequencyBand()
        self.union, self.masks = layer_domain_masks(config, aperture, torus, l)
        self.scales = scaling_table(config).c[l].copy()
        self.bounds = (1.0, float(config.G))

    @property
    def G(self):
        return self.config.G

    @property
    def count(self) -> np.ndarray:
        """Number of footprints covering each cell."""
        return self.masks.sum(axis=0)

    @property
    def is_multiplier(self) -> bool:
        return self.band.is_full and bool(np.all(self.scales == 1.0))

    @property
    def is_degenerate(self) -> bool:
        return bool(np.all(self.masks == self.masks[0]) and np.all(self.scales == self.scales[0]))

    def analysis(self, f, band: Optional[FrequencyBand] = None):
        """Coefficients ``<f, w_jk,lg>`` as a list over ``g`` of ``(..., nb, nb)`` arrays."""
        band = band or self.band
        return [analysis(f, self.torus, band, self.scales[g], self.masks[g]) for g in range(self.G)]

    def synthesis(self, coeffs, band: Optional[FrequencyBand] = None):
        band = band or self.band
        return sum(synthesis(coeffs[g], self.torus, band, self.scales[g], self.masks[g])
                   for g in range(self.G))

    def apply_S(self, f, fast: bool = True):
        f = np.asarray(f, dtype=np.complex128)
        if fast and self.is_multiplier:
            return self.count * f
        return self.synthesis(self.analysis(f))

    def inverse(self, f, iterations, bounds=None, callback=None, tol=1e-14):
        return neumann_inverse(self.apply_S, f, iterations, bounds or self.bounds, callback, tol)

    def multiplier_iterate(self, iterations, bounds=None):
        """Closed form of the N-step Neumann iterate when S is a multiplication operator."""
        A, B = bounds or self.bounds
        c0 = 2.0 / (A + B)
        cnt = self.count.astype(float)
        with np.errstate(divide="ignore", invalid="ignore"):
            q = (1.0 - (1.0 - c0 * cnt) ** (iterations + 1)) / cnt
        return np.where(cnt > 0, q, 0.0)

    def frame_function(self, g, j, k) -> np.ndarray:
        c = self.scales[g]
        x = self.torus.centers() / c
        om = self.torus.omega
        vals = np.exp(1j * om * j * x)[:, None] * np.exp(1j * om * k * x)[None, :] / (2 * self.torus.T * c)
        return np.where(self.masks[g], vals, 0)


def frame_apply_S(layer_frame: LayerFrame, f: GridField) -> GridField:
    return GridField(layer_frame.apply_S(f.samples), f.half_width, layer_frame.union)


def frame_bounds_estimate(layer_frame: LayerFrame, iterations: int = 200, rng=None,
                          jb: int = 8, tol: float = 1e-10) -> FrameBounds:
    """Power-iteration estimates of the optimal frame bounds on fields supported in the layer domain.

    The upper bound comes from power iteration on S, the lower one from power
    iteration on ``B2_hat I - S``. Returns the Rayleigh quotients of the final
    iterates and whether both relative changes fell below ``tol``.
    """
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    from .fields import random_bandlimited
    rng = np.random.default_rng(rng)
    mask = layer_frame.union
    delta = layer_frame.torus.delta

    def power(op, x):
        lam, done = 0.0, False
        for _ in range(iterations):
            y = np.where(mask, op(x), 0)
            nrm = l2_norm(y, delta)
            if nrm == 0:
                return 0.0, True
            new = l2_inner(y, x, delta).real / l2_norm(x, delta) ** 2
            x = y / nrm
            if abs(new - lam) <= tol * max(abs(new), 1e-300):
                lam, done = new, True
                break
            lam = new
        return lam, done

    x0 = random_bandlimited(layer_frame.torus, jb, rng, mask=mask)
    upper, ok1 = power(layer_frame.apply_S, x0)
    x1 = random_bandlimited(layer_frame.torus, jb, rng, mask=mask)
    shift, ok2 = power(lambda v: upper * v - layer_frame.apply_S(v), x1)
    # the shifted operator is positive semidefinite; clip rounding noise
    return FrameBounds(upper - max(shift, 0.0), upper, ok1 and ok2)


@dataclass
class DualFrameCache:
    """Approximate dual functions for every ``(l, g, j, k)`` with ``|j|, |k| <= J``.

    ``data`` has shape ``(L, G, 2J+1, 2J+1, n, n)`` and may be a read-only memmap.
    """

    data: np.ndarray
    T: float
    n: int
    J: int
    N: int
    digest: bytes = b"\0" * 32
    meta: dict = field(default_factory=dict)

    @property
    def band(self) -> FrequencyBand:
        return FrequencyBand(self.J)

    @property
    def L(self):
        return self.data.shape[0]

    @property
    def G(self):
        return self.data.shape[1]

    def get(self, l, g, j, k, mask=None) -> GridField:
        a, b = self.band.position(self.n, j, k)
        return GridField(np.array(self.data[l, g, a, b]), self.T, mask)


def dual_frame_iterate(layer_frame: LayerFrame, band: FrequencyBand, N: int, bounds=None,
                       batch: int = 16, out=None, tol: float = 1e-14) -> np.ndarray:
    """N-step Neumann approximations of the duals of ``w_jk,lg`` for all ``g`` and ``(j, k)`` in ``band``.

    Returns an array ``(G, nb, nb, n, n)`` (written into ``out`` if given). When
    the frame operator is a multiplication operator the iterate is evaluated in
    closed form; otherwise frame functions are iterated in batches.
    """
    torus = layer_frame.torus
    n = torus.n
    idx = band.indices(n)
    nb = len(idx)
    G = layer_frame.G
    if out is None:
        out = np.zeros((G, nb, nb, n, n), np.complex128)
    bounds = bounds or layer_frame.bounds
    q = layer_frame.multiplier_iterate(N, bounds) if layer_frame.is_multiplier else None
    items = [(g, a, b) for g in range(G) for a in range(nb) for b in range(nb)]
    for start in range(0, len(items), batch):
        chunk = items[start:start + batch]
        w = np.stack([layer_frame.frame_function(g, idx[a], idx[b]) for g, a, b in chunk])
        if q is not None:
            res = q * w
        else:
            res = layer_frame.inverse(w, N, bounds, tol=tol)
        for (g, a, b), r in zip(chunk, res):
            out[g, a, b] = r
    return out


def dual_function(layer_frame: LayerFrame, g, j, k, N, bounds=None, callback=None) -> GridField:
    """Single approximate dual ``w~_jk,lg`` after N Neumann steps."""
    w = layer_frame.frame_function(g, j, k)
    bounds = bounds or layer_frame.bounds
    if layer_frame.is_multiplier and callback is None:
        res = layer_frame.multiplier_iterate(N, bounds) * w
    else:
        res = layer_frame.inverse(w, N, bounds, callback=callback)
    return GridField(res, layer_frame.torus.T, layer_frame.union)


def build_dual_cache(config, aperture, torus, band: FrequencyBand, N: int,
                     frame_band: Optional[FrequencyBand] = None, batch: int = 16,
                     digest: bytes = b"\0" * 32, out=None) -> DualFrameCache:
    L, G, n = config.L, config.G, torus.n
    nb = band.size(n)
    if out is None:
        out = np.zeros((L, G, nb, nb, n, n), np.complex128)
    for l in range(L):
        lf = LayerFrame(config, aperture, torus, l, frame_band)
        dual_frame_iterate(lf, band, N, batch=batch, out=out[l])
    return DualFrameCache(out, torus.T, n, band.J, N, digest,
                          {"frame_band": (frame_band or FrequencyBand()).describe()})


def dual_reconstruct(cache: DualFrameCache, coefficients, l, mask=None) -> GridField:
    """``sum_{g, j, k} coefficients[g, j, k] * w~_jk,lg`` from the cached duals."""
    coefficients = np.asarray(coefficients)
    if coefficients.shape != cache.data.shape[1:4]:
        raise ValueError("coefficient array does not match cache band")
    field_ = np.tensordot(coefficients, cache.data[l], axes=([0, 1, 2], [0, 1, 2]))
    return GridField(field_, cache.T, mask)


def dual_reconstruct_operator(layer_frame: LayerFrame, coefficients, N, band=None, bounds=None):
    """Same sum as :func:`dual_reconstruct` evaluated as ``p_N(S) F* a`` without a cache.

    By linearity of the Neumann recursion this equals the cache-based sum.
    """
    band = band or layer_frame.band
    syn = layer_frame.synthesis(coefficients, band)
    bounds = bounds or layer_frame.bounds
    if layer_frame.is_multiplier:
        return layer_frame.multiplier_iterate(N, bounds) * syn
    return layer_frame.inverse(syn, N, bounds)
