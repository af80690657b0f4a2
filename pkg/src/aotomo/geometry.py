"""Tomography geometry: guide stars, layers, apertures, cone scalings and the torus."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

NGS = "NGS"
LGS = "LGS"
DEFAULT_H_LGS = 90000.0

# grid spacings are rounded up to a multiple of this dyadic unit
SPACING_UNIT = 2.0 ** -12


@dataclass(frozen=True)
class GuideStar:
    alpha: tuple
    kind: str = NGS

    def __post_init__(self):
        alpha = tuple(float(a) for a in self.alpha)
        if len(alpha) != 2:
            raise ValueError("guide star direction must be a 2-vector")
        if self.kind not in (NGS, LGS):
            raise ValueError(f"unknown guide star kind {self.kind!r}")
        object.__setattr__(self, "alpha", alpha)


@dataclass(frozen=True)
class AtmosphereConfig:
    """Layer heights (m), ordered guide stars (NGS first) and the sodium layer height."""

    layer_heights_m: tuple
    guide_stars: tuple
    h_lgs_m: float = DEFAULT_H_LGS

    def __post_init__(self):
        heights = tuple(float(h) for h in self.layer_heights_m)
        stars = tuple(s if isinstance(s, GuideStar) else GuideStar(**s) for s in self.guide_stars)
        object.__setattr__(self, "layer_heights_m", heights)
        object.__setattr__(self, "guide_stars", stars)
        if not heights or not stars:
            raise ValueError("need at least one layer and one guide star")
        if heights[0] < 0:
            raise ValueError("layer heights must be non-negative")
        if any(b <= a for a, b in zip(heights, heights[1:])):
            raise ValueError("layer heights must be strictly ascending")
        if heights[-1] >= self.h_lgs_m:
            raise ValueError("highest layer must lie below the LGS height")
        kinds = [s.kind for s in stars]
        if LGS in kinds and NGS in kinds[kinds.index(LGS):]:
            raise ValueError("NGS entries must precede LGS entries")

    @property
    def L(self) -> int:
        return len(self.layer_heights_m)

    @property
    def G(self) -> int:
        return len(self.guide_stars)

    @property
    def n_ngs(self) -> int:
        return sum(s.kind == NGS for s in self.guide_stars)

    @property
    def heights(self) -> np.ndarray:
        return np.asarray(self.layer_heights_m)

    @property
    def alphas(self) -> np.ndarray:
        """(G, 2) array of star directions."""
        return np.array([s.alpha for s in self.guide_stars])

    def shift(self, l: int, g: int) -> np.ndarray:
        """Footprint offset alpha_g * h_l of star g on layer l."""
        return np.asarray(self.guide_stars[g].alpha) * self.layer_heights_m[l]


class Aperture:
    """Pupil domain given by a vectorised indicator and a bounding half-width.

    Use the constructors ``disk``, ``annulus``, ``square`` or ``from_mask``.
    """

    def __init__(self, shape: str, params: dict, half_width: float,
                 indicator: Callable, area: Optional[float] = None):
        if half_width <= 0:
            raise ValueError("aperture half-width must be positive")
        self.shape = shape
        self.params = dict(params)
        self.half_width = float(half_width)
        self._indicator = indicator
        self._area = area

    @classmethod
    def disk(cls, diameter_m: float) -> "Aperture":
        r = 0.5 * float(diameter_m)
        return cls("disk", {"diameter_m": float(diameter_m)}, r,
                   lambda x, y: x * x + y * y <= r * r, math.pi * r * r)

    @classmethod
    def annulus(cls, outer_m: float, inner_m: float) -> "Aperture":
        ro, ri = 0.5 * float(outer_m), 0.5 * float(inner_m)
        if not 0 <= ri < ro:
            raise ValueError("annulus needs 0 <= inner < outer")

        def ind(x, y):
            rr = x * x + y * y
            return (rr <= ro * ro) & (rr >= ri * ri)

        return cls("annulus", {"outer_m": float(outer_m), "inner_m": float(inner_m)}, ro,
                   ind, math.pi * (ro * ro - ri * ri))

    @classmethod
    def square(cls, side_m: float) -> "Aperture":
        s = 0.5 * float(side_m)
        return cls("square", {"side_m": float(side_m)}, s,
                   lambda x, y: (np.abs(x) <= s) & (np.abs(y) <= s), float(side_m) ** 2)

    @classmethod
    def from_mask(cls, mask, half_width: float) -> "Aperture":
        """Aperture from a cell-centred boolean mask on ``[-half_width, half_width]^2``.

        Points are looked up in the cell containing them; anything outside the
        square is excluded.
        """
        mask = np.asarray(mask, dtype=bool)
        if not mask.any():
            raise ValueError("mask has no active cells")
        n0, n1 = mask.shape
        hw = float(half_width)

        def ind(x, y):
            x, y = np.broadcast_arrays(np.asarray(x, float), np.asarray(y, float))
            ix = np.floor((x + hw) / (2 * hw) * n0).astype(np.int64)
            iy = np.floor((y + hw) / (2 * hw) * n1).astype(np.int64)
            ok = (ix >= 0) & (ix < n0) & (iy >= 0) & (iy < n1)
            out = np.zeros(x.shape, bool)
            out[ok] = mask[ix[ok], iy[ok]]
            return out

        area = mask.sum() * (2 * hw / n0) * (2 * hw / n1)
        return cls("mask", {"shape": list(mask.shape)}, hw, ind, area)

    def indicator(self, x, y) -> np.ndarray:
        return np.asarray(self._indicator(np.asarray(x, float), np.asarray(y, float)), dtype=bool)

    @property
    def area(self) -> float:
        return self._area

    def __repr__(self):
        return f"Aperture({self.shape}, {self.params})"


def scaling_factor(config: AtmosphereConfig, l: int, g: int) -> float:
    """Cone-effect scaling of layer ``l`` as seen from star ``g`` (0-based indices)."""
    if not 0 <= l < config.L or not 0 <= g < config.G:
        raise IndexError(f"layer/star index ({l}, {g}) out of range")
    if config.guide_stars[g].kind == NGS:
        return 1.0
    return 1.0 - config.layer_heights_m[l] / config.h_lgs_m


@dataclass(frozen=True)
class ScalingTable:
    c: np.ndarray  # (L, G)

    def __getitem__(self, idx):
        return self.c[idx]


def scaling_table(config: AtmosphereConfig) -> ScalingTable:
    c = np.ones((config.L, config.G))
    lgs = np.array([s.kind == LGS for s in config.guide_stars])
    c[:, lgs] = (1.0 - config.heights / config.h_lgs_m)[:, None]
    return ScalingTable(c)


@dataclass(frozen=True)
class TorusDomain:
    """Square ``[-T, T]^2`` sampled at ``n`` cell centres per axis."""

    T: float
    n: int

    def __post_init__(self):
        if self.T <= 0 or self.n < 2:
            raise ValueError("need T > 0 and n >= 2")
        object.__setattr__(self, "T", float(self.T))
        object.__setattr__(self, "n", int(self.n))

    @property
    def omega(self) -> float:
        return math.pi / self.T

    @property
    def delta(self) -> float:
        return 2.0 * self.T / self.n

    def centers(self, scale: float = 1.0) -> np.ndarray:
        """Cell-centre coordinates of the (optionally scaled) grid along one axis."""
        return scale * (-self.T + (np.arange(self.n) + 0.5) * self.delta)

    def mesh(self, scale: float = 1.0):
        x = self.centers(scale)
        return np.meshgrid(x, x, indexing="ij")


def _footprint_extent(config, aperture, c, l):
    a = aperture.half_width
    return max(c[l, g] * a + np.max(np.abs(config.alphas[g])) * config.layer_heights_m[l]
               for g in range(config.G))


def choose_torus_halfwidth(config: AtmosphereConfig, aperture: Aperture, n: int = 512) -> float:
    """Smallest T (after rounding) with the aperture and every scaled layer domain inside the torus.

    Layer ``l`` covers a box of half-width ``max_g (c_lg a + |alpha_g|_inf h_l)``
    which must fit inside ``c_lg [-T, T]^2`` for every ``g``. The spacing ``2T/n``
    is rounded up to a multiple of 2**-12 so grid nodes are exact binary numbers.
    """
    c = scaling_table(config).c
    t_min = aperture.half_width
    for l in range(config.L):
        t_min = max(t_min, _footprint_extent(config, aperture, c, l) / c[l].min())
    delta = math.ceil(2.0 * t_min / n / SPACING_UNIT) * SPACING_UNIT
    return n * delta / 2.0


def star_mask(config, aperture, torus, l, g) -> np.ndarray:
    """Cells of layer ``l``'s grid inside the footprint ``c_lg * aperture + alpha_g h_l``."""
    c = scaling_factor(config, l, g)
    sx, sy = config.shift(l, g)
    x = torus.centers()
    return aperture.indicator(((x - sx) / c)[:, None], ((x - sy) / c)[None, :])


def layer_domain_masks(config, aperture, torus, l):
    """Return ``(union, per_star)`` masks of layer ``l`` on the torus grid."""
    per_star = np.stack([star_mask(config, aperture, torus, l, g) for g in range(config.G)])
    return per_star.any(axis=0), per_star


def check_torus(config, aperture, torus) -> bool:
    """Grid-sampled check that the aperture and each layer domain lie inside the scaled tori."""
    x, y = torus.mesh()
    box = lambda s: (np.abs(x) <= s * torus.T) & (np.abs(y) <= s * torus.T)
    if np.any(aperture.indicator(x, y) & ~box(1.0)):
        return False
    # the aperture must not be clipped by the grid either
    fine = np.linspace(-aperture.half_width, aperture.half_width, 257)
    if aperture.half_width > torus.T + 1e-12:
        return False
    c = scaling_table(config).c
    for l in range(config.L):
        union, _ = layer_domain_masks(config, aperture, torus, l)
        for g in range(config.G):
            if np.any(union & ~box(c[l, g])):
                return False
        # continuous footprint boundary, not just cell centres
        for g in range(config.G):
            sx, sy = config.shift(l, g)
            fx, fy = np.meshgrid(fine, fine, indexing="ij")
            inside = aperture.indicator(fx, fy)
            px = c[l, g] * fx[inside] + sx
            py = c[l, g] * fy[inside] + sy
            lim = c[l].min() * torus.T + 1e-9
            if np.any(np.abs(px) > lim) or np.any(np.abs(py) > lim):
                return False
    return True
