"""Pure numpy versions of the compiled kernels in ``_kernels.pyx``."""
import numpy as np


def bilinear_tensor(field, ix0, wx, iy0, wy, periodic):
    n0, n1 = field.shape
    ix1 = ix0 + 1
    iy1 = iy0 + 1
    if periodic:
        ix0, ix1 = ix0 % n0, ix1 % n0
        iy0, iy1 = iy0 % n1, iy1 % n1
        vx0 = vx1 = np.ones(ix0.shape, bool)
        vy0 = vy1 = np.ones(iy0.shape, bool)
    else:
        vx0, vx1 = (ix0 >= 0) & (ix0 < n0), (ix1 >= 0) & (ix1 < n0)
        vy0, vy1 = (iy0 >= 0) & (iy0 < n1), (iy1 >= 0) & (iy1 < n1)
    cx0, cx1 = np.clip(ix0, 0, n0 - 1), np.clip(ix1, 0, n0 - 1)
    cy0, cy1 = np.clip(iy0, 0, n1 - 1), np.clip(iy1, 0, n1 - 1)
    # zero weight on neighbours that fall off a non-periodic grid
    ax0 = np.where(vx0, 1.0 - wx, 0.0)[:, None]
    ax1 = np.where(vx1, wx, 0.0)[:, None]
    ay0 = np.where(vy0, 1.0 - wy, 0.0)[None, :]
    ay1 = np.where(vy1, wy, 0.0)[None, :]
    return (ax0 * (ay0 * field[np.ix_(cx0, cy0)] + ay1 * field[np.ix_(cx0, cy1)])
            + ax1 * (ay0 * field[np.ix_(cx1, cy0)] + ay1 * field[np.ix_(cx1, cy1)]))


def neumann_update(out, base, prev, s_prev, c0):
    np.subtract(prev, c0 * s_prev, out=out)
    out += c0 * base
