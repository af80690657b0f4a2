"""Hot loops with a compiled backend and a numpy fallback.

The Cython extension is used when it was built and importable; setting
``AOTOMO_PURE_PYTHON=1`` forces the numpy implementation.
"""
import os

import numpy as np

from . import _kernels_py

if os.environ.get("AOTOMO_PURE_PYTHON"):
    _impl = _kernels_py
    BACKEND = "python"
else:
    try:
        from . import _kernels as _impl
        BACKEND = "cython"
    except ImportError:  # extension not built
        _impl = _kernels_py
        BACKEND = "python"


def _index_weights(coords, origin, spacing):
    u = (np.asarray(coords, dtype=np.float64) - origin) / spacing - 0.5
    i0 = np.floor(u)
    return i0.astype(np.int64), u - i0


def bilinear_tensor(field, xs, ys, origin, spacing, periodic=False, impl=None):
    """Sample a cell-centred grid field bilinearly on the tensor grid ``xs x ys``.

    ``origin`` is the lower edge of the grid and ``spacing`` the cell size, so
    cell ``i`` is centred at ``origin + (i + 0.5) * spacing``. Neighbours that
    fall off the grid contribute zero unless ``periodic`` is set, in which case
    indices wrap around.
    """
    impl = impl or _impl
    ix0, wx = _index_weights(xs, origin, spacing)
    iy0, wy = _index_weights(ys, origin, spacing)
    field = np.ascontiguousarray(field, dtype=np.complex128)
    return np.asarray(impl.bilinear_tensor(field, ix0, wx, iy0, wy, bool(periodic)))


def neumann_update(base, prev, s_prev, c0, impl=None):
    """Return ``c0 * base + prev - c0 * s_prev`` (one step of the dual-frame recursion)."""
    impl = impl or _impl
    shape = np.shape(prev)
    base = np.ascontiguousarray(base, dtype=np.complex128).reshape(-1)
    prev = np.ascontiguousarray(prev, dtype=np.complex128).reshape(-1)
    s_prev = np.ascontiguousarray(s_prev, dtype=np.complex128).reshape(-1)
    out = np.empty_like(prev)
    impl.neumann_update(out, base, prev, s_prev, float(c0))
    return out.reshape(shape)
