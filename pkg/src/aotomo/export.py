"""Grayscale PNG and CSV export of grid fields."""
from __future__ import annotations

import csv
import json
import os

import numpy as np
from PIL import Image

LOG_FLOOR = 1e-12


def to_image(samples, style: str = "linear") -> np.ndarray:
    """8-bit image of ``|Re(samples)|``; rows run from +y (top) to -y, columns along +x."""
    v = np.abs(np.real(samples))
    if style == "log":
        v = np.log10(v + LOG_FLOOR)
        lo, hi = v.min(), v.max()
    elif style == "linear":
        lo, hi = 0.0, v.max()
    else:
        raise ValueError(f"unknown style {style!r}")
    scaled = (v - lo) / (hi - lo) if hi > lo else np.zeros_like(v)
    img = np.round(255 * scaled).astype(np.uint8)
    return img.T[::-1]


def export_field(samples, half_width, out_dir, stem, style="linear", meta=None):
    """Write ``stem.png``, ``stem.csv`` and ``stem.json`` into ``out_dir``; return their paths."""
    os.makedirs(out_dir, exist_ok=True)
    samples = np.asarray(samples)
    n = samples.shape[0]
    x = -half_width + (np.arange(n) + 0.5) * (2.0 * half_width / n)
    png = os.path.join(out_dir, stem + ".png")
    Image.fromarray(to_image(samples, style), mode="L").save(png)
    path_csv = os.path.join(out_dir, stem + ".csv")
    with open(path_csv, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x", "y", "re", "im"])
        X, Y = np.meshgrid(x, x, indexing="ij")
        for row in zip(X.ravel(), Y.ravel(), samples.real.ravel(), samples.imag.ravel()):
            w.writerow([f"{v:.17g}" for v in row])
    info = {"style": style, "quantity": "abs(real part)", "half_width_m": half_width, "n": n,
            "orientation": "rows +y to -y, columns -x to +x"}
    if style == "log":
        info["log_floor"] = LOG_FLOOR
    info.update(meta or {})
    path_json = os.path.join(out_dir, stem + ".json")
    with open(path_json, "w") as fh:
        json.dump(info, fh, indent=2)
    return png, path_csv, path_json
