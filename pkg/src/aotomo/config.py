"""Run configuration: JSON schema, presets, canonical digest and conversion to library objects."""
from __future__ import annotations

import copy
import hashlib
import json

import jsonschema

from .fields import FrequencyBand
from .geometry import Aperture, AtmosphereConfig, DEFAULT_H_LGS, GuideStar, TorusDomain, choose_torus_halfwidth

SCHEMA = {
    "type": "object",
    "required": ["aperture", "layer_heights_m", "guide_stars"],
    "additionalProperties": False,
    "properties": {
        "aperture": {
            "type": "object",
            "required": ["shape"],
            "oneOf": [
                {"properties": {"shape": {"const": "disk"}, "diameter_m": {"type": "number", "exclusiveMinimum": 0}},
                 "required": ["diameter_m"], "additionalProperties": False},
                {"properties": {"shape": {"const": "annulus"}, "outer_m": {"type": "number", "exclusiveMinimum": 0},
                                "inner_m": {"type": "number", "minimum": 0}},
                 "required": ["outer_m", "inner_m"], "additionalProperties": False},
                {"properties": {"shape": {"const": "square"}, "side_m": {"type": "number", "exclusiveMinimum": 0}},
                 "required": ["side_m"], "additionalProperties": False},
            ],
        },
        "layer_heights_m": {"type": "array", "items": {"type": "number", "minimum": 0}, "minItems": 1},
        "guide_stars": {
            "type": "array", "minItems": 1,
            "items": {"type": "object", "required": ["alpha", "kind"], "additionalProperties": False,
                      "properties": {"alpha": {"type": "array", "items": {"type": "number"},
                                               "minItems": 2, "maxItems": 2},
                                     "kind": {"enum": ["NGS", "LGS"]}}},
        },
        "h_lgs_m": {"type": "number", "exclusiveMinimum": 0},
        "band_j": {"type": "integer", "minimum": 0},
        "grid_n": {"type": "integer", "minimum": 2},
        "torus_t_m": {"type": ["number", "null"], "exclusiveMinimum": 0},
        "dual_iters": {"type": "integer", "minimum": 0},
        "seed": {"type": "integer", "minimum": 0},
        "output_dir": {"type": "string"},
        "frame_band": {"oneOf": [{"const": "full"}, {"type": "integer", "minimum": 0}]},
    },
}

DEFAULTS = {"h_lgs_m": DEFAULT_H_LGS, "band_j": 63, "grid_n": 512, "torus_t_m": None,
            "dual_iters": 500, "seed": 0, "output_dir": "out", "frame_band": "full"}

# fields that do not change any computed cache
_NOT_DIGESTED = ("seed", "output_dir")

ESO_HEIGHTS = [0, 140, 281, 562, 1125, 2250, 4500, 9000, 18000]
RHO = 0.000290888


def _asterism(rho=RHO):
    a, b = 0.5 * rho, 0.866025 * rho
    return [(rho, 0.0), (a, b), (-a, b), (-rho, 0.0), (-a, -b), (a, -b)]


def preset(name: str) -> dict:
    if name == "maory-ngs6":
        stars = [{"alpha": list(p), "kind": "NGS"} for p in _asterism()]
        heights = ESO_HEIGHTS
    elif name == "single-ngs":
        stars = [{"alpha": [0.0, 0.0], "kind": "NGS"}]
        heights = [0]
    elif name == "mixed-ngs-lgs":
        stars = [{"alpha": list(p), "kind": "NGS" if i < 3 else "LGS"} for i, p in enumerate(_asterism())]
        heights = ESO_HEIGHTS
    else:
        raise KeyError(f"unknown preset {name!r}")
    cfg = {"aperture": {"shape": "disk", "diameter_m": 42.0},
           "layer_heights_m": [float(h) for h in heights], "guide_stars": stars}
    cfg.update(copy.deepcopy(DEFAULTS))
    return cfg


PRESETS = ("maory-ngs6", "single-ngs", "mixed-ngs-lgs")


def validate(doc: dict) -> dict:
    """Schema-check ``doc`` and return it with defaults filled in."""
    jsonschema.validate(doc, SCHEMA)
    out = copy.deepcopy(DEFAULTS)
    out.update(copy.deepcopy(doc))
    atmosphere(out)  # geometric invariants
    return out


def _canon(obj):
    if isinstance(obj, bool) or obj is None or isinstance(obj, str):
        return obj
    if isinstance(obj, (int, float)):
        return format(float(obj), ".17g")
    if isinstance(obj, dict):
        return {k: _canon(v) for k, v in obj.items()}
    return [_canon(v) for v in obj]


def digest(doc: dict) -> bytes:
    """SHA-256 of the sorted-key, fixed-float-format document without run-only fields."""
    body = {k: v for k, v in doc.items() if k not in _NOT_DIGESTED}
    text = json.dumps(_canon(body), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).digest()


def atmosphere(doc: dict) -> AtmosphereConfig:
    return AtmosphereConfig(doc["layer_heights_m"],
                            [GuideStar(tuple(s["alpha"]), s["kind"]) for s in doc["guide_stars"]],
                            doc.get("h_lgs_m", DEFAULT_H_LGS))


def aperture(doc: dict) -> Aperture:
    ap = doc["aperture"]
    if ap["shape"] == "disk":
        return Aperture.disk(ap["diameter_m"])
    if ap["shape"] == "annulus":
        return Aperture.annulus(ap["outer_m"], ap["inner_m"])
    return Aperture.square(ap["side_m"])


def torus(doc: dict) -> TorusDomain:
    n = doc["grid_n"]
    T = doc.get("torus_t_m")
    if T is None:
        T = choose_torus_halfwidth(atmosphere(doc), aperture(doc), n)
    return TorusDomain(T, n)


def band(doc: dict) -> FrequencyBand:
    return FrequencyBand(doc["band_j"])


def frame_band(doc: dict) -> FrequencyBand:
    fb = doc.get("frame_band", "full")
    return FrequencyBand() if fb == "full" else FrequencyBand(int(fb))


def load(path) -> dict:
    with open(path) as fh:
        return validate(json.load(fh))
