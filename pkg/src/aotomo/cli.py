"""Command line interface: ``aotomo <verb> [options]``.

Layer and star indices on the command line are 1-based.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from . import config as cfgmod
from . import io

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def _load(args):
    if not args.config:
        raise UsageError("--config is required")
    try:
        doc = cfgmod.load(args.config)
    except OSError as exc:
        raise IOError(str(exc)) from exc
    except Exception as exc:  # schema or geometry
        raise UsageError(f"invalid config: {exc}") from exc
    if getattr(args, "grid_n", None):
        doc["grid_n"] = args.grid_n
    if getattr(args, "band_j", None) is not None:
        doc["band_j"] = args.band_j
    if getattr(args, "iters", None) is not None:
        doc["dual_iters"] = args.iters
    if getattr(args, "seed", None) is not None:
        doc["seed"] = args.seed
    return doc


def _objects(doc):
    return cfgmod.atmosphere(doc), cfgmod.aperture(doc), cfgmod.torus(doc)


def _out_dir(args, doc):
    d = args.out or doc["output_dir"]
    os.makedirs(d, exist_ok=True)
    return d


def _write_json(path, obj):
    tmp = path + ".tmp"
    with open(tmp, "w") as fh:
        json.dump(obj, fh, indent=2)
    os.replace(tmp, path)


def cmd_gen_config(args):
    try:
        doc = cfgmod.preset(args.preset)
    except KeyError as exc:
        raise UsageError(str(exc)) from exc
    if args.grid_n:
        doc["grid_n"] = args.grid_n
    if args.band_j is not None:
        doc["band_j"] = args.band_j
    if args.iters is not None:
        doc["dual_iters"] = args.iters
    path = args.config or os.path.join(args.out or ".", f"{args.preset}.json")
    os.makedirs(os.path.dirname(os.path.abspath(path)), exist_ok=True)
    _write_json(path, doc)
    print(path)
    return EXIT_OK


def cmd_precompute(args):
    from .fields import FrequencyBand
    from .frame import LayerFrame, dual_frame_iterate
    doc = _load(args)
    atm, ap, torus = _objects(doc)
    dig = cfgmod.digest(doc)
    path = args.cache or os.path.join(_out_dir(args, doc), "duals.aofd")
    J, N = doc["band_j"], doc["dual_iters"]
    if os.path.exists(path):
        hdr = io.read_header(path)
        if hdr.digest == dig:
            print(f"{path}: up to date")
            return EXIT_OK
        if not args.force:
            print(f"{path}: digest mismatch with config (use --force to overwrite)", file=sys.stderr)
            return EXIT_IO
    size = io.cache_bytes(atm.L, atm.G, J, torus.n)
    if size > args.max_gib * 2 ** 30:
        raise UsageError(f"cache would need {size / 2 ** 30:.1f} GiB (> --max-gib {args.max_gib}); "
                         "lower --grid-n/--band-j or reconstruct without a cache")
    hdr = io.Header(io.CACHE_MAGIC, dig, torus.T, torus.n, J, atm.L, atm.G, N)
    band = FrequencyBand(J)
    with io.AtomicWriter(path, hdr) as w:
        for l in range(atm.L):
            lf = LayerFrame(atm, ap, torus, l, cfgmod.frame_band(doc))
            w.array[l] = dual_frame_iterate(lf, band, N)
    print(path)
    return EXIT_OK


def _open_cache(path, doc, torus):
    from .frame import DualFrameCache
    hdr, data = io.open_fields(path, io.CACHE_MAGIC)
    if hdr.digest != cfgmod.digest(doc):
        raise io.FormatError(f"{path}: cache digest does not match config")
    return DualFrameCache(data, hdr.T, hdr.n, hdr.J, hdr.N, hdr.digest)


def cmd_forward(args):
    from .fields import LayerSet, random_bandlimited
    from .operator import forward
    doc = _load(args)
    atm, ap, torus = _objects(doc)
    if args.synthetic:
        rng = np.random.default_rng(doc["seed"])
        jb = max(1, min(8, doc["band_j"] // 4))
        fields = random_bandlimited(torus, jb, rng, count=atm.L, real=True)
    elif args.layers:
        hdr, fields = io.open_fields(args.layers, io.LAYER_MAGIC)
        if hdr.n != torus.n or hdr.L != atm.L:
            raise io.FormatError(f"{args.layers}: grid or layer count does not match config")
    else:
        raise UsageError("forward needs --synthetic or --layers PATH")
    layers = LayerSet.for_config(np.asarray(fields), atm, ap, torus)
    wf = forward(atm, ap, torus, layers)
    out = _out_dir(args, doc)
    dig = cfgmod.digest(doc)
    if args.synthetic:
        io.write_fields(os.path.join(out, "truth.aofl"), io.LAYER_MAGIC, layers.fields, dig, torus.T)
    path = os.path.join(out, "wavefronts.aofw")
    io.write_fields(path, io.WAVEFRONT_MAGIC, wf.fields, dig, torus.T)
    print(path)
    return EXIT_OK


def cmd_reconstruct(args):
    from .fields import FrequencyBand
    from .recon import reconstruct
    doc = _load(args)
    atm, ap, torus = _objects(doc)
    out = _out_dir(args, doc)
    wpath = args.wavefronts or os.path.join(out, "wavefronts.aofw")
    hdr, wf = io.open_fields(wpath, io.WAVEFRONT_MAGIC)
    if hdr.n != torus.n or hdr.G != atm.G:
        raise io.FormatError(f"{wpath}: grid or star count does not match config")
    cache = _open_cache(args.cache, doc, torus) if args.cache else None
    rep = reconstruct(atm, ap, torus, np.asarray(wf), FrequencyBand(doc["band_j"]), cache=cache,
                      iterations=doc["dual_iters"], frame_band=cfgmod.frame_band(doc))
    dig = cfgmod.digest(doc)
    io.write_fields(os.path.join(out, "reconstruction.aofl"), io.LAYER_MAGIC, rep.layers.fields, dig,
                    torus.T, J=doc["band_j"], N=rep.meta["iterations"])
    path = os.path.join(out, "report.json")
    _write_json(path, rep.to_dict())
    print(path)
    return EXIT_OK


def cmd_validate(args):
    from .validation import run_checks
    doc = _load(args)
    atm, ap, torus = _objects(doc)
    cache = _open_cache(args.cache, doc, torus) if args.cache else None
    results = run_checks(doc, cache=cache, seed=doc["seed"])
    ok = all(r["passed"] for r in results)
    report = {"passed": ok, "checks": results}
    if args.out:
        os.makedirs(args.out, exist_ok=True)
        _write_json(os.path.join(args.out, "validation.json"), report)
    for r in results:
        print(f"{'PASS' if r['passed'] else 'FAIL'}  {r['name']}: {r['detail']}")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_export(args):
    from .export import export_field
    from .frame import LayerFrame, dual_function
    doc = _load(args)
    atm, ap, torus = _objects(doc)
    idx = args.index or []
    meta = {"what": args.what, "index": idx}
    if args.what in ("frame", "dual"):
        if len(idx) != 4:
            raise UsageError("frame/dual export needs --index L G J K")
        l, g, j, k = idx[0] - 1, idx[1] - 1, idx[2], idx[3]
        if not (0 <= l < atm.L and 0 <= g < atm.G):
            raise UsageError("layer/star index out of range")
        lf = LayerFrame(atm, ap, torus, l, cfgmod.frame_band(doc))
        if args.what == "frame":
            samples = lf.frame_function(g, j, k)
        elif args.cache:
            samples = _open_cache(args.cache, doc, torus).get(l, g, j, k).samples
        else:
            samples = dual_function(lf, g, j, k, doc["dual_iters"]).samples
        stem = f"{args.what}_j{j}_k{k}_l{idx[0]}_g{idx[1]}"
    else:
        if len(idx) != 1 or not args.field:
            raise UsageError("layer/wavefront export needs --field PATH and --index I")
        magic = io.LAYER_MAGIC if args.what == "layer" else io.WAVEFRONT_MAGIC
        hdr, data = io.open_fields(args.field, magic)
        if not 1 <= idx[0] <= data.shape[0]:
            raise UsageError("field index out of range")
        samples = np.asarray(data[idx[0] - 1])
        stem = f"{args.what}_{idx[0]}"
    out = _out_dir(args, doc)
    for style in (["linear", "log"] if args.style == "both" else [args.style]):
        paths = export_field(samples, torus.T, out, f"{stem}_{style}", style, meta)
        print(paths[0])
    return EXIT_OK


def build_parser():
    p = argparse.ArgumentParser(prog="aotomo", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="verb", required=True)

    def common(sp):
        sp.add_argument("--config", help="run configuration JSON")
        sp.add_argument("--out", help="output directory (default: config output_dir)")
        sp.add_argument("--grid-n", type=int, dest="grid_n")
        sp.add_argument("--band-j", type=int, dest="band_j")
        sp.add_argument("--iters", type=int)
        sp.add_argument("--seed", type=int)
        return sp

    g = common(sub.add_parser("gen-config", help="write a preset configuration"))
    g.add_argument("preset", choices=cfgmod.PRESETS)
    g.set_defaults(func=cmd_gen_config)

    pc = common(sub.add_parser("precompute", help="compute and store dual frames"))
    pc.add_argument("--cache")
    pc.add_argument("--force", action="store_true")
    pc.add_argument("--max-gib", type=float, default=4.0, dest="max_gib")
    pc.set_defaults(func=cmd_precompute)

    fw = common(sub.add_parser("forward", help="simulate wavefronts from layers"))
    fw.add_argument("--synthetic", action="store_true")
    fw.add_argument("--layers")
    fw.set_defaults(func=cmd_forward)

    rc = common(sub.add_parser("reconstruct", help="reconstruct layers from wavefronts"))
    rc.add_argument("--cache")
    rc.add_argument("--wavefronts")
    rc.set_defaults(func=cmd_reconstruct)

    va = common(sub.add_parser("validate", help="run the property checks"))
    va.add_argument("--cache")
    va.set_defaults(func=cmd_validate)

    ex = common(sub.add_parser("export", help="write PNG/CSV images of a field"))
    ex.add_argument("--what", choices=["frame", "dual", "layer", "wavefront"], required=True)
    ex.add_argument("--style", choices=["linear", "log", "both"], default="linear")
    ex.add_argument("--index", type=int, nargs="+")
    ex.add_argument("--field")
    ex.add_argument("--cache")
    ex.set_defaults(func=cmd_export)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, io.FormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
