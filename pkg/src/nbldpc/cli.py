"""Command line front end: build blueprints, run campaigns, merge results.

Options can come from a JSON config file (--config); explicit command line
flags override config file values.  NBLDPC_OUT_DIR sets the default output
directory.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .codes import parse_alist
from .gf import FieldSpec
from .lut import (
    BuildConfig,
    DEFAULT_CARDINALITIES,
    format_memory_report,
    load_blueprint,
    run_density_evolution,
    save_blueprint,
)
from .sim import PointResult, SimConfig, SimResult, run_campaign


def _out_dir(args) -> Path:
    d = Path(args.out_dir or os.environ.get("NBLDPC_OUT_DIR", "."))
    d.mkdir(parents=True, exist_ok=True)
    return d


def _load_config(path):
    with open(path) as f:
        return json.load(f)


def _merge(args, parser, keys):
    """Config file values fill in any option the user left at its default."""
    if not args.config:
        return
    cfg = _load_config(args.config)
    for key, val in cfg.items():
        k = key.replace("-", "_")
        if k not in keys:
            parser.error(f"unknown config key {key!r}")
        if parser.get_default(k) == getattr(args, k):
            setattr(args, k, val)


def _read_code(path):
    with open(path) as f:
        return parse_alist(f.read())


def cmd_build(args, parser):
    _merge(args, parser, {
        "code", "field_m", "poly", "design_ebn0", "i_max", "w", "n_fine",
        "seed", "cards", "rate", "out", "out_dir", "decision_every_iteration",
    })
    if not args.code:
        parser.error("--code is required (flag or config file)")
    H = _read_code(args.code)
    gf = H.fieldspec
    if args.field_m and args.field_m != gf.m:
        parser.error(f"--field-m {args.field_m} disagrees with the code (m={gf.m})")
    if args.poly:
        gf = FieldSpec(gf.m, int(args.poly, 0))
        with open(args.code) as f:
            H = parse_alist(f.read(), gf)
    from .codes import TannerGraph

    graph = TannerGraph.from_matrix(H)
    if not graph.regular:
        parser.error("blueprint construction needs a regular code")
    cards = dict(DEFAULT_CARDINALITIES)
    if args.cards:
        cards.update({k: int(v) for k, v in (kv.split("=") for kv in args.cards.split(","))})
    rate = args.rate if args.rate is not None else H.rate
    cfg = BuildConfig(
        fieldspec=gf,
        d_v=graph.d_v,
        d_c=graph.d_c,
        weight_alphabet=graph.weight_alphabet,
        rate=rate,
        design_ebn0_db=args.design_ebn0,
        i_max=args.i_max,
        w=args.w,
        n_fine=args.n_fine,
        cardinalities=cards,
        seed=args.seed,
        decision_every_iteration=args.decision_every_iteration,
    )

    def progress(it, mi):
        print(f"iteration {it + 1:3d}/{cfg.i_max}: I(C;T) = {mi:.6f} bits", flush=True)

    bp = run_density_evolution(cfg, progress=progress)
    out = Path(args.out) if args.out else _out_dir(args) / "blueprint.nblb"
    save_blueprint(bp, out)
    print(f"wrote {out} (sha256 {bp.hash()[:16]}...)")
    print(format_memory_report(bp))
    return 0


def cmd_simulate(args, parser):
    _merge(args, parser, {
        "code", "blueprint", "decoder", "ebn0", "i_max", "min_frame_errors",
        "max_frames", "seed", "transmission", "maxstar", "batch_frames",
        "out", "out_dir",
    })
    if not args.code or not args.blueprint:
        parser.error("--code and --blueprint are required (flags or config file)")
    H = _read_code(args.code)
    bp = load_blueprint(args.blueprint)
    ebn0 = [float(x) for x in str(args.ebn0).split(",")]
    cfg = SimConfig(
        code_path=str(args.code),
        decoder=args.decoder,
        ebn0_db_list=ebn0,
        i_max=args.i_max,
        min_frame_errors=args.min_frame_errors,
        max_frames=args.max_frames,
        seed=args.seed,
        transmission=args.transmission,
        maxstar=args.maxstar,
        batch_frames=args.batch_frames,
        blueprint_path=str(args.blueprint),
    )
    res = run_campaign(cfg, H, bp)
    out = Path(args.out) if args.out else _out_dir(args) / f"results_{args.decoder}.csv"
    out.write_text(res.to_csv())
    print(f"wrote {out}")
    for p in res.points:
        cap = " (frame cap hit)" if p.capped else ""
        print(
            f"Eb/N0 {p.ebn0_db:5.2f} dB: BER {p.ber:.3e}  FER {p.fer:.3e}  "
            f"({p.frames} frames, {p.frame_errors} frame errors){cap}"
        )
    # exit nonzero if any point stopped on the frame cap short of the
    # target error count, so scripted sweeps notice incomplete statistics
    return 1 if any(p.capped for p in res.points) else 0


def _parse_results_csv(path):
    meta = {}
    points = []
    decoder = None
    with open(path) as f:
        for line in f:
            line = line.strip()
            if not line:
                continue
            if line.startswith("#"):
                k, _, v = line[1:].strip().partition("=")
                meta[k] = v
                continue
            if line.startswith("decoder,"):
                continue
            cols = line.split(",")
            decoder = cols[0]
            p = PointResult(
                float(cols[1]), int(cols[2]), int(cols[3]), int(cols[4]),
                int(cols[5]), float(cols[9]), float(cols[10]), bool(int(cols[11])),
            )
            p._bits_denom = max(p.frames, 1)  # re-derive exact rates below
            p._sym_denom = max(p.frames, 1)
            p._ber = float(cols[6])
            p._ser = float(cols[7])
            p._fer = float(cols[8])
            points.append(p)
    return decoder, meta, points


def cmd_report(args, parser):
    _merge(args, parser, {"inputs", "out", "out_dir"})
    results = []
    for path in args.inputs:
        decoder, meta, points = _parse_results_csv(path)
        if decoder is None:
            parser.error(f"{path} holds no data rows")
        # frames/bit counts are exact; recompute denominators from the file
        res = SimResult(
            decoder, points, meta.get("config_hash", ""),
            meta.get("blueprint_hash", ""), int(meta.get("seed", 0)), 0, 0,
        )
        results.append(res)
    text_lines = ["decoder,ebn0_db,ber,fer,frames"]
    for res in results:
        for p in res.points:
            text_lines.append(f"{res.decoder},{p.ebn0_db!r},{p._ber!r},{p._fer!r},{p.frames}")
    out = Path(args.out) if args.out else _out_dir(args) / "plot_data.csv"
    out.write_text("\n".join(text_lines) + "\n")
    print(f"wrote {out}")
    return 0


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="nbldpc")
    sub = parser.add_subparsers(dest="command", required=True)

    b = sub.add_parser("build", help="run density evolution and save a decoder blueprint")
    b.add_argument("--config", help="JSON config file; flags override it")
    b.add_argument("--code", help="alist file of the target (or a representative) code")
    b.add_argument("--field-m", type=int, default=0)
    b.add_argument("--poly", default="", help="primitive polynomial as an integer literal")
    b.add_argument("--design-ebn0", type=float, default=1.5)
    b.add_argument("--i-max", type=int, default=40)
    b.add_argument("--w", type=int, default=7)
    b.add_argument("--n-fine", type=int, default=2000)
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--rate", type=float, default=None, help="design rate (default: code rate)")
    b.add_argument("--cards", default="", help="k=v list, e.g. t_chan=128,t_var=512")
    b.add_argument("--decision-every-iteration", action="store_true", default=True)
    b.add_argument("--out", default="")
    b.add_argument("--out-dir", default="")
    b.set_defaults(func=cmd_build)

    s = sub.add_parser("simulate", help="Monte Carlo BER/FER campaign")
    s.add_argument("--config", help="JSON config file; flags override it")
    s.add_argument("--code", help="alist file")
    s.add_argument("--blueprint", help="blueprint file from `nbldpc build`")
    s.add_argument("--decoder", choices=("ib", "spa", "maxlog"), default="ib")
    s.add_argument("--ebn0", default="1.5", help="comma-separated Eb/N0 sweep in dB")
    s.add_argument("--i-max", type=int, default=40)
    s.add_argument("--min-frame-errors", type=int, default=100)
    s.add_argument("--max-frames", type=int, default=1_000_000)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--transmission", choices=("all_zero", "random"), default="all_zero")
    s.add_argument("--maxstar", action="store_true")
    s.add_argument("--batch-frames", type=int, default=1000)
    s.add_argument("--out", default="")
    s.add_argument("--out-dir", default="")
    s.set_defaults(func=cmd_simulate)

    r = sub.add_parser("report", help="merge result CSVs into one plot table")
    r.add_argument("--config", help="JSON config file; flags override it")
    r.add_argument("inputs", nargs="+", help="result CSVs from `nbldpc simulate`")
    r.add_argument("--out", default="")
    r.add_argument("--out-dir", default="")
    r.set_defaults(func=cmd_report)

    args = parser.parse_args(argv)
    return args.func(args, parser)


if __name__ == "__main__":
    sys.exit(main())
