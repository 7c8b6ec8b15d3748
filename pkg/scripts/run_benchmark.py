#!/usr/bin/env python3
"""Full benchmark sweep: lookup decoder vs sum-product vs max-log.

Builds (or reuses) a decoder blueprint for the given regular GF(2^m) code,
then runs a Monte Carlo Eb/N0 sweep for all three decoders and writes the
per-decoder result CSVs plus a merged plot table.

Example (bundled toy code, quick):
    python scripts/run_benchmark.py --code src/nbldpc/codes/toy_gf4_n12.alist \
        --ebn0 3.0,4.0,5.0 --min-frame-errors 50 --out-dir bench_out

The headline configuration is the N_v=816 rate-1/2 GF(4) MacKay code
(d_v=3, d_c=6). The alist is not bundled; download "816.1A4.843" from the
MacKay code archive (Encyclopedia of Sparse Graph Codes, GF(4) section)
and pass it via --code. Expect hours for BER 1e-4 statistics.
"""

import argparse
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from nbldpc.codes import TannerGraph, parse_alist
from nbldpc.lut import (
    BuildConfig,
    format_memory_report,
    load_blueprint,
    run_density_evolution,
    save_blueprint,
)
from nbldpc.sim import SimConfig, emit_plot_data, run_campaign


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--code", required=True)
    ap.add_argument("--ebn0", default="0.5,1.0,1.5,2.0,2.5,3.0")
    ap.add_argument("--design-ebn0", type=float, default=1.5)
    ap.add_argument("--i-max", type=int, default=40)
    ap.add_argument("--min-frame-errors", type=int, default=100)
    ap.add_argument("--max-frames", type=int, default=10_000_000)
    ap.add_argument("--batch-frames", type=int, default=2000)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--transmission", choices=("all_zero", "random"), default="all_zero")
    ap.add_argument("--blueprint", default="", help="reuse an existing blueprint file")
    ap.add_argument("--out-dir", default="bench_out")
    args = ap.parse_args()

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    H = parse_alist(Path(args.code).read_text())
    graph = TannerGraph.from_matrix(H)
    print(f"code: N_v={H.n_cols} N_c={H.n_rows} GF({H.fieldspec.q}) "
          f"d_v={graph.d_v} d_c={graph.d_c} rate={H.rate:.3f}")

    if args.blueprint:
        bp = load_blueprint(args.blueprint)
        print(f"loaded blueprint {args.blueprint}")
    else:
        cfg = BuildConfig(
            H.fieldspec, graph.d_v, graph.d_c, graph.weight_alphabet,
            rate=H.rate, design_ebn0_db=args.design_ebn0, i_max=args.i_max,
            seed=args.seed,
        )
        t0 = time.time()
        bp = run_density_evolution(
            cfg, progress=lambda it, mi: print(f"  build it {it + 1}: {mi:.4f} bits", flush=True)
        )
        print(f"built blueprint in {time.time() - t0:.0f} s")
        save_blueprint(bp, out_dir / "blueprint.nblb")
    print(format_memory_report(bp))

    ebn0 = [float(x) for x in args.ebn0.split(",")]
    results = []
    for decoder in ("ib", "spa", "maxlog"):
        cfg = SimConfig(
            code_path=args.code, decoder=decoder, ebn0_db_list=ebn0,
            i_max=args.i_max, min_frame_errors=args.min_frame_errors,
            max_frames=args.max_frames, seed=args.seed,
            transmission=args.transmission, batch_frames=args.batch_frames,
        )
        t0 = time.time()
        res = run_campaign(cfg, H, bp, graph)
        print(f"{decoder}: {time.time() - t0:.0f} s")
        for p in res.points:
            cap = "  [frame cap]" if p.capped else ""
            print(f"  {p.ebn0_db:5.2f} dB  BER {p.ber:.3e}  FER {p.fer:.3e}  "
                  f"({p.frames} frames, {p.frame_errors} FE){cap}")
        (out_dir / f"results_{decoder}.csv").write_text(res.to_csv())
        results.append(res)

    (out_dir / "plot_data.csv").write_text(emit_plot_data(results))
    print(f"wrote {out_dir}/plot_data.csv")
    return 0


if __name__ == "__main__":
    sys.exit(main())
