#!/usr/bin/env python3
"""Generate the bundled small regular GF(4) code (N_v=12, d_v=3, d_c=6).

The graph comes from a seeded configuration-model search that rejects
samples with repeated edges; edge weights are uniform nonzero elements.
The output is deterministic for a fixed seed.
"""

import argparse
from pathlib import Path

import numpy as np

from nbldpc.codes import ParityCheckMatrix, TannerGraph, serialize_alist
from nbldpc.gf import FieldSpec


def sample_regular_code(gf, n_v, d_v, d_c, seed):
    if (n_v * d_v) % d_c:
        raise ValueError("n_v * d_v must be divisible by d_c")
    n_c = n_v * d_v // d_c
    rng = np.random.default_rng(seed)
    var_sockets = np.repeat(np.arange(n_v), d_v)
    for _ in range(10000):
        perm = rng.permutation(var_sockets)
        checks = np.repeat(np.arange(n_c), d_c)
        pairs = set(zip(checks.tolist(), perm.tolist()))
        if len(pairs) != n_v * d_v:
            continue  # repeated edge; resample
        weights = rng.integers(1, gf.q, size=n_v * d_v)
        entries = [
            (int(r), int(c), int(w)) for (r, c), w in zip(zip(checks, perm), weights)
        ]
        H = ParityCheckMatrix(n_c, n_v, entries, gf)
        if H.rank() == n_c:
            return H
    raise RuntimeError("no simple full-rank graph found; change the seed")


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-v", type=int, default=12)
    ap.add_argument("--d-v", type=int, default=3)
    ap.add_argument("--d-c", type=int, default=6)
    ap.add_argument("--m", type=int, default=2)
    ap.add_argument("--seed", type=int, default=7)
    ap.add_argument(
        "--out",
        default=str(
            Path(__file__).resolve().parent.parent
            / "src"
            / "nbldpc"
            / "codes"
            / "toy_gf4_n12.alist"
        ),
    )
    args = ap.parse_args()
    gf = FieldSpec.for_m(args.m)
    H = sample_regular_code(gf, args.n_v, args.d_v, args.d_c, args.seed)
    graph = TannerGraph.from_matrix(H)
    assert graph.regular
    Path(args.out).write_text(serialize_alist(H))
    print(f"wrote {args.out}: N_v={H.n_cols} N_c={H.n_rows} rate={H.rate:.3f} "
          f"weights={graph.weight_alphabet}")


if __name__ == "__main__":
    main()
