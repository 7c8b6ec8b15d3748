"""Monte Carlo BER/FER campaigns over the quantized AWGN/BPSK channel.

All decoders see the same fixed channel quantizer and symbol combiner from
the blueprint; the lookup decoder consumes the integer channel indices
directly, while the reference decoders get exact symbol posteriors
recomputed for the operating noise level through the fixed front end.
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, asdict

import numpy as np

from .channel import ChannelModel, simulate_symbols, symbol_bits
from .codes import Encoder, ParityCheckMatrix, TannerGraph
from .decoder import decode_batch
from .lut import DecoderBlueprint
from .refdec import ChannelPosteriors, maxlog_decode_batch, spa_decode_batch

DECODER_KINDS = ("ib", "spa", "maxlog")


class SimError(Exception):
    pass


@dataclass
class SimConfig:
    code_path: str = ""
    decoder: str = "ib"
    ebn0_db_list: list = field(default_factory=lambda: [1.5])
    i_max: int = 40
    min_frame_errors: int = 100
    max_frames: int = 1_000_000
    seed: int = 0
    transmission: str = "all_zero"  # or "random"
    maxstar: bool = False
    batch_frames: int = 1000
    blueprint_path: str = ""

    def __post_init__(self):
        if not self.ebn0_db_list:
            raise SimError("Eb/N0 sweep must be non-empty")
        if self.min_frame_errors < 1:
            raise SimError("min_frame_errors must be >= 1")
        if self.decoder not in DECODER_KINDS:
            raise SimError(f"unknown decoder {self.decoder!r}")
        if self.transmission not in ("all_zero", "random"):
            raise SimError(f"unknown transmission mode {self.transmission!r}")

    def hash(self) -> str:
        return hashlib.sha256(
            json.dumps(asdict(self), sort_keys=True).encode()
        ).hexdigest()


@dataclass
class PointResult:
    ebn0_db: float
    frames: int
    bit_errors: int
    symbol_errors: int
    frame_errors: int
    mean_iterations: float
    early_term_rate: float
    capped: bool  # hit max_frames before min_frame_errors

    @property
    def ber(self) -> float:
        return 0.0 if self.frames == 0 else self.bit_errors / self._bits_denom

    def finalize(self, n_v: int, m: int):
        self._bits_denom = self.frames * n_v * m
        self._sym_denom = self.frames * n_v
        return self

    @property
    def ser(self) -> float:
        return 0.0 if self.frames == 0 else self.symbol_errors / self._sym_denom

    @property
    def fer(self) -> float:
        return 0.0 if self.frames == 0 else self.frame_errors / self.frames


@dataclass
class SimResult:
    decoder: str
    points: list
    config_hash: str
    blueprint_hash: str
    seed: int
    n_v: int
    m: int

    def to_csv(self) -> str:
        lines = [
            f"# config_hash={self.config_hash}",
            f"# blueprint_hash={self.blueprint_hash}",
            f"# seed={self.seed}",
            "decoder,ebn0_db,frames,bit_errors,symbol_errors,frame_errors,"
            "ber,ser,fer,mean_iterations,early_term_rate,capped",
        ]
        for p in self.points:
            lines.append(
                f"{self.decoder},{p.ebn0_db!r},{p.frames},{p.bit_errors},"
                f"{p.symbol_errors},{p.frame_errors},{p.ber!r},{p.ser!r},"
                f"{p.fer!r},{p.mean_iterations!r},{p.early_term_rate!r},"
                f"{int(p.capped)}"
            )
        return "\n".join(lines) + "\n"


def _frame_rngs(seed: int, point_idx: int, frame_indices) -> list:
    """One (noise, info) generator pair per frame, keyed only by the frame
    index so results do not depend on batching or execution order."""
    out = []
    for f in frame_indices:
        ss = np.random.SeedSequence([seed, point_idx, int(f)])
        noise_ss, info_ss = ss.spawn(2)
        out.append((np.random.default_rng(noise_ss), np.random.default_rng(info_ss)))
    return out


def _simulate_batch(codewords, model, bp, rngs):
    frames = []
    for cw, (noise_rng, _) in zip(codewords, rngs):
        frames.append(simulate_symbols(cw, model, bp.quantizer, bp.combiner, noise_rng))
    return np.stack(frames)


def run_campaign(
    cfg: SimConfig,
    H: ParityCheckMatrix,
    bp: DecoderBlueprint,
    graph: TannerGraph | None = None,
) -> SimResult:
    """Monte Carlo sweep with the configured stopping rule per point."""
    gf = H.fieldspec
    if gf.q != bp.fieldspec.q or gf.primitive_poly != bp.fieldspec.primitive_poly:
        raise SimError("blueprint field does not match the code")
    graph = graph or TannerGraph.from_matrix(H)
    m = gf.m
    n_v = H.n_cols
    encoder = Encoder(H) if cfg.transmission == "random" else None
    i_max = min(cfg.i_max, bp.i_max)

    points = []
    for point_idx, ebn0 in enumerate(cfg.ebn0_db_list):
        model = ChannelModel(float(ebn0), bp.rate, m)
        if cfg.decoder in ("spa", "maxlog"):
            op_joint = bp.combiner.joint_at(bp.quantizer.joint_at(model.sigma), gf.q)
            posterior_table = ChannelPosteriors(op_joint).table
        frames = 0
        bit_errors = 0
        symbol_errors = 0
        frame_errors = 0
        iter_sum = 0
        early_terms = 0
        while frame_errors < cfg.min_frame_errors and frames < cfg.max_frames:
            batch = min(cfg.batch_frames, cfg.max_frames - frames)
            rngs = _frame_rngs(cfg.seed, point_idx, range(frames, frames + batch))
            if encoder is None:
                codewords = np.zeros((batch, n_v), dtype=np.int64)
            else:
                codewords = np.stack(
                    [
                        encoder.encode(info_rng.integers(0, gf.q, size=encoder.k))
                        for _, info_rng in rngs
                    ]
                )
            t = _simulate_batch(codewords, model, bp, rngs)

            if cfg.decoder == "ib":
                out = decode_batch(bp, graph, t, i_max_override=i_max)
            elif cfg.decoder == "spa":
                out = spa_decode_batch(H, posterior_table[t], i_max)
            else:
                out = maxlog_decode_batch(H, posterior_table[t], i_max, cfg.maxstar)

            sym_err = out.hard_decisions != codewords
            bits_wrong = symbol_bits(out.hard_decisions ^ codewords, m).sum(axis=(1, 2))
            bit_errors += int(bits_wrong.sum())
            symbol_errors += int(sym_err.sum())
            frame_errors += int(np.any(sym_err, axis=1).sum())
            iter_sum += int(out.iterations_used.sum())
            early_terms += int((out.iterations_used < i_max).sum())
            frames += batch
        points.append(
            PointResult(
                float(ebn0),
                frames,
                bit_errors,
                symbol_errors,
                frame_errors,
                iter_sum / max(frames, 1),
                early_terms / max(frames, 1),
                frame_errors < cfg.min_frame_errors,
            ).finalize(n_v, m)
        )
    return SimResult(cfg.decoder, points, cfg.hash(), bp.hash(), cfg.seed, n_v, m)


def emit_plot_data(results: list[SimResult]) -> str:
    """Long-format plot table; column order and formatting are stable."""
    if not results:
        raise SimError("need at least one result")
    lines = ["decoder,ebn0_db,ber,fer,frames"]
    for res in results:
        for p in res.points:
            lines.append(f"{res.decoder},{p.ebn0_db!r},{p.ber!r},{p.fer!r},{p.frames}")
    return "\n".join(lines) + "\n"
