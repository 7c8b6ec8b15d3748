"""Lookup-table decoders for regular non-binary LDPC codes, built with the
information bottleneck method, plus sum-product and max-log references."""

from .gf import FieldSpec, FieldElement, DEFAULT_PRIMITIVE_POLYS
from .ib import JointPMF, ib_compress, mutual_information
from .codes import ParityCheckMatrix, TannerGraph, parse_alist, serialize_alist, Encoder, encode
from .channel import (
    ChannelModel,
    discretize_awgn,
    design_bit_quantizer,
    build_symbol_combiner,
    simulate_symbols,
)
from .lut import (
    BuildConfig,
    DecoderBlueprint,
    run_density_evolution,
    save_blueprint,
    load_blueprint,
    memory_report,
)
from .decoder import decode, decode_batch, Instrumentation
from .refdec import spa_decode, spa_decode_batch, maxlog_decode, maxlog_decode_batch
from .sim import SimConfig, run_campaign, emit_plot_data

__version__ = "0.1.0"

__all__ = [
    "FieldSpec",
    "FieldElement",
    "DEFAULT_PRIMITIVE_POLYS",
    "JointPMF",
    "ib_compress",
    "mutual_information",
    "ParityCheckMatrix",
    "TannerGraph",
    "parse_alist",
    "serialize_alist",
    "Encoder",
    "encode",
    "ChannelModel",
    "discretize_awgn",
    "design_bit_quantizer",
    "build_symbol_combiner",
    "simulate_symbols",
    "BuildConfig",
    "DecoderBlueprint",
    "run_density_evolution",
    "save_blueprint",
    "load_blueprint",
    "memory_report",
    "decode",
    "decode_batch",
    "Instrumentation",
    "spa_decode",
    "spa_decode_batch",
    "maxlog_decode",
    "maxlog_decode_batch",
    "SimConfig",
    "run_campaign",
    "emit_plot_data",
]
