"""Online lookup-table message-passing decoder.

Messages are unsigned integers; the whole decode path is table lookups and
array indexing, with no arithmetic on message values.  Flooding schedule,
per-iteration tables, syndrome-based early termination.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .codes import TannerGraph
from .lut import DecoderBlueprint

MSG_DTYPE = np.uint16


class DecodeConfigError(Exception):
    pass


@dataclass
class Instrumentation:
    """Counters maintained by the decode path when instrumentation is on.

    float_ops counts arithmetic performed on message values with a
    floating-point dtype; the lookup-only contract requires it to stay 0.
    """

    lookups: int = 0
    float_ops: int = 0

    def observe(self, *arrays):
        self.lookups += 1
        for a in arrays:
            if np.issubdtype(np.asarray(a).dtype, np.floating):
                self.float_ops += 1


@dataclass
class DecodeOutcome:
    hard_decisions: np.ndarray
    converged: bool
    iterations_used: int


@dataclass
class BatchOutcome:
    hard_decisions: np.ndarray  # (frames, N_v)
    converged: np.ndarray       # (frames,) bool
    iterations_used: np.ndarray  # (frames,) int


class _GraphLayout:
    """Check-side edge arrays for a regular graph, plus the slots that let
    the variable side gather its incident messages."""

    def __init__(self, graph: TannerGraph, bp: DecoderBlueprint):
        if not graph.regular:
            raise DecodeConfigError("lookup decoding supports regular graphs only")
        if graph.d_c != bp.d_c or graph.d_v != bp.d_v:
            raise DecodeConfigError(
                f"graph degrees ({graph.d_v},{graph.d_c}) do not match the "
                f"blueprint ({bp.d_v},{bp.d_c})"
            )
        missing = set(graph.weight_alphabet) - set(bp.weight_alphabet)
        if missing:
            raise DecodeConfigError(f"edge weights {missing} absent from the blueprint")
        n_c = len(graph.check_edges)
        self.n_c = n_c
        self.n_v = len(graph.var_edges)
        self.d_c = graph.d_c
        self.d_v = graph.d_v
        self.check_vars = np.zeros((n_c, graph.d_c), dtype=np.int64)
        self.check_widx = np.zeros((n_c, graph.d_c), dtype=np.int64)
        self.check_w = np.zeros((n_c, graph.d_c), dtype=np.int64)
        slot_of = {}
        for r, edges in enumerate(graph.check_edges):
            for k, (v, w) in enumerate(edges):
                self.check_vars[r, k] = v
                self.check_widx[r, k] = bp.weight_index(w)
                self.check_w[r, k] = w
                slot_of[(r, v)] = r * graph.d_c + k
        self.var_slots = np.zeros((self.n_v, graph.d_v), dtype=np.int64)
        for v, edges in enumerate(graph.var_edges):
            for k, (r, _) in enumerate(edges):
                self.var_slots[v, k] = slot_of[(r, v)]
        self.fieldspec = graph.fieldspec


def _syndrome_weight(layout: _GraphLayout, hard: np.ndarray) -> np.ndarray:
    """(frames,) number of unsatisfied checks, evaluated with exact GF
    arithmetic; zero means H * hard == 0."""
    gf = layout.fieldspec
    prods = gf.mul_vec(layout.check_w[None, :, :], hard[:, layout.check_vars])
    synd = np.bitwise_xor.reduce(prods, axis=2)
    return np.count_nonzero(synd, axis=1)


def decode_batch(
    bp: DecoderBlueprint,
    graph: TannerGraph,
    channel_indices: np.ndarray,
    i_max_override: int | None = None,
    instrument: Instrumentation | None = None,
) -> BatchOutcome:
    """Decode a batch of frames; shape (frames, N_v) of channel indices.

    The result for each frame is identical to decoding it alone: every
    step is an independent per-frame table lookup.
    """
    layout = _GraphLayout(graph, bp)
    chan = np.asarray(channel_indices)
    if chan.ndim == 1:
        chan = chan[None, :]
    if chan.shape[1] != layout.n_v:
        raise DecodeConfigError("channel index count != N_v")
    if chan.max(initial=0) >= bp.t_chan:
        raise DecodeConfigError("channel index out of table range")
    chan = chan.astype(MSG_DTYPE)
    n_frames = chan.shape[0]

    i_max = bp.i_max if i_max_override is None else i_max_override
    if i_max > bp.i_max:
        raise DecodeConfigError(f"i_max_override {i_max} exceeds blueprint i_max {bp.i_max}")

    hard_out = np.zeros((n_frames, layout.n_v), dtype=np.int64)
    converged = np.zeros(n_frames, dtype=bool)
    iters_used = np.full(n_frames, i_max, dtype=np.int64)

    if i_max == 0:
        hard = bp.channel_decision[chan]
        if instrument is not None:
            instrument.observe(hard)
        ok = _syndrome_weight(layout, hard) == 0
        return BatchOutcome(hard, ok, np.zeros(n_frames, dtype=np.int64))

    active = np.arange(n_frames)
    # best-effort output: a frame that never satisfies all checks keeps the
    # decision with the fewest unsatisfied ones, not the last iteration's
    best_weight = np.full(n_frames, layout.n_c + 1, dtype=np.int64)
    # iteration 0 check input is the channel index itself
    v2c = chan[:, layout.check_vars].astype(MSG_DTYPE)
    chan_act = chan

    for it in range(i_max):
        tables = bp.iterations[it]
        mult = tables.mult.mapping
        conv = [s.mapping for s in tables.conv_stages]
        inv_mult = tables.inv_mult.mapping
        var = [s.mapping for s in tables.var_stages]

        if v2c.max() >= mult.shape[1]:
            raise DecodeConfigError("message out of table range (blueprint/graph mismatch)")

        # --- check node update (all checks at once) ---
        tprime = mult[layout.check_widx[None, :, :], v2c]
        if instrument is not None:
            instrument.observe(tprime)
        c2v = np.empty_like(v2c)
        for j in range(layout.d_c):
            others = [k for k in range(layout.d_c) if k != j]
            acc = tprime[:, :, others[0]]
            for s, k in enumerate(others[1:]):
                acc = conv[s][acc, tprime[:, :, k]]
                if instrument is not None:
                    instrument.observe(acc)
            out = inv_mult[layout.check_widx[None, :, j], acc]
            if instrument is not None:
                instrument.observe(out)
            c2v[:, :, j] = out

        # --- variable node update (all variables at once) ---
        msgs = c2v.reshape(len(active), -1)[:, layout.var_slots]
        new_v2c_var = np.empty((len(active), layout.n_v, layout.d_v), dtype=MSG_DTYPE)
        ext_last = None
        for j in range(layout.d_v):
            others = [k for k in range(layout.d_v) if k != j]
            acc = var[0][chan_act, msgs[:, :, others[0]]]
            if instrument is not None:
                instrument.observe(acc)
            for s, k in enumerate(others[1:]):
                acc = var[s + 1][acc, msgs[:, :, k]]
                if instrument is not None:
                    instrument.observe(acc)
            new_v2c_var[:, :, j] = acc
            if j == layout.d_v - 1:
                ext_last = acc
        # scatter back to the check-side layout
        flat = np.empty((len(active), layout.n_c * layout.d_c), dtype=MSG_DTYPE)
        flat[:, layout.var_slots.reshape(-1)] = new_v2c_var.reshape(len(active), -1)
        v2c = flat.reshape(len(active), layout.n_c, layout.d_c)

        # --- hard decision and early termination ---
        if tables.decision is not None:
            hard = tables.decision.mapping[ext_last, msgs[:, :, layout.d_v - 1]]
            if instrument is not None:
                instrument.observe(hard)
            hard = hard.astype(np.int64)
            weight = _syndrome_weight(layout, hard)
            better = weight < best_weight[active]
            hard_out[active[better]] = hard[better]
            best_weight[active[better]] = weight[better]
            ok = weight == 0
            if np.any(ok):
                done = active[ok]
                converged[done] = True
                iters_used[done] = it + 1
                keep = ~ok
                active = active[keep]
                v2c = v2c[keep]
                chan_act = chan_act[keep]
                if active.size == 0:
                    break

    return BatchOutcome(hard_out, converged, iters_used)


def decode(
    bp: DecoderBlueprint,
    graph: TannerGraph,
    channel_indices: np.ndarray,
    i_max_override: int | None = None,
    instrument: Instrumentation | None = None,
) -> DecodeOutcome:
    """Decode a single frame."""
    out = decode_batch(bp, graph, np.asarray(channel_indices)[None, :], i_max_override, instrument)
    return DecodeOutcome(out.hard_decisions[0], bool(out.converged[0]), int(out.iterations_used[0]))
