"""Double-precision reference decoders: sum-product with fast convolution
over the additive group of GF(2^m), and max-log decoding.

Both run a flooding schedule on probability-vector (or log-domain)
messages indexed by field element in polynomial representation, with the
check-node edge weights applied as index permutations.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .codes import ParityCheckMatrix, TannerGraph
from .decoder import BatchOutcome, DecodeOutcome
from .gf import FieldSpec
from .ib import JointPMF

NEG_INF = -np.inf


class RefDecodeError(Exception):
    pass


def wht(x: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform over the last axis (length a
    power of two); self-inverse up to division by the length."""
    x = np.array(x, dtype=np.float64, copy=True)
    q = x.shape[-1]
    h = 1
    while h < q:
        x = x.reshape(x.shape[:-1] + (q // (2 * h), 2, h))
        a = x[..., 0, :] + x[..., 1, :]
        b = x[..., 0, :] - x[..., 1, :]
        x = np.stack([a, b], axis=-2).reshape(x.shape[:-3] + (q,))
        h *= 2
    return x


def wht_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Distribution of the GF sum of two independent symbols.

    Transform, pointwise multiply, inverse transform; round-off negatives
    are clamped and the result renormalized.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape[-1] != b.shape[-1]:
        raise RefDecodeError("field mismatch between messages")
    out = wht(wht(a) * wht(b)) / a.shape[-1]
    out = np.maximum(out, 0.0)
    s = out.sum(axis=-1, keepdims=True)
    return out / np.where(s > 0, s, 1.0)


def brute_force_convolve(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """O(q^2) oracle for wht_convolve."""
    q = len(a)
    out = np.zeros(q)
    for i in range(q):
        for j in range(q):
            out[i ^ j] += a[i] * b[j]
    return out


class ChannelPosteriors:
    """p(c | t) lookup built from a combiner by-product joint p(c, t).

    Pruned (zero-probability) indices yield a uniform message and bump
    `zero_index_hits`.
    """

    def __init__(self, joint_ct: JointPMF):
        p = joint_ct.p  # (q, T)
        pt = p.sum(axis=0)
        q = p.shape[0]
        self.table = np.where(pt[None, :] > 0, p / np.where(pt > 0, pt, 1.0), 1.0 / q).T
        self.zero_mass = pt == 0
        self.zero_index_hits = 0

    def __call__(self, t):
        t = np.asarray(t)
        self.zero_index_hits += int(np.count_nonzero(self.zero_mass[t]))
        return self.table[t]


def channel_posteriors(t_k: int, joint_ct: JointPMF) -> np.ndarray:
    return ChannelPosteriors(joint_ct)(t_k)


class _RefLayout:
    """Edge arrays plus per-edge weight permutation index tables."""

    def __init__(self, H: ParityCheckMatrix):
        graph = TannerGraph.from_matrix(H)
        gf = H.fieldspec
        q = gf.q
        self.gf = gf
        self.q = q
        self.n_c = H.n_rows
        self.n_v = H.n_cols
        self.d_c = graph.d_c
        self.check_vars = np.full((self.n_c, self.d_c), -1, dtype=np.int64)
        self.fwd_perm = np.zeros((self.n_c, self.d_c, q), dtype=np.int64)
        self.inv_perm = np.zeros((self.n_c, self.d_c, q), dtype=np.int64)
        self.check_w = np.ones((self.n_c, self.d_c), dtype=np.int64)
        slot_of = {}
        xs = np.arange(q)
        for r, edges in enumerate(graph.check_edges):
            if len(edges) != self.d_c:
                raise RefDecodeError("reference decoders require a regular check side")
            for k, (v, w) in enumerate(edges):
                self.check_vars[r, k] = v
                self.check_w[r, k] = w
                self.fwd_perm[r, k] = gf.mul_vec(w, xs)
                self.inv_perm[r, k] = gf.mul_vec(gf.inv(w), xs)
                slot_of[(r, v)] = r * self.d_c + k
        self.d_v = graph.d_v
        self.var_slots = np.zeros((self.n_v, self.d_v), dtype=np.int64)
        for v, edges in enumerate(graph.var_edges):
            if len(edges) != self.d_v:
                raise RefDecodeError("reference decoders require a regular variable side")
            for k, (r, _) in enumerate(edges):
                self.var_slots[v, k] = slot_of[(r, v)]

    def syndrome_zero(self, hard):
        prods = self.gf.mul_vec(self.check_w[None, :, :], hard[:, self.check_vars])
        return ~np.any(np.bitwise_xor.reduce(prods, axis=2), axis=1)


def _normalize(p):
    s = p.sum(axis=-1, keepdims=True)
    bad = s <= 0
    if np.any(bad):
        p = np.where(bad, 1.0, p)
        s = p.sum(axis=-1, keepdims=True)
    return p / s


def _gather(msgs, perm):
    """msgs (..., q) gathered by per-edge index tables perm."""
    return np.take_along_axis(msgs, np.broadcast_to(perm, msgs.shape), axis=-1)


def spa_decode_batch(H: ParityCheckMatrix, posteriors: np.ndarray, i_max: int) -> BatchOutcome:
    """Flooding sum-product with fast check-node convolution."""
    layout = _RefLayout(H)
    post = np.asarray(posteriors, dtype=np.float64)
    if post.ndim == 2:
        post = post[None]
    n_frames = post.shape[0]

    hard_out = np.argmax(post, axis=2)
    converged = np.zeros(n_frames, dtype=bool)
    iters_used = np.full(n_frames, i_max, dtype=np.int64)

    active = np.arange(n_frames)
    post_act = post
    v2c = post[:, layout.check_vars, :]

    for it in range(i_max):
        # check node: weight permutation, transform, extrinsic product,
        # inverse transform, inverse-weight permutation
        shifted = _gather(v2c, layout.inv_perm[None])
        F = wht(shifted)
        ext = _leave_one_out_product(F)
        conv = wht(ext) / layout.q
        conv = np.maximum(conv, 0.0)
        c2v = _normalize(_gather(conv, layout.fwd_perm[None]))

        # variable node: entrywise product with the channel posterior
        msgs = c2v.reshape(len(active), layout.n_c * layout.d_c, layout.q)[
            :, layout.var_slots, :
        ]
        ext_v = _leave_one_out_product(msgs, extra=post_act)
        new_var = _normalize(ext_v)
        flat = np.empty(
            (len(active), layout.n_c * layout.d_c, layout.q), dtype=np.float64
        )
        flat[:, layout.var_slots.reshape(-1), :] = new_var.reshape(
            len(active), -1, layout.q
        )
        v2c = flat.reshape(len(active), layout.n_c, layout.d_c, layout.q)

        total = post_act * np.prod(msgs, axis=2)
        hard = np.argmax(total, axis=2)
        hard_out[active] = hard
        ok = layout.syndrome_zero(hard)
        if np.any(ok):
            done = active[ok]
            converged[done] = True
            iters_used[done] = it + 1
            keep = ~ok
            active, v2c, post_act = active[keep], v2c[keep], post_act[keep]
            if active.size == 0:
                break

    return BatchOutcome(hard_out, converged, iters_used)


def _leave_one_out_product(msgs, extra=None):
    """Product over the edge axis (axis=2) excluding each position in
    turn; msgs shape (F, nodes, degree, q)."""
    d = msgs.shape[2]
    pre = np.ones_like(msgs)
    suf = np.ones_like(msgs)
    for k in range(1, d):
        pre[:, :, k] = pre[:, :, k - 1] * msgs[:, :, k - 1]
    for k in range(d - 2, -1, -1):
        suf[:, :, k] = suf[:, :, k + 1] * msgs[:, :, k + 1]
    out = pre * suf
    if extra is not None:
        out = out * extra[:, :, None, :]
    return out


def spa_decode(H: ParityCheckMatrix, posteriors: np.ndarray, i_max: int) -> DecodeOutcome:
    out = spa_decode_batch(H, np.asarray(posteriors)[None], i_max)
    return DecodeOutcome(out.hard_decisions[0], bool(out.converged[0]), int(out.iterations_used[0]))


# --- max-log ---------------------------------------------------------------


def maxlog_pair(la: np.ndarray, lb: np.ndarray, xor_idx: np.ndarray, maxstar: bool):
    """Pairwise check combination: out[s] = max_{a+b=s} la[a] + lb[b]
    (or the exact log-domain sum when maxstar is set)."""
    combo = la[..., None, :] + np.take_along_axis(
        lb[..., None, :], np.broadcast_to(xor_idx, lb.shape[:-1] + xor_idx.shape), axis=-1
    )
    if maxstar:
        with np.errstate(invalid="ignore"):
            out = np.logaddexp.reduce(combo, axis=-1)
        return np.nan_to_num(out, nan=NEG_INF, neginf=NEG_INF)
    return np.max(combo, axis=-1)


def _log_normalize(L):
    return L - L.max(axis=-1, keepdims=True)


def maxlog_decode_batch(
    H: ParityCheckMatrix,
    posteriors: np.ndarray,
    i_max: int,
    maxstar: bool = False,
) -> BatchOutcome:
    """Flooding log-domain decoding with the max (or max*) check node."""
    layout = _RefLayout(H)
    q = layout.q
    xs = np.arange(q)
    xor_idx = xs[:, None] ^ xs[None, :]  # (s, a) -> a + s over the field

    post = np.asarray(posteriors, dtype=np.float64)
    if post.ndim == 2:
        post = post[None]
    with np.errstate(divide="ignore"):
        logpost = _log_normalize(np.log(post))
    n_frames = post.shape[0]

    hard_out = np.argmax(logpost, axis=2)
    converged = np.zeros(n_frames, dtype=bool)
    iters_used = np.full(n_frames, i_max, dtype=np.int64)

    active = np.arange(n_frames)
    logpost_act = logpost
    v2c = logpost[:, layout.check_vars, :]

    for it in range(i_max):
        shifted = _gather(v2c, layout.inv_perm[None])
        # extrinsic max-convolution via forward/backward partial combines
        d = layout.d_c
        ident = np.full_like(shifted[:, :, 0], NEG_INF)
        ident[..., 0] = 0.0
        pre = [ident]
        for k in range(1, d):
            pre.append(maxlog_pair(pre[-1], shifted[:, :, k - 1], xor_idx, maxstar))
        suf = [ident]
        for k in range(d - 2, -1, -1):
            suf.append(maxlog_pair(suf[-1], shifted[:, :, k + 1], xor_idx, maxstar))
        suf = suf[::-1]
        ext = np.stack(
            [maxlog_pair(pre[k], suf[k], xor_idx, maxstar) for k in range(d)], axis=2
        )
        c2v = _log_normalize(_gather(ext, layout.fwd_perm[None]))

        msgs = c2v.reshape(len(active), layout.n_c * layout.d_c, q)[:, layout.var_slots, :]
        ext_v = _leave_one_out_sum(msgs, logpost_act)
        new_var = _log_normalize(ext_v)
        flat = np.empty((len(active), layout.n_c * layout.d_c, q), dtype=np.float64)
        flat[:, layout.var_slots.reshape(-1), :] = new_var.reshape(len(active), -1, q)
        v2c = flat.reshape(len(active), layout.n_c, layout.d_c, q)

        total = logpost_act + np.sum(msgs, axis=2)
        hard = np.argmax(total, axis=2)
        hard_out[active] = hard
        ok = layout.syndrome_zero(hard)
        if np.any(ok):
            done = active[ok]
            converged[done] = True
            iters_used[done] = it + 1
            keep = ~ok
            active, v2c, logpost_act = active[keep], v2c[keep], logpost_act[keep]
            if active.size == 0:
                break

    return BatchOutcome(hard_out, converged, iters_used)


def _leave_one_out_sum(msgs, extra):
    d = msgs.shape[2]
    pre = np.zeros_like(msgs)
    suf = np.zeros_like(msgs)
    for k in range(1, d):
        pre[:, :, k] = pre[:, :, k - 1] + msgs[:, :, k - 1]
    for k in range(d - 2, -1, -1):
        suf[:, :, k] = suf[:, :, k + 1] + msgs[:, :, k + 1]
    return pre + suf + extra[:, :, None, :]


def maxlog_decode(
    H: ParityCheckMatrix, posteriors: np.ndarray, i_max: int, maxstar: bool = False
) -> DecodeOutcome:
    out = maxlog_decode_batch(H, np.asarray(posteriors)[None], i_max, maxstar)
    return DecodeOutcome(out.hard_decisions[0], bool(out.converged[0]), int(out.iterations_used[0]))
