"""Quantized AWGN/BPSK channel and its mutual-information-maximizing
front end.

Each GF(2^m) codeword symbol is sent as m BPSK symbols (bit j of the
polynomial representation, LSB first, bit 0 -> +1).  The receiver applies
a w-bit scalar quantizer per BPSK symbol and then a cascade of two-input
lookup tables that combines the m quantizer indices into one channel index
t_k informative about the codeword symbol.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.special import ndtr

from .gf import FieldSpec
from .ib import DeterministicMapping, JointPMF, ib_compress, mutual_information


class ChannelError(Exception):
    pass


@dataclass(frozen=True)
class ChannelModel:
    """AWGN/BPSK operating point.  sigma^2 = 1 / (2 * R_c * Eb/N0_linear)."""

    ebn0_db: float
    rate: float
    bits_per_symbol: int

    @property
    def sigma(self) -> float:
        ebn0 = 10.0 ** (self.ebn0_db / 10.0)
        if self.rate <= 0:
            raise ChannelError("rate must be positive")
        return float(1.0 / np.sqrt(2.0 * self.rate * ebn0))


def _symmetric_edges(n_fine: int, clip: float) -> np.ndarray:
    """Finite cell edges on [-clip, clip], exactly mirror-symmetric, with 0
    as an interior edge (n_fine must be even)."""
    if n_fine % 2:
        raise ChannelError("n_fine must be even")
    pos = np.linspace(0.0, clip, n_fine // 2 + 1)
    return np.concatenate([-pos[:0:-1], pos])


def _bit_cell_masses(finite_edges: np.ndarray, sigma: float) -> np.ndarray:
    """p(b, cell) for the cells delimited by `finite_edges` plus two tails.

    Row b=0 is the +1 BPSK symbol; row b=1 is the exact mirror of row b=0,
    so the joint is bitwise symmetric.
    """
    full = np.concatenate([[-np.inf], finite_edges, [np.inf]])
    cdf0 = ndtr((full - 1.0) / sigma)
    row0 = 0.5 * np.diff(cdf0)
    return np.vstack([row0, row0[::-1]])


@dataclass
class FineChannelJoint(JointPMF):
    """p(bit, fine-cell) together with the grid geometry that produced it."""

    edges: np.ndarray = field(default=None)
    sigma: float = 0.0


def discretize_awgn(sigma: float, n_fine: int = 2000, clip: float | None = None) -> FineChannelJoint:
    """Fine-grained joint p(bit, cell) of the BPSK-AWGN channel.

    Uniform grid on [-clip, clip] plus two tail cells; equiprobable bits.
    Default clip is 6 sigma beyond the +-1 signal points.
    """
    if sigma <= 0:
        raise ChannelError("sigma must be positive")
    if n_fine < 64:
        raise ChannelError("n_fine must be at least 64")
    if clip is None:
        clip = 1.0 + 6.0 * sigma
    if clip <= 0:
        raise ChannelError("clip must be positive")
    edges = _symmetric_edges(n_fine, clip)
    return FineChannelJoint(_bit_cell_masses(edges, sigma), edges=edges, sigma=sigma)


@dataclass
class BitQuantizer:
    """w-bit scalar quantizer: 2^w - 1 strictly increasing thresholds,
    symmetric about 0, chosen to maximize I(bit; index)."""

    thresholds: np.ndarray
    w: int
    joint_bt: JointPMF

    def indices(self, samples: np.ndarray) -> np.ndarray:
        return np.searchsorted(self.thresholds, samples, side="left")

    def joint_at(self, sigma: float) -> JointPMF:
        """p(bit, index) when the same thresholds see noise level sigma."""
        return JointPMF(_bit_cell_masses(self.thresholds, sigma))


def _group_mi_dp(masses: np.ndarray, n_groups: int):
    """Optimal contiguous grouping of cells into n_groups non-empty runs,
    maximizing the quantized mutual information contribution.  Returns the
    group boundaries as cell indices (length n_groups + 1)."""
    n_cells = masses.shape[1]
    if n_groups > n_cells:
        raise ChannelError("more groups than cells")
    cum = np.concatenate([np.zeros((2, 1)), np.cumsum(masses, axis=1)], axis=1)
    ii = np.arange(n_cells + 1)

    i_grid, j_grid = np.meshgrid(ii, ii, indexing="ij")
    m0 = cum[0, j_grid] - cum[0, i_grid]
    m1 = cum[1, j_grid] - cum[1, i_grid]
    mg = m0 + m1
    C = np.zeros_like(m0)
    for mb in (m0, m1):
        nz = mb > 0
        C[nz] += mb[nz] * np.log2(mb[nz] / (0.5 * mg[nz]))
    C[i_grid >= j_grid] = -np.inf  # groups must be non-empty runs

    f = np.full(n_cells + 1, -np.inf)
    f[0] = 0.0
    back = np.zeros((n_groups, n_cells + 1), dtype=np.int64)
    for k in range(n_groups):
        cand = f[:, None] + C
        back[k] = np.argmax(cand, axis=0)
        f = cand[back[k], ii]
    bounds = [n_cells]
    for k in range(n_groups - 1, -1, -1):
        bounds.append(int(back[k, bounds[-1]]))
    return bounds[::-1]


def design_bit_quantizer(fine: FineChannelJoint, w: int) -> BitQuantizer:
    """MI-optimal w-bit quantizer via exhaustive contiguous boundary search.

    Symmetry about 0 is enforced by solving the positive half and
    mirroring, which loses nothing for the symmetric BPSK-AWGN joint.
    """
    n_cells = fine.ny
    n_out = 1 << w
    if n_out > n_cells:
        raise ChannelError(f"2^w = {n_out} exceeds the {n_cells}-cell fine grid")
    half = fine.p[:, n_cells // 2 :]
    if w == 1:
        pos_thr = np.empty(0)
    else:
        bounds_half = _group_mi_dp(half, n_out // 2)
        pos_edges = fine.edges[(n_cells - 2) // 2 :]  # starts at 0.0
        pos_thr = np.asarray([pos_edges[b] for b in bounds_half[1:-1]])
    thresholds = np.concatenate([-pos_thr[::-1], [0.0], pos_thr])
    joint = JointPMF(_bit_cell_masses(thresholds, fine.sigma))
    return BitQuantizer(thresholds, w, joint)


def symbol_bits(symbols: np.ndarray, m: int) -> np.ndarray:
    """Binary expansion, LSB first: bit j is the coefficient of x^j."""
    symbols = np.asarray(symbols, dtype=np.int64)
    return (symbols[..., None] >> np.arange(m)) & 1


@dataclass
class SymbolCombiner:
    """Cascade of two-input lookup tables reducing the m quantizer indices
    of one codeword symbol to a single channel index t_k.

    stages[0] maps (y_0, y_1); stage s maps (t_prev, y_{s+1}).  For m = 1
    the cascade is empty and t_k = y_0.  joint_ct is the exact design-time
    push-forward p(c, t).
    """

    stages: list[np.ndarray]  # each 2-D int array, lut[a, b] -> t
    joint_ct: JointPMF
    t_card: int
    m: int
    y_card: int

    def apply(self, y: np.ndarray) -> np.ndarray:
        """y has shape (..., m); returns channel indices of shape (...)."""
        t = y[..., 0]
        for s, lut in enumerate(self.stages):
            t = lut[t, y[..., s + 1]]
        return t

    def joint_at(self, bit_joint: JointPMF, q: int) -> JointPMF:
        """Exact p(c, t) when each bit observation has joint `bit_joint`
        (e.g. the design quantizer operating at a different noise level)."""
        return _combiner_push_forward(self, bit_joint, q)


def _cond_given_bits(bit_joint: JointPMF, q: int, m: int) -> np.ndarray:
    """p(y | b) lifted per symbol: out[c, j, :] = p(y_j | b_j(c))."""
    cond = bit_joint.p / bit_joint.p.sum(axis=1, keepdims=True)
    bits = symbol_bits(np.arange(q), m)  # (q, m)
    return cond[bits]  # (q, m, |Y|)


def _combiner_push_forward(sc: SymbolCombiner, bit_joint: JointPMF, q: int) -> JointPMF:
    lifted = _cond_given_bits(bit_joint, q, sc.m)  # (q, m, Y)
    # run the exact distribution through the cascade
    p_t_given_c = lifted[:, 0, :]  # (q, T0) with T0 = Y
    for s, lut in enumerate(sc.stages):
        t_card = sc.t_card
        nxt = np.zeros((q, t_card))
        y_next = lifted[:, s + 1, :]  # (q, Y)
        # p(t'|c) = sum_{a,b: lut[a,b]=t'} p(a|c) p(b|c)
        prod = p_t_given_c[:, :, None] * y_next[:, None, :]  # (q, A, B)
        flat = prod.reshape(q, -1)
        np.add.at(nxt.T, lut.reshape(-1), flat.T)
        p_t_given_c = nxt
    joint = p_t_given_c / q
    return JointPMF(joint)


def build_symbol_combiner(
    bq: BitQuantizer,
    fieldspec: FieldSpec,
    t_card: int,
    restarts: int = 5,
    seed: int = 0,
) -> SymbolCombiner:
    """Stage-wise IB cascade over the m bit-level quantizer outputs with
    the codeword symbol as relevant variable."""
    q = fieldspec.q
    m = fieldspec.m
    y_card = bq.joint_bt.ny
    if t_card < q:
        import warnings

        warnings.warn(
            f"t_card={t_card} < q={q}: channel index cannot preserve symbol "
            "identity even noiselessly"
        )
    lifted = _cond_given_bits(bq.joint_bt, q, m)  # (q, m, Y)
    if m == 1:
        if t_card >= y_card:
            joint = JointPMF(lifted[:, 0, :] / q)
            return SymbolCombiner([], joint, y_card, m, y_card)
        res = ib_compress(JointPMF(lifted[:, 0, :] / q), t_card, restarts, seed)
        lut = res.mapping.assignment[None, :]  # degenerate 1 x Y stage
        return SymbolCombiner([lut], res.joint_xt, t_card, m, y_card)

    stages = []
    p_t_given_c = lifted[:, 0, :]
    for s in range(m - 1):
        y_next = lifted[:, s + 1, :]
        prod = p_t_given_c[:, :, None] * y_next[:, None, :]
        dims = prod.shape[1:]
        joint = JointPMF(prod.reshape(q, -1) / q)
        res = ib_compress(joint, t_card, restarts, seed + s)
        lut = res.mapping.assignment.reshape(dims)
        stages.append(lut)
        p_t_given_c = res.joint_xt.p * q
    sc = SymbolCombiner(stages, res.joint_xt, t_card, m, y_card)
    return sc


def simulate_symbols(
    codeword: np.ndarray,
    model: ChannelModel,
    bq: BitQuantizer,
    sc: SymbolCombiner,
    rng: np.random.Generator | int,
) -> np.ndarray:
    """Transmit one codeword (or a batch with shape (..., N_v)) and return
    quantized-and-combined channel indices t_k of the same shape."""
    if isinstance(rng, (int, np.integer)):
        rng = np.random.default_rng(int(rng))
    symbols = np.asarray(codeword, dtype=np.int64)
    m = model.bits_per_symbol
    bits = symbol_bits(symbols, m)
    tx = 1.0 - 2.0 * bits
    rx = tx + model.sigma * rng.standard_normal(bits.shape)
    y = bq.indices(rx)
    if sc.m == 1 and not sc.stages:
        return y[..., 0]
    if sc.m == 1:
        return sc.stages[0][0, y[..., 0]]
    return sc.apply(y)
