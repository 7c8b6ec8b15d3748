"""Non-binary parity-check matrices, Tanner graphs, alist I/O and encoding."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .gf import FieldSpec, GFError


class AlistError(Exception):
    """Malformed code file."""

    def __init__(self, msg, line=None):
        if line is not None:
            msg = f"line {line}: {msg}"
        super().__init__(msg)
        self.line = line


class CodeError(Exception):
    pass


@dataclass
class ParityCheckMatrix:
    """Sparse H over GF(q): entries are (row, col, weight) with weight != 0."""

    n_rows: int
    n_cols: int
    entries: list[tuple[int, int, int]]
    fieldspec: FieldSpec

    def __post_init__(self):
        if self.n_rows <= 0 or self.n_cols <= 0:
            raise CodeError("matrix dimensions must be positive")
        seen = set()
        for r, c, w in self.entries:
            if not (0 <= r < self.n_rows and 0 <= c < self.n_cols):
                raise CodeError(f"entry ({r},{c}) out of bounds")
            if not 0 < w < self.fieldspec.q:
                raise CodeError(f"entry ({r},{c}) weight {w} not a nonzero field element")
            if (r, c) in seen:
                raise CodeError(f"duplicate entry ({r},{c})")
            seen.add((r, c))

    def dense(self) -> np.ndarray:
        H = np.zeros((self.n_rows, self.n_cols), dtype=np.int64)
        for r, c, w in self.entries:
            H[r, c] = w
        return H

    def syndrome(self, codeword) -> np.ndarray:
        """Row r -> sum_k h_{r,k} * c_k under GF arithmetic."""
        c = np.asarray(codeword, dtype=np.int64)
        if c.shape[-1] != self.n_cols:
            raise CodeError(f"codeword length {c.shape[-1]} != {self.n_cols}")
        out = np.zeros(c.shape[:-1] + (self.n_rows,), dtype=np.int64)
        gf = self.fieldspec
        for r, col, w in self.entries:
            out[..., r] ^= gf.mul_vec(w, c[..., col])
        return out

    def rank(self) -> int:
        _, piv = _rref(self.dense(), self.fieldspec)
        return len(piv)

    @property
    def rate(self) -> float:
        return (self.n_cols - self.rank()) / self.n_cols


@dataclass
class TannerGraph:
    """Edge lists on both sides of the bipartite graph, plus degree info."""

    check_edges: list[list[tuple[int, int]]]  # per check: (var, weight)
    var_edges: list[list[tuple[int, int]]]    # per var: (check, weight)
    d_c: int
    d_v: int
    regular: bool
    weight_alphabet: list[int]
    fieldspec: FieldSpec

    @classmethod
    def from_matrix(cls, H: ParityCheckMatrix) -> "TannerGraph":
        check_edges = [[] for _ in range(H.n_rows)]
        var_edges = [[] for _ in range(H.n_cols)]
        for r, c, w in sorted(H.entries):
            check_edges[r].append((c, w))
            var_edges[c].append((r, w))
        dcs = {len(e) for e in check_edges}
        dvs = {len(e) for e in var_edges}
        regular = len(dcs) == 1 and len(dvs) == 1
        weights = sorted({w for _, _, w in H.entries})
        return cls(
            check_edges,
            var_edges,
            max(dcs),
            max(dvs),
            regular,
            weights,
            H.fieldspec,
        )


def _tokens(text: str):
    """(line_number, ints) for each non-empty line."""
    out = []
    for i, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        try:
            out.append((i, [int(t) for t in stripped.split()]))
        except ValueError:
            raise AlistError(f"non-integer token in {stripped!r}", i)
    return out


def parse_alist(text: str, fieldspec: FieldSpec | None = None) -> ParityCheckMatrix:
    """Parse the non-binary alist dialect.

    Layout: `N_v N_c` / `q` / `max_dv max_dc` / column degrees / row degrees /
    per-column (row, value) pairs / optional per-row (col, value) pairs.
    Indices are 1-based; (0, 0) padding pairs are ignored.  A binary alist
    (no `q` line, bare indices in the entry lists) is accepted for m = 1.

    When no fieldspec is given, GF(q) with the default primitive polynomial
    for log2(q) bits is assumed.
    """
    lines = _tokens(text)
    if len(lines) < 4:
        raise AlistError("truncated file")
    pos = 0
    ln, head = lines[pos]
    if len(head) not in (2, 3):
        raise AlistError("expected 'N_v N_c' header", ln)
    n_v, n_c = head[0], head[1]
    pos += 1
    binary = False
    if len(head) == 3:
        q = head[2]
    elif len(lines[pos][1]) == 1:
        q = lines[pos][1][0]
        pos += 1
    else:
        q = 2
        binary = True
    if fieldspec is None:
        m = int(q).bit_length() - 1
        if q < 2 or (1 << m) != q:
            raise AlistError(f"field order {q} is not a power of two", lines[pos - 1][0])
        fieldspec = FieldSpec.for_m(m)
    if q != fieldspec.q:
        raise AlistError(f"file declares GF({q}) but field is GF({fieldspec.q})", lines[pos - 1][0])

    ln, maxdeg = lines[pos]
    if len(maxdeg) != 2:
        raise AlistError("expected 'max_col_degree max_row_degree'", ln)
    max_dv, max_dc = maxdeg
    pos += 1

    ln, col_deg = lines[pos]
    if len(col_deg) != n_v:
        raise AlistError(f"expected {n_v} column degrees, got {len(col_deg)}", ln)
    pos += 1
    ln, row_deg = lines[pos]
    if len(row_deg) != n_c:
        raise AlistError(f"expected {n_c} row degrees, got {len(row_deg)}", ln)
    pos += 1
    if max(col_deg) > max_dv or max(row_deg) > max_dc:
        raise AlistError("degree list exceeds declared maximum", ln)

    entries = []
    for col in range(n_v):
        if pos >= len(lines):
            raise AlistError(f"missing entry list for column {col + 1}")
        ln, vals = lines[pos]
        pos += 1
        if binary:
            pairs = [(v, 1) for v in vals]
        else:
            if len(vals) % 2:
                raise AlistError("odd number of tokens in (index, value) pair list", ln)
            pairs = list(zip(vals[0::2], vals[1::2]))
        pairs = [(r, w) for r, w in pairs if r != 0]
        if len(pairs) != col_deg[col]:
            raise AlistError(
                f"column {col + 1} lists {len(pairs)} entries, degree says {col_deg[col]}", ln
            )
        for r, w in pairs:
            if not 1 <= r <= n_c:
                raise AlistError(f"row index {r} out of range", ln)
            if not 0 < w < q:
                raise AlistError(f"entry value {w} not a nonzero element of GF({q})", ln)
            entries.append((r - 1, col, w))

    if not entries:
        raise AlistError("empty entry list")

    # the redundant per-row lists, when present, must agree
    row_entries = []
    for row in range(n_c):
        if pos >= len(lines):
            row_entries = None
            break
        ln, vals = lines[pos]
        pos += 1
        if binary:
            pairs = [(v, 1) for v in vals]
        else:
            if len(vals) % 2:
                raise AlistError("odd number of tokens in (index, value) pair list", ln)
            pairs = list(zip(vals[0::2], vals[1::2]))
        for c, w in pairs:
            if c != 0:
                row_entries.append((row, c - 1, w))
    if row_entries:
        if sorted(row_entries) != sorted(entries):
            raise AlistError("per-row entry lists disagree with per-column lists")

    try:
        return ParityCheckMatrix(n_c, n_v, entries, fieldspec)
    except CodeError as e:
        raise AlistError(str(e))


def serialize_alist(H: ParityCheckMatrix) -> str:
    by_col = [[] for _ in range(H.n_cols)]
    by_row = [[] for _ in range(H.n_rows)]
    for r, c, w in sorted(H.entries, key=lambda e: (e[1], e[0])):
        by_col[c].append((r + 1, w))
        by_row[r].append((c + 1, w))
    col_deg = [len(x) for x in by_col]
    row_deg = [len(x) for x in by_row]
    lines = [
        f"{H.n_cols} {H.n_rows}",
        f"{H.fieldspec.q}",
        f"{max(col_deg)} {max(row_deg)}",
        " ".join(map(str, col_deg)),
        " ".join(map(str, row_deg)),
    ]
    for pairs in by_col:
        lines.append(" ".join(f"{i} {w}" for i, w in pairs))
    for pairs in by_row:
        lines.append(" ".join(f"{i} {w}" for i, w in sorted(pairs)))
    return "\n".join(lines) + "\n"


def _rref(H: np.ndarray, gf: FieldSpec):
    """Reduced row echelon form over GF(q) with partial pivoting.

    Returns (R, pivot_cols).
    """
    R = H.copy()
    n_rows, n_cols = R.shape
    pivots = []
    row = 0
    for col in range(n_cols):
        if row >= n_rows:
            break
        nz = np.flatnonzero(R[row:, col])
        if nz.size == 0:
            continue
        p = row + int(nz[0])
        if p != row:
            R[[row, p]] = R[[p, row]]
        inv = gf.inv(int(R[row, col]))
        R[row] = gf.mul_vec(inv, R[row])
        for r in range(n_rows):
            if r != row and R[r, col]:
                R[r] ^= gf.mul_vec(int(R[r, col]), R[row])
        pivots.append(col)
        row += 1
    return R, pivots


class Encoder:
    """Systematic encoder from the RREF of H.

    Pivot columns become parity positions, free columns carry information
    symbols; works for any full-row-rank H regardless of column order.
    """

    def __init__(self, H: ParityCheckMatrix):
        self.H = H
        gf = H.fieldspec
        R, pivots = _rref(H.dense(), gf)
        if len(pivots) < H.n_rows:
            raise CodeError(
                "rank-deficient parity-check matrix "
                f"(rank {len(pivots)} < {H.n_rows}); effective rate "
                f"{(H.n_cols - len(pivots)) / H.n_cols:.4f}; "
                "systematic encoding refused"
            )
        self.pivots = np.array(pivots, dtype=np.int64)
        self.free = np.array(
            [c for c in range(H.n_cols) if c not in set(pivots)], dtype=np.int64
        )
        self._R_free = R[:, self.free]
        self.k = len(self.free)

    def encode(self, info) -> np.ndarray:
        info = np.asarray(info, dtype=np.int64)
        if info.shape != (self.k,):
            raise CodeError(f"info length {info.shape} != ({self.k},)")
        gf = self.H.fieldspec
        cw = np.zeros(self.H.n_cols, dtype=np.int64)
        cw[self.free] = info
        # in characteristic 2, moving the free-column terms across the
        # equality is a no-op, so parity is just the XOR-accumulated product
        prods = gf.mul_vec(self._R_free, info[None, :])
        if self.k:
            cw[self.pivots] = np.bitwise_xor.reduce(prods, axis=1)
        return cw


def encode(H: ParityCheckMatrix, info) -> np.ndarray:
    return Encoder(H).encode(info)
