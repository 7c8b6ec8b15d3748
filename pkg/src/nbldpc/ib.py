"""Information bottleneck engine.

Produces deterministic compression mappings t = f(y) that maximize I(X;T)
for a given joint p(x,y) and output cardinality, together with the
push-forward joint p(x,t).  The clustering is a zero-temperature
(deterministic-mapping) IB: repeated re-assignment of every y to the
cluster whose conditional p(x|t) is KL-closest, which monotonically
reduces I(X;Y) - I(X;T).  Small problems get an extra sequential
draw-and-merge polish pass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PROB_FLUSH = 1e-300  # probabilities below this are flushed to exact zero
_LOG2_FLOOR = -1e6   # stand-in for log2(0) in cost matrices
_CHUNK = 16384       # row block size for large cost matrices


class PMFError(Exception):
    """Malformed probability input."""


def flush_tiny(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    return np.where(np.abs(p) < PROB_FLUSH, 0.0, p)


@dataclass
class JointPMF:
    """Discrete joint distribution p(x, y) as a dense (|X|, |Y|) matrix."""

    p: np.ndarray

    def __post_init__(self):
        self.p = flush_tiny(self.p)
        if self.p.ndim != 2:
            raise PMFError("joint must be a 2-D matrix")
        if np.any(self.p < 0):
            raise PMFError("negative probability entry")
        s = self.p.sum()
        if abs(s - 1.0) > 1e-9:
            raise PMFError(f"joint sums to {s!r}, expected 1")

    @property
    def nx(self) -> int:
        return self.p.shape[0]

    @property
    def ny(self) -> int:
        return self.p.shape[1]

    def px(self) -> np.ndarray:
        return self.p.sum(axis=1)

    def py(self) -> np.ndarray:
        return self.p.sum(axis=0)


def mutual_information(j: JointPMF | np.ndarray) -> float:
    """I(X;Y) in bits, with the 0*log(0) := 0 convention."""
    p = j.p if isinstance(j, JointPMF) else np.asarray(j, dtype=np.float64)
    px = p.sum(axis=1)
    py = p.sum(axis=0)
    denom = np.outer(px, py)
    nz = p > 0
    return float(np.sum(p[nz] * np.log2(p[nz] / denom[nz])))


def entropy(p: np.ndarray) -> float:
    p = np.asarray(p, dtype=np.float64)
    nz = p > 0
    return float(-np.sum(p[nz] * np.log2(p[nz])))


def kl_divergence(p, q) -> float:
    """KL(p || q) in bits; +inf when absolute continuity fails."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    nz = p > 0
    if np.any(q[nz] <= 0):
        return float("inf")
    return float(np.sum(p[nz] * np.log2(p[nz] / q[nz])))


@dataclass
class DeterministicMapping:
    """Lookup table y -> t: array of length |Y| with values in [0, t_card)."""

    assignment: np.ndarray
    t_card: int

    def __post_init__(self):
        self.assignment = np.asarray(self.assignment, dtype=np.int64)
        if self.assignment.size and (
            self.assignment.min() < 0 or self.assignment.max() >= self.t_card
        ):
            raise PMFError("mapping entry outside [0, t_card)")

    def __len__(self):
        return len(self.assignment)


@dataclass
class IBResult:
    mapping: DeterministicMapping
    joint_xt: JointPMF
    i_xt: float
    i_yt: float
    i_xy: float


def push_forward(joint_xy: np.ndarray, assignment: np.ndarray, t_card: int) -> np.ndarray:
    """Exact p(x,t) obtained by summing y columns into their clusters."""
    nx = joint_xy.shape[0]
    out = np.zeros((t_card, nx))
    np.add.at(out, assignment, joint_xy.T)
    return out.T


def _safe_log2(q: np.ndarray) -> np.ndarray:
    out = np.full_like(q, _LOG2_FLOOR)
    nz = q > 0
    out[nz] = np.log2(q[nz])
    return out


def _cluster_joint(A, py, assignment, t_card):
    """Q[t, x] = sum of p(x,y) over members of t."""
    Q = np.zeros((t_card, A.shape[1]))
    np.add.at(Q, assignment, A * py[:, None])
    return Q


def _objective(Q: np.ndarray) -> float:
    """I(X;T) from the cluster joint Q[t, x]."""
    return mutual_information(Q.T)


def _assign_sweeps(A, py, assignment, t_card, max_sweeps=60):
    """Batch re-assignment sweeps over all y at once, chunked row-wise so
    the (Y, T) cost matrix never fully materializes.  Returns a fixed-point
    assignment.  Ties in cost resolve toward the lowest cluster index.

    The score pass runs in single precision; the cluster joints and the
    objective stay double, so only the (already heuristic) assignment
    search sees the reduced precision.
    """
    ny = A.shape[0]
    A32 = A.astype(np.float32)
    Q = _cluster_joint(A, py, assignment, t_card)
    prev_obj = None
    for _ in range(max_sweeps):
        qt = Q.sum(axis=1, keepdims=True)
        with np.errstate(invalid="ignore", divide="ignore"):
            cond = np.where(qt > 0, Q / np.maximum(qt, PROB_FLUSH), 0.0)
        logc = _safe_log2(cond).T.astype(np.float32)  # (X, T)
        new = np.empty(ny, dtype=np.int64)
        picked_cost = np.empty(ny)
        for lo in range(0, ny, _CHUNK):
            hi = min(lo + _CHUNK, ny)
            score = A32[lo:hi] @ logc  # negated KL cost, up to a per-y constant
            idx = np.argmax(score, axis=1)
            new[lo:hi] = idx
            picked_cost[lo:hi] = -score[np.arange(hi - lo), idx]
        # keep every cluster populated: hand the worst-fitting points to
        # clusters that would otherwise die
        counts = np.bincount(new, minlength=t_card)
        empties = np.flatnonzero(counts == 0)
        if empties.size and ny >= t_card:
            worst = np.argsort(-picked_cost, kind="stable")
            k = 0
            for t in empties:
                while k < ny and counts[new[worst[k]]] <= 1:
                    k += 1
                if k >= ny:
                    break
                y = int(worst[k])
                counts[new[y]] -= 1
                new[y] = t
                counts[t] += 1
                k += 1
        if np.array_equal(new, assignment):
            break
        assignment = new
        Q = _cluster_joint(A, py, assignment, t_card)
        # the objective is monotone between repairs; once it plateaus the
        # remaining churn is mass-free relabeling, so stop early
        obj = _objective(Q)
        if prev_obj is not None and obj - prev_obj < 1e-8:
            break
        prev_obj = obj
    return assignment, Q


def _plogp(r: np.ndarray, axis=None):
    with np.errstate(invalid="ignore", divide="ignore"):
        return np.where(r > 0, r * _safe_log2(r), 0.0).sum(axis=axis)


def _sequential_polish(A, py, assignment, t_card, max_passes=60):
    """Draw-and-merge refinement: one y at a time, true merge cost.

    The merge cost of putting y into cluster t is the I(X;T) loss of that
    merge; an empty cluster costs zero.  Ties resolve toward the lowest
    cluster index (costs are rounded to 1e-15 so float noise cannot flip a
    genuine tie).
    """
    ny = A.shape[0]
    Q = _cluster_joint(A, py, assignment, t_card)
    for _ in range(max_passes):
        changed = False
        for y in range(ny):
            wy = py[y]
            if wy == 0:
                continue
            t_old = assignment[y]
            Q[t_old] = np.maximum(Q[t_old] - A[y] * wy, 0.0)
            qt = Q.sum(axis=1)
            merged = Q + wy * A[y][None, :]
            mt = qt + wy
            h_term = _plogp(Q, axis=1) + _plogp(wy * A[y]) - _plogp(merged, axis=1)
            mass_term = (
                np.where(mt > 0, mt * _safe_log2(mt), 0.0)
                - np.where(qt > 0, qt * _safe_log2(qt), 0.0)
                - wy * np.log2(wy)
            )
            cost = np.round((h_term + mass_term) / 1e-15) * 1e-15
            t_new = int(np.argmin(cost))
            Q[t_new] += A[y] * wy
            if t_new != t_old:
                assignment[y] = t_new
                changed = True
        if not changed:
            break
    return assignment, Q


def _canonical_relabel(assignment, Q):
    """Reorder used cluster labels by ascending E[x-index | t] so repeated
    runs serialize identically; ties break on the smallest member y."""
    t_card = Q.shape[0]
    qt = Q.sum(axis=1)
    used = np.flatnonzero(qt > 0)
    if used.size == 0:
        return assignment, Q
    xs = np.arange(Q.shape[1])
    ex = (Q[used] @ xs) / qt[used]
    first_member = np.full(t_card, np.iinfo(np.int64).max, dtype=np.int64)
    uniq, first_idx = np.unique(assignment, return_index=True)
    first_member[uniq] = first_idx
    order = used[np.lexsort((first_member[used], np.round(ex / 1e-12) * 1e-12))]
    relabel = np.zeros(t_card, dtype=np.int64)
    relabel[order] = np.arange(order.size)
    new_assignment = relabel[assignment]
    new_Q = np.zeros_like(Q)
    new_Q[: order.size] = Q[order]
    return new_assignment, new_Q


def ib_compress(
    j: JointPMF,
    t_card: int,
    restarts: int = 10,
    seed: int = 0,
    init_assignment: np.ndarray | None = None,
    polish_limit: int = 20000,
) -> IBResult:
    """Compress Y to T of cardinality t_card, maximizing I(X;T).

    Best of `restarts` randomized initializations; `init_assignment`, when
    given, replaces the first restart (used for warm starts in density
    evolution).  Zero-probability y columns are pruned before clustering
    and mapped to cluster 0 afterwards.
    """
    if not 1 <= t_card <= j.ny:
        raise PMFError(f"t_card={t_card} outside [1, {j.ny}]")
    P = j.p
    py_full = P.sum(axis=0)
    keep = np.flatnonzero(py_full > 0)
    py_cols = py_full[keep]
    i_xy = mutual_information(j)

    # Columns with identical conditionals p(x|y) can share a cluster in
    # some optimal partition, so merge them up front.  np.unique also
    # fixes a canonical group order, making the whole algorithm
    # equivariant to any relabeling of Y: symmetric design joints yield
    # symmetric tables and identical MI.
    cond_cols = np.ascontiguousarray((P[:, keep] / py_cols[None, :]).T)  # (Y, X)
    _, group_of = np.unique(np.round(cond_cols, 12), axis=0, return_inverse=True)
    group_of = group_of.reshape(-1)
    ny = int(group_of.max()) + 1
    py = np.bincount(group_of, weights=py_cols, minlength=ny)
    sums = np.zeros((ny, P.shape[0]))
    np.add.at(sums, group_of, P[:, keep].T)
    A = sums / py[:, None]
    tc = min(t_card, ny)

    ss = np.random.SeedSequence(seed)
    child_seeds = ss.spawn(max(restarts, 1))

    best = None
    for r in range(max(restarts, 1)):
        if r == 0 and init_assignment is not None:
            warm_cols = np.asarray(init_assignment, dtype=np.int64)[keep]
            _, first_idx = np.unique(group_of, return_index=True)
            assignment = np.minimum(warm_cols[first_idx], tc - 1)
        elif ny <= tc:
            assignment = np.arange(ny)
        else:
            rng = np.random.default_rng(child_seeds[r])
            # seed clusters at t_card distinct columns drawn by mass, then
            # one nearest-centroid assignment for everything else
            centers = rng.choice(ny, size=tc, replace=False, p=py / py.sum())
            logc = _safe_log2(A[centers]).T
            assignment = np.empty(ny, dtype=np.int64)
            for lo in range(0, ny, _CHUNK):
                hi = min(lo + _CHUNK, ny)
                assignment[lo:hi] = np.argmax(A[lo:hi] @ logc, axis=1)
            assignment[centers] = np.arange(tc)
        assignment, Q = _assign_sweeps(A, py, assignment, tc)
        if ny * tc <= polish_limit:
            assignment, Q = _sequential_polish(A, py, assignment, tc)
        i_xt = _objective(Q)
        if best is None or i_xt > best[0] + 1e-15:
            best = (i_xt, assignment, Q)

    _, assignment, Q = best
    assignment, Q = _canonical_relabel(assignment, Q)

    full_assignment = np.zeros(j.ny, dtype=np.int64)
    full_assignment[keep] = assignment[group_of]
    joint_xt = push_forward(P, full_assignment, t_card)
    mapping = DeterministicMapping(full_assignment, t_card)
    i_xt = mutual_information(joint_xt)
    pt = joint_xt.sum(axis=0)
    i_yt = entropy(pt)  # deterministic mapping: I(Y;T) = H(T)
    return IBResult(mapping, JointPMF(joint_xt), i_xt, i_yt, i_xy)


def exhaustive_partition_search(j: JointPMF, t_card: int) -> tuple[float, np.ndarray]:
    """Brute-force oracle: best deterministic mapping over all |T|^|Y|
    assignments.  Only feasible for small problems."""
    ny = j.ny
    n_assign = t_card ** ny
    if n_assign > 2_000_000:
        raise PMFError("alphabet too large for exhaustive search")
    grids = np.indices((t_card,) * ny).reshape(ny, -1).T  # (n_assign, ny)
    onehot = np.zeros((n_assign, ny, t_card))
    np.put_along_axis(onehot, grids[:, :, None], 1.0, axis=2)
    p_xt = np.einsum("xy,nyt->nxt", j.p, onehot)
    px = j.px()
    pt = p_xt.sum(axis=1)
    denom = px[None, :, None] * pt[:, None, :]
    with np.errstate(invalid="ignore", divide="ignore"):
        terms = np.where(p_xt > 0, p_xt * np.log2(p_xt / np.maximum(denom, PROB_FLUSH)), 0.0)
    mis = terms.sum(axis=(1, 2))
    k = int(np.argmax(mis))
    return float(mis[k]), grids[k]
