"""IB engine: mutual information, KL, compression quality and invariants."""

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nbldpc.ib import (
    JointPMF,
    PMFError,
    entropy,
    exhaustive_partition_search,
    ib_compress,
    kl_divergence,
    mutual_information,
    push_forward,
)


def random_joint(rng, nx, ny):
    p = rng.random((nx, ny))
    return JointPMF(p / p.sum())


class TestMutualInformation:
    def test_noiseless_binary(self):
        assert mutual_information(JointPMF([[0.5, 0.0], [0.0, 0.5]])) == pytest.approx(1.0)

    def test_independent(self):
        assert mutual_information(JointPMF(np.full((2, 2), 0.25))) == 0.0

    def test_bsc_like(self):
        # equals 1 - H_b(0.2)
        got = mutual_information(JointPMF([[0.4, 0.1], [0.1, 0.4]]))
        hb = -(0.2 * np.log2(0.2) + 0.8 * np.log2(0.8))
        assert got == pytest.approx(1.0 - hb, abs=1e-12)
        assert got == pytest.approx(0.27807, abs=5e-6)

    def test_bad_normalization_rejected(self):
        with pytest.raises(PMFError):
            JointPMF([[0.5, 0.5], [0.5, 0.5]])
        with pytest.raises(PMFError):
            JointPMF([[1.1, -0.1]])


class TestKL:
    def test_identical(self):
        assert kl_divergence([0.3, 0.7], [0.3, 0.7]) == 0.0

    def test_closed_form(self):
        assert kl_divergence([1.0, 0.0], [0.5, 0.5]) == pytest.approx(1.0)
        assert kl_divergence([0.8, 0.2], [0.5, 0.5]) == pytest.approx(0.27807, abs=5e-6)

    def test_absolute_continuity_sentinel(self):
        assert kl_divergence([0.5, 0.5], [1.0, 0.0]) == float("inf")


class TestCompress:
    def test_no_compression_is_lossless(self):
        j = random_joint(np.random.default_rng(0), 3, 7)
        res = ib_compress(j, 7, restarts=3, seed=0)
        assert res.i_xt == pytest.approx(res.i_xy, abs=1e-12)

    def test_duplicate_columns_merge(self):
        p = np.array([[0.2, 0.2, 0.05], [0.05, 0.05, 0.45]])
        p[:, 1] = p[:, 0]  # identical conditional and mass
        j = JointPMF(p / p.sum())
        res = ib_compress(j, 2, restarts=5, seed=0)
        a = res.mapping.assignment
        assert a[0] == a[1]
        assert res.i_xt == pytest.approx(res.i_xy, abs=1e-12)

    def test_known_partition(self):
        # |X|=2, |Y|=4, p(x=0|y) = (0.9, 0.88, 0.12, 0.1): optimum splits
        # the similar pairs
        px0 = np.array([0.9, 0.88, 0.12, 0.1])
        p = np.vstack([px0, 1 - px0]) / 4.0
        j = JointPMF(p)
        res = ib_compress(j, 2, restarts=10, seed=3)
        a = res.mapping.assignment
        assert a[0] == a[1] and a[2] == a[3] and a[0] != a[2]
        best, _ = exhaustive_partition_search(j, 2)
        assert res.i_xt == pytest.approx(best, abs=1e-12)

    def test_oracle_small_batch(self):
        rng = np.random.default_rng(42)
        hits = 0
        for _ in range(20):
            j = random_joint(rng, 3, 7)
            res = ib_compress(j, 3, restarts=20, seed=7)
            best, _ = exhaustive_partition_search(j, 3)
            hits += res.i_xt >= best - 1e-9
        assert hits >= 18

    def test_monotone_in_cardinality(self):
        j = random_joint(np.random.default_rng(5), 4, 12)
        vals = [ib_compress(j, t, restarts=8, seed=0).i_xt for t in (2, 3, 4, 6, 12)]
        assert all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))

    def test_t_card_out_of_range(self):
        j = random_joint(np.random.default_rng(0), 2, 4)
        with pytest.raises(PMFError):
            ib_compress(j, 0)
        with pytest.raises(PMFError):
            ib_compress(j, 5)

    def test_zero_column_pruned_to_cluster_zero(self):
        p = np.array([[0.5, 0.0, 0.1], [0.2, 0.0, 0.2]])
        j = JointPMF(p)
        res = ib_compress(j, 2, restarts=3, seed=0)
        assert res.mapping.assignment[1] == 0
        assert res.joint_xt.p.sum() == pytest.approx(1.0)

    def test_permutation_equivariance(self):
        rng = np.random.default_rng(11)
        j = random_joint(rng, 4, 20)
        perm = rng.permutation(20)
        r1 = ib_compress(j, 5, restarts=6, seed=2)
        r2 = ib_compress(JointPMF(j.p[:, perm]), 5, restarts=6, seed=2)
        assert np.array_equal(r1.mapping.assignment[perm], r2.mapping.assignment)
        # summation order in the push-forward differs, hence the tolerance
        assert r1.i_xt == pytest.approx(r2.i_xt, abs=1e-12)

    def test_warm_start_used(self):
        j = random_joint(np.random.default_rng(9), 4, 30)
        ref = ib_compress(j, 6, restarts=10, seed=1)
        warm = ib_compress(j, 6, restarts=1, seed=99, init_assignment=ref.mapping.assignment)
        assert warm.i_xt >= ref.i_xt - 1e-9


@st.composite
def joints(draw):
    nx = draw(st.integers(2, 4))
    ny = draw(st.integers(2, 10))
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    p = rng.random((nx, ny)) ** draw(st.sampled_from([1, 3]))
    return JointPMF(p / p.sum())


@given(joints(), st.integers(1, 4))
@settings(max_examples=40, deadline=None)
def test_data_processing_inequality(j, t_card):
    t_card = min(t_card, j.ny)
    res = ib_compress(j, t_card, restarts=3, seed=0)
    assert res.i_xt <= res.i_xy + 1e-12
    # marginal consistency of the push-forward
    assert np.allclose(res.joint_xt.p.sum(axis=1), j.px(), atol=1e-12)


@given(joints())
@settings(max_examples=25, deadline=None)
def test_push_forward_entropy_bound(j):
    res = ib_compress(j, min(3, j.ny), restarts=2, seed=4)
    pt = res.joint_xt.p.sum(axis=0)
    assert res.i_yt == pytest.approx(entropy(pt), abs=1e-12)
    assert push_forward(j.p, res.mapping.assignment, min(3, j.ny)).shape[0] == j.nx
