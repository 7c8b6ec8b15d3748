"""Table construction: per-stage design joints, sizes, serialization."""

import numpy as np
import pytest

from nbldpc.gf import FieldSpec
from nbldpc.ib import JointPMF, mutual_information
from nbldpc.lut import (
    BuildConfig,
    BuildError,
    NodeLUT,
    build_conv_stage,
    build_decision_table,
    build_inv_mult_table,
    build_mult_table,
    build_var_stage,
    channel_decision_table,
    deserialize_blueprint,
    format_memory_report,
    memory_report,
    run_density_evolution,
    serialize_blueprint,
)
from tests.conftest import SMALL_CARDS


def noiseless_joint(q):
    return JointPMF(np.eye(q) / q)


def random_joint(rng, nx, ny):
    p = rng.random((nx, ny))
    return JointPMF(p / p.sum())


class TestMultTable:
    def test_identity_weight_is_recompression(self, gf4):
        j = random_joint(np.random.default_rng(0), 4, 10)
        lut = build_mult_table(j, [1], gf4, 10, restarts=3)
        assert lut.input_dims == (1, 10)
        assert mutual_information(lut.joint_ct) == pytest.approx(
            mutual_information(j), abs=1e-12
        )

    def test_mult_then_inv_mult_noiseless(self, gf4):
        j = noiseless_joint(4)
        mult = build_mult_table(j, [1, 2, 3], gf4, 4, restarts=3)
        assert mutual_information(mult.joint_ct) == pytest.approx(2.0, abs=1e-12)
        inv = build_inv_mult_table(mult.joint_ct, [1, 2, 3], gf4, 4, restarts=3)
        assert mutual_information(inv.joint_ct) == pytest.approx(2.0, abs=1e-12)

    def test_weight_rows_permute_symbol(self, gf4):
        # with t_card = q the noiseless table must act as h * c per weight row
        j = noiseless_joint(4)
        mult = build_mult_table(j, [1, 2, 3], gf4, 4, restarts=3)
        post = mult.joint_ct.p / mult.joint_ct.p.sum(axis=0, keepdims=True)
        for wi, h in enumerate([1, 2, 3]):
            for c in range(4):
                t = mult.mapping[wi, c]
                assert post[gf4.mul(h, c), t] == pytest.approx(1.0)

    def test_empty_weights_rejected(self, gf4):
        with pytest.raises(BuildError):
            build_mult_table(noiseless_joint(4), [], gf4, 4)


class TestConvStage:
    def test_binary_example(self, gf2):
        a = JointPMF([[0.45, 0.05], [0.05, 0.45]])  # p(s_a=0 | t_a=0) = 0.9
        b = JointPMF([[0.40, 0.10], [0.10, 0.40]])  # 0.8
        lut = build_conv_stage(a, b, 4, restarts=3)
        with np.errstate(invalid="ignore"):  # unused clusters have zero mass
            post = lut.joint_ct.p / lut.joint_ct.p.sum(axis=0, keepdims=True)
        t = lut.mapping[0, 0]
        assert post[0, t] == pytest.approx(0.9 * 0.8 + 0.1 * 0.2, abs=1e-12)  # 0.74

    def test_unknown_uniform_addend_erases_information(self, gf4):
        a = random_joint(np.random.default_rng(1), 4, 6)
        b = JointPMF(np.full((4, 3), 1.0 / 12))  # uniform, independent of t_b
        lut = build_conv_stage(a, b, 6, restarts=3)
        assert mutual_information(lut.joint_ct) == pytest.approx(0.0, abs=1e-12)
        # sum of uniform symbols stays uniform
        assert np.allclose(lut.joint_ct.px(), 0.25, atol=1e-12)

    def test_oracle_triple_loop(self, gf4):
        rng = np.random.default_rng(2)
        a, b = random_joint(rng, 4, 5), random_joint(rng, 4, 3)
        lut = build_conv_stage(a, b, 15, restarts=2)
        # brute-force p(s, t_a, t_b), then push through the mapping
        want = np.zeros((4, 5, 3))
        for x in range(4):
            for xb in range(4):
                want[x ^ xb] += a.p[x][:, None] * b.p[xb][None, :]
        got = np.zeros((4, lut.t_card))
        for ta in range(5):
            for tb in range(3):
                got[:, lut.mapping[ta, tb]] += want[:, ta, tb]
        assert np.allclose(got, lut.joint_ct.p, atol=1e-12)

    def test_field_mismatch(self, gf4):
        with pytest.raises(BuildError):
            build_conv_stage(noiseless_joint(4), noiseless_joint(8), 8)


class TestVarStage:
    def test_uninformative_second_input_preserves_mi(self, gf4):
        a = random_joint(np.random.default_rng(8), 4, 6)
        prior = a.px()
        b = JointPMF(np.repeat(prior[:, None] / 3, 3, axis=1))  # y_b independent of c
        lut = build_var_stage(a, b, 6, restarts=3)
        assert mutual_information(lut.joint_ct) == pytest.approx(
            mutual_information(a), abs=1e-12
        )

    def test_two_observations_combine(self, gf4):
        # symmetric q-ary channel, p(y = c) = 0.7: one look gives I < 2 bits,
        # two independent looks strictly more, table at full cardinality lossless
        p = np.full((4, 4), 0.1 / 4)
        np.fill_diagonal(p, 0.7 / 4)
        j = JointPMF(p)
        one = mutual_information(j)
        lut = build_var_stage(j, j, 16, restarts=3)
        two = mutual_information(lut.joint_ct)
        assert one < two <= 2.0 + 1e-12
        # exact product-joint oracle
        cond = j.p / j.px()[:, None]
        prod = j.p[:, :, None] * cond[:, None, :]
        assert two == pytest.approx(mutual_information(JointPMF(prod.reshape(4, -1))), abs=1e-12)

    def test_prior_mismatch_rejected(self, gf4):
        a = noiseless_joint(4)
        b = JointPMF(np.array([[0.7], [0.1], [0.1], [0.1]]))
        with pytest.raises(BuildError):
            build_var_stage(a, b, 4)


class TestDecision:
    def test_noiseless_argmax(self, gf4):
        a = noiseless_joint(4)
        b = JointPMF(np.full((4, 3), 1.0 / 12))  # uninformative second input
        lut = build_decision_table(a, b)
        for ya in range(4):
            assert np.all(lut.mapping[ya] == ya)

    def test_zero_mass_and_tie_default(self, gf4):
        p = np.zeros((4, 2))
        p[:, 0] = 0.25
        j = JointPMF(p)
        lut = build_decision_table(j, j)
        assert lut.mapping[0, 0] == 0  # four-way tie breaks to 0
        assert lut.mapping[1, 1] == 0  # zero-mass column default
        assert lut.t_card == 4

    def test_channel_decision(self, gf4):
        j = JointPMF(np.array([[0.1, 0.3], [0.2, 0.1], [0.15, 0.05], [0.05, 0.05]]))
        assert channel_decision_table(j).tolist() == [1, 0]


class TestSizes:
    def test_published_mult_row(self):
        dummy = JointPMF(np.full((4, 256), 1 / 1024))
        lut = NodeLUT((3, 512), np.zeros((3, 512), dtype=np.int64), dummy, 256)
        assert lut.table_bytes() == 1536  # 1536 entries x 8 bits

    def test_sub_byte_packing(self):
        dummy = JointPMF(np.full((4, 4), 1 / 16))
        lut = NodeLUT((512, 256), np.zeros((512, 256), dtype=np.int64), dummy, 4)
        assert lut.table_bytes() == 512 * 256 * 2 // 8

    def test_mapping_validation(self):
        dummy = JointPMF(np.full((4, 4), 1 / 16))
        with pytest.raises(BuildError):
            NodeLUT((2, 2), np.full((2, 2), 7), dummy, 4)
        with pytest.raises(BuildError):
            NodeLUT((2, 3), np.zeros((2, 2), dtype=np.int64), dummy, 4)

    def test_memory_report_consistency(self, small_blueprint):
        rep = memory_report(small_blueprint)
        assert rep["total_bytes"] == (
            rep["mult_pair_bytes"] + rep["conv_bytes"] + rep["var_bytes"] + rep["decision_bytes"]
        )
        assert rep["total_kb"] == rep["total_bytes"] / 1000.0
        txt = format_memory_report(small_blueprint)
        assert "ceil(log2 |T|)" in txt
        assert "215.0" in txt


class TestBuild:
    def test_degree_validation(self, gf4):
        cfg = BuildConfig(gf4, 1, 6, [1], rate=0.5, cardinalities=dict(SMALL_CARDS))
        with pytest.raises(BuildError):
            run_density_evolution(cfg)

    def test_small_cardinality_warns(self, gf4):
        cards = dict(SMALL_CARDS, t_mult=3)
        cfg = BuildConfig(gf4, 2, 3, [1], rate=0.5, i_max=1, cardinalities=cards)
        with pytest.warns(UserWarning):
            run_density_evolution(cfg)

    def test_structure(self, small_blueprint):
        bp = small_blueprint
        assert len(bp.iterations) == bp.i_max == 6
        for it in bp.iterations:
            assert len(it.conv_stages) == bp.d_c - 2
            assert len(it.var_stages) == bp.d_v - 1
            assert it.decision is not None
        assert len(bp.mi_trajectory) == 6
        assert all(0 <= v <= 2.0 + 1e-12 for v in bp.mi_trajectory)

    def test_trajectory_non_decreasing(self, small_blueprint):
        mi = small_blueprint.mi_trajectory
        assert all(b >= a - 1e-9 for a, b in zip(mi, mi[1:]))

    def test_rebuild_reproducible(self, gf4):
        cfg = BuildConfig(
            gf4, 2, 3, [1, 2], rate=1.0 / 3, i_max=2, w=4, n_fine=200,
            cardinalities=dict(SMALL_CARDS), seed=5,
        )
        a = run_density_evolution(cfg)
        b = run_density_evolution(cfg)
        assert serialize_blueprint(a) == serialize_blueprint(b)
        assert a.hash() == b.hash()


class TestSerialization:
    def test_roundtrip_byte_exact(self, small_blueprint):
        blob = serialize_blueprint(small_blueprint)
        bp2 = deserialize_blueprint(blob)
        assert serialize_blueprint(bp2) == blob
        assert bp2.hash() == small_blueprint.hash()
        assert bp2.fieldspec.q == 4
        assert bp2.cardinalities == small_blueprint.cardinalities
        it1 = small_blueprint.iterations[-1]
        it2 = bp2.iterations[-1]
        assert np.array_equal(it1.mult.mapping, it2.mult.mapping)
        assert np.allclose(it1.var_stages[-1].joint_ct.p, it2.var_stages[-1].joint_ct.p, atol=0)

    def test_bad_magic(self):
        with pytest.raises(BuildError):
            deserialize_blueprint(b"XXXX" + b"\0" * 64)

    def test_save_load_with_sidecar(self, small_blueprint, tmp_path):
        from nbldpc.lut import load_blueprint, save_blueprint

        path = tmp_path / "bp.nblb"
        save_blueprint(small_blueprint, path)
        assert load_blueprint(path).hash() == small_blueprint.hash()
        sidecar = (path.parent / "bp.nblb.mi.csv").read_text().splitlines()
        assert sidecar[0] == "iteration,i_ct_bits"
        assert len(sidecar) == 1 + small_blueprint.i_max
        assert float(sidecar[1].split(",")[1]) == small_blueprint.mi_trajectory[0]
