import math

import numpy as np
import pytest

from histopatch.errors import ShapeMismatch
from histopatch.nn.layers import Conv2d, Dense, GlobalAvgPool
from histopatch.nn.model import (
    Model,
    build_compact_cnn,
    build_model,
    images_to_batch,
    load_model,
    save_model,
)
from histopatch.scaling import BASE_SPEC, ArchSpec, variant_spec


class TestBuildModel:
    def test_b0_forward_contract(self):
        spec = variant_spec(0)
        model = build_model(spec, num_classes=4, init_seed=0)
        x = np.zeros((1, 3, spec.input_resolution, spec.input_resolution), np.float32)
        probs = model.predict_probs(x)
        assert probs.shape == (1, 4)

    @pytest.mark.parametrize("phi", [0, 1, 2, 3])
    def test_shape_propagation_all_variants(self, phi):
        spec = variant_spec(phi)
        model = build_model(spec, num_classes=4, init_seed=phi)
        x = np.zeros((1, 3, spec.input_resolution, spec.input_resolution), np.float32)
        probs = model.predict_probs(x)
        assert probs.shape == (1, 4)
        assert np.isfinite(probs).all()

    def test_same_seed_identical_weights(self):
        spec = variant_spec(0)
        a = build_model(spec, 4, init_seed=42, input_resolution=32)
        b = build_model(spec, 4, init_seed=42, input_resolution=32)
        for name, t in a.named_tensors().items():
            assert np.array_equal(t, b.named_tensors()[name]), name

    def test_different_seeds_differ(self):
        spec = variant_spec(0)
        a = build_model(spec, 4, init_seed=1, input_resolution=32)
        b = build_model(spec, 4, init_seed=2, input_resolution=32)
        assert not np.array_equal(a.named_params()["fc.w"], b.named_params()["fc.w"])

    def test_phi1_has_strictly_more_parameters(self):
        p0 = build_model(variant_spec(0), 4, 0, input_resolution=32).parameter_count()
        p1 = build_model(variant_spec(1), 4, 0, input_resolution=32).parameter_count()
        assert p1 > p0

    def test_broken_filter_chain_rejected(self):
        blocks = list(BASE_SPEC.blocks)
        blocks[3] = type(blocks[3])(
            repeats=blocks[3].repeats, filters_in=999, filters_out=blocks[3].filters_out,
            kernel=blocks[3].kernel, stride=blocks[3].stride,
            expand_ratio=blocks[3].expand_ratio, se_ratio=blocks[3].se_ratio,
        )
        bad = ArchSpec(stem_filters=BASE_SPEC.stem_filters, blocks=tuple(blocks),
                       head_filters=BASE_SPEC.head_filters, input_resolution=224)
        with pytest.raises(ShapeMismatch):
            build_model(bad, 4, 0)


class TestPredictProbs:
    def test_zero_classifier_uniform_probs(self):
        model = build_compact_cnn(4, 16, init_seed=0)
        fc_w = model.named_params()["fc.w"]
        fc_b = model.named_params()["fc.b"]
        fc_w[:] = 0.0
        fc_b[:] = 0.0
        x = np.random.default_rng(0).normal(size=(5, 3, 16, 16)).astype(np.float32)
        probs = model.predict_probs(x)
        assert np.allclose(probs, 0.25, atol=1e-6)

    def test_handcrafted_two_layer_net(self):
        # identity 1x1 conv -> global average pool -> dense with known weights
        conv = Conv2d("c", 3, 3, 1, rng=np.random.default_rng(0))
        conv.w[:] = 0.0
        for c in range(3):
            conv.w[c, c, 0, 0] = 1.0
        conv.b[:] = 0.0
        dense = Dense("f", 3, 4, rng=np.random.default_rng(0))
        dense.w[:] = np.array(
            [[1.0, 0.0, 0.0],
             [0.0, 2.0, 0.0],
             [0.0, 0.0, -1.0],
             [0.5, 0.5, 0.5]], dtype=np.float32)
        dense.b[:] = np.array([0.1, -0.2, 0.0, 0.3], dtype=np.float32)
        model = Model([conv, GlobalAvgPool(), dense], input_resolution=2,
                      num_classes=4, model_id="toy", descriptor={})

        x = np.arange(12, dtype=np.float32).reshape(1, 3, 2, 2) / 10.0
        means = [x[0, c].mean() for c in range(3)]      # 0.15, 0.55, 0.95
        logits = [
            means[0] + 0.1,
            2 * means[1] - 0.2,
            -means[2] + 0.0,
            0.5 * (means[0] + means[1] + means[2]) + 0.3,
        ]
        exps = [math.exp(v) for v in logits]
        expected = np.array([e / sum(exps) for e in exps])

        probs = model.predict_probs(x)
        assert np.abs(probs[0] - expected).max() <= 1e-5

    def test_duplicate_rows_identical_outputs(self):
        model = build_compact_cnn(4, 16, init_seed=3)
        row = np.random.default_rng(1).normal(size=(1, 3, 16, 16)).astype(np.float32)
        batch = np.concatenate([row, row, row])
        probs = model.predict_probs(batch)
        assert np.array_equal(probs[0], probs[1])
        assert np.array_equal(probs[1], probs[2])

    def test_batch_order_independence_per_sample(self):
        model = build_compact_cnn(4, 16, init_seed=3)
        rng = np.random.default_rng(5)
        batch = rng.normal(size=(4, 3, 16, 16)).astype(np.float32)
        probs = model.predict_probs(batch)
        perm = [2, 0, 3, 1]
        probs_perm = model.predict_probs(batch[perm])
        assert np.allclose(probs[perm], probs_perm, atol=1e-6)

    def test_wrong_resolution_rejected(self):
        model = build_compact_cnn(4, 16, init_seed=0)
        with pytest.raises(ShapeMismatch):
            model.predict_probs(np.zeros((1, 3, 32, 32), np.float32))

    def test_wrong_channels_rejected(self):
        model = build_compact_cnn(4, 16, init_seed=0)
        with pytest.raises(ShapeMismatch):
            model.predict_probs(np.zeros((1, 1, 16, 16), np.float32))


class TestModelPersistence:
    def test_save_load_round_trip(self, tmp_path):
        model = build_compact_cnn(4, 16, init_seed=9, widths=(4, 6))
        json_path, weights_path = save_model(model, tmp_path / "m")
        assert json_path.exists() and weights_path.exists()
        again = load_model(json_path)
        assert again.model_id == model.model_id
        assert again.input_resolution == 16
        for name, t in model.named_tensors().items():
            assert np.array_equal(t, again.named_tensors()[name]), name

    def test_loaded_model_predicts_identically(self, tmp_path):
        model = build_compact_cnn(4, 16, init_seed=9)
        x = np.random.default_rng(0).normal(size=(2, 3, 16, 16)).astype(np.float32)
        before = model.predict_probs(x)
        json_path, _ = save_model(model, tmp_path / "m")
        after = load_model(json_path).predict_probs(x)
        assert np.array_equal(before, after)

    def test_scaled_model_round_trip(self, tmp_path):
        model = build_model(variant_spec(1), 4, init_seed=4, input_resolution=24)
        json_path, _ = save_model(model, tmp_path / "s")
        again = load_model(json_path)
        x = np.random.default_rng(2).normal(size=(1, 3, 24, 24)).astype(np.float32)
        assert np.array_equal(model.predict_probs(x), again.predict_probs(x))


class TestImagesToBatch:
    def test_scaling_and_layout(self):
        img = np.zeros((4, 6, 3), dtype=np.uint8)
        img[0, 0] = (255, 0, 51)
        batch = images_to_batch([img])
        assert batch.shape == (1, 3, 4, 6)
        assert batch.dtype == np.float32
        assert batch[0, 0, 0, 0] == 1.0
        assert batch[0, 1, 0, 0] == 0.0
        assert batch[0, 2, 0, 0] == pytest.approx(0.2)
