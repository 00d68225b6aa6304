import numpy as np
import pytest

from histopatch.errors import NonFiniteLoss
from histopatch.nn.layers import Dense, cross_entropy_with_grad
from histopatch.nn.model import Model, build_compact_cnn
from histopatch.nn.train import SGD, TrainerConfig, evaluate, fit, step_lr


class TestStepLR:
    def test_epoch_zero(self):
        cfg = TrainerConfig(lr0=0.1)
        assert step_lr(0, cfg) == 0.1

    def test_epoch_thirty_halves(self):
        cfg = TrainerConfig(lr0=0.1)
        assert step_lr(30, cfg) == pytest.approx(0.05)

    def test_epoch_sixty_five_quarters(self):
        cfg = TrainerConfig(lr0=0.1)
        assert step_lr(65, cfg) == pytest.approx(0.025)

    def test_boundaries_exact(self):
        cfg = TrainerConfig(lr0=1.0)
        assert step_lr(29, cfg) == 1.0
        assert step_lr(59, cfg) == 0.5
        assert step_lr(60, cfg) == 0.25

    def test_custom_schedule(self):
        cfg = TrainerConfig(lr0=0.2, step_size=10, gamma=0.1)
        assert step_lr(25, cfg) == pytest.approx(0.002)

    def test_config_validation(self):
        with pytest.raises(ValueError):
            TrainerConfig(lr0=0.1, gamma=0.0)
        with pytest.raises(ValueError):
            TrainerConfig(lr0=0.1, step_size=0)
        with pytest.raises(ValueError):
            step_lr(-1, TrainerConfig(lr0=0.1))


def dense_only_model(in_features, num_classes, seed):
    rng = np.random.default_rng(seed)
    dense = Dense("fc", in_features, num_classes, rng=rng)
    return Model([dense], input_resolution=0, num_classes=num_classes,
                 model_id="dense-toy", descriptor={})


def perceptron_separable(x, y, epochs=200):
    """Independent separability oracle: classic perceptron convergence."""
    w = np.zeros(x.shape[1] + 1)
    signs = np.where(y == 1, 1.0, -1.0)
    xb = np.hstack([x, np.ones((len(x), 1))])
    for _ in range(epochs):
        mistakes = 0
        for xi, si in zip(xb, signs):
            if si * (w @ xi) <= 0:
                w += si * xi
                mistakes += 1
        if mistakes == 0:
            return True
    return False


def toy_two_class(rng, n=40):
    x0 = rng.normal(loc=(-2.0, 0.0), scale=0.4, size=(n // 2, 2))
    x1 = rng.normal(loc=(2.0, 0.0), scale=0.4, size=(n // 2, 2))
    x = np.vstack([x0, x1]).astype(np.float32)
    y = np.array([0] * (n // 2) + [1] * (n // 2), dtype=np.int64)
    return x, y


class TestFit:
    def test_zero_lr_leaves_weights_unchanged(self, rng):
        x, y = toy_two_class(rng)
        model = dense_only_model(2, 2, seed=1)
        before = {k: v.copy() for k, v in model.named_params().items()}
        fit(model, (x, y), None, TrainerConfig(lr0=0.0, epochs=5, batch_size=8), seed=0)
        for k, v in model.named_params().items():
            assert np.array_equal(v, before[k])

    def test_linearly_separable_reaches_full_accuracy(self, rng):
        x, y = toy_two_class(rng)
        assert perceptron_separable(x, y), "oracle says the toy set is not separable"
        model = dense_only_model(2, 2, seed=1)
        cfg = TrainerConfig(lr0=0.1, epochs=200, batch_size=8)
        history = fit(model, (x, y), None, cfg, seed=0)
        assert any(h["train_acc"] == 1.0 for h in history)
        _, final_acc = evaluate(model, x, y)
        assert final_acc == 1.0

    def test_single_small_step_decreases_loss(self, rng):
        x, y = toy_two_class(rng)
        model = dense_only_model(2, 2, seed=3)
        logits = model.forward(x, training=True)
        loss_before, dlogits = cross_entropy_with_grad(logits, y)
        model.backward(dlogits)
        SGD(model, momentum=0.0).step(lr=1e-4)
        loss_after, _ = cross_entropy_with_grad(model.forward(x), y)
        assert loss_after < loss_before

    def test_lr_follows_schedule_in_history(self, rng):
        x, y = toy_two_class(rng, n=8)
        model = dense_only_model(2, 2, seed=1)
        cfg = TrainerConfig(lr0=0.1, step_size=2, gamma=0.5, epochs=5, batch_size=4)
        history = fit(model, (x, y), None, cfg, seed=0)
        assert [h["lr"] for h in history] == [0.1, 0.1, 0.05, 0.05, 0.025]

    def test_non_finite_loss_aborts_with_diagnostic(self, rng):
        # lr large enough that the update overflows float32 storage
        x, y = toy_two_class(rng)
        model = dense_only_model(2, 2, seed=1)
        cfg = TrainerConfig(lr0=1e38, epochs=50, batch_size=8)
        with np.errstate(over="ignore", invalid="ignore"):
            with pytest.raises(NonFiniteLoss, match="epoch"):
                fit(model, (x, y), None, cfg, seed=0)

    def test_determinism_same_seed_same_trajectory(self, rng):
        x, y = toy_two_class(rng)
        runs = []
        for _ in range(2):
            model = dense_only_model(2, 2, seed=5)
            history = fit(model, (x, y), (x, y),
                          TrainerConfig(lr0=0.05, epochs=3, batch_size=8), seed=11)
            runs.append((history, {k: v.copy() for k, v in model.named_params().items()}))
        assert runs[0][0] == runs[1][0]
        for k in runs[0][1]:
            assert np.array_equal(runs[0][1][k], runs[1][1][k])

    def test_validation_metrics_present(self, rng):
        x, y = toy_two_class(rng, n=16)
        model = dense_only_model(2, 2, seed=2)
        history = fit(model, (x, y), (x, y),
                      TrainerConfig(lr0=0.05, epochs=2, batch_size=8), seed=1)
        assert {"epoch", "lr", "train_loss", "train_acc", "val_loss", "val_acc"} <= set(history[0])

    def test_trains_conv_model_through_batchnorm(self, rng):
        # the full layer stack (conv + bn + swish + gap + dense) must improve
        x = rng.normal(size=(32, 3, 8, 8)).astype(np.float32)
        y = (x.mean(axis=(1, 2, 3)) > 0).astype(np.int64)
        x[y == 1] += 1.0
        model = build_compact_cnn(num_classes=2, input_resolution=8,
                                  init_seed=0, widths=(4,))
        cfg = TrainerConfig(lr0=0.05, epochs=25, batch_size=8)
        history = fit(model, (x, y), None, cfg, seed=0)
        assert history[-1]["train_acc"] >= 0.9
