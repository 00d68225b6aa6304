import numpy as np
import pytest

from histopatch.dataset import SyntheticConfig, generate_synthetic, load_manifest, split
from histopatch.dataset import SplitRatios
from histopatch.nn.model import build_compact_cnn, load_model, save_model
from histopatch.nn.train import TrainerConfig, fit
from histopatch.pipeline import patch_dataset
from histopatch.tiler import TileSpec


@pytest.fixture(scope="session")
def synth_root(tmp_path_factory):
    """Small synthetic dataset shared by service/CLI tests (8 per class, 64px)."""
    root = tmp_path_factory.mktemp("synth")
    generate_synthetic(SyntheticConfig(images_per_class=8, image_size=64, seed=123), root)
    return root


@pytest.fixture(scope="session")
def synth_manifest(synth_root):
    return load_manifest(synth_root)


@pytest.fixture(scope="session")
def tiny_model_paths(tmp_path_factory, synth_manifest):
    """A briefly trained compact model saved to disk (descriptor + weights)."""
    spec = TileSpec(window=32, overlap=0.5)
    train_m, valid_m, _ = split(synth_manifest, SplitRatios(), seed=7)
    x, y, _ = patch_dataset(train_m, spec, 32)
    model = build_compact_cnn(num_classes=4, input_resolution=32, init_seed=7)
    fit(model, (x, y), None, TrainerConfig(lr0=0.05, epochs=3, batch_size=32), seed=7)
    prefix = tmp_path_factory.mktemp("model") / "tiny"
    json_path, weights_path = save_model(model, prefix)
    return json_path, weights_path


@pytest.fixture(scope="session")
def tiny_model(tiny_model_paths):
    return load_model(tiny_model_paths[0])


@pytest.fixture()
def rng():
    return np.random.default_rng(20240811)
