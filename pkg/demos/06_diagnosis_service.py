"""Diagnosis-support service: upload, classify, persist, replay.

Walks the HTTP workflow in-process (no sockets): train a tiny model,
start the app, post a patient + image form to /api/diagnose, list and
fetch records, then replay the stored blob to show the persisted
diagnosis is exactly reproducible.
"""

import json
import tempfile
from pathlib import Path

from fastapi.testclient import TestClient

from histopatch import SplitRatios, SyntheticConfig, TileSpec, generate_synthetic, split
from histopatch.images import encode_png, load_image
from histopatch.nn.model import build_compact_cnn, load_model, save_model
from histopatch.nn.train import TrainerConfig, fit
from histopatch.pipeline import patch_dataset
from histopatch.service import RecordStore, ServiceConfig, create_app, diagnose_bytes


def train_tiny_model(data_dir, out_prefix):
    manifest = generate_synthetic(
        SyntheticConfig(images_per_class=8, image_size=64, seed=11), data_dir)
    train_m, _, _ = split(manifest, SplitRatios(), seed=11)
    spec = TileSpec(window=32, overlap=0.5)
    x, y, _ = patch_dataset(train_m, spec, 32)
    model = build_compact_cnn(num_classes=4, input_resolution=32, init_seed=11)
    fit(model, (x, y), None, TrainerConfig(lr0=0.05, epochs=3, batch_size=32), seed=11)
    json_path, _ = save_model(model, out_prefix)
    return manifest, json_path


def main():
    with tempfile.TemporaryDirectory() as td:
        td = Path(td)
        print("training a tiny model for the demo ...")
        manifest, model_json = train_tiny_model(td / "data", td / "model")

        config = ServiceConfig(
            model_path=str(model_json),
            tile_window=32,
            overlap=0.5,
            store_dir=str(td / "store"),
        )
        client = TestClient(create_app(config))
        print("health:", client.get("/api/health").json())
        print("model:", json.dumps(client.get("/api/model").json(), indent=2))

        sample_path = manifest.entries[-1][0]   # an Invasive-class image
        response = client.post(
            "/api/diagnose",
            data={"patient_name": "Tran Thi Mai", "birth_year": "1968"},
            files={"image": ("biopsy.png", encode_png(load_image(sample_path)), "image/png")},
        )
        record = response.json()
        print(f"\nPOST /api/diagnose -> {response.status_code}")
        print(f"predicted: {record['predicted']}  votes: {record['vote_counts']}")
        print(f"grid: {record['grid']}  record_id: {record['record_id']}")

        listing = client.get("/api/records").json()
        print(f"\nGET /api/records -> {len(listing)} record(s), newest first")
        fetched = client.get(f"/api/records/{record['record_id']}").json()
        assert fetched == record

        # replay: the stored blob re-classifies to the identical result
        model = load_model(model_json)
        store = RecordStore(config.store_dir)
        blob = store.load_blob(record["image_hash"])
        replayed = diagnose_bytes(model, blob, config.tile_spec())
        assert replayed["predicted"] == record["predicted"]
        assert replayed["vote_counts"] == record["vote_counts"]
        print("\nreplayed the stored blob: identical prediction and votes")
        print("every diagnosis in the store is auditable this way.")


if __name__ == "__main__":
    main()
