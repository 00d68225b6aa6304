"""Diagnosis-support HTTP API.

Workflow: a clinician posts patient details plus a tissue image; the
service tiles the image, classifies every patch, majority-votes an
image-level diagnosis, persists the record, and serves it back. Records
live in an append-only JSON-lines store next to a content-addressed blob
directory, so every diagnosis can be replayed bit-for-bit later.

Patient fields are free text with length caps; this is a demonstration
service and real PHI handling is explicitly out of scope.
"""

from __future__ import annotations

import hashlib
import json
import os
import threading
import uuid
from dataclasses import dataclass, replace
from datetime import datetime, timezone
from pathlib import Path
from typing import List, Optional, Union

from fastapi import FastAPI, File, Form, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from .aggregate import classify_image
from .errors import HistopatchError, ImageSmallerThanWindow
from .images import load_image
from .labels import LABEL_NAMES
from .nn.model import Model, load_model
from .tiler import TileSpec

MIN_BIRTH_YEAR = 1900
MAX_NAME_LENGTH = 200


@dataclass(frozen=True)
class ServiceConfig:
    host: str = "127.0.0.1"
    port: int = 8000
    model_path: Optional[str] = None
    tile_window: int = 512
    overlap: float = 0.5
    store_dir: str = "diagnosis_store"
    max_upload_bytes: int = 64 * 1024 * 1024
    webui_dir: Optional[str] = None

    @classmethod
    def load(cls, config_file: Optional[Union[str, Path]] = None) -> "ServiceConfig":
        """Read the JSON config file, then apply HISTOPATCH_* env overrides."""
        cfg = cls()
        if config_file is not None:
            data = json.loads(Path(config_file).read_text())
            cfg = replace(cfg, **{k: v for k, v in data.items() if hasattr(cfg, k)})
        env = os.environ
        overrides = {}
        if "HISTOPATCH_HOST" in env:
            overrides["host"] = env["HISTOPATCH_HOST"]
        if "HISTOPATCH_PORT" in env:
            overrides["port"] = int(env["HISTOPATCH_PORT"])
        if "HISTOPATCH_MODEL_PATH" in env:
            overrides["model_path"] = env["HISTOPATCH_MODEL_PATH"]
        if "HISTOPATCH_WINDOW" in env:
            overrides["tile_window"] = int(env["HISTOPATCH_WINDOW"])
        if "HISTOPATCH_OVERLAP" in env:
            overrides["overlap"] = float(env["HISTOPATCH_OVERLAP"])
        if "HISTOPATCH_STORE_DIR" in env:
            overrides["store_dir"] = env["HISTOPATCH_STORE_DIR"]
        if "HISTOPATCH_MAX_UPLOAD_BYTES" in env:
            overrides["max_upload_bytes"] = int(env["HISTOPATCH_MAX_UPLOAD_BYTES"])
        if "HISTOPATCH_WEBUI_DIR" in env:
            overrides["webui_dir"] = env["HISTOPATCH_WEBUI_DIR"]
        return replace(cfg, **overrides)

    def tile_spec(self) -> TileSpec:
        return TileSpec(window=self.tile_window, overlap=self.overlap)


class RecordStore:
    """Append-only JSONL record log plus content-addressed image blobs.

    Appends are serialized by a lock and written as single complete lines,
    so concurrent readers never observe a partial record.
    """

    def __init__(self, root: Union[str, Path]):
        self.root = Path(root)
        self.records_path = self.root / "records.jsonl"
        self.blob_dir = self.root / "blobs"
        self.blob_dir.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def save_blob(self, data: bytes) -> str:
        digest = hashlib.sha256(data).hexdigest()
        path = self.blob_dir / digest
        if not path.exists():
            tmp = path.with_suffix(".tmp." + uuid.uuid4().hex)
            tmp.write_bytes(data)
            os.replace(tmp, path)
        return digest

    def load_blob(self, digest: str) -> bytes:
        return (self.blob_dir / digest).read_bytes()

    def append(self, record: dict) -> None:
        line = json.dumps(record, separators=(",", ":")) + "\n"
        with self._lock:
            with open(self.records_path, "a") as f:
                f.write(line)
                f.flush()

    def all_records(self) -> List[dict]:
        if not self.records_path.exists():
            return []
        records = []
        with open(self.records_path) as f:
            for line in f:
                line = line.strip()
                if line:
                    records.append(json.loads(line))
        return records

    def list_records(self, page: int, page_size: int) -> List[dict]:
        records = sorted(
            self.all_records(),
            key=lambda r: (r["created_at"], r["record_id"]),
            reverse=True,
        )
        start = page * page_size
        return records[start : start + page_size]

    def get(self, record_id: str) -> Optional[dict]:
        for record in self.all_records():
            if record["record_id"] == record_id:
                return record
        return None


def diagnose_bytes(
    model: Model, image_bytes: bytes, spec: TileSpec
) -> dict:
    """Classify raw image bytes; returns the classification part of a record.

    ``prob_sums`` is included so the majority vote (tie-breaks included)
    can be recomputed from the record alone.
    """
    image = load_image(image_bytes)
    label, tally, patch_labels, grid = classify_image(model, image, spec)
    return {
        "predicted": label.name,
        "vote_counts": dict(zip(LABEL_NAMES, tally.counts)),
        "prob_sums": dict(zip(LABEL_NAMES, tally.prob_sums)),
        "patch_labels": patch_labels,
        "grid": {"rows": grid.rows, "cols": grid.cols},
    }


def _error(status: int, code: str, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": code, "message": message})


def create_app(config: ServiceConfig, model: Optional[Model] = None) -> FastAPI:
    """Build the FastAPI app; the model is loaded once at startup."""
    app = FastAPI(title="histopatch diagnosis service")
    store = RecordStore(config.store_dir)
    if model is None and config.model_path and Path(config.model_path).exists():
        model = load_model(config.model_path)
    weight_digest = None
    if model is not None:
        weight_digest = model.descriptor.get("weights_sha256")
    spec = config.tile_spec()

    app.state.model = model
    app.state.store = store
    app.state.config = config

    @app.get("/api/health")
    def health():
        return {"status": "ok"}

    @app.get("/api/model")
    def model_info():
        if model is None:
            return _error(503, "ModelNotLoaded", "no model is loaded")
        desc = model.descriptor
        return {
            "model_id": model.model_id,
            "kind": desc.get("kind"),
            "phi": desc.get("phi"),
            "input_resolution": model.input_resolution,
            "num_classes": model.num_classes,
            "weight_file_digest": weight_digest,
            "tile_window": config.tile_window,
            "overlap": config.overlap,
            "classes": list(LABEL_NAMES),
        }

    @app.post("/api/diagnose", status_code=201)
    def diagnose(
        patient_name: str = Form(...),
        birth_year: str = Form(...),
        image: UploadFile = File(...),
    ):
        if model is None:
            return _error(503, "ModelNotLoaded", "no model is loaded")
        name = patient_name.strip()
        if not name:
            return _error(400, "ValidationFailed", "patient_name must not be empty")
        if len(name) > MAX_NAME_LENGTH:
            return _error(400, "ValidationFailed",
                          f"patient_name exceeds {MAX_NAME_LENGTH} characters")
        current_year = datetime.now(timezone.utc).year
        try:
            year = int(birth_year)
        except ValueError:
            return _error(400, "ValidationFailed", "birth_year must be an integer")
        if not (MIN_BIRTH_YEAR <= year <= current_year):
            return _error(400, "ValidationFailed",
                          f"birth_year must lie in [{MIN_BIRTH_YEAR}, {current_year}]")

        data = image.file.read(config.max_upload_bytes + 1)
        if len(data) > config.max_upload_bytes:
            return _error(413, "ImageTooLarge",
                          f"upload exceeds {config.max_upload_bytes} bytes")
        try:
            result = diagnose_bytes(model, data, spec)
        except ImageSmallerThanWindow as exc:
            return _error(400, "ValidationFailed", str(exc))
        except HistopatchError as exc:
            return _error(400, "ValidationFailed", str(exc))
        except Exception:
            return _error(400, "UndecodableImage", "could not decode the uploaded image")

        digest = store.save_blob(data)
        record = {
            "record_id": uuid.uuid4().hex,
            "created_at": datetime.now(timezone.utc).isoformat(),
            "patient_name": name,
            "birth_year": year,
            "image_hash": digest,
            "model_id": model.model_id,
            **result,
        }
        store.append(record)
        return record

    @app.get("/api/records")
    def list_records(page: int = 0, page_size: int = 20):
        return store.list_records(page=max(0, page), page_size=max(1, page_size))

    @app.get("/api/records/{record_id}")
    def get_record(record_id: str):
        record = store.get(record_id)
        if record is None:
            return _error(404, "NotFound", f"no record {record_id}")
        return record

    if config.webui_dir and Path(config.webui_dir, "index.html").exists():
        app.mount("/", StaticFiles(directory=config.webui_dir, html=True), name="webui")

    return app


def replay_record(app_or_store, model: Model, spec: TileSpec, record: dict) -> dict:
    """Re-run classification on a record's stored blob (audit path)."""
    store = app_or_store if isinstance(app_or_store, RecordStore) else app_or_store.state.store
    data = store.load_blob(record["image_hash"])
    return diagnose_bytes(model, data, spec)


def serve(config: ServiceConfig) -> None:
    import uvicorn

    uvicorn.run(create_app(config), host=config.host, port=config.port)
