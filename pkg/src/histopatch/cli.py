"""Operator command line: the pipeline end to end, one subcommand per stage.

Exit codes: 0 success, 1 usage error, 2 runtime error. Every randomized
subcommand takes --seed; under --strict-repro an explicit seed is
mandatory, otherwise a random one is drawn and logged to stderr so the
run can still be reproduced.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import __version__
from .aggregate import classify_image
from .augment import AugmentParams, apply_transform, draw_transform, make_rng
from .dataset import (
    Manifest,
    SplitRatios,
    SyntheticConfig,
    generate_synthetic,
    load_manifest,
    save_manifest,
    split,
    write_split,
)
from .errors import HistopatchError
from .images import load_image, save_png
from .labels import LABEL_NAMES, parse_label
from .metrics import confusion_matrix, report_json, report_text
from .nn.model import build_compact_cnn, load_model, save_model
from .nn.train import TrainerConfig, fit
from .pipeline import evaluate_images, patch_dataset
from .scaling import (
    ScalingCoefficients,
    check_compute_constraint,
    compound_scale,
    variant_spec,
)
from .service import ServiceConfig, serve
from .tiler import TileSpec, extract_patches, write_patches


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise _UsageError(message)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS,
                   help="seed for all randomized work in this command")
    p.add_argument("--json", action="store_true", default=argparse.SUPPRESS,
                   help="print machine-readable JSON")
    p.add_argument("--strict-repro", action="store_true", default=argparse.SUPPRESS,
                   help="fail instead of drawing a random seed")


def _build_parser() -> _Parser:
    parser = _Parser(prog="histopatch", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    parser.add_argument("--seed", type=int, default=None)
    parser.add_argument("--json", action="store_true", default=False)
    parser.add_argument("--strict-repro", action="store_true", default=False)
    parser.add_argument("--config", default=None, help="config file (serve/augment)")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = sub.add_parser("tile", help="cut an image into overlapping patches")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--window", type=int, default=512)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--include-tail", action="store_true")
    _add_common(p)

    p = sub.add_parser("augment", help="write seeded augmented copies of an image")
    p.add_argument("--input", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--config", default=argparse.SUPPRESS,
                   help="JSON augmentation parameters")
    _add_common(p)

    p = sub.add_parser("split", help="stratified train/valid/test split")
    p.add_argument("--input", required=True, help="manifest CSV or class-dir root")
    p.add_argument("--out", required=True)
    p.add_argument("--ratios", default="0.7,0.2,0.1")
    _add_common(p)

    p = sub.add_parser("synth", help="generate the synthetic 4-class dataset")
    p.add_argument("--out", required=True)
    p.add_argument("--images-per-class", type=int, default=50)
    p.add_argument("--size", type=int, default=128)
    _add_common(p)

    p = sub.add_parser("train", help="train a desk-scale model on tiled patches")
    p.add_argument("--data", required=True, help="manifest CSV or class-dir root")
    p.add_argument("--out", required=True, help="model path prefix")
    p.add_argument("--window", type=int, default=32)
    p.add_argument("--overlap", type=float, default=0.5)
    p.add_argument("--ratios", default="0.7,0.2,0.1")
    p.add_argument("--epochs", type=int, default=8)
    p.add_argument("--lr0", type=float, default=0.05)
    p.add_argument("--momentum", type=float, default=0.9)
    p.add_argument("--batch-size", type=int, default=64)
    p.add_argument("--widths", default="8,16")
    _add_common(p)

    p = sub.add_parser("predict", help="classify one image by patch majority vote")
    p.add_argument("--input", required=True)
    p.add_argument("--weights", required=True, help="model descriptor (.json)")
    p.add_argument("--window", type=int, default=None,
                   help="defaults to the model's training window if stored")
    p.add_argument("--overlap", type=float, default=0.5)
    _add_common(p)

    p = sub.add_parser("evaluate", help="confusion matrix and per-class metrics")
    p.add_argument("--pred", required=True, help="CSV path,label of predictions")
    p.add_argument("--truth", required=True, help="CSV path,label of ground truth")
    _add_common(p)

    p = sub.add_parser("scale-calc", help="compound-scaling multipliers and block table")
    p.add_argument("--phi", type=int, default=0)
    p.add_argument("--alpha", type=float, default=1.2)
    p.add_argument("--beta", type=float, default=1.1)
    p.add_argument("--gamma", type=float, default=1.15)
    _add_common(p)

    p = sub.add_parser("serve", help="run the diagnosis-support HTTP service")
    p.add_argument("--host", default=None)
    p.add_argument("--port", type=int, default=None)
    p.add_argument("--model", default=None, help="model descriptor path")
    p.add_argument("--store", default=None)
    p.add_argument("--window", type=int, default=None)
    p.add_argument("--overlap", type=float, default=None)
    p.add_argument("--webui", default=None, help="built web assets directory")
    _add_common(p)

    return parser


def _resolve_seed(args) -> int:
    if args.seed is not None:
        return args.seed
    if args.strict_repro:
        raise _UsageError("--strict-repro requires an explicit --seed")
    seed = int.from_bytes(os.urandom(8), "little")
    print(f"seed: {seed}", file=sys.stderr)
    return seed


def _parse_ratios(text: str) -> SplitRatios:
    parts = [float(v) for v in text.split(",")]
    if len(parts) != 3:
        raise _UsageError(f"--ratios needs three comma-separated values, got {text!r}")
    return SplitRatios(*parts)


def _emit(args, payload: dict, text: str) -> None:
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(text)


def _cmd_tile(args) -> int:
    image = load_image(args.input)
    spec = TileSpec(window=args.window, overlap=args.overlap,
                    include_tail=args.include_tail)
    grid, patches = extract_patches(image, spec)
    stem = Path(args.input).stem
    files = write_patches(grid, patches, args.out, stem)
    _emit(
        args,
        {
            "patches": len(patches),
            "cols": grid.cols,
            "rows": grid.rows,
            "window": grid.window,
            "stride": grid.stride,
            "out": str(args.out),
        },
        f"wrote {len(patches)} patches ({grid.cols}x{grid.rows} grid) "
        f"and sidecar to {args.out} ({len(files)} files)",
    )
    return 0


def _cmd_augment(args) -> int:
    seed = _resolve_seed(args)
    image = load_image(args.input)
    params = AugmentParams.from_config(args.config) if args.config else AugmentParams()
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = Path(args.input).stem
    rng = make_rng(seed)
    written = []
    for i in range(args.count):
        draw = draw_transform(params, rng)
        path = out / f"{stem}_aug{i:03d}.png"
        save_png(apply_transform(image, draw), path)
        written.append(str(path))
    _emit(
        args,
        {"seed": seed, "count": args.count, "params": params.to_config(),
         "files": written},
        f"wrote {args.count} augmented images to {out} (seed {seed})",
    )
    return 0


def _cmd_split(args) -> int:
    seed = _resolve_seed(args)
    manifest = load_manifest(args.input)
    ratios = _parse_ratios(args.ratios)
    parts = split(manifest, ratios, seed)
    files = write_split(parts, ratios, seed, args.out)
    totals = {name: len(part) for name, part in zip(("train", "valid", "test"), parts)}
    _emit(
        args,
        {"seed": seed, "totals": totals, "files": files},
        "split sizes: " + ", ".join(f"{k}={v}" for k, v in totals.items()),
    )
    return 0


def _cmd_synth(args) -> int:
    seed = _resolve_seed(args)
    cfg = SyntheticConfig(images_per_class=args.images_per_class,
                          image_size=args.size, seed=seed)
    manifest = generate_and_save(cfg, args.out)
    _emit(
        args,
        {"seed": seed, "counts": manifest.counts(),
         "manifest": str(Path(args.out) / "manifest.csv")},
        f"generated {len(manifest)} images under {args.out}",
    )
    return 0


def generate_and_save(cfg: SyntheticConfig, out_dir) -> Manifest:
    manifest = generate_synthetic(cfg, out_dir)
    save_manifest(manifest, Path(out_dir) / "manifest.csv")
    return manifest


def _cmd_train(args) -> int:
    seed = _resolve_seed(args)
    manifest = load_manifest(args.data)
    ratios = _parse_ratios(args.ratios)
    train_m, valid_m, _ = split(manifest, ratios, seed)
    spec = TileSpec(window=args.window, overlap=args.overlap)
    widths = tuple(int(w) for w in args.widths.split(","))

    x_train, y_train, _ = patch_dataset(train_m, spec, args.window)
    x_valid, y_valid, _ = patch_dataset(valid_m, spec, args.window)
    model = build_compact_cnn(num_classes=len(LABEL_NAMES),
                              input_resolution=args.window,
                              init_seed=seed, widths=widths)
    model.descriptor["tile_window"] = args.window
    model.descriptor["overlap"] = args.overlap
    cfg = TrainerConfig(lr0=args.lr0, momentum=args.momentum,
                        epochs=args.epochs, batch_size=args.batch_size)
    history = fit(model, (x_train, y_train), (x_valid, y_valid), cfg, seed=seed)
    json_path, weights_path = save_model(model, args.out)
    Path(str(args.out) + ".history.json").write_text(json.dumps(history, indent=2))

    summary = evaluate_images(model, valid_m, spec)
    payload = {
        "seed": seed,
        "model": str(json_path),
        "weights": str(weights_path),
        "final": history[-1],
        "valid_patch_accuracy": summary["patch_accuracy"],
        "valid_image_accuracy": summary["image_accuracy"],
    }
    _emit(
        args,
        payload,
        f"trained {cfg.epochs} epochs; valid patch acc "
        f"{summary['patch_accuracy']:.3f}, image acc {summary['image_accuracy']:.3f}; "
        f"saved {json_path}",
    )
    return 0


def _cmd_predict(args) -> int:
    model = load_model(args.weights)
    window = args.window
    if window is None:
        window = model.descriptor.get("tile_window", model.input_resolution)
    spec = TileSpec(window=window, overlap=args.overlap)
    image = load_image(args.input)
    label, tally, patch_labels, grid = classify_image(model, image, spec)
    payload = {
        "input": args.input,
        "predicted": label.name,
        "vote_counts": dict(zip(LABEL_NAMES, tally.counts)),
        "total_patches": tally.total_patches,
        "grid": {"rows": grid.rows, "cols": grid.cols},
        "patch_labels": patch_labels,
        "model_id": model.model_id,
    }
    counts = ", ".join(f"{n}={c}" for n, c in zip(LABEL_NAMES, tally.counts))
    _emit(args, payload,
          f"{args.input}: {label.name} (votes {counts} over {tally.total_patches} patches)")
    return 0


def _read_label_csv(path: str) -> dict:
    import csv

    out = {}
    with open(path, newline="") as f:
        reader = csv.DictReader(f)
        if reader.fieldnames is None or [c.strip() for c in reader.fieldnames] != ["path", "label"]:
            raise HistopatchError(f"{path}: expected header 'path,label'")
        for row in reader:
            out[row["path"]] = int(parse_label(row["label"]))
    return out


def _cmd_evaluate(args) -> int:
    truth = _read_label_csv(args.truth)
    pred = _read_label_csv(args.pred)
    missing = sorted(set(truth) - set(pred))
    if missing:
        raise HistopatchError(f"predictions missing for {len(missing)} paths "
                              f"(first: {missing[0]})")
    paths = sorted(truth)
    cm = confusion_matrix([truth[p] for p in paths], [pred[p] for p in paths])
    if args.json:
        print(report_json(cm))
    else:
        print(report_text(cm))
    return 0


def _cmd_scale_calc(args) -> int:
    c = ScalingCoefficients(alpha=args.alpha, beta=args.beta,
                            gamma=args.gamma, phi=float(args.phi))
    mult = compound_scale(c)
    constraint = check_compute_constraint(c)
    spec = variant_spec(args.phi, alpha=args.alpha, beta=args.beta, gamma=args.gamma)
    payload = {
        "phi": args.phi,
        "multipliers": {
            "depth": mult.depth_mult,
            "width": mult.width_mult,
            "resolution": mult.res_mult,
        },
        "constraint": {
            "value": constraint.value,
            "target": constraint.target,
            "tol": constraint.tol,
            "passed": constraint.passed,
        },
        "architecture": spec.to_dict(),
    }
    if args.json:
        print(json.dumps(payload, indent=2))
    else:
        print(f"phi={args.phi}  depth x{mult.depth_mult:.4f}  "
              f"width x{mult.width_mult:.4f}  resolution x{mult.res_mult:.4f}")
        print(f"compute check: alpha*beta^2*gamma^2 = {constraint.value:.4f} "
              f"(target {constraint.target}, tol {constraint.tol}) -> "
              f"{'pass' if constraint.passed else 'fail'}")
        print(f"input resolution: {spec.input_resolution}")
        print(f"{'block':>5} {'repeats':>7} {'in':>5} {'out':>5} "
              f"{'kernel':>6} {'stride':>6} {'expand':>6}")
        for i, b in enumerate(spec.blocks, start=1):
            print(f"{i:>5} {b.repeats:>7} {b.filters_in:>5} {b.filters_out:>5} "
                  f"{b.kernel:>6} {b.stride:>6} {b.expand_ratio:>6}")
    return 0


def _cmd_serve(args) -> int:
    config = ServiceConfig.load(args.config)
    updates = {}
    if args.host is not None:
        updates["host"] = args.host
    if args.port is not None:
        updates["port"] = args.port
    if args.model is not None:
        updates["model_path"] = args.model
    if args.store is not None:
        updates["store_dir"] = args.store
    if args.window is not None:
        updates["tile_window"] = args.window
    if args.overlap is not None:
        updates["overlap"] = args.overlap
    if args.webui is not None:
        updates["webui_dir"] = args.webui
    if updates:
        from dataclasses import replace

        config = replace(config, **updates)
    serve(config)
    return 0


_COMMANDS = {
    "tile": _cmd_tile,
    "augment": _cmd_augment,
    "split": _cmd_split,
    "synth": _cmd_synth,
    "train": _cmd_train,
    "predict": _cmd_predict,
    "evaluate": _cmd_evaluate,
    "scale-calc": _cmd_scale_calc,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            raise _UsageError("a subcommand is required")
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except (HistopatchError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
