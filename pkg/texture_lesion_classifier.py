#!/usr/bin/env python3
"""
Texture Lesion Classifier
Extracts LBP, WLD, GLCM and spectral texture descriptors from skin lesion
images and classifies them with a grid-searched RBF support vector machine
"""

import argparse
import sys
from pathlib import Path
from typing import Any

from src.config import get_descriptor_config, get_pipeline_config, get_svm_config, load_config
from src.imgio import load_image, resize
from src.model_io import load_model, save_model
from src.pipeline import (
    evaluate_model,
    export_features,
    extract_manifest,
    load_manifest,
    model_descriptor,
    predict_manifest,
    run_protocol,
    train_from_rows,
)
from src.regions import DescriptorConfig, dimension_ledger, extract, parse_descriptor
from src.report_generator import (
    generate_dimension_ledger,
    generate_eval_report,
    generate_grid_report,
    save_report,
)
from src.storage_factory import StorageFactory
from src.storage_interface import FeatureRow
from src.svm import GridSpec, best_cell, grid_scores, predict
from src.synthetic import FAMILIES, MANIFEST_NAME, generate_corpus
from src.types import EvalReport


def parse_exponents(text: str) -> tuple[float, ...]:
    """'start:stop:step' powers of two, inclusive of stop"""
    try:
        start, stop, step = (int(part) for part in text.split(":"))
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"expected start:stop:step integers, got '{text}'") from e
    if step == 0 or (stop - start) * step < 0:
        raise argparse.ArgumentTypeError(f"exponent range '{text}' is empty")
    return tuple(2.0**e for e in range(start, stop + (1 if step > 0 else -1), step))


def build_grid(args: argparse.Namespace, config: dict[str, Any]) -> GridSpec:
    folds = args.folds if args.folds is not None else get_svm_config(config)["folds"]
    return GridSpec(c_values=args.c_exponents, gamma_values=args.gamma_exponents, folds=folds)


def resolve_descriptor(text: str, config: dict[str, Any]) -> DescriptorConfig:
    settings = get_descriptor_config(config)
    return parse_descriptor(
        text,
        glcm_levels=settings["glcm_levels"],
        glcm_distance=settings["glcm_distance"],
        coefficients=settings["spectral_coefficients"],
    )


def load_rows(path: str, descriptor: str | None, config: dict[str, Any]) -> tuple[str, list[FeatureRow]]:
    storage = StorageFactory.create_storage(path, fallback=get_pipeline_config(config)["feature_store"])
    return storage.load_features(descriptor)


def print_report(report: EvalReport, report_out: str | None) -> None:
    print("\n" + generate_eval_report(report))
    if report_out:
        print(f"\n✅ Report saved to {save_report(report, report_out)}")


def cmd_extract(args: argparse.Namespace, config: dict[str, Any]) -> None:
    cfg = resolve_descriptor(args.descriptor, config)
    manifest = load_manifest(args.manifest)
    print(f"📦 Extracting {cfg} from {len(manifest)} images...")
    count = export_features(manifest, cfg, args.out, config, quiet=args.quiet)
    print(f"✅ Wrote {count} feature rows to {args.out}")


def cmd_train(args: argparse.Namespace, config: dict[str, Any]) -> None:
    if args.features:
        descriptor, rows = load_rows(args.features, args.descriptor, config)
    elif args.manifest and args.descriptor:
        cfg = resolve_descriptor(args.descriptor, config)
        descriptor = str(cfg)
        rows = extract_manifest(load_manifest(args.manifest), cfg, config, quiet=args.quiet)
    else:
        raise ValueError("train needs --features, or --manifest together with --descriptor")

    grid = build_grid(args, config)
    print(f"🔍 Grid search over {len(grid.c_values)}x{len(grid.gamma_values)} cells, {grid.folds} folds...")
    model, cv_accuracy = train_from_rows(rows, descriptor, grid, args.seed, config)
    save_model(model, args.model_out)
    print(f"✅ Trained {descriptor} on {len(rows)} images: C={model.C:g} gamma={model.gamma:g}")
    print(f"📊 Cross-validation accuracy: {cv_accuracy:.2%}")
    print(f"✅ Model saved to {args.model_out}")


def cmd_predict(args: argparse.Namespace, config: dict[str, Any]) -> None:
    model = load_model(args.model)
    if args.image:
        cfg = model_descriptor(model, config)
        size = get_pipeline_config(config)["working_size"]
        cog_mode = get_descriptor_config(config)["cog_mode"]
        img = resize(load_image(args.image), size, size)
        print(f"{args.image}\t{predict(model, extract(img, cfg, cog_mode).values)}")
    elif args.manifest:
        manifest = load_manifest(args.manifest)
        for path, label in zip(manifest.paths, predict_manifest(model, manifest, config, quiet=args.quiet)):
            print(f"{path}\t{label}")
    else:
        raise ValueError("predict needs --image or --manifest")


def cmd_evaluate(args: argparse.Namespace, config: dict[str, Any]) -> None:
    model = load_model(args.model)
    manifest = load_manifest(args.manifest)
    report = evaluate_model(model, manifest, config, seed=args.seed, quiet=args.quiet)
    print_report(report, args.report_out)


def cmd_grid_search(args: argparse.Namespace, config: dict[str, Any]) -> None:
    descriptor, rows = load_rows(args.features, args.descriptor, config)
    svm_config = get_svm_config(config)
    grid = build_grid(args, config)
    print(f"🔍 Grid search for {descriptor} on {len(rows)} images...")
    cells = grid_scores(
        [row.values for row in rows],
        [row.label for row in rows],
        grid,
        args.seed,
        tol=svm_config["tolerance"],
        max_iter=svm_config["max_iter"],
        cache_mb=svm_config["kernel_cache_mb"],
        scale_features=svm_config["scale_features"],
        max_workers=get_pipeline_config(config)["max_workers"],
    )
    print("\n" + generate_grid_report(cells))
    best = best_cell(cells)
    print(f"\n✅ Best: C={best.C:g} gamma={best.gamma:g} ({best.cv_accuracy:.2%})")


def cmd_synth(args: argparse.Namespace, config: dict[str, Any]) -> None:
    print(f"🎨 Generating {args.per_class} images per family: {', '.join(args.families)}")
    manifest = generate_corpus(args.out, args.per_class, args.size, args.seed, tuple(args.families))
    print(f"✅ Wrote {len(manifest)} images and {Path(args.out) / MANIFEST_NAME}")


def cmd_dims(args: argparse.Namespace, config: dict[str, Any]) -> None:
    print(generate_dimension_ledger(dimension_ledger()))


def cmd_protocol(args: argparse.Namespace, config: dict[str, Any]) -> None:
    cfg = resolve_descriptor(args.descriptor, config)
    manifest = load_manifest(args.manifest)
    grid = build_grid(args, config)
    print(f"🧪 Running {cfg} on {len(manifest)} images ({len(manifest.classes)} classes)...")
    report = run_protocol(manifest, cfg, grid, args.seed, config, quiet=args.quiet, model_out=args.model_out)
    print_report(report, args.report_out)
    if args.model_out:
        print(f"✅ Model saved to {args.model_out}")


def add_grid_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--c-exponents",
        type=parse_exponents,
        default=GridSpec().c_values,
        help="C grid as start:stop:step powers of two, e.g. --c-exponents=-5:15:2 (default)",
    )
    parser.add_argument(
        "--gamma-exponents",
        type=parse_exponents,
        default=GridSpec().gamma_values,
        help="gamma grid as start:stop:step powers of two, e.g. --gamma-exponents=-15:3:2 (default)",
    )
    parser.add_argument("--folds", type=int, help="cross-validation folds (default CV_FOLDS)")


def build_parser(default_seed: int) -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(description="Texture descriptor skin lesion classifier")
    parser.add_argument("--quiet", action="store_true", help="Hide progress bars")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("extract", help="Export one feature row per manifest image")
    p.add_argument("--manifest", required=True)
    p.add_argument("--descriptor", required=True, help="Canonical descriptor, e.g. cogriWeberLBP@16,2")
    p.add_argument("--out", required=True, help="Feature file (.tsv) or database (.db)")
    p.set_defaults(handler=cmd_extract)

    p = sub.add_parser("train", help="Grid-search and train a model")
    p.add_argument("--features", help="Feature file written by extract")
    p.add_argument("--manifest")
    p.add_argument("--descriptor", help="Descriptor to extract, or to select from a feature database")
    p.add_argument("--model-out", required=True)
    p.add_argument("--seed", type=int, default=default_seed)
    add_grid_arguments(p)
    p.set_defaults(handler=cmd_train)

    p = sub.add_parser("predict", help="Label one image or every manifest entry")
    p.add_argument("--model", required=True)
    p.add_argument("--image")
    p.add_argument("--manifest")
    p.set_defaults(handler=cmd_predict)

    p = sub.add_parser("evaluate", help="Score a saved model on a labelled manifest")
    p.add_argument("--model", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--report-out", help="Save the report (.json for machine-readable output)")
    p.set_defaults(handler=cmd_evaluate)

    p = sub.add_parser("grid-search", help="Cross-validated accuracy of every (C, gamma) cell")
    p.add_argument("--features", required=True)
    p.add_argument("--descriptor")
    p.add_argument("--seed", type=int, default=default_seed)
    add_grid_arguments(p)
    p.set_defaults(handler=cmd_grid_search)

    p = sub.add_parser("synth", help="Generate the synthetic texture corpus")
    p.add_argument("--out", required=True)
    p.add_argument("--per-class", type=int, default=100)
    p.add_argument("--size", type=int, default=144)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--families", nargs="+", choices=FAMILIES, default=list(FAMILIES))
    p.set_defaults(handler=cmd_synth)

    p = sub.add_parser("dims", help="Print the published-versus-computed dimension ledger")
    p.set_defaults(handler=cmd_dims)

    p = sub.add_parser("protocol", help="Split, extract, grid-search, train and evaluate in one run")
    p.add_argument("--manifest", required=True)
    p.add_argument("--descriptor", required=True)
    p.add_argument("--seed", type=int, default=default_seed)
    p.add_argument("--report-out")
    p.add_argument("--model-out")
    add_grid_arguments(p)
    p.set_defaults(handler=cmd_protocol)

    return parser


def main(argv: list[str] | None = None) -> int:
    """Main execution function"""
    config = load_config()
    if not config:
        print("\nPlease fix the settings in your .env file")
        return 2

    parser = build_parser(get_pipeline_config(config)["seed"])
    args = parser.parse_args(argv)

    try:
        args.handler(args, config)
    except (ValueError, OSError) as e:
        print(f"❌ {e}")
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
