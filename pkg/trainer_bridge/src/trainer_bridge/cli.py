"""Command line wrapper around train_and_export."""

import argparse
import logging
import sys
from pathlib import Path

from .bridge import MODES, TrainConfig, train_and_export


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="osr-train-bridge",
        description="Train a ResNet-50 on a protocol manifest and export score files.",
    )
    parser.add_argument("--manifest", required=True)
    parser.add_argument("--image-root", required=True)
    parser.add_argument("--out-dir", required=True)
    parser.add_argument("--mode", choices=MODES, default="S")
    parser.add_argument("--epochs", type=int, default=120)
    parser.add_argument("--batch-size", type=int, default=64)
    parser.add_argument("--learning-rate", type=float, default=1e-3)
    parser.add_argument("--seed", type=int, default=42)
    parser.add_argument("--device", default="cpu")
    parser.add_argument("--num-workers", type=int, default=0)
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")

    config = TrainConfig(
        manifest=Path(args.manifest),
        image_root=Path(args.image_root),
        out_dir=Path(args.out_dir),
        mode=args.mode,
        epochs=args.epochs,
        batch_size=args.batch_size,
        learning_rate=args.learning_rate,
        seed=args.seed,
        device=args.device,
        num_workers=args.num_workers,
    )
    try:
        summary = train_and_export(config)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(f"exported C={summary['C']} score files to {args.out_dir}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
