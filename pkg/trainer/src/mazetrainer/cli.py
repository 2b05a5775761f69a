"""Command-line entry points: train and predict."""

from __future__ import annotations

import argparse
from pathlib import Path

from .model import ModelConfig
from .train import TrainConfig, load_checkpoint, train


def train_main(argv=None):
    p = argparse.ArgumentParser(
        prog="train", description="Train the promising-region predictor on an emitted dataset."
    )
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="checkpoint / history directory")
    p.add_argument("--epochs", type=int, default=30)
    p.add_argument("--lr", type=float, default=0.001)
    p.add_argument("--batch", type=int, default=16)
    p.add_argument("--gamma", type=float, default=2.0)
    p.add_argument("--classes", type=int, default=3, choices=(2, 3))
    p.add_argument("--no-aspp", action="store_true")
    p.add_argument("--width", type=int, default=64, help="encoder base channel width")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--limit", type=int, default=None, help="cap the train split size")
    p.add_argument("--max-steps", type=int, default=None)
    p.add_argument("--eval-split", default="eval",
                   help="split used for per-epoch evaluation (e.g. 'train' when overfitting)")
    args = p.parse_args(argv)

    model_cfg = ModelConfig(
        n_classes=args.classes, use_aspp=not args.no_aspp, base_width=args.width
    )
    train_cfg = TrainConfig(
        learning_rate=args.lr, epochs=args.epochs, batch_size=args.batch,
        gamma=args.gamma, seed=args.seed, max_steps=args.max_steps,
    )
    ckpt, history = train(
        args.manifest, args.out, model_cfg, train_cfg,
        train_limit=args.limit, eval_split=args.eval_split,
    )
    print(f"best checkpoint: {ckpt} (eval metric {min(r.eval_metric for r in history):.4f})")


def predict_main(argv=None):
    p = argparse.ArgumentParser(
        prog="predict", description="Predict a PMAP probability file for map image(s)."
    )
    p.add_argument("--ckpt", required=True)
    p.add_argument("--map", required=True, help="a map image, or a directory of *_map.png")
    p.add_argument("--out", required=True, help="output .pmap path, or a directory")
    args = p.parse_args(argv)

    from .predict import predict_pmap

    model = load_checkpoint(args.ckpt)
    map_path = Path(args.map)
    if map_path.is_dir():
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        maps = sorted(map_path.glob("*_map.png")) or sorted(map_path.glob("*.png"))
        if not maps:
            raise SystemExit(f"no map images in {map_path}")
        seconds = [
            predict_pmap(model, m, out_dir / f"{m.stem.removesuffix('_map')}.pmap")
            for m in maps
        ]
        mean = sum(seconds) / len(seconds)
        print(f"{len(maps)} maps: mean {mean * 1000:.1f} ms/map ({1.0 / mean:.1f} FPS)")
    else:
        predict_pmap(model, map_path, args.out)
