"""Training loop: Adam on the weighted focal loss with per-epoch evaluation
on the eval split; the best-metric checkpoint is retained."""

from __future__ import annotations

import csv
import time
from dataclasses import dataclass
from pathlib import Path

import torch
from torch.utils.data import DataLoader

from .data import MazeSegmentationDataset, class_weights
from .evaluation import evaluate
from .loss import focal_loss
from .model import ModelConfig, RegionNet


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = 0.001
    epochs: int = 30
    batch_size: int = 16
    gamma: float = 2.0
    seed: int = 0
    max_steps: int | None = None  # optional hard cap across all epochs
    stop_below_metric: float | None = None  # optional early stop on eval metric

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.epochs < 1 or self.batch_size < 1:
            raise ValueError("epochs and batch_size must be >= 1")


@dataclass(frozen=True)
class EpochRecord:
    epoch: int
    train_loss: float
    eval_accuracy: float
    eval_redundancy: float
    eval_metric: float
    seconds: float


def evaluate_model(model: RegionNet, dataset, device="cpu") -> tuple[float, float, float]:
    model.eval()
    accs, reds, mets = [], [], []
    with torch.no_grad():
        for i in range(len(dataset)):
            inputs, labels = dataset[i]
            scores = model(inputs.unsqueeze(0).to(device))
            pred = scores.argmax(dim=1).squeeze(0).cpu()
            result = evaluate(pred, labels)
            accs.append(result.accuracy)
            reds.append(result.redundancy)
            mets.append(result.metric)
    n = len(mets)
    return sum(accs) / n, sum(reds) / n, sum(mets) / n


def train(
    manifest_path,
    out_dir,
    model_cfg: ModelConfig = ModelConfig(),
    train_cfg: TrainConfig = TrainConfig(),
    device: str = "cpu",
    train_limit: int | None = None,
    eval_split: str = "eval",
    log=print,
) -> tuple[Path, list[EpochRecord]]:
    """Train on the manifest's train split; returns (checkpoint path, history).

    The checkpoint stores the model config alongside the weights of the epoch
    with the best (lowest) eval metric. History is also written to
    out_dir/history.csv with a header recording the hyperparameters.
    """
    torch.manual_seed(train_cfg.seed)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    train_set = MazeSegmentationDataset(
        manifest_path, "train", n_classes=model_cfg.n_classes, limit=train_limit
    )
    if eval_split == "train":
        eval_set = train_set
    else:
        try:
            eval_set = MazeSegmentationDataset(
                manifest_path, eval_split, n_classes=model_cfg.n_classes
            )
        except ValueError:
            eval_set = train_set  # tiny datasets: evaluate on train
    weights = class_weights(train_set, model_cfg.n_classes).to(device)
    log(f"train={len(train_set)} eval={len(eval_set)} class weights={weights.tolist()}")

    loader = DataLoader(train_set, batch_size=train_cfg.batch_size, shuffle=True)
    model = RegionNet(model_cfg).to(device)
    optimizer = torch.optim.Adam(model.parameters(), lr=train_cfg.learning_rate)

    history: list[EpochRecord] = []
    best_metric = float("inf")
    ckpt_path = out_dir / "best.pt"
    steps = 0
    for epoch in range(1, train_cfg.epochs + 1):
        model.train()
        t0 = time.perf_counter()
        total, count = 0.0, 0
        for inputs, labels in loader:
            inputs, labels = inputs.to(device), labels.to(device)
            optimizer.zero_grad()
            loss = focal_loss(model(inputs), labels, train_cfg.gamma, weights)
            loss.backward()
            optimizer.step()
            total += float(loss.detach()) * len(inputs)
            count += len(inputs)
            steps += 1
            if train_cfg.max_steps is not None and steps >= train_cfg.max_steps:
                break
        acc, red, metric = evaluate_model(model, eval_set, device)
        record = EpochRecord(
            epoch=epoch,
            train_loss=total / count,
            eval_accuracy=acc,
            eval_redundancy=red,
            eval_metric=metric,
            seconds=time.perf_counter() - t0,
        )
        history.append(record)
        log(
            f"epoch {epoch}/{train_cfg.epochs}: loss={record.train_loss:.4f} "
            f"acc={acc:.4f} red={red:.4f} metric={metric:.4f} ({record.seconds:.1f}s)"
        )
        if metric < best_metric:
            best_metric = metric
            torch.save(
                {
                    "model_state": model.state_dict(),
                    "model_config": model_cfg.__dict__,
                    "epoch": epoch,
                    "eval_metric": metric,
                },
                ckpt_path,
            )
        if train_cfg.max_steps is not None and steps >= train_cfg.max_steps:
            break
        if train_cfg.stop_below_metric is not None and metric < train_cfg.stop_below_metric:
            break

    _write_history(out_dir / "history.csv", history, model_cfg, train_cfg)
    return ckpt_path, history


def _write_history(path, history, model_cfg, train_cfg):
    with open(path, "w", newline="") as fh:
        fh.write(
            f"# lr={train_cfg.learning_rate} epochs={train_cfg.epochs} "
            f"batch={train_cfg.batch_size} gamma={train_cfg.gamma} "
            f"seed={train_cfg.seed} classes={model_cfg.n_classes} "
            f"aspp={model_cfg.use_aspp} width={model_cfg.base_width} "
            f"schedule=constant augmentation=none init=random\n"
        )
        writer = csv.writer(fh)
        writer.writerow(
            ["epoch", "train_loss", "eval_accuracy", "eval_redundancy", "eval_metric", "seconds"]
        )
        for r in history:
            writer.writerow(
                [r.epoch, f"{r.train_loss:.6f}", f"{r.eval_accuracy:.6f}",
                 f"{r.eval_redundancy:.6f}", f"{r.eval_metric:.6f}", f"{r.seconds:.3f}"]
            )


def load_checkpoint(path, device: str = "cpu") -> RegionNet:
    payload = torch.load(path, map_location=device, weights_only=True)
    cfg_dict = dict(payload["model_config"])
    cfg_dict["aspp_dilations"] = tuple(cfg_dict["aspp_dilations"])
    model = RegionNet(ModelConfig(**cfg_dict)).to(device)
    model.load_state_dict(payload["model_state"])
    model.eval()
    return model
