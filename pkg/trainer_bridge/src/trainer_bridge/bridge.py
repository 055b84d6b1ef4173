"""Train deep models on a protocol manifest and export score files.

The training recipe is fixed: ResNet-50 with a C-way final layer, Adam
at 1e-3 with default betas, 120 epochs, shorter side resized to 256, a
random 224 crop and horizontal flips at p=0.5. Validation logits are
exported every epoch, test logits once at the end, all in the core
toolkit's score file format.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn
from torch.utils.data import DataLoader, Dataset
from torchvision import models, transforms
from torchvision.io import ImageReadMode, read_image

from .formats import Manifest, read_manifest, write_scores

log = logging.getLogger("trainer_bridge")

MODES = ("S", "BG", "EOS")


@dataclass
class TrainConfig:
    manifest: Path
    image_root: Path
    out_dir: Path
    mode: str = "S"
    epochs: int = 120
    learning_rate: float = 1e-3
    betas: tuple[float, float] = (0.9, 0.999)
    batch_size: int = 64
    resize_short: int = 256
    crop: int = 224
    hflip_p: float = 0.5
    num_workers: int = 0
    seed: int = 42
    device: str = "cpu"

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}")

    def output_count(self, K: int) -> int:
        return K + 1 if self.mode == "BG" else K


class ManifestImageDataset(Dataset):
    """Images listed in a manifest split; decode failures are skipped
    (collate drops them) and counted."""

    def __init__(self, rows, image_root: Path, transform):
        self.rows = rows
        self.image_root = Path(image_root)
        self.transform = transform
        self.decode_failures = 0

    def __len__(self):
        return len(self.rows)

    def __getitem__(self, index):
        row = self.rows[index]
        try:
            image = read_image(
                str(self.image_root / row.path), mode=ImageReadMode.RGB
            )
        except Exception:
            self.decode_failures += 1
            log.warning("failed to decode %s; skipping", row.path)
            return None
        image = self.transform(image.float() / 255.0)
        return image, row.class_index, index


def _collate_skip_failures(batch):
    batch = [item for item in batch if item is not None]
    if not batch:
        return None
    images = torch.stack([item[0] for item in batch])
    labels = torch.tensor([item[1] for item in batch], dtype=torch.long)
    indices = torch.tensor([item[2] for item in batch], dtype=torch.long)
    return images, labels, indices


def target_rows(labels: torch.Tensor, mode: str, K: int, dtype=None) -> torch.Tensor:
    """Per-sample target vectors: one-hot for knowns in every mode,
    one-hot at the extra class (BG) or uniform 1/C (EOS) for
    negatives (class_index 0)."""
    C = K + 1 if mode == "BG" else K
    out = torch.zeros(len(labels), C, dtype=dtype or torch.get_default_dtype())
    for i, raw in enumerate(labels.tolist()):
        if raw >= 1:
            out[i, raw - 1] = 1.0
        elif raw == 0:
            if mode == "S":
                raise ValueError("mode S trains on known samples only")
            if mode == "BG":
                out[i, K] = 1.0
            else:
                out[i, :] = 1.0 / C
        else:
            raise ValueError("unknown samples never enter training")
    return out


def weighted_cce(logits: torch.Tensor, targets: torch.Tensor, weights: torch.Tensor):
    """Weighted categorical cross-entropy over softmax outputs,
    averaged over the batch."""
    log_probs = torch.log_softmax(logits, dim=1)
    per_sample = -(weights * targets * log_probs).sum(dim=1)
    return per_sample.mean()


def class_weights(manifest: Manifest, mode: str) -> torch.Tensor:
    """Dataset-level class weights: all ones for S/EOS; inverse
    frequency N/(C*N_c) over the training split for BG."""
    K = manifest.K
    C = K + 1 if mode == "BG" else K
    if mode != "BG":
        return torch.ones(C)
    counts = np.zeros(C)
    for row in manifest.split_rows("train", roles=("known", "negative")):
        idx = row.class_index - 1 if row.class_index >= 1 else K
        counts[idx] += 1
    if np.any(counts < 1):
        raise ValueError("every class needs at least one training sample")
    return torch.tensor(counts.sum() / (C * counts), dtype=torch.get_default_dtype())


def build_model(C: int) -> nn.Module:
    model = models.resnet50(weights=None)
    model.fc = nn.Linear(model.fc.in_features, C)
    return model


def _export_split(model, dataset, rows, config, path, K, C):
    loader = DataLoader(
        dataset,
        batch_size=config.batch_size,
        shuffle=False,
        num_workers=config.num_workers,
        collate_fn=_collate_skip_failures,
    )
    model.eval()
    ids: list[str] = []
    labels: list[int] = []
    chunks: list[np.ndarray] = []
    with torch.no_grad():
        for batch in loader:
            if batch is None:
                continue
            images, batch_labels, indices = batch
            logits = model(images.to(config.device))
            chunks.append(logits.cpu().numpy())
            for i, label in zip(indices.tolist(), batch_labels.tolist()):
                ids.append(rows[i].path)
                labels.append(label)
    logits = np.concatenate(chunks) if chunks else np.zeros((0, C))
    write_scores(path, K=K, C=C, sample_ids=ids, labels=labels, logits=logits)


def train_and_export(config: TrainConfig) -> dict:
    """Run the recipe and export per-epoch validation logits plus a
    final test score file; returns a small summary dict."""
    torch.manual_seed(config.seed)
    manifest = read_manifest(config.manifest)
    K = manifest.K
    C = config.output_count(K)
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    train_roles = ("known",) if config.mode == "S" else ("known", "negative")
    train_rows = manifest.split_rows("train", roles=train_roles)
    val_rows = manifest.split_rows("val", roles=("known", "negative"))
    test_rows = manifest.split_rows("test")
    if not train_rows:
        raise ValueError("manifest has no training rows for this mode")

    train_transform = transforms.Compose(
        [
            transforms.Resize(config.resize_short, antialias=True),
            transforms.RandomCrop(config.crop),
            transforms.RandomHorizontalFlip(config.hflip_p),
        ]
    )
    eval_transform = transforms.Compose(
        [
            transforms.Resize(config.resize_short, antialias=True),
            transforms.CenterCrop(config.crop),
        ]
    )

    train_data = ManifestImageDataset(train_rows, config.image_root, train_transform)
    val_data = ManifestImageDataset(val_rows, config.image_root, eval_transform)
    test_data = ManifestImageDataset(test_rows, config.image_root, eval_transform)

    model = build_model(C).to(config.device)
    weights = class_weights(manifest, config.mode).to(config.device)
    optimizer = torch.optim.Adam(
        model.parameters(), lr=config.learning_rate, betas=config.betas
    )
    loader = DataLoader(
        train_data,
        batch_size=config.batch_size,
        shuffle=True,
        num_workers=config.num_workers,
        collate_fn=_collate_skip_failures,
        generator=torch.Generator().manual_seed(config.seed),
    )

    history = []
    for epoch in range(1, config.epochs + 1):
        model.train()
        total, batches = 0.0, 0
        for batch in loader:
            if batch is None:
                continue
            images, labels, _ = batch
            targets = target_rows(labels, config.mode, K).to(config.device)
            optimizer.zero_grad()
            logits = model(images.to(config.device))
            loss = weighted_cce(logits, targets, weights)
            loss.backward()
            optimizer.step()
            total += float(loss.detach())
            batches += 1
        mean_loss = total / max(batches, 1)
        history.append(mean_loss)
        log.info("epoch %d: mean training loss %.6f", epoch, mean_loss)
        if val_rows:
            _export_split(
                model,
                val_data,
                val_rows,
                config,
                out_dir / f"val_epoch_{epoch:03d}.csv",
                K,
                C,
            )

    _export_split(
        model, test_data, test_rows, config, out_dir / "test_scores.csv", K, C
    )

    failures = (
        train_data.decode_failures
        + val_data.decode_failures
        + test_data.decode_failures
    )
    if failures:
        log.warning("skipped %d images that failed to decode", failures)
    return {
        "K": K,
        "C": C,
        "epochs": config.epochs,
        "loss_history": history,
        "decode_failures": failures,
        "test_scores": str(out_dir / "test_scores.csv"),
    }
