"""Readers/writers for the toolkit's manifest and score file formats.

Implemented independently of the core package on purpose: the files are
the interface, and round-tripping bridge exports through the core
readers is part of the test surface.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

MANIFEST_MAGIC = "# osr-manifest v1"
SCORES_MAGIC = "# osr-scores v1"


@dataclass(frozen=True)
class ManifestRow:
    path: str
    synset: str
    class_index: int
    role: str
    split: str


@dataclass(frozen=True)
class Manifest:
    protocol: str
    seed: int
    K: int
    rows: tuple[ManifestRow, ...]

    def split_rows(self, split: str, roles=None) -> list[ManifestRow]:
        wanted = set(roles) if roles else None
        return [
            r
            for r in self.rows
            if r.split == split and (wanted is None or r.role in wanted)
        ]


def read_manifest(path) -> Manifest:
    text = Path(path).read_text(encoding="utf-8")
    lines = text.splitlines()
    if not lines or not lines[0].startswith(MANIFEST_MAGIC):
        raise ValueError(f"{path}: missing '{MANIFEST_MAGIC}' header")
    header = dict(
        kv.split("=", 1) for kv in lines[0][len(MANIFEST_MAGIC):].split() if "=" in kv
    )
    reader = csv.reader(lines[1:])
    rows = list(reader)
    if not rows or rows[0] != ["path", "synset", "class_index", "role", "split"]:
        raise ValueError(f"{path}: missing manifest column header")
    records = tuple(
        ManifestRow(r[0], r[1], int(r[2]), r[3], r[4]) for r in rows[1:] if r
    )
    return Manifest(
        protocol=header["protocol"],
        seed=int(header["seed"]),
        K=int(header["K"]),
        rows=records,
    )


def write_scores(path, K: int, C: int, sample_ids, labels, logits) -> None:
    """Write a logits score table; 17 significant digits round-trip
    float64 exactly."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(f"{SCORES_MAGIC} K={K} C={C} kind=logits\n")
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(["sample_id", "label"] + [f"v{i+1}" for i in range(C)])
        for sample_id, label, row in zip(sample_ids, labels, logits):
            writer.writerow(
                [sample_id, int(label)] + [f"{float(v):.17g}" for v in row]
            )
