"""Classifier score tables: the boundary format between any model and
the evaluation code.

A table holds one row per test sample: a sample id, the ground-truth
label (1..K for known classes, 0 for negative, -1 for unknown) and C
output values, either raw logits or softmax probabilities. Logits are
the preferred on-disk kind; probabilities saturate at 1 for confident
unknowns and lose the ranking information the high-threshold regime
needs.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .errors import OsrError, ParseError

SCORES_MAGIC = "# osr-scores v1"

KINDS = ("logits", "probabilities")

_PROB_ROW_TOL = 1e-6


def softmax(z: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max-subtraction so large logits cannot
    overflow. Accepts a single vector or a batch."""
    z = np.asarray(z, dtype=np.float64)
    if z.size == 0:
        raise OsrError("softmax input is empty")
    if not np.all(np.isfinite(z)):
        raise OsrError("softmax input contains non-finite values")
    shifted = z - np.max(z, axis=-1, keepdims=True)
    e = np.exp(shifted)
    return e / np.sum(e, axis=-1, keepdims=True)


@dataclass(frozen=True)
class ScoreTable:
    K: int
    kind: str
    sample_ids: tuple[str, ...]
    labels: np.ndarray  # int64 [N]
    values: np.ndarray  # float64 [N, C]

    @property
    def C(self) -> int:
        return self.values.shape[1]

    def __post_init__(self):
        object.__setattr__(self, "labels", np.asarray(self.labels, dtype=np.int64))
        object.__setattr__(
            self, "values", np.ascontiguousarray(self.values, dtype=np.float64)
        )
        self.validate()

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise OsrError(f"bad score kind {self.kind!r}")
        if self.K < 1:
            raise OsrError("K must be >= 1")
        n = len(self.sample_ids)
        if self.values.ndim != 2 or self.values.shape[0] != n or len(self.labels) != n:
            raise OsrError("sample_ids, labels and values disagree in length")
        if self.C not in (self.K, self.K + 1):
            raise OsrError(f"C={self.C} must be K or K+1 (K={self.K})")
        if not np.all(np.isfinite(self.values)):
            raise OsrError("scores contain non-finite values")
        bad = (self.labels > self.K) | (self.labels < -1)
        if np.any(bad):
            row = int(np.argmax(bad))
            raise OsrError(
                f"row {row}: label {self.labels[row]} outside -1, 0, 1..K"
            )
        if self.kind == "probabilities":
            if np.any(self.values < -_PROB_ROW_TOL) or np.any(
                self.values > 1 + _PROB_ROW_TOL
            ):
                raise OsrError("probability values outside [0, 1]")
            sums = self.values.sum(axis=1)
            off = np.abs(sums - 1.0) > _PROB_ROW_TOL
            if np.any(off):
                row = int(np.argmax(off))
                raise OsrError(
                    f"row {row}: probabilities sum to {sums[row]:.9f}, not 1"
                )

    def __eq__(self, other) -> bool:
        return (
            isinstance(other, ScoreTable)
            and self.K == other.K
            and self.kind == other.kind
            and self.sample_ids == other.sample_ids
            and np.array_equal(self.labels, other.labels)
            and np.array_equal(self.values, other.values)
        )


def to_probabilities(t: ScoreTable) -> ScoreTable:
    """Identity on probability tables; softmax per row on logits."""
    if t.kind == "probabilities":
        return t
    return ScoreTable(
        K=t.K,
        kind="probabilities",
        sample_ids=t.sample_ids,
        labels=t.labels,
        values=softmax(t.values),
    )


def format_scores(t: ScoreTable) -> str:
    buf = io.StringIO()
    buf.write(f"{SCORES_MAGIC} K={t.K} C={t.C} kind={t.kind}\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["sample_id", "label"] + [f"v{i+1}" for i in range(t.C)])
    for sample_id, label, row in zip(t.sample_ids, t.labels, t.values):
        # 17 significant digits round-trips float64 exactly
        writer.writerow([sample_id, int(label)] + [f"{v:.17g}" for v in row])
    return buf.getvalue()


def write_scores(t: ScoreTable, path) -> None:
    with open(path, "w", encoding="utf-8", newline="") as f:
        f.write(format_scores(t))


def parse_scores(text: str) -> ScoreTable:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(SCORES_MAGIC):
        raise ParseError(f"missing '{SCORES_MAGIC}' header", 1)
    header = dict(
        kv.split("=", 1) for kv in lines[0][len(SCORES_MAGIC):].split() if "=" in kv
    )
    try:
        K = int(header["K"])
        C = int(header["C"])
        kind = header["kind"]
    except (KeyError, ValueError) as exc:
        raise ParseError(f"bad scores header: {exc}", 1)
    if kind not in KINDS:
        raise ParseError(f"bad score kind {kind!r}", 1)

    reader = csv.reader(lines[1:])
    rows = list(reader)
    expected_cols = ["sample_id", "label"] + [f"v{i+1}" for i in range(C)]
    if not rows or rows[0] != expected_cols:
        raise ParseError("missing or wrong column header row", 2)

    sample_ids: list[str] = []
    labels: list[int] = []
    values: list[list[float]] = []
    for offset, row in enumerate(rows[1:], start=3):
        if len(row) != C + 2:
            raise ParseError(
                f"expected {C + 2} fields, got {len(row)}", offset
            )
        sample_ids.append(row[0])
        try:
            labels.append(int(row[1]))
            values.append([float(v) for v in row[2:]])
        except ValueError as exc:
            raise ParseError(str(exc), offset)

    arr = np.array(values, dtype=np.float64) if values else np.zeros((0, C))
    try:
        return ScoreTable(
            K=K,
            kind=kind,
            sample_ids=tuple(sample_ids),
            labels=np.array(labels, dtype=np.int64),
            values=arr,
        )
    except OsrError as exc:
        raise ParseError(str(exc))


def read_scores(path) -> ScoreTable:
    with open(path, "r", encoding="utf-8", newline="") as f:
        return parse_scores(f.read())
