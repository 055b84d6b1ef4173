"""Desk-scale 2-D Gaussian experiments.

A toy dataset stands in for the full-scale protocols: a few known
clusters, negative clusters seen during training, and unknown clusters
held out entirely. The trainable model is a C x 3 affine map (logits =
W x + b) optimized by full-batch gradient descent, which keeps the
reproducibility surface to a seed and a learning rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ._rng import SplitMix64
from .errors import OsrError
from .losses import bg_class_weights, cce_loss, cce_gradient, make_target_batch, output_count

Point = tuple[float, float]


@dataclass(frozen=True)
class ToyParams:
    known_means: tuple[Point, ...]
    negative_means: tuple[Point, ...]
    unknown_means: tuple[Point, ...]
    points_per_cluster: int = 100
    std: float = 1.0

    def validate(self) -> None:
        if len(self.known_means) < 2:
            raise OsrError("need at least 2 known clusters")
        if len(self.negative_means) < 1:
            raise OsrError("need at least 1 negative cluster")
        if len(self.unknown_means) < 1:
            raise OsrError("need at least 1 unknown cluster")
        if self.points_per_cluster < 1:
            raise OsrError("points_per_cluster must be >= 1")
        if not (self.std > 0):
            raise OsrError("cluster std must be positive")


@dataclass(frozen=True)
class ToyDataset:
    params: ToyParams
    seed: int
    x: np.ndarray       # [N, 2]
    labels: np.ndarray  # [N]; 1..K known, 0 negative, -1 unknown

    @property
    def K(self) -> int:
        return len(self.params.known_means)

    def subset(self, *labels_wanted: int) -> tuple[np.ndarray, np.ndarray]:
        mask = np.isin(self.labels, labels_wanted)
        return self.x[mask], self.labels[mask]

    def training_subset(self, mode: str) -> tuple[np.ndarray, np.ndarray, int]:
        """Training points for a mode plus the count of excluded
        negatives (mode S never trains on them). Unknown points never
        enter training in any mode."""
        if mode == "S":
            x, labels = self.subset(*range(1, self.K + 1))
            excluded = int(np.sum(self.labels == 0))
        else:
            x, labels = self.subset(0, *range(1, self.K + 1))
            excluded = 0
        return x, labels, excluded


def make_toy_dataset(params: ToyParams, seed: int) -> ToyDataset:
    """Sample Gaussian clusters with a single SplitMix64/Box-Muller
    stream; identical seeds give identical datasets."""
    params.validate()
    rng = SplitMix64(seed)
    xs: list[list[float]] = []
    labels: list[int] = []
    clusters = (
        [(mean, i + 1) for i, mean in enumerate(params.known_means)]
        + [(mean, 0) for mean in params.negative_means]
        + [(mean, -1) for mean in params.unknown_means]
    )
    for (cx, cy), label in clusters:
        for _ in range(params.points_per_cluster):
            xs.append(
                [cx + params.std * rng.next_gauss(), cy + params.std * rng.next_gauss()]
            )
            labels.append(label)
    return ToyDataset(
        params=params,
        seed=seed,
        x=np.array(xs, dtype=np.float64),
        labels=np.array(labels, dtype=np.int64),
    )


@dataclass
class ToyModel:
    """Affine map from the plane to C logits; parameters shape [C, 3]
    with the bias in the last column."""

    mode: str
    K: int
    params: np.ndarray
    loss_history: list[float] = field(default_factory=list)
    excluded_negatives: int = 0

    @property
    def C(self) -> int:
        return self.params.shape[0]

    def logits(self, x: np.ndarray) -> np.ndarray:
        x = np.atleast_2d(np.asarray(x, dtype=np.float64))
        aug = np.hstack([x, np.ones((x.shape[0], 1))])
        return aug @ self.params.T


def toy_train(
    data: ToyDataset,
    mode: str,
    epochs: int,
    learning_rate: float,
    seed: int,
) -> ToyModel:
    """Full-batch gradient descent on the mode's loss.

    Deterministic given the seed (initialization is the only random
    element). With a sufficiently small learning rate the recorded loss
    history is non-increasing; zero epochs returns the initialization.
    """
    K = data.K
    C = output_count(mode, K)
    x, labels, excluded = data.training_subset(mode)
    if not np.any(labels >= 1):
        raise OsrError("training data has no known samples")
    if mode in ("BG", "EOS") and not np.any(labels == 0):
        raise OsrError(f"mode {mode} requires negative training samples")
    if epochs < 0:
        raise OsrError("epochs must be >= 0")

    targets = make_target_batch(mode, labels, K)
    if mode == "BG":
        counts = np.array(
            [np.sum(labels == c) for c in range(1, K + 1)] + [np.sum(labels == 0)]
        )
        weights = bg_class_weights(counts)
    else:
        weights = np.ones(C)

    rng = SplitMix64(seed)
    params = 0.01 * np.array(
        [[rng.next_gauss() for _ in range(3)] for _ in range(C)]
    )
    model = ToyModel(mode=mode, K=K, params=params, excluded_negatives=excluded)

    aug = np.hstack([x, np.ones((x.shape[0], 1))])
    model.loss_history.append(cce_loss(aug @ model.params.T, targets, weights))
    for _ in range(epochs):
        logits = aug @ model.params.T
        grad_z = cce_gradient(logits, targets, weights)
        model.params = model.params - learning_rate * (grad_z.T @ aug)
        model.loss_history.append(
            cce_loss(aug @ model.params.T, targets, weights)
        )
    return model


# -- the shipped desk-scale experiment ----------------------------------------
#
# Geometry chosen to mirror the full-scale protocols' difficulty mix:
# two of the three known clusters almost touch (fine-grained classes,
# hard closed-set), negatives ring the known cones at smaller radii
# (rejects similar to knowns), the near-unknown clusters sit beside the
# negative fence, and the far-unknown clusters lie beyond the fence
# along rejected directions. A plain softmax model scores the fence
# directions ever more confidently with distance, while negative-aware
# training caps the confidence growth there.


def _ring(radius: float, angles_deg: tuple[float, ...]) -> tuple[Point, ...]:
    import math

    return tuple(
        (radius * math.cos(math.radians(a)), radius * math.sin(math.radians(a)))
        for a in angles_deg
    )


_KNOWN_ANGLES = (90.0, 115.0, 270.0)
_FENCE_ANGLES = (0.0, 45.0, 135.0, 180.0, 225.0, 315.0)

_NEGATIVE_MEANS = (
    _ring(6.5, _KNOWN_ANGLES) + _ring(4.0, _FENCE_ANGLES) + ((0.0, 0.0),)
)

TOY_PARAMS_NEAR = ToyParams(
    known_means=_ring(8.0, _KNOWN_ANGLES),
    negative_means=_NEGATIVE_MEANS,
    unknown_means=_ring(4.5, (20.0, 160.0, 250.0)),
    points_per_cluster=100,
    std=1.2,
)

TOY_PARAMS_FAR = ToyParams(
    known_means=TOY_PARAMS_NEAR.known_means,
    negative_means=_NEGATIVE_MEANS,
    unknown_means=_ring(9.0, (45.0, 180.0, 315.0)),
    points_per_cluster=100,
    std=1.2,
)

TOY_MODES = ("S", "BG", "EOS")
TOY_EPOCHS = 900
TOY_LEARNING_RATE = 0.08
TOY_CHECKPOINT_EVERY = 90


def toy_score_table(model: ToyModel, dataset: ToyDataset, include_unknown=True):
    """Export a dataset's model outputs as a logits ScoreTable."""
    from .scores import ScoreTable

    mask = np.ones(len(dataset.labels), dtype=bool)
    if not include_unknown:
        mask = dataset.labels != -1
    x = dataset.x[mask]
    labels = dataset.labels[mask]
    ids = tuple(f"pt{idx:04d}" for idx in np.flatnonzero(mask))
    return ScoreTable(
        K=model.K,
        kind="logits",
        sample_ids=ids,
        labels=labels,
        values=model.logits(x),
    )


def run_toy_training(dataset: ToyDataset, mode: str, seed: int):
    """Train once with per-checkpoint snapshots; returns (model,
    snapshots) where snapshots is a list of (epoch, ToyModel). Each
    snapshot equals toy_train() run for that many epochs."""
    snapshots = []
    model = toy_train(dataset, mode, 0, TOY_LEARNING_RATE, seed)
    x, labels, excluded = dataset.training_subset(mode)
    targets = make_target_batch(mode, labels, dataset.K)
    if mode == "BG":
        counts = np.array(
            [np.sum(labels == c) for c in range(1, dataset.K + 1)]
            + [np.sum(labels == 0)]
        )
        weights = bg_class_weights(counts)
    else:
        weights = np.ones(model.C)
    aug = np.hstack([x, np.ones((x.shape[0], 1))])
    for epoch in range(1, TOY_EPOCHS + 1):
        grad_z = cce_gradient(aug @ model.params.T, targets, weights)
        model.params = model.params - TOY_LEARNING_RATE * (grad_z.T @ aug)
        model.loss_history.append(cce_loss(aug @ model.params.T, targets, weights))
        if epoch % TOY_CHECKPOINT_EVERY == 0:
            snapshots.append(
                (
                    epoch,
                    ToyModel(
                        mode=mode,
                        K=model.K,
                        params=model.params.copy(),
                        loss_history=list(model.loss_history),
                        excluded_negatives=excluded,
                    ),
                )
            )
    return snapshots[-1][1], snapshots


@dataclass
class ToyModeOutcome:
    mode: str
    gamma_negative: "ConfidenceReport"
    gamma_far_unknown: "ConfidenceReport"
    curve_negative: "OscrCurve"
    curve_unknown: "OscrCurve"
    curve_far_unknown: "OscrCurve"
    best_epoch: int
    excluded_negatives: int
    final_loss: float


def run_toy_experiment(out_dir, seed: int = 42) -> dict[str, ToyModeOutcome]:
    """The full desk-scale experiment behind ``osr toy``.

    Trains the three losses on the shared near-configuration training
    data, exports score files, per-checkpoint confidence, OSCR curves
    for the negative / unknown / far-unknown groups, a CCR-at-FPR
    summary, and SVG figures. Everything written is a pure function of
    the seed.
    """
    from pathlib import Path

    from . import svg
    from .metrics import (
        ccr_at_fpr,
        confidence,
        evaluation_groups,
        format_confidence_csv,
        format_oscr_csv,
        oscr_curve,
        score_histogram,
        select_best_epoch,
    )
    from .scores import to_probabilities, write_scores

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)

    train_data = make_toy_dataset(TOY_PARAMS_NEAR, seed)
    eval_near = make_toy_dataset(TOY_PARAMS_NEAR, seed + 1)
    eval_far = make_toy_dataset(TOY_PARAMS_FAR, seed + 2)

    fpr_targets = (1e-3, 1e-2, 1e-1, 1.0)
    outcomes: dict[str, ToyModeOutcome] = {}
    all_reports: dict[str, list] = {}
    summary_lines = [f"toy experiment seed={seed}"]

    for mode in TOY_MODES:
        model, snapshots = run_toy_training(train_data, mode, seed + 3)

        test_table = toy_score_table(model, eval_near)
        far_table = toy_score_table(model, eval_far)
        write_scores(test_table, out / f"toy_{mode}_test.csv")
        write_scores(far_table, out / f"toy_{mode}_far_test.csv")

        reports = []
        for epoch, snap in snapshots:
            val_table = toy_score_table(snap, eval_near, include_unknown=False)
            write_scores(val_table, out / f"toy_{mode}_val_epoch_{epoch:03d}.csv")
            reports.append(confidence(val_table, group="negative", epoch=epoch))
        best_epoch = select_best_epoch(reports)
        all_reports[mode] = reports
        (out / f"toy_{mode}_confidence.csv").write_text(
            format_confidence_csv(reports, "negative", best_epoch)
        )

        probs = to_probabilities(test_table)
        curve_neg = oscr_curve(evaluation_groups(probs, "negative"))
        curve_unk = oscr_curve(evaluation_groups(probs, "unknown"))
        far_probs = to_probabilities(far_table)
        curve_far = oscr_curve(evaluation_groups(far_probs, "unknown"))
        (out / f"toy_{mode}_oscr_negative.csv").write_text(
            format_oscr_csv(curve_neg, "negative")
        )
        (out / f"toy_{mode}_oscr_unknown.csv").write_text(
            format_oscr_csv(curve_unk, "unknown")
        )
        (out / f"toy_{mode}_oscr_far_unknown.csv").write_text(
            format_oscr_csv(curve_far, "unknown")
        )

        gamma_neg = confidence(probs, group="negative")
        gamma_far = confidence(far_probs, group="unknown")

        outcomes[mode] = ToyModeOutcome(
            mode=mode,
            gamma_negative=gamma_neg,
            gamma_far_unknown=gamma_far,
            curve_negative=curve_neg,
            curve_unknown=curve_unk,
            curve_far_unknown=curve_far,
            best_epoch=best_epoch,
            excluded_negatives=model.excluded_negatives,
            final_loss=model.loss_history[-1],
        )

        hist = [
            ("known", *_hist_series(score_histogram(probs, "known"))),
            ("negative", *_hist_series(score_histogram(probs, "negative"))),
            ("unknown", *_hist_series(score_histogram(probs, "unknown"))),
        ]
        (out / f"toy_hist_{mode}.svg").write_text(
            svg.render_histogram(
                hist,
                title=f"softmax scores, {mode}",
                xlabel="probability",
                ylabel="count",
            )
        )

        summary_lines.append(
            f"{mode}: final_loss={model.loss_history[-1]:.6f} "
            f"gamma+={gamma_neg.gamma_plus:.4f} gamma-={gamma_neg.gamma_minus:.4f} "
            f"gamma={gamma_neg.gamma:.4f} best_epoch={best_epoch}"
        )
        if model.excluded_negatives:
            summary_lines.append(
                f"{mode}: excluded {model.excluded_negatives} negative "
                "training samples (mode trains on knowns only)"
            )
        for group, curve in (
            ("negative", curve_neg),
            ("unknown", curve_unk),
            ("far_unknown", curve_far),
        ):
            cells = [
                "---" if v is None else f"{v:.4f}"
                for v in ccr_at_fpr(curve, fpr_targets)
            ]
            summary_lines.append(
                f"{mode} ccr@fpr {group}: "
                + " ".join(f"{t:g}={c}" for t, c in zip(fpr_targets, cells))
            )

    for group, attr in (
        ("negative", "curve_negative"),
        ("unknown", "curve_unknown"),
        ("far_unknown", "curve_far_unknown"),
    ):
        series = [
            svg.Series(
                mode,
                tuple(getattr(outcomes[mode], attr).fprs),
                tuple(getattr(outcomes[mode], attr).ccrs),
            )
            for mode in TOY_MODES
        ]
        (out / f"toy_oscr_{group}.svg").write_text(
            svg.render_line_plot(
                series,
                title=f"OSCR, {group} test samples",
                xlabel="FPR",
                ylabel="CCR",
                x_scale="log",
                y_range=(0.0, 1.0),
            )
        )

    conf_series = []
    for mode in TOY_MODES:
        rs = all_reports[mode]
        epochs = tuple(float(r.epoch) for r in rs)
        conf_series.append(
            svg.Series(f"{mode} gamma+", epochs, tuple(r.gamma_plus for r in rs))
        )
        conf_series.append(
            svg.Series(f"{mode} gamma-", epochs, tuple(r.gamma_minus for r in rs))
        )
    (out / "toy_confidence.svg").write_text(
        svg.render_line_plot(
            conf_series,
            title="validation confidence across epochs",
            xlabel="epoch",
            ylabel="gamma",
            x_scale="linear",
            y_range=(0.0, 1.0),
        )
    )

    (out / "toy_summary.txt").write_text("\n".join(summary_lines) + "\n")
    return outcomes


def _hist_series(counts_edges):
    counts, edges = counts_edges
    return list(edges), list(counts)
