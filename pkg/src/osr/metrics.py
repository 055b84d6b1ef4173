"""Open-set evaluation: CCR/FPR at a threshold, OSCR curves, CCR@FPR
readouts, and the gamma confidence metric used for validation and
early stopping.

Conventions that matter and are easy to get wrong:

* Both CCR and FPR use a strict ``>`` against the threshold, so a
  probability of exactly 1 is rejected at theta = 1.
* Maxima and argmaxima run over the K known-class outputs only; the
  extra background output of a K+1 model is never consulted.
* Argmax ties break toward the lowest class index.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import OsrError
from .scores import ScoreTable, to_probabilities

GROUP_NEGATIVE = "negative"
GROUP_UNKNOWN = "unknown"


@dataclass(frozen=True)
class EvaluationGroups:
    """Known-sample probabilities plus one rejection group (negative or
    unknown test samples), kept separate as the curves are."""

    K: int
    known_probs: np.ndarray    # [N_K, C]
    known_labels: np.ndarray   # [N_K], values in 1..K
    group_probs: np.ndarray    # [N_G, C]
    group_name: str

    @property
    def n_known(self) -> int:
        return self.known_probs.shape[0]

    @property
    def n_group(self) -> int:
        return self.group_probs.shape[0]

    def known_correct_scores(self) -> tuple[np.ndarray, np.ndarray]:
        """(correct-class probability, argmax-correct flag) per known sample."""
        idx = self.known_labels - 1
        conf = self.known_probs[np.arange(self.n_known), idx]
        predicted = np.argmax(self.known_probs[:, : self.K], axis=1)
        return conf, predicted == idx

    def group_max_scores(self) -> np.ndarray:
        return self.group_probs[:, : self.K].max(axis=1)


def evaluation_groups(table: ScoreTable, group: str = GROUP_NEGATIVE) -> EvaluationGroups:
    """Split a score table into knowns and the requested rejection group.

    Logit tables are converted to probabilities first.
    """
    if group not in (GROUP_NEGATIVE, GROUP_UNKNOWN):
        raise OsrError(f"group must be 'negative' or 'unknown', got {group!r}")
    table = to_probabilities(table)
    known_mask = table.labels >= 1
    group_label = 0 if group == GROUP_NEGATIVE else -1
    group_mask = table.labels == group_label
    if not np.any(known_mask):
        raise OsrError("score table has no known samples")
    if not np.any(group_mask):
        raise OsrError(f"score table has no {group} samples")
    return EvaluationGroups(
        K=table.K,
        known_probs=table.values[known_mask],
        known_labels=table.labels[known_mask],
        group_probs=table.values[group_mask],
        group_name=group,
    )


def ccr_fpr_at(groups: EvaluationGroups, theta: float) -> tuple[float, float]:
    """Correct classification rate and false positive rate at one
    threshold, both with strict ``>``."""
    if not 0.0 <= theta <= 1.0:
        raise OsrError(f"theta {theta} outside [0, 1]")
    conf, correct = groups.known_correct_scores()
    ccr = float(np.sum(correct & (conf > theta))) / groups.n_known
    fpr = float(np.sum(groups.group_max_scores() > theta)) / groups.n_group
    return ccr, fpr


@dataclass(frozen=True)
class OscrCurve:
    """The OSCR step function, represented exactly: one point per
    distinct (fpr, ccr) value, at the smallest theta attaining it."""

    thetas: np.ndarray
    fprs: np.ndarray
    ccrs: np.ndarray

    def __post_init__(self):
        t, f, c = self.thetas, self.fprs, self.ccrs
        if not (len(t) == len(f) == len(c)) or len(t) == 0:
            raise OsrError("curve arrays empty or mismatched")
        if np.any(np.diff(t) <= 0):
            raise OsrError("curve thetas must be strictly increasing")
        if np.any(np.diff(f) > 0) or np.any(np.diff(c) > 0):
            raise OsrError("fpr and ccr must be non-increasing in theta")
        for arr in (t, f, c):
            if np.any(arr < 0) or np.any(arr > 1):
                raise OsrError("curve values outside [0, 1]")

    def __len__(self) -> int:
        return len(self.thetas)

    def evaluate(self, theta) -> tuple[np.ndarray, np.ndarray]:
        """(fpr, ccr) of the step function at arbitrary thresholds."""
        theta = np.asarray(theta, dtype=np.float64)
        if np.any(theta < 0) or np.any(theta > 1):
            raise OsrError("theta outside [0, 1]")
        idx = np.searchsorted(self.thetas, theta, side="right") - 1
        idx = np.clip(idx, 0, len(self.thetas) - 1)
        return self.fprs[idx], self.ccrs[idx]


def oscr_curve(groups: EvaluationGroups) -> OscrCurve:
    """Sweep the threshold over every value where either rate can step.

    Candidate thresholds are the known correct-class scores and the
    group max-scores plus the endpoints 0 and 1; consecutive duplicate
    (fpr, ccr) pairs collapse onto their first theta.
    """
    conf, correct = groups.known_correct_scores()
    group_scores = groups.group_max_scores()
    n_k, n_g = groups.n_known, groups.n_group

    thetas = np.unique(np.concatenate([conf, group_scores, [0.0, 1.0]]))
    thetas = thetas[(thetas >= 0.0) & (thetas <= 1.0)]

    # strict > counts: for each theta, how many scores exceed it
    conf_ok = np.sort(conf[correct])
    group_sorted = np.sort(group_scores)
    ccr_counts = len(conf_ok) - np.searchsorted(conf_ok, thetas, side="right")
    fpr_counts = n_g - np.searchsorted(group_sorted, thetas, side="right")

    ccrs = ccr_counts / n_k
    fprs = fpr_counts / n_g

    keep = np.ones(len(thetas), dtype=bool)
    keep[1:] = (np.diff(ccrs) != 0) | (np.diff(fprs) != 0)
    return OscrCurve(thetas=thetas[keep], fprs=fprs[keep], ccrs=ccrs[keep])


def ccr_at_fpr(curve: OscrCurve, targets) -> list[float | None]:
    """Best CCR subject to FPR <= target, per target.

    No interpolation: the value is read off the step function. ``None``
    stands for the table dash: the requested FPR region is reachable
    only with zero CCR although the classifier does classify at FPR = 1.
    """
    if len(curve) == 0:
        raise OsrError("empty curve")
    out: list[float | None] = []
    closed_set = float(curve.ccrs[0])
    for target in np.atleast_1d(np.asarray(targets, dtype=np.float64)):
        if not 0.0 < target <= 1.0:
            raise OsrError(f"fpr target {target} outside (0, 1]")
        eligible = curve.fprs <= target
        value = float(curve.ccrs[eligible].max()) if np.any(eligible) else 0.0
        if value == 0.0 and closed_set > 0.0:
            out.append(None)
        else:
            out.append(value)
    return out


@dataclass(frozen=True)
class ConfidenceReport:
    gamma_plus: float
    gamma_minus: float
    C: int
    K: int
    epoch: int | None = None

    @property
    def gamma(self) -> float:
        return (self.gamma_plus + self.gamma_minus) / 2.0


def confidence(
    table: ScoreTable, group: str = GROUP_NEGATIVE, epoch: int | None = None
) -> ConfidenceReport:
    """Gamma validation metric.

    gamma+ averages the correct-class probability over known samples
    (the formula does not require the argmax to be correct); gamma-
    averages 1 - max over known outputs for the rejection group, offset
    by 1/K exactly when the model has no background class (C = K), so a
    perfect rejector scores 1 under both conventions.
    """
    groups = evaluation_groups(table, group)
    conf = groups.known_probs[np.arange(groups.n_known), groups.known_labels - 1]
    gamma_plus = float(conf.mean())
    delta = 1.0 if groups.known_probs.shape[1] == groups.K else 0.0
    gamma_minus = float(
        (1.0 - groups.group_max_scores() + delta / groups.K).mean()
    )
    return ConfidenceReport(
        gamma_plus=gamma_plus,
        gamma_minus=gamma_minus,
        C=groups.known_probs.shape[1],
        K=groups.K,
        epoch=epoch,
    )


def select_best_epoch(reports: list[ConfidenceReport]) -> int:
    """Epoch with the highest gamma; ties go to the earliest epoch."""
    if not reports:
        raise OsrError("no confidence reports")
    epochs = [r.epoch for r in reports]
    if any(e is None for e in epochs):
        raise OsrError("all reports need an epoch number")
    if len(set(epochs)) != len(epochs):
        raise OsrError("duplicate epoch numbers")
    best = max(reports, key=lambda r: (r.gamma, -r.epoch))
    return int(best.epoch)


# -- CSV emission -------------------------------------------------------------

OSCR_MAGIC = "# osr-oscr v1"
CONFIDENCE_MAGIC = "# osr-confidence v1"


def format_oscr_csv(curve: OscrCurve, group: str) -> str:
    lines = [f"{OSCR_MAGIC} group={group}", "theta,fpr,ccr"]
    for t, f, c in zip(curve.thetas, curve.fprs, curve.ccrs):
        lines.append(f"{t:.17g},{f:.17g},{c:.17g}")
    return "\n".join(lines) + "\n"


def parse_oscr_csv(text: str) -> OscrCurve:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(OSCR_MAGIC):
        raise OsrError(f"missing '{OSCR_MAGIC}' header")
    if len(lines) < 2 or lines[1] != "theta,fpr,ccr":
        raise OsrError("missing theta,fpr,ccr header row")
    rows = [tuple(float(v) for v in line.split(",")) for line in lines[2:] if line]
    return OscrCurve(
        thetas=np.array([r[0] for r in rows]),
        fprs=np.array([r[1] for r in rows]),
        ccrs=np.array([r[2] for r in rows]),
    )


def format_confidence_csv(
    reports: list[ConfidenceReport], group: str, best_epoch: int | None = None
) -> str:
    header = f"{CONFIDENCE_MAGIC} group={group}"
    if best_epoch is not None:
        header += f" best_epoch={best_epoch}"
    lines = [header, "epoch,gamma_plus,gamma_minus,gamma"]
    for r in reports:
        lines.append(
            f"{r.epoch},{r.gamma_plus:.17g},{r.gamma_minus:.17g},{r.gamma:.17g}"
        )
    return "\n".join(lines) + "\n"


def parse_confidence_csv(text: str) -> tuple[list[tuple[int, float, float, float]], int | None]:
    lines = text.splitlines()
    if not lines or not lines[0].startswith(CONFIDENCE_MAGIC):
        raise OsrError(f"missing '{CONFIDENCE_MAGIC}' header")
    header = dict(
        kv.split("=", 1) for kv in lines[0][len(CONFIDENCE_MAGIC):].split() if "=" in kv
    )
    best = int(header["best_epoch"]) if "best_epoch" in header else None
    if len(lines) < 2 or lines[1] != "epoch,gamma_plus,gamma_minus,gamma":
        raise OsrError("missing confidence header row")
    rows = []
    for line in lines[2:]:
        if not line:
            continue
        e, gp, gm, g = line.split(",")
        rows.append((int(e), float(gp), float(gm), float(g)))
    return rows, best


def score_histogram(
    table: ScoreTable, group: str, bins: int = 50
) -> tuple[np.ndarray, np.ndarray]:
    """Histogram over [0, 1] of the per-group scores: correct-class
    probability for knowns, max known-class probability for the
    rejection groups. Counts sum to the group size."""
    if bins < 1:
        raise OsrError("bins must be >= 1")
    table = to_probabilities(table)
    if group == "known":
        mask = table.labels >= 1
        if not np.any(mask):
            raise OsrError("score table has no known samples")
        labels = table.labels[mask]
        scores = table.values[mask][np.arange(int(mask.sum())), labels - 1]
    elif group in (GROUP_NEGATIVE, GROUP_UNKNOWN):
        scores = evaluation_groups(table, group).group_max_scores()
    else:
        raise OsrError(f"bad histogram group {group!r}")
    edges = np.linspace(0.0, 1.0, bins + 1)
    counts, _ = np.histogram(np.clip(scores, 0.0, 1.0), bins=edges)
    return counts, edges
