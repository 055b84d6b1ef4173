"""Reference kernels for the three training losses.

All three approaches minimize the same weighted categorical
cross-entropy over softmax outputs; they differ only in targets,
class weights, and which samples train:

* S   -- plain softmax loss, known samples only, C = K.
* BG  -- negatives become an extra class C = K+1, with inverse-frequency
         class weights to balance the oversized negative class.
* EOS -- entropic open-set loss: negatives keep C = K outputs but get
         uniform targets 1/C, pushing them toward maximum entropy.
"""

from __future__ import annotations

import numpy as np

from .errors import OsrError
from .scores import softmax

MODES = ("S", "BG", "EOS")

# categorical cross-entropy is undefined at y=0; clamping preserves
# ordering without branching
_LOG_CLAMP = 1e-300


def output_count(mode: str, K: int) -> int:
    _check_mode(mode)
    if K < 1:
        raise OsrError("K must be >= 1")
    return K + 1 if mode == "BG" else K


def _check_mode(mode: str) -> None:
    if mode not in MODES:
        raise OsrError(f"unknown loss mode {mode!r}; choose from {MODES}")


def make_targets(mode: str, label: int, K: int) -> np.ndarray:
    """Target row for one sample.

    Known labels (1..K) are one-hot in every mode. A negative sample
    (label 0) becomes one-hot at the extra class for BG and the uniform
    vector 1/C for EOS; mode S trains on knowns only and rejects it.
    """
    C = output_count(mode, K)
    if label == 0:
        if mode == "S":
            raise OsrError("mode S trains on known samples only")
        if mode == "BG":
            t = np.zeros(C)
            t[K] = 1.0
            return t
        return np.full(C, 1.0 / C)
    if not 1 <= label <= K:
        raise OsrError(f"label {label} outside 1..{K} (0 for negatives)")
    t = np.zeros(C)
    t[label - 1] = 1.0
    return t


def make_target_batch(mode: str, labels: np.ndarray, K: int) -> np.ndarray:
    return np.stack([make_targets(mode, int(lab), K) for lab in labels])


def bg_class_weights(counts) -> np.ndarray:
    """Inverse-frequency weights w_c = N / (C * N_c)."""
    counts = np.asarray(counts, dtype=np.float64)
    if counts.ndim != 1 or counts.size == 0:
        raise OsrError("counts must be a non-empty vector")
    if np.any(counts < 1):
        bad = int(np.argmax(counts < 1))
        raise OsrError(f"class {bad} has count {counts[bad]}; all counts must be >= 1")
    return counts.sum() / (counts.size * counts)


def _check_shapes(logits, targets, weights):
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    targets = np.atleast_2d(np.asarray(targets, dtype=np.float64))
    weights = np.asarray(weights, dtype=np.float64)
    if logits.shape != targets.shape:
        raise OsrError(f"logits {logits.shape} and targets {targets.shape} disagree")
    if weights.shape != (logits.shape[1],):
        raise OsrError(f"weights shape {weights.shape} does not match C={logits.shape[1]}")
    if logits.shape[0] < 1:
        raise OsrError("batch is empty")
    return logits, targets, weights


def cce_loss(logits, targets, weights) -> float:
    """Weighted categorical cross-entropy, averaged over the batch."""
    logits, targets, weights = _check_shapes(logits, targets, weights)
    y = np.maximum(softmax(logits), _LOG_CLAMP)
    per_sample = -(weights * targets * np.log(y)).sum(axis=1)
    return float(per_sample.mean())


def cce_gradient(logits, targets, weights) -> np.ndarray:
    """Gradient of cce_loss with respect to the logits, shape [N, C].

    Per sample: d/dz_j = y_j * (sum_c w_c t_c) - w_j t_j, scaled by 1/N
    from the batch average.
    """
    logits, targets, weights = _check_shapes(logits, targets, weights)
    y = softmax(logits)
    total = (weights * targets).sum(axis=1, keepdims=True)
    grad = y * total - weights * targets
    return grad / logits.shape[0]


def finite_difference_gradient(logits, targets, weights, step: float = 1e-5) -> np.ndarray:
    """Central-difference gradient of cce_loss, entry by entry."""
    logits = np.atleast_2d(np.asarray(logits, dtype=np.float64))
    grad = np.zeros_like(logits)
    for n in range(logits.shape[0]):
        for c in range(logits.shape[1]):
            up = logits.copy()
            down = logits.copy()
            up[n, c] += step
            down[n, c] -= step
            grad[n, c] = (
                cce_loss(up, targets, weights) - cce_loss(down, targets, weights)
            ) / (2 * step)
    return grad


def random_instance(mode: str, rng: np.random.Generator, max_k: int = 10, max_n: int = 8):
    """Random (logits, targets, weights) triple for one loss mode."""
    K = int(rng.integers(2, max_k + 1))
    N = int(rng.integers(1, max_n + 1))
    C = output_count(mode, K)
    logits = rng.normal(0.0, 2.0, size=(N, C))
    if mode == "S":
        labels = rng.integers(1, K + 1, size=N)
    else:
        labels = rng.integers(0, K + 1, size=N)
    targets = make_target_batch(mode, labels, K)
    if mode == "BG":
        weights = bg_class_weights(rng.integers(1, 100, size=C))
    else:
        weights = np.ones(C)
    return logits, targets, weights


def run_gradient_check(
    instances_per_mode: int = 100,
    seed: int = 20230101,
    step: float = 1e-5,
) -> dict[str, float]:
    """Analytic-vs-finite-difference check over random instances.

    Returns the worst relative error per mode, where the error is the
    max absolute deviation scaled by the gradient's max magnitude.
    """
    rng = np.random.default_rng(seed)
    results: dict[str, float] = {}
    for mode in MODES:
        worst = 0.0
        for _ in range(instances_per_mode):
            logits, targets, weights = random_instance(mode, rng)
            analytic = cce_gradient(logits, targets, weights)
            numeric = finite_difference_gradient(logits, targets, weights, step)
            scale = max(float(np.max(np.abs(numeric))), 1e-12)
            worst = max(worst, float(np.max(np.abs(analytic - numeric))) / scale)
        results[mode] = worst
    return results
