import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from osr.errors import OsrError
from osr.losses import (
    bg_class_weights,
    cce_gradient,
    cce_loss,
    make_target_batch,
    make_targets,
    output_count,
)
from osr.toy import ToyParams, make_toy_dataset, toy_train


def central_difference(logits, targets, weights, step=1e-5):
    """Finite-difference oracle, written independently of the package's
    own checker: perturb one logit at a time."""
    logits = np.array(logits, dtype=np.float64)
    out = np.zeros_like(logits)
    for idx in np.ndindex(*logits.shape):
        plus = logits.copy()
        minus = logits.copy()
        plus[idx] += step
        minus[idx] -= step
        out[idx] = (
            cce_loss(plus, targets, weights) - cce_loss(minus, targets, weights)
        ) / (2 * step)
    return out


# -- targets -------------------------------------------------------------------

def test_one_hot_targets():
    np.testing.assert_array_equal(make_targets("S", 2, 3), [0, 1, 0])


def test_eos_negative_targets_uniform():
    np.testing.assert_allclose(make_targets("EOS", 0, 4), [0.25] * 4)


def test_bg_negative_targets_extra_class():
    np.testing.assert_array_equal(make_targets("BG", 0, 3), [0, 0, 0, 1])
    assert output_count("BG", 3) == 4


def test_s_rejects_negatives():
    with pytest.raises(OsrError, match="known samples only"):
        make_targets("S", 0, 3)


def test_unknown_label_rejected_everywhere():
    for mode in ("S", "BG", "EOS"):
        with pytest.raises(OsrError):
            make_targets(mode, -1, 3)


# -- class weights ----------------------------------------------------------------

def test_balanced_counts_unit_weights():
    np.testing.assert_allclose(bg_class_weights([50, 50]), [1.0, 1.0])


def test_weights_direct_substitution():
    np.testing.assert_allclose(bg_class_weights([60, 30]), [0.75, 1.5])


def test_zero_count_rejected():
    with pytest.raises(OsrError):
        bg_class_weights([10, 0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.integers(1, 10_000), min_size=1, max_size=1000))
def test_weight_identity(counts):
    w = bg_class_weights(counts)
    assert abs(float(np.dot(counts, w)) - sum(counts)) < 1e-9 * sum(counts)


# -- loss values -------------------------------------------------------------------

def test_perfect_prediction_loss_vanishes():
    logits = np.array([[50.0, 0.0, 0.0]])
    targets = make_target_batch("S", [1], 3)
    assert cce_loss(logits, targets, np.ones(3)) < 1e-12


def test_uniform_output_one_hot_loss_is_log_k():
    K = 4
    logits = np.zeros((1, K))
    targets = make_target_batch("S", [2], K)
    assert abs(cce_loss(logits, targets, np.ones(K)) - math.log(K)) < 1e-10


def test_eos_negative_uniform_loss_is_log_c():
    C = 10
    logits = np.zeros((1, C))
    targets = make_target_batch("EOS", [0], C)
    assert abs(cce_loss(logits, targets, np.ones(C)) - math.log(C)) < 1e-10


@settings(max_examples=200, deadline=None)
@given(
    st.integers(2, 12).flatmap(
        lambda c: st.lists(
            st.floats(-30, 30, allow_nan=False), min_size=c, max_size=c
        )
    )
)
def test_eos_negative_loss_lower_bound(logits):
    C = len(logits)
    targets = make_target_batch("EOS", [0], C)
    loss = cce_loss(np.array([logits]), targets, np.ones(C))
    assert loss >= math.log(C) - 1e-12


def test_eos_lower_bound_equality_iff_uniform():
    C = 6
    targets = make_target_batch("EOS", [0], C)
    at_uniform = cce_loss(np.zeros((1, C)), targets, np.ones(C))
    assert abs(at_uniform - math.log(C)) < 1e-12
    off = np.zeros((1, C))
    off[0, 0] = 0.1
    assert cce_loss(off, targets, np.ones(C)) > math.log(C) + 1e-6


def test_loss_nonnegative_one_hot():
    rng = np.random.default_rng(11)
    for _ in range(100):
        K = int(rng.integers(2, 8))
        n = int(rng.integers(1, 6))
        logits = rng.normal(0, 5, size=(n, K))
        labels = rng.integers(1, K + 1, size=n)
        targets = make_target_batch("S", labels, K)
        assert cce_loss(logits, targets, np.ones(K)) >= 0.0


def test_shape_mismatch_rejected():
    with pytest.raises(OsrError):
        cce_loss(np.zeros((1, 3)), np.zeros((1, 4)), np.ones(3))
    with pytest.raises(OsrError):
        cce_loss(np.zeros((1, 3)), np.zeros((1, 3)), np.ones(4))


# -- gradients ----------------------------------------------------------------------

def test_gradient_zero_at_perfect_prediction():
    logits = np.array([[60.0, 0.0, 0.0]])
    targets = make_target_batch("S", [1], 3)
    grad = cce_gradient(logits, targets, np.ones(3))
    assert np.max(np.abs(grad)) < 1e-12


def test_gradient_zero_at_entropy_maximum():
    C = 5
    logits = np.zeros((1, C))
    targets = make_target_batch("EOS", [0], C)
    grad = cce_gradient(logits, targets, np.ones(C))
    assert np.max(np.abs(grad)) < 1e-15


def test_gradient_matches_finite_differences():
    rng = np.random.default_rng(123)
    for mode in ("S", "BG", "EOS"):
        for _ in range(20):
            K = int(rng.integers(2, 11))
            n = int(rng.integers(1, 9))
            C = output_count(mode, K)
            logits = rng.normal(0, 2, size=(n, C))
            lo = 1 if mode == "S" else 0
            labels = rng.integers(lo, K + 1, size=n)
            targets = make_target_batch(mode, labels, K)
            weights = (
                bg_class_weights(rng.integers(1, 50, size=C))
                if mode == "BG"
                else np.ones(C)
            )
            analytic = cce_gradient(logits, targets, weights)
            numeric = central_difference(logits, targets, weights)
            scale = max(float(np.max(np.abs(numeric))), 1e-12)
            assert np.max(np.abs(analytic - numeric)) / scale < 1e-4


# -- toy data and training ------------------------------------------------------------

SMALL_PARAMS = ToyParams(
    known_means=((4.0, 0.0), (-4.0, 0.0)),
    negative_means=((0.0, 4.0),),
    unknown_means=((0.0, -4.0),),
    points_per_cluster=30,
    std=0.8,
)


def test_toy_dataset_counts_balanced():
    data = make_toy_dataset(SMALL_PARAMS, 5)
    assert int(np.sum(data.labels >= 1)) == 60
    assert int(np.sum(data.labels == 1)) == 30
    assert int(np.sum(data.labels == 2)) == 30


def test_toy_dataset_deterministic():
    a = make_toy_dataset(SMALL_PARAMS, 5)
    b = make_toy_dataset(SMALL_PARAMS, 5)
    assert np.array_equal(a.x, b.x) and np.array_equal(a.labels, b.labels)


def test_toy_unknowns_never_train():
    data = make_toy_dataset(SMALL_PARAMS, 5)
    for mode in ("S", "BG", "EOS"):
        _, labels, _ = data.training_subset(mode)
        assert not np.any(labels == -1)


def test_toy_degenerate_params_rejected():
    with pytest.raises(OsrError):
        make_toy_dataset(
            ToyParams(((0, 0),), ((1, 1),), ((2, 2),), 10, 1.0), 1
        )
    with pytest.raises(OsrError):
        make_toy_dataset(
            ToyParams(((0, 0), (1, 0)), ((1, 1),), ((2, 2),), 10, 0.0), 1
        )


def test_toy_train_separable_reaches_full_accuracy():
    data = make_toy_dataset(SMALL_PARAMS, 5)
    model = toy_train(data, "S", 300, 0.1, 7)
    x, labels = data.subset(1, 2)
    predictions = np.argmax(model.logits(x), axis=1) + 1
    assert np.mean(predictions == labels) == 1.0


def test_toy_train_zero_epochs_returns_init():
    data = make_toy_dataset(SMALL_PARAMS, 5)
    a = toy_train(data, "EOS", 0, 0.1, 7)
    b = toy_train(data, "EOS", 40, 0.1, 7)
    assert len(a.loss_history) == 1
    assert not np.array_equal(a.params, b.params)


def test_toy_train_bitwise_deterministic():
    data = make_toy_dataset(SMALL_PARAMS, 5)
    a = toy_train(data, "BG", 50, 0.1, 7)
    b = toy_train(data, "BG", 50, 0.1, 7)
    assert np.array_equal(a.params, b.params)


def test_toy_train_loss_non_increasing():
    data = make_toy_dataset(SMALL_PARAMS, 5)
    for mode in ("S", "BG", "EOS"):
        history = toy_train(data, mode, 150, 0.02, 7).loss_history
        diffs = np.diff(history)
        assert np.all(diffs <= 1e-6)


def test_toy_train_s_excludes_negatives():
    data = make_toy_dataset(SMALL_PARAMS, 5)
    model = toy_train(data, "S", 10, 0.1, 7)
    assert model.excluded_negatives == 30
    assert toy_train(data, "EOS", 10, 0.1, 7).excluded_negatives == 0


def test_eos_rejects_negatives_better_than_s():
    # the qualitative core: entropic training raises rejection confidence
    from osr.metrics import confidence
    from osr.scores import to_probabilities
    from osr.toy import toy_score_table

    train = make_toy_dataset(SMALL_PARAMS, 5)
    held_out = make_toy_dataset(SMALL_PARAMS, 6)
    gammas = {}
    for mode in ("S", "EOS"):
        model = toy_train(train, mode, 250, 0.08, 7)
        table = to_probabilities(toy_score_table(model, held_out))
        gammas[mode] = confidence(table, "negative").gamma_minus
    assert gammas["EOS"] > gammas["S"]
