import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from osr.errors import OsrError, ParseError
from osr.scores import (
    ScoreTable,
    format_scores,
    parse_scores,
    read_scores,
    softmax,
    to_probabilities,
    write_scores,
)


def mpmath_softmax(z, digits=50):
    """Extended-precision reference, straight from the definition."""
    import mpmath

    with mpmath.workdps(digits):
        e = [mpmath.exp(mpmath.mpf(repr(float(v)))) for v in z]
        total = sum(e)
        return [float(v / total) for v in e]


def random_table(rng, kind="logits", K=None, bg=False):
    K = K or int(rng.integers(1, 6))
    C = K + 1 if bg else K
    n = int(rng.integers(1, 30))
    values = rng.normal(0, 3, size=(n, C))
    if kind == "probabilities":
        values = softmax(values)
    labels = rng.integers(-1, K + 1, size=n)
    ids = tuple(f"s{i:04d}" for i in range(n))
    return ScoreTable(K=K, kind=kind, sample_ids=ids, labels=labels, values=values)


def test_softmax_symmetry():
    np.testing.assert_allclose(softmax(np.array([0.0, 0.0])), [0.5, 0.5])


def test_softmax_overflow_safe():
    y = softmax(np.array([1000.0, 0.0]))
    assert np.isfinite(y).all()
    np.testing.assert_allclose(y, [1.0, 0.0], atol=1e-300)


def test_softmax_matches_high_precision_oracle():
    z = [1.0, 2.0, 3.0]
    expected = mpmath_softmax(z)
    got = softmax(np.array(z))
    assert np.max(np.abs(got - np.array(expected))) < 1e-12
    assert abs(got.sum() - 1.0) < 1e-12


def test_softmax_rejects_non_finite():
    with pytest.raises(OsrError):
        softmax(np.array([np.nan, 0.0]))
    with pytest.raises(OsrError):
        softmax(np.array([np.inf, 0.0]))


@settings(max_examples=100, deadline=None)
@given(
    st.integers(2, 64).flatmap(
        lambda c: st.tuples(
            st.lists(
                st.floats(-50, 50, allow_nan=False), min_size=c, max_size=c
            ),
            st.floats(-100, 100, allow_nan=False),
        )
    )
)
def test_softmax_shift_invariance(case):
    z, shift = case
    z = np.array(z)
    a = softmax(z)
    b = softmax(z + shift)
    assert np.max(np.abs(a - b)) < 1e-12


def test_probabilities_strictly_positive():
    rng = np.random.default_rng(0)
    for _ in range(50):
        z = rng.normal(0, 10, size=int(rng.integers(1, 20)))
        assert np.all(softmax(z) > 0)


def test_roundtrip_random_tables(tmp_path):
    rng = np.random.default_rng(1)
    for i in range(25):
        table = random_table(
            rng, kind="probabilities" if i % 2 else "logits", bg=bool(i % 3 == 0)
        )
        path = tmp_path / f"scores_{i}.csv"
        write_scores(table, path)
        assert read_scores(path) == table


def test_bad_probability_row_reports_line():
    text = (
        "# osr-scores v1 K=2 C=2 kind=probabilities\n"
        "sample_id,label,v1,v2\n"
        "a,1,0.5,0.5\n"
        "b,1,0.7,0.7\n"
    )
    with pytest.raises(ParseError, match="sum"):
        parse_scores(text)


def test_wrong_row_length_reports_line():
    text = (
        "# osr-scores v1 K=2 C=2 kind=logits\n"
        "sample_id,label,v1,v2\n"
        "a,1,0.5\n"
    )
    with pytest.raises(ParseError, match="line 3"):
        parse_scores(text)


def test_label_out_of_range_rejected():
    with pytest.raises(OsrError, match="label"):
        ScoreTable(
            K=2,
            kind="logits",
            sample_ids=("a",),
            labels=np.array([3]),
            values=np.zeros((1, 2)),
        )


def test_c_must_be_k_or_k_plus_one():
    with pytest.raises(OsrError, match="C="):
        ScoreTable(
            K=2,
            kind="logits",
            sample_ids=("a",),
            labels=np.array([1]),
            values=np.zeros((1, 4)),
        )


def test_to_probabilities_idempotent():
    rng = np.random.default_rng(2)
    table = random_table(rng, kind="probabilities")
    assert to_probabilities(table) is table


def test_to_probabilities_uniform():
    table = ScoreTable(
        K=3,
        kind="logits",
        sample_ids=("a",),
        labels=np.array([1]),
        values=np.zeros((1, 3)),
    )
    probs = to_probabilities(table)
    np.testing.assert_allclose(probs.values, np.full((1, 3), 1 / 3))
    assert probs.kind == "probabilities"


def test_to_probabilities_matches_per_row_oracle():
    rng = np.random.default_rng(3)
    table = random_table(rng, kind="logits")
    probs = to_probabilities(table)
    for row_logits, row_probs in zip(table.values, probs.values):
        expected = mpmath_softmax(list(row_logits))
        assert np.max(np.abs(row_probs - np.array(expected))) < 1e-12


def test_shifted_logits_identical_probabilities():
    rng = np.random.default_rng(4)
    table = random_table(rng, kind="logits")
    shifted = ScoreTable(
        K=table.K,
        kind="logits",
        sample_ids=table.sample_ids,
        labels=table.labels,
        values=table.values + 17.5,
    )
    a = to_probabilities(table).values
    b = to_probabilities(shifted).values
    assert np.max(np.abs(a - b)) < 1e-12


def test_scores_17_digit_roundtrip_is_lossless():
    values = np.array([[np.pi, np.e], [1 / 3, 2 / 3]])
    table = ScoreTable(
        K=2,
        kind="logits",
        sample_ids=("a", "b"),
        labels=np.array([1, 2]),
        values=values,
    )
    again = parse_scores(format_scores(table))
    assert np.array_equal(again.values, values)
