import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from olmse.labels import LabelKind, one_hot, outlying_labels, target_for


def naive_outlying(counts, alpha):
    """Pair counts with indices, stable-sort descending by count, hand out 1..K."""
    pairs = sorted(enumerate(counts), key=lambda p: -p[1])  # sorted() is stable
    table = [[0.0] * len(counts) for _ in counts]
    for rank, (cls, _) in enumerate(pairs, start=1):
        table[cls][cls] = rank * alpha
    return np.array(table)


def test_one_hot():
    np.testing.assert_array_equal(one_hot(3).targets, np.eye(3))
    np.testing.assert_array_equal(one_hot(2).targets, [[1, 0], [0, 1]])
    with pytest.raises(ValueError):
        one_hot(1)
    assert one_hot(4).kind is LabelKind.ONE_HOT


def test_outlying_hand_trace():
    table = outlying_labels([100, 10, 50], 2)
    np.testing.assert_array_equal(np.diag(table.targets), [2, 6, 4])
    np.testing.assert_array_equal(table.targets - np.diag(np.diag(table.targets)), 0)
    np.testing.assert_array_equal(target_for(table, 1), [0, 6, 0])


def test_outlying_tie_goes_to_lower_index():
    np.testing.assert_array_equal(np.diag(outlying_labels([5, 5], 1).targets), [1, 2])


def test_rarest_class_is_farthest():
    table = outlying_labels([3, 40, 200], 1)
    norms = np.linalg.norm(table.targets, axis=1)
    assert norms.argmax() == 0 and norms.argmin() == 2


def test_target_for():
    np.testing.assert_array_equal(target_for(one_hot(3), 1), [0, 1, 0])
    with pytest.raises(IndexError):
        target_for(one_hot(3), 3)
    with pytest.raises(IndexError):
        target_for(one_hot(3), -1)
    row = target_for(one_hot(3), 0)
    with pytest.raises(ValueError):
        row[0] = 5.0


@pytest.mark.parametrize("counts,alpha", [([0, 3], 1), ([-1, 3], 1), ([3, 4], 0), ([3, 4], -2), ([5], 1)])
def test_outlying_rejects(counts, alpha):
    with pytest.raises(ValueError):
        outlying_labels(counts, alpha)


counts_st = st.lists(st.integers(1, 50), min_size=2, max_size=40)


@settings(max_examples=300)
@given(counts=counts_st, alpha=st.floats(0.01, 100))
def test_structure(counts, alpha):
    table = outlying_labels(counts, alpha)
    t = table.targets
    k = len(counts)
    off_diag = t - np.diag(np.diag(t))
    assert np.all(off_diag == 0)
    assert sorted(np.round(table.multipliers()).astype(int)) == list(range(1, k + 1))
    for j in range(k):
        for i in range(k):
            if counts[j] > counts[i]:
                assert t[j, j] < t[i, i]


@settings(max_examples=200)
@given(counts=counts_st, alpha=st.floats(0.01, 100))
def test_scaling(counts, alpha):
    np.testing.assert_allclose(outlying_labels(counts, alpha).targets,
                               alpha * outlying_labels(counts, 1.0).targets, rtol=1e-15)


@settings(max_examples=200)
@given(counts=counts_st, alpha=st.floats(0.01, 100))
def test_matches_naive(counts, alpha):
    np.testing.assert_array_equal(outlying_labels(counts, alpha).targets,
                                  naive_outlying(counts, alpha))


def test_one_hot_rows_unit_norm():
    assert np.all(np.linalg.norm(one_hot(7).targets, axis=1) == 1)
