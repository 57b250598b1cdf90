import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from olmse.labels import outlying_labels
from olmse.losses import (LossKind, LossSpec, batch_loss, ce_batch, ce_loss, focal_loss,
                          make_loss_spec, median_frequency_weights, mse_loss, softmax)

from conftest import central_diff, max_rel_err


def test_softmax_examples():
    np.testing.assert_allclose(softmax([0.0, 0.0, 0.0]), [1 / 3] * 3, rtol=1e-15)
    for c in (-50.0, 0.0, 7.5):
        np.testing.assert_allclose(softmax([c, c + math.log(2)]), [1 / 3, 2 / 3], rtol=1e-12)
    y = softmax([1000.0, 0.0])
    assert np.all(np.isfinite(y))
    assert y[0] == pytest.approx(1.0) and y[1] == pytest.approx(0.0, abs=1e-300)
    with pytest.raises(ValueError):
        softmax([np.inf, 0.0])


@settings(max_examples=200)
@given(a=arrays(np.float64, st.integers(2, 12), elements=st.floats(-30, 30)),
       c=st.floats(-100, 100))
def test_softmax_shift_invariance(a, c):
    y = softmax(a)
    assert abs(y.sum() - 1) < 1e-9
    assert np.all(y > 0)
    np.testing.assert_allclose(softmax(a + c), y, atol=1e-12)


def test_ce_uniform_logits():
    out = ce_loss([0.0, 0.0, 0.0], 0)
    assert out.value == pytest.approx(1.0986122886681098, rel=1e-14)  # ln 3
    np.testing.assert_allclose(out.grad, [1 / 3 - 1, 1 / 3, 1 / 3], rtol=1e-14)


def test_ce_perfect_prediction_limit():
    out = ce_loss([60.0, 0.0, 0.0], 0)
    assert 0 <= out.value < 1e-25
    assert np.abs(out.grad).max() < 1e-25


def test_ce_unit_weights_identity():
    rng = np.random.default_rng(0)
    a = rng.normal(size=5)
    plain, weighted = ce_loss(a, 3), ce_loss(a, 3, np.ones(5))
    assert plain.value == weighted.value
    np.testing.assert_array_equal(plain.grad, weighted.grad)


def test_ce_weight_scales():
    a = np.array([0.3, -1.0, 2.0])
    w = np.array([1.0, 4.0, 0.5])
    out = ce_loss(a, 1, w)
    ref = ce_loss(a, 1)
    assert out.value == pytest.approx(4 * ref.value)
    np.testing.assert_allclose(out.grad, 4 * ref.grad)


def test_ce_bad_class():
    with pytest.raises(ValueError):
        ce_loss([0.0, 1.0], 2)


def test_median_frequency_weights():
    np.testing.assert_array_equal(median_frequency_weights([10, 10, 10]), [1, 1, 1])
    np.testing.assert_allclose(median_frequency_weights([100, 10]), [0.55, 5.5], rtol=1e-15)
    np.testing.assert_array_equal(median_frequency_weights([4, 2, 1]), [0.5, 1.0, 2.0])
    with pytest.raises(ValueError):
        median_frequency_weights([])


def test_focal_reduces_to_ce():
    rng = np.random.default_rng(1)
    for _ in range(50):
        k = int(rng.integers(2, 11))
        a = rng.normal(scale=3, size=k)
        t = int(rng.integers(k))
        w = rng.uniform(0.1, 3, size=k)
        f, c = focal_loss(a, t, 0.0, w), ce_loss(a, t, w)
        assert abs(f.value - c.value) <= 1e-12
        assert np.max(np.abs(f.grad - c.grad)) <= 1e-12


def test_focal_values():
    assert focal_loss([0.0, 0.0], 0, 2.0).value == pytest.approx(0.25 * math.log(2), rel=1e-14)
    assert focal_loss([50.0, 0.0], 0, 2.0).value < 1e-40
    with pytest.raises(ValueError):
        focal_loss([0.0, 0.0], 0, -1.0)


def test_focal_fractional_gamma_near_certain():
    out = focal_loss([40.0, 0.0, 0.0], 0, 0.5)
    assert np.all(np.isfinite(out.grad)) and out.value >= 0


def test_mse_examples():
    out = mse_loss([0.5, 0.2], [1.0, 0.0])
    assert out.value == pytest.approx(0.145, rel=1e-14)
    np.testing.assert_allclose(out.grad, [-0.5, 0.2], rtol=1e-15)
    same = mse_loss([1.0, 2.0, 3.0], [1.0, 2.0, 3.0])
    assert same.value == 0 and np.all(same.grad == 0)
    row = outlying_labels([100, 10, 50], 2).targets[1]
    out = mse_loss([0.0, 0.0, 0.0], row)
    assert out.value == 18.0
    np.testing.assert_array_equal(out.grad, [0, -6, 0])
    with pytest.raises(ValueError):
        mse_loss([0.0, 0.0], [0.0, 0.0, 1.0])


def _scalar(kind, t, spec_kw):
    def f(a):
        spec = LossSpec(kind, **spec_kw)
        return batch_loss(spec, a, [t]).values[0]
    return f


@pytest.mark.parametrize("k", [2, 3, 10])
@pytest.mark.parametrize("name", ["ce", "wce", "focal0", "focal2", "mse", "mse-ol1", "mse-ol5"])
def test_gradients_match_central_differences(name, k):
    rng = np.random.default_rng(hash((name, k)) % 2**32)
    counts = rng.integers(1, 1000, size=k)
    spec = {
        "ce": make_loss_spec("ce", counts),
        "wce": make_loss_spec("wce", counts),
        "focal0": make_loss_spec("focal", counts, gamma=0.0),
        "focal2": make_loss_spec("focal", counts, gamma=2.0),
        "mse": make_loss_spec("mse", counts),
        "mse-ol1": make_loss_spec("mse-ol", counts, alpha=1.0),
        "mse-ol5": make_loss_spec("mse-ol", counts, alpha=5.0),
    }[name]
    for _ in range(20):
        a = rng.normal(scale=2, size=k)
        t = int(rng.integers(k))
        analytic = batch_loss(spec, a, [t]).grads[0]
        numeric = central_diff(lambda x: batch_loss(spec, x, [t]).values[0], a)
        assert max_rel_err(analytic, numeric) < 1e-4


@settings(max_examples=100)
@given(a=arrays(np.float64, 4, elements=st.floats(-20, 20)), t=st.integers(0, 3))
def test_nonnegative(a, t):
    assert ce_loss(a, t).value >= 0
    assert mse_loss(a, np.eye(4)[t]).value >= 0
    assert focal_loss(a, t).value >= 0


def test_mse_gradient_dense():
    rng = np.random.default_rng(4)
    for _ in range(100):
        t = rng.normal(size=6)
        a = t + rng.choice([-1, 1], size=6) * rng.uniform(1e-3, 3, size=6)
        assert np.all(mse_loss(a, t).grad != 0)


def test_batch_loss_reductions():
    spec = make_loss_spec("ce", [5, 5, 5])
    a = np.array([[0.2, -0.1, 1.0], [1.0, 2.0, 0.0]])
    one = batch_loss(spec, a[:1], [2])
    assert one.mean == ce_loss(a[0], 2).value
    np.testing.assert_array_equal(one.grads[0], ce_loss(a[0], 2).grad)
    dup = batch_loss(spec, np.vstack([a[:1], a[:1]]), [2, 2])
    assert dup.mean == pytest.approx(one.mean, rel=1e-15)
    mse = make_loss_spec("mse", [5, 5])
    two = batch_loss(mse, [[1.0, math.sqrt(2)], [0.0, 1.0 + math.sqrt(6)]], [0, 1])
    np.testing.assert_allclose(two.values, [1.0, 3.0])
    assert two.mean == pytest.approx(2.0)
    with pytest.raises(ValueError, match="empty"):
        batch_loss(spec, np.zeros((0, 3)), [])


def test_batch_grads_are_per_sample():
    spec = make_loss_spec("mse-ol", [10, 3], alpha=2.0)
    a = np.array([[0.1, 0.2], [0.3, -0.4]])
    out = batch_loss(spec, a, [0, 1])
    np.testing.assert_allclose(out.grads, a - spec.table.targets[[0, 1]])


def test_loss_spec_requirements():
    with pytest.raises(ValueError):
        LossSpec(LossKind.MSE)
    with pytest.raises(ValueError):
        LossSpec(LossKind.WCE)
    with pytest.raises(ValueError):
        make_loss_spec("mse-ol", [3, 4])


def test_vectorised_matches_loop():
    rng = np.random.default_rng(9)
    a = rng.normal(size=(30, 5))
    t = rng.integers(5, size=30)
    out = ce_batch(a, t)
    for i in range(30):
        single = ce_loss(a[i], t[i])
        assert out.values[i] == single.value
        np.testing.assert_array_equal(out.grads[i], single.grad)
