import numpy as np
import pytest

from wmmd.exceptions import NumericError, ShapeError
from wmmd.gradcheck import block_relative_error, central_difference
from wmmd.numerics import (LOG_FLOOR, cross_entropy, matmul, softmax,
                           softmax_cross_entropy_grad)


class TestMatmul:
    def test_identity(self):
        a = np.array([[1.0, 2.0], [3.0, 4.0]])
        np.testing.assert_array_equal(matmul(np.eye(2), a), a)

    def test_hand_checked_2x2(self):
        out = matmul([[1.0, 2.0], [3.0, 4.0]], [[0.0], [1.0]])
        np.testing.assert_array_equal(out, [[2.0], [4.0]])

    def test_against_triple_loop(self):
        rng = np.random.default_rng(0)
        a = rng.normal(size=(5, 4))
        b = rng.normal(size=(4, 3))
        expected = np.zeros((5, 3))
        for i in range(5):
            for j in range(3):
                for k in range(4):
                    expected[i, j] += a[i, k] * b[k, j]
        np.testing.assert_allclose(matmul(a, b), expected, rtol=1e-12)

    def test_associativity(self):
        rng = np.random.default_rng(1)
        for _ in range(20):
            a = rng.normal(size=(3, 4))
            b = rng.normal(size=(4, 5))
            c = rng.normal(size=(5, 2))
            left = matmul(matmul(a, b), c)
            right = matmul(a, matmul(b, c))
            np.testing.assert_allclose(left, right, rtol=1e-9)

    def test_dimension_mismatch(self):
        with pytest.raises(ShapeError):
            matmul(np.ones((2, 3)), np.ones((2, 3)))

    def test_rejects_nan(self):
        with pytest.raises(NumericError):
            matmul(np.array([[np.nan, 0.0]]), np.ones((2, 1)))


class TestSoftmax:
    def test_symmetry(self):
        np.testing.assert_allclose(softmax([0.0, 0.0, 0.0]), np.full(3, 1 / 3))

    def test_large_logits_no_overflow(self):
        out = softmax([1000.0, 0.0])
        assert np.all(np.isfinite(out))
        assert out[0] == pytest.approx(1.0)
        assert out[1] == pytest.approx(0.0, abs=1e-300)

    def test_matches_direct_high_precision(self):
        logits = np.array([1.0, 2.0, 3.0])
        hi = np.exp(logits.astype(np.longdouble))
        expected = (hi / hi.sum()).astype(np.float64)
        np.testing.assert_allclose(softmax(logits), expected, rtol=1e-14)

    def test_rows_sum_to_one(self):
        rng = np.random.default_rng(2)
        z = rng.normal(scale=10, size=(50, 7))
        sums = softmax(z).sum(axis=1)
        np.testing.assert_allclose(sums, 1.0, atol=1e-12)

    def test_rejects_nonfinite(self):
        with pytest.raises(NumericError):
            softmax([np.inf, 0.0])


class TestCrossEntropy:
    def test_confident_correct(self):
        assert cross_entropy([1.0, 0.0, 0.0], 0) == pytest.approx(0.0, abs=1e-12)

    def test_uniform_gives_log_c(self):
        for c in (2, 3, 5):
            val = cross_entropy(np.full(c, 1.0 / c), c - 1)
            assert val == pytest.approx(np.log(c), rel=1e-12)

    def test_direct_value(self):
        assert cross_entropy([0.7, 0.2, 0.1], 1) == pytest.approx(-np.log(0.2), rel=1e-12)

    def test_floor_keeps_loss_finite(self):
        assert cross_entropy([1.0, 0.0], 1) == pytest.approx(-np.log(LOG_FLOOR))

    def test_label_out_of_range(self):
        with pytest.raises(IndexError):
            cross_entropy([0.5, 0.5], 2)


class TestSoftmaxCrossEntropyGrad:
    def test_matches_central_differences(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            logits = rng.uniform(-1, 1, size=5)
            label = int(rng.integers(0, 5))
            analytic = softmax_cross_entropy_grad(logits, label)
            numeric = central_difference(
                lambda z: cross_entropy(softmax(z), label), logits.copy())
            assert block_relative_error(analytic, numeric) < 1e-4

    def test_sums_to_zero(self):
        g = softmax_cross_entropy_grad([0.3, -0.2, 1.5], 2)
        assert g.sum() == pytest.approx(0.0, abs=1e-12)
