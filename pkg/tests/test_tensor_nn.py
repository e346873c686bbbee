import numpy as np
import pytest

from references import conv2d_reference, matmul_reference, maxpool2d_reference
from serkit.errors import DegenerateBatch, ShapeMismatch
from serkit.rng import stream
from serkit.tensor_nn import (
    ELU,
    BatchNorm2d,
    Conv2d,
    Dense,
    Dropout,
    Flatten,
    MaxPool2d,
    softmax,
)


def make_conv(c_in, c_out, k=3, stride=1, padding=1, seed=0):
    return Conv2d(c_in, c_out, k, stride, padding,
                  rng=np.random.default_rng(seed), dtype=np.float64)


class TestConv2d:
    def test_identity_kernel(self):
        layer = Conv2d(1, 1, kernel_size=1, stride=1, padding=0, dtype=np.float64)
        layer.weights[0, 0, 0, 0] = 1.0
        x = np.random.default_rng(0).standard_normal((2, 1, 5, 6))
        np.testing.assert_array_equal(layer.forward(x), x)

    def test_ones_kernel_sums_window(self):
        layer = Conv2d(1, 1, kernel_size=3, stride=1, padding=0, dtype=np.float64)
        layer.weights[:] = 1.0
        out = layer.forward(np.ones((1, 1, 4, 4)))
        np.testing.assert_array_equal(out, np.full((1, 1, 2, 2), 9.0))

    @pytest.mark.parametrize("seed", range(4))
    def test_matches_bruteforce(self, seed):
        rng = np.random.default_rng(seed)
        stride = int(rng.integers(1, 3))
        padding = int(rng.integers(0, 3))
        layer = make_conv(3, 4, k=3, stride=stride, padding=padding, seed=seed)
        x = rng.standard_normal((2, 3, 8, 8))
        expected = conv2d_reference(x, layer.weights, layer.bias, stride, padding)
        np.testing.assert_allclose(layer.forward(x), expected, rtol=1e-10, atol=1e-12)

    def test_channel_mismatch(self):
        with pytest.raises(ShapeMismatch):
            make_conv(3, 4).forward(np.zeros((1, 2, 8, 8)))

    def test_kernel_larger_than_padded_input(self):
        with pytest.raises(ShapeMismatch):
            Conv2d(1, 1, kernel_size=5, padding=0, dtype=np.float64).forward(np.zeros((1, 1, 3, 3)))

    def test_backward_shapes(self):
        layer = make_conv(3, 5, stride=2, padding=1, seed=1)
        x = np.random.default_rng(1).standard_normal((2, 3, 9, 9))
        out = layer.forward(x)
        dx = layer.backward(np.ones_like(out))
        assert dx.shape == x.shape
        assert layer.grads()["weights"].shape == layer.weights.shape
        assert layer.grads()["bias"].shape == layer.bias.shape


class TestMaxPool2d:
    def test_small_window_and_routing(self):
        layer = MaxPool2d()
        x = np.array([[[[1.0, 2.0], [3.0, 4.0]]]])
        out = layer.forward(x)
        np.testing.assert_array_equal(out, [[[[4.0]]]])
        dx = layer.backward(np.array([[[[1.0]]]]))
        np.testing.assert_array_equal(dx, [[[[0.0, 0.0], [0.0, 1.0]]]])

    def test_tie_breaks_to_first_row_major(self):
        layer = MaxPool2d()
        x = np.full((1, 1, 2, 2), 7.0)
        out = layer.forward(x)
        np.testing.assert_array_equal(out, [[[[7.0]]]])
        dx = layer.backward(np.array([[[[2.5]]]]))
        np.testing.assert_array_equal(dx, [[[[2.5, 0.0], [0.0, 0.0]]]])

    @pytest.mark.parametrize("seed", range(3))
    def test_matches_bruteforce(self, seed):
        x = np.random.default_rng(seed).standard_normal((1, 1, 6, 6))
        np.testing.assert_array_equal(MaxPool2d().forward(x), maxpool2d_reference(x))

    def test_odd_dims_floor(self):
        x = np.random.default_rng(0).standard_normal((2, 3, 65, 33))
        layer = MaxPool2d()
        out = layer.forward(x)
        assert out.shape == (2, 3, 32, 16)
        # trailing row/col receives no gradient
        dx = layer.backward(np.ones_like(out))
        assert not dx[:, :, 64, :].any()
        assert not dx[:, :, :, 32].any()
        assert layer.output_shape((3, 65, 33)) == (3, 32, 16)


class TestBatchNorm2d:
    def test_normalizes_in_train_mode(self):
        layer = BatchNorm2d(3, dtype=np.float64)
        x = np.random.default_rng(0).standard_normal((8, 3, 4, 4)) * 3.0 + 5.0
        out = layer.forward(x, train=True)
        means = out.mean(axis=(0, 2, 3))
        variances = out.var(axis=(0, 2, 3))
        np.testing.assert_allclose(means, 0.0, atol=1e-6)
        np.testing.assert_allclose(variances, 1.0, atol=1e-4)

    def test_affine_contract(self):
        layer = BatchNorm2d(2, dtype=np.float64)
        layer.gamma[:] = 2.0
        layer.beta[:] = 3.0
        x = np.random.default_rng(1).standard_normal((16, 2, 5, 5))
        out = layer.forward(x, train=True)
        np.testing.assert_allclose(out.mean(axis=(0, 2, 3)), 3.0, atol=1e-6)
        np.testing.assert_allclose(out.std(axis=(0, 2, 3)), 2.0, atol=1e-4)

    def test_running_stats_update_and_eval(self):
        layer = BatchNorm2d(1, momentum=0.9, dtype=np.float64)
        x = np.random.default_rng(2).standard_normal((4, 1, 3, 3)) + 2.0
        layer.forward(x, train=True)
        np.testing.assert_allclose(layer.running_mean,
                                   0.9 * 0.0 + 0.1 * x.mean(), rtol=1e-12)
        np.testing.assert_allclose(layer.running_var,
                                   0.9 * 1.0 + 0.1 * x.var(), rtol=1e-12)
        # eval mode must use the running statistics, not batch statistics
        y1 = layer.forward(x, train=False)
        y2 = layer.forward(x[:2], train=False)
        np.testing.assert_array_equal(y1[:2], y2)

    def test_degenerate_batch(self):
        layer = BatchNorm2d(3, dtype=np.float64)
        with pytest.raises(DegenerateBatch):
            layer.forward(np.zeros((1, 3, 1, 1)), train=True)

    def test_wrong_channels(self):
        with pytest.raises(ShapeMismatch):
            BatchNorm2d(3).forward(np.zeros((2, 4, 2, 2)), train=True)


class TestELU:
    def test_fixed_points(self):
        layer = ELU()
        x = np.array([0.0, 1.0, -1.0, 4.5])
        out = layer.forward(x)
        np.testing.assert_allclose(
            out, [0.0, 1.0, np.expm1(-1.0), 4.5], rtol=1e-12)
        assert out[2] == pytest.approx(-0.6321205588285577)

    def test_backward_values(self):
        layer = ELU(alpha=1.0)
        x = np.array([2.0, -2.0])
        layer.forward(x)
        grad = layer.backward(np.ones(2))
        np.testing.assert_allclose(grad, [1.0, np.exp(-2.0)], rtol=1e-12)

    def test_no_overflow_for_large_negatives(self):
        out = ELU().forward(np.array([-1e4]))
        assert np.isfinite(out).all()
        assert out[0] == pytest.approx(-1.0)


class TestDropout:
    def test_rate_zero_identity(self):
        layer = Dropout(0.0)
        x = np.random.default_rng(0).standard_normal((3, 4))
        assert layer.forward(x, train=True) is x
        assert layer.forward(x, train=False) is x

    def test_eval_identity(self):
        layer = Dropout(0.5)
        x = np.random.default_rng(1).standard_normal((3, 4))
        assert layer.forward(x, train=False) is x

    def test_train_statistics(self):
        layer = Dropout(0.5)
        layer.rng = stream(123, "dropout")
        x = np.ones(100_000)
        out = layer.forward(x, train=True)
        survivors = np.count_nonzero(out)
        # 3 sigma around n*p with p = 0.5
        assert abs(survivors - 50_000) < 3 * np.sqrt(100_000 * 0.25)
        assert out.mean() == pytest.approx(1.0, rel=0.02)
        assert set(np.unique(out)) == {0.0, 2.0}

    def test_backward_uses_same_mask(self):
        layer = Dropout(0.3)
        layer.rng = stream(5, "dropout")
        x = np.ones((50, 50))
        out = layer.forward(x, train=True)
        grad = layer.backward(np.ones_like(x))
        np.testing.assert_array_equal(grad, out)

    def test_requires_rng_in_train(self):
        with pytest.raises(RuntimeError):
            Dropout(0.5).forward(np.ones(3), train=True)

    def test_invalid_rate(self):
        with pytest.raises(ValueError):
            Dropout(1.0)


class TestDense:
    def test_identity(self):
        layer = Dense(3, 3, dtype=np.float64)
        layer.weights[:] = np.eye(3)
        x = np.random.default_rng(0).standard_normal((4, 3))
        np.testing.assert_array_equal(layer.forward(x), x)

    def test_affine_example(self):
        layer = Dense(2, 2, dtype=np.float64)
        layer.weights[:] = np.eye(2)
        layer.bias[:] = [10.0, 20.0]
        np.testing.assert_array_equal(layer.forward(np.array([[1.0, 2.0]])),
                                      [[11.0, 22.0]])

    def test_matches_matmul_oracle(self):
        rng = np.random.default_rng(3)
        layer = Dense(5, 4, rng=rng, dtype=np.float64)
        x = rng.standard_normal((3, 5))
        expected = matmul_reference(x, layer.weights) + layer.bias
        np.testing.assert_allclose(layer.forward(x), expected, rtol=1e-12, atol=1e-12)

    def test_shape_mismatch(self):
        with pytest.raises(ShapeMismatch):
            Dense(5, 4).forward(np.zeros((3, 6)))


class TestSoftmax:
    def test_uniform_on_equal_logits(self):
        np.testing.assert_allclose(softmax(np.zeros((1, 4))), np.full((1, 4), 0.25))

    def test_large_logits_no_overflow(self):
        out = softmax(np.array([[1000.0, 1000.0]]))
        np.testing.assert_array_equal(out, [[0.5, 0.5]])

    def test_known_values(self):
        out = softmax(np.array([[1.0, 2.0, 3.0]]))
        np.testing.assert_allclose(out, [[0.09003057, 0.24472847, 0.66524096]],
                                   atol=1e-4)

    def test_rows_sum_to_one_strictly_positive(self):
        rng = np.random.default_rng(7)
        out = softmax(rng.standard_normal((50, 12)) * 30)
        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)
        assert (out > 0).all()


class TestFlatten:
    def test_roundtrip(self):
        layer = Flatten()
        x = np.arange(24.0).reshape(2, 3, 2, 2)
        out = layer.forward(x)
        assert out.shape == (2, 12)
        np.testing.assert_array_equal(layer.backward(out), x)


def test_no_nan_inf_through_random_stack():
    rng = np.random.default_rng(9)
    x = rng.standard_normal((4, 3, 16, 16))
    layers = [make_conv(3, 8, seed=1), BatchNorm2d(8, dtype=np.float64), ELU(), MaxPool2d()]
    for layer in layers:
        x = layer.forward(x, train=True)
        assert np.isfinite(x).all()
