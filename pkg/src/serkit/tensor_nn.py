"""Neural layers with hand-derived forward and backward passes.

Everything operates on plain numpy arrays in NCHW layout. Each layer
caches what its backward pass needs during forward; ``backward`` consumes
the upstream gradient and returns the input gradient, leaving parameter
gradients in ``grads()``. Convolution is cross-correlation with zero
padding, evaluated one kernel offset at a time so the inner contraction
is a single matrix product.
"""

import numpy as np

from .errors import DegenerateBatch, ShapeMismatch


class Layer:
    """Common layer surface; stateless layers keep the defaults."""

    def params(self) -> dict:
        return {}

    def grads(self) -> dict:
        return {}

    def buffers(self) -> dict:
        return {}

    def forward(self, x, train=False):
        raise NotImplementedError

    def backward(self, dout):
        raise NotImplementedError

    def output_shape(self, in_shape):
        """Per-example output shape for a per-example input shape."""
        return tuple(in_shape)


def _fan_in_uniform(rng, shape, fan_in, dtype):
    limit = 1.0 / np.sqrt(fan_in)
    return rng.uniform(-limit, limit, size=shape).astype(dtype)


class Conv2d(Layer):
    """2-D cross-correlation, kernel kH x kW, zero padding, integer stride."""

    def __init__(self, in_channels, out_channels, kernel_size=3, stride=1,
                 padding=1, rng=None, dtype=np.float32):
        if kernel_size < 1 or stride < 1 or padding < 0:
            raise ValueError(
                f"need kernel >= 1, stride >= 1, padding >= 0; "
                f"got k={kernel_size} s={stride} p={padding}"
            )
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size
        self.stride = stride
        self.padding = padding
        k = kernel_size
        if rng is not None:
            self.weights = _fan_in_uniform(rng, (out_channels, in_channels, k, k),
                                           in_channels * k * k, dtype)
        else:
            self.weights = np.zeros((out_channels, in_channels, k, k), dtype=dtype)
        self.bias = np.zeros(out_channels, dtype=dtype)
        self.weights_grad = None
        self.bias_grad = None
        self._padded = None

    def params(self):
        return {"weights": self.weights, "bias": self.bias}

    def grads(self):
        return {"weights": self.weights_grad, "bias": self.bias_grad}

    def output_shape(self, in_shape):
        c, h, w = in_shape
        k, s, p = self.kernel_size, self.stride, self.padding
        return (self.out_channels, (h + 2 * p - k) // s + 1, (w + 2 * p - k) // s + 1)

    def forward(self, x, train=False):
        if x.ndim != 4 or x.shape[1] != self.in_channels:
            raise ShapeMismatch(
                f"conv2d expects (N,{self.in_channels},H,W), got {x.shape}"
            )
        k, s, p = self.kernel_size, self.stride, self.padding
        n, _, h, w = x.shape
        if h + 2 * p < k or w + 2 * p < k:
            raise ShapeMismatch(f"input {h}x{w} smaller than kernel {k} with padding {p}")
        ho = (h + 2 * p - k) // s + 1
        wo = (w + 2 * p - k) // s + 1

        xp = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p))) if p else x
        acc = np.zeros((self.out_channels, n, ho, wo), dtype=x.dtype)
        for i in range(k):
            for j in range(k):
                window = xp[:, :, i:i + s * ho:s, j:j + s * wo:s]
                acc += np.tensordot(self.weights[:, :, i, j], window, axes=([1], [1]))
        self._padded = xp
        self._out_hw = (ho, wo)
        return acc.transpose(1, 0, 2, 3) + self.bias[None, :, None, None]

    def backward(self, dout):
        xp = self._padded
        k, s, p = self.kernel_size, self.stride, self.padding
        n, c = xp.shape[0], xp.shape[1]
        ho, wo = self._out_hw

        self.bias_grad = dout.sum(axis=(0, 2, 3)).astype(self.bias.dtype)
        self.weights_grad = np.zeros_like(self.weights)
        dxp = np.zeros((c, n, xp.shape[2], xp.shape[3]), dtype=xp.dtype)
        for i in range(k):
            for j in range(k):
                window = xp[:, :, i:i + s * ho:s, j:j + s * wo:s]
                self.weights_grad[:, :, i, j] = np.tensordot(
                    dout, window, axes=([0, 2, 3], [0, 2, 3]))
                dxp[:, :, i:i + s * ho:s, j:j + s * wo:s] += np.tensordot(
                    self.weights[:, :, i, j], dout, axes=([0], [1]))
        dx = dxp.transpose(1, 0, 2, 3)
        if p:
            dx = dx[:, :, p:-p, p:-p]
        return dx


class MaxPool2d(Layer):
    """2x2 max pooling, stride 2.

    Output is floor(H/2) x floor(W/2): a trailing odd row/column falls
    outside every window. Ties go to the first element in row-major window
    order, so gradient routing is deterministic.
    """

    def output_shape(self, in_shape):
        c, h, w = in_shape
        return (c, h // 2, w // 2)

    def forward(self, x, train=False):
        n, c, h, w = x.shape
        h2, w2 = h // 2, w // 2
        windows = (x[:, :, :2 * h2, :2 * w2]
                   .reshape(n, c, h2, 2, w2, 2)
                   .transpose(0, 1, 2, 4, 3, 5)
                   .reshape(n, c, h2, w2, 4))
        self.argmax = windows.argmax(axis=-1)
        self._in_shape = x.shape
        return np.take_along_axis(windows, self.argmax[..., None], axis=-1)[..., 0]

    def backward(self, dout):
        n, c, h, w = self._in_shape
        h2, w2 = h // 2, w // 2
        scattered = np.zeros((n, c, h2, w2, 4), dtype=dout.dtype)
        np.put_along_axis(scattered, self.argmax[..., None], dout[..., None], axis=-1)
        dx = np.zeros(self._in_shape, dtype=dout.dtype)
        dx[:, :, :2 * h2, :2 * w2] = (scattered
                                      .reshape(n, c, h2, w2, 2, 2)
                                      .transpose(0, 1, 2, 4, 3, 5)
                                      .reshape(n, c, 2 * h2, 2 * w2))
        return dx


class BatchNorm2d(Layer):
    """Per-channel batch normalization with learned scale and shift.

    Train mode normalizes by biased batch statistics and folds them into
    the running buffers (r <- momentum*r + (1-momentum)*batch); eval mode
    normalizes by the running buffers.
    """

    def __init__(self, channels, eps=1e-5, momentum=0.9, dtype=np.float32):
        self.channels = channels
        self.eps = eps
        self.momentum = momentum
        self.gamma = np.ones(channels, dtype=dtype)
        self.beta = np.zeros(channels, dtype=dtype)
        self.running_mean = np.zeros(channels, dtype=dtype)
        self.running_var = np.ones(channels, dtype=dtype)
        self.gamma_grad = None
        self.beta_grad = None

    def params(self):
        return {"gamma": self.gamma, "beta": self.beta}

    def grads(self):
        return {"gamma": self.gamma_grad, "beta": self.beta_grad}

    def buffers(self):
        return {"running_mean": self.running_mean, "running_var": self.running_var}

    def forward(self, x, train=False):
        if x.ndim != 4 or x.shape[1] != self.channels:
            raise ShapeMismatch(f"batchnorm2d expects (N,{self.channels},H,W), got {x.shape}")
        axes = (0, 2, 3)
        if train:
            m = x.shape[0] * x.shape[2] * x.shape[3]
            if m < 2:
                raise DegenerateBatch(f"batch statistics need >= 2 values per channel, got {m}")
            mean = x.mean(axis=axes)
            var = x.var(axis=axes)  # biased
            self.running_mean[:] = self.momentum * self.running_mean + (1 - self.momentum) * mean
            self.running_var[:] = self.momentum * self.running_var + (1 - self.momentum) * var
        else:
            mean = self.running_mean
            var = self.running_var
        inv_std = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean[None, :, None, None]) * inv_std[None, :, None, None]
        self._xhat = xhat
        self._inv_std = inv_std
        self._train = train
        return self.gamma[None, :, None, None] * xhat + self.beta[None, :, None, None]

    def backward(self, dout):
        axes = (0, 2, 3)
        xhat, inv_std = self._xhat, self._inv_std
        self.gamma_grad = (dout * xhat).sum(axis=axes).astype(self.gamma.dtype)
        self.beta_grad = dout.sum(axis=axes).astype(self.beta.dtype)

        dxhat = dout * self.gamma[None, :, None, None]
        if not self._train:
            return dxhat * inv_std[None, :, None, None]
        # full coupling through the batch mean and variance
        m = dout.shape[0] * dout.shape[2] * dout.shape[3]
        sum_dxhat = dxhat.sum(axis=axes)[None, :, None, None]
        sum_dxhat_xhat = (dxhat * xhat).sum(axis=axes)[None, :, None, None]
        return (inv_std[None, :, None, None] / m) * (
            m * dxhat - sum_dxhat - xhat * sum_dxhat_xhat
        )


class ELU(Layer):
    """x for x > 0, alpha*(e^x - 1) otherwise."""

    def __init__(self, alpha=1.0):
        self.alpha = alpha

    def forward(self, x, train=False):
        pos = x > 0
        y = np.where(pos, x, self.alpha * np.expm1(np.minimum(x, 0.0)))
        self._pos = pos
        self._y = y
        return y

    def backward(self, dout):
        # derivative for x <= 0 is alpha*e^x = value + alpha
        return dout * np.where(self._pos, 1.0, self._y + self.alpha).astype(dout.dtype)


class Dropout(Layer):
    """Inverted dropout: train-time masking with 1/(1-rate) rescale.

    Eval mode is the identity. The mask stream (``self.rng``) is owned by
    the training loop and must be assigned before train-mode forward.
    """

    def __init__(self, rate):
        if not 0 <= rate < 1:
            raise ValueError(f"dropout rate must be in [0, 1), got {rate}")
        self.rate = rate
        self.rng = None
        self._mask = None

    def forward(self, x, train=False):
        if not train or self.rate == 0.0:
            self._mask = None
            return x
        if self.rng is None:
            raise RuntimeError("train-mode dropout needs an RNG stream assigned")
        keep = self.rng.random(x.shape) >= self.rate
        self._mask = keep.astype(x.dtype) / np.asarray(1.0 - self.rate, dtype=x.dtype)
        return x * self._mask

    def backward(self, dout):
        if self._mask is None:
            return dout
        return dout * self._mask


class Flatten(Layer):
    def output_shape(self, in_shape):
        return (int(np.prod(in_shape)),)

    def forward(self, x, train=False):
        self._in_shape = x.shape
        return x.reshape(x.shape[0], -1)

    def backward(self, dout):
        return dout.reshape(self._in_shape)


class Dense(Layer):
    """Affine map x @ W + b for (N, D) inputs."""

    def __init__(self, in_features, out_features, rng=None, dtype=np.float32):
        self.in_features = in_features
        self.out_features = out_features
        if rng is not None:
            self.weights = _fan_in_uniform(rng, (in_features, out_features),
                                           in_features, dtype)
        else:
            self.weights = np.zeros((in_features, out_features), dtype=dtype)
        self.bias = np.zeros(out_features, dtype=dtype)
        self.weights_grad = None
        self.bias_grad = None

    def params(self):
        return {"weights": self.weights, "bias": self.bias}

    def grads(self):
        return {"weights": self.weights_grad, "bias": self.bias_grad}

    def output_shape(self, in_shape):
        return (self.out_features,)

    def forward(self, x, train=False):
        if x.ndim != 2 or x.shape[1] != self.in_features:
            raise ShapeMismatch(f"dense expects (N,{self.in_features}), got {x.shape}")
        self._x = x
        return x @ self.weights + self.bias

    def backward(self, dout):
        self.weights_grad = (self._x.T @ dout).astype(self.weights.dtype)
        self.bias_grad = dout.sum(axis=0).astype(self.bias.dtype)
        return dout @ self.weights.T


def softmax(logits: np.ndarray) -> np.ndarray:
    """Row-wise softmax with max subtraction; rows sum to 1 exactly-ish."""
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)
