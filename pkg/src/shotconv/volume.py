"""Rank-4 frame volumes and the numeric kernels used to train the detector.

A volume is a plain numpy array with axes ordered ``(time, height, width,
channels)``, C-contiguous, float32 (:data:`SINGLE`) or float64
(:data:`DOUBLE`). Batched variants take a leading sample axis:
``(n, time, height, width, channels)``. This layout is fixed package-wide
and every file format serializes it in C index order.

Convolutions are valid (unpadded) cross-correlations -- kernels are not
flipped -- with an optional spatial stride; the time axis is never strided.
All operations are pure functions: inputs are never written to, and layer
parameters are frozen read-only at construction, so values are safe to
share across threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

SINGLE = np.dtype(np.float32)
DOUBLE = np.dtype(np.float64)

_FLOAT_DTYPES = (SINGLE, DOUBLE)
_VOLUME_AXES = ("time", "height", "width", "channels")


class ShapeError(ValueError):
    """Operands have incompatible shapes; the message names the axis."""


def _as_float(x, dtype=None):
    x = np.asarray(x)
    if dtype is None:
        dtype = x.dtype if x.dtype in _FLOAT_DTYPES else SINGLE
    return np.ascontiguousarray(x, dtype=dtype)


def check_volume(x, *, pixel=False, dtype=None, name="volume"):
    """Validate and return a rank-4 ``(time, height, width, channels)`` array.

    Non-float input is cast to float32. ``pixel=True`` additionally
    requires every value to lie in [0, 1].
    """
    x = np.asarray(x)
    if x.ndim != 4:
        raise ShapeError(
            f"{name}: expected 4 axes (time, height, width, channels), got {x.ndim}"
        )
    for axis, extent in zip(_VOLUME_AXES, x.shape):
        if extent < 1:
            raise ShapeError(f"{name}: {axis} axis must have extent >= 1, got {extent}")
    x = _as_float(x, dtype)
    if pixel:
        lo, hi = float(x.min()), float(x.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(
                f"{name}: pixel values must lie in [0, 1], found range [{lo:.5g}, {hi:.5g}]"
            )
    return x


def check_batch(x, *, pixel=False, dtype=None, name="batch"):
    """Validate a batched volume ``(n, time, height, width, channels)``."""
    x = np.asarray(x)
    if x.ndim != 5:
        raise ShapeError(
            f"{name}: expected 5 axes (n, time, height, width, channels), got {x.ndim}"
        )
    if x.shape[0] < 1:
        raise ShapeError(f"{name}: batch axis must have extent >= 1, got {x.shape[0]}")
    for axis, extent in zip(_VOLUME_AXES, x.shape[1:]):
        if extent < 1:
            raise ShapeError(f"{name}: {axis} axis must have extent >= 1, got {extent}")
    x = _as_float(x, dtype)
    if pixel:
        lo, hi = float(x.min()), float(x.max())
        if lo < 0.0 or hi > 1.0:
            raise ValueError(
                f"{name}: pixel values must lie in [0, 1], found range [{lo:.5g}, {hi:.5g}]"
            )
    return x


@dataclass(frozen=True)
class ConvLayer:
    """Parameters of one valid 3D convolution.

    ``weights`` has axes ``(kt, kh, kw, in_channels, out_channels)``;
    ``bias`` is ``(out_channels,)`` or None for bias-free layers.
    ``spatial_stride`` applies to height and width; temporal stride is
    fixed at 1. Arrays are copied and marked read-only.
    """

    weights: np.ndarray
    bias: np.ndarray | None = None
    spatial_stride: int = 1

    def __post_init__(self):
        w = np.array(self.weights)
        if w.ndim != 5:
            raise ShapeError(
                f"weights: expected 5 axes (kt, kh, kw, in, out), got {w.ndim}"
            )
        if w.dtype not in _FLOAT_DTYPES:
            w = w.astype(SINGLE)
        stride = int(self.spatial_stride)
        if stride < 1:
            raise ValueError(f"spatial_stride must be >= 1, got {self.spatial_stride}")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "spatial_stride", stride)
        if self.bias is not None:
            b = np.array(self.bias, dtype=w.dtype)
            if b.shape != (w.shape[4],):
                raise ShapeError(f"bias: expected shape ({w.shape[4]},), got {b.shape}")
            b.setflags(write=False)
            object.__setattr__(self, "bias", b)

    @property
    def kernel_t(self):
        return self.weights.shape[0]

    @property
    def kernel_h(self):
        return self.weights.shape[1]

    @property
    def kernel_w(self):
        return self.weights.shape[2]

    @property
    def in_channels(self):
        return self.weights.shape[3]

    @property
    def out_channels(self):
        return self.weights.shape[4]

    @property
    def dtype(self):
        return self.weights.dtype

    @property
    def param_count(self):
        return self.weights.size + (0 if self.bias is None else self.bias.size)

    def astype(self, dtype):
        bias = None if self.bias is None else self.bias.astype(dtype)
        return ConvLayer(self.weights.astype(dtype), bias, self.spatial_stride)


def conv_output_shape(input_shape, layer, name="input"):
    """Output extents ``(t', h', w', out_channels)`` of a valid convolution."""
    t, h, w, c = input_shape
    if c != layer.in_channels:
        raise ShapeError(
            f"{name}: channels axis has {c}, layer expects {layer.in_channels}"
        )
    for axis, extent, kernel in (
        ("time", t, layer.kernel_t),
        ("height", h, layer.kernel_h),
        ("width", w, layer.kernel_w),
    ):
        if extent < kernel:
            raise ShapeError(
                f"{name}: {axis} extent {extent} is smaller than kernel extent {kernel}"
            )
    s = layer.spatial_stride
    return (
        t - layer.kernel_t + 1,
        (h - layer.kernel_h) // s + 1,
        (w - layer.kernel_w) // s + 1,
        layer.out_channels,
    )


def _im2col(x, layer):
    """Gather kernel patches of ``x`` into a ``(rows, kt*kh*kw*c)`` matrix.

    Rows run in C order over (n, t', h', w'); columns in C order over
    (kt, kh, kw, c), matching ``layer.weights.reshape(-1, out)``.
    """
    kt, kh, kw = layer.kernel_t, layer.kernel_h, layer.kernel_w
    s = layer.spatial_stride
    win = np.lib.stride_tricks.sliding_window_view(x, (kt, kh, kw), axis=(1, 2, 3))
    win = win[:, :, ::s, ::s]  # (n, t', h', w', c, kt, kh, kw)
    win = win.transpose(0, 1, 2, 3, 5, 6, 7, 4)
    n, to, ho, wo = win.shape[:4]
    return win.reshape(n * to * ho * wo, kt * kh * kw * x.shape[4])


def conv3d_forward_batch(x, layer, *, return_cols=False):
    """Valid 3D cross-correlation over a batch ``(n, t, h, w, c)``.

    ``return_cols=True`` also returns the im2col matrix so a training
    loop can reuse it in the backward pass.
    """
    x = np.asarray(x)
    if x.ndim != 5:
        raise ShapeError(f"input: expected 5 axes (n, t, h, w, c), got {x.ndim}")
    to, ho, wo, co = conv_output_shape(x.shape[1:], layer)
    cols = _im2col(x, layer)
    out = cols @ layer.weights.reshape(-1, co)
    if layer.bias is not None:
        out += layer.bias
    out = out.reshape(x.shape[0], to, ho, wo, co)
    if return_cols:
        return out, cols
    return out


def conv3d_forward(x, layer):
    """Valid 3D cross-correlation of a single volume ``(t, h, w, c)``."""
    x = check_volume(x, name="input")
    return conv3d_forward_batch(x[np.newaxis], layer)[0]


def conv3d_backward_batch(x, layer, upstream_grad, *, cols=None, need_input_grad=True):
    """Gradients of a batched convolution.

    Returns ``(grad_input, grad_weights, grad_bias)`` for upstream
    gradients of the shape :func:`conv3d_forward_batch` produces;
    ``grad_bias`` is None for bias-free layers. Pass ``cols`` to reuse
    the im2col matrix from the forward pass; ``need_input_grad=False``
    skips the input gradient (it is the costly part, and a network's
    first layer never uses it) and returns None in its place.
    """
    x = np.asarray(x)
    if x.ndim != 5:
        raise ShapeError(f"input: expected 5 axes (n, t, h, w, c), got {x.ndim}")
    g = np.asarray(upstream_grad)
    expected = (x.shape[0],) + conv_output_shape(x.shape[1:], layer)
    if g.shape != expected:
        raise ShapeError(f"upstream_grad: expected shape {expected}, got {g.shape}")
    co = layer.out_channels
    gmat = g.reshape(-1, co)
    if cols is None:
        cols = _im2col(x, layer)
    grad_weights = (cols.T @ gmat).reshape(layer.weights.shape)
    grad_bias = gmat.sum(axis=0) if layer.bias is not None else None
    grad_input = None
    if need_input_grad:
        gcols = gmat @ layer.weights.reshape(-1, co).T
        grad_input = _col2im(gcols, x.shape, layer)
    return grad_input, grad_weights, grad_bias


def conv3d_backward(x, layer, upstream_grad):
    """Single-volume convolution gradients; see :func:`conv3d_backward_batch`."""
    x = check_volume(x, name="input")
    g = np.asarray(upstream_grad)
    gx, gw, gb = conv3d_backward_batch(x[np.newaxis], layer, g[np.newaxis])
    return gx[0], gw, gb


def _col2im(gcols, input_shape, layer):
    """Scatter-add patch gradients back onto the input grid."""
    n, t, h, w, c = input_shape
    kt, kh, kw = layer.kernel_t, layer.kernel_h, layer.kernel_w
    s = layer.spatial_stride
    to, ho, wo, _ = conv_output_shape(input_shape[1:], layer)
    g = gcols.reshape(n, to, ho, wo, kt, kh, kw, c)
    out = np.zeros(input_shape, dtype=gcols.dtype)
    for i in range(kt):
        for j in range(kh):
            for k in range(kw):
                out[:, i : i + to, j : j + s * ho : s, k : k + s * wo : s, :] += g[
                    :, :, :, :, i, j, k, :
                ]
    return out


def relu(x):
    """Elementwise max(0, x)."""
    return np.maximum(x, 0)


def relu_backward(x, upstream_grad):
    """Pass the upstream gradient where the forward input was > 0."""
    x = np.asarray(x)
    g = np.asarray(upstream_grad)
    if x.shape != g.shape:
        raise ShapeError(
            f"upstream_grad: expected shape {x.shape} matching input, got {g.shape}"
        )
    return g * (x > 0)


def softmax(logits, axis=-1):
    """Numerically stabilized softmax along ``axis``."""
    z = np.asarray(logits)
    z = z - z.max(axis=axis, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=axis, keepdims=True)


def softmax_cross_entropy(logits, labels):
    """Two-class softmax cross-entropy over the last axis.

    ``logits`` is ``(..., 2)``; ``labels`` holds class indices in {0, 1}
    with shape ``logits.shape[:-1]``. Returns per-position losses
    ``-log softmax(logits)[label]`` and the gradient w.r.t. the logits,
    ``softmax(logits) - one_hot(label)``. Stabilized by max subtraction.
    """
    z = np.asarray(logits)
    if z.shape[-1] != 2:
        raise ShapeError(f"logits: last axis must hold 2 classes, got {z.shape[-1]}")
    y = np.asarray(labels)
    if y.shape != z.shape[:-1]:
        raise ShapeError(
            f"labels: expected shape {z.shape[:-1]} matching logits, got {y.shape}"
        )
    zs = z - z.max(axis=-1, keepdims=True)
    e = np.exp(zs)
    se = e.sum(axis=-1)
    grad = e / se[..., np.newaxis]
    picked = np.take_along_axis(zs, y[..., np.newaxis].astype(np.int64), axis=-1)
    loss = np.log(se) - picked[..., 0]
    grad[..., 0] -= y == 0
    grad[..., 1] -= y == 1
    return loss, grad


def sgd_step_arrays(params, grads, learning_rate):
    """Vanilla SGD over parallel array sequences: each p becomes p - lr*g."""
    params = list(params)
    grads = list(grads)
    if len(params) != len(grads):
        raise ShapeError(f"got {len(params)} param arrays but {len(grads)} gradients")
    out = []
    for i, (p, g) in enumerate(zip(params, grads)):
        p = np.asarray(p)
        g = np.asarray(g)
        if p.shape != g.shape:
            raise ShapeError(
                f"array {i}: param shape {p.shape} does not match grad shape {g.shape}"
            )
        out.append(p - learning_rate * g)
    return out
