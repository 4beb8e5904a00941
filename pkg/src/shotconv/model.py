"""The five-layer spatio-temporal CNN behind the detector.

The network maps a ``(T, 64, 64, 3)`` pixel volume to ``T - 9``
probability pairs, one per frame from index 5 through ``T - 5`` (0-based).
Prediction ``i`` describes frame ``i + 5``: column 0 is the probability
that it belongs to the same shot as frame ``i + 4``, column 1 the
probability that the pair crosses a transition.

Every layer is a valid convolution with temporal stride 1, so the network
has no fixed temporal size: a longer input yields proportionally more
predictions in one pass, and the whole-input output equals running each
10-frame window independently. Layer stack (kernel extents listed as
width x height x time):

    conv1  5x5x3    3 -> 16   spatial stride 2, bias
    conv2  3x3x3   16 -> 24   spatial stride 2, bias
    conv3  3x3x3   24 -> 32   spatial stride 2, bias
    conv4  6x6x1   32 -> 12   stride 1, no bias
    head   1x1x4   12 -> 2    stride 1, bias

conv1-conv4 are each followed by a ReLU; the head emits logits that a
softmax turns into the probability pair. Spatial extents shrink
64 -> 30 -> 14 -> 6 -> 1 -> 1, temporal extents (10+n) -> (8+n) -> (6+n)
-> (4+n) -> (4+n) -> (1+n). Total trainable parameters: 48698.
"""

from __future__ import annotations

import math
import struct
from contextlib import contextmanager
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .volume import (
    SINGLE,
    ConvLayer,
    ShapeError,
    check_volume,
    conv3d_backward_batch,
    conv3d_forward_batch,
    relu,
    relu_backward,
    sgd_step_arrays,
    softmax,
)

WINDOW = 10  # temporal receptive field in frames
CENTER_OFFSET = 5  # prediction i refers to input frame i + 5
FRAME_HEIGHT = 64
FRAME_WIDTH = 64
FRAME_CHANNELS = 3
EXPECTED_PARAM_COUNT = 48698


@dataclass(frozen=True)
class LayerSpec:
    name: str
    kernel_w: int
    kernel_h: int
    kernel_t: int
    in_channels: int
    out_channels: int
    spatial_stride: int
    has_bias: bool

    @property
    def weight_shape(self):
        return (
            self.kernel_t,
            self.kernel_h,
            self.kernel_w,
            self.in_channels,
            self.out_channels,
        )


ARCHITECTURE = (
    LayerSpec("conv1", 5, 5, 3, 3, 16, 2, True),
    LayerSpec("conv2", 3, 3, 3, 16, 24, 2, True),
    LayerSpec("conv3", 3, 3, 3, 24, 32, 2, True),
    LayerSpec("conv4", 6, 6, 1, 32, 12, 1, False),
    LayerSpec("head", 1, 1, 4, 12, 2, 1, True),
)


@dataclass(frozen=True)
class ModelParams:
    """Frozen weights for the fixed architecture, one ConvLayer per stage."""

    layers: tuple[ConvLayer, ...]

    def __post_init__(self):
        layers = tuple(self.layers)
        if len(layers) != len(ARCHITECTURE):
            raise ShapeError(
                f"expected {len(ARCHITECTURE)} layers, got {len(layers)}"
            )
        for layer, spec in zip(layers, ARCHITECTURE):
            if layer.weights.shape != spec.weight_shape:
                raise ShapeError(
                    f"{spec.name}: expected weight shape {spec.weight_shape}, "
                    f"got {layer.weights.shape}"
                )
            if layer.spatial_stride != spec.spatial_stride:
                raise ShapeError(
                    f"{spec.name}: expected spatial stride {spec.spatial_stride}, "
                    f"got {layer.spatial_stride}"
                )
            if (layer.bias is not None) != spec.has_bias:
                expected = "a bias" if spec.has_bias else "no bias"
                raise ShapeError(f"{spec.name}: expected {expected}")
        object.__setattr__(self, "layers", layers)

    @property
    def conv1(self):
        return self.layers[0]

    @property
    def conv2(self):
        return self.layers[1]

    @property
    def conv3(self):
        return self.layers[2]

    @property
    def conv4(self):
        return self.layers[3]

    @property
    def head(self):
        return self.layers[4]

    @property
    def dtype(self):
        return self.layers[0].dtype

    def astype(self, dtype):
        return ModelParams(tuple(layer.astype(dtype) for layer in self.layers))


@dataclass(frozen=True)
class PredictionSeries:
    """Per-frame probability pairs from one forward pass.

    ``probs[i]`` is ``(p_same, p_transition)`` for the frame at absolute
    video index ``first_frame_index + i``.
    """

    probs: np.ndarray
    first_frame_index: int

    def __len__(self):
        return len(self.probs)

    def labels(self, threshold=None):
        """Binary same-shot labels: argmax, or p_transition >= threshold."""
        if threshold is None:
            same = self.probs[:, 0] >= self.probs[:, 1]
        else:
            same = self.probs[:, 1] < threshold
        return same.astype(np.uint8)


def build_model(seed, dtype=SINGLE):
    """Seeded model initialization.

    Weights draw from U(-b, b) with b = sqrt(6 / fan_in) where fan_in is
    the kernel volume times the input channel count; biases start at zero.
    The same seed always yields bit-identical parameters.
    """
    rng = np.random.default_rng(seed)
    layers = []
    for spec in ARCHITECTURE:
        fan_in = spec.kernel_t * spec.kernel_h * spec.kernel_w * spec.in_channels
        bound = math.sqrt(6.0 / fan_in)
        weights = rng.uniform(-bound, bound, size=spec.weight_shape).astype(dtype)
        bias = np.zeros(spec.out_channels, dtype=dtype) if spec.has_bias else None
        layers.append(ConvLayer(weights, bias, spec.spatial_stride))
    return ModelParams(tuple(layers))


def param_count(params):
    """Total number of trainable scalars (weights plus biases)."""
    return sum(layer.param_count for layer in params.layers)


def _check_frame_geometry(shape, name="frames"):
    t, h, w, c = shape
    if h != FRAME_HEIGHT or w != FRAME_WIDTH:
        raise ShapeError(
            f"{name}: expected {FRAME_HEIGHT}x{FRAME_WIDTH} spatial extents, got {h}x{w}"
        )
    if c != FRAME_CHANNELS:
        raise ShapeError(f"{name}: expected {FRAME_CHANNELS} channels, got {c}")
    if t < WINDOW:
        raise ShapeError(
            f"{name}: time extent {t} is shorter than the {WINDOW}-frame receptive field"
        )


def forward_logits_batch(params, x):
    """Logits ``(n, t - 9, 2)`` for a batch of pixel volumes.

    Skips pixel-range validation; callers feeding untrusted data should
    use :func:`forward`.
    """
    x = np.asarray(x)
    if x.ndim != 5:
        raise ShapeError(f"batch: expected 5 axes (n, t, h, w, c), got {x.ndim}")
    _check_frame_geometry(x.shape[1:], name="batch")
    n_relu = len(params.layers) - 1
    for i, layer in enumerate(params.layers):
        x = conv3d_forward_batch(x, layer)
        if i < n_relu:
            x = relu(x)
    return x.reshape(x.shape[0], x.shape[1], 2)


def forward_with_cache(params, x):
    """Batched forward pass that keeps what the backward pass needs.

    Returns ``(logits, caches)`` where caches holds, per layer, the layer
    input, its im2col matrix, and the pre-activation (None for the head,
    which has no ReLU).
    """
    x = np.asarray(x)
    if x.ndim != 5:
        raise ShapeError(f"batch: expected 5 axes (n, t, h, w, c), got {x.ndim}")
    _check_frame_geometry(x.shape[1:], name="batch")
    caches = []
    n_relu = len(params.layers) - 1
    for i, layer in enumerate(params.layers):
        out, cols = conv3d_forward_batch(x, layer, return_cols=True)
        caches.append((x, cols, out if i < n_relu else None))
        x = relu(out) if i < n_relu else out
    logits = x.reshape(x.shape[0], x.shape[1], 2)
    return logits, caches


def backward_from_cache(params, caches, dlogits):
    """Per-layer ``(grad_weights, grad_bias)`` from upstream logit gradients."""
    g = np.asarray(dlogits)
    g = g.reshape(g.shape[0], g.shape[1], 1, 1, 2)
    grads = [None] * len(params.layers)
    for i in reversed(range(len(params.layers))):
        x_in, cols, pre_act = caches[i]
        if pre_act is not None:
            g = relu_backward(pre_act, g)
        g, gw, gb = conv3d_backward_batch(
            x_in, params.layers[i], g, cols=cols, need_input_grad=i > 0
        )
        grads[i] = (gw, gb)
    return grads


def sgd_step(params, grads, learning_rate):
    """One vanilla SGD step; returns a new ModelParams, inputs untouched.

    ``grads`` is a sequence of ``(grad_weights, grad_bias)`` pairs as
    produced by :func:`backward_from_cache`.
    """
    grads = list(grads)
    if len(grads) != len(params.layers):
        raise ShapeError(
            f"expected {len(params.layers)} gradient pairs, got {len(grads)}"
        )
    layers = []
    for layer, (gw, gb) in zip(params.layers, grads):
        if (gb is None) != (layer.bias is None):
            raise ShapeError("bias gradient does not match layer bias presence")
        if layer.bias is None:
            (new_w,) = sgd_step_arrays([layer.weights], [gw], learning_rate)
            new_b = None
        else:
            new_w, new_b = sgd_step_arrays(
                [layer.weights, layer.bias], [gw, gb], learning_rate
            )
        layers.append(ConvLayer(new_w, new_b, layer.spatial_stride))
    return ModelParams(tuple(layers))


def forward(params, frames):
    """Run the network over a whole pixel volume.

    ``frames`` is ``(T, 64, 64, 3)`` with values in [0, 1] and T >= 10.
    Intermediate memory grows with T; use
    :func:`shotconv.inference.predict_video` for long videos.
    """
    frames = check_volume(frames, pixel=True, name="frames")
    _check_frame_geometry(frames.shape)
    logits = forward_logits_batch(params, frames[np.newaxis])
    probs = softmax(logits, axis=-1)[0]
    return PredictionSeries(probs=probs, first_frame_index=CENTER_OFFSET)


# ---------------------------------------------------------------------------
# Weight files
#
# Layout (all integers and floats little-endian):
#   magic "SBDW" (4 bytes), format version u32 = 1, layer count u32 = 5,
#   then per layer: kw, kh, kt, in, out, stride as u32, has_bias u8,
#   weights as float32 in C order over (kt, kh, kw, in, out),
#   then biases as float32 (out values) if has_bias.
# ---------------------------------------------------------------------------

WEIGHT_MAGIC = b"SBDW"
WEIGHT_VERSION = 1


class WeightFileError(ValueError):
    """Base class for weight-file problems."""


class BadMagicError(WeightFileError):
    pass


class UnsupportedVersionError(WeightFileError):
    pass


class TruncatedFileError(WeightFileError):
    pass


class LayerMismatchError(WeightFileError):
    """Header describes a layer stack other than this model's."""


@contextmanager
def _binary_io(target, mode):
    if isinstance(target, (str, Path)):
        with open(target, mode) as fh:
            yield fh
    else:
        yield target


def save_weights(params, sink):
    """Write ``params`` to ``sink`` (path or binary file object).

    The file stores float32; double-precision parameters are cast.
    Round-trips of float32 parameters are bit-exact.
    """
    with _binary_io(sink, "wb") as fh:
        fh.write(WEIGHT_MAGIC)
        fh.write(struct.pack("<II", WEIGHT_VERSION, len(params.layers)))
        for layer in params.layers:
            fh.write(
                struct.pack(
                    "<6I",
                    layer.kernel_w,
                    layer.kernel_h,
                    layer.kernel_t,
                    layer.in_channels,
                    layer.out_channels,
                    layer.spatial_stride,
                )
            )
            fh.write(struct.pack("<B", 0 if layer.bias is None else 1))
            fh.write(np.ascontiguousarray(layer.weights, dtype="<f4").tobytes())
            if layer.bias is not None:
                fh.write(np.ascontiguousarray(layer.bias, dtype="<f4").tobytes())


def _read_exact(fh, n, what):
    data = fh.read(n)
    if len(data) != n:
        raise TruncatedFileError(
            f"truncated weight file: expected {n} bytes for {what}, got {len(data)}"
        )
    return data


def load_weights(source):
    """Read a weight file written by :func:`save_weights`.

    Raises :class:`BadMagicError`, :class:`UnsupportedVersionError`,
    :class:`TruncatedFileError` or :class:`LayerMismatchError` on the
    corresponding defects.
    """
    with _binary_io(source, "rb") as fh:
        magic = _read_exact(fh, 4, "magic")
        if magic != WEIGHT_MAGIC:
            raise BadMagicError(f"bad magic: expected {WEIGHT_MAGIC!r}, got {magic!r}")
        version, n_layers = struct.unpack("<II", _read_exact(fh, 8, "header"))
        if version != WEIGHT_VERSION:
            raise UnsupportedVersionError(
                f"unsupported weight format version {version} (expected {WEIGHT_VERSION})"
            )
        if n_layers != len(ARCHITECTURE):
            raise LayerMismatchError(
                f"expected {len(ARCHITECTURE)} layers, file declares {n_layers}"
            )
        layers = []
        for spec in ARCHITECTURE:
            header = struct.unpack(
                "<6I", _read_exact(fh, 24, f"{spec.name} header")
            )
            kw, kh, kt, c_in, c_out, stride = header
            declared = (
                kw == spec.kernel_w
                and kh == spec.kernel_h
                and kt == spec.kernel_t
                and c_in == spec.in_channels
                and c_out == spec.out_channels
                and stride == spec.spatial_stride
            )
            if not declared:
                raise LayerMismatchError(
                    f"{spec.name}: file declares kernel {kw}x{kh}x{kt} "
                    f"{c_in}->{c_out} stride {stride}, expected "
                    f"{spec.kernel_w}x{spec.kernel_h}x{spec.kernel_t} "
                    f"{spec.in_channels}->{spec.out_channels} stride {spec.spatial_stride}"
                )
            (has_bias,) = struct.unpack(
                "<B", _read_exact(fh, 1, f"{spec.name} bias flag")
            )
            if bool(has_bias) != spec.has_bias:
                raise LayerMismatchError(
                    f"{spec.name}: bias flag {has_bias} does not match the model"
                )
            n_weights = int(np.prod(spec.weight_shape))
            weights = np.frombuffer(
                _read_exact(fh, 4 * n_weights, f"{spec.name} weights"), dtype="<f4"
            ).reshape(spec.weight_shape)
            bias = None
            if spec.has_bias:
                bias = np.frombuffer(
                    _read_exact(fh, 4 * spec.out_channels, f"{spec.name} bias"),
                    dtype="<f4",
                )
            layers.append(ConvLayer(weights, bias, spec.spatial_stride))
        trailing = fh.read(1)
        if trailing:
            raise WeightFileError("unexpected trailing bytes after the last layer")
    return ModelParams(tuple(layers))
