"""Frame ingestion and resizing.

Two mandatory input formats, both producible with one ffmpeg/ImageMagick
command and requiring no codec in this package:

* raw RGB24 streams: interleaved 8-bit RGB, row-major, top-left origin,
  dimensions supplied out of band;
* directories of binary PPM (P6, maxval 255) files, consumed in
  lexicographic filename order.

Bytes map to floats as v / 255. Resizing is half-pixel-centered bilinear
(the align-corners=false convention), applied per channel; a 64x64 input
short-circuits to a copy so pre-resized pipelines skip the work.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class TruncatedStreamError(ValueError):
    """A raw stream ended mid-frame."""


class PpmFormatError(ValueError):
    """A PPM file violates the binary P6 format."""


@dataclass(frozen=True)
class FrameSource:
    """Where frames come from and how to interpret them.

    kind is "raw_rgb24" (path may be None for stdin; width/height
    required) or "ppm_dir". fps is metadata used for real-time-factor
    reporting only.
    """

    kind: str
    path: str | None = None
    width: int | None = None
    height: int | None = None
    fps: float = 25.0

    def __post_init__(self):
        if self.kind not in ("raw_rgb24", "ppm_dir"):
            raise ValueError(f"unknown frame source kind {self.kind!r}")
        if self.kind == "raw_rgb24":
            if not self.width or not self.height or self.width < 1 or self.height < 1:
                raise ValueError("raw_rgb24 sources need width and height >= 1")
        if self.fps <= 0:
            raise ValueError(f"fps must be positive, got {self.fps}")


def _read_full(stream, n):
    """Read exactly n bytes unless EOF arrives first (pipes short-read)."""
    chunks = []
    remaining = n
    while remaining:
        part = stream.read(remaining)
        if not part:
            break
        chunks.append(part)
        remaining -= len(part)
    return b"".join(chunks)


def read_raw_rgb24(stream, width, height):
    """Yield normalized (height, width, 3) float32 frames from a raw stream.

    ``stream`` is a binary file object or a path. A trailing partial
    frame raises TruncatedStreamError after all complete frames have
    been delivered.
    """
    if isinstance(stream, (str, Path)):
        with open(stream, "rb") as fh:
            yield from read_raw_rgb24(fh, width, height)
        return
    frame_bytes = width * height * 3
    index = 0
    while True:
        data = _read_full(stream, frame_bytes)
        if not data:
            return
        if len(data) < frame_bytes:
            raise TruncatedStreamError(
                f"truncated stream at frame {index}: got {len(data)} of {frame_bytes} bytes"
            )
        frame = np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3)
        yield frame.astype(np.float32) / 255.0
        index += 1


def _read_ppm_token(fh, filename):
    """Next whitespace-delimited header token, skipping '#' comments."""
    token = b""
    while True:
        ch = fh.read(1)
        if not ch:
            raise PpmFormatError(f"{filename}: unexpected end of header")
        if ch == b"#":
            while ch not in (b"\n", b""):
                ch = fh.read(1)
            continue
        if ch.isspace():
            if token:
                return token
            continue
        token += ch


def read_ppm(path):
    """Read one binary P6 PPM (maxval 255) into a float32 (h, w, 3) frame."""
    filename = os.fspath(path)
    with open(filename, "rb") as fh:
        magic = fh.read(2)
        if magic != b"P6":
            raise PpmFormatError(f"{filename}: not a binary PPM (magic {magic!r})")
        try:
            width = int(_read_ppm_token(fh, filename))
            height = int(_read_ppm_token(fh, filename))
            maxval = int(_read_ppm_token(fh, filename))
        except ValueError as exc:
            raise PpmFormatError(f"{filename}: malformed header: {exc}") from None
        if width < 1 or height < 1:
            raise PpmFormatError(f"{filename}: bad dimensions {width}x{height}")
        if maxval != 255:
            raise PpmFormatError(f"{filename}: only maxval 255 supported, got {maxval}")
        data = fh.read(width * height * 3)
        if len(data) != width * height * 3:
            raise PpmFormatError(
                f"{filename}: expected {width * height * 3} pixel bytes, got {len(data)}"
            )
    frame = np.frombuffer(data, dtype=np.uint8).reshape(height, width, 3)
    return frame.astype(np.float32) / 255.0


def write_ppm(frame, path):
    """Write one [0, 1] float frame as binary P6."""
    data = _quantize(frame)
    h, w, _ = data.shape
    with open(path, "wb") as fh:
        fh.write(b"P6\n%d %d\n255\n" % (w, h))
        fh.write(data.tobytes())


def iter_ppm_dir(path):
    """Yield frames from ``*.ppm`` files in lexicographic order."""
    directory = Path(path)
    names = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".ppm")
    if not names:
        raise FileNotFoundError(f"{directory}: no .ppm files found")
    for name in names:
        yield read_ppm(name)


def read_frames(source):
    """Yield normalized frames for a :class:`FrameSource`, in order."""
    if source.kind == "ppm_dir":
        yield from iter_ppm_dir(source.path)
        return
    if source.path is None or source.path == "-":
        import sys

        yield from read_raw_rgb24(sys.stdin.buffer, source.width, source.height)
    else:
        yield from read_raw_rgb24(source.path, source.width, source.height)


def _quantize(frame):
    frame = np.asarray(frame)
    return np.clip(np.rint(frame * 255.0), 0, 255).astype(np.uint8)


def write_rgb24(frames, sink):
    """Write frames as a raw RGB24 stream; inverse of read_raw_rgb24 at 8 bits."""
    if isinstance(sink, (str, Path)):
        with open(sink, "wb") as fh:
            write_rgb24(frames, fh)
        return
    for frame in frames:
        sink.write(_quantize(frame).tobytes())


def bilinear_resize(frame, out_height=64, out_width=64):
    """Half-pixel-centered bilinear resize of one (h, w, c) frame.

    Source coordinates are (dst + 0.5) * src / dst - 0.5, clamped to the
    image. Interpolation uses the lerp form a + f * (b - a), so constant
    images are exact fixed points; output is clipped to [0, 1]. A
    size-matching input returns an unmodified copy.
    """
    frame = np.asarray(frame)
    if frame.ndim != 3:
        raise ValueError(f"expected (height, width, channels), got shape {frame.shape}")
    h, w, _ = frame.shape
    if (h, w) == (out_height, out_width):
        return frame.copy()

    sy = np.clip((np.arange(out_height) + 0.5) * h / out_height - 0.5, 0.0, h - 1.0)
    sx = np.clip((np.arange(out_width) + 0.5) * w / out_width - 0.5, 0.0, w - 1.0)
    y0 = np.floor(sy).astype(np.intp)
    x0 = np.floor(sx).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (sy - y0).astype(frame.dtype if frame.dtype.kind == "f" else np.float32)
    fx = (sx - x0).astype(fy.dtype)

    a = frame[y0[:, None], x0[None, :]]
    b = frame[y0[:, None], x1[None, :]]
    c = frame[y1[:, None], x0[None, :]]
    d = frame[y1[:, None], x1[None, :]]
    top = a + fx[None, :, None] * (b - a)
    bottom = c + fx[None, :, None] * (d - c)
    out = top + fy[:, None, None] * (bottom - top)
    return np.clip(out, 0.0, 1.0)


def resize_to_model_input(frames):
    """Map a frame iterator through 64x64 resizing (no-op pass-through kept)."""
    for frame in frames:
        yield bilinear_resize(frame)
