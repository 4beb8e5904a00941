"""Procedural clips and composed multi-shot sequences.

Lets tests and the desk-scale training run operate with zero external
media. A procedural clip is a deterministic mixture of drifting sinusoid
gradients plus a drifting band-limited value-noise layer, continuous from
frame to frame; distinct seeds give visually distinct scenes.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import transitions
from .transitions import (
    CROP_FACTOR_RANGE,
    DURATION_RANGES,
    FADE_COLORS,
    blend_weights,
    crop_zoom,
)

_TWO_PI = 2.0 * np.pi


def procedural_clip(seed, n_frames, size=64):
    """Deterministic moving textured clip ``(n_frames, size, size, 3)``.

    The same seed always returns identical float32 frames in [0, 1];
    adjacent frames differ by a small amount and different seeds produce
    clearly different content.
    """
    if n_frames < 1:
        raise ValueError(f"n_frames must be >= 1, got {n_frames}")
    rng = np.random.default_rng(seed)
    t = np.arange(n_frames, dtype=np.float64)[:, None, None]
    y = ((np.arange(size) + 0.5) / size)[None, :, None]
    x = ((np.arange(size) + 0.5) / size)[None, None, :]
    # One scene velocity per clip keeps the drift coherent across channels.
    vx, vy = rng.uniform(-0.012, 0.012, size=2)
    lattice_size = 6
    lattice_v = rng.uniform(-0.01, 0.01, size=2)
    channels = []
    for _ in range(3):
        base = 0.5 + rng.uniform(-0.22, 0.22)  # per-clip tint separates seeds
        n_waves = 4
        fx = rng.uniform(-3.0, 3.0, size=n_waves)
        fy = rng.uniform(-3.0, 3.0, size=n_waves)
        amplitude = rng.uniform(0.4, 1.0, size=n_waves)
        phase = rng.uniform(0.0, _TWO_PI, size=n_waves)
        drift = rng.uniform(-0.05, 0.05, size=n_waves)
        field_sum = np.zeros((n_frames, size, size))
        for k in range(n_waves):
            field_sum += amplitude[k] * np.sin(
                _TWO_PI * (fx[k] * (x + vx * t) + fy[k] * (y + vy * t))
                + phase[k]
                + drift[k] * t
            )
        field_sum *= 0.52 / amplitude.sum()

        lattice = rng.uniform(-1.0, 1.0, size=(lattice_size, lattice_size))
        u = (x + lattice_v[0] * t) % 1.0 * lattice_size
        v = (y + lattice_v[1] * t) % 1.0 * lattice_size
        j0 = np.floor(u).astype(np.intp)
        i0 = np.floor(v).astype(np.intp)
        fu = u - j0
        fv = v - i0
        j1 = (j0 + 1) % lattice_size
        i1 = (i0 + 1) % lattice_size
        j0 %= lattice_size
        i0 %= lattice_size
        top = lattice[i0, j0] + fu * (lattice[i0, j1] - lattice[i0, j0])
        bottom = lattice[i1, j0] + fu * (lattice[i1, j1] - lattice[i1, j0])
        field_sum += 0.16 * (top + fv * (bottom - top))
        channels.append(base + field_sum)
    clip = np.stack(channels, axis=-1)
    return np.clip(clip, 0.0, 1.0).astype(np.float32)


@dataclass
class ComposedSequence:
    """A synthetic video with generator-exact ground truth.

    ``labels[i]`` is the pair label of frames (i - 1, i); ``transitions``
    lists the inclusive zero-label runs, one per event, in frame order.
    """

    frames: np.ndarray
    labels: np.ndarray
    transitions: list
    events: list = field(default_factory=list)

    @property
    def total_frames(self):
        return self.frames.shape[0]


_COMPOSE_KINDS = ("hard_cut", "crop_cut", "dissolve", "fade", "wipe")
_SHOT_RESERVE = 30  # transition frames a shot may consume beyond its body


def compose_sequence(
    clips,
    seed,
    n_transitions=4,
    kinds=_COMPOSE_KINDS,
    shot_frames=(12, 28),
):
    """Chain shots from ``clips`` with synthetic transitions between them.

    ``clips`` is a list of pixel volumes (or (id, volume) pairs), each
    long enough to cover a shot plus transition frames:
    at least ``shot_frames[1] + 2 * _SHOT_RESERVE`` frames. A "fade"
    event is a fade-out into black or white immediately followed by a
    fade-in, forming one ground-truth interval. Deterministic per seed.
    """
    pairs = []
    for i, clip in enumerate(clips):
        if isinstance(clip, tuple):
            pairs.append((str(clip[0]), np.asarray(clip[1])))
        else:
            pairs.append((f"clip-{i:03d}", np.asarray(clip)))
    lo, hi = shot_frames
    if lo < 10 or hi < lo:
        raise ValueError("shot_frames must satisfy 10 <= lo <= hi")
    need = hi + 2 * _SHOT_RESERVE
    short = [(cid, c.shape[0]) for cid, c in pairs if c.shape[0] < need]
    if short:
        detail = ", ".join(f"{cid} has {n}" for cid, n in short)
        raise ValueError(f"insufficient source frames: need >= {need} per clip; {detail}")
    rng = np.random.default_rng(seed)

    # Current shot state: which clip, the read cursor, and the zoom factor
    # accumulated by crop cuts (a crop-cut shot continues the same clip).
    clip_idx = int(rng.integers(len(pairs)))
    cursor = int(rng.integers(0, pairs[clip_idx][1].shape[0] - need + 1))
    zoom = 1.0

    def materialize(ci, start, count, factor):
        raw = pairs[ci][1][start : start + count]
        if factor < 1.0:
            raw = crop_zoom(raw, factor)
        return np.asarray(raw, dtype=np.float32)

    def remaining(ci, at):
        return pairs[ci][1].shape[0] - at

    pieces = []
    zero_runs = []
    events = []
    total = 0

    def emit(piece):
        nonlocal total
        pieces.append(piece)
        total += piece.shape[0]

    length = int(rng.integers(lo, hi + 1))
    emit(materialize(clip_idx, cursor, length, zoom))
    cursor += length

    for _ in range(n_transitions):
        kind = str(rng.choice(kinds))
        if kind == "crop_cut" and (zoom <= 0.5 or remaining(clip_idx, cursor) < need):
            kind = "hard_cut"
        length = int(rng.integers(lo, hi + 1))
        if kind == "crop_cut":
            zero_runs.append((total, total))
            factor = float(rng.uniform(*CROP_FACTOR_RANGE))
            zoom *= factor
            events.append({"kind": kind, "frames": zero_runs[-1], "crop_factor": factor})
            emit(materialize(clip_idx, cursor, length, zoom))
            cursor += length
            continue

        next_idx = int(rng.integers(len(pairs)))
        if len(pairs) > 1:
            while next_idx == clip_idx:
                next_idx = int(rng.integers(len(pairs)))
        next_cursor = int(rng.integers(0, pairs[next_idx][1].shape[0] - need + 1))

        if kind == "hard_cut":
            zero_runs.append((total, total))
            events.append({"kind": kind, "frames": zero_runs[-1]})
        elif kind in ("dissolve", "wipe"):
            d_lo, d_hi = DURATION_RANGES[kind]
            d = int(rng.integers(d_lo, d_hi + 1))
            a_cont = materialize(clip_idx, cursor, d, zoom)
            b_pre = materialize(next_idx, next_cursor, d, 1.0)
            blend = np.empty_like(a_cont)
            if kind == "dissolve":
                for j, alpha in enumerate(blend_weights(d)):
                    blend[j] = (1.0 - alpha) * a_cont[j] + alpha * b_pre[j]
            else:
                width = a_cont.shape[2]
                for j in range(d):
                    boundary = int(np.round(width * (j + 1) / (d + 1)))
                    blend[j] = a_cont[j]
                    if boundary > 0:
                        blend[j, :, :boundary, :] = b_pre[j, :, width - boundary :, :]
                    if boundary < width:
                        blend[j, :, boundary:, :] = a_cont[j, :, : width - boundary, :]
            zero_runs.append((total, total + d))
            events.append({"kind": kind, "frames": zero_runs[-1], "duration": d})
            emit(np.clip(blend, 0.0, 1.0))
            next_cursor += d
        else:  # fade: out into a color, then in from it
            d_out = int(rng.integers(DURATION_RANGES["fade_out"][0], DURATION_RANGES["fade_out"][1] + 1))
            d_in = int(rng.integers(DURATION_RANGES["fade_in"][0], DURATION_RANGES["fade_in"][1] + 1))
            color = str(rng.choice(FADE_COLORS))
            level = 0.0 if color == "black" else 1.0
            a_cont = materialize(clip_idx, cursor, d_out, zoom)
            b_pre = materialize(next_idx, next_cursor, d_in, 1.0)
            blend = np.empty(
                (d_out + d_in,) + a_cont.shape[1:], dtype=np.float32
            )
            for j, alpha in enumerate(blend_weights(d_out)):
                blend[j] = (1.0 - alpha) * a_cont[j] + alpha * level
            for j, alpha in enumerate(blend_weights(d_in)):
                blend[d_out + j] = (1.0 - alpha) * level + alpha * b_pre[j]
            zero_runs.append((total, total + d_out + d_in))
            events.append(
                {
                    "kind": "fade",
                    "frames": zero_runs[-1],
                    "duration": d_out + d_in,
                    "color": color,
                }
            )
            emit(np.clip(blend, 0.0, 1.0))
            next_cursor += d_in

        clip_idx = next_idx
        cursor = next_cursor
        zoom = 1.0
        emit(materialize(clip_idx, cursor, length, zoom))
        cursor += length

    frames = np.concatenate(pieces, axis=0)
    labels = np.ones(total, dtype=np.uint8)
    for start, end in zero_runs:
        labels[start : end + 1] = 0
    return ComposedSequence(frames=frames, labels=labels, transitions=zero_runs, events=events)
