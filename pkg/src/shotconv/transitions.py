"""Synthetic shot-transition generators over 10-frame windows.

Every generator returns ``(frames, labels)``: a ``(10, h, w, 3)`` float
volume and a ``(10,)`` uint8 vector where label ``i`` describes the frame
pair ``(i - 1, i)`` -- 1 when both frames belong to the same shot, 0 when
the pair crosses a cut or touches a blended transition frame. Index 0 has
no predecessor and is 1 by convention.

Gradual transitions blend with weights alpha_j = (j + 1) / (d + 1) for the
j-th of ``d`` transition frames, so a blend is never a pure copy of either
endpoint and a d-frame transition yields d + 1 zero labels. ``start`` is
the window index of transition frame 0; it may be negative or reach past
the window, in which case the window shows only part of the transition.
Clips are indexed window-aligned: frame ``i`` of the output draws on frame
``i`` of each source clip, as if both shots ran throughout the window.

Duration and parameter ranges:

    hard_cut   1 frame
    crop_cut   1 frame, crop factor 0.50-0.70 of full size
    dissolve   3-14 frames
    fade_in    3-14 frames, from black or white
    fade_out   3-14 frames, to black or white
    wipe       6-9 frames, horizontal
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .frameio import bilinear_resize
from .volume import check_volume

WINDOW = 10
CENTER_PAIR_INDEX = 5  # label index of the center pair (frames 4, 5)

DURATION_RANGES = {
    "hard_cut": (1, 1),
    "crop_cut": (1, 1),
    "dissolve": (3, 14),
    "fade_in": (3, 14),
    "fade_out": (3, 14),
    "wipe": (6, 9),
}
TRANSITION_KINDS = tuple(DURATION_RANGES)
CROP_FACTOR_RANGE = (0.50, 0.70)
FADE_COLORS = ("black", "white")


@dataclass(frozen=True)
class TransitionSpec:
    """A transition kind plus its parameters, validated against the ranges."""

    kind: str
    duration: int
    crop_factor: float | None = None
    fade_color: str | None = None
    wipe_direction: str | None = None

    def __post_init__(self):
        if self.kind not in DURATION_RANGES:
            raise ValueError(f"unknown transition kind {self.kind!r}")
        lo, hi = DURATION_RANGES[self.kind]
        if not lo <= self.duration <= hi:
            raise ValueError(
                f"{self.kind} duration {self.duration} outside [{lo}, {hi}]"
            )
        if self.kind == "crop_cut":
            if self.crop_factor is None or not (
                CROP_FACTOR_RANGE[0] <= self.crop_factor <= CROP_FACTOR_RANGE[1]
            ):
                raise ValueError(
                    f"crop factor {self.crop_factor} outside "
                    f"[{CROP_FACTOR_RANGE[0]}, {CROP_FACTOR_RANGE[1]}]"
                )
        if self.kind in ("fade_in", "fade_out") and self.fade_color not in FADE_COLORS:
            raise ValueError(f"fade color must be one of {FADE_COLORS}")
        if self.kind == "wipe":
            direction = self.wipe_direction or "horizontal"
            if direction != "horizontal":
                raise ValueError("only horizontal wipes are supported")
            object.__setattr__(self, "wipe_direction", direction)


def blend_weights(duration):
    """The alpha schedule (j + 1) / (d + 1), endpoints excluded."""
    d = int(duration)
    if d < 1:
        raise ValueError(f"duration must be >= 1, got {duration}")
    return (np.arange(d, dtype=np.float64) + 1.0) / (d + 1.0)


def transition_labels(start, blended, n_frames=WINDOW):
    """Pair labels for a transition with ``blended`` blend frames at ``start``.

    Zeros cover [start, start + blended] intersected with [1, n_frames):
    for a cut (blended == 0) only the boundary pair, for a gradual
    transition every pair touching a blended frame.
    """
    labels = np.ones(n_frames, dtype=np.uint8)
    lo = max(int(start), 1)
    hi = min(int(start) + int(blended), n_frames - 1)
    if hi >= lo:
        labels[lo : hi + 1] = 0
    return labels


def _window(clip, name):
    clip = np.asarray(clip)
    if clip.ndim != 4 or clip.shape[0] < WINDOW:
        have = clip.shape[0] if clip.ndim == 4 else "non-volume"
        raise ValueError(
            f"insufficient source frames: {name} must supply at least "
            f"{WINDOW} frames, got {have}"
        )
    return check_volume(clip[:WINDOW], name=name)


def _check_cut_pos(cut_pos):
    if not 1 <= cut_pos < WINDOW:
        raise ValueError(f"cut position {cut_pos} outside [1, {WINDOW - 1}]")


def make_hard_cut(clip_a, clip_b, cut_pos):
    """Hard cut: frames [0, cut_pos) from A, [cut_pos, 10) from B."""
    _check_cut_pos(cut_pos)
    a = _window(clip_a, "clip_a")
    b = _window(clip_b, "clip_b")
    frames = a.copy()
    frames[cut_pos:] = b[cut_pos:]
    return frames, transition_labels(cut_pos, 0)


def crop_zoom(frames, crop_factor, anchor=(0.5, 0.5)):
    """Crop to ``crop_factor`` of full size and resize back up.

    The crop window of side round(factor * extent) sits at ``anchor``
    (fractions of the slack; (0.5, 0.5) centers it). Works on a single
    frame or a stack of frames.
    """
    frames = np.asarray(frames)
    single = frames.ndim == 3
    stack = frames[np.newaxis] if single else frames
    h, w = stack.shape[1], stack.shape[2]
    side_h = max(1, int(round(h * crop_factor)))
    side_w = max(1, int(round(w * crop_factor)))
    top = int(round(anchor[0] * (h - side_h)))
    left = int(round(anchor[1] * (w - side_w)))
    cropped = stack[:, top : top + side_h, left : left + side_w, :]
    out = np.stack([bilinear_resize(f, h, w) for f in cropped]).astype(frames.dtype)
    return out[0] if single else out


def make_crop_cut(clip, crop_factor, cut_pos, anchor=(0.5, 0.5)):
    """Hard cut to a zoomed-in version of the same scene.

    Frames before ``cut_pos`` are the source; from ``cut_pos`` on they are
    the same source frames cropped to ``crop_factor`` of full size and
    resized back. Labels equal :func:`make_hard_cut`'s.
    """
    if not CROP_FACTOR_RANGE[0] <= crop_factor <= CROP_FACTOR_RANGE[1]:
        raise ValueError(
            f"crop factor {crop_factor} outside "
            f"[{CROP_FACTOR_RANGE[0]}, {CROP_FACTOR_RANGE[1]}]"
        )
    _check_cut_pos(cut_pos)
    a = _window(clip, "clip")
    frames = a.copy()
    frames[cut_pos:] = crop_zoom(a[cut_pos:], crop_factor, anchor)
    return frames, transition_labels(cut_pos, 0)


def _check_duration(kind, duration):
    lo, hi = DURATION_RANGES[kind]
    if not lo <= duration <= hi:
        raise ValueError(f"{kind} duration {duration} outside [{lo}, {hi}]")


def make_dissolve(clip_a, clip_b, duration, start):
    """Linear interpolation from A to B over ``duration`` frames."""
    _check_duration("dissolve", duration)
    a = _window(clip_a, "clip_a")
    b = _window(clip_b, "clip_b")
    alphas = blend_weights(duration)
    frames = a.copy()
    for i in range(WINDOW):
        j = i - start
        if j < 0:
            continue
        if j < duration:
            alpha = alphas[j]
            frames[i] = (1.0 - alpha) * a[i] + alpha * b[i]
        else:
            frames[i] = b[i]
    np.clip(frames, 0.0, 1.0, out=frames)
    return frames, transition_labels(start, duration)


def make_fade(clip, color, duration, direction, start):
    """Linear fade between the clip and a constant black or white frame.

    direction "out" blends clip -> color and holds the color afterwards;
    "in" starts at the color and blends color -> clip. Labels match
    :func:`make_dissolve` for the same (start, duration).
    """
    if color not in FADE_COLORS:
        raise ValueError(f"fade color must be one of {FADE_COLORS}, got {color!r}")
    if direction not in ("in", "out"):
        raise ValueError(f"fade direction must be 'in' or 'out', got {direction!r}")
    kind = "fade_in" if direction == "in" else "fade_out"
    _check_duration(kind, duration)
    a = _window(clip, "clip")
    level = 0.0 if color == "black" else 1.0
    constant = np.full_like(a[0], level)
    alphas = blend_weights(duration)
    frames = np.empty_like(a)
    for i in range(WINDOW):
        j = i - start
        if j < 0:
            frames[i] = a[i] if direction == "out" else constant
        elif j < duration:
            alpha = alphas[j]
            if direction == "out":
                frames[i] = (1.0 - alpha) * a[i] + alpha * constant
            else:
                frames[i] = (1.0 - alpha) * constant + alpha * a[i]
        else:
            frames[i] = constant if direction == "out" else a[i]
    np.clip(frames, 0.0, 1.0, out=frames)
    return frames, transition_labels(start, duration)


def make_wipe(clip_a, clip_b, duration, start):
    """Horizontal wipe: B slides in from the left while A slides out right.

    On transition frame j the boundary sits at column
    x_j = round(width * (j + 1) / (d + 1)); columns [0, x_j) show B's
    rightmost x_j columns, the rest show A's leftmost columns pushed right.
    """
    _check_duration("wipe", duration)
    a = _window(clip_a, "clip_a")
    b = _window(clip_b, "clip_b")
    width = a.shape[2]
    frames = a.copy()
    for i in range(WINDOW):
        j = i - start
        if j < 0:
            continue
        if j < duration:
            boundary = int(np.round(width * (j + 1) / (duration + 1)))
            if boundary > 0:
                frames[i, :, :boundary, :] = b[i, :, width - boundary :, :]
            if boundary < width:
                frames[i, :, boundary:, :] = a[i, :, : width - boundary, :]
        else:
            frames[i] = b[i]
    return frames, transition_labels(start, duration)


def candidate_starts(kind, duration, *, centered, n_frames=WINDOW):
    """Window placements for a transition of ``kind``/``duration``.

    ``centered=True`` yields starts whose center pair label is 0 (the
    transition covers the pair the model classifies); ``centered=False``
    yields starts where a transition is visible in the window but the
    center pair stays 1, for off-center negatives.
    """
    if kind in ("hard_cut", "crop_cut"):
        positions = range(1, n_frames)
        blended = 0
    else:
        positions = range(1 - duration, n_frames)
        blended = duration
    out = []
    for start in positions:
        labels = transition_labels(start, blended, n_frames)
        if not (labels == 0).any():
            continue
        if (labels[CENTER_PAIR_INDEX] == 0) == centered:
            out.append(start)
    return out
