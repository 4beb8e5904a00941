"""Chunked whole-video inference and label-to-shot assembly.

Videos are processed in windows of 100 frames advancing by 91, so
consecutive windows share 9 frames and every frame from index 5 through
T - 5 gets exactly one prediction. A shorter final window is re-anchored
to end at the last frame and duplicate positions are dropped, which keeps
the chunked output bit-for-bit identical in coverage to a single whole
video pass (and numerically identical within float tolerance). The
unpredictable boundary frames (the first 5 and last 4) are filled with
"same shot".
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .model import CENTER_OFFSET, WINDOW, forward

CHUNK_FRAMES = 100
CHUNK_OVERLAP = WINDOW - 1


class VideoTooShortError(ValueError):
    pass


@dataclass(frozen=True)
class ShotSegment:
    """Inclusive frame interval belonging to one shot."""

    start_frame: int
    end_frame: int

    def __post_init__(self):
        if self.end_frame < self.start_frame or self.start_frame < 0:
            raise ValueError(f"bad segment [{self.start_frame}, {self.end_frame}]")

    @property
    def length(self):
        return self.end_frame - self.start_frame + 1


@dataclass(frozen=True)
class TransitionEvent:
    """Inclusive frame interval of transition-labeled frames."""

    start_frame: int
    end_frame: int

    def __post_init__(self):
        if self.end_frame < self.start_frame or self.start_frame < 0:
            raise ValueError(f"bad event [{self.start_frame}, {self.end_frame}]")

    @property
    def length(self):
        return self.end_frame - self.start_frame + 1


@dataclass
class FrameLabels:
    """Per-frame labels and probabilities for a whole video.

    ``labels[i]`` is 1 when frame i belongs to the same shot as frame
    i - 1 (boundary frames carry the fill value 1). ``probs[k]`` is the
    (p_same, p_transition) pair for frame ``first_pred_frame + k``.
    """

    total_frames: int
    labels: np.ndarray
    probs: np.ndarray
    first_pred_frame: int = CENTER_OFFSET


def _iter_frames(frames):
    if isinstance(frames, np.ndarray):
        if frames.ndim != 4:
            raise ValueError(f"expected (T, h, w, c) frames, got shape {frames.shape}")
        return iter(frames)
    return iter(frames)


def predict_video(params, frames, *, chunk_frames=CHUNK_FRAMES, threshold=None):
    """Label every frame of a video with bounded memory.

    ``frames`` is a (T, 64, 64, 3) array or any iterator of (64, 64, 3)
    frames in [0, 1]; T must be at least 10. ``threshold`` overrides the
    argmax decision: a frame is a transition when p_transition reaches it.
    """
    if chunk_frames < WINDOW:
        raise ValueError(f"chunk_frames must be >= {WINDOW}, got {chunk_frames}")
    stride = chunk_frames - CHUNK_OVERLAP
    tail_offset = WINDOW - CENTER_OFFSET - 1  # frames after the last predictable one

    buffer = []
    parts = []
    total = 0
    window_start = 0
    next_pred = CENTER_OFFSET  # absolute index of the next frame needing a prediction

    def flush(start):
        nonlocal next_pred
        series = forward(params, np.stack(buffer))
        first = start + CENTER_OFFSET
        skip = next_pred - first
        parts.append(series.probs[skip:])
        next_pred = start + len(buffer) - tail_offset

    for frame in _iter_frames(frames):
        buffer.append(np.asarray(frame))
        total += 1
        if len(buffer) == chunk_frames:
            flush(window_start)
            del buffer[:stride]
            window_start += stride

    if total < WINDOW:
        raise VideoTooShortError(
            f"video shorter than receptive field: {total} < {WINDOW} frames"
        )
    if next_pred <= total - tail_offset - 1:
        flush(window_start)

    probs = np.concatenate(parts, axis=0)
    assert probs.shape[0] == total - (WINDOW - 1)

    labels = np.ones(total, dtype=np.uint8)
    if threshold is None:
        same = probs[:, 0] >= probs[:, 1]
    else:
        same = probs[:, 1] < threshold
    labels[CENTER_OFFSET : total - tail_offset] = same
    return FrameLabels(total_frames=total, labels=labels, probs=probs)


def classify_event(event):
    """"cut" for single-frame events, "gradual" otherwise.

    A cut frame is simultaneously the first frame of the next shot;
    gradual transition frames belong to neither neighboring shot.
    """
    return "cut" if event.start_frame == event.end_frame else "gradual"


def _zero_runs(labels):
    flags = np.asarray(labels) == 0
    if not flags.any():
        return []
    padded = np.concatenate([[False], flags, [False]])
    edges = np.flatnonzero(padded[1:] != padded[:-1])
    return list(zip(edges[0::2], edges[1::2] - 1))


def assemble_shots(labels):
    """Turn per-frame labels into (shots, transitions).

    Maximal runs of label 0 become transition events. Shots cover the
    rest, except that the frame of a cut opens the following shot, so
    shots plus gradual transitions exactly tile [0, T).
    """
    if isinstance(labels, FrameLabels):
        lab = labels.labels
    else:
        lab = np.asarray(labels)
    total = lab.shape[0]
    transitions = [TransitionEvent(int(s), int(e)) for s, e in _zero_runs(lab)]
    shots = []
    start = 0
    for event in transitions:
        if event.start_frame > start:
            shots.append(ShotSegment(start, event.start_frame - 1))
        if classify_event(event) == "cut":
            start = event.start_frame
        else:
            start = event.end_frame + 1
    if start <= total - 1:
        shots.append(ShotSegment(start, total - 1))
    return shots, transitions


def detection_report(video_id, frame_labels, shots, transitions, fps=25.0, threshold=None):
    """JSON-ready detection summary (no timing fields, so reruns are identical)."""
    return {
        "video": video_id,
        "total_frames": int(frame_labels.total_frames),
        "fps": float(fps),
        "threshold": threshold,
        "shots": [
            {"start_frame": int(s.start_frame), "end_frame": int(s.end_frame)}
            for s in shots
        ],
        "transitions": [
            {
                "start_frame": int(t.start_frame),
                "end_frame": int(t.end_frame),
                "kind": classify_event(t),
            }
            for t in transitions
        ],
    }


def write_probs_csv(frame_labels, sink):
    """Write (frame_index, p_transition) rows for every predicted frame."""
    writer = csv.writer(sink, lineterminator="\n")
    writer.writerow(["frame_index", "p_transition"])
    for k, (_, p_transition) in enumerate(frame_labels.probs):
        writer.writerow([frame_labels.first_pred_frame + k, f"{p_transition:.6f}"])
