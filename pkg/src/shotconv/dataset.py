"""Snippet datasets: sampling from source clips and the on-disk format.

A dataset directory holds two files:

* ``manifest.json`` -- format/version fields, snippet count and shape,
  and one record per snippet (kind, duration, parameters, center label,
  flash frames, source identifiers, placement, byte offset into the blob);
* ``snippets.bin`` -- little-endian float32 frames, 10*64*64*3 values per
  snippet in C order over (time, height, width, channel), concatenated in
  record order.

Sampling is a pure function of (sources, counts, fractions, seed): the
same inputs produce byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from . import transitions
from .colorspace import apply_flash
from .transitions import (
    CENTER_PAIR_INDEX,
    CROP_FACTOR_RANGE,
    DURATION_RANGES,
    FADE_COLORS,
    TRANSITION_KINDS,
    WINDOW,
    candidate_starts,
    make_crop_cut,
    make_dissolve,
    make_fade,
    make_hard_cut,
    make_wipe,
    transition_labels,
)

MANIFEST_NAME = "manifest.json"
BLOB_NAME = "snippets.bin"
DATASET_FORMAT = "sbd-snippets"
DATASET_VERSION = 1
SNIPPET_SHAPE = (WINDOW, 64, 64, 3)
SNIPPET_BYTES = int(np.prod(SNIPPET_SHAPE)) * 4

# A source clip must cover a 10-frame window plus the longest transition.
MIN_SOURCE_FRAMES = WINDOW + max(hi for _, hi in DURATION_RANGES.values())

_KIND_ALIASES = {
    "cut": "hard_cut",
    "crop": "crop_cut",
    "fade": "fade",  # split between fade_in / fade_out at sampling time
}
_CANONICAL_ORDER = (
    "hard_cut",
    "crop_cut",
    "dissolve",
    "fade",
    "fade_in",
    "fade_out",
    "wipe",
    "none",
)


class DatasetFormatError(ValueError):
    """Base class for dataset file problems."""


class ManifestError(DatasetFormatError):
    """manifest.json is missing, malformed, or inconsistent."""


class BlobError(DatasetFormatError):
    """snippets.bin is missing or does not match the manifest."""


@dataclass(frozen=True)
class SnippetRecord:
    """Generation metadata for one snippet."""

    kind: str  # "none" or a transition kind
    center_label: int  # 1 = same shot at the center pair, 0 = transition
    duration: int | None = None
    placement: int | None = None  # cut position / transition start in the window
    crop_factor: float | None = None
    fade_color: str | None = None
    offcenter: bool = False
    flash_frames: tuple = ()
    clip_a: str | None = None
    clip_b: str | None = None
    offset_a: int | None = None
    offset_b: int | None = None
    blob_offset: int = 0

    def to_dict(self):
        d = asdict(self)
        d["flash_frames"] = list(self.flash_frames)
        return d

    @classmethod
    def from_dict(cls, d):
        d = dict(d)
        d["flash_frames"] = tuple(d.get("flash_frames", ()))
        return cls(**d)


@dataclass
class SnippetDataset:
    """Snippet frames plus their generation records."""

    frames: np.ndarray  # (n, 10, 64, 64, 3) float32
    records: list = field(default_factory=list)

    def __len__(self):
        return self.frames.shape[0]

    @property
    def center_labels(self):
        return np.array([r.center_label for r in self.records], dtype=np.uint8)


def _normalize_clips(clips):
    pairs = []
    for i, clip in enumerate(clips):
        if isinstance(clip, tuple):
            pairs.append((str(clip[0]), np.asarray(clip[1], dtype=np.float32)))
        else:
            pairs.append((f"clip-{i:03d}", np.asarray(clip, dtype=np.float32)))
    if not pairs:
        raise ValueError("no source clips supplied")
    short = [(cid, c.shape[0]) for cid, c in pairs if c.shape[0] < MIN_SOURCE_FRAMES]
    if short:
        detail = ", ".join(f"{cid} has {n}" for cid, n in short)
        raise ValueError(
            f"insufficient source frames: every clip needs >= {MIN_SOURCE_FRAMES}; {detail}"
        )
    return pairs


def _normalize_counts(counts):
    out = {}
    for key, value in counts.items():
        kind = _KIND_ALIASES.get(key, key)
        if kind not in TRANSITION_KINDS + ("fade", "none"):
            raise ValueError(f"unknown snippet kind {key!r}")
        if value < 0:
            raise ValueError(f"count for {key!r} must be >= 0")
        out[kind] = out.get(kind, 0) + int(value)
    return out


def sample_dataset(
    clips,
    counts,
    *,
    flash_fraction=0.1,
    offcenter_fraction=0.2,
    seed=0,
):
    """Draw a labeled snippet mix from source clips; deterministic per seed.

    ``counts`` maps kinds (hard_cut/cut, crop_cut/crop, dissolve, fade,
    fade_in, fade_out, wipe, none) to snippet counts. Transition snippets
    place the transition over the center pair (center label 0). Of the
    "none" count, ``offcenter_fraction`` become windows holding a
    transition away from the center pair and ``flash_fraction`` of the
    remaining single-shot windows get 1-3 flashed frames; both groups
    keep center label 1.
    """
    pairs = _normalize_clips(clips)
    counts = _normalize_counts(counts)
    rng = np.random.default_rng(seed)

    n_none = counts.get("none", 0)
    n_offcenter = int(round(offcenter_fraction * n_none))
    n_single = n_none - n_offcenter
    n_flash = int(round(flash_fraction * n_single))

    offcenter_kinds = [
        k for k in TRANSITION_KINDS + ("fade",) if counts.get(k, 0) > 0
    ]
    if not offcenter_kinds:
        offcenter_kinds = list(TRANSITION_KINDS)

    plan = []
    for kind in _CANONICAL_ORDER:
        if kind == "none":
            continue
        plan.extend([(kind, True)] * counts.get(kind, 0))
    plan.extend([("none", False)] * n_single)
    plan.extend([("offcenter", False)] * n_offcenter)

    flashed = set()
    if n_flash:
        base = len(plan) - n_none
        flashed = set(base + idx for idx in rng.choice(n_single, size=n_flash, replace=False))

    frames = np.empty((len(plan),) + SNIPPET_SHAPE, dtype=np.float32)
    records = []

    def pick_clip(exclude=None):
        idx = int(rng.integers(len(pairs)))
        if exclude is not None and len(pairs) > 1:
            while idx == exclude:
                idx = int(rng.integers(len(pairs)))
        return idx

    def pick_window(clip_idx):
        clip = pairs[clip_idx][1]
        offset = int(rng.integers(0, clip.shape[0] - WINDOW + 1))
        return offset, clip[offset : offset + WINDOW]

    for i, (slot_kind, centered) in enumerate(plan):
        if slot_kind == "none":
            ci = pick_clip()
            offset, window = pick_window(ci)
            snippet = np.array(window, dtype=np.float32)
            flash_frames = ()
            if i in flashed:
                k = int(rng.integers(1, 4))
                flash_frames = tuple(
                    sorted(int(v) for v in rng.choice(WINDOW, size=k, replace=False))
                )
                snippet = apply_flash(snippet, flash_frames)
            records.append(
                SnippetRecord(
                    kind="none",
                    center_label=1,
                    flash_frames=flash_frames,
                    clip_a=pairs[ci][0],
                    offset_a=offset,
                    blob_offset=i * SNIPPET_BYTES,
                )
            )
            frames[i] = snippet
            continue

        kind = slot_kind
        offcenter = kind == "offcenter"
        if offcenter:
            kind = str(rng.choice(offcenter_kinds))
        if kind == "fade":
            kind = str(rng.choice(["fade_in", "fade_out"]))

        lo, hi = DURATION_RANGES[kind]
        duration = int(rng.integers(lo, hi + 1))
        starts = candidate_starts(kind, duration, centered=not offcenter)
        start = int(rng.choice(starts))

        ca = pick_clip()
        offset_a, window_a = pick_window(ca)
        record = dict(
            kind=kind,
            center_label=1 if offcenter else 0,
            duration=duration,
            placement=start,
            offcenter=offcenter,
            clip_a=pairs[ca][0],
            offset_a=offset_a,
            blob_offset=i * SNIPPET_BYTES,
        )
        if kind == "hard_cut":
            cb = pick_clip(exclude=ca)
            offset_b, window_b = pick_window(cb)
            snippet, labels = make_hard_cut(window_a, window_b, start)
            record.update(clip_b=pairs[cb][0], offset_b=offset_b)
        elif kind == "crop_cut":
            factor = float(rng.uniform(*CROP_FACTOR_RANGE))
            snippet, labels = make_crop_cut(window_a, factor, start)
            record.update(crop_factor=factor)
        elif kind == "dissolve":
            cb = pick_clip(exclude=ca)
            offset_b, window_b = pick_window(cb)
            snippet, labels = make_dissolve(window_a, window_b, duration, start)
            record.update(clip_b=pairs[cb][0], offset_b=offset_b)
        elif kind in ("fade_in", "fade_out"):
            color = str(rng.choice(FADE_COLORS))
            snippet, labels = make_fade(
                window_a, color, duration, "in" if kind == "fade_in" else "out", start
            )
            record.update(fade_color=color)
        else:  # wipe
            cb = pick_clip(exclude=ca)
            offset_b, window_b = pick_window(cb)
            snippet, labels = make_wipe(window_a, window_b, duration, start)
            record.update(clip_b=pairs[cb][0], offset_b=offset_b)

        expected = 1 if offcenter else 0
        if labels[CENTER_PAIR_INDEX] != expected:
            raise AssertionError(
                f"placement bug: {kind} start {start} produced center label "
                f"{labels[CENTER_PAIR_INDEX]}, wanted {expected}"
            )
        frames[i] = snippet
        records.append(SnippetRecord(**record))

    return SnippetDataset(frames=frames, records=records)


def expected_center_label(record):
    """Recompute a record's center label from its metadata alone."""
    if record.kind == "none":
        return 1
    blended = 0 if record.kind in ("hard_cut", "crop_cut") else record.duration
    labels = transition_labels(record.placement, blended)
    return int(labels[CENTER_PAIR_INDEX])


def save_dataset(dataset, directory):
    """Write manifest.json and snippets.bin under ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    frames = np.ascontiguousarray(dataset.frames, dtype="<f4")
    if frames.shape[1:] != SNIPPET_SHAPE:
        raise ValueError(f"snippets must have shape {SNIPPET_SHAPE}, got {frames.shape[1:]}")
    blob = frames.tobytes()
    manifest = {
        "format": DATASET_FORMAT,
        "version": DATASET_VERSION,
        "count": len(dataset),
        "snippet_shape": list(SNIPPET_SHAPE),
        "dtype": "<f4",
        "blob": BLOB_NAME,
        "blob_bytes": len(blob),
        "records": [r.to_dict() for r in dataset.records],
    }
    with open(directory / BLOB_NAME, "wb") as fh:
        fh.write(blob)
    with open(directory / MANIFEST_NAME, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_dataset(directory):
    """Read a dataset directory; raises ManifestError / BlobError on defects."""
    directory = Path(directory)
    manifest_path = directory / MANIFEST_NAME
    try:
        with open(manifest_path, encoding="utf-8") as fh:
            manifest = json.load(fh)
    except FileNotFoundError:
        raise ManifestError(f"{manifest_path}: missing manifest") from None
    except json.JSONDecodeError as exc:
        raise ManifestError(f"{manifest_path}: invalid JSON: {exc}") from None
    if manifest.get("format") != DATASET_FORMAT:
        raise ManifestError(
            f"{manifest_path}: format {manifest.get('format')!r} is not {DATASET_FORMAT!r}"
        )
    if manifest.get("version") != DATASET_VERSION:
        raise ManifestError(
            f"{manifest_path}: unsupported version {manifest.get('version')!r}"
        )
    count = int(manifest["count"])
    records = [SnippetRecord.from_dict(d) for d in manifest["records"]]
    if len(records) != count:
        raise ManifestError(
            f"{manifest_path}: count {count} does not match {len(records)} records"
        )
    if list(manifest.get("snippet_shape", [])) != list(SNIPPET_SHAPE):
        raise ManifestError(f"{manifest_path}: unexpected snippet shape")
    blob_path = directory / manifest.get("blob", BLOB_NAME)
    try:
        size = blob_path.stat().st_size
    except FileNotFoundError:
        raise BlobError(f"{blob_path}: missing snippet blob") from None
    expected = count * SNIPPET_BYTES
    if size != expected:
        raise BlobError(
            f"{blob_path}: expected {expected} bytes for {count} snippets, found {size}"
        )
    data = np.fromfile(blob_path, dtype="<f4")
    frames = data.reshape((count,) + SNIPPET_SHAPE)
    return SnippetDataset(frames=frames, records=records)
