"""Transition-level precision/recall/F1 against ground truth.

Detected and ground-truth transitions are inclusive frame intervals.
Matching is greedy one-to-one in increasing frame order: each detected
interval takes the earliest unmatched truth interval it overlaps (any
nonempty intersection counts). F1 is the harmonic mean of transition
precision and recall; the cross-video summary is the unweighted mean of
per-video F1 scores.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class IntervalValidationError(ValueError):
    pass


class GroundTruthParseError(ValueError):
    pass


def _validate_intervals(intervals, name):
    out = []
    prev_end = None
    for i, pair in enumerate(intervals):
        first, last = int(pair[0]), int(pair[1])
        if first < 0 or last < first:
            raise IntervalValidationError(
                f"{name}[{i}]: bad interval [{first}, {last}]"
            )
        if prev_end is not None and first <= prev_end:
            raise IntervalValidationError(
                f"{name}[{i}]: interval [{first}, {last}] overlaps or precedes "
                f"the previous one (ends at {prev_end})"
            )
        out.append((first, last))
        prev_end = last
    return out


@dataclass
class MatchResult:
    tp: int
    fp: int
    fn: int
    matched: list  # (detected, truth) interval pairs
    missed: list  # truth intervals with no detection
    spurious: list  # detections matching no truth


def match_transitions(detected, truth):
    """Greedy one-to-one overlap matching of sorted interval lists."""
    det = _validate_intervals(detected, "detected")
    tru = _validate_intervals(truth, "truth")
    used = [False] * len(tru)
    matched = []
    for d in det:
        for j, t in enumerate(tru):
            if used[j]:
                continue
            if t[0] > d[1]:
                break
            if t[1] >= d[0]:
                used[j] = True
                matched.append((d, t))
                break
    matched_det = {pair[0] for pair in matched}
    missed = [t for j, t in enumerate(tru) if not used[j]]
    spurious = [d for d in det if d not in matched_det]
    return MatchResult(
        tp=len(matched),
        fp=len(det) - len(matched),
        fn=len(tru) - len(matched),
        matched=matched,
        missed=missed,
        spurious=spurious,
    )


def precision_recall_f1(tp, fp, fn):
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    if precision + recall == 0:
        return precision, recall, 0.0
    return precision, recall, 2 * precision * recall / (precision + recall)


@dataclass
class VideoEval:
    video: str
    tp: int
    fp: int
    fn: int
    precision: float
    recall: float
    f1: float
    matched: list = field(default_factory=list)
    missed: list = field(default_factory=list)
    spurious: list = field(default_factory=list)

    def to_dict(self):
        return {
            "video": self.video,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "matched": [[list(d), list(t)] for d, t in self.matched],
            "missed": [list(t) for t in self.missed],
            "spurious": [list(d) for d in self.spurious],
        }


def evaluate_video(video_id, detected, truth):
    """Match one video's detections against its ground truth."""
    result = match_transitions(detected, truth)
    precision, recall, f1 = precision_recall_f1(result.tp, result.fp, result.fn)
    return VideoEval(
        video=str(video_id),
        tp=result.tp,
        fp=result.fp,
        fn=result.fn,
        precision=precision,
        recall=recall,
        f1=f1,
        matched=result.matched,
        missed=result.missed,
        spurious=result.spurious,
    )


@dataclass
class EvalReport:
    videos: list
    mean_f1: float

    def to_dict(self):
        return {
            "videos": [v.to_dict() for v in self.videos],
            "mean_f1": self.mean_f1,
        }


def f1_report(per_video):
    """Aggregate per-video results into a report with unweighted mean F1."""
    videos = list(per_video)
    if not videos:
        raise ValueError("need at least one video result")
    mean_f1 = float(np.mean([v.f1 for v in videos]))
    return EvalReport(videos=videos, mean_f1=mean_f1)


def format_report(report):
    """Aligned plain-text table, one row per video plus the mean F1."""
    header = f"{'video':<20} {'TP':>4} {'FP':>4} {'FN':>4} {'prec':>7} {'recall':>7} {'F1':>7}"
    lines = [header, "-" * len(header)]
    for v in report.videos:
        lines.append(
            f"{v.video:<20} {v.tp:>4} {v.fp:>4} {v.fn:>4} "
            f"{v.precision:>7.3f} {v.recall:>7.3f} {v.f1:>7.3f}"
        )
    lines.append("-" * len(header))
    lines.append(f"mean F1 over {len(report.videos)} video(s): {report.mean_f1:.3f}")
    return "\n".join(lines)


def load_ground_truth(path):
    """Parse a truth TSV: one transition per line as ``first<TAB>last``.

    Intervals are 0-based inclusive; cuts are length-1 lines like
    ``40<TAB>40``. Blank lines are ignored; an empty file means a video
    with no transitions. Errors carry the offending line number.
    """
    intervals = []
    prev_end = None
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line:
                continue
            parts = line.split("\t")
            if len(parts) != 2:
                raise GroundTruthParseError(
                    f"{path}:{lineno}: expected 'first<TAB>last', got {line!r}"
                )
            try:
                first, last = int(parts[0]), int(parts[1])
            except ValueError:
                raise GroundTruthParseError(
                    f"{path}:{lineno}: non-integer frame index in {line!r}"
                ) from None
            if first < 0 or last < first:
                raise GroundTruthParseError(
                    f"{path}:{lineno}: bad interval [{first}, {last}]"
                )
            if prev_end is not None and first <= prev_end:
                raise GroundTruthParseError(
                    f"{path}:{lineno}: interval [{first}, {last}] out of order or "
                    f"overlapping (previous ends at {prev_end})"
                )
            intervals.append((first, last))
            prev_end = last
    return intervals
