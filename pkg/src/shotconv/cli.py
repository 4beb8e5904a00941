"""Command-line front end.

Subcommands: generate (synthetic snippet datasets), train, detect,
eval (transition F1 against ground truth), bench (fully-convolutional vs
per-window inference). Exit codes: 0 success, 1 runtime failure,
2 usage error. Failures print one line starting with ``error:``.
"""

from __future__ import annotations

import argparse
import json
import statistics
import sys
import time
from pathlib import Path

import numpy as np

from .dataset import load_dataset, sample_dataset, save_dataset
from .evaluate import evaluate_video, f1_report, format_report, load_ground_truth
from .frameio import FrameSource, bilinear_resize, iter_ppm_dir, read_frames
from .inference import (
    assemble_shots,
    classify_event,
    detection_report,
    predict_video,
    write_probs_csv,
)
from .model import WINDOW, build_model, forward, load_weights, save_weights
from .synthetic import procedural_clip
from .training import TrainConfig, train

DEFAULT_COUNTS = "cut=50,crop=25,dissolve=50,fade=50,wipe=25,none=200"


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {text}")
    return value


def _nonnegative_int(text):
    value = int(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {text}")
    return value


def _positive_float(text):
    value = float(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be > 0, got {text}")
    return value


def _fraction(text):
    value = float(text)
    if not 0.0 <= value <= 1.0:
        raise argparse.ArgumentTypeError(f"must lie in [0, 1], got {text}")
    return value


def _parse_counts(text):
    counts = {}
    for item in text.split(","):
        item = item.strip()
        if not item:
            continue
        if "=" not in item:
            raise argparse.ArgumentTypeError(
                f"counts must look like kind=count, got {item!r}"
            )
        kind, _, value = item.partition("=")
        try:
            counts[kind.strip()] = _nonnegative_int(value)
        except (ValueError, argparse.ArgumentTypeError):
            raise argparse.ArgumentTypeError(
                f"bad count for {kind.strip()!r}: {value!r}"
            ) from None
    if not counts:
        raise argparse.ArgumentTypeError("no counts given")
    return counts


def _load_source_clips(directory):
    root = Path(directory)
    if not root.is_dir():
        raise FileNotFoundError(f"{root}: not a directory of clips")
    clips = []
    for sub in sorted(p for p in root.iterdir() if p.is_dir()):
        frames = [bilinear_resize(f) for f in iter_ppm_dir(sub)]
        clips.append((sub.name, np.stack(frames)))
    if not clips:
        raise FileNotFoundError(f"{root}: no clip subdirectories found")
    return clips


def cmd_generate(args):
    if args.procedural:
        clips = [
            (f"proc-{i:03d}", procedural_clip((args.seed, i), args.clip_frames))
            for i in range(args.procedural)
        ]
    else:
        clips = _load_source_clips(args.sources)
    dataset = sample_dataset(
        clips,
        args.counts,
        flash_fraction=args.flash_fraction,
        offcenter_fraction=args.offcenter_fraction,
        seed=args.seed,
    )
    save_dataset(dataset, args.out)
    labels = dataset.center_labels
    flashed = sum(1 for r in dataset.records if r.flash_frames)
    offcenter = sum(1 for r in dataset.records if r.offcenter)
    print(
        f"wrote {len(dataset)} snippets to {args.out} "
        f"({int((labels == 0).sum())} transition / {int((labels == 1).sum())} same-shot, "
        f"{offcenter} off-center, {flashed} flashed)"
    )
    return 0


def cmd_train(args):
    dataset = load_dataset(args.data)
    config = TrainConfig(
        learning_rate=args.lr,
        batch_size=args.batch,
        epochs=args.epochs,
        seed=args.seed,
        eval_fraction=args.eval_fraction,
    )
    params = build_model(args.seed)

    log_fh = open(args.log, "w", encoding="utf-8") if args.log else None

    def progress(stats):
        line = f"epoch {stats.epoch}/{config.epochs} loss {stats.train_loss:.4f}"
        if stats.holdout is not None:
            h = stats.holdout
            line += (
                f" holdout acc {h.accuracy:.3f}"
                f" prec {h.precision:.3f} rec {h.recall:.3f} f1 {h.f1:.3f}"
            )
        print(line, flush=True)
        if log_fh:
            log_fh.write(json.dumps(stats.to_dict(), sort_keys=True) + "\n")
            log_fh.flush()

    try:
        params, history = train(params, dataset, config, progress=progress)
    finally:
        if log_fh:
            log_fh.close()
    save_weights(params, args.out)
    print(f"wrote weights to {args.out}")
    if history and history[-1].holdout is not None:
        h = history[-1].holdout
        print(
            f"held-out accuracy {h.accuracy:.3f} precision {h.precision:.3f} "
            f"recall {h.recall:.3f} f1 {h.f1:.3f}"
        )
    return 0


def _resolve_source(args):
    path = args.input
    if path != "-" and Path(path).is_dir():
        return FrameSource(kind="ppm_dir", path=path, fps=args.fps)
    if args.width is None or args.height is None:
        args.parser.error("raw rgb24 input needs --width and --height")
    return FrameSource(
        kind="raw_rgb24",
        path=None if path == "-" else path,
        width=args.width,
        height=args.height,
        fps=args.fps,
    )


def _resized_stream(frames, announce):
    first = True
    for frame in frames:
        if first:
            first = False
            if frame.shape[0] == 64 and frame.shape[1] == 64:
                announce("input already 64x64, resize skipped")
            else:
                announce(f"resizing {frame.shape[1]}x{frame.shape[0]} input to 64x64")
        if frame.shape[0] == 64 and frame.shape[1] == 64:
            yield frame
        else:
            yield bilinear_resize(frame)


def cmd_detect(args):
    params = load_weights(args.weights)
    source = _resolve_source(args)
    video_id = "-" if args.input == "-" else Path(args.input).name

    def announce(message):
        print(message, file=sys.stderr)

    start = time.perf_counter()
    labels = predict_video(
        params,
        _resized_stream(read_frames(source), announce),
        threshold=args.threshold,
    )
    wall = time.perf_counter() - start
    shots, transitions = assemble_shots(labels)
    report = detection_report(
        video_id, labels, shots, transitions, fps=args.fps, threshold=args.threshold
    )
    payload = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if args.out:
        Path(args.out).write_text(payload, encoding="utf-8")
    else:
        sys.stdout.write(payload)
    if args.probs:
        with open(args.probs, "w", encoding="utf-8") as fh:
            write_probs_csv(labels, fh)
    cuts = sum(1 for t in transitions if classify_event(t) == "cut")
    duration = labels.total_frames / args.fps
    print(
        f"{labels.total_frames} frames: {len(shots)} shots, "
        f"{len(transitions)} transitions ({cuts} cuts, {len(transitions) - cuts} gradual)",
        file=sys.stderr,
    )
    print(
        f"real-time factor {duration / wall:.1f}x "
        f"({labels.total_frames / wall:.0f} frames/s)",
        file=sys.stderr,
    )
    return 0


def cmd_eval(args):
    if len(args.detections) != len(args.truth):
        args.parser.error(
            f"unpaired files: {len(args.detections)} detection(s) "
            f"vs {len(args.truth)} truth file(s)"
        )
    per_video = []
    for det_path, truth_path in zip(args.detections, args.truth):
        with open(det_path, encoding="utf-8") as fh:
            detection = json.load(fh)
        detected = [
            (t["start_frame"], t["end_frame"]) for t in detection.get("transitions", [])
        ]
        truth = load_ground_truth(truth_path)
        video_id = detection.get("video") or Path(det_path).stem
        per_video.append(evaluate_video(video_id, detected, truth))
    report = f1_report(per_video)
    print(format_report(report))
    if args.report:
        with open(args.report, "w", encoding="utf-8") as fh:
            json.dump(report.to_dict(), fh, indent=2, sort_keys=True)
            fh.write("\n")
    return 0


def _sliding_pass(params, frames):
    """The no-weight-sharing baseline: one 10-frame forward per position."""
    rows = np.empty((frames.shape[0] - WINDOW + 1, 2), dtype=np.float32)
    for start in range(rows.shape[0]):
        rows[start] = forward(params, frames[start : start + WINDOW]).probs[0]
    return rows


def cmd_bench(args):
    params = load_weights(args.weights) if args.weights else build_model(args.seed)
    frames = procedural_clip(args.seed, args.frames)

    full = predict_video(params, frames).probs
    sliding = _sliding_pass(params, frames)
    gap = float(np.abs(full - sliding).max())
    if gap > 1e-5:
        print(
            f"error: fullyconv and sliding predictions disagree "
            f"(max abs diff {gap:.2e} > 1e-5); refusing to time incorrect code",
            file=sys.stderr,
        )
        return 1
    print(f"equivalence check passed: max abs prob diff {gap:.2e} over {len(full)} frames")

    runners = {
        "fullyconv": lambda: predict_video(params, frames),
        "sliding": lambda: _sliding_pass(params, frames),
    }
    modes = ("fullyconv", "sliding") if args.mode == "both" else (args.mode,)
    duration = args.frames / args.fps
    walls = {}
    for mode in modes:
        samples = []
        for _ in range(args.repeat):
            t0 = time.perf_counter()
            runners[mode]()
            samples.append(time.perf_counter() - t0)
        wall = statistics.median(samples)
        walls[mode] = wall
        print(
            f"{mode}: {wall:.3f} s median of {args.repeat}, "
            f"{args.frames / wall:.0f} frames/s, {duration / wall:.1f}x real-time"
        )
    if len(modes) == 2:
        ratio = walls["sliding"] / walls["fullyconv"]
        print(f"speedup (fullyconv over sliding): {ratio:.1f}x")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="shotconv",
        description="Train, run, evaluate and benchmark the shot boundary detector.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a synthetic snippet dataset")
    src = g.add_mutually_exclusive_group(required=True)
    src.add_argument("--procedural", type=_positive_int, metavar="N",
                     help="synthesize N procedural source clips")
    src.add_argument("--sources", metavar="DIR",
                     help="directory with one PPM-clip subdirectory per source")
    g.add_argument("--out", required=True, metavar="DIR", help="dataset directory")
    g.add_argument("--counts", type=_parse_counts, default=_parse_counts(DEFAULT_COUNTS),
                   metavar="K=V,...",
                   help=f"snippets per kind (default {DEFAULT_COUNTS})")
    g.add_argument("--flash-fraction", type=_fraction, default=0.1)
    g.add_argument("--offcenter-fraction", type=_fraction, default=0.2)
    g.add_argument("--clip-frames", type=_positive_int, default=48,
                   help="frames per procedural clip (default 48)")
    g.add_argument("--seed", type=int, default=0)
    g.set_defaults(func=cmd_generate)

    t = sub.add_parser("train", help="train a model on a generated dataset")
    t.add_argument("--data", required=True, metavar="DIR")
    t.add_argument("--out", required=True, metavar="WEIGHTS")
    t.add_argument("--lr", type=_positive_float, default=0.02)
    t.add_argument("--batch", type=_positive_int, default=32)
    t.add_argument("--epochs", type=_nonnegative_int, default=30)
    t.add_argument("--eval-fraction", type=_fraction, default=0.1)
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--log", metavar="JSONL", help="write per-epoch stats as JSON lines")
    t.set_defaults(func=cmd_train)

    d = sub.add_parser("detect", help="detect shots and transitions in a video")
    d.add_argument("--weights", required=True)
    d.add_argument("--input", required=True,
                   help="raw rgb24 file, '-' for stdin, or a PPM directory")
    d.add_argument("--width", type=_positive_int, help="raw input width in pixels")
    d.add_argument("--height", type=_positive_int, help="raw input height in pixels")
    d.add_argument("--fps", type=_positive_float, default=25.0)
    d.add_argument("--out", metavar="JSON", help="write the detection report here")
    d.add_argument("--probs", metavar="CSV",
                   help="write per-frame transition probabilities here")
    d.add_argument("--threshold", type=_fraction, default=None,
                   help="transition when p_transition >= this (default: argmax)")
    d.set_defaults(func=cmd_detect)

    e = sub.add_parser("eval", help="score detections against ground truth")
    e.add_argument("--detections", nargs="+", required=True, metavar="JSON")
    e.add_argument("--truth", nargs="+", required=True, metavar="TSV")
    e.add_argument("--report", metavar="JSON", help="write the report as JSON")
    e.set_defaults(func=cmd_eval)

    b = sub.add_parser("bench", help="time fullyconv vs per-window inference")
    b.add_argument("--weights", help="weight file (default: fresh seeded init)")
    b.add_argument("--frames", type=_positive_int, default=1000, metavar="T")
    b.add_argument("--mode", choices=("fullyconv", "sliding", "both"), default="both")
    b.add_argument("--repeat", type=_positive_int, default=3)
    b.add_argument("--fps", type=_positive_float, default=25.0)
    b.add_argument("--seed", type=int, default=0)
    b.set_defaults(func=cmd_bench)

    for command in (g, t, d, e, b):
        command.set_defaults(parser=command)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


def run():
    sys.exit(main())


if __name__ == "__main__":
    run()
