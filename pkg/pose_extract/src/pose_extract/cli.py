"""pose-extract: convert one video into a keypoint stream file."""
from __future__ import annotations

import argparse
import sys

from .backends import make_backend
from .extract import ExtractionError, extract
from .mapping import MEDIAPIPE_POSE, MappingError, load_mapping


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pose-extract",
        description="Extract pose keypoints from a video into stream JSONL",
    )
    parser.add_argument("--video", required=True, help="input video file")
    parser.add_argument("--out", required=True, help="output keypoint stream JSONL")
    parser.add_argument("--mapping", help="landmark mapping JSON (default: MediaPipe Pose table)")
    parser.add_argument(
        "--backend",
        choices=["mediapipe", "synthetic"],
        default="mediapipe",
        help="pose estimator backend",
    )
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        mapping = load_mapping(args.mapping) if args.mapping else MEDIAPIPE_POSE
    except (MappingError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        backend = make_backend(args.backend)
    except (RuntimeError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        summary = extract(args.video, mapping, backend, args.out)
    except ExtractionError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    finally:
        backend.close()
    print(
        f"{summary.video_id}: {summary.n_frames} frames "
        f"({summary.n_detected} with detections) at {summary.fps:g} fps, "
        f"{summary.width_px}x{summary.height_px} -> {args.out}"
    )
    return 0


if __name__ == "__main__":
    sys.exit(main())
