"""Video decoding and keypoint stream emission.

Output is the engine's keypoint stream contract: UTF-8 JSONL, one
header line with exactly {video_id, fps, width_px, height_px}, then one
frame record per decoded frame. The header schema is closed, so
estimator provenance (backend name/version, mapping, proxies) goes to a
sidecar file next to the stream instead.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass
from pathlib import Path

import cv2

from .backends import PoseBackend
from .mapping import LandmarkMapping, dump_mapping


class ExtractionError(RuntimeError):
    pass


@dataclass(frozen=True)
class ExtractionSummary:
    video_id: str
    n_frames: int
    n_detected: int
    fps: float
    width_px: int
    height_px: int


def extract(
    video_path,
    mapping: LandmarkMapping,
    backend: PoseBackend,
    output_path,
) -> ExtractionSummary:
    """Decode a video, run the estimator per frame, write the stream file.

    Frames where no person is detected become records with an empty
    landmark map (the downstream engine treats that as nothing-visible,
    not as an error). Undecodable input raises ExtractionError.
    """
    video_path = Path(video_path)
    if not video_path.exists():
        raise ExtractionError(f"no such video: {video_path}")

    cap = cv2.VideoCapture(str(video_path))
    if not cap.isOpened():
        raise ExtractionError(f"cannot decode video: {video_path}")
    try:
        fps = float(cap.get(cv2.CAP_PROP_FPS))
        width = int(cap.get(cv2.CAP_PROP_FRAME_WIDTH))
        height = int(cap.get(cv2.CAP_PROP_FRAME_HEIGHT))
        if fps <= 0 or width <= 0 or height <= 0:
            raise ExtractionError(
                f"container metadata unusable (fps={fps}, {width}x{height}): {video_path}"
            )

        video_id = video_path.stem
        lines = [
            json.dumps(
                {"video_id": video_id, "fps": fps, "width_px": width, "height_px": height},
                sort_keys=True,
            )
        ]
        index = 0
        detected = 0
        while True:
            ok, frame = cap.read()
            if not ok:
                break
            raw = backend.detect(frame)
            landmarks: dict[str, dict] = {}
            if raw is not None:
                detected += 1
                for point in raw:
                    name = mapping.name_for(point.index)
                    if name is None:
                        continue
                    landmarks[name] = {
                        "x": point.x,
                        "y": point.y,
                        "z": point.z,
                        "visibility": min(1.0, max(0.0, point.visibility)),
                    }
            lines.append(
                json.dumps(
                    {
                        "index": index,
                        "timestamp_s": index / fps,
                        "landmarks": dict(sorted(landmarks.items())),
                    },
                    sort_keys=True,
                )
            )
            index += 1
    finally:
        cap.release()

    if index == 0:
        raise ExtractionError(f"no decodable frames in {video_path}")

    _write_atomic("\n".join(lines) + "\n", output_path)
    provenance = {
        "video": video_path.name,
        "backend": backend.name,
        "backend_version": backend.version(),
        "mapping": dump_mapping(mapping),
        "n_frames": index,
        "n_frames_with_detection": detected,
    }
    _write_atomic(
        json.dumps(provenance, sort_keys=True, indent=2) + "\n",
        str(output_path) + ".provenance.json",
    )
    return ExtractionSummary(video_id, index, detected, fps, width, height)


def _write_atomic(text: str, path) -> None:
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
