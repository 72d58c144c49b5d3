"""Keypoint stream types, JSONL parsing/serialization, and coordinate helpers.

A stream file is UTF-8 JSONL: line 1 is the header object, every further
line one frame. This file format is the contract between the engine and
any pose-extraction front end, so parsing is strict: unknown landmark
names, non-monotone timestamps, and malformed records are hard errors.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field, replace
from enum import Enum
from math import isfinite
from typing import Iterable, Mapping

from .errors import StreamParseError, StreamValidationError


class LandmarkId(str, Enum):
    """Anatomical landmark vocabulary.

    The head/hand names are mandatory (they feed collision scoring and
    body-size estimation); the body names exist for agitation tracking.
    """

    MOUTH_LEFT = "mouth_left"
    MOUTH_RIGHT = "mouth_right"
    EAR_LEFT = "ear_left"
    EAR_RIGHT = "ear_right"
    EYEBROW_LEFT = "eyebrow_left"
    EYEBROW_RIGHT = "eyebrow_right"
    WRIST_LEFT = "wrist_left"
    WRIST_RIGHT = "wrist_right"
    PINKY_LEFT = "pinky_left"
    PINKY_RIGHT = "pinky_right"
    INDEX_LEFT = "index_left"
    INDEX_RIGHT = "index_right"
    THUMB_LEFT = "thumb_left"
    THUMB_RIGHT = "thumb_right"
    SHOULDER_LEFT = "shoulder_left"
    SHOULDER_RIGHT = "shoulder_right"
    ELBOW_LEFT = "elbow_left"
    ELBOW_RIGHT = "elbow_right"
    HIP_LEFT = "hip_left"
    HIP_RIGHT = "hip_right"
    KNEE_LEFT = "knee_left"
    KNEE_RIGHT = "knee_right"
    ANKLE_LEFT = "ankle_left"
    ANKLE_RIGHT = "ankle_right"

    def __str__(self) -> str:  # serialize as the bare name
        return self.value


#: Landmarks that must exist in the vocabulary for scoring to work at all.
MANDATORY_LANDMARKS = frozenset(
    {
        LandmarkId.MOUTH_LEFT,
        LandmarkId.MOUTH_RIGHT,
        LandmarkId.EAR_LEFT,
        LandmarkId.EAR_RIGHT,
        LandmarkId.EYEBROW_LEFT,
        LandmarkId.EYEBROW_RIGHT,
        LandmarkId.WRIST_LEFT,
        LandmarkId.WRIST_RIGHT,
        LandmarkId.PINKY_LEFT,
        LandmarkId.PINKY_RIGHT,
        LandmarkId.INDEX_LEFT,
        LandmarkId.INDEX_RIGHT,
        LandmarkId.THUMB_LEFT,
        LandmarkId.THUMB_RIGHT,
    }
)


@dataclass(frozen=True)
class Landmark:
    """One detected keypoint in normalized coordinates.

    x and y are fractions of frame width/height; z shares the normalized
    unit scale of x. Values outside [0,1] are allowed (landmarks may
    leave the frame), but must be finite. visibility is a confidence in
    [0,1] used by the validity gate.
    """

    x: float
    y: float
    z: float
    visibility: float

    def __post_init__(self) -> None:
        if not (
            isfinite(self.x) and isfinite(self.y) and isfinite(self.z)
            and isfinite(self.visibility)
        ):
            raise StreamValidationError(
                f"landmark coordinates must be finite, got "
                f"({self.x!r}, {self.y!r}, {self.z!r}, vis={self.visibility!r})"
            )
        if not 0.0 <= self.visibility <= 1.0:
            raise StreamValidationError(
                f"visibility must be in [0,1], got {self.visibility!r}"
            )


@dataclass(frozen=True)
class StreamHeader:
    video_id: str
    fps: float
    width_px: int
    height_px: int

    def __post_init__(self) -> None:
        if not self.fps > 0:
            raise StreamValidationError(f"fps must be positive, got {self.fps!r}")
        if not (isinstance(self.width_px, int) and self.width_px > 0):
            raise StreamValidationError(f"width_px must be a positive integer, got {self.width_px!r}")
        if not (isinstance(self.height_px, int) and self.height_px > 0):
            raise StreamValidationError(f"height_px must be a positive integer, got {self.height_px!r}")


@dataclass(frozen=True)
class KeypointFrame:
    """One timestamped frame; absent landmarks are simply missing keys."""

    index: int
    timestamp_s: float
    landmarks: Mapping[LandmarkId, Landmark] = field(default_factory=dict)


@dataclass(frozen=True)
class KeypointStream:
    header: StreamHeader
    frames: tuple[KeypointFrame, ...] = ()

    @property
    def duration_s(self) -> float:
        """Nominal duration assuming one frame period past the last timestamp."""
        if not self.frames:
            return 0.0
        return self.frames[-1].timestamp_s + 1.0 / self.header.fps

    def with_header(self, **changes) -> "KeypointStream":
        """Same frames under a different header (e.g. another resolution)."""
        return KeypointStream(replace(self.header, **changes), self.frames)


def is_valid(lm: Landmark | None, tau_valid: float) -> bool:
    """Visibility gate: inclusive at the threshold, absent landmarks fail."""
    return lm is not None and lm.visibility >= tau_valid


def to_pixels(lm: Landmark, header: StreamHeader) -> tuple[float, float]:
    """Project a normalized landmark into pixel space."""
    return lm.x * header.width_px, lm.y * header.height_px


def _require(condition: bool, line_no: int, message: str) -> None:
    if not condition:
        raise StreamParseError(line_no, message)


def _parse_header(obj: object, line_no: int) -> StreamHeader:
    _require(isinstance(obj, dict), line_no, "header must be a JSON object")
    assert isinstance(obj, dict)
    expected = {"video_id", "fps", "width_px", "height_px"}
    _require(
        set(obj) == expected,
        line_no,
        f"header keys must be exactly {sorted(expected)}, got {sorted(obj)}",
    )
    _require(isinstance(obj["video_id"], str), line_no, "video_id must be a string")
    _require(isinstance(obj["fps"], (int, float)), line_no, "fps must be a number")
    _require(isinstance(obj["width_px"], int) and not isinstance(obj["width_px"], bool),
             line_no, "width_px must be an integer")
    _require(isinstance(obj["height_px"], int) and not isinstance(obj["height_px"], bool),
             line_no, "height_px must be an integer")
    try:
        return StreamHeader(obj["video_id"], float(obj["fps"]), obj["width_px"], obj["height_px"])
    except StreamValidationError as exc:
        raise StreamParseError(line_no, str(exc)) from exc


def _parse_frame(obj: object, line_no: int) -> KeypointFrame:
    _require(isinstance(obj, dict), line_no, "frame must be a JSON object")
    assert isinstance(obj, dict)
    for key in ("index", "timestamp_s", "landmarks"):
        _require(key in obj, line_no, f"frame record missing key {key!r}")
    _require(isinstance(obj["index"], int) and not isinstance(obj["index"], bool),
             line_no, "index must be an integer")
    _require(isinstance(obj["timestamp_s"], (int, float)), line_no, "timestamp_s must be a number")
    _require(isinstance(obj["landmarks"], dict), line_no, "landmarks must be an object")
    landmarks: dict[LandmarkId, Landmark] = {}
    for name, rec in obj["landmarks"].items():
        try:
            lid = LandmarkId(name)
        except ValueError:
            raise StreamParseError(line_no, f"unknown landmark id {name!r}") from None
        _require(isinstance(rec, dict), line_no, f"landmark {name!r} must be an object")
        for key in ("x", "y", "z", "visibility"):
            _require(key in rec and isinstance(rec[key], (int, float)),
                     line_no, f"landmark {name!r} field {key!r} must be a number")
        try:
            landmarks[lid] = Landmark(
                float(rec["x"]), float(rec["y"]), float(rec["z"]), float(rec["visibility"])
            )
        except StreamValidationError as exc:
            raise StreamParseError(line_no, f"landmark {name!r}: {exc}") from exc
    return KeypointFrame(obj["index"], float(obj["timestamp_s"]), landmarks)


def parse_stream(source: bytes | str) -> KeypointStream:
    """Parse and validate a JSONL keypoint stream.

    Raises StreamParseError (with line number) for malformed records and
    StreamValidationError for invariant violations such as non-monotone
    timestamps or non-increasing frame indices.
    """
    text = source.decode("utf-8") if isinstance(source, bytes) else source
    lines = text.splitlines()
    if not lines or not lines[0].strip():
        raise StreamParseError(1, "missing header line")

    def load(line: str, line_no: int) -> object:
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise StreamParseError(line_no, f"invalid JSON: {exc.msg}") from exc

    header = _parse_header(load(lines[0], 1), 1)
    frames: list[KeypointFrame] = []
    for i, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        frames.append(_parse_frame(load(line, i), i))

    prev: KeypointFrame | None = None
    for frame in frames:
        if prev is not None:
            if frame.index <= prev.index:
                raise StreamValidationError(
                    f"frame index must be strictly increasing: {prev.index} then {frame.index}"
                )
            if frame.timestamp_s < prev.timestamp_s:
                raise StreamValidationError(
                    "timestamps must be non-decreasing: "
                    f"{prev.timestamp_s} then {frame.timestamp_s} at index {frame.index}"
                )
        prev = frame
    return KeypointStream(header, tuple(frames))


def parse_stream_file(path) -> KeypointStream:
    with open(path, "rb") as fh:
        return parse_stream(fh.read())


def serialize_stream(stream: KeypointStream) -> str:
    """Inverse of parse_stream; landmark keys in sorted order for stable bytes."""
    header = stream.header
    out = [
        json.dumps(
            {
                "video_id": header.video_id,
                "fps": header.fps,
                "width_px": header.width_px,
                "height_px": header.height_px,
            },
            sort_keys=True,
        )
    ]
    for frame in stream.frames:
        out.append(
            json.dumps(
                {
                    "index": frame.index,
                    "timestamp_s": frame.timestamp_s,
                    "landmarks": {
                        lid.value: {"x": lm.x, "y": lm.y, "z": lm.z, "visibility": lm.visibility}
                        for lid, lm in sorted(frame.landmarks.items(), key=lambda kv: kv[0].value)
                    },
                },
                sort_keys=True,
            )
        )
    return "\n".join(out) + "\n"


def write_stream_file(stream: KeypointStream, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(serialize_stream(stream))


def landmark_ids_present(stream: KeypointStream) -> tuple[LandmarkId, ...]:
    """All landmark ids that appear anywhere in the stream, in vocabulary order."""
    seen: set[LandmarkId] = set()
    for frame in stream.frames:
        seen.update(frame.landmarks)
    return tuple(lid for lid in LandmarkId if lid in seen)


def iter_transitions(
    frames: Iterable[KeypointFrame],
) -> Iterable[tuple[KeypointFrame, KeypointFrame]]:
    """Consecutive frame pairs, in order."""
    prev: KeypointFrame | None = None
    for frame in frames:
        if prev is not None:
            yield prev, frame
        prev = frame
