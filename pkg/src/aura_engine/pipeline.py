"""End-to-end detection over one stream, plus event/annotation records.

Events and frame annotations are separate artifacts: alarm consumers
want the confirmed collision intervals and the video verdict, renderers
want per-frame aura geometry and overlay numbers. Annotation aura state
flips to "collision" only while the owning track is inside a confirmed
interval, matching the red/green overlay convention.
"""
from __future__ import annotations

import json
import os
import tempfile
from dataclasses import dataclass

from .agitation import AgitationFrameResult, AgitationWindow
from .agitation import video_prediction as agitation_video_prediction
from .collision import (
    CollisionEvent,
    CollisionFrameResult,
    CollisionTrack,
    SIDES,
)
from .collision import video_prediction as collision_video_prediction
from .config import EngineConfig
from .streams import KeypointStream


@dataclass(frozen=True)
class AuraAnnotation:
    """One rendered circle: center and radius in pixels plus its state."""

    cx: float
    cy: float
    radius: float
    state: str  # "normal" | "collision"


@dataclass(frozen=True)
class FrameAnnotation:
    index: int
    timestamp_s: float
    mouth: AuraAnnotation | None
    hands: dict[str, AuraAnnotation | None]
    lh_score: float
    rh_score: float
    vel: float
    agitation: bool


@dataclass(frozen=True)
class DetectionResult:
    video_id: str
    collision_frames: list[CollisionFrameResult]
    collision_events: list[CollisionEvent]
    agitation_frames: list[AgitationFrameResult]
    annotations: list[FrameAnnotation]

    @property
    def collision(self) -> bool:
        return collision_video_prediction(self.collision_events)

    @property
    def agitation(self) -> bool:
        return agitation_video_prediction(self.agitation_frames)


def _pixel_radius(r: float, relative: bool, width_px: int) -> float:
    # Relative-mode radii live in normalized units; scale by frame width
    # for rendering (the x-axis convention of the normalized space).
    return r * width_px if relative else r


def _annotate(
    collision_frame: CollisionFrameResult,
    agitation_frame: AgitationFrameResult,
    relative: bool,
    width_px: int,
) -> FrameAnnotation:
    anchors = collision_frame.anchors
    hands = collision_frame.hands
    any_confirmed = any(hands[s].confirmed for s in SIDES)

    mouth = None
    if anchors.mouth_center is not None:
        # Either hand's radii carry the mouth radius; they agree by construction.
        r_m = hands["left"].r_m
        mouth = AuraAnnotation(
            anchors.mouth_center[0],
            anchors.mouth_center[1],
            _pixel_radius(r_m, relative, width_px),
            "collision" if any_confirmed else "normal",
        )

    hand_annotations: dict[str, AuraAnnotation | None] = {}
    for side in SIDES:
        center = anchors.hand_center(side)
        if center is None:
            hand_annotations[side] = None
            continue
        hand_annotations[side] = AuraAnnotation(
            center[0],
            center[1],
            _pixel_radius(hands[side].r_h, relative, width_px),
            "collision" if hands[side].confirmed else "normal",
        )

    return FrameAnnotation(
        index=collision_frame.index,
        timestamp_s=collision_frame.timestamp_s,
        mouth=mouth,
        hands=hand_annotations,
        lh_score=hands["left"].score,
        rh_score=hands["right"].score,
        vel=agitation_frame.mean_velocity,
        agitation=agitation_frame.is_agitation,
    )


def run_detection(stream: KeypointStream, config: EngineConfig) -> DetectionResult:
    """Run both detectors over a stream in one pass."""
    track = CollisionTrack(config.collision)
    window = AgitationWindow(config.agitation)
    relative = config.mode.variant == "relative"

    collision_frames: list[CollisionFrameResult] = []
    agitation_frames: list[AgitationFrameResult] = []
    annotations: list[FrameAnnotation] = []
    for frame in stream.frames:
        cf = track.step(frame, stream.header)
        window.push(frame)
        af = window.stats()
        collision_frames.append(cf)
        agitation_frames.append(af)
        annotations.append(_annotate(cf, af, relative, stream.header.width_px))
    track.close(stream.frames[-1].timestamp_s if stream.frames else 0.0)

    return DetectionResult(
        stream.header.video_id,
        collision_frames,
        track.events,
        agitation_frames,
        annotations,
    )


def _sig6(x: float) -> float:
    """Round to 6 significant digits for printed numeric output."""
    return float(f"{x:.6g}")


def event_records(result: DetectionResult) -> list[dict]:
    """Event-file records: collisions, per-frame agitation, video summary."""
    records: list[dict] = []
    for ev in result.collision_events:
        records.append(
            {
                "type": "collision",
                "side": ev.side,
                "onset_s": _sig6(ev.onset_s),
                "confirmed_s": _sig6(ev.confirmed_s),
                "end_s": _sig6(ev.end_s),
            }
        )
    for af in result.agitation_frames:
        records.append(
            {
                "type": "agitation_window",
                "index": af.index,
                "timestamp_s": _sig6(af.timestamp_s),
                "mean_velocity": _sig6(af.mean_velocity),
                "peak_velocity": _sig6(af.peak_velocity),
                "cumulative_velocity": _sig6(af.cumulative_velocity),
                "n_valid_transitions": af.n_valid_transitions,
                "is_agitation": af.is_agitation,
            }
        )
    records.append(
        {
            "type": "video_summary",
            "video_id": result.video_id,
            "collision": result.collision,
            "agitation": result.agitation,
            "n_collision_events": len(result.collision_events),
        }
    )
    return records


def annotation_records(result: DetectionResult) -> list[dict]:
    def aura(a: AuraAnnotation | None) -> dict | None:
        if a is None:
            return None
        return {
            "cx": _sig6(a.cx),
            "cy": _sig6(a.cy),
            "radius": _sig6(a.radius),
            "state": a.state,
        }

    return [
        {
            "type": "frame",
            "index": fa.index,
            "timestamp_s": _sig6(fa.timestamp_s),
            "mouth": aura(fa.mouth),
            "hands": {side: aura(fa.hands[side]) for side in SIDES},
            "lh_score": _sig6(fa.lh_score),
            "rh_score": _sig6(fa.rh_score),
            "vel": _sig6(fa.vel),
            "agitation": fa.agitation,
        }
        for fa in result.annotations
    ]


def write_jsonl_atomic(records: list[dict], path) -> None:
    """Write JSONL atomically (temp file + rename) with sorted keys."""
    directory = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=directory, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8") as fh:
            for record in records:
                fh.write(json.dumps(record, sort_keys=True) + "\n")
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def read_jsonl(path) -> list[dict]:
    records = []
    with open(path, "r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records
