"""Per-frame collision scoring and persistence-confirmed alarm tracking.

A hand is "in risk" on a frame when the weighted sum of 2D aura overlap
and 3D proximity strictly exceeds tau_score. A collision is confirmed
only once a contiguous risk interval has lasted strictly longer than
tau_duration (wall-clock, from frame timestamps); each maximal risk
interval yields at most one event. Any non-risk frame resets the timer:
there is deliberately no hysteresis or dropout tolerance.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .errors import ConfigError, SequencingError
from .geometry import (
    AnchorSet,
    AuraMode,
    anchors,
    aura_radii,
    dist_2d,
    dist_3d,
    hand_size_norm,
    head_size_norm,
)
from .streams import KeypointFrame, StreamHeader

SIDES = ("left", "right")


@dataclass(frozen=True)
class CollisionParams:
    """Collision detector thresholds; defaults are the calibrated values."""

    tau_base: float = 0.3
    alpha: float = 0.7
    beta: float = 0.3
    tau_score: float = 0.3
    tau_duration: float = 0.3
    tau_valid: float = 0.7
    mode: AuraMode = field(default_factory=AuraMode)
    r_m_base: float = 150.0
    r_h_base: float = 100.0

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0 or self.alpha + self.beta <= 0:
            raise ConfigError("weights must be non-negative with alpha + beta > 0")
        if not self.tau_base > 0:
            raise ConfigError(f"tau_base must be positive, got {self.tau_base!r}")
        if not 0 < self.tau_score <= 1:
            raise ConfigError(f"tau_score must be in (0,1], got {self.tau_score!r}")
        if self.tau_duration < 0:
            raise ConfigError(f"tau_duration must be non-negative, got {self.tau_duration!r}")
        if not 0 <= self.tau_valid <= 1:
            raise ConfigError(f"tau_valid must be in [0,1], got {self.tau_valid!r}")
        if not (self.r_m_base > 0 and self.r_h_base > 0):
            raise ConfigError("base radii must be positive")


def overlap_score(d_2d: float, r_h: float, r_m: float) -> float:
    """2D aura overlap: max(0, 1 - d / (r_h + r_m))."""
    return max(0.0, 1.0 - d_2d / (r_h + r_m))


def proximity_score(d_3d: float, tau_base: float) -> float:
    """3D proximity: max(0, 1 - d / tau_base)."""
    return max(0.0, 1.0 - d_3d / tau_base)


def collision_score(overlap: float, proximity: float, alpha: float, beta: float) -> float:
    """Weighted combination of the two per-frame scores."""
    return alpha * overlap + beta * proximity


@dataclass(frozen=True)
class HandFrameScore:
    """Scores and state for one hand on one frame."""

    overlap: float = 0.0
    proximity: float = 0.0
    score: float = 0.0
    risk: bool = False
    confirmed: bool = False
    mouth_available: bool = False
    hand_available: bool = False
    r_m: float = 0.0
    r_h: float = 0.0


@dataclass(frozen=True)
class CollisionFrameResult:
    index: int
    timestamp_s: float
    anchors: AnchorSet
    hands: dict[str, HandFrameScore]


@dataclass(frozen=True)
class CollisionEvent:
    """One confirmed collision: risk onset, confirmation, and release times."""

    side: str
    onset_s: float
    confirmed_s: float
    end_s: float


@dataclass
class _HandState:
    risk_since: float | None = None
    confirmed_s: float | None = None


class CollisionTrack:
    """Running per-hand risk state for a single stream.

    Frames must be applied sequentially (single writer); separate streams
    need separate tracks. Completed events accumulate in ``events``;
    ``close`` finalizes any interval still open at stream end.
    """

    def __init__(self, params: CollisionParams):
        self.params = params
        self.events: list[CollisionEvent] = []
        self._states: dict[str, _HandState] = {side: _HandState() for side in SIDES}
        self._last_index: int | None = None
        self._last_timestamp: float | None = None

    def step(self, frame: KeypointFrame, header: StreamHeader) -> CollisionFrameResult:
        if self._last_index is not None and frame.index <= self._last_index:
            raise SequencingError(
                f"frame {frame.index} after frame {self._last_index}: streams must be fed in order"
            )
        if self._last_timestamp is not None and frame.timestamp_s < self._last_timestamp:
            raise SequencingError(
                f"timestamp went backwards at frame {frame.index}"
            )
        self._last_index = frame.index
        self._last_timestamp = frame.timestamp_s

        p = self.params
        anchor_set = anchors(frame, header, p.tau_valid)
        r_m, r_h, relative = self._radii(frame, header)

        hands: dict[str, HandFrameScore] = {}
        for side in SIDES:
            hands[side] = self._score_side(frame.timestamp_s, anchor_set, side, r_m, r_h, relative)
        return CollisionFrameResult(frame.index, frame.timestamp_s, anchor_set, hands)

    def close(self, end_s: float) -> None:
        """Finalize open risk intervals at stream end."""
        for side in SIDES:
            self._end_interval(side, end_s)

    def _radii(self, frame: KeypointFrame, header: StreamHeader) -> tuple[float, float, bool]:
        """Radii in the scoring space of the current mode.

        Fixed mode scores in pixels. Relative mode scores in normalized
        units so results are independent of header resolution; its fixed
        fallback radii convert through the frame width.
        """
        p = self.params
        if p.mode.variant == "fixed":
            r_m, r_h = aura_radii(p.mode, p.r_m_base, p.r_h_base, None, None)
            return r_m, r_h, False
        head = head_size_norm(frame, p.tau_valid)
        hand = hand_size_norm(frame, p.tau_valid)
        r_m, r_h = aura_radii(
            p.mode,
            p.r_m_base / header.width_px,
            p.r_h_base / header.width_px,
            head,
            hand,
        )
        return r_m, r_h, True

    def _score_side(
        self,
        timestamp_s: float,
        anchor_set: AnchorSet,
        side: str,
        r_m: float,
        r_h: float,
        relative: bool,
    ) -> HandFrameScore:
        p = self.params
        mouth_3d = anchor_set.mouth_center_3d
        hand_3d = anchor_set.hand_center_3d(side)
        mouth_px = anchor_set.mouth_center
        hand_px = anchor_set.hand_center(side)

        if mouth_3d is None or hand_3d is None:
            # Missing anchors: total score 0 and the risk interval resets.
            self._end_interval(side, timestamp_s)
            return HandFrameScore(
                mouth_available=mouth_3d is not None,
                hand_available=hand_3d is not None,
                r_m=r_m,
                r_h=r_h,
            )

        if relative:
            d2 = dist_2d(mouth_3d[:2], hand_3d[:2])
        else:
            assert mouth_px is not None and hand_px is not None
            d2 = dist_2d(mouth_px, hand_px)
        overlap = overlap_score(d2, r_h, r_m)
        proximity = proximity_score(dist_3d(mouth_3d, hand_3d), p.tau_base)
        score = collision_score(overlap, proximity, p.alpha, p.beta)
        risk = score > p.tau_score

        state = self._states[side]
        if risk:
            if state.risk_since is None:
                state.risk_since = timestamp_s
            elif state.confirmed_s is None and timestamp_s - state.risk_since > p.tau_duration:
                state.confirmed_s = timestamp_s
        else:
            self._end_interval(side, timestamp_s)

        return HandFrameScore(
            overlap=overlap,
            proximity=proximity,
            score=score,
            risk=risk,
            confirmed=state.confirmed_s is not None,
            mouth_available=True,
            hand_available=True,
            r_m=r_m,
            r_h=r_h,
        )

    def _end_interval(self, side: str, end_s: float) -> None:
        state = self._states[side]
        if state.confirmed_s is not None:
            assert state.risk_since is not None
            self.events.append(
                CollisionEvent(side, state.risk_since, state.confirmed_s, end_s)
            )
        state.risk_since = None
        state.confirmed_s = None


def step(
    track: CollisionTrack, frame: KeypointFrame, header: StreamHeader
) -> tuple[CollisionTrack, CollisionFrameResult]:
    """Functional wrapper around CollisionTrack.step for callers that
    prefer passing the track through explicitly."""
    return track, track.step(frame, header)


def run_collision(
    frames, header: StreamHeader, params: CollisionParams
) -> tuple[list[CollisionFrameResult], list[CollisionEvent]]:
    """Run the tracker over a whole stream and return per-frame results
    plus the finalized event list."""
    track = CollisionTrack(params)
    results = [track.step(frame, header) for frame in frames]
    track.close(results[-1].timestamp_s if results else 0.0)
    return results, track.events


def video_prediction(events: list[CollisionEvent]) -> bool:
    """Video-level label: positive iff any hand confirmed a collision."""
    return len(events) > 0


def params_with_mode(params: CollisionParams, **mode_changes) -> CollisionParams:
    """Convenience: new params with fields of the aura mode replaced."""
    return replace(params, mode=replace(params.mode, **mode_changes))
