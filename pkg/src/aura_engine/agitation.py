"""Windowed velocity statistics and the three-condition agitation trigger.

Velocities are 3D displacements of individual keypoints between
consecutive frames divided by the timestamp delta, in normalized units
per second. A keypoint contributes to a transition only when it passes
the visibility gate at both endpoint frames.

By default each transition is first reduced to the mean velocity over
its contributing keypoints, and the window statistics (mean, peak,
cumulative) run over those per-transition aggregates; this keeps the
cumulative condition comparable to tau_speed * w. The alternative of
pooling every (keypoint, transition) velocity into one set is available
behind ``pooled=True`` for comparison.
"""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass

from .errors import ConfigError
from .streams import KeypointFrame, Landmark, LandmarkId, is_valid


@dataclass(frozen=True)
class AgitationParams:
    """Agitation detector settings; defaults are the calibrated values."""

    tau_speed: float = 0.18
    w: int = 5
    tau_valid: float = 0.7
    tracked_set: frozenset[LandmarkId] | None = None  # None = all landmarks seen
    pooled: bool = False

    def __post_init__(self) -> None:
        if not self.tau_speed > 0:
            raise ConfigError(f"tau_speed must be positive, got {self.tau_speed!r}")
        if not (isinstance(self.w, int) and self.w >= 2):
            raise ConfigError(f"window size must be an integer >= 2, got {self.w!r}")
        if not 0 <= self.tau_valid <= 1:
            raise ConfigError(f"tau_valid must be in [0,1], got {self.tau_valid!r}")


@dataclass(frozen=True)
class AgitationFrameResult:
    """Window statistics for the window ending at one frame."""

    index: int
    timestamp_s: float
    mean_velocity: float = 0.0
    peak_velocity: float = 0.0
    cumulative_velocity: float = 0.0
    n_valid_transitions: int = 0
    is_agitation: bool = False


def keypoint_velocity(prev: Landmark, curr: Landmark, dt: float) -> float:
    """3D speed of one keypoint across a transition, in units per second."""
    if dt <= 0:
        raise ValueError(f"dt must be positive, got {dt!r}")
    d = math.sqrt((curr.x - prev.x) ** 2 + (curr.y - prev.y) ** 2 + (curr.z - prev.z) ** 2)
    return d / dt


def frame_aggregate_velocity(
    prev_frame: KeypointFrame, curr_frame: KeypointFrame, params: AgitationParams
) -> float | None:
    """Mean keypoint velocity across one transition; None when no tracked
    landmark is valid at both frames (or the timestamps do not advance)."""
    velocities = transition_velocities(prev_frame, curr_frame, params)
    if not velocities:
        return None
    return sum(velocities) / len(velocities)


def transition_velocities(
    prev_frame: KeypointFrame, curr_frame: KeypointFrame, params: AgitationParams
) -> list[float]:
    """Per-keypoint velocities of the tracked landmarks valid at both ends."""
    dt = curr_frame.timestamp_s - prev_frame.timestamp_s
    if dt <= 0:
        return []
    out: list[float] = []
    for lid, curr in curr_frame.landmarks.items():
        if params.tracked_set is not None and lid not in params.tracked_set:
            continue
        prev = prev_frame.landmarks.get(lid)
        if prev is None:
            continue
        if is_valid(prev, params.tau_valid) and is_valid(curr, params.tau_valid):
            out.append(keypoint_velocity(prev, curr, dt))
    return out


class AgitationWindow:
    """Sliding window (stride 1) over the last w frames.

    Transition velocities are computed once per push and cached, so
    advancing the window costs one transition regardless of w.
    """

    def __init__(self, params: AgitationParams):
        self.params = params
        self._frames: deque[KeypointFrame] = deque(maxlen=params.w)
        # One entry per buffered transition: per-keypoint velocity list.
        self._velocities: deque[list[float]] = deque(maxlen=params.w - 1)

    def __len__(self) -> int:
        return len(self._frames)

    def push(self, frame: KeypointFrame) -> None:
        if self._frames:
            self._velocities.append(
                transition_velocities(self._frames[-1], frame, self.params)
            )
        self._frames.append(frame)

    def stats(self) -> AgitationFrameResult:
        return window_stats(self, self.params)


def window_stats(window: AgitationWindow, params: AgitationParams) -> AgitationFrameResult:
    """Statistics over the window's velocities plus the trigger decision.

    Fewer than two frames, or no transition with a contributing keypoint,
    yields the all-zero non-agitated result.
    """
    frame = window._frames[-1] if window._frames else None
    index = frame.index if frame else 0
    timestamp = frame.timestamp_s if frame else 0.0

    if params.pooled:
        values = [v for vel in window._velocities for v in vel]
        n_valid = sum(1 for vel in window._velocities if vel)
    else:
        aggregates = [
            sum(vel) / len(vel) for vel in window._velocities if vel
        ]
        values = aggregates
        n_valid = len(aggregates)

    if not values:
        return AgitationFrameResult(index, timestamp)

    mean_v = sum(values) / len(values)
    peak_v = max(values)
    cum_v = sum(values)
    fired = (
        mean_v > params.tau_speed
        or peak_v > params.tau_speed
        or cum_v > params.tau_speed * params.w
    )
    return AgitationFrameResult(index, timestamp, mean_v, peak_v, cum_v, n_valid, fired)


def run_agitation(frames, params: AgitationParams) -> list[AgitationFrameResult]:
    """Slide the window over a stream; one result per frame."""
    window = AgitationWindow(params)
    results = []
    for frame in frames:
        window.push(frame)
        results.append(window.stats())
    return results


def video_prediction(results: list[AgitationFrameResult]) -> bool:
    """Video-level label: positive iff any window triggered."""
    return any(r.is_agitation for r in results)
