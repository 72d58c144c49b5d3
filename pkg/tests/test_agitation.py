from __future__ import annotations

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from aura_engine.agitation import (
    AgitationParams,
    AgitationWindow,
    frame_aggregate_velocity,
    keypoint_velocity,
    run_agitation,
    video_prediction,
)
from aura_engine.errors import ConfigError
from aura_engine.streams import KeypointFrame, Landmark

from conftest import lm, make_frame

FPS = 25.0
DT = 1 / FPS


def moving_frames(speeds: list[float], n_landmarks: int = 1, fps: float = FPS):
    """One frame per entry; the transition into frame i+1 moves every
    landmark by speeds[i] * dt along x, so each per-transition aggregate
    velocity equals speeds[i] exactly."""
    names = ["wrist_left", "wrist_right", "elbow_left", "elbow_right"][:n_landmarks]
    frames = []
    x = dict.fromkeys(names, 0.0)
    frames.append(make_frame(0, 0.0, {n: (x[n], 0.5, 0.0, 0.9) for n in names}))
    for i, v in enumerate(speeds):
        for n in names:
            x[n] += v / fps
        frames.append(make_frame(i + 1, (i + 1) / fps, {n: (x[n], 0.5, 0.0, 0.9) for n in names}))
    return frames


class TestKeypointVelocity:
    def test_stationary(self):
        assert keypoint_velocity(lm(0.3, 0.4), lm(0.3, 0.4), 0.04) == 0.0

    def test_exactly_threshold_speed(self):
        # displacement 0.0072 over 0.04 s is exactly the 0.18 default.
        assert keypoint_velocity(lm(0.1, 0.2), lm(0.1072, 0.2), 0.04) == pytest.approx(0.18)

    def test_3_4_5_scaled(self):
        assert keypoint_velocity(lm(0.0, 0.0), lm(0.003, 0.004), 0.04) == pytest.approx(0.125)

    def test_z_counts(self):
        assert keypoint_velocity(
            Landmark(0, 0, 0.0, 1), Landmark(0, 0, 0.01, 1), 0.1
        ) == pytest.approx(0.1)

    def test_non_positive_dt_rejected(self):
        with pytest.raises(ValueError):
            keypoint_velocity(lm(0, 0), lm(0, 0), 0.0)


class TestFrameAggregate:
    def test_mean_of_two(self):
        prev = make_frame(0, 0.0, {
            "wrist_left": (0.0, 0.0, 0.0, 0.9),
            "wrist_right": (0.5, 0.0, 0.0, 0.9),
        })
        curr = make_frame(1, 0.04, {
            "wrist_left": (0.1 * 0.04, 0.0, 0.0, 0.9),
            "wrist_right": (0.5 + 0.3 * 0.04, 0.0, 0.0, 0.9),
        })
        assert frame_aggregate_velocity(prev, curr, AgitationParams()) == pytest.approx(0.2)

    def test_no_common_valid_landmark(self):
        prev = make_frame(0, 0.0, {"wrist_left": (0.0, 0.0, 0.0, 0.9)})
        curr = make_frame(1, 0.04, {"wrist_right": (0.0, 0.0, 0.0, 0.9)})
        assert frame_aggregate_velocity(prev, curr, AgitationParams()) is None

    def test_low_visibility_excluded(self):
        prev = make_frame(0, 0.0, {"wrist_left": (0.0, 0.0, 0.0, 0.5)})
        curr = make_frame(1, 0.04, {"wrist_left": (0.5, 0.0, 0.0, 0.9)})
        assert frame_aggregate_velocity(prev, curr, AgitationParams()) is None

    def test_singleton(self):
        prev = make_frame(0, 0.0, {"wrist_left": (0.0, 0.0, 0.0, 0.9)})
        curr = make_frame(1, 0.04, {"wrist_left": (0.5 * 0.04, 0.0, 0.0, 0.9)})
        assert frame_aggregate_velocity(prev, curr, AgitationParams()) == pytest.approx(0.5)

    def test_tracked_set_restricts(self):
        params = AgitationParams(tracked_set=frozenset({}))
        prev = make_frame(0, 0.0, {"wrist_left": (0.0, 0.0, 0.0, 0.9)})
        curr = make_frame(1, 0.04, {"wrist_left": (0.5, 0.0, 0.0, 0.9)})
        assert frame_aggregate_velocity(prev, curr, params) is None


def last_stats(frames, params=None):
    return run_agitation(frames, params or AgitationParams())[-1]


class TestWindowStats:
    def test_uniform_motion_above_threshold(self):
        result = last_stats(moving_frames([0.2, 0.2, 0.2, 0.2]))
        assert result.mean_velocity == pytest.approx(0.2)
        assert result.is_agitation

    def test_single_spike_trips_peak(self):
        result = last_stats(moving_frames([0.0, 0.0, 0.0, 0.19]))
        assert result.peak_velocity == pytest.approx(0.19)
        assert result.mean_velocity < 0.18
        assert result.is_agitation

    def test_all_three_conditions_fail(self):
        result = last_stats(moving_frames([0.1, 0.1, 0.1, 0.1]))
        assert result.mean_velocity == pytest.approx(0.1)
        assert result.peak_velocity == pytest.approx(0.1)
        assert result.cumulative_velocity == pytest.approx(0.4)
        assert not result.is_agitation

    def test_cumulative_condition_alone(self):
        # Per-transition 0.17 stays under tau_speed, but four transitions
        # accumulate 0.68 < 0.9; use a smaller window product instead.
        params = AgitationParams(tau_speed=0.18, w=3)
        result = last_stats(moving_frames([0.17, 0.17, 0.17]), params)
        # window keeps w-1 = 2 transitions: cumulative 0.34 < 0.54 -> no
        assert not result.is_agitation
        params_tight = AgitationParams(tau_speed=0.15, w=3)
        result = last_stats(moving_frames([0.17, 0.17, 0.17]), params_tight)
        assert result.is_agitation  # peak/mean 0.17 > 0.15

    def test_insufficient_frames(self):
        result = last_stats(moving_frames([]))
        assert result.mean_velocity == 0.0
        assert result.n_valid_transitions == 0
        assert not result.is_agitation

    def test_window_only_sees_last_w_frames(self):
        # Early burst leaves the window after w more frames.
        frames = moving_frames([0.5, 0.0, 0.0, 0.0, 0.0, 0.0])
        results = run_agitation(frames, AgitationParams(w=5))
        assert results[1].is_agitation  # burst visible immediately
        assert not results[-1].is_agitation  # burst aged out

    def test_stats_zero_when_no_valid_transitions(self):
        frames = [
            make_frame(0, 0.0, {"wrist_left": (0.0, 0.0, 0.0, 0.2)}),
            make_frame(1, 0.04, {"wrist_left": (0.5, 0.0, 0.0, 0.2)}),
        ]
        result = last_stats(frames)
        assert result.mean_velocity == 0.0
        assert result.n_valid_transitions == 0
        assert not result.is_agitation


class TestPooledInterpretation:
    def test_pooled_peak_sees_single_fast_keypoint(self):
        prev = make_frame(0, 0.0, {
            "wrist_left": (0.0, 0.5, 0.0, 0.9),
            "wrist_right": (0.5, 0.5, 0.0, 0.9),
        })
        curr = make_frame(1, DT, {
            "wrist_left": (0.3 * DT, 0.5, 0.0, 0.9),
            "wrist_right": (0.5, 0.5, 0.0, 0.9),
        })
        frames = [prev, curr]
        mean_mode = last_stats(frames, AgitationParams())
        pooled_mode = last_stats(frames, AgitationParams(pooled=True))
        # aggregate-mean: one transition value of (0.3 + 0)/2 = 0.15
        assert mean_mode.peak_velocity == pytest.approx(0.15)
        assert not mean_mode.is_agitation
        # pooled: the 0.3 keypoint velocity is visible directly
        assert pooled_mode.peak_velocity == pytest.approx(0.3)
        assert pooled_mode.is_agitation


class TestProperties:
    @settings(deadline=None)
    @given(st.lists(st.floats(min_value=0, max_value=0.5), min_size=1, max_size=8),
           st.floats(min_value=0.25, max_value=4.0))
    def test_playback_speed_scaling(self, speeds, c):
        frames = moving_frames(speeds)
        # Same displacements under dt' = dt * c gives stats / c.
        slowed = [KeypointFrame(f.index, f.timestamp_s * c, f.landmarks) for f in frames]
        base = last_stats(frames)
        scaled = last_stats(slowed)
        assert scaled.mean_velocity == pytest.approx(base.mean_velocity / c)
        assert scaled.peak_velocity == pytest.approx(base.peak_velocity / c)
        assert scaled.cumulative_velocity == pytest.approx(base.cumulative_velocity / c)

    @settings(deadline=None)
    @given(st.lists(st.floats(min_value=0, max_value=0.5), min_size=1, max_size=8))
    def test_peak_geq_mean_and_cumulative_identity(self, speeds):
        result = last_stats(moving_frames(speeds))
        if result.n_valid_transitions:
            assert result.peak_velocity >= result.mean_velocity - 1e-12
            assert result.cumulative_velocity == pytest.approx(
                result.mean_velocity * result.n_valid_transitions
            )

    @given(st.integers(min_value=2, max_value=12))
    def test_frozen_landmarks_never_agitate(self, n):
        frames = moving_frames([0.0] * n)
        assert not any(r.is_agitation for r in run_agitation(frames, AgitationParams()))

    @settings(deadline=None)
    @given(st.lists(st.floats(min_value=0, max_value=0.3), min_size=4, max_size=8),
           st.floats(min_value=0.01, max_value=0.3))
    def test_monotone_under_velocity_boost(self, speeds, boost):
        base = last_stats(moving_frames(speeds))
        boosted = last_stats(moving_frames([v + boost for v in speeds]))
        if base.is_agitation:
            assert boosted.is_agitation


class TestParamsValidation:
    def test_window_too_small(self):
        with pytest.raises(ConfigError):
            AgitationParams(w=1)

    def test_bad_speed(self):
        with pytest.raises(ConfigError):
            AgitationParams(tau_speed=0.0)


class TestVideoPrediction:
    def test_all_false(self):
        results = run_agitation(moving_frames([0.01] * 6), AgitationParams())
        assert video_prediction(results) is False

    def test_one_true_window(self):
        results = run_agitation(moving_frames([0.01, 0.5, 0.01]), AgitationParams())
        assert video_prediction(results) is True
