from __future__ import annotations

import json

import pytest
from hypothesis import given
from hypothesis import strategies as st

from aura_engine.errors import StreamParseError, StreamValidationError
from aura_engine.streams import (
    KeypointFrame,
    KeypointStream,
    Landmark,
    LandmarkId,
    StreamHeader,
    is_valid,
    parse_stream,
    serialize_stream,
    to_pixels,
)

from conftest import lm, make_frame

HEADER_LINE = '{"video_id": "v1", "fps": 25, "width_px": 1280, "height_px": 720}'


def frame_line(index: int, t: float, landmarks: dict | None = None) -> str:
    return json.dumps({"index": index, "timestamp_s": t, "landmarks": landmarks or {}})


class TestParse:
    def test_empty_stream(self):
        stream = parse_stream(HEADER_LINE + "\n")
        assert stream.header == StreamHeader("v1", 25.0, 1280, 720)
        assert len(stream.frames) == 0

    def test_150_frames_at_25fps_lasts_6_seconds(self):
        lines = [HEADER_LINE] + [frame_line(i, i / 25.0) for i in range(150)]
        stream = parse_stream("\n".join(lines))
        assert len(stream.frames) == 150
        assert stream.duration_s == pytest.approx(6.0)

    def test_non_monotone_timestamp_rejected(self):
        lines = [HEADER_LINE, frame_line(0, 0.08), frame_line(1, 0.04)]
        with pytest.raises(StreamValidationError, match="non-decreasing"):
            parse_stream("\n".join(lines))

    def test_non_increasing_index_rejected(self):
        lines = [HEADER_LINE, frame_line(0, 0.0), frame_line(0, 0.04)]
        with pytest.raises(StreamValidationError, match="strictly increasing"):
            parse_stream("\n".join(lines))

    def test_malformed_record_reports_line_number(self):
        lines = [HEADER_LINE, frame_line(0, 0.0), "{not json"]
        with pytest.raises(StreamParseError, match="line 3"):
            parse_stream("\n".join(lines))

    def test_unknown_landmark_named_in_error(self):
        landmarks = {"nostril_left": {"x": 0, "y": 0, "z": 0, "visibility": 1}}
        lines = [HEADER_LINE, frame_line(0, 0.0, landmarks)]
        with pytest.raises(StreamParseError, match="nostril_left"):
            parse_stream("\n".join(lines))

    def test_header_keys_must_match_exactly(self):
        with pytest.raises(StreamParseError, match="header keys"):
            parse_stream('{"video_id": "v", "fps": 25}\n')

    def test_missing_header(self):
        with pytest.raises(StreamParseError):
            parse_stream("")

    def test_bad_landmark_field_rejected(self):
        landmarks = {"mouth_left": {"x": 0, "y": 0, "z": 0}}
        lines = [HEADER_LINE, frame_line(0, 0.0, landmarks)]
        with pytest.raises(StreamParseError, match="visibility"):
            parse_stream("\n".join(lines))

    def test_visibility_out_of_range_rejected(self):
        landmarks = {"mouth_left": {"x": 0, "y": 0, "z": 0, "visibility": 1.5}}
        lines = [HEADER_LINE, frame_line(0, 0.0, landmarks)]
        with pytest.raises(StreamParseError):
            parse_stream("\n".join(lines))

    def test_non_finite_coordinate_rejected(self):
        lines = [
            HEADER_LINE,
            '{"index": 0, "timestamp_s": 0.0, "landmarks": '
            '{"mouth_left": {"x": NaN, "y": 0, "z": 0, "visibility": 1}}}',
        ]
        with pytest.raises(StreamParseError):
            parse_stream("\n".join(lines))


class TestHeaderInvariants:
    def test_zero_fps_rejected(self):
        with pytest.raises(StreamValidationError):
            StreamHeader("v", 0.0, 1280, 720)

    @pytest.mark.parametrize("width,height", [(0, 720), (1280, -1)])
    def test_non_positive_dimensions_rejected(self, width, height):
        with pytest.raises(StreamValidationError):
            StreamHeader("v", 25.0, width, height)


landmark_ids = st.sampled_from(list(LandmarkId))
coords = st.floats(min_value=-2.0, max_value=2.0, allow_nan=False)
landmarks_st = st.builds(
    Landmark,
    x=coords,
    y=coords,
    z=coords,
    visibility=st.floats(min_value=0.0, max_value=1.0),
)
frames_st = st.builds(
    KeypointFrame,
    index=st.just(0),
    timestamp_s=st.just(0.0),
    landmarks=st.dictionaries(landmark_ids, landmarks_st, max_size=6),
)


@st.composite
def streams_st(draw):
    header = StreamHeader(
        draw(st.text(alphabet="abc123", min_size=1, max_size=8)),
        draw(st.floats(min_value=1.0, max_value=120.0)),
        draw(st.integers(min_value=1, max_value=4000)),
        draw(st.integers(min_value=1, max_value=4000)),
    )
    n = draw(st.integers(min_value=0, max_value=5))
    frames = []
    t = 0.0
    for i in range(n):
        t += draw(st.floats(min_value=0.0, max_value=1.0))
        frames.append(
            KeypointFrame(i, t, draw(st.dictionaries(landmark_ids, landmarks_st, max_size=4)))
        )
    return KeypointStream(header, tuple(frames))


class TestRoundTrip:
    @given(streams_st())
    def test_parse_inverts_serialize(self, stream):
        assert parse_stream(serialize_stream(stream)) == stream

    def test_serialization_is_stable_bytes(self):
        stream = KeypointStream(
            StreamHeader("v", 25.0, 1280, 720),
            (make_frame(0, 0.0, {"mouth_left": (0.1, 0.2, 0.3, 0.9)}),),
        )
        assert serialize_stream(stream) == serialize_stream(stream)


class TestToPixels:
    def test_center(self, header):
        assert to_pixels(lm(0.5, 0.5), header) == (640.0, 360.0)

    def test_origin(self, header):
        assert to_pixels(lm(0.0, 0.0), header) == (0.0, 0.0)

    def test_corner_downscaled(self):
        header = StreamHeader("v", 25.0, 854, 480)
        assert to_pixels(lm(1.0, 1.0), header) == (854.0, 480.0)

    @given(coords, coords, st.integers(min_value=1, max_value=2000),
           st.integers(min_value=1, max_value=2000))
    def test_linear_in_header(self, x, y, w, h):
        small = StreamHeader("v", 25.0, w, h)
        big = StreamHeader("v", 25.0, 2 * w, 2 * h)
        px, py = to_pixels(lm(x, y), small)
        px2, py2 = to_pixels(lm(x, y), big)
        assert px2 == pytest.approx(2 * px)
        assert py2 == pytest.approx(2 * py)


class TestIsValid:
    def test_boundary_inclusive(self):
        assert is_valid(lm(0, 0, visibility=0.7), 0.7) is True

    def test_below_threshold(self):
        assert is_valid(lm(0, 0, visibility=0.69), 0.7) is False

    def test_full_confidence(self):
        assert is_valid(lm(0, 0, visibility=1.0), 1.0) is True

    def test_absent_is_invalid(self):
        assert is_valid(None, 0.0) is False

    @given(
        st.floats(min_value=0, max_value=1),
        st.floats(min_value=0, max_value=1),
        st.floats(min_value=0, max_value=1),
    )
    def test_monotone_in_visibility_antitone_in_threshold(self, v1, v2, tau):
        lo, hi = min(v1, v2), max(v1, v2)
        if is_valid(lm(0, 0, visibility=lo), tau):
            assert is_valid(lm(0, 0, visibility=hi), tau)
        if not is_valid(lm(0, 0, visibility=hi), tau):
            assert not is_valid(lm(0, 0, visibility=lo), tau)
