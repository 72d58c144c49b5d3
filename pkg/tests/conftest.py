from __future__ import annotations

import pytest

from aura_engine.streams import KeypointFrame, Landmark, LandmarkId, StreamHeader


@pytest.fixture
def header() -> StreamHeader:
    return StreamHeader("test", 25.0, 1280, 720)


def lm(x: float, y: float, z: float = 0.0, visibility: float = 1.0) -> Landmark:
    return Landmark(x, y, z, visibility)


def make_frame(index: int, timestamp_s: float, landmarks: dict[str, tuple]) -> KeypointFrame:
    return KeypointFrame(
        index,
        timestamp_s,
        {LandmarkId(name): Landmark(*values) for name, values in landmarks.items()},
    )
