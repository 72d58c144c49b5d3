"""Pose estimator backends.

A backend turns one BGR frame into indexed landmarks (normalized x/y,
depth z on the x scale, visibility in [0,1]) or None when nobody is
detected. The MediaPipe backend is the production path and is imported
lazily so the package works where mediapipe is not installed; the
synthetic backend is a deterministic stand-in used by the test suite.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Protocol

import numpy as np


@dataclass(frozen=True)
class RawLandmark:
    index: int
    x: float
    y: float
    z: float
    visibility: float


class PoseBackend(Protocol):
    name: str

    def version(self) -> str: ...

    def detect(self, frame_bgr: np.ndarray) -> list[RawLandmark] | None: ...

    def close(self) -> None: ...


class MediaPipeBackend:
    """MediaPipe Pose wrapper (requires the optional mediapipe extra)."""

    name = "mediapipe_pose"

    def __init__(self, model_complexity: int = 1, min_detection_confidence: float = 0.5):
        try:
            import mediapipe as mp
        except ImportError as exc:
            raise RuntimeError(
                "mediapipe is not installed; install pose-extract[mediapipe] "
                "or choose --backend synthetic"
            ) from exc
        self._mp = mp
        self.model_complexity = model_complexity
        self.min_detection_confidence = min_detection_confidence
        self._pose = mp.solutions.pose.Pose(
            static_image_mode=False,
            model_complexity=model_complexity,
            min_detection_confidence=min_detection_confidence,
        )

    def version(self) -> str:
        return getattr(self._mp, "__version__", "unknown")

    def detect(self, frame_bgr: np.ndarray) -> list[RawLandmark] | None:
        rgb = frame_bgr[:, :, ::-1]
        result = self._pose.process(rgb)
        if not result.pose_landmarks:
            return None
        return [
            RawLandmark(i, lm.x, lm.y, lm.z, lm.visibility)
            for i, lm in enumerate(result.pose_landmarks.landmark)
        ]

    def close(self) -> None:
        self._pose.close()


class SyntheticBackend:
    """Deterministic stand-in estimator for tests and dry runs.

    Emits a fixed supine skeleton whose horizontal position tracks the
    frame's mean brightness, and reports no person for near-black
    frames. Deterministic in the pixel content alone.
    """

    name = "synthetic"

    #: estimator-native index -> resting position (MediaPipe Pose indexing)
    SKELETON = {
        9: (0.49, 0.30), 10: (0.51, 0.30),      # mouth corners
        7: (0.45, 0.28), 8: (0.55, 0.28),       # ears
        3: (0.47, 0.26), 6: (0.53, 0.26),       # outer eyes
        15: (0.22, 0.84), 16: (0.78, 0.84),     # wrists
        17: (0.19, 0.83), 18: (0.81, 0.83),     # pinkies
        19: (0.25, 0.83), 20: (0.75, 0.83),     # index fingers
        21: (0.24, 0.82), 22: (0.76, 0.82),     # thumbs
        11: (0.40, 0.42), 12: (0.60, 0.42),     # shoulders
        13: (0.34, 0.60), 14: (0.66, 0.60),     # elbows
        23: (0.44, 0.62), 24: (0.56, 0.62),     # hips
        25: (0.43, 0.80), 26: (0.57, 0.80),     # knees
        27: (0.42, 0.93), 28: (0.58, 0.93),     # ankles
    }
    DETECTION_THRESHOLD = 8.0  # mean 8-bit intensity below which no person is seen

    def version(self) -> str:
        return "1"

    def detect(self, frame_bgr: np.ndarray) -> list[RawLandmark] | None:
        brightness = float(frame_bgr.mean())
        if brightness < self.DETECTION_THRESHOLD:
            return None
        shift = (brightness / 255.0) * 0.05
        return [
            RawLandmark(i, x + shift, y, 0.0, 0.95)
            for i, (x, y) in sorted(self.SKELETON.items())
        ]

    def close(self) -> None:
        pass


def make_backend(name: str) -> PoseBackend:
    if name == "mediapipe":
        return MediaPipeBackend()
    if name == "synthetic":
        return SyntheticBackend()
    raise ValueError(f"unknown backend {name!r}; expected 'mediapipe' or 'synthetic'")
