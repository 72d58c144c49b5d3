"""Offline adapter: video files to keypoint stream JSONL."""

from .backends import MediaPipeBackend, SyntheticBackend, make_backend
from .extract import ExtractionError, ExtractionSummary, extract
from .mapping import MEDIAPIPE_POSE, LandmarkMapping, load_mapping

__all__ = [
    "ExtractionError",
    "ExtractionSummary",
    "LandmarkMapping",
    "MEDIAPIPE_POSE",
    "MediaPipeBackend",
    "SyntheticBackend",
    "extract",
    "load_mapping",
    "make_backend",
]

__version__ = "0.1.0"
