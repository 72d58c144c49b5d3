"""Keypoint-stream risk detection engine.

Detects two behaviors over pose keypoint streams: collision (a hand
entering the mouth aura, persistence-confirmed) and agitation (windowed
velocity statistics). Ships with a deterministic scenario simulator,
classification metrics with bootstrap CIs, ICC(3,k) reliability, and a
fold-based parameter robustness harness.
"""

from .agitation import AgitationParams
from .collision import CollisionParams
from .config import EngineConfig
from .geometry import AuraMode
from .pipeline import run_detection
from .simulate import Scenario, generate, label_set
from .streams import KeypointStream, parse_stream

__all__ = [
    "AgitationParams",
    "AuraMode",
    "CollisionParams",
    "EngineConfig",
    "KeypointStream",
    "Scenario",
    "generate",
    "label_set",
    "parse_stream",
    "run_detection",
]

__version__ = "0.1.0"
