"""Mapping from estimator-native landmark indices to the stream vocabulary.

The keypoint stream file format names landmarks with a fixed snake_case
vocabulary; an estimator emits indexed landmarks. A LandmarkMapping
pairs each target name with exactly one source index, or lists it as
explicitly unavailable; silence is not allowed for the mandatory
head/hand names, because a silently missing mouth would disable
collision scoring without anyone noticing.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field

#: Landmark names that collision scoring depends on.
MANDATORY_NAMES = (
    "mouth_left", "mouth_right",
    "ear_left", "ear_right",
    "eyebrow_left", "eyebrow_right",
    "wrist_left", "wrist_right",
    "pinky_left", "pinky_right",
    "index_left", "index_right",
    "thumb_left", "thumb_right",
)

#: Optional body landmarks used by agitation tracking.
BODY_NAMES = (
    "shoulder_left", "shoulder_right",
    "elbow_left", "elbow_right",
    "hip_left", "hip_right",
    "knee_left", "knee_right",
    "ankle_left", "ankle_right",
)

VOCABULARY = MANDATORY_NAMES + BODY_NAMES


class MappingError(ValueError):
    pass


@dataclass(frozen=True)
class LandmarkMapping:
    """index -> name table plus the names declared unavailable."""

    estimator: str
    table: dict[int, str]
    unavailable: frozenset[str] = frozenset()
    notes: str = ""
    proxies: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        targets = list(self.table.values())
        unknown = [n for n in targets if n not in VOCABULARY]
        if unknown:
            raise MappingError(f"mapping targets outside the vocabulary: {sorted(set(unknown))}")
        duplicates = {n for n in targets if targets.count(n) > 1}
        if duplicates:
            raise MappingError(f"multiple source indices map to {sorted(duplicates)}")
        bad_unavailable = self.unavailable - set(VOCABULARY)
        if bad_unavailable:
            raise MappingError(f"unavailable entries outside the vocabulary: {sorted(bad_unavailable)}")
        for name in MANDATORY_NAMES:
            mapped = name in targets
            declared_out = name in self.unavailable
            if mapped and declared_out:
                raise MappingError(f"{name} is both mapped and declared unavailable")
            if not mapped and not declared_out:
                raise MappingError(
                    f"mandatory landmark {name} has no source index and is not "
                    f"declared unavailable"
                )

    def name_for(self, index: int) -> str | None:
        return self.table.get(index)


# MediaPipe Pose emits 33 landmarks. The pose set has no eyebrow points,
# so the outer-eye landmarks stand in for them; head_size only feeds a
# max() over several spans, so the small constant offset is harmless.
# The stamped mapping file records the proxy choice.
MEDIAPIPE_POSE = LandmarkMapping(
    estimator="mediapipe_pose",
    table={
        9: "mouth_left",
        10: "mouth_right",
        7: "ear_left",
        8: "ear_right",
        3: "eyebrow_left",   # left_eye_outer proxy
        6: "eyebrow_right",  # right_eye_outer proxy
        15: "wrist_left",
        16: "wrist_right",
        17: "pinky_left",
        18: "pinky_right",
        19: "index_left",
        20: "index_right",
        21: "thumb_left",
        22: "thumb_right",
        11: "shoulder_left",
        12: "shoulder_right",
        13: "elbow_left",
        14: "elbow_right",
        23: "hip_left",
        24: "hip_right",
        25: "knee_left",
        26: "knee_right",
        27: "ankle_left",
        28: "ankle_right",
    },
    proxies={
        "eyebrow_left": "left_eye_outer",
        "eyebrow_right": "right_eye_outer",
    },
    notes="MediaPipe Pose has no eyebrow landmarks; outer eye corners proxy them.",
)


def load_mapping(path) -> LandmarkMapping:
    """Read a mapping JSON file: {estimator, map: {index: name}, unavailable?, notes?, proxies?}."""
    with open(path, "r", encoding="utf-8") as fh:
        raw = json.load(fh)
    if not isinstance(raw, dict) or "map" not in raw:
        raise MappingError(f"{path}: mapping file must be an object with a 'map' key")
    try:
        table = {int(k): str(v) for k, v in raw["map"].items()}
    except (TypeError, ValueError) as exc:
        raise MappingError(f"{path}: map keys must be integer indices") from exc
    return LandmarkMapping(
        estimator=str(raw.get("estimator", "unknown")),
        table=table,
        unavailable=frozenset(raw.get("unavailable", ())),
        notes=str(raw.get("notes", "")),
        proxies=dict(raw.get("proxies", {})),
    )


def dump_mapping(mapping: LandmarkMapping) -> dict:
    return {
        "estimator": mapping.estimator,
        "map": {str(k): v for k, v in sorted(mapping.table.items())},
        "unavailable": sorted(mapping.unavailable),
        "proxies": dict(sorted(mapping.proxies.items())),
        "notes": mapping.notes,
    }
