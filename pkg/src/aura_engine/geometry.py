"""Distance primitives, anatomical anchors, body sizes, and aura radii.

Two coordinate regimes coexist:

* fixed aura mode works in pixel space: radii are calibrated pixel
  constants scaled by ``s_r``, distances are pixel distances;
* relative aura mode works entirely in normalized space: radii are
  ``lambda`` times per-frame body sizes measured on normalized
  coordinates, so scores are independent of the header resolution by
  construction. Only the fallback (a body size unavailable in a frame)
  re-enters pixel units, converting the fixed radius through the frame
  width; that path is resolution-sensitive exactly like fixed mode.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

from .errors import ConfigError
from .streams import KeypointFrame, Landmark, LandmarkId, StreamHeader, is_valid, to_pixels

Point2 = tuple[float, float]
Point3 = tuple[float, float, float]


@dataclass(frozen=True)
class AuraMode:
    """Radius policy: calibrated pixel constants vs body-size-proportional."""

    variant: Literal["fixed", "relative"] = "fixed"
    lambda_: float = 2.0
    s_r: float = 1.0

    def __post_init__(self) -> None:
        if self.variant not in ("fixed", "relative"):
            raise ConfigError(f"aura mode must be 'fixed' or 'relative', got {self.variant!r}")
        if not self.lambda_ > 0:
            raise ConfigError(f"lambda must be positive, got {self.lambda_!r}")
        if not self.s_r > 0:
            raise ConfigError(f"s_r must be positive, got {self.s_r!r}")


@dataclass(frozen=True)
class AnchorSet:
    """Aggregate mouth/hand points for one frame.

    Pixel centers drive fixed-mode overlap, the 3D normalized centers
    drive proximity (and, via their x/y, relative-mode overlap). A center
    is present only when its constituent landmarks pass the visibility
    gate; hand centers additionally require a valid wrist.
    """

    mouth_center: Point2 | None = None
    hand_center_left: Point2 | None = None
    hand_center_right: Point2 | None = None
    mouth_center_3d: Point3 | None = None
    hand_center_left_3d: Point3 | None = None
    hand_center_right_3d: Point3 | None = None

    def hand_center(self, side: str) -> Point2 | None:
        return self.hand_center_left if side == "left" else self.hand_center_right

    def hand_center_3d(self, side: str) -> Point3 | None:
        return self.hand_center_left_3d if side == "left" else self.hand_center_right_3d


def dist_2d(a: Point2, b: Point2) -> float:
    return math.hypot(a[0] - b[0], a[1] - b[1])


def dist_3d(a: Point3, b: Point3) -> float:
    return math.sqrt((a[0] - b[0]) ** 2 + (a[1] - b[1]) ** 2 + (a[2] - b[2]) ** 2)


_HAND_LANDMARKS = {
    "left": (
        LandmarkId.WRIST_LEFT,
        LandmarkId.INDEX_LEFT,
        LandmarkId.PINKY_LEFT,
        LandmarkId.THUMB_LEFT,
    ),
    "right": (
        LandmarkId.WRIST_RIGHT,
        LandmarkId.INDEX_RIGHT,
        LandmarkId.PINKY_RIGHT,
        LandmarkId.THUMB_RIGHT,
    ),
}


def _mean_points(points: list[Point3]) -> Point3:
    n = len(points)
    return (
        sum(p[0] for p in points) / n,
        sum(p[1] for p in points) / n,
        sum(p[2] for p in points) / n,
    )


def anchors(frame: KeypointFrame, header: StreamHeader, tau_valid: float) -> AnchorSet:
    """Mouth and hand centers for one frame, gated by visibility.

    Mouth center = mean of the valid mouth corners. Hand center = mean of
    the valid wrist/index/pinky/thumb landmarks of that side, present only
    if the wrist itself is valid (the wrist is the sturdiest hand point).
    """
    lms = frame.landmarks

    def valid(lid: LandmarkId) -> Landmark | None:
        lm = lms.get(lid)
        return lm if is_valid(lm, tau_valid) else None

    mouth = [lm for lid in (LandmarkId.MOUTH_LEFT, LandmarkId.MOUTH_RIGHT)
             if (lm := valid(lid)) is not None]
    mouth_3d = _mean_points([(lm.x, lm.y, lm.z) for lm in mouth]) if mouth else None

    hand_3d: dict[str, Point3 | None] = {}
    for side, lids in _HAND_LANDMARKS.items():
        wrist = valid(lids[0])
        if wrist is None:
            hand_3d[side] = None
            continue
        pts = [(lm.x, lm.y, lm.z) for lid in lids if (lm := valid(lid)) is not None]
        hand_3d[side] = _mean_points(pts)

    def px(p: Point3 | None) -> Point2 | None:
        if p is None:
            return None
        return p[0] * header.width_px, p[1] * header.height_px

    return AnchorSet(
        mouth_center=px(mouth_3d),
        hand_center_left=px(hand_3d["left"]),
        hand_center_right=px(hand_3d["right"]),
        mouth_center_3d=mouth_3d,
        hand_center_left_3d=hand_3d["left"],
        hand_center_right_3d=hand_3d["right"],
    )


def _pair_dist(frame: KeypointFrame, a: LandmarkId, b: LandmarkId,
               tau_valid: float, header: StreamHeader | None) -> float | None:
    la, lb = frame.landmarks.get(a), frame.landmarks.get(b)
    if not (is_valid(la, tau_valid) and is_valid(lb, tau_valid)):
        return None
    assert la is not None and lb is not None
    if header is None:
        return dist_2d((la.x, la.y), (lb.x, lb.y))
    return dist_2d(to_pixels(la, header), to_pixels(lb, header))


def _head_size(frame: KeypointFrame, tau_valid: float,
               header: StreamHeader | None) -> float | None:
    ears = _pair_dist(frame, LandmarkId.EAR_LEFT, LandmarkId.EAR_RIGHT, tau_valid, header)
    left = _pair_dist(frame, LandmarkId.EYEBROW_LEFT, LandmarkId.MOUTH_LEFT, tau_valid, header)
    right = _pair_dist(frame, LandmarkId.EYEBROW_RIGHT, LandmarkId.MOUTH_RIGHT, tau_valid, header)
    terms = [t for t in (ears,
                         2.0 * left if left is not None else None,
                         2.0 * right if right is not None else None)
             if t is not None]
    return max(terms) if terms else None


def _hand_size(frame: KeypointFrame, tau_valid: float,
               header: StreamHeader | None) -> float | None:
    terms: list[float] = []
    for pinky, thumb, wrist, index in (
        (LandmarkId.PINKY_LEFT, LandmarkId.THUMB_LEFT, LandmarkId.WRIST_LEFT, LandmarkId.INDEX_LEFT),
        (LandmarkId.PINKY_RIGHT, LandmarkId.THUMB_RIGHT, LandmarkId.WRIST_RIGHT, LandmarkId.INDEX_RIGHT),
    ):
        for d in (_pair_dist(frame, pinky, thumb, tau_valid, header),
                  _pair_dist(frame, wrist, index, tau_valid, header)):
            if d is not None:
                terms.append(d)
    return max(terms) if terms else None


def head_size(frame: KeypointFrame, header: StreamHeader, tau_valid: float) -> float | None:
    """Head size in pixels: max of ear spread and doubled eyebrow-to-mouth
    distances over the pairs whose landmarks are both valid; None if none are.
    """
    return _head_size(frame, tau_valid, header)


def hand_size(frame: KeypointFrame, header: StreamHeader, tau_valid: float) -> float | None:
    """Hand size in pixels: max over both sides of pinky-thumb and
    wrist-index spreads; None when no pair is computable.
    """
    return _hand_size(frame, tau_valid, header)


def head_size_norm(frame: KeypointFrame, tau_valid: float) -> float | None:
    """head_size measured on normalized coordinates (relative-mode path)."""
    return _head_size(frame, tau_valid, None)


def hand_size_norm(frame: KeypointFrame, tau_valid: float) -> float | None:
    """hand_size measured on normalized coordinates (relative-mode path)."""
    return _hand_size(frame, tau_valid, None)


def aura_radii(
    mode: AuraMode,
    r_m_base: float,
    r_h_base: float,
    head: float | None,
    hand: float | None,
) -> tuple[float, float]:
    """Mouth and hand aura radii under the given mode.

    Fixed mode scales the base radii by s_r. Relative mode scales the
    measured body sizes by lambda, falling back to the fixed-mode value
    for whichever size is unavailable (an occluded head should not blind
    the detector). Units follow the caller's inputs.
    """
    if not (r_m_base > 0 and r_h_base > 0):
        raise ConfigError("base radii must be positive")
    fixed_m = mode.s_r * r_m_base
    fixed_h = mode.s_r * r_h_base
    if mode.variant == "fixed":
        return fixed_m, fixed_h
    r_m = mode.lambda_ * head if head is not None else fixed_m
    r_h = mode.lambda_ * hand if hand is not None else fixed_h
    return r_m, r_h
