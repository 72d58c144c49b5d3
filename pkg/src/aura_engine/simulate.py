"""Deterministic synthetic keypoint streams with known ground-truth labels.

Each scenario scripts piecewise-linear landmark motion over a supine
patient layout, then adds bounded-uniform coordinate noise. Because the
noise is bounded, every generated stream carries a worst-case guarantee,
checked at construction time: the scripted geometry clears (or avoids)
each detector threshold by at least the requested margin, with slack for
a +/-10 percent perturbation of tau_speed, tau_valid, and s_r. A margin
and noise amplitude that cannot honor the guarantee raise
ConstructionError instead of silently producing unreliable labels.

Scenario kinds:

* calm:            static pose, nothing fires
* reach:           one hand travels into the mouth aura and dwells
* restless:        whole-body oscillation above the speed threshold
* reach_then_calm: a reach that also releases before stream end
* staff_noise:     a burst of sub-threshold-visibility landmarks at the
                    mouth; exercises the visibility gate
"""
from __future__ import annotations

import math
import random
from dataclasses import dataclass
from functools import lru_cache

from .agitation import AgitationParams
from .collision import CollisionParams
from .errors import ConstructionError
from .streams import KeypointFrame, KeypointStream, Landmark, LandmarkId, StreamHeader

KINDS = ("calm", "reach", "restless", "reach_then_calm", "staff_noise")

#: Scenario mix mirroring the evaluation label prevalence
#: (24/63 collision-positive, 23/63 agitation-positive).
PAPER_MIX: dict[str, float] = {
    "reach": 12 / 63,
    "reach_then_calm": 12 / 63,
    "restless": 23 / 63,
    "calm": 10 / 63,
    "staff_noise": 6 / 63,
}

DEFAULT_WIDTH = 1280
DEFAULT_HEIGHT = 720

_VIS_HIGH = 0.95  # valid under every gate in the +/-10% envelope
_GRID = 1.1  # grid perturbation envelope
_LAMBDA = 2.0  # relative-mode scaling checked by the guard

# Supine patient, head toward the top of the frame, hands resting at the
# sides. Normalized coordinates (x right, y down, z toward camera scale).
_BASE_POSE: dict[LandmarkId, tuple[float, float, float]] = {
    LandmarkId.MOUTH_LEFT: (0.49, 0.30, 0.0),
    LandmarkId.MOUTH_RIGHT: (0.51, 0.30, 0.0),
    LandmarkId.EAR_LEFT: (0.45, 0.28, 0.0),
    LandmarkId.EAR_RIGHT: (0.55, 0.28, 0.0),
    LandmarkId.EYEBROW_LEFT: (0.47, 0.26, 0.0),
    LandmarkId.EYEBROW_RIGHT: (0.53, 0.26, 0.0),
    LandmarkId.SHOULDER_LEFT: (0.40, 0.42, 0.0),
    LandmarkId.SHOULDER_RIGHT: (0.60, 0.42, 0.0),
    LandmarkId.ELBOW_LEFT: (0.34, 0.60, 0.05),
    LandmarkId.ELBOW_RIGHT: (0.66, 0.60, 0.05),
    LandmarkId.HIP_LEFT: (0.44, 0.62, 0.0),
    LandmarkId.HIP_RIGHT: (0.56, 0.62, 0.0),
    LandmarkId.KNEE_LEFT: (0.43, 0.80, 0.0),
    LandmarkId.KNEE_RIGHT: (0.57, 0.80, 0.0),
    LandmarkId.ANKLE_LEFT: (0.42, 0.93, 0.0),
    LandmarkId.ANKLE_RIGHT: (0.58, 0.93, 0.0),
}

_WRIST_REST = {
    "left": (0.22, 0.84, 0.20),
    "right": (0.78, 0.84, 0.20),
}

# Finger landmarks ride rigidly on the wrist.
_HAND_OFFSETS: dict[str, dict[LandmarkId, tuple[float, float]]] = {
    "left": {
        LandmarkId.WRIST_LEFT: (0.0, 0.0),
        LandmarkId.THUMB_LEFT: (-0.020, -0.020),
        LandmarkId.INDEX_LEFT: (-0.035, -0.010),
        LandmarkId.PINKY_LEFT: (0.030, -0.015),
    },
    "right": {
        LandmarkId.WRIST_RIGHT: (0.0, 0.0),
        LandmarkId.THUMB_RIGHT: (0.020, -0.020),
        LandmarkId.INDEX_RIGHT: (0.035, -0.010),
        LandmarkId.PINKY_RIGHT: (0.030, -0.015),
    },
}


@dataclass(frozen=True)
class Scenario:
    kind: str
    duration_s: float = 6.0
    fps: float = 25.0
    seed: int = 0
    noise_amplitude: float = 5e-5
    margin: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ConstructionError(f"unknown scenario kind {self.kind!r}")
        if not self.duration_s > 0:
            raise ConstructionError("duration_s must be positive")
        if not self.fps > 0:
            raise ConstructionError("fps must be positive")
        if self.margin < 1:
            raise ConstructionError("margin must be >= 1")
        if self.noise_amplitude < 0:
            raise ConstructionError("noise_amplitude must be non-negative")

    @property
    def video_id(self) -> str:
        return f"{self.kind}-seed{self.seed}"


# One scripted landmark sample: position plus visibility.
_Sample = tuple[float, float, float, float]
_Script = list[dict[LandmarkId, _Sample]]


def _mouth_center() -> tuple[float, float, float]:
    ml = _BASE_POSE[LandmarkId.MOUTH_LEFT]
    mr = _BASE_POSE[LandmarkId.MOUTH_RIGHT]
    return tuple((a + b) / 2 for a, b in zip(ml, mr))  # type: ignore[return-value]


def _hand_center_offset(side: str) -> tuple[float, float]:
    offs = list(_HAND_OFFSETS[side].values())
    return (sum(o[0] for o in offs) / len(offs), sum(o[1] for o in offs) / len(offs))


def _lerp(a: tuple[float, float, float], b: tuple[float, float, float], u: float):
    return tuple(av + (bv - av) * u for av, bv in zip(a, b))


def _wrist_path(kind: str, scenario: Scenario) -> list[tuple[float, tuple[float, float, float]]]:
    """Waypoints (time, wrist position) for the moving right wrist."""
    mc = _mouth_center()
    off = _hand_center_offset("right")
    target = (mc[0] - off[0], mc[1] - off[1], 0.0)
    rest = _WRIST_REST["right"]
    dur = scenario.duration_s
    dwell = scenario.margin * CollisionParams().tau_duration + 3.0 / scenario.fps
    if kind == "reach":
        pre = min(1.0, dur / 6)
        if dur - pre - dwell <= 0.5:
            raise ConstructionError(
                f"duration {dur}s too short for a reach with margin {scenario.margin}"
            )
        return [(0.0, rest), (pre, rest), (dur - dwell, target), (dur, target)]
    assert kind == "reach_then_calm"
    pre = min(0.6, dur / 10)
    post = min(1.0, dur / 6)
    travel = (dur - pre - dwell - post) / 2
    if travel <= 0.25:
        raise ConstructionError(
            f"duration {dur}s too short for reach_then_calm with margin {scenario.margin}"
        )
    return [
        (0.0, rest),
        (pre, rest),
        (pre + travel, target),
        (pre + travel + dwell, target),
        (pre + 2 * travel + dwell, rest),
        (dur, rest),
    ]


def _position_on_path(path, t: float) -> tuple[float, float, float]:
    for (t0, p0), (t1, p1) in zip(path, path[1:]):
        if t <= t1:
            if t1 == t0:
                return p1
            return _lerp(p0, p1, max(0.0, (t - t0) / (t1 - t0)))  # type: ignore[return-value]
    return path[-1][1]


def _script_frames(scenario: Scenario) -> _Script:
    """Noiseless landmark script, one dict per frame."""
    n_frames = int(round(scenario.duration_s * scenario.fps))
    fps = scenario.fps
    agit = AgitationParams()

    path = (
        _wrist_path(scenario.kind, scenario)
        if scenario.kind in ("reach", "reach_then_calm")
        else None
    )
    # Restless whole-body sway: square-wave x offset, one flip per frame.
    sway_step = 1.25 * scenario.margin * agit.tau_speed / fps
    # Staff burst: low-visibility hand landmarks held at the mouth long
    # enough that a broken visibility gate would confirm a collision.
    burst_len = scenario.margin * CollisionParams().tau_duration + 2.0 / fps
    burst_start = min(2.0, scenario.duration_s / 3)
    burst_vis = 0.9 * agit.tau_valid / (2.0 * scenario.margin)

    frames: _Script = []
    for i in range(n_frames):
        t = i / fps
        sway = 0.0
        if scenario.kind == "restless":
            sway = (sway_step / 2) if i % 2 == 0 else (-sway_step / 2)

        sample: dict[LandmarkId, _Sample] = {}
        for lid, (x, y, z) in _BASE_POSE.items():
            sample[lid] = (x + sway, y, z, _VIS_HIGH)

        for side in ("left", "right"):
            wrist = _WRIST_REST[side]
            vis = _VIS_HIGH
            if side == "right":
                if path is not None:
                    wrist = _position_on_path(path, t)
                elif scenario.kind == "staff_noise" and burst_start <= t < burst_start + burst_len:
                    mc = _mouth_center()
                    off = _hand_center_offset("right")
                    wrist = (mc[0] - off[0], mc[1] - off[1], 0.0)
                    vis = burst_vis
            for lid, (dx, dy) in _HAND_OFFSETS[side].items():
                sample[lid] = (wrist[0] + dx + sway, wrist[1] + dy, wrist[2], vis)
        frames.append(sample)
    return frames


def _expected_labels(kind: str) -> tuple[bool, bool]:
    return {
        "calm": (False, False),
        "reach": (True, False),
        "restless": (False, True),
        "reach_then_calm": (True, False),
        "staff_noise": (False, False),
    }[kind]


# ----------------------------------------------------------------------
# Construction-time worst-case guard
# ----------------------------------------------------------------------

def _valid(sample: _Sample) -> bool:
    # Visibilities must stay clear of the +/-10% tau_valid band so the
    # gate decision is identical across the whole grid envelope.
    return sample[3] >= 0.8


def _center(sample_map, lids) -> tuple[float, float, float] | None:
    pts = [sample_map[lid][:3] for lid in lids if lid in sample_map and _valid(sample_map[lid])]
    if not pts:
        return None
    n = len(pts)
    return (
        sum(p[0] for p in pts) / n,
        sum(p[1] for p in pts) / n,
        sum(p[2] for p in pts) / n,
    )


def _guard_velocities(frames: _Script, fps: float) -> tuple[float, float]:
    """(max, min) per-transition aggregate velocity of the noiseless script."""
    vmax, vmin = 0.0, math.inf
    for prev, curr in zip(frames, frames[1:]):
        vels = []
        for lid, cs in curr.items():
            ps = prev.get(lid)
            if ps is None or not (_valid(ps) and _valid(cs)):
                continue
            d = math.dist(ps[:3], cs[:3])
            vels.append(d * fps)
        if vels:
            agg = sum(vels) / len(vels)
            vmax = max(vmax, agg)
            vmin = min(vmin, agg)
    if vmin is math.inf:
        vmin = 0.0
    return vmax, vmin


def _frame_scores_bounds(frames: _Script, scenario: Scenario) -> tuple[list[float], list[float]]:
    """Per frame, worst-case collision score bounds over the noise bound,
    both aura modes, and the grid envelope.

    lows[i]  = the best hand's guaranteed (lowest possible) score, a
               floor on what the detector will see for that hand;
    highs[i] = the highest score any hand could possibly reach.
    """
    cp = CollisionParams()
    a = scenario.noise_amplitude
    slack2 = 2 * a * math.sqrt(2)
    slack3 = 2 * a * math.sqrt(3)
    slack_px = 2 * a * math.hypot(DEFAULT_WIDTH, DEFAULT_HEIGHT)
    slack_size = 4 * a * math.sqrt(2)
    lam = _LAMBDA

    mouth_lids = (LandmarkId.MOUTH_LEFT, LandmarkId.MOUTH_RIGHT)
    lows, highs = [], []
    for sample in frames:
        mouth = _center(sample, mouth_lids)
        head = _size(sample, _HEAD_PAIRS)
        hand = _size(sample, _HAND_PAIRS)
        frame_low, frame_high = 0.0, 0.0
        for side in ("left", "right"):
            lids = tuple(_HAND_OFFSETS[side])
            wrist_ok = _valid(sample[lids[0]])
            hand_c = _center(sample, lids) if wrist_ok else None
            if mouth is None or hand_c is None:
                continue  # this hand scores exactly 0
            d2n = math.dist(mouth[:2], hand_c[:2])
            d3 = math.dist(mouth, hand_c)
            d2px = math.hypot(
                (mouth[0] - hand_c[0]) * DEFAULT_WIDTH,
                (mouth[1] - hand_c[1]) * DEFAULT_HEIGHT,
            )
            radii = [
                ("px", (1 / _GRID) * cp.mode.s_r * (cp.r_m_base + cp.r_h_base)),
                ("px", _GRID * cp.mode.s_r * (cp.r_m_base + cp.r_h_base)),
            ]
            if head is not None and hand is not None:
                radii.append(("norm", lam * (head + hand - 2 * slack_size)))
                radii.append(("norm", lam * (head + hand + 2 * slack_size)))
            side_low, side_high = math.inf, 0.0
            for space, r_sum in radii:
                if space == "px":
                    o_low = max(0.0, 1.0 - (d2px + slack_px * 3) / r_sum)
                    o_high = max(0.0, 1.0 - max(0.0, d2px - slack_px * 3) / r_sum)
                else:
                    o_low = max(0.0, 1.0 - (d2n + slack2 * 3) / r_sum)
                    o_high = max(0.0, 1.0 - max(0.0, d2n - slack2 * 3) / r_sum)
                p_low = max(0.0, 1.0 - (d3 + slack3 * 3) / cp.tau_base)
                p_high = max(0.0, 1.0 - max(0.0, d3 - slack3 * 3) / cp.tau_base)
                side_low = min(side_low, cp.alpha * o_low + cp.beta * p_low)
                side_high = max(side_high, cp.alpha * o_high + cp.beta * p_high)
            frame_low = max(frame_low, side_low)
            frame_high = max(frame_high, side_high)
        lows.append(frame_low)
        highs.append(frame_high)
    return lows, highs


_HEAD_PAIRS = (
    (LandmarkId.EAR_LEFT, LandmarkId.EAR_RIGHT, 1.0),
    (LandmarkId.EYEBROW_LEFT, LandmarkId.MOUTH_LEFT, 2.0),
    (LandmarkId.EYEBROW_RIGHT, LandmarkId.MOUTH_RIGHT, 2.0),
)
_HAND_PAIRS = (
    (LandmarkId.PINKY_LEFT, LandmarkId.THUMB_LEFT, 1.0),
    (LandmarkId.WRIST_LEFT, LandmarkId.INDEX_LEFT, 1.0),
    (LandmarkId.PINKY_RIGHT, LandmarkId.THUMB_RIGHT, 1.0),
    (LandmarkId.WRIST_RIGHT, LandmarkId.INDEX_RIGHT, 1.0),
)


def _size(sample, pairs) -> float | None:
    terms = []
    for a, b, k in pairs:
        sa, sb = sample.get(a), sample.get(b)
        if sa is None or sb is None or not (_valid(sa) and _valid(sb)):
            continue
        terms.append(k * math.dist(sa[:2], sb[:2]))
    return max(terms) if terms else None


def _verify_margins(frames: _Script, scenario: Scenario) -> None:
    """Prove the intended labels hold in the worst case, or refuse."""
    expected_collision, expected_agitation = _expected_labels(scenario.kind)
    cp, ap = CollisionParams(), AgitationParams()
    m = scenario.margin
    noise_v = 2 * math.sqrt(3) * scenario.noise_amplitude * scenario.fps

    vmax, vmin = _guard_velocities(frames, scenario.fps)
    if expected_agitation:
        need = _GRID * m * ap.tau_speed
        if vmin - noise_v < need:
            raise ConstructionError(
                f"agitation margin unsatisfiable: worst-case velocity "
                f"{vmin - noise_v:.4f} < required {need:.4f}"
            )
    else:
        limit = ap.tau_speed / (_GRID * m)
        if vmax + noise_v > limit:
            raise ConstructionError(
                f"stillness margin unsatisfiable: worst-case velocity "
                f"{vmax + noise_v:.4f} > limit {limit:.4f}"
            )

    lows, highs = _frame_scores_bounds(frames, scenario)
    if expected_collision:
        need_score = max(m * cp.tau_score, cp.tau_score + 0.05)
        need_run = m * cp.tau_duration
        best_run = 0.0
        run_start = None
        for i, low in enumerate(lows):
            t = i / scenario.fps
            if low >= need_score:
                if run_start is None:
                    run_start = t
                best_run = max(best_run, t - run_start)
            else:
                run_start = None
        if best_run <= need_run:
            raise ConstructionError(
                f"collision margin unsatisfiable: longest guaranteed risk run "
                f"{best_run:.2f}s <= required {need_run:.2f}s (score floor {need_score:.2f})"
            )
    else:
        limit = cp.tau_score / (_GRID * m)
        worst = max(highs) if highs else 0.0
        if worst > limit:
            raise ConstructionError(
                f"collision-free margin unsatisfiable: worst-case score "
                f"{worst:.4f} > limit {limit:.4f}"
            )


# ----------------------------------------------------------------------
# Generation
# ----------------------------------------------------------------------

@lru_cache(maxsize=64)
def _verified_script(
    kind: str, duration_s: float, fps: float, margin: float, noise_amplitude: float
) -> _Script:
    """Noiseless script with its margin guarantee checked.

    The script and the guard are seed-independent, so they are cached:
    generating many seeds of the same scenario shape verifies once.
    """
    scenario = Scenario(kind, duration_s, fps, 0, noise_amplitude, margin)
    frames = _script_frames(scenario)
    _verify_margins(frames, scenario)
    return frames


def generate(scenario: Scenario) -> tuple[KeypointStream, bool, bool]:
    """Build the stream for a scenario and return it with its labels."""
    frames_script = _verified_script(
        scenario.kind,
        scenario.duration_s,
        scenario.fps,
        scenario.margin,
        scenario.noise_amplitude,
    )

    rng = random.Random(scenario.seed)
    uniform = rng.uniform
    a = scenario.noise_amplitude
    frames = []
    for i, sample in enumerate(frames_script):
        landmarks = {
            lid: Landmark(x + uniform(-a, a), y + uniform(-a, a), z + uniform(-a, a), vis)
            for lid, (x, y, z, vis) in sample.items()
        }
        frames.append(KeypointFrame(i, i / scenario.fps, landmarks))

    header = StreamHeader(scenario.video_id, scenario.fps, DEFAULT_WIDTH, DEFAULT_HEIGHT)
    expected_collision, expected_agitation = _expected_labels(scenario.kind)
    return KeypointStream(header, tuple(frames)), expected_collision, expected_agitation


def label_set(
    n: int, mix: dict[str, float] | None = None, seed: int = 0
) -> list[tuple[Scenario, tuple[bool, bool]]]:
    """Deterministic scenario roster with the given kind proportions.

    Counts come from largest-remainder rounding so they always sum to n;
    the roster order is a seeded shuffle. Scenario seeds derive from the
    roster seed and position, so the whole set regenerates bit-identically.
    """
    if n < 0:
        raise ValueError("n must be non-negative")
    mix = dict(mix) if mix is not None else dict(PAPER_MIX)
    unknown = set(mix) - set(KINDS)
    if unknown:
        raise ValueError(f"unknown scenario kinds in mix: {sorted(unknown)}")
    total = sum(mix.values())
    if abs(total - 1.0) > 1e-9:
        raise ValueError(f"mix proportions must sum to 1, got {total}")

    quotas = {kind: n * p for kind, p in mix.items()}
    counts = {kind: math.floor(q) for kind, q in quotas.items()}
    shortfall = n - sum(counts.values())
    by_remainder = sorted(mix, key=lambda k: (-(quotas[k] - counts[k]), k))
    for kind in by_remainder[:shortfall]:
        counts[kind] += 1

    kinds = [kind for kind in KINDS for _ in range(counts.get(kind, 0))]
    random.Random(seed).shuffle(kinds)
    roster = []
    for i, kind in enumerate(kinds):
        scenario = Scenario(kind=kind, seed=seed * 100003 + i)
        roster.append((scenario, _expected_labels(kind)))
    return roster
