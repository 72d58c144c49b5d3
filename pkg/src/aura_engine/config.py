"""Engine configuration: one flat key-value document for every threshold.

The file uses `key = value` lines with `#` comments. Keys are exactly the
calibrated parameter names (tau_base, r_m, r_h, alpha, beta, tau_score,
tau_duration, tau_speed, tau_valid, w) plus the mode keys (aura_mode,
lambda, s_r). Unknown keys are hard errors: a typo in a safety threshold
must not silently fall back to a default.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace

from .agitation import AgitationParams
from .collision import CollisionParams
from .errors import ConfigError
from .geometry import AuraMode

DEFAULT_BOOTSTRAP_B = 1000
DEFAULT_SEED = 0

_FLOAT_KEYS = {
    "tau_base",
    "r_m",
    "r_h",
    "alpha",
    "beta",
    "tau_score",
    "tau_duration",
    "tau_speed",
    "tau_valid",
    "lambda",
    "s_r",
}
_INT_KEYS = {"w"}
_STR_KEYS = {"aura_mode"}
CONFIG_KEYS = _FLOAT_KEYS | _INT_KEYS | _STR_KEYS


@dataclass(frozen=True)
class EngineConfig:
    """All detector parameters plus evaluation settings."""

    collision: CollisionParams = field(default_factory=CollisionParams)
    agitation: AgitationParams = field(default_factory=AgitationParams)
    bootstrap_b: int = DEFAULT_BOOTSTRAP_B
    seed: int = DEFAULT_SEED

    @property
    def mode(self) -> AuraMode:
        return self.collision.mode

    def with_overrides(
        self,
        *,
        aura_mode: str | None = None,
        lambda_: float | None = None,
        s_r: float | None = None,
        tau_speed: float | None = None,
        tau_valid: float | None = None,
        bootstrap_b: int | None = None,
        seed: int | None = None,
    ) -> "EngineConfig":
        """New config with selected fields replaced (CLI flag overlay)."""
        mode = self.collision.mode
        mode = replace(
            mode,
            variant=aura_mode if aura_mode is not None else mode.variant,
            lambda_=lambda_ if lambda_ is not None else mode.lambda_,
            s_r=s_r if s_r is not None else mode.s_r,
        )
        collision = replace(
            self.collision,
            mode=mode,
            tau_valid=tau_valid if tau_valid is not None else self.collision.tau_valid,
        )
        agitation = replace(
            self.agitation,
            tau_speed=tau_speed if tau_speed is not None else self.agitation.tau_speed,
            tau_valid=tau_valid if tau_valid is not None else self.agitation.tau_valid,
        )
        return EngineConfig(
            collision,
            agitation,
            bootstrap_b if bootstrap_b is not None else self.bootstrap_b,
            seed if seed is not None else self.seed,
        )


def parse_config(text: str) -> EngineConfig:
    """Parse the flat key-value config document into an EngineConfig."""
    values: dict[str, object] = {}
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"config line {line_no}: expected 'key = value', got {raw!r}")
        key, _, value = (part.strip() for part in line.partition("="))
        if key not in CONFIG_KEYS:
            raise ConfigError(f"config line {line_no}: unknown key {key!r}")
        if key in values:
            raise ConfigError(f"config line {line_no}: duplicate key {key!r}")
        if key in _FLOAT_KEYS:
            try:
                values[key] = float(value)
            except ValueError:
                raise ConfigError(f"config line {line_no}: {key} must be a number") from None
        elif key in _INT_KEYS:
            try:
                values[key] = int(value)
            except ValueError:
                raise ConfigError(f"config line {line_no}: {key} must be an integer") from None
        else:
            values[key] = value

    defaults = EngineConfig()
    mode = AuraMode(
        variant=str(values.get("aura_mode", defaults.mode.variant)),  # type: ignore[arg-type]
        lambda_=float(values.get("lambda", defaults.mode.lambda_)),  # type: ignore[arg-type]
        s_r=float(values.get("s_r", defaults.mode.s_r)),  # type: ignore[arg-type]
    )
    collision = CollisionParams(
        tau_base=float(values.get("tau_base", defaults.collision.tau_base)),  # type: ignore[arg-type]
        alpha=float(values.get("alpha", defaults.collision.alpha)),  # type: ignore[arg-type]
        beta=float(values.get("beta", defaults.collision.beta)),  # type: ignore[arg-type]
        tau_score=float(values.get("tau_score", defaults.collision.tau_score)),  # type: ignore[arg-type]
        tau_duration=float(values.get("tau_duration", defaults.collision.tau_duration)),  # type: ignore[arg-type]
        tau_valid=float(values.get("tau_valid", defaults.collision.tau_valid)),  # type: ignore[arg-type]
        mode=mode,
        r_m_base=float(values.get("r_m", defaults.collision.r_m_base)),  # type: ignore[arg-type]
        r_h_base=float(values.get("r_h", defaults.collision.r_h_base)),  # type: ignore[arg-type]
    )
    agitation = AgitationParams(
        tau_speed=float(values.get("tau_speed", defaults.agitation.tau_speed)),  # type: ignore[arg-type]
        w=int(values.get("w", defaults.agitation.w)),  # type: ignore[arg-type]
        tau_valid=float(values.get("tau_valid", defaults.agitation.tau_valid)),  # type: ignore[arg-type]
    )
    return EngineConfig(collision, agitation)


def load_config(path) -> EngineConfig:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_config(fh.read())


def render_config(config: EngineConfig) -> str:
    """Serialize a config back into the flat document format."""
    c, a, m = config.collision, config.agitation, config.mode
    lines = [
        f"tau_base = {c.tau_base}",
        f"r_m = {c.r_m_base}",
        f"r_h = {c.r_h_base}",
        f"alpha = {c.alpha}",
        f"beta = {c.beta}",
        f"tau_score = {c.tau_score}",
        f"tau_duration = {c.tau_duration}",
        f"tau_speed = {a.tau_speed}",
        f"tau_valid = {c.tau_valid}",
        f"w = {a.w}",
        f"aura_mode = {m.variant}",
        f"lambda = {m.lambda_}",
        f"s_r = {m.s_r}",
    ]
    return "\n".join(lines) + "\n"
