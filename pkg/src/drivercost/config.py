"""Central typed pipeline configuration, loaded from flat key=value files.

Every field has a default; a config file and CLI flags only override.
``v_max=None`` means "cap follower speed at the leader's trip maximum"
(the default policy); a number fixes the cap.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path

from .errors import ConfigError, ValidationError

MAX_OF_LEADER = "max_of_leader"

# (key, parser, is_float_field) — the parser also defines the CLI flag type.
_INT_KEYS = {
    "lr_halve_every_epochs",
    "max_epochs",
    "rollout_samples_per_scenario",
    "rng_seed",
}
_FLOAT_KEYS = {
    "segment_len_th",
    "subsegment_len_tp",
    "sample_time_ts",
    "safe_gap_ds",
    "v_min",
    "lr_initial_eta",
    "grad_norm_tol",
    "accel_min",
    "accel_max",
}


@dataclass(frozen=True)
class PipelineConfig:
    segment_len_th: float = 3.0          # planning segment length T_H [s]
    subsegment_len_tp: float = 1.0       # planning subsegment length T_p [s]
    sample_time_ts: float = 0.1          # sample time T_s [s]
    safe_gap_ds: float = 5.0             # minimum safety clearance d_s [m]
    v_min: float = 0.0                   # follower speed lower bound [m/s]
    v_max: float | None = None           # None = leader trip maximum
    lr_initial_eta: float = 0.2          # initial NGD learning rate
    lr_halve_every_epochs: int = 5
    max_epochs: int = 100
    grad_norm_tol: float = 1e-2
    rollout_samples_per_scenario: int = 50
    rng_seed: int | None = None
    accel_min: float = -6.0              # planner actuator bounds [m/s^2]
    accel_max: float = 4.0

    def __post_init__(self):
        _validate(self)

    @property
    def subsegments_per_segment(self) -> int:
        """L = T_H / T_p."""
        return int(round(self.segment_len_th / self.subsegment_len_tp))

    @property
    def steps_per_subsegment(self) -> int:
        """Sample steps covering one subsegment (T_p / T_s)."""
        return int(round(self.subsegment_len_tp / self.sample_time_ts))

    @property
    def steps_per_segment(self) -> int:
        return self.subsegments_per_segment * self.steps_per_subsegment

    def learning_rate(self, epoch: int) -> float:
        """NGD learning rate for a 1-based epoch: eta0 halved every block."""
        if epoch < 1:
            raise ValueError(f"epoch must be >= 1, got {epoch}")
        return self.lr_initial_eta * 2.0 ** (-((epoch - 1) // self.lr_halve_every_epochs))


def _is_integer_multiple(a: float, b: float) -> bool:
    ratio = a / b
    return ratio >= 0.5 and abs(ratio - round(ratio)) < 1e-9


def _validate(cfg: PipelineConfig) -> None:
    if cfg.segment_len_th <= 0 or cfg.subsegment_len_tp <= 0 or cfg.sample_time_ts <= 0:
        raise ValidationError("segment_len_th, subsegment_len_tp and sample_time_ts must be positive")
    if not _is_integer_multiple(cfg.segment_len_th, cfg.subsegment_len_tp):
        raise ValidationError(
            f"segment_len_th={cfg.segment_len_th} is not a positive integer multiple "
            f"of subsegment_len_tp={cfg.subsegment_len_tp}"
        )
    if not _is_integer_multiple(cfg.subsegment_len_tp, cfg.sample_time_ts):
        raise ValidationError(
            f"subsegment_len_tp={cfg.subsegment_len_tp} is not a positive integer multiple "
            f"of sample_time_ts={cfg.sample_time_ts}"
        )
    if cfg.lr_initial_eta <= 0:
        raise ValidationError(f"lr_initial_eta must be > 0, got {cfg.lr_initial_eta}")
    if cfg.safe_gap_ds <= 0:
        raise ValidationError(f"safe_gap_ds must be > 0, got {cfg.safe_gap_ds}")
    if cfg.v_min < 0:
        raise ValidationError(f"v_min must be >= 0, got {cfg.v_min}")
    if cfg.v_max is not None and cfg.v_max <= cfg.v_min:
        raise ValidationError(f"v_max={cfg.v_max} must exceed v_min={cfg.v_min}")
    if cfg.lr_halve_every_epochs < 1 or cfg.max_epochs < 1:
        raise ValidationError("lr_halve_every_epochs and max_epochs must be >= 1")
    if cfg.grad_norm_tol <= 0:
        raise ValidationError(f"grad_norm_tol must be > 0, got {cfg.grad_norm_tol}")
    if cfg.rollout_samples_per_scenario < 1:
        raise ValidationError("rollout_samples_per_scenario must be >= 1")
    if cfg.accel_min >= cfg.accel_max:
        raise ValidationError(f"accel_min={cfg.accel_min} must be below accel_max={cfg.accel_max}")


def read_kv_file(path: str | Path) -> dict[str, str]:
    """Parse a flat ``key = value`` file. '#' lines and blanks are skipped."""
    out: dict[str, str] = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip()
        value = value.strip()
        if not key:
            raise ConfigError(f"{path}:{lineno}: empty key")
        if key in out:
            raise ConfigError(f"{path}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def parse_config_value(key: str, value: str):
    """Parse one config value by key; raises ConfigError naming the key."""
    try:
        if key == "v_max":
            if value == MAX_OF_LEADER:
                return None
            return float(value)
        if key == "rng_seed":
            return int(value)
        if key in _INT_KEYS:
            return int(value)
        if key in _FLOAT_KEYS:
            return float(value)
    except ValueError as exc:
        raise ConfigError(f"bad value for config key {key!r}: {value!r} ({exc})") from None
    raise ConfigError(f"unknown configuration key: {key!r}")


def build_config(overrides: dict) -> PipelineConfig:
    known = {f.name for f in fields(PipelineConfig)}
    for key in overrides:
        if key not in known:
            raise ConfigError(f"unknown configuration key: {key!r}")
    return PipelineConfig(**overrides)


def load_config(path: str | Path, overrides: dict | None = None) -> PipelineConfig:
    """Load a config file; unset keys fall back to defaults, overrides win.

    ``overrides`` maps field names to already-parsed values (CLI flags).
    """
    raw = read_kv_file(path)
    parsed = {key: parse_config_value(key, value) for key, value in raw.items()}
    if overrides:
        parsed.update(overrides)
    return build_config(parsed)
