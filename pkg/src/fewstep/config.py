"""Resolved experiment configuration shared by the command-line entry points.

Resolution order is package defaults, then a JSON config file, then explicit
command-line flags, so flags always win. The resolved form is a flat mapping
that round-trips through JSON unchanged.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from .guidance import GUIDANCE_MODES
from .postprocess import CLIP_METHODS
from .sampling import CLIP_TIMING, SAMPLER_VARIANTS
from .schedules import SCHEDULE_KINDS

__all__ = ["ConfigError", "ExperimentConfig", "CLIP_ORDERS"]

CLIP_ORDERS = ("balance-first", "tanh-first")


class ConfigError(ValueError):
    """Invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class ExperimentConfig:
    """Every knob of a schedule/sample/compare run, with sensible defaults."""

    schedule_kind: str = "linear"
    num_train_steps: int = 1000
    beta_start: float = 1e-4
    beta_end: float = 0.02
    importance_epsilon: float = 1e-8
    steps: int = 8
    theta: float = 0.7
    variant: str = "gamma_i"
    gamma: float = 0.2
    cfg_mode: str = "none"
    cfg_scale: float = 7.5
    distill_omega: Optional[float] = None
    condition: Optional[int] = None
    negative_condition: Optional[int] = None
    clip_method: str = "none"
    clip_alpha: float = 0.5
    clip_beta: float = 0.5
    clip_order: str = "balance-first"
    clip_timing: str = "every-step"
    quantile_q: float = 0.995
    quantile_ceiling: float = 1.0
    mixture: str = "bimodal-1d"
    batch: int = 512
    seed: int = 0
    directions: int = 32

    def __post_init__(self):
        checks = (
            (self.schedule_kind in SCHEDULE_KINDS, f"schedule_kind must be one of {SCHEDULE_KINDS}"),
            (self.num_train_steps >= 3, "num_train_steps must be at least 3"),
            (0.0 < self.beta_start <= self.beta_end < 1.0, "beta range must satisfy 0 < start <= end < 1"),
            (self.importance_epsilon > 0.0, "importance_epsilon must be positive"),
            (self.steps >= 2, "steps must be at least 2"),
            (0.0 <= self.theta <= 1.0, "theta must lie in [0, 1]"),
            (self.variant in SAMPLER_VARIANTS, f"variant must be one of {SAMPLER_VARIANTS}"),
            (0.0 <= self.gamma < 1.0, "gamma must lie in [0, 1)"),
            (self.cfg_mode in GUIDANCE_MODES, f"cfg_mode must be one of {GUIDANCE_MODES}"),
            (self.cfg_scale >= 0.0, "cfg_scale must be non-negative"),
            (self.distill_omega is None or self.distill_omega >= 0.0, "distill_omega must be non-negative"),
            (self.clip_method in CLIP_METHODS, f"clip_method must be one of {CLIP_METHODS}"),
            (self.clip_order in CLIP_ORDERS, f"clip_order must be one of {CLIP_ORDERS}"),
            (self.clip_timing in CLIP_TIMING, f"clip_timing must be one of {CLIP_TIMING}"),
            (0.0 < self.quantile_q <= 1.0, "quantile_q must lie in (0, 1]"),
            (self.quantile_ceiling >= 1.0, "quantile_ceiling must be at least 1"),
            (self.batch >= 1, "batch must be at least 1"),
            (self.directions >= 8, "directions must be at least 8"),
        )
        for ok, message in checks:
            if not ok:
                raise ConfigError(message)

    @classmethod
    def field_names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in dataclasses.fields(cls))

    @classmethod
    def from_mapping(cls, mapping: dict) -> "ExperimentConfig":
        unknown = sorted(set(mapping) - set(cls.field_names()))
        if unknown:
            raise ConfigError(f"unknown config keys: {unknown}")
        try:
            return cls(**mapping)
        except TypeError as exc:
            raise ConfigError(str(exc)) from None

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentConfig":
        return cls.from_mapping(load_config_mapping(path))

    def with_overrides(self, overrides: dict) -> "ExperimentConfig":
        return self.from_mapping({**self.to_dict(), **overrides})

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2) + "\n"


def load_config_mapping(path: str | Path) -> dict:
    """Parse a JSON config file into a plain mapping, without validation."""
    path = Path(path)
    try:
        parsed = json.loads(path.read_text())
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path} is not valid JSON: {exc}") from None
    if not isinstance(parsed, dict):
        raise ConfigError(f"config file {path} must hold a JSON object")
    return parsed
