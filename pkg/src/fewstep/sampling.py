"""Few-step reverse samplers over a timestep schedule.

Three variants share one loop. ``plain`` steps deterministically from anchor
to anchor. ``gamma`` denoises past each anchor to ``round((1 - gamma) * t)``
and re-noises back up, trading determinism for fresh noise. ``gamma_i`` does
the same except that transitions into importance-selected anchors denoise to
``round(I_t * t)`` instead, reading ``I`` from the curve bound to the
schedule. The final transition always lands on the data axis without
re-noising, so the terminal output is a clean-state estimate.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np

from .guidance import GuidanceConfig
from .importance import schedule_fingerprint
from .schedules import NoiseSchedule
from .seeding import STREAM_RENOISE, stream
from .timesteps import IMPORTANCE, TimestepSchedule

__all__ = [
    "SAMPLER_VARIANTS",
    "CLIP_TIMING",
    "NumericalError",
    "SamplerConfig",
    "SampleTrajectory",
    "denoise_step",
    "noisify",
    "run_sampler",
]

SAMPLER_VARIANTS = ("plain", "gamma", "gamma_i")
CLIP_TIMING = ("every-step", "final-only")


class NumericalError(RuntimeError):
    """Raised when a sampler state or prediction stops being finite."""


@dataclass(frozen=True)
class SamplerConfig:
    """Sampler variant, randomness proportion, and clean-state postprocessing.

    ``clip`` is a vectorized map applied to every intermediate clean-state
    estimate when ``postprocess_enabled`` (or only to the terminal one with
    ``clip_timing="final-only"``); build one with :func:`fewstep.batch_clip`.
    """

    variant: str = "plain"
    gamma: float = 0.2
    guidance: GuidanceConfig = field(default_factory=GuidanceConfig)
    postprocess_enabled: bool = False
    clip: Optional[Callable[[np.ndarray], np.ndarray]] = None
    clip_timing: str = "every-step"
    rng_seed: int = 0

    def __post_init__(self):
        if self.variant not in SAMPLER_VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}, expected one of {SAMPLER_VARIANTS}")
        if not 0.0 <= self.gamma < 1.0:
            raise ValueError(f"gamma must lie in [0, 1), got {self.gamma}")
        if self.clip_timing not in CLIP_TIMING:
            raise ValueError(f"clip_timing must be one of {CLIP_TIMING}, got {self.clip_timing!r}")
        if self.postprocess_enabled and self.clip is None:
            raise ValueError("postprocess_enabled requires a clip callable")


@dataclass
class SampleTrajectory:
    """States visited while sampling plus the terminal clean-state estimate.

    ``states`` lists ``(timestep, state)`` pairs in visit order, including the
    intermediate denoise targets of the gamma variants; ``final`` has no
    timestep, it lives on the data axis.
    """

    states: List[Tuple[int, np.ndarray]]
    final: np.ndarray


def _predict_clean(
    eps_model, schedule: NoiseSchedule, x: np.ndarray, t_from: int
) -> Tuple[np.ndarray, np.ndarray]:
    eps = np.asarray(eps_model(x, t_from), dtype=np.float64)
    if eps.shape != x.shape:
        raise ValueError(f"eps model returned shape {eps.shape} for state shape {x.shape}")
    if not np.all(np.isfinite(eps)):
        raise NumericalError(f"non-finite noise prediction at timestep {t_from}")
    ab = schedule.alpha_bar_at(t_from)
    return (x - np.sqrt(1.0 - ab) * eps) / np.sqrt(ab), eps


def _denoise(
    eps_model,
    schedule: NoiseSchedule,
    x: np.ndarray,
    t_from: int,
    t_to: Optional[int],
    clip: Optional[Callable[[np.ndarray], np.ndarray]] = None,
) -> np.ndarray:
    x0_hat, eps = _predict_clean(eps_model, schedule, x, t_from)
    if clip is not None:
        x0_hat = clip(x0_hat)
    if t_to is None:
        return x0_hat
    ab_to = schedule.alpha_bar_at(t_to)
    return np.sqrt(ab_to) * x0_hat + np.sqrt(1.0 - ab_to) * eps


def denoise_step(
    eps_model,
    schedule: NoiseSchedule,
    x: np.ndarray,
    t_from: int,
    t_to: Optional[int],
) -> np.ndarray:
    """Deterministic solver step from ``t_from`` down to ``t_to``.

    Forms the clean-state estimate ``(x - sqrt(1 - ab_from) * eps) / sqrt(ab_from)``
    and re-attaches the same predicted noise at the target level. ``t_to=None``
    targets the data axis and returns the clean-state estimate itself;
    ``t_to == t_from`` is the identity.
    """
    x = np.asarray(x, dtype=np.float64)
    if t_to is not None:
        t_to = schedule._check_t(t_to)
        if t_to == t_from:
            return x
        if t_to > t_from:
            raise ValueError(f"denoise must move down in time, got {t_from} -> {t_to}")
    return _denoise(eps_model, schedule, x, schedule._check_t(t_from), t_to)


def noisify(
    schedule: NoiseSchedule,
    x: np.ndarray,
    t_from: int,
    t_to: int,
    noise: np.ndarray,
) -> np.ndarray:
    """Forward kernel from ``t_from`` up to ``t_to``, preserving marginals.

    ``x_to = sqrt(ab_to / ab_from) * x + sqrt(1 - ab_to / ab_from) * noise``;
    ``t_to == t_from`` is the identity and draws nothing from ``noise``.
    """
    x = np.asarray(x, dtype=np.float64)
    t_from = schedule._check_t(t_from)
    t_to = schedule._check_t(t_to)
    if t_to == t_from:
        return x
    if t_to < t_from:
        raise ValueError(f"noisify must move up in time, got {t_from} -> {t_to}")
    noise = np.asarray(noise, dtype=np.float64)
    if noise.shape != x.shape:
        raise ValueError(f"noise shape {noise.shape} does not match state shape {x.shape}")
    ratio = schedule.alpha_bar_at(t_to) / schedule.alpha_bar_at(t_from)
    return np.sqrt(ratio) * x + np.sqrt(1.0 - ratio) * noise


def _intermediate_target(
    config: SamplerConfig, timesteps: TimestepSchedule, slot: int
) -> int:
    t_anchor = int(timesteps.steps[slot])
    if config.variant == "plain":
        return t_anchor
    if config.variant == "gamma_i" and timesteps.provenance[slot] == IMPORTANCE:
        factor = timesteps.curve.values[t_anchor]
    else:
        factor = 1.0 - config.gamma
    return int(np.rint(factor * t_anchor))


def run_sampler(
    config: SamplerConfig,
    schedule: NoiseSchedule,
    timesteps: TimestepSchedule,
    eps_model: Callable[[np.ndarray, int], np.ndarray],
    initial: np.ndarray,
) -> SampleTrajectory:
    """Run one batch of chains along a timestep schedule.

    Args:
        config: sampler variant and options.
        schedule: noise schedule shared by the model and the timesteps.
        timesteps: anchor timesteps, highest first. The gamma_i variant needs
            importance-provenance slots to carry the curve they came from.
        eps_model: callable ``(state, t) -> noise prediction``, vectorized over
            rows; guidance, if any, is already composed into it.
        initial: full-noise start, shape ``(dim,)`` or ``(batch, dim)``. Rows
            are independent chains sharing one vectorized noise stream.

    Returns:
        The visited states and the terminal clean-state estimate, matching the
        shape of ``initial``.
    """
    x = np.asarray(initial, dtype=np.float64)
    squeeze = x.ndim == 1
    x = np.atleast_2d(x)
    if not np.all(np.isfinite(x)):
        raise NumericalError("initial state contains non-finite entries")

    steps = timesteps.steps
    if config.variant == "gamma_i" and IMPORTANCE in timesteps.provenance:
        if timesteps.curve is None:
            raise ValueError("gamma_i needs the importance curve bound to the timestep schedule")
        if timesteps.curve.source_schedule_id != schedule_fingerprint(schedule):
            raise ValueError("timestep schedule's importance curve belongs to a different noise schedule")
    for t in (int(steps[0]), int(steps[-1])):
        schedule._check_t(t)

    step_clip = config.clip if config.postprocess_enabled and config.clip_timing == "every-step" else None
    final_clip = config.clip if config.postprocess_enabled else None
    rng = stream(config.rng_seed, STREAM_RENOISE)

    def record(t: int, state: np.ndarray) -> Tuple[int, np.ndarray]:
        return t, (state[0] if squeeze else state).copy()

    states = [record(int(steps[0]), x)]
    for i in range(1, timesteps.n):
        t_prev, t_anchor = int(steps[i - 1]), int(steps[i])
        mid = _intermediate_target(config, timesteps, i)
        x = _denoise(eps_model, schedule, x, t_prev, mid, step_clip)
        if mid != t_anchor:
            states.append(record(mid, x))
            x = noisify(schedule, x, mid, t_anchor, rng.standard_normal(x.shape))
        states.append(record(t_anchor, x))
    final = _denoise(eps_model, schedule, x, int(steps[-1]), None, final_clip)
    if not np.all(np.isfinite(final)):
        raise NumericalError("terminal state contains non-finite entries")
    return SampleTrajectory(states=states, final=final[0] if squeeze else final)
