"""Discrete variance-preserving noise schedules and their alpha-bar derived quantities."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["SCHEDULE_KINDS", "NoiseSchedule", "build_schedule"]

SCHEDULE_KINDS = ("linear", "scaled_linear", "cosine")


@dataclass(frozen=True)
class NoiseSchedule:
    """Forward-diffusion schedule over integer timesteps ``0 .. num_steps - 1``.

    ``betas`` holds per-step variance increments, ``alphas = 1 - betas`` the
    per-step signal retention, and ``alpha_bars`` the cumulative product
    ``prod(alphas[: t + 1])``. All arrays are immutable after construction.
    """

    betas: np.ndarray
    alphas: np.ndarray
    alpha_bars: np.ndarray
    kind: str

    def __post_init__(self):
        betas = np.asarray(self.betas, dtype=np.float64)
        alphas = np.asarray(self.alphas, dtype=np.float64)
        alpha_bars = np.asarray(self.alpha_bars, dtype=np.float64)
        if betas.ndim != 1 or betas.shape != alphas.shape or betas.shape != alpha_bars.shape:
            raise ValueError("betas, alphas and alpha_bars must be 1-D arrays of equal length")
        if betas.size < 2:
            raise ValueError(f"a schedule needs at least 2 timesteps, got {betas.size}")
        if np.any(betas <= 0.0) or np.any(betas >= 1.0):
            raise ValueError("all betas must lie strictly inside (0, 1)")
        if not np.array_equal(alphas, 1.0 - betas):
            raise ValueError("alphas must equal 1 - betas exactly")
        if np.any(alpha_bars <= 0.0) or np.any(alpha_bars >= 1.0):
            raise ValueError("all alpha_bars must lie strictly inside (0, 1)")
        if np.any(np.diff(alpha_bars) >= 0.0):
            raise ValueError("alpha_bars must be strictly decreasing")
        for arr, name in ((betas, "betas"), (alphas, "alphas"), (alpha_bars, "alpha_bars")):
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def num_steps(self) -> int:
        return int(self.betas.size)

    def _check_t(self, t: int) -> int:
        t = int(t)
        if not 0 <= t < self.num_steps:
            raise IndexError(f"timestep {t} outside [0, {self.num_steps - 1}]")
        return t

    def alpha_bar_at(self, t: int) -> float:
        """``alpha_bars[t]`` with timestep validation."""
        return float(self.alpha_bars[self._check_t(t)])

    def snr(self, t: int) -> float:
        """Signal-to-noise ratio ``alpha_bar_t / (1 - alpha_bar_t)`` at timestep ``t``."""
        ab = self.alpha_bar_at(t)
        return float(ab / (1.0 - ab))

    def forward_diffuse(self, x0: np.ndarray, t: int, noise: np.ndarray) -> np.ndarray:
        """Diffuse clean data to timestep ``t``: ``sqrt(ab_t) * x0 + sqrt(1 - ab_t) * noise``."""
        x0 = np.asarray(x0, dtype=np.float64)
        noise = np.asarray(noise, dtype=np.float64)
        if x0.shape != noise.shape:
            raise ValueError(f"x0 shape {x0.shape} does not match noise shape {noise.shape}")
        ab = self.alpha_bar_at(t)
        return np.sqrt(ab) * x0 + np.sqrt(1.0 - ab) * noise


def _cosine_alpha_bars(num_steps: int, offset: float = 0.008) -> np.ndarray:
    # Squared-cosine signal-retention profile evaluated at step boundaries.
    ts = np.arange(num_steps + 1, dtype=np.float64) / num_steps
    f = np.cos((ts + offset) / (1.0 + offset) * np.pi / 2.0) ** 2
    return f / f[0]


def build_schedule(
    kind: str = "linear",
    num_steps: int = 1000,
    beta_start: float = 1e-4,
    beta_end: float = 0.02,
) -> NoiseSchedule:
    """Build a noise schedule of the given kind.

    Args:
        kind: one of ``linear`` (betas uniformly spaced from ``beta_start`` to
            ``beta_end``), ``scaled_linear`` (uniform in ``sqrt(beta)``), or
            ``cosine`` (squared-cosine alpha-bar profile; ignores the beta
            range and caps each beta at 0.999).
        num_steps: number of discrete timesteps, at least 2.
        beta_start: first beta, in ``(0, 1)``.
        beta_end: last beta, at least ``beta_start`` and below 1.

    Returns:
        An immutable :class:`NoiseSchedule`.
    """
    if kind not in SCHEDULE_KINDS:
        raise ValueError(f"unknown schedule kind {kind!r}, expected one of {SCHEDULE_KINDS}")
    if num_steps < 2:
        raise ValueError(f"num_steps must be at least 2, got {num_steps}")
    if not 0.0 < beta_start <= beta_end < 1.0:
        raise ValueError(
            f"beta range must satisfy 0 < beta_start <= beta_end < 1, got "
            f"({beta_start}, {beta_end})"
        )

    if kind == "linear":
        betas = np.linspace(beta_start, beta_end, num_steps)
    elif kind == "scaled_linear":
        betas = np.linspace(beta_start**0.5, beta_end**0.5, num_steps) ** 2
    else:
        profile = _cosine_alpha_bars(num_steps)
        betas = np.minimum(1.0 - profile[1:] / profile[:-1], 0.999)

    alphas = 1.0 - betas
    return NoiseSchedule(
        betas=betas, alphas=alphas, alpha_bars=np.cumprod(alphas), kind=kind
    )
