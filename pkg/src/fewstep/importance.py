"""Per-timestep importance derived from the slope of a schedule's log-SNR curve.

A timestep is important where the signal-to-noise ratio changes slowly, so the
importance of step ``t`` is the inverse magnitude of the discrete log-SNR
gradient, normalized by the largest inverse over the whole trajectory.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import numpy as np

from .schedules import NoiseSchedule

__all__ = ["ImportanceCurve", "compute_importance", "schedule_fingerprint"]


def schedule_fingerprint(schedule: NoiseSchedule) -> str:
    """Stable digest of a schedule's kind and beta array, used to pair derived curves."""
    h = hashlib.sha256()
    h.update(schedule.kind.encode())
    h.update(schedule.betas.tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class ImportanceCurve:
    """Normalized inverse log-SNR slope per timestep, in ``[0, 1]`` with max exactly 1."""

    values: np.ndarray
    epsilon: float
    source_schedule_id: str

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 1 or values.size < 3:
            raise ValueError("importance values must be a 1-D array of length >= 3")
        if np.any(values < 0.0) or np.any(values > 1.0):
            raise ValueError("importance values must lie in [0, 1]")
        if values.max() != 1.0:
            raise ValueError("importance values must attain a maximum of exactly 1")
        values.flags.writeable = False
        object.__setattr__(self, "values", values)

    @property
    def num_steps(self) -> int:
        return int(self.values.size)

    def at(self, t: int) -> float:
        t = int(t)
        if not 0 <= t < self.num_steps:
            raise IndexError(f"timestep {t} outside [0, {self.num_steps - 1}]")
        return float(self.values[t])


def compute_importance(schedule: NoiseSchedule, epsilon: float = 1e-8) -> ImportanceCurve:
    """Compute the importance curve of a noise schedule.

    The discrete gradient of ``log(snr + epsilon)`` uses central differences at
    interior points and one-sided differences at the ends. Inverse magnitudes
    are capped at ``1 / epsilon`` where a gradient vanishes, then divided by
    their maximum so the curve peaks at exactly 1.

    Args:
        schedule: source noise schedule with at least 3 timesteps.
        epsilon: positive guard added inside the logarithm and used as the
            gradient floor. Default 1e-8.
    """
    if schedule.num_steps < 3:
        raise ValueError(
            f"importance needs at least 3 timesteps for central differences, "
            f"got {schedule.num_steps}"
        )
    if epsilon <= 0.0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    snr = schedule.alpha_bars / (1.0 - schedule.alpha_bars)
    grad = np.gradient(np.log(snr + epsilon))
    inverse = 1.0 / np.maximum(np.abs(grad), epsilon)
    return ImportanceCurve(
        values=inverse / inverse.max(),
        epsilon=epsilon,
        source_schedule_id=schedule_fingerprint(schedule),
    )
