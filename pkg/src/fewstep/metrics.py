"""Sample-quality metrics against analytic mixtures, and run report assembly."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass

import numpy as np
from scipy.stats import wasserstein_distance

from .mixture import MixtureModel
from .seeding import STREAM_PROJECTIONS, stream

__all__ = [
    "mixture_moments",
    "moments_error",
    "wasserstein_1d",
    "sliced_wasserstein",
    "saturation_fraction",
    "RunReport",
]


def mixture_moments(model: MixtureModel) -> tuple[np.ndarray, np.ndarray]:
    """Closed-form mean and covariance of an isotropic Gaussian mixture."""
    mean = model.weights @ model.means
    centered = model.means - mean
    cov = np.einsum("k,ki,kj->ij", model.weights, centered, centered)
    cov += np.diag(np.full(model.dim, model.weights @ model.variances))
    return mean, cov


def moments_error(samples: np.ndarray, model: MixtureModel) -> tuple[float, float]:
    """L2 mean error and Frobenius covariance error against the mixture's moments."""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] == 0:
        raise ValueError(f"expected a non-empty (batch, dim) array, got shape {samples.shape}")
    true_mean, true_cov = mixture_moments(model)
    mean_error = float(np.linalg.norm(samples.mean(axis=0) - true_mean))
    empirical_cov = np.cov(samples, rowvar=False, bias=True).reshape(true_cov.shape)
    cov_error = float(np.linalg.norm(empirical_cov - true_cov))
    return mean_error, cov_error


def wasserstein_1d(a: np.ndarray, b: np.ndarray) -> float:
    """Exact empirical 1-D Wasserstein-1 distance between two sample sets."""
    a = np.asarray(a, dtype=np.float64).ravel()
    b = np.asarray(b, dtype=np.float64).ravel()
    if a.size == 0 or b.size == 0:
        raise ValueError("both sample sets must be non-empty")
    return float(wasserstein_distance(a, b))


def sliced_wasserstein(
    a: np.ndarray, b: np.ndarray, directions: int = 32, rng_seed: int = 0
) -> float:
    """Average 1-D Wasserstein-1 distance over seeded random unit projections."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[1]:
        raise ValueError(f"expected (batch, dim) arrays of equal dim, got {a.shape} and {b.shape}")
    if a.shape[1] < 2:
        raise ValueError("sliced distance needs dim >= 2; use wasserstein_1d for scalars")
    if directions < 8:
        raise ValueError(f"need at least 8 projection directions, got {directions}")
    rng = stream(rng_seed, STREAM_PROJECTIONS)
    proj = rng.standard_normal((directions, a.shape[1]))
    proj /= np.linalg.norm(proj, axis=1, keepdims=True)
    return float(np.mean([wasserstein_distance(a @ u, b @ u) for u in proj]))


def saturation_fraction(x: np.ndarray, threshold: float = 0.99) -> float:
    """Share of entries with magnitude above the threshold."""
    x = np.asarray(x, dtype=np.float64)
    if x.size == 0:
        raise ValueError("saturation fraction of an empty array is undefined")
    return float(np.mean(np.abs(x) > threshold))


@dataclass
class RunReport:
    """Metrics of one sampling run plus the configuration that produced it."""

    config_echo: dict
    mean_error: float
    cov_error: float
    wasserstein1: float
    saturation_fraction: float
    step_count: int
    wall_time: float

    def __post_init__(self):
        metrics = (self.mean_error, self.cov_error, self.wasserstein1, self.saturation_fraction)
        if not all(np.isfinite(m) and m >= 0.0 for m in metrics):
            raise ValueError(f"metrics must be finite and non-negative, got {metrics}")

    def to_json(self) -> str:
        return json.dumps(asdict(self), sort_keys=True, indent=2) + "\n"
