"""Streaming observation model.

Each observation is an n-vector

    y = (c / sqrt(n)) * u + a,

where u is a fixed feature vector with +-1 entries (so |u|^2 = n
exactly), c is a fresh source draw, and a is an isotropic Gaussian
vector projected orthogonal to u. By construction u . y / sqrt(n) = c
up to round-off, and the noise covariance is the projector
I - u u^T / n.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .sources import SourceParams, sample_source

__all__ = [
    "random_feature",
    "Observation",
    "sample_observation",
    "noise_covariance_error",
]


def random_feature(n: int, rng: np.random.Generator) -> np.ndarray:
    """Feature vector with independent +-1 entries, norm sqrt(n) exactly."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    return rng.integers(0, 2, size=n) * 2.0 - 1.0


class Observation(NamedTuple):
    values: np.ndarray
    latent_source: float


def sample_observation(
    u: np.ndarray, params: SourceParams, rng: np.random.Generator
) -> Observation:
    """Draw one observation y = (c/sqrt(n)) u + (I - u u^T / n) g.

    Implemented in fused form y = g + ((c/sqrt(n)) - (u.g)/n) u, one
    Gaussian vector and one axpy. The identity u . y = sqrt(n) c then
    holds to round-off because u . u = n exactly.
    """
    n = u.shape[0]
    c = sample_source(params, rng)
    g = rng.standard_normal(n)
    coef = c / np.sqrt(n) - (u @ g) / n
    return Observation(values=g + coef * u, latent_source=c)


def noise_covariance_error(
    u: np.ndarray, draws: int, rng: np.random.Generator, probes: int = 20
) -> float:
    """Largest deviation of the empirical noise covariance from I - u u^T / n.

    Estimates v^T Cov[a] v along ``probes`` random unit directions v
    plus the direction u itself, and compares against v^T (I - u u^T/n) v.
    Checking quadratic forms keeps the cost at O(draws * n) instead of
    forming the n x n matrix.
    """
    n = u.shape[0]
    sqn = np.sqrt(n)
    dirs = rng.standard_normal((probes, n))
    dirs /= np.linalg.norm(dirs, axis=1, keepdims=True)
    dirs = np.vstack([dirs, u / sqn])

    # a = g - (u.g/n) u from the same stream the observations use
    G = rng.standard_normal((draws, n))
    A = G - np.outer(G @ u / n, u)
    proj = A @ dirs.T  # (draws, probes+1)
    emp = np.mean(proj * proj, axis=0)
    expected = 1.0 - (dirs @ u) ** 2 / n
    return float(np.max(np.abs(emp - expected)))
