"""Moment-tunable non-Gaussian source.

The latent source is a unit-variance mixture

    c = beta * r + sqrt(1 - beta^2) * v,

with r a Rademacher sign and v uniform on (-sqrt(3), sqrt(3)), drawn
independently. Both factors are symmetric with unit variance, so c has
zero mean and unit variance for every beta in [0, 1]. The mixing weight
beta is the single knob: it moves the fourth and sixth moments along
closed-form curves, which is what makes this family useful for probing
moment-dependent recovery behavior.

Two sixth-moment values are exposed on purpose. ``analytic_moments``
returns the reference moment model (quartic in s = beta^2) that the
dynamics and phase layers consume. ``sampler_sixth_moment`` returns the
exact sixth moment of the mixture as drawn. The two agree at beta = 0
and beta = 1 and differ in between; the gap is 12 s (1 - s)^2 and is
asserted in the tests rather than hidden.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

__all__ = [
    "UNIFORM_HALF_WIDTH",
    "SourceParams",
    "SourceMoments",
    "analytic_moments",
    "sampler_sixth_moment",
    "sample_source",
    "empirical_moments",
    "moment_argmax",
    "peak_moments",
]

# Half-width of the uniform factor; gives v unit variance.
UNIFORM_HALF_WIDTH = float(np.sqrt(3.0))


@dataclass(frozen=True)
class SourceParams:
    """Mixing weight for the Rademacher/uniform source."""

    beta: float

    def __post_init__(self) -> None:
        if not (0.0 <= self.beta <= 1.0):
            raise ValueError(f"beta must lie in [0, 1], got {self.beta}")


class SourceMoments(NamedTuple):
    m4: float
    m6: float


def analytic_moments(params: SourceParams) -> SourceMoments:
    """Reference fourth and sixth moments as functions of s = beta^2.

        m4(s) = 1.8 + 2.4 s - 3.2 s^2
        m6(s) = (27 + 24 s - 24 s^2 - 20 s^3) / 7

    Endpoints: (m4, m6) = (1.8, 27/7) at beta = 0 (pure uniform) and
    (1, 1) at beta = 1 (pure Rademacher). These are the values the
    drift and phase computations use.
    """
    s = params.beta * params.beta
    m4 = 1.8 + s * (2.4 - 3.2 * s)
    m6 = (27.0 + s * (24.0 - s * (24.0 + 20.0 * s))) / 7.0
    return SourceMoments(m4=m4, m6=m6)


def sampler_sixth_moment(params: SourceParams) -> float:
    """Exact sixth moment of the mixture as sampled.

    Binomial expansion of E[(beta r + sqrt(1-s) v)^6] with r^2 = 1 and
    E[v^2k] = 3^k / (2k + 1):

        m6(s) = (27 + 108 s - 192 s^2 + 64 s^3) / 7

    Exceeds the reference model's sixth moment by 12 s (1 - s)^2, so
    the two coincide only at beta in {0, 1}.
    """
    s = params.beta * params.beta
    return (27.0 + s * (108.0 - s * (192.0 - 64.0 * s))) / 7.0


def sample_source(
    params: SourceParams, rng: np.random.Generator, size: int | None = None
) -> float | np.ndarray:
    """Draw c = beta * r + sqrt(1 - beta^2) * v, elementwise independent."""
    b = params.beta
    w = np.sqrt(1.0 - b * b)
    r = rng.integers(0, 2, size=size) * 2.0 - 1.0
    v = rng.uniform(-UNIFORM_HALF_WIDTH, UNIFORM_HALF_WIDTH, size=size)
    out = b * r + w * v
    return float(out) if size is None else out


def empirical_moments(
    params: SourceParams, draws: int, rng: np.random.Generator
) -> SourceMoments:
    """Monte Carlo fourth and sixth moments from ``draws`` samples."""
    c = sample_source(params, rng, size=draws)
    c2 = c * c
    c4 = c2 * c2
    return SourceMoments(m4=float(c4.mean()), m6=float((c4 * c2).mean()))


def moment_argmax(betas: np.ndarray) -> tuple[float, float]:
    """Grid maximizers of the reference m4 and m6 over ``betas``.

    Returns (beta_m4, beta_m6). Ties resolve to the smallest beta.
    """
    betas = np.asarray(betas, dtype=float)
    if betas.ndim != 1 or betas.size == 0:
        raise ValueError("betas must be a nonempty 1-d array")
    moments = [analytic_moments(SourceParams(float(b))) for b in betas]
    m4 = np.array([m.m4 for m in moments])
    m6 = np.array([m.m6 for m in moments])
    return float(betas[int(np.argmax(m4))]), float(betas[int(np.argmax(m6))])


def peak_moments() -> dict[str, float]:
    """Continuous maximizers of the reference moment curves over beta in [0, 1].

    m4 peaks at s = 3/8 with value 2.25 exactly; m6 peaks at
    s = (sqrt(14) - 2) / 5, the positive root of 5 s^2 + 4 s - 2.
    """
    s4 = 3.0 / 8.0
    s6 = (np.sqrt(14.0) - 2.0) / 5.0
    b4 = float(np.sqrt(s4))
    b6 = float(np.sqrt(s6))
    return {
        "beta_m4": b4,
        "m4": analytic_moments(SourceParams(b4)).m4,
        "beta_m6": b6,
        "m6": analytic_moments(SourceParams(b6)).m6,
    }
