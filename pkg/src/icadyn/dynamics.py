"""Deterministic overlap dynamics in the high-dimensional limit.

State is the squared overlap q in [0, 1] between the running estimate
and the planted feature. Two clocks appear:

* the iteration clock t = k / n, on which the overlap moves at rate
  ``drift(q)`` (proportional to tau);
* the accumulated-learning-rate clock t = tau * k / n, on which the
  rate is ``stability(q) = drift(q) / tau``.

All trajectories and comparisons in this package are recorded on the
second clock, which keeps curves for different tau on a common axis;
``integrate`` therefore advances dq/dt = stability(q).

For step size tau and source moments (m4, m6) the rate factors as

    stability(q) = q * [ -2 A q (1 - q) - tau (15 A q^2 (1 - q) + B q^3 + 15) ]

with A = m4 - 3 and B = m6 - 15. The family of sources used here has
m4 < 3, so the first term pushes q up while the tau-proportional terms
fight it; interior zeros of ``stability`` are the recovery threshold
(unstable) and the informative plateau (stable).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from scipy.optimize import brentq

__all__ = [
    "DriftParams",
    "drift",
    "stability",
    "FixedPointSet",
    "fixed_points",
    "OdeSolution",
    "integrate",
    "settle_time",
]

TERMINAL_ATOL = 1e-3


@dataclass(frozen=True)
class DriftParams:
    tau: float
    m4: float
    m6: float

    def __post_init__(self) -> None:
        if self.tau < 0.0:
            raise ValueError(f"tau must be >= 0, got {self.tau}")
        if self.m4 <= 0.0 or self.m6 <= 0.0:
            raise ValueError("moments must be positive")


def drift(q, p: DriftParams):
    """Overlap velocity on the iteration clock t = k / n.

    Grouped by powers of tau: a signal term linear in tau and a
    noise-reaction term in tau^2,

        drift(q) = 2 tau q^2 (1-q) (3 - m4)
                   - tau^2 q [ 15 q^2 (1-q) (m4 - 3) + q^3 (m6 - 15) + 15 ].

    Equals tau * stability(q) identically; both are kept because the
    grouped form is the natural statement of the two competing effects
    while the factored form in ``stability`` is what the root finding
    uses.
    """
    q = np.asarray(q, dtype=float)
    A = p.m4 - 3.0
    B = p.m6 - 15.0
    sig = -2.0 * p.tau * q * q * (1.0 - q) * A
    noise = p.tau * p.tau * q * (15.0 * q * q * (1.0 - q) * A + q**3 * B + 15.0)
    out = sig - noise
    return float(out) if out.ndim == 0 else out


def stability(q, p: DriftParams):
    """Overlap velocity per unit of accumulated learning rate, drift / tau.

    Computed in factored form, so it is well defined at tau = 0 as the
    small-step limit shape.
    """
    q = np.asarray(q, dtype=float)
    A = p.m4 - 3.0
    B = p.m6 - 15.0
    out = q * (
        -2.0 * A * q * (1.0 - q)
        - p.tau * (15.0 * A * q * q * (1.0 - q) + B * q**3 + 15.0)
    )
    return float(out) if out.ndim == 0 else out


class FixedPointSet(NamedTuple):
    roots: tuple[float, ...]
    stabilities: tuple[str, ...]
    threshold: float | None
    informative_level: float | None


def fixed_points(p: DriftParams, grid_size: int = 4000) -> FixedPointSet:
    """Interior zeros of ``stability`` on (0, 1), classified by side signs.

    Scans a uniform grid for sign changes and polishes each bracket
    with Brent's method. q = 0 is always a fixed point and is not
    reported; q = 1 is not a fixed point for tau > 0 (the rate there is
    -tau * m6). Roots come in pairs for this family: ``threshold`` is
    the smallest root (unstable, the recovery basin boundary) and
    ``informative_level`` is the largest stable root (the plateau).
    Both are None when no interior zero exists, i.e. past the critical
    step size, or at tau = 0 where the scan interval is open at 1.

    A tangency (exactly critical tau) produces a double root with no
    sign change and is reported as no roots; callers probing near the
    critical point should stay strictly on either side.
    """
    grid = np.linspace(1e-6, 1.0 - 1e-9, grid_size)
    vals = stability(grid, p)
    roots: list[float] = []
    for i in range(grid_size - 1):
        a, b = vals[i], vals[i + 1]
        if a == 0.0:
            roots.append(float(grid[i]))
        elif a * b < 0.0:
            roots.append(float(brentq(lambda q: stability(q, p), grid[i], grid[i + 1], xtol=1e-12)))
    if vals[-1] == 0.0:
        roots.append(float(grid[-1]))

    eps = 1e-5
    labels = []
    for r in roots:
        left = stability(max(r - eps, 1e-9), p)
        right = stability(min(r + eps, 1.0), p)
        if left > 0.0 > right:
            labels.append("stable")
        elif left < 0.0 < right:
            labels.append("unstable")
        else:
            labels.append("degenerate")

    threshold = roots[0] if roots else None
    informative = None
    for r, lab in zip(reversed(roots), reversed(labels)):
        if lab == "stable":
            informative = r
            break
    return FixedPointSet(
        roots=tuple(roots),
        stabilities=tuple(labels),
        threshold=threshold,
        informative_level=informative,
    )


class OdeSolution(NamedTuple):
    t: np.ndarray
    q: np.ndarray
    terminal_class: str


def integrate(q0: float, p: DriftParams, t_end: float, dt: float = 1e-3) -> OdeSolution:
    """Fixed-step RK4 for dq/dt = stability(q) on t in [0, t_end].

    The state is clamped to [0, 1] after each step; both endpoints are
    invariant or absorbing for this rate, so the clamp only guards
    against overshoot at the chosen dt. Terminal label is
    "informative" when the endpoint sits within 1e-3 of the stable
    plateau from ``fixed_points``, otherwise "uninformative".
    """
    if not (0.0 <= q0 <= 1.0):
        raise ValueError(f"q0 must lie in [0, 1], got {q0}")
    if t_end < 0.0 or dt <= 0.0:
        raise ValueError("need t_end >= 0 and dt > 0")
    nsteps = int(round(t_end / dt))
    t = np.linspace(0.0, nsteps * dt, nsteps + 1)
    q = np.empty(nsteps + 1)
    q[0] = q0
    cur = q0
    for i in range(nsteps):
        k1 = stability(cur, p)
        k2 = stability(cur + 0.5 * dt * k1, p)
        k3 = stability(cur + 0.5 * dt * k2, p)
        k4 = stability(cur + dt * k3, p)
        cur = cur + dt * (k1 + 2.0 * k2 + 2.0 * k3 + k4) / 6.0
        cur = min(max(cur, 0.0), 1.0)
        q[i + 1] = cur

    level = fixed_points(p).informative_level
    if level is not None and abs(q[-1] - level) <= TERMINAL_ATOL:
        label = "informative"
    else:
        label = "uninformative"
    return OdeSolution(t=t, q=q, terminal_class=label)


def settle_time(sol: OdeSolution, level: float, atol: float = 5e-3) -> float | None:
    """Earliest time after which |q - level| stays within atol, None if never."""
    inside = np.abs(sol.q - level) <= atol
    if not inside[-1]:
        return None
    idx = np.nonzero(~inside)[0]
    first = 0 if idx.size == 0 else int(idx[-1]) + 1
    return float(sol.t[first])
