"""Phase structure of the online update: thresholds, critical step
sizes, and classification of runs.

Everything here is driven by the reference moment model from
``sources`` and the fixed-point structure from ``dynamics``. For a
given (tau, beta) below the critical step size, the rate function has
an unstable interior zero (the recovery threshold) and a stable one
above it (the informative plateau); past the critical step size both
disappear and every initial condition decays.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .dynamics import DriftParams, fixed_points, integrate, settle_time
from .learner import AlgoConfig, run_ensemble, steps_for
from .sources import SourceParams, analytic_moments

__all__ = [
    "SUSTAIN_WINDOW",
    "LEVEL_MARGIN",
    "THRESHOLD_ATOL",
    "drift_params_for",
    "PhaseTable",
    "threshold_table",
    "critical_rate",
    "CriticalRateCurve",
    "critical_rate_curve",
    "auto_horizon",
    "sustain_verdict",
    "Classification",
    "classify_run",
    "ComparisonReport",
    "compare_with_ode",
]

# Final fraction of the horizon that must sit near the plateau for a
# simulated run to count as informative, and the slack below the
# plateau allowed there. The slack absorbs finite-n bias and the
# deliberate reference-vs-sampler sixth-moment gap at interior beta.
SUSTAIN_WINDOW = 0.1
LEVEL_MARGIN = 0.05
THRESHOLD_ATOL = 1e-6


def drift_params_for(beta: float, tau: float) -> DriftParams:
    m = analytic_moments(SourceParams(beta))
    return DriftParams(tau=tau, m4=m.m4, m6=m.m6)


class PhaseTable(NamedTuple):
    taus: np.ndarray
    betas: np.ndarray
    threshold: np.ndarray  # (len(taus), len(betas)), NaN where absent
    informative_level: np.ndarray
    tau_bar: np.ndarray  # (len(betas),)


def threshold_table(taus, betas) -> PhaseTable:
    """Recovery threshold and plateau on a (tau, beta) grid, plus the
    critical step size per beta; NaN marks grid cells past critical
    where no interior fixed point survives."""
    taus = np.asarray(taus, dtype=float)
    betas = np.asarray(betas, dtype=float)
    thr = np.full((taus.size, betas.size), np.nan)
    lev = np.full((taus.size, betas.size), np.nan)
    for i, tau in enumerate(taus):
        for j, beta in enumerate(betas):
            fp = fixed_points(drift_params_for(float(beta), float(tau)))
            if fp.threshold is not None:
                thr[i, j] = fp.threshold
            if fp.informative_level is not None:
                lev[i, j] = fp.informative_level
    tb = np.array([critical_rate(float(b)) for b in betas])
    return PhaseTable(taus=taus, betas=betas, threshold=thr, informative_level=lev, tau_bar=tb)


def _has_interior_roots(beta: float, tau: float) -> bool:
    return fixed_points(drift_params_for(beta, tau)).threshold is not None


def critical_rate(
    beta: float, lo: float = 0.005, hi: float = 0.2, tol: float = 1e-5
) -> float:
    """Largest step size with an interior fixed point, to within tol.

    Bisects the root-existence predicate. The initial bracket is
    widened automatically if it does not straddle the transition.
    """
    if not (0.0 < lo < hi):
        raise ValueError("need 0 < lo < hi")
    while not _has_interior_roots(beta, lo):
        lo *= 0.5
        if lo < 1e-6:
            raise RuntimeError(f"no interior fixed points found down to tau = {lo}")
    while _has_interior_roots(beta, hi):
        hi *= 2.0
        if hi > 1.0:
            raise RuntimeError("interior fixed points persist up to tau = 1")
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if _has_interior_roots(beta, mid):
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


class CriticalRateCurve(NamedTuple):
    betas: np.ndarray
    tau_bar: np.ndarray


def critical_rate_curve(betas, tol: float = 1e-5) -> CriticalRateCurve:
    betas = np.asarray(betas, dtype=float)
    tb = np.array([critical_rate(float(b), tol=tol) for b in betas])
    return CriticalRateCurve(betas=betas, tau_bar=tb)


def auto_horizon(beta: float, tau: float, q0: float) -> float:
    """Recording-clock horizon long enough to classify (beta, tau, q0).

    Initial conditions at or below the threshold (or past critical)
    decay; a horizon of 8 displays that clearly. Above the threshold,
    the horizon is 1.4x the reference-model settling time onto the
    plateau, clamped to [8, 24]; the slack covers trajectories that
    approach the plateau more slowly than the reference model predicts.
    """
    fp = fixed_points(drift_params_for(beta, tau))
    if fp.threshold is None or q0 <= fp.threshold + THRESHOLD_ATOL:
        return 8.0
    sol = integrate(q0, drift_params_for(beta, tau), t_end=60.0)
    settle = settle_time(sol, fp.informative_level, atol=5e-3)
    if settle is None:
        return 24.0
    return float(min(24.0, max(8.0, 1.4 * settle)))


def sustain_verdict(
    t: np.ndarray, q_mean: np.ndarray, informative_level: float | None
) -> tuple[str, float]:
    """Label an ensemble mean by its tail behavior.

    Returns ("informative" | "uninformative", window mean), where the
    window is the final SUSTAIN_WINDOW fraction of the horizon and the
    bar is informative_level - LEVEL_MARGIN.
    """
    wstart = t[-1] * (1.0 - SUSTAIN_WINDOW)
    sel = t >= wstart - 1e-12
    wmean = float(np.asarray(q_mean)[sel].mean())
    if informative_level is not None and wmean > informative_level - LEVEL_MARGIN:
        return "informative", wmean
    return "uninformative", wmean


class Classification(NamedTuple):
    label: str
    beta: float
    tau: float
    q0: float
    mode: str
    threshold: float | None
    informative_level: float | None
    window_mean: float | None
    t_end: float | None


def classify_run(
    beta: float,
    tau: float,
    q0: float,
    mode: str = "ode",
    *,
    n: int = 4000,
    trials: int = 20,
    seed: int | None = None,
    t_end: float | None = None,
    engine: str = "chain",
) -> Classification:
    """Label (beta, tau, q0) as informative / uninformative / threshold.

    ODE mode compares q0 against the recovery threshold of the
    reference-model rate function: above it the deterministic flow
    reaches the plateau, below it the flow decays, and within
    THRESHOLD_ATOL of it the label is "threshold".

    Simulation mode runs a Monte Carlo ensemble (chain engine by
    default; pass engine="vector" for the full recursion) and demands
    sustained presence near the plateau: the ensemble-mean overlap over
    the final SUSTAIN_WINDOW fraction of the horizon must exceed
    informative_level - LEVEL_MARGIN. Never returns "threshold".
    """
    fp = fixed_points(drift_params_for(beta, tau))
    if mode == "ode":
        if fp.threshold is None or q0 < fp.threshold - THRESHOLD_ATOL:
            label = "uninformative"
        elif q0 <= fp.threshold + THRESHOLD_ATOL:
            label = "threshold"
        else:
            label = "informative"
        return Classification(
            label, beta, tau, q0, mode, fp.threshold, fp.informative_level, None, None
        )
    if mode != "simulation":
        raise ValueError(f"unknown mode {mode!r}")
    if seed is None:
        raise ValueError("simulation mode needs a seed")

    horizon = auto_horizon(beta, tau, q0) if t_end is None else t_end
    config = AlgoConfig(tau=tau, n=n, q0=q0, steps=steps_for(horizon, n, tau), seed=seed)
    ens = run_ensemble(SourceParams(beta), config, trials, engine=engine)
    label, wmean = sustain_verdict(ens.t, ens.q_mean, fp.informative_level)
    return Classification(
        label, beta, tau, q0, mode, fp.threshold, fp.informative_level, wmean, horizon
    )


class ComparisonReport(NamedTuple):
    t: np.ndarray
    q_sim: np.ndarray
    q_sim_std: np.ndarray
    q_ode: np.ndarray
    mad: float
    max_abs_dev: float
    beta: float
    tau: float
    q0: float
    n: int
    trials: int
    engine: str
    seed: int


def compare_with_ode(
    beta: float,
    tau: float,
    q0: float,
    *,
    n: int,
    trials: int,
    t_end: float,
    seed: int,
    engine: str = "vector",
    record_every: int | None = None,
) -> ComparisonReport:
    """Ensemble mean of the finite-n algorithm against the limit flow.

    The deterministic curve is RK4 on the recording clock interpolated
    onto the ensemble grid. With tau = 0 both sides are constant at q0
    and the deviation is round-off in the measured initial overlap.
    """
    config = AlgoConfig(tau=tau, n=n, q0=q0, steps=steps_for(t_end, n, tau), seed=seed)
    ens = run_ensemble(SourceParams(beta), config, trials, record_every, engine=engine)
    if tau == 0.0:
        q_ode = np.full_like(ens.t, q0)
    else:
        sol = integrate(q0, drift_params_for(beta, tau), t_end=float(ens.t[-1]))
        q_ode = np.interp(ens.t, sol.t, sol.q)
    dev = np.abs(ens.q_mean - q_ode)
    return ComparisonReport(
        t=ens.t,
        q_sim=ens.q_mean,
        q_sim_std=ens.q_std,
        q_ode=q_ode,
        mad=float(dev.mean()),
        max_abs_dev=float(dev.max()),
        beta=beta,
        tau=tau,
        q0=q0,
        n=n,
        trials=trials,
        engine=engine,
        seed=seed,
    )
