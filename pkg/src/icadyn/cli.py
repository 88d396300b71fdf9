"""Command-line front end.

Subcommands: moments, drift, simulate, phase, critical-tau, compare.
Every command is deterministic given its full flag set (seed included)
and re-runs produce byte-identical files. Each JSON artifact embeds
the resolved configuration and the package version.

Exit codes: 0 success, 1 tolerance failure (compare), 2 usage or
validation error, 3 I/O error.

A flat key=value config file can be passed with --config; explicit
command-line flags win over file values.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import __version__
from .dynamics import DriftParams, fixed_points, stability
from .learner import AlgoConfig, run_ensemble, steps_for
from .phase import (
    auto_horizon,
    compare_with_ode,
    critical_rate_curve,
    drift_params_for,
    sustain_verdict,
    threshold_table,
)
from .serialize import write_json, write_table
from .sources import SourceParams, analytic_moments, moment_argmax, peak_moments

DEFAULT_BETAS = "0.0,0.3,0.6,0.8,1.0"


# ---------------------------------------------------------------- parsing


def _parse_floats(text: str) -> list[float]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ValueError(f"empty list: {text!r}")
    return [float(s) for s in items]


def _parse_grid(text: str) -> list[float]:
    """Either 'start:stop:step' (inclusive) or a comma list."""
    if ":" in text:
        parts = text.split(":")
        if len(parts) != 3:
            raise ValueError(f"grid must be start:stop:step, got {text!r}")
        start, stop, step = (float(p) for p in parts)
        if step <= 0.0 or stop < start:
            raise ValueError(f"grid {text!r} is empty or descending")
        count = int(np.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(count)]
    return _parse_floats(text)


def _fname(x: float) -> str:
    return repr(float(x))


def _cell_seed(seed: int, index: int) -> int:
    # stable per-cell derivation, independent of iteration order
    return int(np.random.SeedSequence([seed, index]).generate_state(1, np.uint64)[0])


def _echo(args: argparse.Namespace) -> dict:
    skip = {"func"}
    cfg = {k: v for k, v in vars(args).items() if k not in skip}
    return {"config": cfg, "version": __version__}


# ---------------------------------------------------------------- commands


def cmd_moments(args) -> int:
    betas = _parse_grid(args.grid) if args.betas is None else _parse_floats(args.betas)
    rows = []
    for b in betas:
        m = analytic_moments(SourceParams(b))
        rows.append((b, m.m4, m.m6))
    write_table(os.path.join(args.out_dir, "moments"), ["beta", "m4", "m6"], rows, args.format)
    b4, b6 = moment_argmax(np.array(betas))
    payload = {"argmax_m4": b4, "argmax_m6": b6, "continuous_peaks": peak_moments()}
    payload.update(_echo(args))
    write_json(os.path.join(args.out_dir, "moments_summary.json"), payload)
    return 0


def cmd_drift(args) -> int:
    betas = _parse_floats(args.betas)
    if args.grid_size < 2:
        raise ValueError(f"need grid-size >= 2, got {args.grid_size}")
    q = np.linspace(0.0, 1.0, args.grid_size)
    markers: dict[str, dict] = {}
    for b in betas:
        p = drift_params_for(b, args.tau)
        g = stability(q, p)
        base = os.path.join(args.out_dir, f"drift_profile_beta_{_fname(b)}")
        write_table(base, ["q", "g"], zip(q, g), args.format)
        fp = fixed_points(p)
        markers[_fname(b)] = {
            "threshold": fp.threshold,
            "informative_level": fp.informative_level,
        }
    payload = {"tau": args.tau, "markers": markers}
    payload.update(_echo(args))
    write_json(os.path.join(args.out_dir, "drift_markers.json"), payload)
    return 0


def cmd_simulate(args) -> int:
    betas = _parse_floats(args.betas)
    q0s = _parse_floats(args.q0)
    cells = []
    idx = 0
    for q0 in q0s:
        for b in betas:
            horizon = args.t_end if args.t_end is not None else auto_horizon(b, args.tau, q0)
            config = AlgoConfig(
                tau=args.tau,
                n=args.n,
                q0=q0,
                steps=steps_for(horizon, args.n, args.tau),
                seed=_cell_seed(args.seed, idx),
            )
            ens = run_ensemble(
                SourceParams(b),
                config,
                args.trials,
                args.record_every,
                fresh_feature=not args.fixed_feature,
                engine=args.engine,
                jobs=args.jobs,
            )
            fp = fixed_points(drift_params_for(b, args.tau))
            label, wmean = sustain_verdict(ens.t, ens.q_mean, fp.informative_level)
            base = os.path.join(
                args.out_dir, f"trajectory_q0_{_fname(q0)}_beta_{_fname(b)}"
            )
            header = ["t", "q_mean", "q_std"] + [f"q_trial_{i}" for i in range(args.trials)]
            rows = np.column_stack([ens.t, ens.q_mean, ens.q_std, ens.q_trials.T])
            write_table(base, header, rows, args.format)
            cells.append(
                {
                    "beta": b,
                    "q0": q0,
                    "label": label,
                    "window_mean": wmean,
                    "threshold": fp.threshold,
                    "informative_level": fp.informative_level,
                    "t_end": horizon,
                    "cell_seed": config.seed,
                }
            )
            idx += 1
    payload = {"classification": cells}
    payload.update(_echo(args))
    write_json(os.path.join(args.out_dir, "simulate_summary.json"), payload)
    return 0


def cmd_phase(args) -> int:
    taus = _parse_grid(args.taus)
    betas = _parse_grid(args.betas)
    table = threshold_table(taus, betas)
    header = ["tau"] + [_fname(b) for b in betas]
    rows = [[tau] + [v if np.isfinite(v) else None for v in table.threshold[i]]
            for i, tau in enumerate(taus)]
    write_table(os.path.join(args.out_dir, "phase_table"), header, rows, args.format)
    lev_rows = [[tau] + [v if np.isfinite(v) else None for v in table.informative_level[i]]
                for i, tau in enumerate(taus)]
    write_table(os.path.join(args.out_dir, "phase_levels"), header, lev_rows, args.format)
    payload = {
        "taus": list(taus),
        "betas": list(betas),
        "tau_bar": {_fname(b): float(tb) for b, tb in zip(betas, table.tau_bar)},
    }
    payload.update(_echo(args))
    write_json(os.path.join(args.out_dir, "phase_summary.json"), payload)
    return 0


def cmd_critical_tau(args) -> int:
    betas = _parse_grid(args.betas)
    curve = critical_rate_curve(np.array(betas), tol=args.tol)
    write_table(
        os.path.join(args.out_dir, "critical_tau"),
        ["beta", "tau_bar"],
        zip(curve.betas, curve.tau_bar),
        args.format,
    )
    k = int(np.argmin(curve.tau_bar))
    payload = {
        "argmin_beta": float(curve.betas[k]),
        "min_tau_bar": float(curve.tau_bar[k]),
    }
    payload.update(_echo(args))
    write_json(os.path.join(args.out_dir, "critical_tau_summary.json"), payload)
    return 0


def cmd_compare(args) -> int:
    report = compare_with_ode(
        args.beta,
        args.tau,
        args.q0,
        n=args.n,
        trials=args.trials,
        t_end=args.t_end,
        seed=args.seed,
        engine=args.engine,
        record_every=args.record_every,
    )
    base = os.path.join(args.out_dir, f"compare_beta_{_fname(args.beta)}")
    rows = np.column_stack([report.t, report.q_sim, report.q_sim_std, report.q_ode])
    write_table(base, ["t", "q_sim", "q_sim_std", "q_ode"], rows, args.format)
    within = report.mad < args.tolerance
    payload = {
        "mad": report.mad,
        "max_abs_dev": report.max_abs_dev,
        "tolerance": args.tolerance,
        "within_tolerance": bool(within),
    }
    if not within:
        payload["note"] = "finite-size regime: deviation exceeds tolerance"
    payload.update(_echo(args))
    write_json(os.path.join(args.out_dir, "compare_report.json"), payload)
    return 0 if within else 1


# ---------------------------------------------------------------- wiring


def _add_common(sp: argparse.ArgumentParser, *, seed_required: bool = False) -> None:
    sp.add_argument("--out-dir", default=".", help="output directory (default: .)")
    sp.add_argument(
        "--format", choices=("csv", "json"), default="csv",
        help="tabular output format (summaries are always JSON)",
    )
    sp.add_argument("--jobs", type=int, default=1, help="worker processes for vector ensembles")
    sp.add_argument("--config", default=None, help="flat key=value file; flags win")
    if seed_required:
        sp.add_argument("--seed", type=int, required=True, help="stream seed (required)")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="icadyn",
        description="Online feature recovery from non-Gaussian streams: "
        "moment curves, overlap dynamics, phase structure.",
    )
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("moments", help="analytic moment curves over beta")
    sp.add_argument("--grid", default="0.0:1.0:0.01", help="beta grid start:stop:step")
    sp.add_argument("--betas", default=None, help="explicit comma list overriding --grid")
    _add_common(sp)
    sp.set_defaults(func=cmd_moments)

    sp = sub.add_parser("drift", help="rate-function profiles g(q) per beta")
    sp.add_argument("--tau", type=float, default=0.03)
    sp.add_argument("--betas", default=DEFAULT_BETAS)
    sp.add_argument("--grid-size", type=int, default=1001)
    _add_common(sp)
    sp.set_defaults(func=cmd_drift)

    sp = sub.add_parser("simulate", help="Monte Carlo ensembles with classification")
    sp.add_argument("--betas", default=DEFAULT_BETAS)
    sp.add_argument("--tau", type=float, default=0.03)
    sp.add_argument("--q0", default="0.26,0.35", help="comma list of initial overlaps")
    sp.add_argument("--n", type=int, default=4000)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--t-end", type=float, default=None, help="horizon; default auto per cell")
    sp.add_argument("--record-every", type=int, default=None)
    sp.add_argument(
        "--engine", choices=("chain", "vector"), default="chain",
        help="chain: exact scalar reduction, fast; vector: full n-dim recursion",
    )
    sp.add_argument("--fixed-feature", action="store_true",
                    help="share one feature vector across trials")
    _add_common(sp, seed_required=True)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("phase", help="threshold table over (tau, beta)")
    sp.add_argument("--taus", default="0.02:0.06:0.01")
    sp.add_argument("--betas", default=DEFAULT_BETAS)
    _add_common(sp)
    sp.set_defaults(func=cmd_phase)

    sp = sub.add_parser("critical-tau", help="critical step size per beta")
    sp.add_argument("--betas", default="0.0:1.0:0.1")
    sp.add_argument("--tol", type=float, default=1e-5)
    _add_common(sp)
    sp.set_defaults(func=cmd_critical_tau)

    sp = sub.add_parser("compare", help="finite-n ensemble against the limit flow")
    sp.add_argument("--beta", type=float, required=True)
    sp.add_argument("--tau", type=float, default=0.03)
    sp.add_argument("--q0", type=float, default=0.35)
    sp.add_argument("--n", type=int, default=4000)
    sp.add_argument("--trials", type=int, default=20)
    sp.add_argument("--t-end", type=float, default=8.0)
    sp.add_argument("--record-every", type=int, default=None)
    sp.add_argument("--engine", choices=("vector", "chain"), default="vector")
    sp.add_argument("--tolerance", type=float, default=0.05)
    _add_common(sp, seed_required=True)
    sp.set_defaults(func=cmd_compare)

    return ap


def _load_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw.rstrip()!r}")
            key, val = line.split("=", 1)
            values[key.strip().replace("-", "_")] = val.strip()
    return values


def _apply_config(ap: argparse.ArgumentParser, argv: list[str]) -> list[str]:
    """Resolve --config into subparser defaults; flags still win."""
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config", default=None)
    known, _ = pre.parse_known_args(argv)
    if known.config is None:
        return argv
    values = _load_config_file(known.config)

    # locate the subparser for the requested command
    sub_actions = [a for a in ap._actions if isinstance(a, argparse._SubParsersAction)]
    command = next((tok for tok in argv if tok in sub_actions[0].choices), None)
    if command is None:
        raise ValueError("--config requires a subcommand")
    sp = sub_actions[0].choices[command]
    valid = {a.dest: a for a in sp._actions}
    defaults = {}
    for key, val in values.items():
        if key not in valid:
            raise ValueError(f"unknown config key {key!r} for command {command!r}")
        action = valid[key]
        if isinstance(action, argparse._StoreTrueAction):
            low = val.lower()
            if low not in ("true", "false", "1", "0"):
                raise ValueError(f"config key {key!r} expects a boolean, got {val!r}")
            defaults[key] = low in ("true", "1")
        else:
            defaults[key] = val  # argparse converts string defaults through `type`
    sp.set_defaults(**defaults)
    return argv


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    ap = build_parser()
    try:
        argv = _apply_config(ap, argv)
        args = ap.parse_args(argv)
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
