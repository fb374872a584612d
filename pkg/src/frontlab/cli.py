"""Command-line experiment runner with reproducible CSV/JSON artifacts.

Configuration comes from a JSON file (--config) and/or flat flags; flags
override file values.  Artifacts are written under --out (or the
FRONTLAB_OUT environment root), always including a machine-readable
verdict.json with one entry per named check: the quantity measured, the
tolerance applied, a short anchor naming the mathematical fact being
checked, and pass/fail.  The exit code is 0 exactly when all requested
checks pass.  Re-running an identical config rewrites byte-identical
artifacts.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import acceptance, asymptotics, brunet_derrida, waves
from .beta_problem import BetaConfig, front_prediction_beta, solve_beta
from .errors import ParameterError
from .initial_conditions import parse_ic
from .solver import Grid, boundary_slope_diagnostics, extract_front, solve_obstacle, solve_penalized
from .stochastic import killed_bm_conditional_ccdf, killed_bm_survival, nbbm_run, nbbm_stationary_ccdf
from .waves import SQRT2, c_beta_min

FMT = "%.12g"  # all floats in artifacts carry 12 significant digits


@dataclass
class ExperimentConfig:
    subcommand: str
    ic: str = "heaviside"
    dx: float = 0.02
    width: float = 60.0
    T: float = 20.0
    dt: float = 0.0  # 0 = solver default min(dx^2/2, 1e-3)
    dt_out: float = 0.05
    eps: float = 1e-6
    seed: int = 0
    out: str = "."
    checks: tuple = ()
    snapshots: tuple = ()
    r_values: tuple = (0.5,)
    beta: float = 1.0
    c: float = float(SQRT2)
    n_penal: int = 128
    N: int = 1000
    n_paths: int = 100000
    dt_mc: float = 1e-3
    burn_in: float = 20.0
    n_samples: int = 200
    thin: float = 0.1
    fit_window: tuple = (50.0, 200.0)
    xs_query: tuple = ()

    def to_json(self) -> str:
        return json.dumps(dataclasses.asdict(self), sort_keys=True, indent=2)

    @classmethod
    def from_json(cls, text: str) -> "ExperimentConfig":
        raw = json.loads(text)
        fields = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - fields
        if unknown:
            raise ParameterError(f"unknown config fields: {sorted(unknown)}")
        for k in ("checks", "snapshots", "r_values", "fit_window", "xs_query"):
            if k in raw and raw[k] is not None:
                raw[k] = tuple(raw[k])
        return cls(**raw)


def _outdir(cfg: ExperimentConfig) -> str:
    root = os.environ.get("FRONTLAB_OUT", ".")
    path = cfg.out if os.path.isabs(cfg.out) else os.path.join(root, cfg.out)
    os.makedirs(path, exist_ok=True)
    return path


def _write_csv(path: str, header: str, columns) -> None:
    arr = np.column_stack(columns)
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in arr:
            fh.write(",".join(FMT % v for v in row) + "\n")


def _verdict_entry(check, anchor, tolerance, measured, passed) -> dict:
    return {
        "check": check,
        "anchor": anchor,
        "tolerance": tolerance,
        "measured": measured,
        "pass": bool(passed),
    }


def _finish(outdir, cfg, entries) -> int:
    wanted = set(cfg.checks) if cfg.checks else None
    kept = [e for e in entries if wanted is None or e["check"] in wanted]
    with open(os.path.join(outdir, "verdict.json"), "w") as fh:
        json.dump(kept, fh, indent=2, sort_keys=True)
    with open(os.path.join(outdir, "config.json"), "w") as fh:
        fh.write(cfg.to_json())
    ok = all(e["pass"] for e in kept)
    for e in kept:
        print(f"[{'PASS' if e['pass'] else 'FAIL'}] {e['check']}: "
              f"measured {e['measured']:.6g} vs tolerance {e['tolerance']:.6g}")
    return 0 if ok else 1


def _default_grid(ic, cfg: ExperimentConfig) -> Grid:
    return Grid.around_interface(ic, cfg.dx, cfg.width)


def _dt(cfg: ExperimentConfig):
    return None if cfg.dt <= 0 else cfg.dt


def cmd_waves(cfg: ExperimentConfig) -> int:
    outdir = _outdir(cfg)
    xs = np.linspace(-2.0, 20.0, 1101)
    cols = [xs, waves.pi_c(cfg.c, xs), waves.Pi_c(cfg.c, xs)]
    header = "x,pi,Pi"
    if cfg.beta > 0:
        cols.append(waves.Pi_beta_c(cfg.beta, max(cfg.c, c_beta_min(cfg.beta)), xs))
        header += ",Pi_beta"
    _write_csv(os.path.join(outdir, "waves.csv"), header, cols)
    norm = float(waves.Pi_c(cfg.c, 0.0))
    entries = [_verdict_entry("wave-normalisation", "travelling-wave-normalisation",
                              1e-12, abs(norm - 1.0), abs(norm - 1.0) <= 1e-12)]
    return _finish(outdir, cfg, entries)


def cmd_solve(cfg: ExperimentConfig) -> int:
    outdir = _outdir(cfg)
    ic = parse_ic(cfg.ic)
    grid = _default_grid(ic, cfg)
    snaps = tuple(cfg.snapshots) or (cfg.T,)
    if cfg.subcommand == "solve":
        res = solve_obstacle(ic, grid, cfg.T, _dt(cfg), dt_out=cfg.dt_out,
                             snapshot_times=snaps, eps=cfg.eps)
    else:
        res = solve_penalized(ic, grid, cfg.n_penal, cfg.T, _dt(cfg),
                              dt_out=cfg.dt_out, snapshot_times=snaps, eps=cfg.eps)
    _write_csv(os.path.join(outdir, "front.csv"), "t,L",
               [res.front.times, res.front.positions])
    for p in res.snapshots:
        _write_csv(os.path.join(outdir, f"profile_t{p.t:g}.csv"), "x,U",
                   [p.grid.xs, p.values])
    mass_dev = max(abs(p.mass() - 1.0) for p in res.snapshots)
    mono_dev = max(float(np.diff(p.values).max(initial=-1.0)) for p in res.snapshots)
    entries = [
        _verdict_entry("mass-conservation", "unit-mass-constraint", 1e-4,
                       mass_dev, mass_dev <= 1e-4),
        _verdict_entry("profile-monotone", "non-increasing-profile", 1e-9,
                       mono_dev, mono_dev <= 1e-9),
    ]
    if cfg.subcommand == "solve":
        b, c2 = boundary_slope_diagnostics(
            res.final, extract_front(res.final, cfg.eps))
        entries.append(_verdict_entry(
            "front-slope-zero", "flat-contact-condition", 0.05, abs(b), abs(b) <= 0.05))
        entries.append(_verdict_entry(
            "front-curvature", "contact-curvature-two", 0.2, abs(c2 + 2.0),
            abs(c2 + 2.0) <= 0.2))
    return _finish(outdir, cfg, entries)


def cmd_beta_solve(cfg: ExperimentConfig) -> int:
    outdir = _outdir(cfg)
    config = BetaConfig(cfg.beta, parse_ic(cfg.ic))
    ic_u = parse_ic(cfg.ic)  # for grid placement only
    grid = _default_grid(ic_u, cfg)
    snaps = tuple(cfg.snapshots) or (cfg.T,)
    res = solve_beta(config, grid, cfg.T, _dt(cfg), dt_out=cfg.dt_out,
                     snapshot_times=snaps, eps=cfg.eps)
    _write_csv(os.path.join(outdir, "front.csv"), "t,L",
               [res.front.times, res.front.positions])
    for pU, pV in zip(res.U_snapshots, res.V_snapshots):
        _write_csv(os.path.join(outdir, f"profile_U_t{pU.t:g}.csv"), "x,U",
                   [pU.grid.xs, pU.values])
        _write_csv(os.path.join(outdir, f"profile_V_t{pV.t:g}.csv"), "x,V",
                   [pV.grid.xs, pV.values])
    pred = front_prediction_beta(config)
    report = {
        "beta": cfg.beta,
        "regime": pred.regime,
        "c_min": c_beta_min(cfg.beta),
        "I_beta": res.I_beta if math.isfinite(res.I_beta) else "infinite",
        "predicted_constant": pred.constant,
    }
    with open(os.path.join(outdir, "regime.json"), "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
    # one-sided slope of V at the front should match the prescribed -beta
    pV = res.V_snapshots[-1]
    front = extract_front(res.U_snapshots[-1], cfg.eps)
    slope, _ = boundary_slope_diagnostics(pV, front)
    dev = abs(slope + cfg.beta)
    entries = [
        _verdict_entry("boundary-slope", "prescribed-slope-condition", 0.05, dev,
                       dev <= 0.05),
        _verdict_entry("v-monotone", "non-increasing-profile", 1e-6,
                       max(float(np.diff(p.values).max(initial=-1.0))
                           for p in res.V_snapshots),
                       all(np.diff(p.values).max(initial=-1.0) <= 1e-6
                           for p in res.V_snapshots)),
    ]
    return _finish(outdir, cfg, entries)


def cmd_bd_check(cfg: ExperimentConfig) -> int:
    outdir = _outdir(cfg)
    ic = parse_ic(cfg.ic)
    grid = _default_grid(ic, cfg)
    res = solve_obstacle(ic, grid, cfg.T, _dt(cfg), dt_out=cfg.dt_out, eps=cfg.eps)
    entries = []
    rows = []
    for r in cfg.r_values:
        rep = brunet_derrida.bd_report(ic, res.front, r)
        rows.append(rep.row())
        measured = rep.rel_err if math.isfinite(rep.rel_err) else -1.0
        entries.append(_verdict_entry(
            f"bd-identity-r={r:g}", "laplace-transform-front-identity", 0.02,
            measured, rep.verdict))
    with open(os.path.join(outdir, "bd_report.csv"), "w") as fh:
        fh.write("r,lhs,rhs,rel_err,tail_fraction,verdict\n")
        fh.write("\n".join(rows) + "\n")
    return _finish(outdir, cfg, entries)


def cmd_asymptotics(cfg: ExperimentConfig) -> int:
    outdir = _outdir(cfg)
    ic = parse_ic(cfg.ic)
    grid = _default_grid(ic, cfg)
    T = max(cfg.T, cfg.fit_window[1])
    res = solve_obstacle(ic, grid, T, _dt(cfg), dt_out=cfg.dt_out, eps=cfg.eps)
    if ic.tail.rate < SQRT2 - 1e-12:
        rate = ic.tail.rate
        template = asymptotics.AsymptoticPrediction(
            "slower-decay", 1.0 / rate + rate / 2.0, 0.0)
    else:
        template = asymptotics.AsymptoticPrediction(
            "pulled", SQRT2, asymptotics.LOG_COEFF_PULLED,
            b_curve=(lambda s: asymptotics.b_of_t(ic, s)))
    const, resid = asymptotics.fit_front(res.front, template, cfg.fit_window)
    m = (res.front.times >= cfg.fit_window[0]) & (res.front.times <= cfg.fit_window[1])
    ts = res.front.times[m]
    pred = template(ts) + const
    _write_csv(os.path.join(outdir, "prediction.csv"), "t,m_pred,L_solver,deviation",
               [ts, pred, res.front.positions[m], res.front.positions[m] - pred])
    half = (cfg.fit_window[0], (cfg.fit_window[0] + cfg.fit_window[1]) / 2.0)
    c1, _ = asymptotics.fit_front(res.front, template, half)
    entries = [
        _verdict_entry("fit-residual", "front-position-template", 0.25, resid,
                       resid <= 0.25),
        _verdict_entry("constant-stability", "front-position-template", 0.1,
                       abs(c1 - const), abs(c1 - const) <= 0.1),
    ]
    return _finish(outdir, cfg, entries)


def cmd_nbbm(cfg: ExperimentConfig) -> int:
    outdir = _outdir(cfg)
    ic = parse_ic(cfg.ic)
    snaps = nbbm_run(ic, cfg.N, cfg.T, seed=cfg.seed, snapshot_times=cfg.snapshots)
    xs = np.asarray(cfg.xs_query, dtype=float) if cfg.xs_query else np.linspace(
        float(np.min(snaps[-1].positions)) - 1.0,
        float(np.max(snaps[-1].positions)) + 1.0, 401)
    ccdf = snaps[-1].empirical_ccdf(xs)
    _write_csv(os.path.join(outdir, "nbbm_ccdf.csv"), "x,F", [xs, ccdf])
    sx, sccdf = nbbm_stationary_ccdf(cfg.N, cfg.burn_in, cfg.n_samples, cfg.thin,
                                     seed=cfg.seed, ic=ic)
    _write_csv(os.path.join(outdir, "nbbm_stationary_ccdf.csv"), "x,F", [sx, sccdf])
    _sidecar(outdir, cfg)
    entries = [
        _verdict_entry("population-constant", "constant-population-selection",
                       0, abs(snaps[-1].N - cfg.N), snaps[-1].N == cfg.N),
        _verdict_entry("ccdf-monotone", "tail-distribution-monotone", 1e-12,
                       float(np.diff(ccdf).max(initial=-1.0)),
                       bool(np.all(np.diff(ccdf) <= 1e-12))),
    ]
    return _finish(outdir, cfg, entries)


def cmd_killed_bm(cfg: ExperimentConfig) -> int:
    outdir = _outdir(cfg)
    ic = parse_ic(cfg.ic)
    grid = _default_grid(ic, cfg)
    res = solve_obstacle(ic, grid, cfg.T, _dt(cfg), dt_out=cfg.dt_out, eps=cfg.eps)
    times = np.linspace(0.0, cfg.T, 11)
    curve = killed_bm_survival(ic, res.front, cfg.T, cfg.n_paths, cfg.dt_mc,
                               cfg.seed, times=times)
    _write_csv(os.path.join(outdir, "survival.csv"), "t,S,stderr",
               [curve.times, curve.survival, curve.stderr])
    xs = np.asarray(cfg.xs_query, dtype=float) if cfg.xs_query else (
        res.front(cfg.T) + np.linspace(0.0, 6.0, 61))
    ccdf, err, _ = killed_bm_conditional_ccdf(
        ic, res.front, cfg.T, cfg.n_paths, cfg.dt_mc, cfg.seed, xs)
    _write_csv(os.path.join(outdir, "ccdf.csv"), "x,F,stderr", [xs, ccdf, err])
    _sidecar(outdir, cfg)
    dev = float(np.abs(curve.survival - np.exp(-curve.times)).max())
    entries = [
        _verdict_entry("survival-monotone", "killed-path-survival-law", 1e-12,
                       float(np.diff(curve.survival).max(initial=-1.0)),
                       bool(np.all(np.diff(curve.survival) <= 1e-12))),
        _verdict_entry("survival-exponential", "killed-path-survival-law",
                       5 * float(curve.stderr.max()) + 5e-3, dev,
                       dev <= 5 * float(curve.stderr.max()) + 5e-3),
    ]
    return _finish(outdir, cfg, entries)


def cmd_all_acceptance(cfg: ExperimentConfig) -> int:
    outdir = _outdir(cfg)
    results = acceptance.run_all(only=set(cfg.checks) if cfg.checks else None)
    entries = [
        _verdict_entry(r.name, r.anchor, r.tolerance, r.measured, r.passed)
        for r in results
    ]
    cfg2 = dataclasses.replace(cfg, checks=())
    return _finish(outdir, cfg2, entries)


def _sidecar(outdir: str, cfg: ExperimentConfig) -> None:
    with open(os.path.join(outdir, "mc_params.json"), "w") as fh:
        json.dump({"seed": cfg.seed, "n_paths": cfg.n_paths, "dt_mc": cfg.dt_mc,
                   "N": cfg.N}, fh, indent=2, sort_keys=True)


_COMMANDS = {
    "waves": cmd_waves,
    "solve": cmd_solve,
    "penalized": cmd_solve,
    "beta-solve": cmd_beta_solve,
    "bd-check": cmd_bd_check,
    "asymptotics": cmd_asymptotics,
    "nbbm": cmd_nbbm,
    "killed-bm": cmd_killed_bm,
    "all-acceptance": cmd_all_acceptance,
}


def _tuple_of_floats(text: str) -> tuple:
    return tuple(float(v) for v in text.split(",") if v != "")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="frontlab",
        description="free boundary front laboratory: solver, transforms, validators",
    )
    sub = ap.add_subparsers(dest="subcommand", required=True)
    for name in _COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=str, default=None,
                       help="JSON config file; flags override its values")
        p.add_argument("--ic", type=str)
        p.add_argument("--dx", type=float)
        p.add_argument("--width", type=float)
        p.add_argument("--T", type=float)
        p.add_argument("--dt", type=float)
        p.add_argument("--dt-out", dest="dt_out", type=float)
        p.add_argument("--eps", type=float)
        p.add_argument("--seed", type=int)
        p.add_argument("--out", type=str)
        p.add_argument("--checks", type=lambda s: tuple(s.split(",")))
        p.add_argument("--snapshots", type=_tuple_of_floats)
        p.add_argument("--r", dest="r_values", type=_tuple_of_floats)
        p.add_argument("--beta", type=float)
        p.add_argument("--c", type=float)
        p.add_argument("--n", dest="n_penal", type=int)
        p.add_argument("--N", dest="N", type=int)
        p.add_argument("--n-paths", dest="n_paths", type=int)
        p.add_argument("--dt-mc", dest="dt_mc", type=float)
        p.add_argument("--burn-in", dest="burn_in", type=float)
        p.add_argument("--n-samples", dest="n_samples", type=int)
        p.add_argument("--thin", type=float)
        p.add_argument("--fit-window", dest="fit_window", type=_tuple_of_floats)
        p.add_argument("--xs", dest="xs_query", type=_tuple_of_floats)
    return ap


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            cfg = ExperimentConfig.from_json(fh.read())
        cfg = dataclasses.replace(cfg, subcommand=args.subcommand)
    else:
        cfg = ExperimentConfig(subcommand=args.subcommand)
    overrides = {
        k: v for k, v in vars(args).items()
        if k not in ("config", "subcommand") and v is not None
    }
    return dataclasses.replace(cfg, **overrides)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    cfg = config_from_args(args)
    try:
        return _COMMANDS[cfg.subcommand](cfg)
    except Exception as exc:  # propagate module errors with context
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
