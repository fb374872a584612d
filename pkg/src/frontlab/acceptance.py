"""Desk-scale acceptance checks, shared by the test suite and the CLI.

Each criterion is a function returning a CheckResult whose parts carry the
measured quantity, the tolerance applied, and a pass flag.  Expensive
solver and Monte Carlo runs are cached at module level so that criteria
sharing a run reuse it.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import asymptotics as asym
from .beta_problem import (
    BetaConfig,
    front_prediction_beta,
    map_U_to_V,
    map_V0_to_U0,
    map_V_to_U,
    solve_beta,
)
from .brunet_derrida import bd_lhs, bd_report, bd_rhs, r0_of, speed_from_r0
from .errors import ParameterError
from .initial_conditions import BetaWave, Heaviside, PowerExpTail, Wave
from .solver import (
    FrontTrace,
    Grid,
    Profile,
    boundary_slope_diagnostics,
    extract_front,
    solve_obstacle,
    solve_penalized,
)
from .stochastic import killed_bm_survival, nbbm_run, nbbm_stationary_ccdf
from .waves import SQRT2, Pi_min, wave_laplace_transform

_CACHE: dict = {}


@dataclass
class CheckResult:
    name: str
    anchor: str
    parts: list = field(default_factory=list)  # (label, measured, tolerance, ok)

    def add(self, label: str, measured: float, tolerance: float, ok=None):
        if ok is None:
            ok = measured <= tolerance
        self.parts.append((label, float(measured), float(tolerance), bool(ok)))

    @property
    def passed(self) -> bool:
        return all(p[3] for p in self.parts)

    @property
    def measured(self) -> float:
        bad = [p for p in self.parts if not p[3]]
        return (bad or self.parts)[0][1]

    @property
    def tolerance(self) -> float:
        bad = [p for p in self.parts if not p[3]]
        return (bad or self.parts)[0][2]

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        parts = "; ".join(
            f"{lab}: {m:.6g} vs {tol:.6g} [{'ok' if ok else 'FAIL'}]"
            for lab, m, tol, ok in self.parts
        )
        return f"[{status}] {self.name} ({self.anchor}): {parts}"


def _cached(key, builder):
    if key not in _CACHE:
        _CACHE[key] = builder()
    return _CACHE[key]


def _run_wave_min():
    ic = Wave(SQRT2)
    grid = Grid.around_interface(ic, dx=0.02, width=44.0)
    return solve_obstacle(ic, grid, 20.0, dt_out=0.1,
                          snapshot_times=(2.0, 5.0, 10.0, 15.0, 20.0))


def _run_heaviside_long():
    ic = Heaviside()
    grid = Grid.around_interface(ic, dx=0.02, width=60.0)
    return solve_obstacle(ic, grid, 200.0, dt_out=0.25)


def _run_powexp_60():
    ic = PowerExpTail(1.0, 0.0, 1.0)
    grid = Grid.around_interface(ic, dx=0.02, width=80.0)
    return solve_obstacle(ic, grid, 60.0, dt_out=0.05, snapshot_times=(50.0, 60.0))


def _run_pushed_beta2():
    cfgb = BetaConfig(2.0, BetaWave(2.0))
    grid = Grid.around_interface(BetaWave(2.0), dx=0.02, width=60.0)
    return solve_beta(cfgb, grid, 30.0, dt_out=0.05, snapshot_times=(15.0, 30.0))


def criterion_1() -> CheckResult:
    """Exactness of the minimal travelling wave under the production scheme."""
    res = _cached("wave_min", _run_wave_min)
    out = CheckResult("1-travelling-wave-fixed-point", "travelling-wave-exactness")
    prof_dev = 0.0
    for p in res.snapshots:
        L = extract_front(p)
        prof_dev = max(prof_dev, float(np.abs(p.values - Pi_min(p.grid.xs - L)).max()))
    front_dev = float(np.abs(res.front.positions - SQRT2 * res.front.times).max())
    out.add("profile-deviation", prof_dev, 5e-3)
    out.add("front-deviation", front_dev, 0.05)
    return out


def criterion_2() -> CheckResult:
    """Logarithmic lag of the step-data front behind the linear speed."""
    res = _cached("heaviside_long", _run_heaviside_long)
    out = CheckResult("2-bramson-correction", "bramson-log-correction")
    tmpl = asym.AsymptoticPrediction("pulled", SQRT2, asym.LOG_COEFF_PULLED)
    m = (res.front.times >= 50.0) & (res.front.times <= 200.0)
    corr = res.front.positions[m] - tmpl(res.front.times[m])
    out.add("corrected-position-variation", float(corr.max() - corr.min()), 0.08)
    c1, _ = asym.fit_front(res.front, tmpl, (50.0, 100.0))
    c2, _ = asym.fit_front(res.front, tmpl, (100.0, 200.0))
    out.add("fitted-constant-stability", abs(c1 - c2), 0.05)
    return out


def criterion_3() -> CheckResult:
    """Laplace-transform/boundary-transform identity on solver fronts."""
    res = _cached("powexp_60", _run_powexp_60)
    ic = PowerExpTail(1.0, 0.0, 1.0)
    out = CheckResult("3-brunet-derrida-identity", "laplace-transform-front-identity")
    for r in (-1.0, 0.5):
        rep = bd_report(ic, res.front, r)
        out.add(f"rel-err(r={r:g})", rep.rel_err, 0.02)
        out.add(f"tail-fraction(r={r:g})", rep.tail_fraction, 0.05)
    exact = FrontTrace.linear(SQRT2, 60.0, 5e-4)
    rep = bd_rhs(exact, 0.0, 1.0, tail_speed=SQRT2)
    target = wave_laplace_transform(SQRT2, 1.0)
    out.add("analytic-instance", abs(rep.rhs - target), 1e-8)
    return out


def criterion_4() -> CheckResult:
    """Asymptotic speed from the critical transform rate of the initial tail."""
    out = CheckResult("4-speed-law", "tail-decay-speed-law")
    res = _cached("powexp_60", _run_powexp_60)
    ic = PowerExpTail(1.0, 0.0, 1.0)
    pred = speed_from_r0(r0_of(ic))
    measured = res.front(50.0) / 50.0
    out.add("slow-tail-speed-rel-dev", abs(measured - pred) / pred, 0.05)
    resH = _cached("heaviside_long", _run_heaviside_long)
    LH = resH.front(50.0)
    vH = (LH + (3.0 / (2.0 * SQRT2)) * math.log(50.0)) / 50.0
    out.add("step-data-speed-rel-dev", abs(vH - SQRT2) / SQRT2, 0.05)
    return out


def criterion_5() -> CheckResult:
    """Slower-decay centring constant for a unit-rate exponential tail."""
    res = _cached("powexp_60", _run_powexp_60)
    ic = PowerExpTail(1.0, 0.0, 1.0)
    out = CheckResult("5-slower-decay-constant", "slower-decay-centring")
    target = asym.slow_decay_constant(1.5)  # log(1/2) for the unit-rate tail
    dev = res.front(50.0) - asym.m_slow_decay(ic, 50.0) - target
    out.add("centring-deviation", abs(dev), 0.05)
    return out


def criterion_6() -> CheckResult:
    """Exponential survival law of the killed diffusion on the exact front."""
    out = CheckResult("6-killed-bm-survival", "killed-path-survival-law")
    front = FrontTrace.linear(SQRT2, 5.0, 1e-3)
    curve = _cached(
        "killed_exact",
        lambda: killed_bm_survival(
            Wave(SQRT2), front, 5.0, n_paths=100000, dt_mc=1e-3, seed=20240811,
            times=np.arange(0.0, 5.5, 1.0),
        ),
    )
    for t, s, e in zip(curve.times[1:], curve.survival[1:], curve.stderr[1:]):
        z = abs(s - math.exp(-t)) / e
        out.add(f"z-score(t={t:g})", z, 3.0)
    return out


def criterion_7() -> CheckResult:
    """Hydrodynamic limit: particle tail distribution vs the solver profile."""
    res = _cached("wave_min", _run_wave_min)
    prof = next(p for p in res.snapshots if abs(p.t - 2.0) < 1e-9)
    L = extract_front(prof)
    xs = L + np.linspace(-2.0, 8.0, 401)
    solver_ccdf = np.interp(xs, prof.grid.xs, prof.values)
    out = CheckResult("7-hydrodynamic-limit", "hydrodynamic-limit")
    for seed in (1, 2, 3):
        snaps = nbbm_run(Wave(SQRT2), N=10000, T=2.0, seed=seed)
        emp = snaps[-1].empirical_ccdf(xs)
        out.add(f"sup-dist(seed={seed})", float(np.abs(emp - solver_ccdf).max()), 0.03)
    return out


def criterion_8() -> CheckResult:
    """Selection principle proxy: centred stationary law vs the minimal wave."""
    out = CheckResult("8-selection-principle", "selection-principle")
    xs, ccdf = _cached(
        "nbbm_stat",
        lambda: nbbm_stationary_ccdf(1000, 20.0, 200, 0.1, seed=7),
    )
    out.add("sup-dist", float(np.abs(ccdf - Pi_min(xs)).max()), 0.1)
    return out


def criterion_9() -> CheckResult:
    """Pushed regime at slope 2: speed, boundary slope, and map round trip."""
    res = _cached("pushed_beta2", _run_pushed_beta2)
    out = CheckResult("9-pushed-regime", "pushed-wave-regime")
    out.add("speed-deviation", abs(res.front(30.0) / 30.0 - 1.5), 0.02)
    pV = res.V_snapshots[-1]
    front = extract_front(res.U_snapshots[-1])
    slope, _ = boundary_slope_diagnostics(pV, front)
    out.add("v-slope-deviation", abs(slope - (-2.0)), 0.05)
    # round trip on an exact minimal-wave profile at dx = 0.01
    g = Grid(-20.0, 0.01, 6001)
    prof = Profile(g, 0.0, np.asarray(Pi_min(g.xs)))
    v = map_U_to_V(prof, 1.0, front=0.0)
    u_back = map_V_to_U(v, 1.0)
    out.add("round-trip-max-error",
            float(np.abs(u_back.values - prof.values).max()), 1e-6)
    return out


def criterion_10() -> CheckResult:
    """Exponential-moment identity of the slope map, both sides by quadrature."""
    from scipy.integrate import quad

    out = CheckResult("10-moment-identities", "moment-identity-slope-map")
    lam = 3.0
    V0 = PowerExpTail(1.0, 0.0, lam)
    for beta in (1.0, SQRT2, 2.0):
        U0 = map_V0_to_U0(V0, beta)
        for r in (-1.0, 0.5):
            lhs, _ = quad(lambda x: float(U0(np.asarray(x))) * math.exp(r * x),
                          0.0, 60.0, limit=400)
            right_part, _ = quad(lambda x: float(V0(np.asarray(x))) * math.exp(r * x),
                                 0.0, 60.0, limit=400)
            left_part, _ = quad(lambda x: math.exp(2.0 / beta * x), -60.0, 0.0,
                                limit=400)
            rhs = 2.0 / (2.0 - r * beta) * (right_part + left_part)
            rel = abs(lhs - rhs) / abs(rhs)
            out.add(f"rel-dev(beta={beta:.4g},r={r:g})", rel, 1e-6)
    return out


def criterion_11() -> CheckResult:
    """Infinite-mass centring term against its iterated-logarithm asymptote."""
    out = CheckResult("11-infinite-mass-centring", "infinite-mass-centring")
    A = 1.0
    ic = PowerExpTail(A, -2.0, SQRT2)
    t = 1e4
    b = asym.b_of_t(ic, t)
    target = math.log((A / 2.0) * math.log(t)) / SQRT2
    out.add("asymptote-deviation(t=1e4)", abs(b - target), 0.02)
    return out


def criterion_12() -> CheckResult:
    """Monotone penalized approximation with shrinking refinement gaps."""
    ic = Heaviside()
    out = CheckResult("12-penalization-convergence", "penalization-monotonicity")
    profiles = []
    for n in (8, 16, 32, 64, 128):
        grid = Grid.around_interface(ic, dx=0.05, width=44.0)
        res = solve_penalized(ic, grid, n, 5.0, dt_out=1.0)
        profiles.append((n, res.final.values))
    worst_violation = 0.0
    gaps = []
    for (n1, u1), (n2, u2) in zip(profiles[:-1], profiles[1:]):
        worst_violation = max(worst_violation, float((u1 - u2).max()))
        gaps.append(float(np.abs(u2 - u1).max()))
    out.add("monotone-in-n-violation", worst_violation, 1e-9)
    decreasing = all(g2 < g1 for g1, g2 in zip(gaps[:-1], gaps[1:]))
    out.add("cauchy-gaps-decreasing", 0.0 if decreasing else 1.0, 0.5, ok=decreasing)
    return out


ALL_CRITERIA = {
    "1": criterion_1,
    "2": criterion_2,
    "3": criterion_3,
    "4": criterion_4,
    "5": criterion_5,
    "6": criterion_6,
    "7": criterion_7,
    "8": criterion_8,
    "9": criterion_9,
    "10": criterion_10,
    "11": criterion_11,
    "12": criterion_12,
}


def run_all(only=None) -> list:
    results = []
    for key, fn in ALL_CRITERIA.items():
        if only is not None and key not in only and fn.__name__ not in only:
            continue
        results.append(fn())
    return results
