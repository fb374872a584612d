"""Monte Carlo validators: the branching-selection particle system and
Brownian motion killed at a given moving boundary.

The particle system keeps a constant population: particles diffuse as
independent Brownian motions, each branches at unit rate, and the leftmost
particle is removed after every branching event.  Its empirical tail
distribution converges to the solver profile (hydrodynamic limit), and its
minimum-centred stationary law converges to the minimal travelling wave
(selection principle).

The killed-diffusion validator starts a Brownian motion from the initial
measure and kills it on the boundary; survival decays exactly like
exp(-t), and the surviving endpoints reproduce the solver profile.
Discrete monitoring is corrected with the exact linear-barrier
bridge-crossing probability exp(-2 d0 d1 / dt).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ParameterError, PrecisionError
from .initial_conditions import InitialCondition
from .solver import FrontTrace


@dataclass
class Ensemble:
    """Particle positions at one time, with event and stream bookkeeping."""

    positions: np.ndarray
    t: float
    n_branch_events: int
    rng_state: dict = field(default_factory=dict, repr=False)

    @property
    def N(self) -> int:
        return len(self.positions)

    def empirical_ccdf(self, xs) -> np.ndarray:
        xs = np.asarray(xs, dtype=float)
        pos = np.sort(self.positions)
        return 1.0 - np.searchsorted(pos, xs, side="left") / len(pos)


@dataclass
class SurvivalCurve:
    times: np.ndarray
    survival: np.ndarray
    stderr: np.ndarray
    n_paths: int

    def __post_init__(self):
        s = np.asarray(self.survival)
        if np.any(np.diff(s) > 1e-12) or np.any(s > 1.0 + 1e-12):
            raise ParameterError("survival curve must be non-increasing and at most 1")
        if self.times[0] == 0.0 and abs(s[0] - 1.0) > 1e-12:
            raise ParameterError("survival at time 0 must be 1")


def nbbm_run(
    ic: InitialCondition,
    N: int,
    T: float,
    seed: int = 0,
    snapshot_times: tuple = (),
) -> list[Ensemble]:
    """Event-driven run of the branching-selection system, exact in law.

    Inter-event times are exponential at total rate N; between events every
    particle receives an exact Gaussian increment; at an event a uniformly
    chosen particle is duplicated and the current minimum removed (lowest
    index on ties).  Deterministic given the seed.  Snapshots are recorded
    at the requested times and always at T.
    """
    if N < 2:
        raise ParameterError("need at least two particles")
    rng = np.random.default_rng(seed)
    pos = np.asarray(ic.sample(rng, N), dtype=float)
    t = 0.0
    n_events = 0
    marks = sorted(set(float(s) for s in snapshot_times) | {float(T)})
    out = []

    def diffuse_to(target):
        nonlocal t, pos
        if target > t:
            pos = pos + rng.standard_normal(N) * math.sqrt(target - t)
            t = target

    while True:
        t_event = t + rng.exponential(1.0 / N)
        while marks and marks[0] <= min(t_event, T):
            diffuse_to(marks.pop(0))
            out.append(
                Ensemble(pos.copy(), t, n_events, rng_state=rng.bit_generator.state)
            )
        if t_event > T:
            break
        diffuse_to(t_event)
        i = int(rng.integers(N))  # brancher
        j = int(np.argmin(pos))  # selection victim (lowest index on ties)
        pos[j] = pos[i]
        n_events += 1
    return out


def nbbm_stationary_ccdf(
    N: int,
    burn_in: float,
    n_samples: int,
    thin: float,
    seed: int = 0,
    ic: InitialCondition | None = None,
    xs: np.ndarray | None = None,
):
    """Average of minimum-centred empirical tail distributions at stationarity.

    After the burn-in, the ensemble is recorded at thinned epochs, each
    recentred by its minimum; the averaged tail distribution approximates
    the minimal travelling wave for large populations.

    Returns (xs, averaged ccdf).
    """
    if burn_in < 5.0:
        raise ParameterError("burn-in must be at least 5 time units")
    if ic is None:
        from .initial_conditions import Wave
        from .waves import SQRT2

        ic = Wave(SQRT2)
    if xs is None:
        xs = np.linspace(0.0, 12.0, 601)
    T = burn_in + n_samples * thin
    marks = burn_in + thin * np.arange(n_samples)
    snaps = nbbm_run(ic, N, T, seed=seed, snapshot_times=tuple(marks))
    acc = np.zeros_like(np.asarray(xs, dtype=float))
    used = 0
    for ens in snaps:
        if ens.t < burn_in - 1e-9:
            continue
        if used >= n_samples:
            break
        centred = ens.positions - ens.positions.min()
        acc += Ensemble(centred, ens.t, 0).empirical_ccdf(xs)
        used += 1
    return np.asarray(xs, dtype=float), acc / max(used, 1)


def _front_on_grid(front: FrontTrace, t_grid: np.ndarray) -> np.ndarray:
    if front.T < t_grid[-1] - 1e-9:
        raise ParameterError("front trace shorter than the requested horizon")
    return front(t_grid)


def _run_killed(ic, front, T, n_paths, dt_mc, seed, bridge, batch, record_times):
    if T <= 0.0:
        rng = np.random.default_rng((seed, 0))
        x = np.asarray(ic.sample(rng, n_paths), dtype=float)
        return np.full(len(record_times), float(n_paths)), x
    nsteps = max(int(round(T / dt_mc)), 1)
    dt = T / nsteps
    t_grid = dt * np.arange(nsteps + 1)
    barrier = _front_on_grid(front, t_grid)
    rec_idx = np.clip(np.round(np.asarray(record_times) / dt).astype(int), 0, nsteps)
    surv_counts = np.zeros(len(rec_idx))
    endpoints = []
    done = 0
    bi = 0
    sdt = math.sqrt(dt)
    while done < n_paths:
        nb = min(batch, n_paths - done)
        rng = np.random.default_rng((seed, bi))
        x = np.asarray(ic.sample(rng, nb), dtype=float)
        alive = x > barrier[0]
        d_prev = x - barrier[0]
        for s in range(1, nsteps + 1):
            x = x + rng.standard_normal(nb) * sdt
            d_new = x - barrier[s]
            dead = d_new <= 0.0
            if bridge:
                p_cross = np.exp(
                    -2.0 * np.clip(d_prev, 0.0, None) * np.clip(d_new, 0.0, None) / dt
                )
                dead |= rng.random(nb) < p_cross
            alive &= ~dead
            d_prev = d_new
            hits = np.nonzero(rec_idx == s)[0]
            for h in hits:
                surv_counts[h] += int(alive.sum())
        zero_hits = np.nonzero(rec_idx == 0)[0]
        for h in zero_hits:
            surv_counts[h] += nb
        endpoints.append(x[alive])
        done += nb
        bi += 1
    return surv_counts, np.concatenate(endpoints) if endpoints else np.empty(0)


def killed_bm_survival(
    ic: InitialCondition,
    front: FrontTrace,
    T: float,
    n_paths: int = 100000,
    dt_mc: float = 1e-3,
    seed: int = 0,
    *,
    bridge: bool = True,
    times: np.ndarray | None = None,
    batch: int = 25000,
) -> SurvivalCurve:
    """Survival probability of the killed diffusion at checkpoint times.

    Exact Gaussian increments at step dt_mc; a path dies when it sits at or
    below the linearly interpolated boundary, and (by default) with the
    exact bridge-crossing probability between monitoring points.  The
    survival law of the exactly tuned boundary is exp(-t).
    """
    if n_paths < 100:
        raise ParameterError("need n_paths >= 100")
    if times is None:
        times = np.linspace(0.0, T, 11)
    times = np.asarray(times, dtype=float)
    counts, _ = _run_killed(ic, front, T, n_paths, dt_mc, seed, bridge, batch, times)
    S = counts / n_paths
    err = np.sqrt(np.clip(S * (1.0 - S), 0.0, None) / n_paths)
    return SurvivalCurve(times, S, err, n_paths)


def killed_bm_conditional_ccdf(
    ic: InitialCondition,
    front: FrontTrace,
    t: float,
    n_paths: int,
    dt_mc: float,
    seed: int,
    xs: np.ndarray,
    *,
    bridge: bool = True,
    batch: int = 25000,
):
    """Tail distribution of surviving endpoints at the query points.

    Estimates the solver profile U(t, .); standard errors are binomial on
    the surviving subsample.  Raises when fewer than 200 paths survive
    (survivors scale like n_paths * exp(-t)).

    Returns (ccdf, stderr, n_survivors).
    """
    if n_paths < 100:
        raise ParameterError("need n_paths >= 100")
    xs = np.asarray(xs, dtype=float)
    _, endpoints = _run_killed(
        ic, front, t, n_paths, dt_mc, seed, bridge, batch, np.array([t])
    )
    n_surv = len(endpoints)
    if n_surv < 200:
        raise PrecisionError(
            f"only {n_surv} surviving paths; increase n_paths "
            f"(survivors scale like n_paths * exp(-t) ~ {n_paths * math.exp(-t):.0f})"
        )
    sorted_ep = np.sort(endpoints)
    ccdf = 1.0 - np.searchsorted(sorted_ep, xs, side="left") / n_surv
    err = np.sqrt(np.clip(ccdf * (1.0 - ccdf), 0.0, None) / n_surv)
    return ccdf, err, n_surv
