"""Admissible initial conditions for the integrated front equation.

Every variant is a non-increasing cadlag function with values in [0, 1],
tending to 1 at minus infinity and 0 at plus infinity, with a finite
interface position ``L0 = inf{x : U0(x) < 1}``.  Variants also expose their
tail structure (exponential rate and polynomial power), which the transform
and asymptotics modules use for analytic tail handling, and an inverse-CCDF
sampler for the particle validators.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import DomainError
from .waves import (
    SQRT2,
    Pi_beta_min,
    Pi_c,
    Pi_min_inverse,
    WaveParams,
    c_beta_min,
)


@dataclass(frozen=True)
class Tail:
    """Leading tail behaviour ``amplitude * x^power * exp(-rate x)`` as x -> infinity."""

    rate: float
    power: float = 0.0
    amplitude: float = 1.0
    exact: bool = True  # False when fitted from tabulated data


class InitialCondition:
    """Base class; concrete variants implement the vectorised CCDF."""

    def __call__(self, x):
        raise NotImplementedError

    def log_value(self, x):
        """log U0(x), -inf where U0 vanishes; overflow-safe for steep tails."""
        with np.errstate(divide="ignore"):
            return np.log(self(x))

    @property
    def L0(self) -> float:
        raise NotImplementedError

    @property
    def tail(self) -> Tail:
        raise NotImplementedError

    def r0(self) -> float:
        """Supremum of transform parameters in (0, sqrt(2)) with a finite
        exponential moment of the tail; capped at sqrt(2)."""
        return min(self.tail.rate, SQRT2)

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        """Inverse-CCDF sampling of the probability measure with this CCDF."""
        u = rng.random(n)
        return self._inverse_table()(u)

    def _inverse_table(self):
        xs, us = self._ccdf_table()
        # CCDF is non-increasing; np.interp wants increasing coordinates
        return lambda q: np.interp(q, us[::-1], xs[::-1])

    def _ccdf_table(self, n: int = 20001):
        rate = max(self.tail.rate, 0.2)
        hi = self.L0 + max(40.0, 40.0 / rate)
        xs = np.linspace(self.L0 - 1e-9, hi, n)
        return xs, np.clip(self(xs), 0.0, 1.0)

    def to_spec(self) -> str:
        raise NotImplementedError

    def __repr__(self):
        return self.to_spec()


@dataclass(frozen=True, repr=False)
class Heaviside(InitialCondition):
    """Unit step: 1 on the negative half line (a point mass at the origin)."""

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < 0, 1.0, 0.0)
        return out if out.ndim else float(out)

    def log_value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.where(x < 0, 0.0, -np.inf)
        return out if out.ndim else float(out)

    @property
    def L0(self):
        return 0.0

    @property
    def tail(self):
        return Tail(rate=math.inf)

    def r0(self):
        return SQRT2

    def sample(self, rng, n):
        return np.zeros(n)

    def to_spec(self):
        return "heaviside"


@dataclass(frozen=True, repr=False)
class PowerExpTail(InitialCondition):
    """min(1, A x^nu exp(-lam x)) beyond the interface, 1 before it.

    The interface x* is the largest root of A x^nu exp(-lam x) = 1 when one
    exists on the decreasing branch, and 0 otherwise (the profile then jumps
    from 1 to A at the origin, which is admissible for nu = 0, A < 1).
    """

    A: float
    nu: float
    lam: float
    x_star: float = field(init=False)

    def __post_init__(self):
        if self.A <= 0 or self.lam <= 0:
            raise DomainError("PowerExpTail needs A > 0 and lam > 0")
        object.__setattr__(self, "x_star", self._find_interface())

    def _find_interface(self) -> float:
        A, nu, lam = self.A, self.nu, self.lam
        logf = lambda x: math.log(A) + nu * math.log(x) - lam * x
        if nu < 0:
            return brentq(logf, 1e-300, 1e4)  # f decreases from +inf
        if nu == 0:
            return max(math.log(A) / lam, 0.0)
        # nu > 0: the profile must be non-increasing where it is below 1,
        # so the hump maximum has to reach 1
        xmax = nu / lam
        if logf(xmax) < 0:
            raise DomainError(
                "PowerExpTail with nu > 0 is non-monotone below 1 for these parameters"
            )
        return brentq(logf, xmax, xmax + 1e4)

    def __call__(self, x):
        out = np.exp(self.log_value(x))
        return out if np.ndim(out) else float(out)

    def log_value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        m = x > self.x_star
        with np.errstate(divide="ignore"):
            out[m] = np.minimum(
                0.0, math.log(self.A) + self.nu * np.log(x[m]) - self.lam * x[m]
            )
        return out if out.ndim else float(out)

    @property
    def L0(self):
        return self.x_star

    @property
    def tail(self):
        return Tail(rate=self.lam, power=self.nu, amplitude=self.A)

    def to_spec(self):
        return f"powexp:{self.A!r},{self.nu!r},{self.lam!r}"


@dataclass(frozen=True, repr=False)
class Wave(InitialCondition):
    """Exact travelling-wave shape Pi_c as the initial condition."""

    c: float

    def __post_init__(self):
        WaveParams(self.c)  # domain check

    def __call__(self, x):
        return Pi_c(self.c, x)

    def log_value(self, x):
        x = np.asarray(x, dtype=float)
        p = WaveParams(self.c)
        out = np.zeros_like(x)
        m = x > 0
        if p.degenerate:
            out[m] = np.log1p(SQRT2 * x[m]) - SQRT2 * x[m]
        else:
            delta = p.b_c - p.a_c
            out[m] = -p.a_c * x[m] + np.log1p(
                -(p.a_c / delta) * np.expm1(-delta * x[m])
            )
        return out if out.ndim else float(out)

    @property
    def L0(self):
        return 0.0

    @property
    def tail(self):
        p = WaveParams(self.c)
        if p.degenerate:
            return Tail(rate=SQRT2, power=1.0, amplitude=SQRT2)
        return Tail(rate=p.a_c, power=0.0, amplitude=p.Z_c * p.b_c)

    def sample(self, rng, n):
        if abs(self.c - SQRT2) <= 1e-12:
            return Pi_min_inverse(1.0 - rng.random(n))  # keep arguments in (0, 1]
        return super().sample(rng, n)

    def to_spec(self):
        return f"wave:{self.c!r}"


@dataclass(frozen=True, repr=False)
class BetaWave(InitialCondition):
    """Minimal non-negative slope-beta wave shape as the initial condition."""

    beta: float

    def __post_init__(self):
        if self.beta <= 0:
            raise DomainError(f"boundary slope must be positive, got {self.beta}")

    def __call__(self, x):
        return Pi_beta_min(self.beta, x)

    def log_value(self, x):
        x = np.asarray(x, dtype=float)
        out = np.zeros_like(x)
        m = x > 0
        if self.beta <= SQRT2 + 1e-12:
            out[m] = -SQRT2 * x[m] + np.log1p(
                np.maximum(SQRT2 - self.beta, 0.0) * x[m]
            )
        else:
            # pure fast mode at the minimal pushed speed: amplitude * exp(-beta x)
            p = WaveParams(c_beta_min(self.beta), self.beta)
            amp = 0.5 * p.Z_c * p.a_c * (p.b_c * self.beta - 2.0)
            out[m] = math.log(amp) - self.beta * x[m]
        return out if out.ndim else float(out)

    @property
    def L0(self):
        return 0.0

    @property
    def tail(self):
        if self.beta < SQRT2:
            return Tail(rate=SQRT2, power=1.0, amplitude=SQRT2 - self.beta)
        if self.beta == SQRT2:
            return Tail(rate=SQRT2, power=0.0, amplitude=1.0)
        p = WaveParams(c_beta_min(self.beta), self.beta)
        amp = 0.5 * p.Z_c * p.a_c * (p.b_c * self.beta - 2.0)
        return Tail(rate=self.beta, power=0.0, amplitude=amp)

    def to_spec(self):
        return f"betawave:{self.beta!r}"


@dataclass(frozen=True, repr=False)
class ExpMixture(InitialCondition):
    """Sum of exponentials amp_i * exp(-rate_i (x - x*)) past the interface x*.

    Closed-form image of a pure-exponential profile under the slope-map
    averaging; amplitudes must sum to at most 1 (equal to 1 when the profile
    is continuous at the interface) and the mixture must be non-increasing.
    """

    rates: tuple
    amps: tuple
    x_star: float = 0.0

    def __post_init__(self):
        r = np.asarray(self.rates, dtype=float)
        a = np.asarray(self.amps, dtype=float)
        if np.any(r <= 0) or len(r) != len(a) or a.sum() > 1.0 + 1e-12:
            raise DomainError("ExpMixture needs positive rates and total mass <= 1")
        ys = np.linspace(0.0, 80.0 / r.min(), 4001)
        vals = (a[None, :] * np.exp(-np.outer(ys, r))).sum(axis=1)
        if np.any(vals < -1e-12) or np.any(np.diff(vals) > 1e-12):
            raise DomainError("ExpMixture profile must be non-negative and non-increasing")

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        y = np.clip(x - self.x_star, 0.0, None)
        out = np.zeros(np.shape(y))
        for amp, rate in zip(self.amps, self.rates):
            out = out + amp * np.exp(-rate * y)
        out = np.where(x <= self.x_star, 1.0, np.clip(out, 0.0, 1.0))
        return out if out.ndim else float(out)

    def log_value(self, x):
        x = np.asarray(x, dtype=float)
        y = np.clip(x - self.x_star, 0.0, None)
        i = int(np.argmin(self.rates))
        lead_amp, lead_rate = self.amps[i], self.rates[i]
        rest = np.zeros(np.shape(y))
        for k, (amp, rate) in enumerate(zip(self.amps, self.rates)):
            if k != i:
                rest = rest + (amp / lead_amp) * np.exp(-(rate - lead_rate) * y)
        out = math.log(lead_amp) - lead_rate * y + np.log1p(rest)
        out = np.where(x <= self.x_star, 0.0, np.minimum(out, 0.0))
        return out if out.ndim else float(out)

    @property
    def L0(self):
        return self.x_star

    @property
    def tail(self):
        i = int(np.argmin(self.rates))
        return Tail(rate=self.rates[i], power=0.0, amplitude=self.amps[i])

    def to_spec(self):
        parts = ";".join(f"{a:g}@{r:g}" for a, r in zip(self.amps, self.rates))
        return f"expmix:{parts}@@{self.x_star:g}"


@dataclass(frozen=True, repr=False)
class Tabulated(InitialCondition):
    """Piecewise-linear CCDF from sampled values, with a fitted exponential tail.

    The stretched-exponential tail hypothesis used by the pulled-front
    asymptotics cannot be verified from a finite table; a warning is issued
    when the fitted tail is consumed analytically.
    """

    xs: tuple
    us: tuple

    def __post_init__(self):
        xs = np.asarray(self.xs, dtype=float)
        us = np.asarray(self.us, dtype=float)
        if xs.ndim != 1 or xs.shape != us.shape or len(xs) < 4:
            raise DomainError("Tabulated needs matching 1-d arrays of length >= 4")
        if np.any(np.diff(xs) <= 0):
            raise DomainError("Tabulated abscissae must be strictly increasing")
        if np.any(np.diff(us) > 1e-12) or us[0] < 1.0 - 1e-6 or us[-1] > 1e-3:
            raise DomainError(
                "Tabulated values must be non-increasing, start at 1 and decay"
            )
        object.__setattr__(self, "xs", tuple(xs))
        object.__setattr__(self, "us", tuple(us))
        object.__setattr__(self, "_tail", self._fit_tail())

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        xs = np.asarray(self.xs)
        us = np.clip(np.asarray(self.us), 0.0, 1.0)
        out = np.interp(x, xs, us, left=1.0, right=0.0)
        t = self.tail
        beyond = x > xs[-1]
        if np.any(beyond):
            out[beyond] = us[-1] * np.exp(-t.rate * (x[beyond] - xs[-1]))
        return out if out.ndim else float(out)

    @property
    def L0(self):
        xs = np.asarray(self.xs)
        us = np.asarray(self.us)
        below = np.nonzero(us < 1.0 - 1e-12)[0]
        if len(below) == 0:
            raise DomainError("tabulated profile never drops below 1")
        i = below[0]
        return xs[max(i - 1, 0)]

    def _fit_tail(self):
        # exponential rate fitted on the last stretch of positive values
        xs = np.asarray(self.xs)
        us = np.asarray(self.us)
        pos = us > 1e-14
        xs, us = xs[pos], us[pos]
        k = max(len(xs) // 4, 2)
        x_t, u_t = xs[-k:], np.log(us[-k:])
        slope = np.polyfit(x_t, u_t, 1)[0]
        rate = max(-slope, 1e-6)
        warnings.warn(
            "tabulated tail rate is fitted, not verified; stretched-exponential "
            "hypotheses of the pulled-front asymptotics are assumed",
            stacklevel=4,
        )
        return Tail(rate=rate, power=0.0, amplitude=float(us[-1]), exact=False)

    @property
    def tail(self):
        return self._tail

    def to_spec(self):
        return "tabulated:<inline>"


def exp_tail(lam: float, x0: float = 0.0) -> PowerExpTail:
    """Convenience: min(1, exp(-lam (x - x0))) shifted pure-exponential profile."""
    return PowerExpTail(A=math.exp(lam * x0), nu=0.0, lam=lam)


def finite_initial_mass(ic: InitialCondition) -> bool:
    """Whether the first weighted tail moment with weight x exp(sqrt(2) x) converges."""
    t = ic.tail
    if t.rate > SQRT2:
        return True
    if t.rate < SQRT2:
        return False
    return t.power < -2.0


def parse_ic(spec: str) -> InitialCondition:
    """Parse the flat textual form used by configs: e.g. ``powexp:1,0,1``."""
    name, _, args = spec.partition(":")
    name = name.strip().lower()
    if name == "heaviside":
        return Heaviside()
    if name == "powexp":
        a, nu, lam = (float(v) for v in args.split(","))
        return PowerExpTail(a, nu, lam)
    if name == "wave":
        return Wave(SQRT2 if args.strip() == "min" else float(args))
    if name == "betawave":
        return BetaWave(float(args))
    if name == "tabulated":
        data = np.loadtxt(args, delimiter=",", skiprows=1)
        return Tabulated(tuple(data[:, 0]), tuple(data[:, 1]))
    raise DomainError(f"unknown initial condition spec: {spec!r}")
