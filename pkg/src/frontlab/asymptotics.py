"""Predicted front positions and fitting of solver traces against them.

For tails at or faster than the critical rate sqrt(2), the front sits at

    m(t) = sqrt(2) t - (3/(2 sqrt(2))) log t + b(t) + O(1),

where b(t) is a logarithmic functional of the weighted initial tail mass;
b is bounded exactly when the mass integral converges, and then the O(1)
term is an unknown constant to be fitted.  With divergent mass the O(1)
constant is explicit, -(1/sqrt(2)) log sqrt(pi).  For strictly slower
exponential tails the front follows the level-1 set of the exponentially
grown heat solution, up to an explicit speed-dependent constant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.optimize import brentq
from scipy.stats import norm

from .errors import DomainError, ParameterError, PrecisionError, WindowError
from .initial_conditions import InitialCondition, finite_initial_mass
from .solver import FrontTrace
from .waves import SQRT2

LOG_COEFF_PULLED = -3.0 / (2.0 * SQRT2)
LOG_COEFF_TRANSITION = -1.0 / (2.0 * SQRT2)
INFINITE_MASS_CONSTANT = -math.log(math.sqrt(math.pi)) / SQRT2


@dataclass
class AsymptoticPrediction:
    """Front-position template: linear t, log t, log log t and O(1) terms.

    ``constant`` is None when the theory leaves it implicit (to be fitted
    from a trace); ``b_curve``, when present, is an additive time-dependent
    centring term.  ``infinite_mass`` marks the divergence statements where
    the deviation from the template tends to infinity.
    """

    regime: str
    linear: float
    log_coeff: float
    loglog_coeff: float = 0.0
    constant: float | None = None
    b_curve: Callable[[float], float] | None = None
    infinite_mass: bool = False

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        out = self.linear * t + self.log_coeff * np.log(t)
        if self.loglog_coeff:
            out = out + self.loglog_coeff * np.log(np.log(t))
        if self.b_curve is not None:
            out = out + np.vectorize(self.b_curve)(t)
        if self.constant is not None:
            out = out + self.constant
        return out if out.ndim else float(out)


def b_of_t(ic: InitialCondition, t: float) -> float:
    """Logarithmic tail-mass centring term at time t.

    Adaptive quadrature of y * exp(sqrt(2) y) U0(y) * gauss(y; t) over the
    positive half line, truncated where the Gaussian factor is below
    exp(-50); the integrand is evaluated in log space so critically decaying
    tails cannot overflow.  Non-decreasing in t.
    """
    if t <= 0:
        raise DomainError("b(t) needs t > 0")
    if ic.tail.rate < SQRT2 - 1e-12:
        raise DomainError(
            "centring term defined for tails at or faster than the critical rate"
        )
    ymax = 10.0 * math.sqrt(t) + 50.0

    def integrand(y):
        if y <= 0.0:
            return 0.0
        lv = float(ic.log_value(y))
        if not math.isfinite(lv):
            return 0.0
        return math.exp(math.log(y) + SQRT2 * y + lv - y * y / (2.0 * t))

    pieces = sorted({0.0, min(max(ic.L0, 0.0) + 1e-12, ymax), math.sqrt(t), ymax})
    val = 0.0
    err = 0.0
    for a, b in zip(pieces[:-1], pieces[1:]):
        v, e = quad(integrand, a, b, limit=400)
        val += v
        err += e
    if err > 1e-6 * max(val, 1.0):
        raise PrecisionError(
            f"b(t) quadrature did not converge: value {val:.6g}, error {err:.2g}"
        )
    return math.log(val + 1.0) / SQRT2


def m_pulled(ic: InitialCondition, t: float, case: str = "auto") -> float:
    """Pulled-front centring term at time t.

    ``case`` is "finite", "infinite" or "auto" (classified from the tail).
    In the finite-mass case the O(1) constant is unknown and omitted here
    (fit it from a trace); in the infinite-mass case the explicit constant
    -(1/sqrt(2)) log sqrt(pi) is included.
    """
    if t < 1.0:
        raise DomainError("centring term needs t >= 1")
    if case == "auto":
        case = "finite" if finite_initial_mass(ic) else "infinite"
    if case not in ("finite", "infinite"):
        raise ParameterError(f"unknown case {case!r}")
    out = SQRT2 * t + LOG_COEFF_PULLED * math.log(t) + b_of_t(ic, t)
    if case == "infinite":
        out += INFINITE_MASS_CONSTANT
    return out


def heat_semigroup_value(ic: InitialCondition, t: float, x: float) -> float:
    """exp(t) times the heat-kernel smoothing of the initial profile at (t, x)."""
    s = math.sqrt(t)
    left = norm.cdf((ic.L0 - x) / s)  # profile is 1 up to its interface

    def integrand(y):
        lv = float(ic.log_value(y))
        if not math.isfinite(lv):
            return 0.0
        return math.exp(lv - (x - y) ** 2 / (2.0 * t)) / math.sqrt(2.0 * math.pi * t)

    hi = max(x + 12.0 * s, ic.L0 + 12.0 * s)
    body, _ = quad(integrand, ic.L0, hi, limit=400)
    return math.exp(t) * (left + body)


def m_slow_decay(ic: InitialCondition, t: float) -> float:
    """Level-1 position of the exponentially grown heat solution.

    Defined for tails strictly slower than the critical rate; located by
    bisection, which is justified because the smoothed profile inherits the
    monotonicity of the initial condition.
    """
    if t < 1e-12:
        raise DomainError("needs t > 0")
    rate = ic.tail.rate
    f = lambda x: heat_semigroup_value(ic, t, x) - 1.0
    lo = ic.L0
    for _ in range(60):  # at small times the level sits left of the interface
        if f(lo) > 0.0:
            break
        lo -= max(math.sqrt(t), 1.0)
    else:
        raise WindowError("level-1 bracket failure on the left")
    speed = 1.0 / rate + rate / 2.0 if rate < SQRT2 else SQRT2
    hi = lo + speed * t + 10.0 * math.sqrt(t) + 10.0
    for _ in range(60):
        if f(hi) < 0.0:
            break
        hi = lo + 2.0 * (hi - lo)
    else:
        raise WindowError("level-1 bracket failure on the right")
    return brentq(f, lo, hi, xtol=1e-10)


def slow_decay_constant(c: float) -> float:
    """Explicit O(1) offset between the front and the heat-solution level set
    for a tail of rate a_c = c - sqrt(c^2 - 2), valid for c > sqrt(2)."""
    if c <= SQRT2:
        raise DomainError("slower-decay regime needs c > sqrt(2)")
    s = math.sqrt(c * c - 2.0)
    a = c - s
    return (math.log(s) + math.log(a)) / a


def heavy_tail_prediction(A: float, nu: float, t: float | None = None) -> AsymptoticPrediction:
    """Front template for critically decaying tails A x^nu exp(-sqrt(2) x).

    Three cases by the polynomial power: below -2 the classical pulled
    template with an unknown constant; at -2 a log log t correction with an
    explicit constant; above -2 a weaker log t correction with an explicit
    constant involving a Gaussian moment (evaluated by quadrature).
    """
    if A <= 0:
        raise DomainError("amplitude must be positive")
    if nu < -2.0:
        return AsymptoticPrediction("finite-mass-pulled", SQRT2, LOG_COEFF_PULLED)
    if nu == -2.0:
        const = math.log(A / (2.0 * math.sqrt(math.pi))) / SQRT2
        return AsymptoticPrediction(
            "heavy-tail-case", SQRT2, LOG_COEFF_PULLED, loglog_coeff=1.0 / SQRT2,
            constant=const,
        )
    moment, err = quad(lambda y: y ** (1.0 + nu) * math.exp(-y * y / 2.0), 0.0, 12.0)
    if err > 1e-9:
        raise PrecisionError(f"moment quadrature error {err:.2g}")
    const = math.log(A / math.sqrt(math.pi) * moment) / SQRT2
    return AsymptoticPrediction(
        "heavy-tail-case", SQRT2, (nu - 1.0) / (2.0 * SQRT2), constant=const
    )


def fit_front(front: FrontTrace, template: AsymptoticPrediction, window) -> tuple:
    """Least-squares constant between a trace and a template over [T1, T2].

    Returns (constant, residual) where the residual is the maximum absolute
    deviation from the fitted constant.
    """
    T1, T2 = float(window[0]), float(window[1])
    if not (T2 >= 2.0 * T1 >= 2.0):
        raise ParameterError("fit window must satisfy T2 >= 2 T1 >= 2")
    if T1 < front.times[0] - 1e-9 or T2 > front.times[-1] + 1e-9:
        raise ParameterError("fit window outside the front trace")
    m = (front.times >= T1) & (front.times <= T2)
    ts = front.times[m]
    base = template.linear * ts + template.log_coeff * np.log(ts)
    if template.loglog_coeff:
        base = base + template.loglog_coeff * np.log(np.log(ts))
    if template.b_curve is not None:
        base = base + np.array([template.b_curve(t) for t in ts])
    dev = front.positions[m] - base
    const = float(dev.mean())
    return const, float(np.abs(dev - const).max())
