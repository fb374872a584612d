"""Closed-form travelling wave profiles and their derived constants.

The integrated front shape with speed ``c >= sqrt(2)`` is ``Pi_c``; its
density is ``pi_c = -Pi_c'``.  The minimal-speed pair is

    pi_min(y) = 2 y exp(-sqrt(2) y),   Pi_min(x) = (1 + sqrt(2) x) exp(-sqrt(2) x)

on the positive half line (1 to the left, for the integrated shape).  For
c > sqrt(2) the shape is a difference of two exponentials with rates

    a_c = c - sqrt(c^2 - 2),   b_c = c + sqrt(c^2 - 2),   a_c * b_c = 2,

normalised so that Pi_c(0) = 1.  The slope-parametrised family ``Pi_beta_c``
adds a multiple of the density, Pi_c - (beta/2) pi_c, and is non-negative
exactly for c >= c_beta_min(beta).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import lambertw

from .errors import DomainError

SQRT2 = math.sqrt(2.0)

# below this distance from sqrt(2) the degenerate (equal-rate) closed form is used
_DEGENERATE_TOL = 1e-12


@dataclass(frozen=True)
class WaveParams:
    """Wave speed with its derived exponential rates and normaliser.

    ``a_c <= sqrt(2) <= b_c`` with equality exactly at the minimal speed, and
    ``a_c * b_c = 2``.  ``Z_c = 1/(2 sqrt(c^2-2))`` makes Pi_c(0) = 1; it is
    None at the degenerate speed where the two rates merge.
    """

    c: float
    beta: float | None = None

    def __post_init__(self):
        if self.c < SQRT2 - _DEGENERATE_TOL:
            raise DomainError(f"no real travelling wave for c={self.c} < sqrt(2)")
        if self.beta is not None and self.beta <= 0:
            raise DomainError(f"boundary slope must be positive, got {self.beta}")

    @property
    def degenerate(self) -> bool:
        return abs(self.c - SQRT2) <= _DEGENERATE_TOL

    @property
    def a_c(self) -> float:
        if self.degenerate:
            return SQRT2
        return self.c - math.sqrt(self.c * self.c - 2.0)

    @property
    def b_c(self) -> float:
        if self.degenerate:
            return SQRT2
        return self.c + math.sqrt(self.c * self.c - 2.0)

    @property
    def Z_c(self) -> float | None:
        if self.degenerate:
            return None
        return 1.0 / (2.0 * math.sqrt(self.c * self.c - 2.0))


def _check_speed(c: float) -> WaveParams:
    return WaveParams(float(c))


def pi_c(c: float, y) -> np.ndarray | float:
    """Travelling-wave density at speed c, zero on the non-positive half line.

    Evaluated in the cancellation-safe factored form
    ``-(2/delta) exp(-a_c y) expm1(-delta y)`` with ``delta = b_c - a_c``,
    which degrades gracefully as c approaches sqrt(2).
    """
    p = _check_speed(c)
    y = np.asarray(y, dtype=float)
    pos = y > 0
    out = np.zeros_like(y)
    if p.degenerate:
        out[pos] = 2.0 * y[pos] * np.exp(-SQRT2 * y[pos])
    else:
        delta = p.b_c - p.a_c
        out[pos] = -(2.0 / delta) * np.exp(-p.a_c * y[pos]) * np.expm1(-delta * y[pos])
    return out if out.ndim else float(out)


def Pi_c(c: float, x) -> np.ndarray | float:
    """Integrated travelling-wave shape (CCDF convention): 1 for x <= 0, -> 0 at infinity."""
    p = _check_speed(c)
    x = np.asarray(x, dtype=float)
    pos = x > 0
    out = np.ones_like(x)
    if p.degenerate:
        out[pos] = (1.0 + SQRT2 * x[pos]) * np.exp(-SQRT2 * x[pos])
    else:
        delta = p.b_c - p.a_c
        out[pos] = np.exp(-p.a_c * x[pos]) * (
            1.0 - (p.a_c / delta) * np.expm1(-delta * x[pos])
        )
    return out if out.ndim else float(out)


def Pi_min(x) -> np.ndarray | float:
    """Minimal-speed integrated shape."""
    return Pi_c(SQRT2, x)


def pi_min(y) -> np.ndarray | float:
    """Minimal-speed density."""
    return pi_c(SQRT2, y)


def Pi_min_inverse(q) -> np.ndarray | float:
    """Inverse of Pi_min on (0, 1], via the secondary real branch of Lambert W.

    Solves (1 + sqrt(2) x) exp(-sqrt(2) x) = q.  Used for inverse-transform
    sampling of the minimal wave density.
    """
    q = np.asarray(q, dtype=float)
    if np.any(q <= 0) or np.any(q > 1):
        raise DomainError("Pi_min_inverse needs arguments in (0, 1]")
    y = -lambertw(-q / math.e, k=-1).real
    out = (y - 1.0) / SQRT2
    return out if out.ndim else float(out)


def c_beta_min(beta: float) -> float:
    """Minimal speed of a non-negative slope-beta wave: sqrt(2) up to the
    transition slope, beta/2 + 1/beta beyond it (continuous at beta = sqrt(2))."""
    if beta <= 0:
        raise DomainError(f"boundary slope must be positive, got {beta}")
    if beta <= SQRT2:
        return SQRT2
    return beta / 2.0 + 1.0 / beta


def Pi_beta_c(beta: float, c: float, x) -> np.ndarray | float:
    """Slope-beta travelling-wave shape Pi_c(x) - (beta/2) pi_c(x), 1 for x <= 0.

    Defined for every c >= sqrt(2); it is non-negative (and a physical wave)
    if and only if c >= c_beta_min(beta).  Callers wanting only physical
    waves should check ``is_nonnegative_wave``.
    """
    if beta <= 0:
        raise DomainError(f"boundary slope must be positive, got {beta}")
    p = _check_speed(c)
    x = np.asarray(x, dtype=float)
    pos = x > 0
    out = np.ones_like(x)
    if p.degenerate:
        out[pos] = np.exp(-SQRT2 * x[pos]) * (1.0 + (SQRT2 - beta) * x[pos])
    else:
        delta = p.b_c - p.a_c
        slow = (p.b_c - beta) / delta  # coefficient of the slow mode
        fast = (beta - p.a_c) / delta
        if abs(slow) < 1e-12:
            # at the minimal pushed speed the slow mode is structurally absent;
            # dropping its float residue keeps the far tail clean
            out[pos] = fast * np.exp(-p.b_c * x[pos])
        else:
            out[pos] = np.exp(-p.a_c * x[pos]) * (
                slow + fast * np.exp(-delta * x[pos])
            )
    return out if out.ndim else float(out)


def Pi_beta_min(beta: float, x) -> np.ndarray | float:
    """Minimal non-negative slope-beta wave."""
    return Pi_beta_c(beta, c_beta_min(beta), x)


def is_nonnegative_wave(beta: float, c: float, tol: float = 1e-9) -> bool:
    """Whether the slope-beta wave at speed c is a physical (signed-free) wave."""
    return c >= c_beta_min(beta) - tol


def wave_laplace_transform(c: float, r: float) -> float:
    """Closed form of the exponential moment of Pi_c over the positive half line.

    Returns inf when the transform diverges (r >= a_c).  At the minimal speed
    the value is (2 sqrt(2) - r) / (sqrt(2) - r)^2.
    """
    p = _check_speed(c)
    if p.degenerate:
        if r >= SQRT2:
            return math.inf
        return (2.0 * SQRT2 - r) / (SQRT2 - r) ** 2
    if r >= p.a_c:
        return math.inf
    return p.Z_c * (p.b_c / (p.a_c - r) - p.a_c / (p.b_c - r))


def beta_wave_laplace_transform(beta: float, r: float) -> float:
    """Exponential moment of Pi_beta_min over the positive half line (inf if divergent)."""
    c = c_beta_min(beta)
    p = WaveParams(c, beta)
    if p.degenerate:
        # exp(-sqrt(2)x) [1 + (sqrt(2)-beta) x]
        if r >= SQRT2:
            return math.inf
        return 1.0 / (SQRT2 - r) + (SQRT2 - beta) / (SQRT2 - r) ** 2
    # 0.5 Z_c [b(2-a*beta) e^{-ax} - a(2-b*beta) e^{-bx}]; at c_beta_min the
    # a-mode coefficient vanishes (a_c beta = 2)
    ca, cb = 2.0 - p.a_c * beta, 2.0 - p.b_c * beta
    if abs(ca) > 1e-14 and r >= p.a_c:
        return math.inf
    if r >= p.b_c:
        return math.inf
    out = 0.0
    if abs(ca) > 1e-14:
        out += 0.5 * p.Z_c * p.b_c * ca / (p.a_c - r)
    out -= 0.5 * p.Z_c * p.a_c * cb / (p.b_c - r)
    return out
