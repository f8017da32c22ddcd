"""Asymmetric quadratic loss and expectiles.

The tau-expectile of a sample is the unique root of the score

    z(m) = (1/N) * sum_i psi(x_i, m),
    psi(x, m) = 2 * tau * (m - x)        if m <= x
              = 2 * (1 - tau) * (m - x)  if m >  x,

which is continuous, strictly increasing and piecewise linear in ``m``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from .errors import DomainError, NumericError


@dataclass(frozen=True)
class ExpectileLevel:
    tau: float

    def __post_init__(self):
        t = float(self.tau)
        if not (0.0 < t < 1.0) or math.isnan(t):
            raise DomainError(f"expectile level must lie in (0, 1), got {self.tau!r}")
        object.__setattr__(self, "tau", t)

    def __float__(self):
        return self.tau


@dataclass(frozen=True)
class ExpectileSolveSettings:
    abs_tolerance: float = 1e-10
    max_iterations: int = 100

    def __post_init__(self):
        if not self.abs_tolerance > 0:
            raise DomainError("abs_tolerance must be positive")
        if int(self.max_iterations) < 1:
            raise DomainError("max_iterations must be >= 1")


DEFAULT_SETTINGS = ExpectileSolveSettings()


def as_tau(tau) -> float:
    if isinstance(tau, ExpectileLevel):
        return tau.tau
    return ExpectileLevel(tau).tau


def _finite(a, what):
    arr = np.asarray(a, dtype=float)
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what} must be finite")
    return arr


def asymmetric_loss(tau, residual):
    """R_tau(r) = tau * r_+^2 + (1 - tau) * r_-^2, elementwise."""
    t = as_tau(tau)
    r = _finite(residual, "residual")
    out = np.where(r >= 0, t, 1.0 - t) * r * r
    return float(out) if out.ndim == 0 else out


def loss_derivative(tau, x, m):
    """Derivative of ``R_tau(x - m)`` with respect to ``m``."""
    t = as_tau(tau)
    x = _finite(x, "x")
    m = _finite(m, "m")
    out = 2.0 * np.where(m <= x, t, 1.0 - t) * (m - x)
    return float(out) if out.ndim == 0 else out


def expectile_score(sample, tau, m):
    """z_{tau,N}(m), the mean of ``loss_derivative`` over the sample."""
    x = np.asarray(sample, dtype=float)
    t = as_tau(tau)
    w = np.where(x >= m, t, 1.0 - t)
    return float(2.0 * np.mean(w * (m - x)))


def empirical_expectile(sample, tau, settings: ExpectileSolveSettings = DEFAULT_SETTINGS) -> float:
    """Empirical tau-expectile by safeguarded Newton on the score.

    Each Newton step jumps to the root of the current linear piece, i.e. the
    asymmetrically weighted mean; a step leaving the current bracket is
    replaced by bisection.
    """
    x = _finite(sample, "sample").ravel()
    if x.size == 0:
        raise DomainError("empirical_expectile needs a nonempty sample")
    return float(empirical_expectile_rows(x[None, :], tau, settings)[0])


def empirical_expectile_rows(samples, tau, settings: ExpectileSolveSettings = DEFAULT_SETTINGS) -> np.ndarray:
    """Row-wise empirical expectiles of a 2-D array (one sample per row)."""
    t = as_tau(tau)
    x = np.asarray(samples, dtype=float)
    if x.ndim != 2 or x.shape[1] == 0:
        raise DomainError("expected a 2-D array with at least one column")
    tol = settings.abs_tolerance
    lo = x.min(axis=1)
    hi = x.max(axis=1)
    m = x.mean(axis=1)
    n = x.shape[1]
    out = m.copy()
    degenerate = lo == hi
    out[degenerate] = lo[degenerate]
    active = np.flatnonzero(~degenerate)
    if active.size == 0:
        return out
    xa, lo, hi, m = x[active], lo[active], hi[active], m[active]
    done = np.zeros(active.size, dtype=bool)
    for _ in range(int(settings.max_iterations)):
        w = np.where(xa >= m[:, None], t, 1.0 - t)
        sw = w.sum(axis=1)
        z = 2.0 * (m * sw - (w * xa).sum(axis=1)) / n
        done |= np.abs(z) <= tol
        if done.all():
            break
        neg = z < 0
        lo = np.where(neg & ~done, m, lo)
        hi = np.where(~neg & ~done, m, hi)
        step = (w * xa).sum(axis=1) / sw
        inside = (step > lo) & (step < hi)
        stalled = step == m
        new_m = np.where(inside & ~stalled, step, 0.5 * (lo + hi))
        # a Newton fixed point is the exact root of its linear piece
        exact = stalled & ~done
        done |= exact
        m = np.where(done, m, new_m)
        # bracket collapsed to adjacent floats: nothing left to resolve
        collapsed = ~done & (np.nextafter(lo, hi) >= hi)
        done |= collapsed
    else:
        w = np.where(xa >= m[:, None], t, 1.0 - t)
        z = 2.0 * (m * w.sum(axis=1) - (w * xa).sum(axis=1)) / n
        bad = ~(done | (np.abs(z) <= tol))
        if bad.any():
            i = int(np.flatnonzero(bad)[0])
            raise NumericError(
                f"expectile solver did not converge in {settings.max_iterations} iterations",
                bracket=(float(lo[i]), float(hi[i])),
            )
    out[active] = m
    return out


def _normal_score(m, tau):
    upper = special.ndtr(-m)
    pdf = math.exp(-0.5 * m * m) / math.sqrt(2.0 * math.pi)
    above = pdf - m * upper            # E(U - m)_+
    below = pdf + m * (1.0 - upper)    # E(m - U)_+
    return (1.0 - tau) * below - tau * above


def normal_expectile(tau, mean: float = 0.0, stdev: float = 1.0) -> float:
    """Closed-form-moment expectile of N(mean, stdev^2)."""
    t = as_tau(tau)
    if not (math.isfinite(mean) and math.isfinite(stdev)) or stdev < 0:
        raise DomainError("normal_expectile needs finite mean and stdev >= 0")
    if t == 0.5 or stdev == 0:
        return float(mean)
    k = optimize.brentq(_normal_score, -40.0, 40.0, args=(t,), xtol=1e-14, rtol=4 * np.finfo(float).eps)
    return float(mean + stdev * k)


def mean_expectile_loss(sample_pairs, tau) -> float:
    """Mean R_tau loss over ``(observation, predicted_expectile)`` pairs."""
    pairs = np.asarray(sample_pairs, dtype=float)
    if pairs.size == 0:
        raise DomainError("mean_expectile_loss needs at least one pair")
    pairs = pairs.reshape(-1, 2)
    return float(np.mean(asymmetric_loss(tau, pairs[:, 0] - pairs[:, 1])))
