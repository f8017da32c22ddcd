"""Empirical marginals: rank transform to pseudo-observations and back."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError


@dataclass(frozen=True, eq=False)
class EmpiricalMarginal:
    """Empirical CDF with rank divisor T+1 and a piecewise-linear inverse.

    ``cdf`` maps sample points to mid-rank/(T+1) and anything outside the
    sample range half a step beyond the end knots, so its image stays inside
    (0, 1).  ``quantile`` interpolates linearly between the knots
    ``(i/(T+1), x_(i))`` and is constant beyond them.
    """

    sorted_values: np.ndarray
    _knot_u: np.ndarray = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        x = np.asarray(self.sorted_values, dtype=float)
        if x.ndim != 1 or x.size < 2:
            raise DomainError("an empirical marginal needs at least 2 values")
        if np.any(np.diff(x) < 0):
            raise DomainError("sorted_values must be nondecreasing")
        x = x.copy()
        x.setflags(write=False)
        object.__setattr__(self, "sorted_values", x)
        t = x.size
        object.__setattr__(self, "_knot_u", np.arange(1, t + 1) / (t + 1.0))

    @property
    def size(self) -> int:
        return self.sorted_values.size

    @property
    def floor(self) -> float:
        return 0.5 / (self.size + 1.0)

    def cdf(self, x):
        xs = self.sorted_values
        x = np.asarray(x, dtype=float)
        n_less = np.searchsorted(xs, x, side="left")
        n_leq = np.searchsorted(xs, x, side="right")
        ties = n_leq - n_less
        rank = np.where(ties > 0, n_less + 0.5 * (ties + 1), n_less)
        u = rank / (self.size + 1.0)
        u = np.where(x < xs[0], self.floor, u)
        u = np.where(x > xs[-1], 1.0 - self.floor, u)
        return float(u) if u.ndim == 0 else u

    def quantile(self, u):
        u = np.asarray(u, dtype=float)
        if np.any(~(u > 0) | ~(u < 1)):
            raise DomainError("quantile level must lie in (0, 1)")
        out = np.interp(u, self._knot_u, self.sorted_values)
        return float(out) if out.ndim == 0 else out

    def __eq__(self, other):
        if not isinstance(other, EmpiricalMarginal):
            return NotImplemented
        return np.array_equal(self.sorted_values, other.sorted_values)

    def __hash__(self):
        return hash(self.sorted_values.tobytes())

    def to_dict(self) -> dict:
        return {"knots": [float(v) for v in self.sorted_values]}

    @classmethod
    def from_dict(cls, doc: dict) -> "EmpiricalMarginal":
        return cls(np.asarray(doc["knots"], dtype=float))


def fit_empirical(sample) -> EmpiricalMarginal:
    x = np.asarray(sample, dtype=float).ravel()
    if x.size < 2:
        raise DomainError("fit_empirical needs at least 2 values")
    if not np.all(np.isfinite(x)):
        raise DomainError("fit_empirical needs finite values")
    return EmpiricalMarginal(np.sort(x))


def pseudo_observations(sample) -> np.ndarray:
    """Mid-ranks divided by T+1; equal to ``fit_empirical(sample).cdf(sample)``."""
    return fit_empirical(sample).cdf(np.asarray(sample, dtype=float))


def log_returns(prices) -> np.ndarray:
    """100 * first difference of log prices."""
    p = np.asarray(prices, dtype=float).ravel()
    if p.size < 2:
        raise DomainError("log_returns needs at least 2 prices")
    if not np.all(np.isfinite(p)) or np.any(p <= 0):
        raise DomainError("log_returns needs strictly positive finite prices")
    return 100.0 * np.diff(np.log(p))
