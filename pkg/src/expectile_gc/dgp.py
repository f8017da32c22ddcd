"""Simulation designs S1, S2 and P1-P4 and the standardized skewed Student-t.

All six designs share the form

    X_t = c + a_x X_{t-1} + b (Y_{t-1} + Z_{t-1}) + g Y_{t-1} Z_{t-1} + e_{x,t}
    Y_t = c + a_yz Y_{t-1} + e_{y,t},   Z_t = c + a_yz Z_{t-1} + e_{z,t}

with Gaussian or GARCH(1,1)/skewed-t innovations; the constants are kept in
``DGP_TABLE``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import signal, special, stats

from .errors import DomainError
from .expectile import empirical_expectile, normal_expectile
from .mvine import MIN_ROWS, SeriesPanel
from .rng import as_stream

COLUMNS = ("x", "y", "z")
GARCH_PARAMS = (0.01, 0.08, 0.87)      # (omega, alpha, beta)
SSTD_PARAMS = (5.0, -1.5)              # (nu, xi)
DEFAULT_BURN_IN = 500


@dataclass(frozen=True)
class DgpSpec:
    tag: str
    intercept: float = 0.0
    ar_x: float = 0.0
    ar_yz: float = 0.0
    linear: float = 0.0
    interaction: float = 0.0
    garch: tuple | None = None
    nu: float = SSTD_PARAMS[0]
    xi: float = SSTD_PARAMS[1]
    burn_in: int = DEFAULT_BURN_IN

    def __post_init__(self):
        if self.garch is not None:
            omega, alpha, beta = self.garch
            if not (omega > 0 and alpha >= 0 and beta >= 0 and alpha + beta < 1):
                raise DomainError("GARCH needs omega > 0 and alpha + beta < 1")
            if self.nu <= 2:
                raise DomainError("skewed-t innovations need nu > 2")
        if self.burn_in < 0:
            raise DomainError("burn_in must be >= 0")

    @property
    def heavy_tailed(self) -> bool:
        return self.garch is not None

    @property
    def unconditional_variance(self) -> float | None:
        if self.garch is None:
            return None
        omega, alpha, beta = self.garch
        return omega / (1.0 - alpha - beta)

    @classmethod
    def named(cls, tag: str, **overrides) -> "DgpSpec":
        key = str(tag).upper()
        if key not in DGP_TABLE:
            raise DomainError(f"unknown DGP {tag!r}; choose from {sorted(DGP_TABLE)}")
        return replace(DGP_TABLE[key], **overrides)

    def to_dict(self) -> dict:
        return {
            "tag": self.tag, "intercept": self.intercept, "ar_x": self.ar_x, "ar_yz": self.ar_yz,
            "linear": self.linear, "interaction": self.interaction,
            "garch": list(self.garch) if self.garch else None,
            "nu": self.nu, "xi": self.xi, "burn_in": self.burn_in,
        }


DGP_TABLE = {
    "S1": DgpSpec("S1", ar_x=0.5, ar_yz=0.5),
    "S2": DgpSpec("S2", intercept=0.05, garch=GARCH_PARAMS),
    "P1": DgpSpec("P1", ar_x=0.5, ar_yz=0.5, linear=0.2),
    "P2": DgpSpec("P2", ar_x=0.5, ar_yz=0.25, interaction=5.0),
    "P3": DgpSpec("P3", ar_x=0.5, interaction=5.0),
    "P4": DgpSpec("P4", ar_x=0.5, interaction=2.5, garch=GARCH_PARAMS),
}


def _abs_moment(nu: float) -> float:
    """E|T| for a unit-variance Student-t with nu degrees of freedom."""
    return (2.0 * math.sqrt(nu - 2.0) * math.exp(special.gammaln((nu + 1) / 2) - special.gammaln(nu / 2))
            / (math.sqrt(math.pi) * (nu - 1.0)))


def skewed_t_moments(nu: float, xi: float) -> tuple[float, float]:
    """Mean and standard deviation of the unstandardized skewed t with shape |xi|."""
    k = abs(xi)
    m1 = _abs_moment(nu)
    mean = m1 * (k - 1.0 / k)
    var = (1.0 - m1 * m1) * (k * k + 1.0 / (k * k)) + 2.0 * m1 * m1 - 1.0
    return mean, math.sqrt(var)


def skewed_t_sample(nu: float, xi: float, rng, n: int) -> np.ndarray:
    """Standardized (mean 0, variance 1) Fernandez-Steel skewed Student-t draws.

    The base is a unit-variance t; a draw lands on the right with
    probability xi^2 / (1 + xi^2) and is scaled by xi there and by 1/xi on
    the left.  A negative ``xi`` mirrors the draws of shape ``|xi|``, so
    ``xi < 0`` gives negative skewness.
    """
    if not nu > 2:
        raise DomainError("skewed_t_sample needs nu > 2")
    if xi == 0 or not math.isfinite(xi):
        raise DomainError("xi must be finite and nonzero")
    k = abs(xi)
    g = as_stream(rng).generator()
    t = np.abs(g.standard_t(nu, size=n)) * math.sqrt((nu - 2.0) / nu)
    right = g.random(n) < k * k / (1.0 + k * k)
    x = np.where(right, k * t, -t / k)
    mean, sd = skewed_t_moments(nu, xi)
    z = (x - mean) / sd
    return -z if xi < 0 else z


def _garch(spec: DgpSpec, innov: np.ndarray) -> np.ndarray:
    omega, alpha, beta = spec.garch
    n, k = innov.shape
    eps = np.empty_like(innov)
    s2 = np.full(k, spec.unconditional_variance)
    for t in range(n):
        eps[t] = np.sqrt(s2) * innov[t]
        s2 = omega + alpha * eps[t] ** 2 + beta * s2
    return eps


def simulate_dgp(spec: DgpSpec | str, T: int, rng) -> SeriesPanel:
    """Simulate ``burn_in + T`` steps and return the last T rows as (x, y, z)."""
    if isinstance(spec, str):
        spec = DgpSpec.named(spec)
    if T < MIN_ROWS:
        raise DomainError(f"T must be >= {MIN_ROWS}")
    stream = as_stream(rng)
    n = spec.burn_in + T + 1
    if spec.garch is None:
        innov = stream.child("innovations").standard_normal((n, 3))
        eps = innov
    else:
        innov = np.column_stack([
            skewed_t_sample(spec.nu, spec.xi, stream.child("innovations", c), n) for c in COLUMNS
        ])
        eps = _garch(spec, innov)
    # Y and Z are exogenous AR(1) recursions started at zero
    yz = signal.lfilter([1.0], [1.0, -spec.ar_yz], spec.intercept + eps[:, 1:], axis=0)
    y, z = yz[:, 0], yz[:, 1]
    drive = np.empty(n)
    drive[0] = spec.intercept + eps[0, 0]
    drive[1:] = (spec.intercept + spec.linear * (y[:-1] + z[:-1])
                 + spec.interaction * y[:-1] * z[:-1] + eps[1:, 0])
    x = signal.lfilter([1.0], [1.0, -spec.ar_x], drive)
    keep = slice(n - T, n)
    return SeriesPanel(COLUMNS, np.column_stack([x[keep], y[keep], z[keep]]))


@dataclass(frozen=True)
class P3Oracles:
    mse_restricted: float
    mse_unrestricted: float
    standardized_mean: float
    standardized_variance: float
    standardized_ks: float
    c_half: float
    expectile_checks: dict


def p3_analytic_oracles(T_mc: int, rng, taus=(0.1, 0.5, 0.9)) -> P3Oracles:
    """Monte-Carlo checks of the closed-form P3 prediction errors.

    ``expectile_checks[tau]`` pairs the empirical tau-expectile of
    (X_t - 0.5 X_{t-1}) / sqrt(25 Y_{t-1}^2 + 1) with k_tau of N(0, 1).
    """
    if T_mc < 100_000:
        raise DomainError("T_mc must be >= 1e5")
    panel = simulate_dgp(DgpSpec.named("P3"), T_mc, rng)
    x, y, z = panel.values.T
    r_restricted = x[1:] - 0.5 * x[:-1]
    r_unrestricted = r_restricted - 5.0 * y[:-1] * z[:-1]
    std = r_restricted / np.sqrt(25.0 * y[:-1] ** 2 + 1.0)
    checks = {float(t): (empirical_expectile(std, t), normal_expectile(t)) for t in taus}
    return P3Oracles(
        mse_restricted=float(np.mean(r_restricted ** 2)),
        mse_unrestricted=float(np.mean(r_unrestricted ** 2)),
        standardized_mean=float(np.mean(std)),
        standardized_variance=float(np.var(std)),
        standardized_ks=float(stats.kstest(std, "norm").statistic),
        c_half=empirical_expectile(r_restricted, 0.5),
        expectile_checks=checks,
    )
