"""Parametric bivariate copulas: densities, h-functions, inverses, fitting.

Conventions
-----------
``h(u, v)`` is the conditional distribution P(U <= u | V = v) = dC/dv and
``h_inv`` inverts it in ``u``.  Conditioning on the first argument goes
through :meth:`BivariateCopula.swap`, since every base family here is
exchangeable.  A rotation by ``r`` degrees means the copula of

    90:  (1 - U, V)      180: (1 - U, 1 - V)      270: (U, 1 - V)

where (U, V) follows the unrotated family.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate, optimize, special, stats

from .errors import DomainError, NumericError

EPS = 1e-10
FAMILY_NAMES = ("independence", "gaussian", "student", "clayton", "gumbel", "frank")
ROTATABLE = ("clayton", "gumbel")
STUDENT_DOF_GRID = (2.5, 3.0, 4.0, 5.0, 7.0, 10.0, 15.0, 30.0)

RHO_MAX = 0.999
CLAYTON_BOUNDS = (1e-4, 28.0)
GUMBEL_BOUNDS = (1.0, 17.0)
FRANK_BOUNDS = (-35.0, 35.0)
FRANK_ZERO = 1e-6


@dataclass(frozen=True)
class CopulaFamily:
    name: str
    rotation: int = 0

    def __post_init__(self):
        if self.name not in FAMILY_NAMES:
            raise DomainError(f"unknown copula family {self.name!r}")
        if self.rotation not in (0, 90, 180, 270):
            raise DomainError(f"rotation must be 0, 90, 180 or 270, got {self.rotation!r}")
        if self.rotation and self.name not in ROTATABLE:
            raise DomainError(f"{self.name} copulas cannot be rotated")

    @property
    def n_params(self) -> int:
        return {"independence": 0, "student": 2}.get(self.name, 1)

    @property
    def tag(self) -> str:
        return f"{self.name}{self.rotation}" if self.rotation else self.name

    @classmethod
    def parse(cls, tag: str) -> "CopulaFamily":
        tag = tag.strip().lower()
        for r in (90, 180, 270):
            if tag.endswith(str(r)) and tag[: -len(str(r))] in ROTATABLE:
                return cls(tag[: -len(str(r))], r)
        if tag.endswith("0") and tag[:-1] in ROTATABLE:
            return cls(tag[:-1], 0)
        return cls(tag)

    def swapped(self) -> "CopulaFamily":
        return CopulaFamily(self.name, {90: 270, 270: 90}.get(self.rotation, self.rotation))


INDEPENDENCE = CopulaFamily("independence")
DEFAULT_CATALOG = (
    INDEPENDENCE,
    CopulaFamily("gaussian"),
    CopulaFamily("student"),
    CopulaFamily("clayton", 0),
    CopulaFamily("clayton", 180),
    CopulaFamily("gumbel", 0),
    CopulaFamily("gumbel", 180),
    CopulaFamily("frank"),
)


def parse_catalog(spec) -> tuple:
    if spec is None:
        return DEFAULT_CATALOG
    if isinstance(spec, str):
        spec = [s for s in spec.split(",") if s.strip()]
    cat = tuple(s if isinstance(s, CopulaFamily) else CopulaFamily.parse(s) for s in spec)
    if not cat:
        raise DomainError("copula catalog must not be empty")
    return cat


def _clip(u):
    return np.clip(np.asarray(u, dtype=float), EPS, 1.0 - EPS)


def _check_unit(*arrays):
    for a in arrays:
        a = np.asarray(a, dtype=float)
        if np.any(~(a > 0.0) | ~(a < 1.0)):
            raise DomainError("copula arguments must lie strictly inside (0, 1)")


# ---------------------------------------------------------------------------
# base (unrotated) families; u, v already clipped, broadcastable arrays


def _gauss_logpdf(u, v, rho):
    x, y = special.ndtri(u), special.ndtri(v)
    r2 = 1.0 - rho * rho
    return -0.5 * np.log(r2) - (rho * rho * (x * x + y * y) - 2.0 * rho * x * y) / (2.0 * r2)


def _gauss_h(u, v, rho):
    return special.ndtr((special.ndtri(u) - rho * special.ndtri(v)) / math.sqrt(1.0 - rho * rho))


def _gauss_hinv(w, v, rho):
    return special.ndtr(special.ndtri(w) * math.sqrt(1.0 - rho * rho) + rho * special.ndtri(v))


def _gauss_cdf(u, v, rho):
    x, y = special.ndtri(u), special.ndtri(v)
    pts = np.stack(np.broadcast_arrays(x, y), axis=-1)
    return np.asarray(
        stats.multivariate_normal.cdf(pts, mean=[0.0, 0.0], cov=[[1.0, rho], [rho, 1.0]], abseps=1e-12, releps=1e-12)
    )


def _t_ppf(nu, p):
    """Student-t quantile through the inverse regularized incomplete beta."""
    p = np.asarray(p, dtype=float)
    d = np.abs(2.0 * p - 1.0)
    tail = d > 0.5
    mag = np.empty_like(d)
    # |T| > x  <=>  nu / (nu + T^2) < nu / (nu + x^2) ~ Beta(nu/2, 1/2)
    z = special.betaincinv(0.5 * nu, 0.5, 1.0 - d[tail])
    mag[tail] = np.sqrt(nu * (1.0 - z) / z)
    # |T| <= x  <=>  T^2 / (nu + T^2) ~ Beta(1/2, nu/2)
    w = special.betaincinv(0.5, 0.5 * nu, d[~tail])
    mag[~tail] = np.sqrt(nu * w / (1.0 - w))
    return np.where(p < 0.5, -mag, mag)


def _t_const(nu):
    return special.gammaln((nu + 2) / 2) + special.gammaln(nu / 2) - 2 * special.gammaln((nu + 1) / 2)


def _t_logpdf_scores(x, y, rho, nu):
    r2 = 1.0 - rho * rho
    q = (x * x - 2.0 * rho * x * y + y * y) / (nu * r2)
    return (
        _t_const(nu)
        - 0.5 * np.log(r2)
        - 0.5 * (nu + 2) * np.log1p(q)
        + 0.5 * (nu + 1) * (np.log1p(x * x / nu) + np.log1p(y * y / nu))
    )


def _t_logpdf(u, v, rho, nu):
    return _t_logpdf_scores(_t_ppf(nu, u), _t_ppf(nu, v), rho, nu)


def _t_h(u, v, rho, nu):
    x, y = _t_ppf(nu, u), _t_ppf(nu, v)
    scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
    return special.stdtr(nu + 1.0, (x - rho * y) / scale)


def _t_hinv(w, v, rho, nu):
    y = _t_ppf(nu, v)
    scale = np.sqrt((nu + y * y) * (1.0 - rho * rho) / (nu + 1.0))
    return special.stdtr(nu, _t_ppf(nu + 1.0, w) * scale + rho * y)


def _clayton_logpdf(u, v, th):
    lu, lv = np.log(u), np.log(v)
    s = np.exp(-th * lu) + np.exp(-th * lv) - 1.0
    return math.log1p(th) - (1.0 + th) * (lu + lv) - (2.0 + 1.0 / th) * np.log(s)


def _clayton_h(u, v, th):
    lu, lv = np.log(u), np.log(v)
    s = np.exp(-th * lu) + np.exp(-th * lv) - 1.0
    return np.exp(-(th + 1.0) * lv - (1.0 + 1.0 / th) * np.log(s))


def _clayton_hinv(w, v, th):
    lv = np.log(v)
    s = 1.0 + np.exp(-th * lv) * np.expm1(-th / (1.0 + th) * np.log(w))
    return np.exp(-np.log(s) / th)


def _clayton_cdf(u, v, th):
    s = u ** (-th) + v ** (-th) - 1.0
    return s ** (-1.0 / th)


def _gumbel_parts(u, v, th):
    a, b = -np.log(u), -np.log(v)
    la, lb = np.log(a), np.log(b)
    log_s = np.logaddexp(th * la, th * lb)
    return a, b, la, lb, log_s, np.exp(log_s / th)


def _gumbel_logpdf(u, v, th):
    a, b, la, lb, log_s, big_a = _gumbel_parts(u, v, th)
    return -big_a + a + b + (th - 1.0) * (la + lb) + (1.0 / th - 2.0) * log_s + np.log(big_a + th - 1.0)


def _gumbel_h(u, v, th):
    a, b, la, lb, log_s, big_a = _gumbel_parts(u, v, th)
    return np.exp(-big_a + b + (1.0 / th - 1.0) * log_s + (th - 1.0) * lb)


def _gumbel_hinv(w, v, th, tol=1e-14, max_iter=100):
    # Solve A + (th - 1) log A = b + (th - 1) log b - log w for A = (a^th + b^th)^(1/th)
    # in y = log A by Newton, safeguarded by bisection on [log b, log max(R, 1)].
    w, v = np.broadcast_arrays(np.asarray(w, dtype=float), np.asarray(v, dtype=float))
    b = -np.log(v)
    lb = np.log(b)
    rhs = b + (th - 1.0) * lb - np.log(w)
    lo = lb.copy()
    hi = np.log(np.maximum(rhs, 1.0))
    y = lo.copy()
    for _ in range(max_iter):
        ey = np.exp(y)
        g = ey + (th - 1.0) * y - rhs
        lo = np.where(g < 0, y, lo)
        hi = np.where(g > 0, y, hi)
        step = y - g / (ey + (th - 1.0))
        ok = (step > lo) & (step < hi)
        y_new = np.where(ok, step, 0.5 * (lo + hi))
        if np.all(np.abs(y_new - y) <= tol * np.maximum(1.0, np.abs(y))):
            y = y_new
            break
        y = y_new
    else:
        raise NumericError("Gumbel h-inverse did not converge")
    # log a = y + log(1 - (b/A)^th) / th
    log_a = y + np.log(-np.expm1(th * (lb - y))) / th
    return np.exp(-np.exp(log_a))


def _gumbel_cdf(u, v, th):
    return np.exp(-_gumbel_parts(u, v, th)[5])


def _frank_logpdf(u, v, th):
    if abs(th) < FRANK_ZERO:
        return np.zeros(np.broadcast(u, v).shape)
    d = -math.expm1(-th)
    den = d - np.expm1(-th * u) * np.expm1(-th * v)
    return math.log(th * d) - th * (u + v) - 2.0 * np.log(np.abs(den))


def _frank_h(u, v, th):
    if abs(th) < FRANK_ZERO:
        return np.broadcast_to(u, np.broadcast(u, v).shape).astype(float)
    d = -math.expm1(-th)
    eu, ev = -np.expm1(-th * u), -np.expm1(-th * v)
    return np.exp(-th * v) * eu / (d - eu * ev)


def _frank_hinv(w, v, th):
    if abs(th) < FRANK_ZERO:
        return np.broadcast_to(w, np.broadcast(w, v).shape).astype(float)
    d = -math.expm1(-th)
    return -np.log1p(-w * d / (w + (1.0 - w) * np.exp(-th * v))) / th


def _frank_cdf(u, v, th):
    if abs(th) < FRANK_ZERO:
        return u * v
    d = -math.expm1(-th)
    return -np.log1p(-np.expm1(-th * u) * np.expm1(-th * v) / d) / th


def _debye1(x):
    if x == 0:
        return 1.0
    val, _ = integrate.quad(lambda t: t / math.expm1(t) if t != 0 else 1.0, 0.0, abs(x))
    d = val / abs(x)
    return d + abs(x) / 2.0 if x < 0 else d


def frank_tau(theta: float) -> float:
    if abs(theta) < FRANK_ZERO:
        return 0.0
    return 1.0 - 4.0 / theta * (1.0 - _debye1(theta))


@lru_cache(maxsize=1)
def _frank_tau_table():
    th = np.concatenate([np.linspace(FRANK_BOUNDS[0], -1e-3, 400), np.linspace(1e-3, FRANK_BOUNDS[1], 400)])
    return np.array([frank_tau(t) for t in th]), th


def frank_theta_from_tau(tau: float) -> float:
    taus, th = _frank_tau_table()
    return float(np.interp(tau, taus, th))


_BASE = {
    "gaussian": (_gauss_logpdf, _gauss_h, _gauss_hinv, _gauss_cdf),
    "student": (_t_logpdf, _t_h, _t_hinv, None),
    "clayton": (_clayton_logpdf, _clayton_h, _clayton_hinv, _clayton_cdf),
    "gumbel": (_gumbel_logpdf, _gumbel_h, _gumbel_hinv, _gumbel_cdf),
    "frank": (_frank_logpdf, _frank_h, _frank_hinv, _frank_cdf),
}


def _validate_params(family: CopulaFamily, params: tuple) -> tuple:
    params = tuple(float(p) for p in params)
    if len(params) != family.n_params:
        raise DomainError(f"{family.tag} takes {family.n_params} parameter(s), got {len(params)}")
    if not all(math.isfinite(p) for p in params):
        raise DomainError("copula parameters must be finite")
    name = family.name
    if name in ("gaussian", "student") and not -1.0 < params[0] < 1.0:
        raise DomainError("correlation must lie in (-1, 1)")
    if name == "student" and not params[1] > 2.0:
        raise DomainError("Student-t degrees of freedom must exceed 2")
    if name == "clayton" and not params[0] > 0.0:
        raise DomainError("Clayton parameter must be positive")
    if name == "gumbel" and not params[0] >= 1.0:
        raise DomainError("Gumbel parameter must be >= 1")
    if name == "frank" and params[0] == 0.0:
        raise DomainError("Frank parameter must be nonzero")
    return params


@dataclass(frozen=True)
class BivariateCopula:
    family: CopulaFamily
    params: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "params", _validate_params(self.family, self.params))

    @property
    def is_independence(self) -> bool:
        return self.family.name == "independence"

    @property
    def n_params(self) -> int:
        return self.family.n_params

    # -- evaluation on clipped arrays ------------------------------------
    def _rot_args(self, u, v):
        r = self.family.rotation
        if r == 90:
            return 1.0 - u, v
        if r == 180:
            return 1.0 - u, 1.0 - v
        if r == 270:
            return u, 1.0 - v
        return u, v

    def logpdf(self, u, v):
        u, v = _clip(u), _clip(v)
        if self.is_independence:
            return np.zeros(np.broadcast(u, v).shape)
        bu, bv = self._rot_args(u, v)
        return _BASE[self.family.name][0](bu, bv, *self.params)

    def pdf(self, u, v):
        return np.exp(self.logpdf(u, v))

    def h(self, u, v):
        """P(U <= u | V = v)."""
        u, v = _clip(u), _clip(v)
        if self.is_independence:
            return np.broadcast_to(u, np.broadcast(u, v).shape).copy()
        base_h = _BASE[self.family.name][1]
        r = self.family.rotation
        if r == 90:
            out = 1.0 - base_h(1.0 - u, v, *self.params)
        elif r == 180:
            out = 1.0 - base_h(1.0 - u, 1.0 - v, *self.params)
        elif r == 270:
            out = base_h(u, 1.0 - v, *self.params)
        else:
            out = base_h(u, v, *self.params)
        return np.clip(out, EPS, 1.0 - EPS)

    def h_inv(self, w, v):
        """Inverse of :meth:`h` in its first argument."""
        w, v = _clip(w), _clip(v)
        if self.is_independence:
            return np.broadcast_to(w, np.broadcast(w, v).shape).copy()
        base_hinv = _BASE[self.family.name][2]
        r = self.family.rotation
        if r == 90:
            out = 1.0 - base_hinv(1.0 - w, v, *self.params)
        elif r == 180:
            out = 1.0 - base_hinv(1.0 - w, 1.0 - v, *self.params)
        elif r == 270:
            out = base_hinv(w, 1.0 - v, *self.params)
        else:
            out = base_hinv(w, v, *self.params)
        return np.clip(out, EPS, 1.0 - EPS)

    def swap(self) -> "BivariateCopula":
        """Copula of (V, U)."""
        if self.family.rotation in (90, 270):
            return BivariateCopula(self.family.swapped(), self.params)
        return self

    def h_given_first(self, v, u):
        """P(V <= v | U = u)."""
        return self.swap().h(v, u)

    def h_inv_given_first(self, w, u):
        return self.swap().h_inv(w, u)

    def cdf(self, u, v):
        u, v = _clip(u), _clip(v)
        if self.is_independence:
            return u * v
        base_cdf = _BASE[self.family.name][3]
        if base_cdf is None:
            raise NotImplementedError(f"no closed-form CDF for {self.family.tag}")
        r = self.family.rotation
        if r == 90:
            return v - base_cdf(1.0 - u, v, *self.params)
        if r == 180:
            return u + v - 1.0 + base_cdf(1.0 - u, 1.0 - v, *self.params)
        if r == 270:
            return u - base_cdf(u, 1.0 - v, *self.params)
        return base_cdf(u, v, *self.params)

    @property
    def kendall_tau(self) -> float:
        name = self.family.name
        if name == "independence":
            return 0.0
        if name in ("gaussian", "student"):
            return 2.0 / math.pi * math.asin(self.params[0])
        if name == "clayton":
            t = self.params[0] / (self.params[0] + 2.0)
        elif name == "gumbel":
            t = 1.0 - 1.0 / self.params[0]
        else:
            t = frank_tau(self.params[0])
        return -t if self.family.rotation in (90, 270) else t

    def sample(self, rng, n: int) -> np.ndarray:
        """(n, 2) array of draws with uniform margins."""
        from .rng import as_stream

        if n < 1:
            raise DomainError("sample size must be >= 1")
        uw = as_stream(rng).uniform((2, n))
        return np.column_stack([self.h_inv(uw[1], uw[0]), uw[0]])

    def to_dict(self) -> dict:
        return {"family": self.family.name, "rotation": self.family.rotation, "params": list(self.params)}

    @classmethod
    def from_dict(cls, doc: dict) -> "BivariateCopula":
        return cls(CopulaFamily(doc["family"], int(doc.get("rotation", 0))), tuple(doc.get("params", ())))


INDEPENDENCE_COPULA = BivariateCopula(INDEPENDENCE)


# ---------------------------------------------------------------------------
# module-level operations


def density(c: BivariateCopula, u, v):
    _check_unit(u, v)
    out = c.pdf(u, v)
    return float(out) if np.ndim(out) == 0 else out


def h_function(c: BivariateCopula, u, given_v):
    _check_unit(u, given_v)
    out = c.h(u, given_v)
    return float(out) if np.ndim(out) == 0 else out


def h_inverse(c: BivariateCopula, w, given_v):
    _check_unit(w, given_v)
    out = c.h_inv(w, given_v)
    return float(out) if np.ndim(out) == 0 else out


def sample_pair(c: BivariateCopula, rng, n: int) -> np.ndarray:
    return c.sample(rng, n)


def empirical_kendall_tau(u, v) -> float:
    t = stats.kendalltau(u, v).statistic
    return 0.0 if not np.isfinite(t) else float(t)


def _rotate_data(rotation, u, v):
    if rotation == 90:
        return 1.0 - u, v
    if rotation == 180:
        return 1.0 - u, 1.0 - v
    if rotation == 270:
        return u, 1.0 - v
    return u, v


def _tau_start(family: CopulaFamily, tau: float) -> float:
    name = family.name
    if name in ("gaussian", "student"):
        return float(np.clip(math.sin(math.pi * tau / 2.0), -RHO_MAX, RHO_MAX))
    if family.rotation in (90, 270):
        tau = -tau
    if name == "clayton":
        t = max(tau, 0.0)
        return float(np.clip(2.0 * t / (1.0 - t), *CLAYTON_BOUNDS))
    if name == "gumbel":
        t = max(tau, 0.0)
        return float(np.clip(1.0 / (1.0 - t), *GUMBEL_BOUNDS))
    th = frank_theta_from_tau(tau)
    if abs(th) < 1e-3:
        th = 1e-3 if th >= 0 else -1e-3
    return float(np.clip(th, *FRANK_BOUNDS))


def _bounded_max(fun, bounds, start, xatol):
    """Maximize ``fun`` over ``bounds`` by Brent; never worse than ``start``."""
    res = optimize.minimize_scalar(lambda t: -fun(t), bounds=bounds, method="bounded", options={"xatol": xatol})
    f_start = fun(start)
    best_x, best_f = start, f_start
    if np.isfinite(res.fun) and -res.fun > best_f:
        best_x, best_f = float(res.x), float(-res.fun)
    if not np.isfinite(best_f):
        raise NumericError("copula likelihood is not finite over the parameter range")
    return best_x, best_f


@dataclass(frozen=True)
class FitResult:
    copula: BivariateCopula
    log_likelihood: float

    @property
    def aic(self) -> float:
        return -2.0 * self.log_likelihood + 2.0 * self.copula.n_params

    @property
    def bic_penalty(self) -> float:
        return float(self.copula.n_params)


def fit_mle(family: CopulaFamily, u, v=None, tau_hat: float | None = None) -> FitResult:
    """Maximum likelihood fit of one family to pseudo-observations.

    ``u`` may be an (n, 2) array when ``v`` is omitted.
    """
    if v is None:
        arr = np.asarray(u, dtype=float)
        u, v = arr[:, 0], arr[:, 1]
    u, v = _clip(u), _clip(v)
    if u.size < 10 or u.shape != v.shape:
        raise DomainError("fit_mle needs at least 10 aligned pseudo-observations")
    if family.name == "independence":
        return FitResult(INDEPENDENCE_COPULA, 0.0)
    if tau_hat is None:
        tau_hat = empirical_kendall_tau(u, v)
    start = _tau_start(family, tau_hat)
    name = family.name
    bu, bv = _rotate_data(family.rotation, u, v)

    if name == "gaussian":
        x, y = special.ndtri(bu), special.ndtri(bv)
        sxx, sxy, n = float(np.dot(x, x) + np.dot(y, y)), float(np.dot(x, y)), x.size

        def ll(r):
            r2 = 1.0 - r * r
            return -0.5 * n * math.log(r2) - (r * r * sxx - 2.0 * r * sxy) / (2.0 * r2)

        rho, best = _bounded_max(ll, (-RHO_MAX, RHO_MAX), start, 1e-6)
        return FitResult(BivariateCopula(family, (rho,)), best)

    if name == "student":
        rho0 = start
        scores = {}
        best_nu, best_ll = None, -np.inf
        for nu in STUDENT_DOF_GRID:
            x, y = _t_ppf(nu, bu), _t_ppf(nu, bv)
            scores[nu] = (x, y)
            val = float(np.sum(_t_logpdf_scores(x, y, rho0, nu)))
            if val > best_ll:
                best_nu, best_ll = nu, val
        x, y = scores[best_nu]
        rho, best = _bounded_max(
            lambda r: float(np.sum(_t_logpdf_scores(x, y, r, best_nu))), (-RHO_MAX, RHO_MAX), rho0, 1e-6
        )
        return FitResult(BivariateCopula(family, (rho, best_nu)), best)

    if name == "clayton":
        lu, lv = np.log(bu), np.log(bv)
        slog = float(np.sum(lu + lv))

        def ll(th):
            s = np.exp(-th * lu) + np.exp(-th * lv) - 1.0
            return u.size * math.log1p(th) - (1.0 + th) * slog - (2.0 + 1.0 / th) * float(np.sum(np.log(s)))

        th, best = _bounded_max(ll, CLAYTON_BOUNDS, start, 1e-5)
        return FitResult(BivariateCopula(family, (th,)), best)

    if name == "gumbel":
        a, b = -np.log(bu), -np.log(bv)
        la, lb = np.log(a), np.log(b)
        base = float(np.sum(a + b))
        slab = float(np.sum(la + lb))

        def ll(th):
            log_s = np.logaddexp(th * la, th * lb)
            big_a = np.exp(log_s / th)
            return float(
                base + (th - 1.0) * slab
                + np.sum(-big_a + (1.0 / th - 2.0) * log_s + np.log(big_a + th - 1.0))
            )

        th, best = _bounded_max(ll, GUMBEL_BOUNDS, start, 1e-5)
        return FitResult(BivariateCopula(family, (th,)), best)

    # frank
    def ll(th):
        return float(np.sum(_frank_logpdf(bu, bv, th)))

    th, best = _bounded_max(ll, FRANK_BOUNDS, start, 1e-5)
    if abs(th) < FRANK_ZERO:
        th = math.copysign(FRANK_ZERO, th if th != 0 else 1.0)
    return FitResult(BivariateCopula(family, (th,)), best)


def select_family(u, v=None, catalog=DEFAULT_CATALOG, criterion: str = "aic") -> FitResult:
    """Fit every catalog family and keep the information-criterion minimizer.

    Ties go to the earlier catalog entry.
    """
    if v is None:
        arr = np.asarray(u, dtype=float)
        u, v = arr[:, 0], arr[:, 1]
    catalog = parse_catalog(catalog)
    u, v = _clip(u), _clip(v)
    penalty = 2.0 if criterion == "aic" else math.log(max(u.size, 2))
    if criterion not in ("aic", "bic"):
        raise DomainError(f"unknown selection criterion {criterion!r}")
    tau_hat = empirical_kendall_tau(u, v)
    best, best_score, errors = None, np.inf, []
    for fam in catalog:
        try:
            fit = fit_mle(fam, u, v, tau_hat=tau_hat)
        except NumericError as exc:
            errors.append(exc)
            continue
        score = -2.0 * fit.log_likelihood + penalty * fit.copula.n_params
        if score < best_score:
            best, best_score = fit, score
    if best is None:
        raise NumericError(f"every family in the catalog failed to fit: {errors[0]}")
    return best
