"""Granger causality in expectiles: statistic, copula bootstrap, F-test baseline.

Part A fits a restricted model on X alone and an unrestricted model on
(X, Z), predicts the tau-expectile of every X_t with t >= T0 from N
conditional draws under each model, and compares mean asymmetric losses
on a log scale.  Part B regenerates that statistic on panels simulated
from the unrestricted model with the lagged Z -> X channel removed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import stats

from . import mvine
from .bicop import DEFAULT_CATALOG, parse_catalog
from .errors import DomainError, EGError, NumericError
from .expectile import as_tau, empirical_expectile_rows
from .mvine import MVineModel, SeriesPanel
from .parallel import pmap
from .rng import RandomStream

RESULT_SCHEMA = "eg-result/1"


@dataclass(frozen=True)
class TestConfig:
    """Settings of one test run.

    ``eval_start`` is the 1-based first evaluation time T0 (default
    ceil(T/2)).  ``refit_marginals=False`` makes bootstrap replicates reuse
    the marginals fitted on the observed panel instead of refitting them.
    ``plus_one`` switches the p-value to (1 + #)/(1 + B).
    ``common_draws=True`` feeds both models and every evaluation time one
    shared block of N uniforms instead of fresh i.i.d. draws.
    """

    __test__ = False  # not a pytest class

    tau: float = 0.5
    n_predictions: int = 200
    eval_start: int | None = None
    n_bootstrap: int = 200
    seed: int = 0
    catalog: tuple = tuple(f.tag for f in DEFAULT_CATALOG)
    criterion: str = "aic"
    refit_marginals: bool = True
    plus_one: bool = False
    failure_cap: float = 0.05
    common_draws: bool = False

    def __post_init__(self):
        object.__setattr__(self, "tau", as_tau(self.tau))
        if int(self.n_predictions) < 2:
            raise DomainError("n_predictions must be >= 2")
        if int(self.n_bootstrap) < 1:
            raise DomainError("n_bootstrap must be >= 1")
        if self.eval_start is not None and int(self.eval_start) < 2:
            raise DomainError("eval_start must be >= 2 (Markov order + 1)")
        if self.criterion not in ("aic", "bic"):
            raise DomainError(f"unknown criterion {self.criterion!r}")
        if not 0 <= self.failure_cap < 1:
            raise DomainError("failure_cap must lie in [0, 1)")
        cat = parse_catalog(self.catalog)
        object.__setattr__(self, "catalog", tuple(f.tag for f in cat))
        object.__setattr__(self, "seed", int(self.seed))

    def start_for(self, T: int) -> int:
        t0 = math.ceil(T / 2) if self.eval_start is None else int(self.eval_start)
        if not 2 <= t0 <= T:
            raise DomainError(f"eval_start {t0} must lie in [2, {T}]")
        return t0

    def to_dict(self) -> dict:
        return {
            "tau": self.tau,
            "n_predictions": self.n_predictions,
            "eval_start": self.eval_start,
            "n_bootstrap": self.n_bootstrap,
            "seed": self.seed,
            "catalog": list(self.catalog),
            "criterion": self.criterion,
            "refit_marginals": self.refit_marginals,
            "plus_one": self.plus_one,
            "common_draws": self.common_draws,
        }


@dataclass(frozen=True)
class Statistic:
    statistic: float
    restricted_loss: float
    unrestricted_loss: float
    restricted_model: MVineModel = field(repr=False, compare=False)
    unrestricted_model: MVineModel = field(repr=False, compare=False)


@dataclass(frozen=True)
class GcTestResult:
    statistic: float
    null_statistics: tuple
    p_value: float
    restricted_loss: float
    unrestricted_loss: float
    effect: str
    causes: tuple
    T: int
    eval_start: int
    config: TestConfig
    failed_replicates: int = 0

    def rejects(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha

    def to_dict(self, include_null: bool = True) -> dict:
        doc = {
            "schema": RESULT_SCHEMA,
            "effect": self.effect,
            "causes": list(self.causes),
            "statistic": self.statistic,
            "p_value": self.p_value,
            "restricted_loss": self.restricted_loss,
            "unrestricted_loss": self.unrestricted_loss,
            "tau": self.config.tau,
            "N": self.config.n_predictions,
            "T": self.T,
            "T0": self.eval_start,
            "B": self.config.n_bootstrap,
            "seed": self.config.seed,
            "failed_replicates": self.failed_replicates,
        }
        if include_null:
            doc["null_statistics"] = list(self.null_statistics)
        return doc


def _fit(panel: SeriesPanel, config: TestConfig, marginals=None) -> MVineModel:
    return mvine.fit(panel, config.catalog, scope="effect", criterion=config.criterion, marginals=marginals)


def _predicted_expectiles(model: MVineModel, cond: np.ndarray, w: np.ndarray, tau: float) -> np.ndarray:
    draws = mvine._predict_from_uniforms(model, cond, w)
    return empirical_expectile_rows(draws, tau)


def gc_statistic(panel: SeriesPanel, config: TestConfig, rng=None, marginals=None) -> Statistic:
    """Part A: log(restricted mean loss / unrestricted mean loss).

    Each model gets its own N i.i.d. conditional draws at every evaluation
    time.  With ``config.common_draws`` one block of N uniforms drives both
    models at all times, so identical models give exactly zero.
    """
    if panel.d < 1:
        raise DomainError("a causality test needs at least one cause column")
    stream = RandomStream(config.seed).child("observed") if rng is None else rng
    T = panel.T
    t0 = config.start_for(T)
    rows = np.arange(t0 - 1, T)                      # 0-based evaluation rows
    target = panel.values[rows, 0]
    restricted_panel = panel.restricted()
    m_r = _fit(restricted_panel, config, None if marginals is None else marginals[:1])
    m_u = _fit(panel, config, marginals)
    if config.common_draws:
        w_r = w_u = stream.child("predict").uniform((1, config.n_predictions))
    else:
        shape = (rows.size, config.n_predictions)
        w_r = stream.child("predict", "restricted").uniform(shape)
        w_u = stream.child("predict", "unrestricted").uniform(shape)
    mu_r = _predicted_expectiles(m_r, panel.values[rows - 1, :1], w_r, config.tau)
    mu_u = _predicted_expectiles(m_u, panel.values[rows - 1], w_u, config.tau)
    tau = config.tau
    loss_r = _mean_loss(target - mu_r, tau)
    loss_u = _mean_loss(target - mu_u, tau)
    if not (loss_r > 0 and loss_u > 0):
        raise NumericError("undefined log-ratio: a mean expectile loss is zero")
    return Statistic(math.log(loss_r / loss_u), loss_r, loss_u, m_r, m_u)


def _mean_loss(residual, tau):
    return float(np.mean(np.where(residual >= 0, tau, 1.0 - tau) * residual * residual))


def p_value_from(observed: float, null_statistics, plus_one: bool = False) -> float:
    null = np.asarray(null_statistics, dtype=float)
    if null.size == 0:
        raise DomainError("need at least one null statistic")
    count = int(np.count_nonzero(null >= observed))
    if plus_one:
        return (1.0 + count) / (1.0 + null.size)
    return count / null.size


def _replicate(job):
    panel, config, b, marginals = job
    stream = RandomStream(config.seed).child("null", b)
    try:
        return gc_statistic(panel, config, stream.child("statistic"), marginals).statistic
    except EGError:
        return None


def null_panels(model: MVineModel, T: int, config: TestConfig, replicates) -> list:
    streams = [RandomStream(config.seed).child("null", b).child("sample") for b in replicates]
    return mvine.simulate_null_sample(model, T, streams, n_paths=len(streams))


def bootstrap_p_value(panel: SeriesPanel, observed: Statistic, config: TestConfig,
                      threads: int | None = 1) -> GcTestResult:
    """Part B: p = (1/B) #{null statistic >= observed}.

    Replicate b draws from ``seed -> "null" -> b`` only, so raising B leaves
    earlier replicates unchanged.  Replicates whose fit or solve fails are
    dropped from numerator and denominator; more than ``failure_cap * B``
    failures abort the test.
    """
    B = config.n_bootstrap
    panels = null_panels(observed.unrestricted_model, panel.T, config, range(B))
    marginals = None if config.refit_marginals else observed.unrestricted_model.marginals
    jobs = [(p, config, b, marginals) for b, p in enumerate(panels)]
    stats_ = pmap(_replicate, jobs, threads)
    failed = sum(s is None for s in stats_)
    if failed > config.failure_cap * B:
        raise NumericError(f"{failed} of {B} bootstrap replicates failed (cap {config.failure_cap:.0%})")
    kept = [s for s in stats_ if s is not None]
    p = p_value_from(observed.statistic, kept, config.plus_one)
    return GcTestResult(
        statistic=observed.statistic,
        null_statistics=tuple(stats_),
        p_value=p,
        restricted_loss=observed.restricted_loss,
        unrestricted_loss=observed.unrestricted_loss,
        effect=panel.effect,
        causes=panel.columns[1:],
        T=panel.T,
        eval_start=config.start_for(panel.T),
        config=config,
        failed_replicates=failed,
    )


@dataclass(frozen=True)
class BootstrapDecision:
    reject: bool
    p_value: float | None
    replicates_used: int
    failed_replicates: int


def bootstrap_decision(panel: SeriesPanel, observed: Statistic, config: TestConfig, alpha: float = 0.05,
                       threads: int | None = 1) -> BootstrapDecision:
    """Reject / do-not-reject at level ``alpha`` with early stopping.

    Replicates are evaluated in index order and the loop stops as soon as
    the exceedance count alone forces p >= alpha.  The decision is always
    the one the full B-replicate run would reach; ``p_value`` is reported
    only when every replicate was evaluated.
    """
    B = config.n_bootstrap
    cap = config.failure_cap * B
    panels = null_panels(observed.unrestricted_model, panel.T, config, range(B))
    marginals = None if config.refit_marginals else observed.unrestricted_model.marginals
    step = 1 if threads == 1 else 2 * max(1, threads or 1)
    count = failed = 0
    kept = []
    for start in range(0, B, step):
        jobs = [(panels[b], config, b, marginals) for b in range(start, min(B, start + step))]
        for s in pmap(_replicate, jobs, threads):
            if s is None:
                failed += 1
            else:
                kept.append(s)
                count += s >= observed.statistic
        if failed > cap:
            raise NumericError(f"{failed} of {B} bootstrap replicates failed (cap {config.failure_cap:.0%})")
        used = min(B, start + step)
        floor = (1.0 + count) / (1.0 + B) if config.plus_one else count / B
        if floor >= alpha and used < B:
            return BootstrapDecision(False, None, used, failed)
    p = p_value_from(observed.statistic, kept, config.plus_one)
    return BootstrapDecision(p < alpha, p, B, failed)


def run_joint_test(panel: SeriesPanel, config: TestConfig, threads: int | None = 1) -> GcTestResult:
    """Test (Z1, ..., Zd) -> X with every non-effect column as a cause."""
    observed = gc_statistic(panel, config)
    return bootstrap_p_value(panel, observed, config, threads)


def run_pairwise_test(panel: SeriesPanel, cause_column: str, config: TestConfig,
                      threads: int | None = 1) -> GcTestResult:
    if cause_column == panel.effect:
        raise DomainError("the cause column must differ from the effect column")
    sub = panel.select([panel.effect, cause_column])
    return run_joint_test(sub, config, threads)


@dataclass(frozen=True)
class FTestResult:
    statistic: float
    p_value: float
    df: tuple

    def rejects(self, alpha: float = 0.05) -> bool:
        return self.p_value < alpha


def linear_f_test(panel: SeriesPanel, lags: int = 1) -> FTestResult:
    """Classical Granger F-test in the mean with one lag."""
    if lags != 1:
        raise DomainError("only one lag is supported")
    d = panel.d
    if d < 1:
        raise DomainError("the F-test needs at least one cause column")
    v = panel.values
    n = panel.T - 1
    if n <= d + 2:
        raise DomainError("too few observations for the F-test")
    y = v[1:, 0]
    ones = np.ones(n)
    xr = np.column_stack([ones, v[:-1, 0]])
    xu = np.column_stack([ones, v[:-1]])
    if np.linalg.matrix_rank(xu) < xu.shape[1]:
        raise NumericError("collinear regressors in the F-test")
    rss_r = _rss(xr, y)
    rss_u = _rss(xu, y)
    # denominator df T-2-d, i.e. (T-1) - (d+1) as specified for this test
    df2 = panel.T - 2 - d
    if rss_u <= 0:
        raise NumericError("perfect unrestricted fit in the F-test")
    f = ((rss_r - rss_u) / d) / (rss_u / df2)
    return FTestResult(float(f), float(stats.f.sf(f, d, df2)), (d, df2))


def _rss(x, y):
    beta, *_ = np.linalg.lstsq(x, y, rcond=None)
    r = y - x @ beta
    return float(r @ r)
