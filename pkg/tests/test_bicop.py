import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st
from scipy import integrate, optimize, stats

from expectile_gc.bicop import (
    DEFAULT_CATALOG,
    EPS,
    INDEPENDENCE_COPULA,
    BivariateCopula,
    CopulaFamily,
    _tau_start,
    density,
    empirical_kendall_tau,
    fit_mle,
    h_function,
    h_inverse,
    parse_catalog,
    sample_pair,
    select_family,
)
from expectile_gc.errors import DomainError
from expectile_gc.rng import RandomStream

CASES = [
    ("gaussian", (-0.5,)), ("gaussian", (0.3,)), ("gaussian", (0.9,)),
    ("student", (0.3, 5.0)), ("student", (-0.7, 2.5)), ("student", (0.5, 30.0)),
    ("clayton", (0.5,)), ("clayton", (4.0,)), ("clayton180", (2.0,)),
    ("clayton90", (1.5,)), ("clayton270", (1.5,)),
    ("gumbel", (1.3,)), ("gumbel", (4.0,)), ("gumbel180", (2.0,)),
    ("gumbel90", (2.0,)), ("gumbel270", (2.0,)),
    ("frank", (-5.0,)), ("frank", (2.0,)), ("frank", (15.0,)),
]


def cop(tag, params=()):
    return BivariateCopula(CopulaFamily.parse(tag), params)


unit = st.floats(1e-6, 1 - 1e-6)


def test_family_validation():
    with pytest.raises(DomainError):
        CopulaFamily("gaussian", 90)
    with pytest.raises(DomainError):
        CopulaFamily("joe")
    with pytest.raises(DomainError):
        cop("gaussian", (1.0,))
    with pytest.raises(DomainError):
        cop("student", (0.3, 2.0))
    with pytest.raises(DomainError):
        cop("clayton", (0.0,))
    with pytest.raises(DomainError):
        cop("gumbel", (0.9,))
    with pytest.raises(DomainError):
        cop("frank", (0.0,))
    assert CopulaFamily.parse("Gumbel180") == CopulaFamily("gumbel", 180)
    assert parse_catalog("gaussian, frank") == (CopulaFamily("gaussian"), CopulaFamily("frank"))
    assert parse_catalog(None) == DEFAULT_CATALOG
    with pytest.raises(DomainError):
        parse_catalog("")


def test_density_examples():
    assert density(INDEPENDENCE_COPULA, 0.2, 0.7) == 1.0
    assert density(cop("gaussian", (0.0,)), 0.13, 0.91) == pytest.approx(1.0)
    assert density(cop("gaussian", (0.5,)), 0.5, 0.5) == pytest.approx(1 / math.sqrt(0.75))
    with pytest.raises(DomainError):
        density(INDEPENDENCE_COPULA, 0.0, 0.5)
    with pytest.raises(DomainError):
        h_function(INDEPENDENCE_COPULA, 0.5, 1.0)


def test_h_examples():
    assert h_function(INDEPENDENCE_COPULA, 0.3, 0.8) == pytest.approx(0.3)
    assert h_inverse(INDEPENDENCE_COPULA, 0.3, 0.8) == pytest.approx(0.3)
    c = cop("gaussian", (0.9,))
    # oracle: integrate the density over u in (0, 0.5).  A low conditioning
    # value pulls the conditional mass down, so the conditional CDF at the
    # median is above 1/2; a high one gives a value below 1/2.
    for v, above in ((0.01, True), (0.99, False)):
        numeric = integrate.quad(lambda u: c.pdf(u, v), 0, 0.5, points=[0.01, 0.05], limit=200)[0]
        assert (numeric > 0.5) == above
        assert h_function(c, 0.5, v) == pytest.approx(numeric, abs=1e-6)


@pytest.mark.parametrize("tag,params", CASES)
def test_h_limits_and_monotone(tag, params):
    c = cop(tag, params)
    u = np.linspace(1e-9, 1 - 1e-9, 401)
    for v in (0.02, 0.5, 0.97):
        h = c.h(u, v)
        assert h[0] < 1e-3 and h[-1] > 1 - 1e-3
        assert np.all(np.diff(h) >= -1e-12)
        assert np.all((h > 0) & (h < 1))


@pytest.mark.parametrize("tag,params", CASES)
def test_round_trip(tag, params):
    c = cop(tag, params)
    w, v = RandomStream(1).child(tag, params[0]).uniform((2, 1000))
    assert np.max(np.abs(c.h(c.h_inv(w, v), v) - w)) <= 1e-8


@settings(max_examples=200)
@given(st.sampled_from(CASES), unit, unit)
def test_round_trip_property(case, w, v):
    c = cop(*case)
    # inverses beyond the boundary clamp cannot round-trip by design
    assume(EPS < h_inverse(c, w, v) < 1 - EPS)
    assert abs(h_function(c, h_inverse(c, w, v), v) - w) <= 1e-8


def test_gaussian_hinv_closed_form_vs_numeric_inversion():
    rho = 0.6
    c = cop("gaussian", (rho,))
    for w, v in [(0.1, 0.2), (0.5, 0.9), (0.97, 0.03)]:
        numeric = optimize.brentq(lambda u: c.h(u, v) - w, 1e-12, 1 - 1e-12, xtol=1e-14)
        closed = stats.norm.cdf(stats.norm.ppf(w) * math.sqrt(1 - rho**2) + rho * stats.norm.ppf(v))
        assert h_inverse(c, w, v) == pytest.approx(numeric, abs=1e-9)
        assert h_inverse(c, w, v) == pytest.approx(closed, abs=1e-12)


@pytest.mark.parametrize("tag,params", [
    ("gaussian", (-0.5,)), ("gaussian", (0.3,)), ("gaussian", (0.7,)),
    ("clayton", (0.5,)), ("clayton", (2.0,)), ("clayton180", (1.0,)), ("clayton90", (1.0,)),
    ("gumbel", (1.3,)), ("gumbel", (2.5,)), ("gumbel180", (1.5,)), ("gumbel270", (1.5,)),
    ("frank", (-5.0,)), ("frank", (8.0,)),
])
def test_h_is_cdf_derivative(tag, params):
    c = cop(tag, params)
    g = np.linspace(0.05, 0.95, 20)
    U, V = np.meshgrid(g, g)
    e = 1e-5
    fd = (c.cdf(U, V + e) - c.cdf(U, V - e)) / (2 * e)
    assert np.max(np.abs(fd - c.h(U, V))) <= 1e-5


@pytest.mark.parametrize("tag,params", [
    ("gaussian", (0.3,)), ("student", (0.5, 4.0)), ("clayton", (1.0,)),
    ("gumbel", (1.5,)), ("frank", (-5.0,)),
])
def test_density_integrates_to_one(tag, params):
    g = (np.arange(400) + 0.5) / 400
    U, V = np.meshgrid(g, g)
    assert abs(cop(tag, params).pdf(U, V).mean() - 1) <= 1e-3


@given(unit, unit, st.sampled_from([("clayton", (1.7,)), ("gumbel", (2.2,))]))
def test_rotation_180_identity(u, v, case):
    name, params = case
    base, rot = cop(name, params), cop(name + "180", params)
    assert rot.pdf(u, v) == base.pdf(1 - u, 1 - v)


@given(unit, unit)
def test_swap_is_copula_of_reversed_pair(u, v):
    c = cop("clayton90", (1.2,))
    assert c.swap().pdf(v, u) == pytest.approx(c.pdf(u, v), rel=1e-12)


def test_sample_tau_and_margins():
    n = 10**4
    ind = sample_pair(INDEPENDENCE_COPULA, RandomStream(3), n)
    assert abs(empirical_kendall_tau(ind[:, 0], ind[:, 1])) <= 0.03
    uv = sample_pair(cop("gaussian", (1 / math.sqrt(2),)), RandomStream(4), n)
    assert abs(empirical_kendall_tau(uv[:, 0], uv[:, 1]) - 0.5) <= 0.03
    for col in uv.T:
        assert stats.kstest(col, "uniform").statistic < 0.02


@pytest.mark.parametrize("tag,params", [c for c in CASES if c[0] != "student"] + [("student", (0.5, 5.0))])
def test_kendall_tau_property_matches_samples(tag, params):
    c = cop(tag, params)
    uv = c.sample(RandomStream(5).child(tag), 4000)
    assert empirical_kendall_tau(uv[:, 0], uv[:, 1]) == pytest.approx(c.kendall_tau, abs=0.04)


@pytest.mark.parametrize("tag,truth,lo,hi", [
    ("gaussian", (0.6,), 0.54, 0.66),
    ("clayton", (2.0,), 1.7, 2.3),
])
def test_mle_bands_and_tau_inversion_oracle(tag, truth, lo, hi):
    c = cop(tag, truth)
    uv = c.sample(RandomStream(6).child(tag), 2000)
    fit = fit_mle(c.family, uv)
    assert lo <= fit.copula.params[0] <= hi
    tau = empirical_kendall_tau(uv[:, 0], uv[:, 1])
    oracle = math.sin(math.pi * tau / 2) if tag == "gaussian" else 2 * tau / (1 - tau)
    assert fit.copula.params[0] == pytest.approx(oracle, abs=0.1)


@pytest.mark.parametrize("fam", DEFAULT_CATALOG[1:], ids=lambda f: f.tag)
def test_mle_not_worse_than_start(fam):
    uv = cop("gumbel", (1.6,)).sample(RandomStream(8), 500)
    u, v = uv[:, 0], uv[:, 1]
    fit = fit_mle(fam, u, v)
    start = _tau_start(fam, empirical_kendall_tau(u, v))
    params = (start, fit.copula.params[1]) if fam.name == "student" else (start,)
    start_ll = float(np.sum(BivariateCopula(fam, params).logpdf(u, v)))
    assert fit.log_likelihood >= start_ll - 1e-9
    assert fit.log_likelihood == pytest.approx(float(np.sum(fit.copula.logpdf(u, v))), abs=1e-6)


def test_independent_data_fits_flat():
    uv = INDEPENDENCE_COPULA.sample(RandomStream(9), 2000)
    for fam in DEFAULT_CATALOG:
        fit = fit_mle(fam, uv)
        assert abs(fit.copula.kendall_tau) < 0.05
        assert fit.log_likelihood < 5.0


def test_fit_mle_needs_ten_points():
    with pytest.raises(DomainError):
        fit_mle(CopulaFamily("gaussian"), np.full((9, 2), 0.5))


def test_select_singleton_catalog():
    uv = cop("frank", (4.0,)).sample(RandomStream(10), 300)
    fit = select_family(uv, catalog=[CopulaFamily("clayton")])
    assert fit.copula.family == CopulaFamily("clayton")


def test_select_unknown_criterion():
    with pytest.raises(DomainError):
        select_family(np.full((20, 2), 0.5), criterion="hqc")


@pytest.mark.slow
def test_selection_frequencies():
    rs = RandomStream(11)
    gauss = cop("gaussian", (0.8,))
    hits_g = hits_i = 0
    for k in range(100):
        uv = gauss.sample(rs.child("g", k), 2000)
        hits_g += select_family(uv).copula.family.name == "gaussian"
        uv = INDEPENDENCE_COPULA.sample(rs.child("i", k), 2000)
        hits_i += select_family(uv).copula.is_independence
    assert hits_g >= 90
    assert hits_i >= 80


def test_serialization_round_trip():
    for tag, params in CASES:
        c = cop(tag, params)
        assert BivariateCopula.from_dict(c.to_dict()) == c
