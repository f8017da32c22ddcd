import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, stats

from expectile_gc.bicop import empirical_kendall_tau
from expectile_gc.dgp import (
    DGP_TABLE,
    GARCH_PARAMS,
    DgpSpec,
    _garch,
    p3_analytic_oracles,
    simulate_dgp,
    skewed_t_moments,
    skewed_t_sample,
)
from expectile_gc.errors import DomainError
from expectile_gc.rng import RandomStream

# transcribed by hand from the model displays:
# tag: (intercept, ar_x, ar_yz, linear, interaction, garch)
PUBLISHED = {
    "S1": (0.0, 0.5, 0.5, 0.0, 0.0, None),
    "S2": (0.05, 0.0, 0.0, 0.0, 0.0, (0.01, 0.08, 0.87)),
    "P1": (0.0, 0.5, 0.5, 0.2, 0.0, None),
    "P2": (0.0, 0.5, 0.25, 0.0, 5.0, None),
    "P3": (0.0, 0.5, 0.0, 0.0, 5.0, None),
    "P4": (0.0, 0.5, 0.0, 0.0, 2.5, (0.01, 0.08, 0.87)),
}


@pytest.mark.parametrize("tag", sorted(PUBLISHED))
def test_constants_table(tag):
    s = DGP_TABLE[tag]
    assert (s.intercept, s.ar_x, s.ar_yz, s.linear, s.interaction, s.garch) == PUBLISHED[tag]
    assert (s.nu, s.xi, s.burn_in) == (5.0, -1.5, 500)
    if s.garch:
        assert s.garch[1] + s.garch[2] == pytest.approx(0.95)
        assert s.unconditional_variance == pytest.approx(0.2)


def test_spec_validation_and_lookup():
    assert DgpSpec.named("p3") == DGP_TABLE["P3"]
    assert DgpSpec.named("P1", linear=0.4).linear == 0.4
    with pytest.raises(DomainError):
        DgpSpec.named("P9")
    with pytest.raises(DomainError):
        DgpSpec("X", garch=(0.01, 0.5, 0.5))
    with pytest.raises(DomainError):
        DgpSpec("X", garch=GARCH_PARAMS, nu=2.0)
    with pytest.raises(DomainError):
        simulate_dgp("S1", 19, RandomStream(0))
    assert DGP_TABLE["S2"].to_dict()["garch"] == [0.01, 0.08, 0.87]


# -- skewed t ----------------------------------------------------------------

def _fs_density(x, nu, k):
    # Fernandez-Steel skewing of a unit-variance t, before standardization
    scale = math.sqrt((nu - 2) / nu)
    base = lambda y: stats.t.pdf(y / scale, nu) / scale
    return 2 / (k + 1 / k) * np.where(x >= 0, base(x / k), base(x * k))


@pytest.mark.parametrize("nu,xi", [(5.0, 1.5), (5.0, 0.7), (10.0, 2.0), (3.5, 1.0)])
def test_moments_against_quadrature(nu, xi):
    mean, sd = skewed_t_moments(nu, xi)
    m1 = integrate.quad(lambda x: x * _fs_density(x, nu, xi), -np.inf, np.inf)[0]
    m2 = integrate.quad(lambda x: x * x * _fs_density(x, nu, xi), -np.inf, np.inf)[0]
    assert mean == pytest.approx(m1, abs=1e-7)
    assert sd == pytest.approx(math.sqrt(m2 - m1 * m1), abs=1e-7)


def test_skewed_t_standardized_and_skewed():
    x = skewed_t_sample(5.0, -1.5, RandomStream(1), 10**6)
    assert abs(x.mean()) <= 0.01
    assert abs(x.var() - 1) <= 0.02
    assert stats.skew(x) < 0


def test_mirror_convention():
    pos = skewed_t_sample(5.0, 1.5, RandomStream(2), 1000)
    neg = skewed_t_sample(5.0, -1.5, RandomStream(2), 1000)
    assert np.array_equal(neg, -pos)


def test_symmetric_case():
    # light tails give the sample skewness a finite variance
    x = skewed_t_sample(30.0, 1.0, RandomStream(3), 10**6)
    assert abs(stats.skew(x)) <= 0.05
    # nu = 5 has no sixth moment, so check symmetry through quantiles
    y = skewed_t_sample(5.0, 1.0, RandomStream(4), 10**6)
    q = np.quantile(y, [0.01, 0.05, 0.25, 0.75, 0.95, 0.99])
    assert np.allclose(q[:3], -q[::-1][:3], atol=0.02)


@pytest.mark.parametrize("nu,xi", [(2.0, 1.5), (1.5, 1.0), (5.0, 0.0), (5.0, float("inf"))])
def test_skewed_t_errors(nu, xi):
    with pytest.raises(DomainError):
        skewed_t_sample(nu, xi, RandomStream(0), 10)


# -- DGP paths -----------------------------------------------------------------

def test_s1_oracles():
    x = simulate_dgp("S1", 10**4, RandomStream(5)).column("x")
    assert abs(np.corrcoef(x[:-1], x[1:])[0, 1] - 0.5) <= 0.05
    assert abs(x.var() - 1 / 0.75) <= 0.05


def test_p3_mean_structure():
    v = simulate_dgp("P3", 10**4, RandomStream(6)).values
    x, y, z = v.T
    assert abs(np.cov(x[1:], y[:-1])[0, 1]) <= 0.05
    design = np.column_stack([x[:-1], y[:-1] * z[:-1]])
    coef = np.linalg.lstsq(design, x[1:], rcond=None)[0]
    assert np.allclose(coef, [0.5, 5.0], atol=0.1)


def test_p1_linear_coefficients():
    v = simulate_dgp("P1", 10**4, RandomStream(7)).values
    design = np.column_stack([np.ones(len(v) - 1), v[:-1]])
    coef = np.linalg.lstsq(design, v[1:, 0], rcond=None)[0]
    assert np.allclose(coef, [0.0, 0.5, 0.2, 0.2], atol=0.05)


@pytest.mark.parametrize("tag", ["S1", "S2"])
def test_size_models_have_independent_columns(tag):
    v = simulate_dgp(tag, 10**4, RandomStream(8)).values
    for i, j in [(0, 1), (0, 2), (1, 2)]:
        assert abs(empirical_kendall_tau(v[:, i], v[:, j])) < 0.04


def test_s2_level_and_volatility_clustering():
    x = simulate_dgp("S2", 10**5, RandomStream(9)).column("x")
    assert abs(x.mean() - 0.05) <= 0.01
    e2 = (x - 0.05) ** 2
    assert np.corrcoef(e2[:-1], e2[1:])[0, 1] > 0.05
    assert stats.skew(x) < 0


@settings(max_examples=30)
@given(st.integers(0, 10**6))
def test_garch_variance_positive_and_finite(seed):
    innov = RandomStream(seed).standard_normal((400, 3)) * 5
    eps = _garch(DGP_TABLE["P4"], innov)
    s2 = np.full(3, 0.2)
    for t in range(400):
        assert np.all(s2 > 0)
        assert np.allclose(eps[t], np.sqrt(s2) * innov[t])
        s2 = 0.01 + 0.08 * eps[t] ** 2 + 0.87 * s2
    assert np.all(np.isfinite(eps))


def test_determinism_and_shape():
    a = simulate_dgp("P4", 200, RandomStream(10))
    b = simulate_dgp("P4", 200, RandomStream(10))
    assert a.columns == ("x", "y", "z") and a.T == 200
    assert a.values.tobytes() == b.values.tobytes()
    assert simulate_dgp("P4", 200, RandomStream(11)).values.tobytes() != a.values.tobytes()


def test_explicit_recursion_without_burn_in():
    # P2 transcribed as a plain loop over the same innovations
    spec = DgpSpec.named("P2", burn_in=0)
    T = 50
    e = RandomStream(12).child("innovations").standard_normal((T + 1, 3))
    x, y, z = np.zeros(T + 1), np.zeros(T + 1), np.zeros(T + 1)
    x[0], y[0], z[0] = e[0]
    for t in range(1, T + 1):
        y[t] = 0.25 * y[t - 1] + e[t, 1]
        z[t] = 0.25 * z[t - 1] + e[t, 2]
        x[t] = 0.5 * x[t - 1] + 5 * y[t - 1] * z[t - 1] + e[t, 0]
    got = simulate_dgp(spec, T, RandomStream(12)).values
    assert np.allclose(got, np.column_stack([x, y, z])[1:], atol=1e-12)


# -- P3 oracles ------------------------------------------------------------------

def test_p3_oracles():
    o = p3_analytic_oracles(10**6, RandomStream(13))
    assert abs(o.mse_restricted - 26) <= 0.5
    assert abs(o.mse_unrestricted - 1) <= 0.05
    assert abs(o.c_half) <= 0.02
    assert abs(o.standardized_mean) <= 0.01 and abs(o.standardized_variance - 1) <= 0.01
    assert o.standardized_ks < 0.005
    for tau, (emp, exact) in o.expectile_checks.items():
        assert emp == pytest.approx(exact, abs=0.01)
    with pytest.raises(DomainError):
        p3_analytic_oracles(10**4, RandomStream(0))
