import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from expectile_gc.errors import DomainError
from expectile_gc.marginals import EmpiricalMarginal, fit_empirical, log_returns, pseudo_observations
from expectile_gc.rng import RandomStream

finite = st.floats(-1e6, 1e6, allow_nan=False, allow_infinity=False)
samples = st.lists(finite, min_size=2, max_size=80)


def test_cdf_examples():
    m = fit_empirical([3, 1, 2])
    assert m.cdf(2) == 0.5
    assert m.cdf(0) == 0.125
    assert m.cdf(10) == 1 - 0.125


def test_quantile_median_knot():
    assert fit_empirical([1, 2, 3]).quantile(0.5) == 2.0


def test_mid_ranks_for_ties():
    m = fit_empirical([1, 2, 2, 3])
    # ranks 2 and 3 share the mid-rank 2.5
    assert m.cdf(2) == pytest.approx(2.5 / 5)


def test_fit_errors():
    with pytest.raises(DomainError):
        fit_empirical([1.0])
    with pytest.raises(DomainError):
        fit_empirical([1.0, float("nan")])
    with pytest.raises(DomainError):
        EmpiricalMarginal(np.array([2.0, 1.0]))


@pytest.mark.parametrize("u", [0.0, 1.0, -0.1, 1.2])
def test_quantile_domain(u):
    with pytest.raises(DomainError):
        fit_empirical([1, 2, 3]).quantile(u)


@settings(max_examples=200)
@given(st.lists(finite, min_size=2, max_size=80, unique=True))
def test_round_trip_on_knots(xs):
    m = fit_empirical(xs)
    assert np.array_equal(m.quantile(m.cdf(np.array(xs))), np.array(xs))


@given(samples, finite, finite)
def test_cdf_monotone_and_interior(xs, a, b):
    m = fit_empirical(xs)
    lo, hi = sorted((a, b))
    assert m.cdf(lo) <= m.cdf(hi)
    assert 0 < m.cdf(lo) and m.cdf(hi) < 1


@given(samples, st.floats(1e-6, 1 - 1e-6), st.floats(1e-6, 1 - 1e-6))
def test_quantile_monotone_and_bounded(xs, u1, u2):
    m = fit_empirical(xs)
    lo, hi = sorted((u1, u2))
    assert m.quantile(lo) <= m.quantile(hi)
    assert min(xs) <= m.quantile(lo) <= max(xs)


def test_pit_uniformity():
    x = RandomStream(7).standard_normal(500) ** 3
    u = pseudo_observations(x)
    assert abs(u.mean() - 0.5) <= 0.02
    assert abs(u.var() - 1 / 12) <= 0.02
    assert np.allclose(u, fit_empirical(x).cdf(x))


def test_marginal_is_immutable_and_hashable():
    m = fit_empirical([3.0, 1.0, 2.0])
    with pytest.raises(ValueError):
        m.sorted_values[0] = 5.0
    assert m == fit_empirical([1.0, 2.0, 3.0])
    assert len({m, fit_empirical([2.0, 3.0, 1.0])}) == 1
    assert EmpiricalMarginal.from_dict(m.to_dict()) == m


def test_log_return_examples():
    assert log_returns([1, math.e]) == pytest.approx([100.0])
    assert list(log_returns([5, 5, 5])) == [0.0, 0.0]
    assert log_returns([100, 101])[0] == pytest.approx(100 * math.log(1.01))
    assert log_returns([100, 101])[0] == pytest.approx(0.995, abs=5e-4)


@pytest.mark.parametrize("prices", [[1, 0, 2], [1, -1], [3], [1, float("inf")]])
def test_log_return_errors(prices):
    with pytest.raises(DomainError):
        log_returns(prices)
