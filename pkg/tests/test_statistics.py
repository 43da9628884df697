import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate, special, stats

from gumbel_lpp.randomness import derive_stream, sample_exponential, sample_gumbel
from gumbel_lpp.statistics import (InputError, SampleSet, empirical_cdf, histogram_export, kolmogorov_cdf,
                                   kolmogorov_isf, kolmogorov_sf, ks_critical_value, ks_distance,
                                   ks_distance_to_cdf, ks_one_sample, ks_two_sample, moments, quantile_grid)


def gumbel_cdf(y):
    return np.exp(-np.exp(-y))


# ---------------------------------------------------------------- sample sets and ECDF


def test_sample_set_rejects_bad_input():
    with pytest.raises(InputError):
        SampleSet(np.array([]))
    with pytest.raises(InputError):
        SampleSet(np.array([1.0, np.nan]))
    with pytest.raises(InputError):
        SampleSet(np.ones((2, 2)))


def test_sample_set_is_read_only_and_keeps_provenance():
    s = SampleSet(np.array([3.0, 1.0, 2.0]), {"seed": 4})
    with pytest.raises(ValueError):
        s.values[0] = 0.0
    assert list(s.sorted) == [1.0, 2.0, 3.0]
    assert s.map(lambda x: 2 * x, note="doubled").provenance == {"seed": 4, "note": "doubled"}


@pytest.mark.parametrize("data,x,expected", [([1, 2, 3], 2, 2 / 3), ([1, 2, 3], 0.5, 0.0),
                                             ([1, 1, 1], 1, 1.0)])
def test_ecdf_examples(data, x, expected):
    assert empirical_cdf(SampleSet(np.array(data, float)))(x) == pytest.approx(expected)


# ---------------------------------------------------------------- Kolmogorov distribution


@pytest.mark.parametrize("x", [0.2, 0.5, 0.8, 1.0, 1.36, 1.95, 3.0])
def test_kolmogorov_sf_matches_scipy(x):
    assert abs(kolmogorov_sf(x) - special.kolmogorov(x)) < 1e-12


def test_kolmogorov_cdf_complements():
    assert kolmogorov_cdf(1.2) + kolmogorov_sf(1.2) == pytest.approx(1.0, abs=1e-15)
    assert kolmogorov_sf(0.01) == 1.0


def test_critical_constant():
    c = kolmogorov_isf(0.001)
    assert abs(c - 1.95) < 0.01
    assert abs(c - special.kolmogi(0.001)) < 1e-9


def test_two_sample_critical_value():
    assert ks_critical_value(0.001, 50000, 50000) == pytest.approx(
        kolmogorov_isf(0.001) * math.sqrt(2 / 50000))
    assert ks_critical_value(0.05, 100) == pytest.approx(kolmogorov_isf(0.05) / 10)


# ---------------------------------------------------------------- KS tests


def test_one_sample_against_own_cdf():
    y = sample_gumbel(derive_stream(201, 0), 10**5)
    r = ks_one_sample(y, gumbel_cdf)
    ref = stats.kstest(y, gumbel_cdf)
    assert abs(r.statistic - ref.statistic) < 1e-15
    assert r.p_value > 0.01


def test_one_sample_detects_wrong_rate():
    x = sample_exponential(derive_stream(202, 0), 10**4)
    assert ks_one_sample(x, lambda s: -np.expm1(-2 * s)).p_value < 1e-6


def test_single_sample_at_median():
    assert ks_one_sample(np.array([0.0]), lambda s: 0.5 + 0 * s).statistic == 0.5


def test_one_sample_rejects_non_monotone_cdf():
    with pytest.raises(InputError):
        ks_one_sample(np.array([0.0, 1.0, 2.0]), lambda s: np.array([0.5, 0.2, 0.9]))


def test_two_sample_identical_vectors():
    a = sample_gumbel(derive_stream(203, 0), 1000)
    r = ks_two_sample(a, a)
    assert r.statistic == 0.0 and r.p_value == 1.0


def test_two_sample_detects_shift():
    a = sample_gumbel(derive_stream(204, 0), 10**4)
    b = sample_gumbel(derive_stream(204, 1), 10**4) + 1.0
    assert ks_two_sample(a, b).p_value < 1e-6


def test_two_sample_statistic_matches_scipy():
    a = sample_gumbel(derive_stream(205, 0), 3000)
    b = sample_gumbel(derive_stream(205, 1), 5000)
    r = ks_two_sample(a, b)
    assert abs(r.statistic - stats.ks_2samp(a, b).statistic) < 1e-15
    en = math.sqrt(3000 * 5000 / 8000)
    assert r.p_value == pytest.approx(special.kolmogorov(en * r.statistic), abs=1e-12)


def test_decision_at_alpha():
    a = sample_gumbel(derive_stream(206, 0), 10**4)
    b = sample_gumbel(derive_stream(206, 1), 10**4) + 1.0
    r = ks_two_sample(a, b).at(0.001)
    assert r.reject and r.alpha == 0.001


def test_distance_to_precomputed_cdf():
    y = np.sort(sample_gumbel(derive_stream(207, 0), 500))
    assert ks_distance_to_cdf(y, gumbel_cdf(y)) == pytest.approx(ks_one_sample(y, gumbel_cdf).statistic)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(5, 200), st.integers(5, 200))
def test_two_sample_invariant_under_increasing_transform(seed, n1, n2):
    a = derive_stream(seed, 0).uniform(n1) * 3 - 1
    b = derive_stream(seed, 1).uniform(n2) * 3 - 1
    assert ks_distance(a, b) == ks_distance(np.exp(a), np.exp(b))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32), st.integers(1, 100), st.integers(1, 100))
def test_p_values_in_unit_interval(seed, n1, n2):
    a = derive_stream(seed, 0).gumbel(n1)
    b = derive_stream(seed, 1).gumbel(n2)
    r = ks_two_sample(a, b)
    assert 0.0 <= r.p_value <= 1.0
    assert 0.0 <= r.statistic <= 1.0
    assert 0.0 <= ks_one_sample(a, gumbel_cdf).p_value <= 1.0


# ---------------------------------------------------------------- moments, tables


def test_moments_of_constant():
    m = moments(np.zeros(4))
    assert m.mean == 0.0 and m.variance == 0.0


def test_moments_need_two_samples():
    with pytest.raises(InputError):
        moments(np.array([1.0]))


def test_exponential_mean():
    assert abs(moments(sample_exponential(derive_stream(208, 0), 10**6)).mean - 1.0) < 0.005


def test_gumbel_variance():
    mean, _ = integrate.quad(lambda t: t * math.exp(-t - math.exp(-t)), -30, 60, limit=200)
    second, _ = integrate.quad(lambda t: t * t * math.exp(-t - math.exp(-t)), -30, 60, limit=200)
    var = second - mean**2
    assert abs(var - math.pi**2 / 6) < 1e-8
    m = moments(sample_gumbel(derive_stream(209, 0), 10**6))
    assert abs(m.variance - var) < 0.01
    # skewness of the Gumbel law is 12 sqrt(6) zeta(3) / pi^3
    assert abs(m.skewness - 1.1395470994) < 5 * m.se_skewness


def test_histogram_single_sample_single_bin():
    h = histogram_export(np.array([2.0]), width=0.25)
    assert h[h[:, 1] > 0][0, 2] == pytest.approx(1 / 0.25)
    h1 = histogram_export(np.array([2.0]), bins=1)
    assert h1[0, 1] == 1 and h1[0, 2] == pytest.approx(1.0)


def test_histogram_flat_for_uniform_grid():
    x = (np.arange(10000) + 0.5) / 10000
    h = histogram_export(x, bins=20)
    assert np.allclose(h[:, 2], 1.0, atol=0.01)
    assert h[:, 1].sum() == 10000


def test_histogram_gumbel_mode():
    y = sample_gumbel(derive_stream(210, 0), 10**5)
    h = histogram_export(y, bins=100)
    assert abs(h[np.argmax(h[:, 1]), 0]) < 0.1


def test_histogram_bin_spec_validation():
    with pytest.raises(InputError):
        histogram_export(np.array([1.0, 2.0]))
    with pytest.raises(InputError):
        histogram_export(np.array([1.0, 2.0]), bins=3, width=0.1)


def test_quantile_grid_returns_sample_points():
    x = np.array([5.0, 1.0, 3.0, 2.0, 4.0])
    q = quantile_grid(x, np.array([0.2, 0.5, 1.0]))
    assert list(q) == [1.0, 3.0, 5.0]
