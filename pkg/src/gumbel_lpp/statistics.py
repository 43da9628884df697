"""Empirical CDFs, Kolmogorov-Smirnov tests, moments and histogram tables.

P-values are asymptotic (Kolmogorov distribution); they are meant for the
n >= 10**4 regimes of the experiments and should not drive decisions below
n = 50.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable

import numpy as np

MIN_DECISION_SIZE = 50


class InputError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class SampleSet:
    """I.i.d. scalar statistics with the settings that produced them."""

    values: np.ndarray
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or v.size == 0:
            raise InputError("a sample set needs a non-empty 1-d vector")
        if not np.all(np.isfinite(v)):
            raise InputError("sample values must be finite")
        v.setflags(write=False)
        object.__setattr__(self, "values", v)

    def __len__(self):
        return self.values.size

    @property
    def count(self) -> int:
        return self.values.size

    @cached_property
    def sorted(self) -> np.ndarray:
        s = np.sort(self.values, kind="stable")
        s.setflags(write=False)
        return s

    def map(self, fn, **extra) -> SampleSet:
        return SampleSet(fn(self.values), {**self.provenance, **extra})


def as_sample_set(x) -> SampleSet:
    return x if isinstance(x, SampleSet) else SampleSet(np.asarray(x, dtype=float))


# ---------------------------------------------------------------- ECDF


class EmpiricalCDF:
    """Right-continuous step function of a sample set."""

    def __init__(self, samples):
        self._sorted = as_sample_set(samples).sorted

    def __call__(self, x):
        r = np.searchsorted(self._sorted, x, side="right") / self._sorted.size
        return float(r) if np.ndim(r) == 0 else r


def empirical_cdf(samples) -> EmpiricalCDF:
    return EmpiricalCDF(samples)


# ---------------------------------------------------------------- Kolmogorov distribution


def kolmogorov_sf(x: float, tol: float = 1e-12) -> float:
    """P(K > x) = 2 sum_{k>=1} (-1)^(k-1) exp(-2 k^2 x^2).

    The alternating series is summed until a term drops below ``tol``.
    For small ``x`` the series needs O(1/x) terms; below 0.05 the survival
    function equals 1 to double precision (the theta-function form gives
    K(0.05) ~ 1e-212), so that branch returns 1 directly.
    """
    if x <= 0.05:
        return 1.0
    total = 0.0
    k = 1
    while True:
        term = math.exp(-2.0 * k * k * x * x)
        total += term if k % 2 else -term
        if term < tol:
            break
        k += 1
    return min(1.0, max(0.0, 2.0 * total))


def kolmogorov_cdf(x: float) -> float:
    return 1.0 - kolmogorov_sf(x)


def kolmogorov_isf(alpha: float) -> float:
    """c(alpha) with P(K > c) = alpha, by bisection on the monotone survival function."""
    if not 0 < alpha < 1:
        raise InputError(f"alpha must lie in (0, 1), got {alpha}")
    lo, hi = 0.05, 10.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if kolmogorov_sf(mid) > alpha:
            lo = mid
        else:
            hi = mid
        if hi - lo < 1e-14:
            break
    return 0.5 * (lo + hi)


# ---------------------------------------------------------------- KS tests


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n1: int
    n2: int | None = None
    alpha: float | None = None
    reject: bool | None = None

    def at(self, alpha: float) -> KsResult:
        return KsResult(self.statistic, self.p_value, self.n1, self.n2, alpha, self.p_value < alpha)

    def as_dict(self) -> dict:
        return {k: v for k, v in self.__dict__.items()}


def ks_one_sample(samples, cdf: Callable) -> KsResult:
    s = as_sample_set(samples).sorted
    n = s.size
    f = np.asarray(cdf(s), dtype=float)
    if f.shape != s.shape:
        raise InputError("cdf must map an array to an array of the same shape")
    if np.any(np.diff(f) < 0) or np.any(f < 0) or np.any(f > 1):
        raise InputError("cdf is not a non-decreasing map into [0, 1] on the sample points")
    i = np.arange(1, n + 1)
    d = float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))
    return KsResult(d, kolmogorov_sf(math.sqrt(n) * d), n)


def ks_distance(a, b) -> float:
    """sup |F_a - F_b| over the pooled sample points."""
    sa = as_sample_set(a).sorted
    sb = as_sample_set(b).sorted
    pooled = np.concatenate([sa, sb])
    fa = np.searchsorted(sa, pooled, side="right") / sa.size
    fb = np.searchsorted(sb, pooled, side="right") / sb.size
    return float(np.max(np.abs(fa - fb)))


def ks_two_sample(a, b) -> KsResult:
    a = as_sample_set(a)
    b = as_sample_set(b)
    n1, n2 = a.count, b.count
    d = ks_distance(a, b)
    en = math.sqrt(n1 * n2 / (n1 + n2))
    return KsResult(d, kolmogorov_sf(en * d), n1, n2)


def ks_critical_value(alpha: float, n1: int, n2: int | None = None) -> float:
    """D_crit(alpha) = c(alpha) * sqrt((n1 + n2) / (n1 n2)); one-sample if n2 is None."""
    c = kolmogorov_isf(alpha)
    if n2 is None:
        return c / math.sqrt(n1)
    return c * math.sqrt((n1 + n2) / (n1 * n2))


def ks_distance_to_cdf(samples, cdf_values_at_sorted: np.ndarray) -> float:
    """One-sample D when the model CDF is already evaluated at the sorted samples."""
    n = cdf_values_at_sorted.size
    i = np.arange(1, n + 1)
    f = cdf_values_at_sorted
    return float(max(np.max(i / n - f), np.max(f - (i - 1) / n)))


# ---------------------------------------------------------------- moments


@dataclass(frozen=True)
class Moments:
    mean: float
    variance: float
    skewness: float
    se_mean: float
    se_variance: float
    se_skewness: float
    count: int

    def as_dict(self) -> dict:
        return dict(self.__dict__)


def moments(samples) -> Moments:
    x = as_sample_set(samples).values
    n = x.size
    if n < 2:
        raise InputError("moments need at least two samples")
    mean = float(np.mean(x))
    dev = x - mean
    m2 = float(np.mean(dev**2))
    m3 = float(np.mean(dev**3))
    m4 = float(np.mean(dev**4))
    var = m2 * n / (n - 1)
    skew = m3 / m2**1.5 if m2 > 0 else 0.0
    se_var = math.sqrt(max(m4 - m2 * m2 * (n - 3) / (n - 1), 0.0) / n)
    if n > 2:
        se_skew = math.sqrt(6.0 * n * (n - 1) / ((n - 2) * (n + 1) * (n + 3)))
    else:
        se_skew = math.inf
    return Moments(mean, var, skew, math.sqrt(var / n), se_var, se_skew, n)


# ---------------------------------------------------------------- tables


def histogram_export(samples, bins: int | None = None, width: float | None = None) -> np.ndarray:
    """Rows of (bin center, count, density); densities integrate to one.

    Give either a bin count or a bin width.  A degenerate sample (all values
    equal) gets bins of width 1 centred on the value.
    """
    x = as_sample_set(samples).sorted
    if (bins is None) == (width is None):
        raise InputError("give exactly one of bins or width")
    lo, hi = float(x[0]), float(x[-1])
    if bins is not None:
        if bins < 1:
            raise InputError("need at least one bin")
        if hi == lo:
            lo, hi = lo - 0.5 * bins, lo + 0.5 * bins
        edges = np.linspace(lo, hi, bins + 1)
    else:
        if not width > 0:
            raise InputError("bin width must be positive")
        nb = max(1, int(math.ceil((hi - lo) / width)))
        if lo + nb * width <= hi:
            nb += 1
        edges = lo + width * np.arange(nb + 1)
    counts, edges = np.histogram(x, bins=edges)
    widths = np.diff(edges)
    density = counts / (x.size * widths)
    centers = 0.5 * (edges[:-1] + edges[1:])
    return np.column_stack([centers, counts.astype(float), density])


def quantile_grid(samples, levels: np.ndarray) -> np.ndarray:
    """Empirical quantiles (inverted-CDF convention, so values are sample points)."""
    return np.quantile(as_sample_set(samples).sorted, levels, method="inverted_cdf")
