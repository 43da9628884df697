"""Markovian corner growth driven by N-stage counters.

State: a counter A in {0..N} at the origin, a counter B(m, n) on every edge
(m-1, n) -> (m, n) and C(m, n) on every edge (m, n-1) -> (m, n).  Boundary
counters B(1, n) and C(m, 1) are pinned at N.  A vertex is completed once
both incoming counters read N (the origin once A reads N); only then do its
outgoing counters start to tick.  A counter at value i steps to i+1 after an
exponential holding time whose rate depends on the convention:

* ``RATE_N_MINUS_I``: rate N - i.  Counting 0 -> N then takes
  sum_i Exp(N - i), the law of the maximum of N independent Exp(1) clocks,
  which makes the completion times equal in law to N multi-edge LPP with
  exponential weights.  Default.
* ``RATE_INVERSE_N_MINUS_I``: rate 1 / (N - i), the literal reading of the
  model's "(N - i)^{-1}".  Kept selectable; it is not equivalent to the
  multi-edge model.

The two readings coincide for N = 1.

Completion times are sampled causally: each edge finishes at its tail's
completion time plus N directly sampled holding times.  ``simulate_growth_events``
runs the same dynamics as a global event queue and serves as an independent
check.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from enum import Enum

import numba
import numpy as np

from .lattice import Role, _code, run_lanes
from .randomness import ParameterError, Stream, child_key, lane_key, uniform_at
from .statistics import SampleSet


class StateError(ValueError):
    pass


class RateConvention(str, Enum):
    RATE_N_MINUS_I = "rate_N_minus_i"
    RATE_INVERSE_N_MINUS_I = "rate_inverse_N_minus_i"


_CONV_CODE = {RateConvention.RATE_N_MINUS_I: 0, RateConvention.RATE_INVERSE_N_MINUS_I: 1}
_GA, _GB, _GC = Role.GROWTH_A, Role.GROWTH_B, Role.GROWTH_C


def increment_rate(i: int, N: int, convention: RateConvention) -> float:
    if not 0 <= i < N:
        raise StateError(f"counter value {i} cannot increase (N={N})")
    return float(N - i) if convention is RateConvention.RATE_N_MINUS_I else 1.0 / (N - i)


def increment_time_sampler(i: int, N: int, convention: RateConvention, stream: Stream,
                           size: int | None = None):
    """Holding time of the i -> i+1 step: Exp(1) draw divided by the rate."""
    rate = increment_rate(i, N, RateConvention(convention))
    return stream.exponential(size) / rate


@numba.njit(cache=True, inline="always")
def _rate(k, N, conv):
    return float(N - k) if conv == 0 else 1.0 / (N - k)


@numba.njit(cache=True)
def _holding_times(lk, i, j, role, N, conv, out):
    ck = child_key(lk, _code(i, j, role))
    for k in range(N):
        out[k] = -math.log(uniform_at(ck, k)) / _rate(k, N, conv)


@numba.njit(cache=True)
def _edge_delay(lk, i, j, role, N, conv):
    ck = child_key(lk, _code(i, j, role))
    total = 0.0
    for k in range(N):
        total += -math.log(uniform_at(ck, k)) / _rate(k, N, conv)
    return total


@numba.njit(cache=True, nogil=True)
def _growth_corner_kernel(master_seed, lanes, m, n, N, conv, out):
    swap = n > m
    outer = n if swap else m
    inner = m if swap else n
    buf = np.empty(inner)
    for t in range(lanes.size):
        lk = lane_key(master_seed, lanes[t])
        for a in range(1, outer + 1):
            for b in range(1, inner + 1):
                i, j = (b, a) if swap else (a, b)
                if i == 1 and j == 1:
                    buf[0] = _edge_delay(lk, 1, 1, _GA, N, conv)
                    continue
                best = -math.inf
                if i >= 2:
                    prev = buf[b - 2] if swap else buf[b - 1]
                    best = prev + _edge_delay(lk, i, j, _GB, N, conv)
                if j >= 2:
                    prev = buf[b - 1] if swap else buf[b - 2]
                    cand = prev + _edge_delay(lk, i, j, _GC, N, conv)
                    if cand > best:
                        best = cand
                buf[b - 1] = best
        out[t] = buf[inner - 1]


@numba.njit(cache=True, nogil=True)
def _edge_delay_kernel(master_seed, lanes, N, conv, out):
    for t in range(lanes.size):
        out[t] = _edge_delay(lane_key(master_seed, lanes[t]), 2, 1, _GB, N, conv)


# ---------------------------------------------------------------- trajectories


@dataclass(frozen=True)
class GrowthState:
    """Snapshot of the counters at time ``t``; arrays are indexed [m-1, n-1]."""

    N: int
    t: float
    A_origin: int
    B: np.ndarray
    C: np.ndarray
    completed: np.ndarray


@dataclass(frozen=True, eq=False)
class GrowthTrajectory:
    """Complete record of one realization on an m_max x n_max rectangle.

    ``B_times[m-1, n-1, k]`` is the time B(m, n) reaches k+1 (NaN on the
    pinned boundary), likewise ``C_times``; ``A_times[k]`` for the origin.
    ``tau[m-1, n-1]`` is the completion time of (m, n).
    """

    N: int
    convention: RateConvention
    A_times: np.ndarray
    B_times: np.ndarray
    C_times: np.ndarray
    tau: np.ndarray

    def state_at(self, t: float) -> GrowthState:
        m, n = self.tau.shape
        a = int(np.sum(self.A_times <= t))
        with np.errstate(invalid="ignore"):
            b = np.sum(self.B_times <= t, axis=2)
            c = np.sum(self.C_times <= t, axis=2)
        b[0, :] = self.N
        c[:, 0] = self.N
        return GrowthState(self.N, float(t), a, b, c, self.tau <= t)


def _check(m_max, n_max, N, convention):
    if m_max < 1 or n_max < 1:
        raise ParameterError("rectangle sides must be at least 1")
    if int(N) != N or N < 1:
        raise ParameterError(f"N must be a positive integer, got {N}")
    return RateConvention(convention)


def simulate_growth(m_max: int, n_max: int, N: int,
                    convention: RateConvention = RateConvention.RATE_N_MINUS_I,
                    stream: Stream | None = None) -> GrowthTrajectory:
    """Causal simulation: every counter's increments are laid out after its tail completes.

    The stream's key plays the role of a lane key, so
    ``simulate_growth(..., derive_stream(seed, lane))`` matches
    ``first_passage_samples`` for that lane exactly.
    """
    conv = _check(m_max, n_max, N, convention)
    code = _CONV_CODE[conv]
    lk = np.uint64((stream or Stream(0)).key)
    hold = np.empty(N)
    _holding_times(lk, 1, 1, _GA, N, code, hold)
    a_times = np.cumsum(hold)
    b_times = np.full((m_max, n_max, N), np.nan)
    c_times = np.full((m_max, n_max, N), np.nan)
    tau = np.empty((m_max, n_max))
    tau[0, 0] = a_times[-1]
    for i in range(1, m_max + 1):
        for j in range(1, n_max + 1):
            if i == j == 1:
                continue
            best = -math.inf
            if i >= 2:
                _holding_times(lk, i, j, _GB, N, code, hold)
                b_times[i - 1, j - 1] = tau[i - 2, j - 1] + np.cumsum(hold)
                best = b_times[i - 1, j - 1, -1]
            if j >= 2:
                _holding_times(lk, i, j, _GC, N, code, hold)
                c_times[i - 1, j - 1] = tau[i - 1, j - 2] + np.cumsum(hold)
                best = max(best, c_times[i - 1, j - 1, -1])
            tau[i - 1, j - 1] = best
    return GrowthTrajectory(N, conv, a_times, b_times, c_times, tau)


def simulate_growth_events(m_max: int, n_max: int, N: int,
                           convention: RateConvention = RateConvention.RATE_N_MINUS_I,
                           stream: Stream | None = None,
                           snapshots: list | None = None) -> np.ndarray:
    """Global event-queue simulation; returns the completion-time grid.

    Every running counter holds one pending increment in a heap; popping it
    advances the counter and either re-arms it or, at N, tests whether the
    head vertex completes and starts that vertex's outgoing counters.
    Holding times come sequentially from ``stream``, so realizations differ
    from ``simulate_growth`` but the law is the same.  When ``snapshots`` is
    a list, a ``GrowthState`` is appended after every event.
    """
    conv = _check(m_max, n_max, N, convention)
    stream = stream or Stream(0)
    a = 0
    b = np.zeros((m_max, n_max), dtype=np.int64)
    c = np.zeros((m_max, n_max), dtype=np.int64)
    b[0, :] = N
    c[:, 0] = N
    tau = np.full((m_max, n_max), np.inf)
    heap: list = []
    seq = 0

    def arm(now, kind, i, j, value):
        nonlocal seq
        dt = stream.exponential() / increment_rate(value, N, conv)
        heapq.heappush(heap, (now + dt, seq, kind, i, j))
        seq += 1

    def complete(now, i, j):
        tau[i - 1, j - 1] = now
        if i + 1 <= m_max:
            arm(now, "B", i + 1, j, 0)
        if j + 1 <= n_max:
            arm(now, "C", i, j + 1, 0)

    arm(0.0, "A", 1, 1, 0)
    while heap:
        now, _, kind, i, j = heapq.heappop(heap)
        if kind == "A":
            a += 1
            value = a
        elif kind == "B":
            b[i - 1, j - 1] += 1
            value = b[i - 1, j - 1]
        else:
            c[i - 1, j - 1] += 1
            value = c[i - 1, j - 1]
        if value < N:
            arm(now, kind, i, j, value)
        elif kind == "A" or (b[i - 1, j - 1] == N and c[i - 1, j - 1] == N):
            complete(now, i, j)
        if snapshots is not None:
            snapshots.append(GrowthState(N, now, a, b.copy(), c.copy(), np.isfinite(tau)))
    return tau


# ---------------------------------------------------------------- sampling


def first_passage_samples(shape: tuple[int, int], N: int,
                          convention: RateConvention = RateConvention.RATE_N_MINUS_I,
                          count: int = 1, master_seed: int = 0, *, lane_offset: int = 0,
                          workers: int = 1) -> SampleSet:
    """``count`` i.i.d. completion times tau(m, n), one lane per sample."""
    m, n = shape
    conv = _check(m, n, N, convention)
    vals = run_lanes(_growth_corner_kernel, (master_seed, m, n, int(N), _CONV_CODE[conv]),
                     count, lane_offset, workers)
    return SampleSet(vals, {"model": "growth", "m": m, "n": n, "N": int(N),
                            "convention": conv.value, "master_seed": int(master_seed),
                            "count": int(count), "lane_offset": int(lane_offset)})


def edge_delay_samples(N: int, convention: RateConvention = RateConvention.RATE_N_MINUS_I,
                       count: int = 1, master_seed: int = 0, *, lane_offset: int = 0) -> SampleSet:
    """Time for one edge counter to go 0 -> N once its tail has completed."""
    conv = _check(1, 1, N, convention)
    vals = run_lanes(_edge_delay_kernel, (master_seed, int(N), _CONV_CODE[conv]),
                     count, lane_offset)
    return SampleSet(vals, {"model": "growth_edge_delay", "N": int(N), "convention": conv.value,
                            "master_seed": int(master_seed), "count": int(count)})


def max_of_exponentials_cdf(N: int):
    """CDF of the maximum of N i.i.d. Exp(1): (1 - e^-x)^N."""
    return lambda x: (-np.expm1(-np.maximum(x, 0.0))) ** N
