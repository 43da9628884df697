"""Counter-based random streams and the four samplers used by the lattice models.

Every random number is a pure function of a 64-bit key and a 64-bit counter,
so any lane (sample index) or lattice coordinate can be addressed directly
without generating its predecessors.  The mixing function is the SplitMix64
finalizer; keys are derived by chaining it over (master seed, lane, ...).

Layout of the key tree::

    root --master_seed--> seed key --lane--> lane key --child(code)--> coord key
                                               |                         |
                                            draws k=0,1,...           draws k=0,1,...

Child codes set the top bit, plain draws never do, so a child key can never
coincide with a draw of its parent.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numba
import numpy as np

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
ROOT_KEY = 0x243F6A8885A308D3
CHILD_BIT = 1 << 63

_U_GOLDEN = np.uint64(GOLDEN)
_U_INC = np.uint64(0x632BE59BD9B4E019)
_U_M1 = np.uint64(0xBF58476D1CE4E5B9)
_U_M2 = np.uint64(0x94D049BB133111EB)
_U_CHILD = np.uint64(CHILD_BIT)
_U_ROOT = np.uint64(ROOT_KEY)
_S30 = np.uint64(30)
_S27 = np.uint64(27)
_S31 = np.uint64(31)
_S11 = np.uint64(11)
_TWO_M53 = 2.0 ** -53
_BELOW_ONE = 1.0 - _TWO_M53


class ParameterError(ValueError):
    """A distribution or model parameter is outside its domain."""


# --------------------------------------------------------------------------
# jitted core; inputs are cast to uint64 on entry because numba promotes
# mixed int64/uint64 arithmetic to float64
# --------------------------------------------------------------------------

@numba.njit(cache=True, inline="always")
def mix64(z):
    z = np.uint64(z)
    z = z ^ (z >> _S30)
    z = z * _U_M1
    z = z ^ (z >> _S27)
    z = z * _U_M2
    return z ^ (z >> _S31)


@numba.njit(cache=True, inline="always")
def combine(key, x):
    return mix64(np.uint64(key) ^ mix64(np.uint64(x) * _U_GOLDEN + _U_INC))


@numba.njit(cache=True, inline="always")
def child_key(key, code):
    return combine(key, np.uint64(code) | _U_CHILD)


@numba.njit(cache=True, inline="always")
def to_unit(bits):
    # 53-bit lattice shifted by half a step; the top point would round to
    # 1.0, so it is pulled back to the largest double below one
    return min((float(bits >> _S11) + 0.5) * _TWO_M53, _BELOW_ONE)


@numba.njit(cache=True, inline="always")
def uniform_at(key, k):
    return to_unit(combine(key, k))


@numba.njit(cache=True)
def lane_key(master_seed, lane):
    return combine(combine(_U_ROOT, np.uint64(master_seed)), np.uint64(lane))


@numba.njit(cache=True, inline="always")
def _normal_at(key, k):
    # Box-Muller, cosine branch only; consumes draws k and k+1
    u1 = uniform_at(key, k)
    u2 = uniform_at(key, k + 1)
    return math.sqrt(-2.0 * math.log(u1)) * math.cos(2.0 * math.pi * u2)


@numba.njit(cache=True)
def gamma_at(key, k, shape):
    """Gamma(shape, 1) from the draws of ``key`` starting at ``k``.

    Returns ``(value, next_k)``.  Marsaglia-Tsang with squeeze for shape >= 1,
    boosted by ``U**(1/shape)`` below 1; shape == 1 is the exponential
    inverse transform and consumes exactly one draw.
    """
    if shape == 1.0:
        return -math.log(uniform_at(key, k)), k + 1
    boost = 1.0
    a = shape
    if shape < 1.0:
        boost = uniform_at(key, k) ** (1.0 / shape)
        k += 1
        a = shape + 1.0
    d = a - 1.0 / 3.0
    c = 1.0 / math.sqrt(9.0 * d)
    while True:
        x = _normal_at(key, k)
        k += 2
        v = 1.0 + c * x
        if v <= 0.0:
            continue
        v = v * v * v
        u = uniform_at(key, k)
        k += 1
        x2 = x * x
        if u < 1.0 - 0.0331 * x2 * x2:
            return d * v * boost, k
        if math.log(u) < 0.5 * x2 + d * (1.0 - v + math.log(v)):
            return d * v * boost, k


@numba.njit(cache=True)
def _fill_uniform(key, start, out):
    for t in range(out.size):
        out[t] = uniform_at(key, start + t)


@numba.njit(cache=True)
def _fill_exponential(key, start, out):
    for t in range(out.size):
        out[t] = -math.log(uniform_at(key, start + t))


@numba.njit(cache=True)
def _fill_gumbel(key, start, out):
    for t in range(out.size):
        out[t] = -math.log(-math.log(uniform_at(key, start + t)))


@numba.njit(cache=True)
def _fill_gamma(key, start, shape, out):
    k = start
    for t in range(out.size):
        out[t], k = gamma_at(key, k, shape)
    return k


@numba.njit(cache=True)
def _lane_uniforms(master_seed, lanes, code, k, out):
    for t in range(lanes.size):
        ck = child_key(lane_key(master_seed, lanes[t]), code)
        out[t] = uniform_at(ck, k)


# --------------------------------------------------------------------------
# public surface
# --------------------------------------------------------------------------

class Kind(Enum):
    EXPONENTIAL = "exponential"
    GUMBEL = "gumbel"
    GAMMA = "gamma"
    INVERSE_GAMMA = "inverse_gamma"


@dataclass(frozen=True)
class DistributionSpec:
    """One of the four laws used by the models; ``shape`` only for gamma kinds."""

    kind: Kind
    shape: float | None = None

    def __post_init__(self):
        if self.kind in (Kind.GAMMA, Kind.INVERSE_GAMMA):
            if self.shape is None or not self.shape > 0:
                raise ParameterError(f"{self.kind.value} needs shape > 0, got {self.shape}")

    @classmethod
    def exponential(cls) -> DistributionSpec:
        return cls(Kind.EXPONENTIAL)

    @classmethod
    def gumbel(cls) -> DistributionSpec:
        return cls(Kind.GUMBEL)

    @classmethod
    def gamma(cls, shape: float) -> DistributionSpec:
        return cls(Kind.GAMMA, float(shape))

    @classmethod
    def inverse_gamma(cls, shape: float) -> DistributionSpec:
        return cls(Kind.INVERSE_GAMMA, float(shape))


@dataclass(frozen=True)
class StreamKey:
    master_seed: int
    lane: int

    def __post_init__(self):
        for name in ("master_seed", "lane"):
            v = getattr(self, name)
            if not 0 <= v <= MASK64:
                raise ParameterError(f"{name} must fit in 64 unsigned bits, got {v}")


class Stream:
    """Sequential view over one key: draw ``k`` is ``uniform_at(key, k)``.

    Single consumer.  ``child`` derives an independent sub-stream addressed
    by an integer code (used for lattice coordinates).
    """

    __slots__ = ("key", "counter")

    def __init__(self, key: int, counter: int = 0):
        self.key = int(key) & MASK64
        self.counter = counter

    def __repr__(self):
        return f"Stream(key={self.key:#018x}, counter={self.counter})"

    def child(self, code: int) -> Stream:
        if not 0 <= code < CHILD_BIT:
            raise ParameterError(f"child code out of range: {code}")
        return Stream(int(child_key(np.uint64(self.key), np.uint64(code))))

    def _fill(self, filler, size):
        n = 1 if size is None else int(size)
        out = np.empty(n)
        filler(np.uint64(self.key), self.counter, out)
        self.counter += n
        return float(out[0]) if size is None else out

    def uniform(self, size: int | None = None):
        return self._fill(_fill_uniform, size)

    def exponential(self, size: int | None = None):
        return self._fill(_fill_exponential, size)

    def gumbel(self, size: int | None = None):
        """Minus the log of the exponential draw at the same counter."""
        return self._fill(_fill_gumbel, size)

    def gamma(self, shape: float, size: int | None = None):
        if not shape > 0:
            raise ParameterError(f"gamma shape must be positive, got {shape}")
        n = 1 if size is None else int(size)
        out = np.empty(n)
        self.counter = int(_fill_gamma(np.uint64(self.key), self.counter, float(shape), out))
        return float(out[0]) if size is None else out

    def inverse_gamma(self, shape: float, size: int | None = None):
        g = self.gamma(shape, size)
        return 1.0 / g

    def sample(self, dist: DistributionSpec, size: int | None = None):
        if dist.kind is Kind.EXPONENTIAL:
            return self.exponential(size)
        if dist.kind is Kind.GUMBEL:
            return self.gumbel(size)
        if dist.kind is Kind.GAMMA:
            return self.gamma(dist.shape, size)
        return self.inverse_gamma(dist.shape, size)


def derive_stream(master_seed: int, lane: int) -> Stream:
    """Stream for ``(master_seed, lane)``; pure, O(1) in ``lane``."""
    key = StreamKey(int(master_seed), int(lane))
    return Stream(int(lane_key(np.uint64(key.master_seed), np.uint64(key.lane))))


def lane_uniforms(master_seed: int, lanes, code: int, k: int = 0) -> np.ndarray:
    """Draw ``k`` of child ``code`` for each lane in ``lanes``, vectorized."""
    lanes = np.ascontiguousarray(lanes, dtype=np.uint64)
    out = np.empty(lanes.size)
    _lane_uniforms(np.uint64(master_seed), lanes, np.uint64(code), k, out)
    return out


def exponential_from_uniform(u):
    return -np.log(u)


def gumbel_from_exponential(x):
    return -np.log(x)


def sample_exponential(stream: Stream, size: int | None = None):
    return stream.exponential(size)


def sample_gumbel(stream: Stream, size: int | None = None):
    return stream.gumbel(size)


def sample_gamma(stream: Stream, shape: float, size: int | None = None):
    return stream.gamma(shape, size)


def sample_inverse_gamma(stream: Stream, shape: float, size: int | None = None):
    return stream.inverse_gamma(shape, size)
