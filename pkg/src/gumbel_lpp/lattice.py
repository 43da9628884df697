"""Passage-time and free-energy grids for Gumbel LPP, the log-gamma polymer and
the N multi-edge LPP.

Coordinates are 1-based as in the models: vertex ``(i, j)`` with
``1 <= i <= m``, ``1 <= j <= n``.  Arrays are 0-based, so entry ``[i-1, j-1]``
belongs to vertex ``(i, j)``.  ``horizontal[i-1, j-1]`` is the weight of the
edge ``(i-1, j) -> (i, j)`` (defined for ``i >= 2``), ``vertical[i-1, j-1]``
the weight of ``(i, j-1) -> (i, j)`` (defined for ``j >= 2``).

Sampled weights are addressed by ``(master_seed, lane, i, j, role)`` so a grid
is the same whatever order its cells are visited in.
"""
from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numba
import numpy as np

from .randomness import (
    DistributionSpec,
    Kind,
    ParameterError,
    child_key,
    gamma_at,
    lane_key,
    uniform_at,
)
from .statistics import SampleSet

MAX_PATHS = 10**6
MAX_SIDE = 1 << 27


class ShapeError(ValueError):
    """Weights do not cover the lattice rectangle they are used on."""


class CapacityError(RuntimeError):
    """Path enumeration would exceed the oracle's guard."""


class Role:
    """Role tags mixed into coordinate codes; distinct roles are independent."""

    LPP_ORIGIN = 1
    LPP_U = 2
    LPP_V = 3
    POLY_W = 4
    ME_ORIGIN = 5
    ME_U = 6
    ME_V = 7
    GROWTH_A = 8
    GROWTH_B = 9
    GROWTH_C = 10
    STEP_E1 = 11
    STEP_E2 = 12
    STEP_E3 = 13


def coord_code(i: int, j: int, role: int) -> int:
    return (i << 36) | (j << 8) | role


# kind codes understood by the jitted samplers
K_EXP, K_GUMBEL, K_GAMMA, K_INVGAMMA, K_LOG_INVGAMMA = 0, 1, 2, 3, 4

_KIND_CODE = {
    Kind.EXPONENTIAL: K_EXP,
    Kind.GUMBEL: K_GUMBEL,
    Kind.GAMMA: K_GAMMA,
    Kind.INVERSE_GAMMA: K_INVGAMMA,
}


def _kind_args(dist: DistributionSpec) -> tuple[int, float]:
    return _KIND_CODE[dist.kind], float(dist.shape or 1.0)


@numba.njit(cache=True, inline="always")
def _code(i, j, role):
    return (np.uint64(i) << np.uint64(36)) | (np.uint64(j) << np.uint64(8)) | np.uint64(role)


@numba.njit(cache=True)
def _value_at(lkey, i, j, role, kind, shape):
    ck = child_key(lkey, _code(i, j, role))
    if kind == K_EXP:
        return -math.log(uniform_at(ck, 0))
    if kind == K_GUMBEL:
        return -math.log(-math.log(uniform_at(ck, 0)))
    g, _ = gamma_at(ck, 0, shape)
    if kind == K_GAMMA:
        return g
    if kind == K_INVGAMMA:
        return 1.0 / g
    return -math.log(g)


@numba.njit(cache=True)
def _max_at(lkey, i, j, role, kind, shape, copies):
    """Maximum of ``copies`` i.i.d. draws of the kind, sampled once per edge.

    Exponential and Gumbel maxima use the inverse CDF of the maximum
    (one uniform); gamma kinds draw every copy from the coordinate stream.
    """
    ck = child_key(lkey, _code(i, j, role))
    if kind == K_EXP:
        u = uniform_at(ck, 0)
        return -math.log(-math.expm1(math.log(u) / copies))
    if kind == K_GUMBEL:
        return math.log(copies) - math.log(-math.log(uniform_at(ck, 0)))
    best = -math.inf
    k = 0
    for _ in range(copies):
        g, k = gamma_at(ck, k, shape)
        if kind == K_GAMMA:
            v = g
        elif kind == K_INVGAMMA:
            v = 1.0 / g
        else:
            v = -math.log(g)
        if v > best:
            best = v
    return best


@numba.njit(cache=True)
def _fill_edge_field(lkey, m, n, roles, kind, shape, copies, origin, horiz, vert):
    # roles = (origin, U, V); copies == 0 means plain single draws
    if copies == 0:
        origin[0] = _value_at(lkey, 1, 1, roles[0], kind, shape)
    else:
        origin[0] = _max_at(lkey, 1, 1, roles[0], kind, shape, copies)
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            if i >= 2:
                if copies == 0:
                    horiz[i - 1, j - 1] = _value_at(lkey, i, j, roles[1], kind, shape)
                else:
                    horiz[i - 1, j - 1] = _max_at(lkey, i, j, roles[1], kind, shape, copies)
            if j >= 2:
                if copies == 0:
                    vert[i - 1, j - 1] = _value_at(lkey, i, j, roles[2], kind, shape)
                else:
                    vert[i - 1, j - 1] = _max_at(lkey, i, j, roles[2], kind, shape, copies)


@numba.njit(cache=True)
def _fill_vertex_field(lkey, m, n, role, shape, out):
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            out[i - 1, j - 1] = _value_at(lkey, i, j, role, K_LOG_INVGAMMA, shape)


@numba.njit(cache=True, inline="always")
def logaddexp(a, b):
    if a >= b:
        return a + math.log1p(math.exp(b - a))
    return b + math.log1p(math.exp(a - b))


@numba.njit(cache=True, nogil=True)
def _edge_corner_kernel(master_seed, lanes, m, n, roles, kind, shape, copies, out):
    """Corner value of the max-plus recursion for each lane, O(min(m, n)) memory."""
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
                    if copies == 0:
                        buf[0] = _value_at(lk, 1, 1, roles[0], kind, shape)
                    else:
                        buf[0] = _max_at(lk, 1, 1, roles[0], kind, shape, copies)
                    continue
                # predecessors: from (i-1, j) along a horizontal edge, (i, j-1) vertical
                best = -math.inf
                if i >= 2:
                    prev = buf[b - 2] if swap else buf[b - 1]
                    if copies == 0:
                        w = _value_at(lk, i, j, roles[1], kind, shape)
                    else:
                        w = _max_at(lk, i, j, roles[1], kind, shape, copies)
                    best = prev + w
                if j >= 2:
                    prev = buf[b - 1] if swap else buf[b - 2]
                    if copies == 0:
                        w = _value_at(lk, i, j, roles[2], kind, shape)
                    else:
                        w = _max_at(lk, i, j, roles[2], kind, shape, copies)
                    if prev + w > best:
                        best = prev + w
                buf[b - 1] = best
        out[t] = buf[inner - 1]


@numba.njit(cache=True, nogil=True)
def _polymer_corner_kernel(master_seed, lanes, m, n, role, shape, out):
    swap = n > m
    outer = n if swap else m
    inner = m if swap else n
    buf = np.empty(inner)
    for t in range(lanes.size):
        lk = lane_key(master_seed, lanes[t])
        for a in range(1, outer + 1):
            for b in range(1, inner + 1):
                i, j = (b, a) if swap else (a, b)
                lw = _value_at(lk, i, j, role, K_LOG_INVGAMMA, shape)
                if a == 1 and b == 1:
                    buf[0] = lw
                elif a == 1:
                    buf[b - 1] = buf[b - 2] + lw
                elif b == 1:
                    buf[0] = buf[0] + lw
                else:
                    buf[b - 1] = logaddexp(buf[b - 1], buf[b - 2]) + lw
        out[t] = buf[inner - 1]


def run_lanes(kernel, args, count: int, lane_offset: int = 0, workers: int = 1,
              chunk: int = 4096) -> np.ndarray:
    """Run ``kernel(*args[:1], lanes, *args[1:], out)`` over lanes in chunks.

    Results land in lane order whatever the worker count, and every lane's
    value depends only on its own index, so output is identical for any
    ``workers``.
    """
    master_seed, rest = args[0], args[1:]
    out = np.empty(count)
    lanes = np.arange(lane_offset, lane_offset + count, dtype=np.uint64)
    bounds = [(s, min(s + chunk, count)) for s in range(0, count, chunk)]

    def job(lo_hi):
        lo, hi = lo_hi
        kernel(np.uint64(master_seed), lanes[lo:hi], *rest, out[lo:hi])

    if workers <= 1:
        for b in bounds:
            job(b)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(job, bounds))
    return out


# ---------------------------------------------------------------- data types


class Semantics(str, Enum):
    GUMBEL_LPP_T = "gumbel_lpp_T"
    LOG_GAMMA_LOGZ = "log_gamma_logZ"
    MULTI_EDGE_T = "multi_edge_T"


@dataclass(frozen=True, eq=False)
class WeightField:
    """Weights on an m x n rectangle; see the module docstring for the layout.

    Edge models use ``origin``, ``horizontal`` and ``vertical``; the polymer
    uses ``log_vertex`` (``log w``).  Unused entries hold NaN.
    """

    m: int
    n: int
    origin: float = math.nan
    horizontal: np.ndarray | None = None
    vertical: np.ndarray | None = None
    log_vertex: np.ndarray | None = None
    source: str = "injected"

    def __post_init__(self):
        if not (1 <= self.m < MAX_SIDE and 1 <= self.n < MAX_SIDE):
            raise ShapeError(f"bad rectangle {self.m} x {self.n}")
        for name in ("horizontal", "vertical", "log_vertex"):
            arr = getattr(self, name)
            if arr is not None:
                arr = np.asarray(arr, dtype=float)
                if arr.shape != (self.m, self.n):
                    raise ShapeError(f"{name} has shape {arr.shape}, expected {(self.m, self.n)}")
                object.__setattr__(self, name, arr)

    # -- constructors ------------------------------------------------------

    @classmethod
    def edges(cls, origin, horizontal, vertical, source="injected") -> WeightField:
        h = np.asarray(horizontal, dtype=float)
        return cls(h.shape[0], h.shape[1], float(origin), h, np.asarray(vertical, dtype=float),
                   source=source)

    @classmethod
    def polymer(cls, w=None, log_w=None, source="injected") -> WeightField:
        if (w is None) == (log_w is None):
            raise ValueError("give exactly one of w or log_w")
        if w is not None:
            w = np.asarray(w, dtype=float)
            if np.any(w <= 0):
                raise ParameterError("polymer weights must be positive")
            log_w = np.log(w)
        log_w = np.asarray(log_w, dtype=float)
        return cls(log_w.shape[0], log_w.shape[1], float(log_w[0, 0]), log_vertex=log_w,
                   source=source)

    @classmethod
    def sample_lpp(cls, master_seed: int, lane: int, m: int, n: int,
                   dist: DistributionSpec | None = None) -> WeightField:
        """Gumbel LPP weights (or another edge law via ``dist``)."""
        kind, shape = _kind_args(dist or DistributionSpec.gumbel())
        return cls._sample_edges(master_seed, lane, m, n,
                                 (Role.LPP_ORIGIN, Role.LPP_U, Role.LPP_V), kind, shape, 0)

    @classmethod
    def sample_multi_edge(cls, master_seed: int, lane: int, m: int, n: int,
                          cfg: MultiEdgeConfig) -> WeightField:
        """Per-edge maxima of ``cfg.N`` copies, sampled once per multi-edge."""
        kind, shape = _kind_args(cfg.dist)
        return cls._sample_edges(master_seed, lane, m, n,
                                 (Role.ME_ORIGIN, Role.ME_U, Role.ME_V), kind, shape, cfg.N)

    @classmethod
    def _sample_edges(cls, master_seed, lane, m, n, roles, kind, shape, copies):
        origin = np.empty(1)
        h = np.full((m, n), np.nan)
        v = np.full((m, n), np.nan)
        lk = np.uint64(lane_key(np.uint64(master_seed), np.uint64(lane)))
        _fill_edge_field(lk, m, n, np.array(roles, dtype=np.int64), kind, shape, copies,
                         origin, h, v)
        return cls(m, n, float(origin[0]), h, v, source=f"sampled:{master_seed}:{lane}")

    @classmethod
    def sample_polymer(cls, master_seed: int, lane: int, m: int, n: int,
                       gamma: float = 1.0) -> WeightField:
        if not gamma > 0:
            raise ParameterError(f"gamma must be positive, got {gamma}")
        out = np.empty((m, n))
        lk = np.uint64(lane_key(np.uint64(master_seed), np.uint64(lane)))
        _fill_vertex_field(lk, m, n, Role.POLY_W, float(gamma), out)
        return cls(m, n, float(out[0, 0]), log_vertex=out,
                   source=f"sampled:{master_seed}:{lane}")

    def coupled_lpp(self) -> WeightField:
        """LPP boundary weights coupled to this polymer field.

        T11 = log w11, U_{i,1} = log w_{i,1}, V_{1,j} = log w_{1,j}.  Bulk
        edges are left NaN: they are not determined by the coupling.
        """
        lw = self._need("log_vertex")
        h = np.full((self.m, self.n), np.nan)
        v = np.full((self.m, self.n), np.nan)
        h[1:, 0] = lw[1:, 0]
        v[0, 1:] = lw[0, 1:]
        return WeightField(self.m, self.n, float(lw[0, 0]), h, v, source=f"coupled:{self.source}")

    def _need(self, name):
        arr = getattr(self, name)
        if arr is None:
            raise ShapeError(f"weight field has no {name} table")
        return arr

    def check_edges(self, m: int, n: int):
        if m > self.m or n > self.n:
            raise ShapeError(f"weights cover {self.m} x {self.n}, grid needs {m} x {n}")
        h, v = self._need("horizontal"), self._need("vertical")
        if not math.isfinite(self.origin):
            raise ShapeError("missing origin weight")
        if m >= 2 and not np.all(np.isfinite(h[1:m, :n])):
            raise ShapeError("missing horizontal edge weight")
        if n >= 2 and not np.all(np.isfinite(v[:m, 1:n])):
            raise ShapeError("missing vertical edge weight")
        return h, v


@dataclass(frozen=True, eq=False)
class PassageGrid:
    m: int
    n: int
    values: np.ndarray
    semantics: Semantics
    params: dict = field(default_factory=dict)

    def __getitem__(self, ij):
        i, j = ij
        if not (1 <= i <= self.m and 1 <= j <= self.n):
            raise IndexError(f"({i}, {j}) outside 1..{self.m} x 1..{self.n}")
        return float(self.values[i - 1, j - 1])

    @property
    def corner(self) -> float:
        return float(self.values[-1, -1])


@dataclass(frozen=True)
class MultiEdgeConfig:
    N: int
    dist: DistributionSpec = field(default_factory=DistributionSpec.exponential)

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ParameterError(f"N must be a positive integer, got {self.N}")


@dataclass(frozen=True, eq=False)
class MultiEdgeWeights:
    """Explicit per-copy weights: ``origin`` (N,), ``horizontal``/``vertical`` (N, m, n)."""

    origin: np.ndarray
    horizontal: np.ndarray
    vertical: np.ndarray

    def reduce(self) -> WeightField:
        """Per-edge maxima; ``max_k (a + w_k) == a + max_k w_k``."""
        o = np.asarray(self.origin, dtype=float)
        h = np.asarray(self.horizontal, dtype=float)
        v = np.asarray(self.vertical, dtype=float)
        if h.ndim != 3 or v.shape != h.shape or o.shape != (h.shape[0],):
            raise ShapeError("multi-edge tables must be (N,), (N, m, n), (N, m, n)")
        with np.errstate(invalid="ignore"):
            hm = np.max(h, axis=0)
            vm = np.max(v, axis=0)
        return WeightField(h.shape[1], h.shape[2], float(np.max(o)), hm, vm, source="injected:reduced")

    @property
    def N(self) -> int:
        return int(np.asarray(self.origin).shape[0])


# ---------------------------------------------------------------- recursions


def _max_plus(m, n, origin, h, v, mode):
    t = np.empty((m, n))
    t[0, 0] = origin
    for i in range(1, m):
        t[i, 0] = t[i - 1, 0] + h[i, 0]
    for j in range(1, n):
        t[0, j] = t[0, j - 1] + v[0, j]
    if mode == "serial":
        for i in range(1, m):
            for j in range(1, n):
                a = t[i - 1, j] + h[i, j]
                b = t[i, j - 1] + v[i, j]
                # ties go to the horizontal predecessor
                t[i, j] = a if a >= b else b
    elif mode == "wavefront":
        for d in range(2, m + n - 1):
            i = np.arange(max(1, d - n + 1), min(m - 1, d - 1) + 1)
            j = d - i
            a = t[i - 1, j] + h[i, j]
            b = t[i, j - 1] + v[i, j]
            t[i, j] = np.where(a >= b, a, b)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return t


def _np_logaddexp(a, b):
    hi = np.maximum(a, b)
    return hi + np.log1p(np.exp(-np.abs(a - b)))


def _log_sum_product(m, n, lw, mode):
    z = np.empty((m, n))
    z[0, 0] = lw[0, 0]
    for i in range(1, m):
        z[i, 0] = z[i - 1, 0] + lw[i, 0]
    for j in range(1, n):
        z[0, j] = z[0, j - 1] + lw[0, j]
    if mode == "serial":
        for i in range(1, m):
            for j in range(1, n):
                z[i, j] = _np_logaddexp(z[i - 1, j:j + 1], z[i, j - 1:j])[0] + lw[i, j]
    elif mode == "wavefront":
        for d in range(2, m + n - 1):
            i = np.arange(max(1, d - n + 1), min(m - 1, d - 1) + 1)
            j = d - i
            z[i, j] = _np_logaddexp(z[i - 1, j], z[i, j - 1]) + lw[i, j]
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return z


def _check_dims(m, n):
    if int(m) != m or int(n) != n or m < 1 or n < 1:
        raise ShapeError(f"grid dimensions must be positive integers, got {m} x {n}")


def gumbel_lpp_grid(m: int, n: int, weights: WeightField, mode: str = "serial") -> PassageGrid:
    """T(i, j) = max(T(i-1, j) + U(i, j), T(i, j-1) + V(i, j)).

    The first row and column telescope from T(1, 1); there is no -inf
    sentinel.  ``mode="wavefront"`` evaluates anti-diagonals as vectors and
    gives bit-identical values.
    """
    _check_dims(m, n)
    h, v = weights.check_edges(m, n)
    t = _max_plus(m, n, weights.origin, h, v, mode)
    return PassageGrid(m, n, t, Semantics.GUMBEL_LPP_T, {"source": weights.source})


def log_gamma_grid(m: int, n: int, gamma: float, weights: WeightField,
                   mode: str = "serial") -> PassageGrid:
    """log Z(i, j) = logaddexp(log Z(i-1, j), log Z(i, j-1)) + log w(i, j), in log space."""
    _check_dims(m, n)
    if not gamma > 0:
        raise ParameterError(f"gamma must be positive, got {gamma}")
    lw = weights._need("log_vertex")
    if m > weights.m or n > weights.n:
        raise ShapeError(f"weights cover {weights.m} x {weights.n}, grid needs {m} x {n}")
    lw = lw[:m, :n]
    if not np.all(np.isfinite(lw)):
        raise ShapeError("missing or non-finite polymer weight")
    z = _log_sum_product(m, n, lw, mode)
    return PassageGrid(m, n, z, Semantics.LOG_GAMMA_LOGZ,
                       {"gamma": float(gamma), "source": weights.source})


def multi_edge_lpp_grid(m: int, n: int, cfg: MultiEdgeConfig,
                        weights: WeightField | MultiEdgeWeights,
                        mode: str = "serial") -> PassageGrid:
    """2N-way max recursion, run on per-edge maxima.

    Per-copy tables are reduced first, so each multi-edge contributes its
    maximum exactly once.
    """
    _check_dims(m, n)
    if isinstance(weights, MultiEdgeWeights):
        if weights.N != cfg.N:
            raise ShapeError(f"tables carry {weights.N} copies, config says N={cfg.N}")
        weights = weights.reduce()
    h, v = weights.check_edges(m, n)
    t = _max_plus(m, n, weights.origin, h, v, mode)
    return PassageGrid(m, n, t, Semantics.MULTI_EDGE_T,
                       {"N": cfg.N, "dist": cfg.dist.kind.value, "source": weights.source})


def normalize_multi_edge(grid: PassageGrid, cfg: MultiEdgeConfig, c_n: float,
                         sigma_n: float) -> PassageGrid:
    """(T(i, j) - C_N (i + j - 1)) / sigma_N entrywise."""
    if grid.semantics is not Semantics.MULTI_EDGE_T:
        raise ValueError("normalization applies to multi-edge grids only")
    if not sigma_n > 0:
        raise ParameterError(f"sigma_N must be positive, got {sigma_n}")
    i = np.arange(1, grid.m + 1)[:, None]
    j = np.arange(1, grid.n + 1)[None, :]
    vals = (grid.values - c_n * (i + j - 1)) / sigma_n
    return PassageGrid(grid.m, grid.n, vals, grid.semantics,
                       {**grid.params, "C_N": c_n, "sigma_N": sigma_n, "normalized": True})


# ---------------------------------------------------------------- path oracles


def _paths(m, n):
    count = math.comb(m + n - 2, m - 1)
    if count > MAX_PATHS:
        raise CapacityError(f"{count} paths from (1,1) to ({m},{n}) exceed the guard {MAX_PATHS}")
    steps = m + n - 2
    for right in itertools.combinations(range(steps), m - 1):
        right = set(right)
        i = j = 1
        path = [(1, 1)]
        for s in range(steps):
            if s in right:
                i += 1
            else:
                j += 1
            path.append((i, j))
        yield path


def lpp_path_oracle(m: int, n: int, weights: WeightField) -> tuple[float, int]:
    """Brute-force max over up-right paths of T11 plus the edge weights on the path.

    Returns ``(value, number of paths visited)``.
    """
    _check_dims(m, n)
    h, v = weights.check_edges(m, n)
    best = -math.inf
    count = 0
    for path in _paths(m, n):
        total = weights.origin
        for (i0, j0), (i1, j1) in zip(path, path[1:]):
            total += float(h[i1 - 1, j1 - 1]) if i1 > i0 else float(v[i1 - 1, j1 - 1])
        best = max(best, total)
        count += 1
    return best, count


def polymer_path_oracle(m: int, n: int, weights: WeightField) -> tuple[float, int]:
    """log of the sum over paths of the product of vertex weights (both ends included).

    Each path contributes exp(sum of log w); the sum is taken with math.fsum
    after factoring out the largest term.  Returns ``(log Z, paths visited)``.
    """
    _check_dims(m, n)
    lw = weights._need("log_vertex")
    logs = [math.fsum(float(lw[i - 1, j - 1]) for i, j in path) for path in _paths(m, n)]
    top = max(logs)
    return top + math.log(math.fsum(math.exp(x - top) for x in logs)), len(logs)


def direct_partition_function(m: int, n: int, weights: WeightField) -> float:
    """Z(m, n) by the product-sum recursion in ordinary (not log) space; small grids only."""
    w = np.exp(weights._need("log_vertex")[:m, :n])
    z = np.zeros((m + 1, n + 1))
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            z[i, j] = w[0, 0] if i == j == 1 else (z[i - 1, j] + z[i, j - 1]) * w[i - 1, j - 1]
    return float(z[m, n])


# ---------------------------------------------------------------- sampling


MODELS = ("gumbel_lpp", "log_gamma", "multi_edge")


def sample_statistic(model: str, shape: tuple[int, int], master_seed: int, count: int, *,
                     gamma: float = 1.0, multi_edge: MultiEdgeConfig | None = None,
                     lane_offset: int = 0, workers: int = 1) -> SampleSet:
    """``count`` i.i.d. corner values ``values(m, n)``, lane = sample index.

    Only a rolling row of length min(m, n) is kept per sample.
    """
    m, n = shape
    _check_dims(m, n)
    if count < 1:
        raise ValueError("count must be at least 1")
    prov = {"model": model, "m": m, "n": n, "master_seed": int(master_seed), "count": int(count),
            "lane_offset": int(lane_offset)}
    if model == "gumbel_lpp":
        roles = np.array([Role.LPP_ORIGIN, Role.LPP_U, Role.LPP_V], dtype=np.int64)
        vals = run_lanes(_edge_corner_kernel,
                         (master_seed, m, n, roles, K_GUMBEL, 1.0, 0),
                         count, lane_offset, workers)
    elif model == "log_gamma":
        if not gamma > 0:
            raise ParameterError(f"gamma must be positive, got {gamma}")
        prov["gamma"] = float(gamma)
        vals = run_lanes(_polymer_corner_kernel, (master_seed, m, n, Role.POLY_W, float(gamma)),
                         count, lane_offset, workers)
    elif model == "multi_edge":
        if multi_edge is None:
            raise ValueError("multi_edge model needs a MultiEdgeConfig")
        kind, shp = _kind_args(multi_edge.dist)
        prov.update(N=multi_edge.N, dist=multi_edge.dist.kind.value)
        roles = np.array([Role.ME_ORIGIN, Role.ME_U, Role.ME_V], dtype=np.int64)
        vals = run_lanes(_edge_corner_kernel,
                         (master_seed, m, n, roles, kind, shp, multi_edge.N),
                         count, lane_offset, workers)
    else:
        raise ValueError(f"unknown model {model!r}; expected one of {MODELS}")
    return SampleSet(vals, prov)


_E1, _E2, _E3 = Role.STEP_E1, Role.STEP_E2, Role.STEP_E3


@numba.njit(cache=True, nogil=True)
def _one_step_kernel(master_seed, lanes, z1, z2, out_lpp, out_poly):
    for t in range(lanes.size):
        lk = lane_key(master_seed, lanes[t])
        e1 = _value_at(lk, 1, 1, _E1, K_EXP, 1.0)
        e2 = _value_at(lk, 1, 1, _E2, K_EXP, 1.0)
        e3 = _value_at(lk, 1, 1, _E3, K_EXP, 1.0)
        out_lpp[t] = max(z1 / e1, z2 / e2)
        out_poly[t] = (z1 + z2) / e3


def one_step_laws(z1: float, z2: float, count: int, master_seed: int = 0,
                  lane_offset: int = 0) -> tuple[SampleSet, SampleSet]:
    """Exponentiated one-step updates of both models from the same predecessors.

    First set: max(z1/E1, z2/E2) (LPP); second: (z1 + z2)/E3 (polymer).  The
    reciprocals of both are Exp(z1 + z2).
    """
    if not (z1 > 0 and z2 > 0):
        raise ParameterError(f"z1 and z2 must be positive, got {z1}, {z2}")
    lanes = np.arange(lane_offset, lane_offset + count, dtype=np.uint64)
    a = np.empty(count)
    b = np.empty(count)
    _one_step_kernel(np.uint64(master_seed), lanes, float(z1), float(z2), a, b)
    prov = {"z1": z1, "z2": z2, "master_seed": master_seed, "count": count}
    return SampleSet(a, {**prov, "side": "lpp"}), SampleSet(b, {**prov, "side": "polymer"})


# ---------------------------------------------------------------- weight tables


ROLE_NAMES = ("T11", "U", "V", "w", "logw")


def read_weight_table(path: str | Path, m: int, n: int, N: int | None = None):
    """Read an injected weight table for an ``m x n`` rectangle.

    Plain text, one weight per line: ``i j role value [copy]`` separated by
    whitespace or commas; ``#`` starts a comment.  Roles: ``T11`` (origin,
    at 1 1), ``U`` (edge into (i, j) from the left, i >= 2), ``V`` (edge
    from below, j >= 2), ``w`` or ``logw`` (polymer vertex weight).  The
    optional ``copy`` column (0-based) is required when ``N`` is given and
    yields per-copy multi-edge tables.

    Returns a WeightField, or MultiEdgeWeights when ``N`` is given.  Every
    weight the declared rectangle needs must be present exactly once; entries
    outside it are an error.
    """
    copies = 1 if N is None else int(N)
    origin = np.full(copies, np.nan)
    h = np.full((copies, m, n), np.nan)
    v = np.full((copies, m, n), np.nan)
    lw = np.full((m, n), np.nan)
    edge_roles = poly_roles = False
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").split()
        if len(parts) not in (4, 5):
            raise ShapeError(f"{path}:{lineno}: expected 'i j role value [copy]'")
        i, j, role, value = int(parts[0]), int(parts[1]), parts[2], float(parts[3])
        c = int(parts[4]) if len(parts) == 5 else 0
        if N is not None and len(parts) != 5:
            raise ShapeError(f"{path}:{lineno}: multi-edge tables need a copy column")
        if not (1 <= i <= m and 1 <= j <= n) or not 0 <= c < copies:
            raise ShapeError(f"{path}:{lineno}: ({i}, {j}) copy {c} outside the declared rectangle")
        if role == "T11":
            slot, idx = origin, (c,)
            if (i, j) != (1, 1):
                raise ShapeError(f"{path}:{lineno}: T11 must sit at 1 1")
        elif role == "U":
            slot, idx = h, (c, i - 1, j - 1)
            if i < 2:
                raise ShapeError(f"{path}:{lineno}: U needs i >= 2")
        elif role == "V":
            slot, idx = v, (c, i - 1, j - 1)
            if j < 2:
                raise ShapeError(f"{path}:{lineno}: V needs j >= 2")
        elif role in ("w", "logw"):
            slot, idx = lw, (i - 1, j - 1)
            if role == "w":
                if value <= 0:
                    raise ParameterError(f"{path}:{lineno}: w must be positive")
                value = math.log(value)
            poly_roles = True
        else:
            raise ShapeError(f"{path}:{lineno}: unknown role {role!r}; expected {ROLE_NAMES}")
        if role in ("T11", "U", "V"):
            edge_roles = True
        if not math.isnan(slot[idx]):
            raise ShapeError(f"{path}:{lineno}: duplicate weight for ({i}, {j}) {role}")
        slot[idx] = value
    if edge_roles and poly_roles:
        raise ShapeError(f"{path}: mixes edge (T11/U/V) and vertex (w/logw) roles")
    if poly_roles:
        if np.isnan(lw).any():
            raise ShapeError(f"{path}: missing polymer weights for the {m} x {n} rectangle")
        return WeightField.polymer(log_w=lw, source=f"table:{path}")
    missing = np.isnan(origin).any() or np.isnan(h[:, 1:, :]).any() or np.isnan(v[:, :, 1:]).any()
    if missing:
        raise ShapeError(f"{path}: missing edge weights for the {m} x {n} rectangle")
    if N is not None:
        return MultiEdgeWeights(origin, h, v)
    return WeightField(m, n, float(origin[0]), h[0], v[0], source=f"table:{path}")
