"""Large-n constants for T_{n,n}, the GUE Tracy-Widom CDF, and extreme-value normalizers.

F_GUE(r) = det(I - K_Ai) on L^2(r, inf) is evaluated by Nystrom
discretization: Gauss-Legendre nodes on t in (0, 1) pulled back through
x = r + t / (1 - t).  Each evaluation doubles the order until two successive
values agree to the tolerance.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .randomness import DistributionSpec, Kind
from .special import EULER_GAMMA, LN2, ZETA3, airy, digamma, polygamma2


class ConvergenceError(RuntimeError):
    pass


class UnsupportedDistribution(NotImplementedError):
    pass


# ---------------------------------------------------------------- constants


@dataclass(frozen=True)
class Corollary1Constants:
    """Centering per unit n and n^(1/3) fluctuation scale of T_{n,n}."""

    C: float
    sigma: float


def corollary1_constants() -> Corollary1Constants:
    # Psi(1/2) = -gamma_E - 2 ln 2 and Psi''(1/2) = -14 zeta(3)
    c = 2.0 * EULER_GAMMA + 4.0 * LN2
    sigma = (14.0 * ZETA3) ** (1.0 / 3.0)
    return Corollary1Constants(c, sigma)


def corollary1_constants_by_series() -> Corollary1Constants:
    """Same constants from the digamma/polygamma evaluators instead of closed forms."""
    return Corollary1Constants(-2.0 * digamma(0.5), (-polygamma2(0.5)) ** (1.0 / 3.0))


def scale_passage_time(t, n: int, consts: Corollary1Constants | None = None):
    """(T - C n) / (sigma n^(1/3))."""
    k = consts or corollary1_constants()
    return (np.asarray(t) - k.C * n) / (k.sigma * n ** (1.0 / 3.0))


# ---------------------------------------------------------------- Tracy-Widom


@lru_cache(maxsize=16)
def _gauss_legendre_unit(order: int):
    t, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (t + 1.0), 0.5 * w


def airy_kernel_matrix(x: np.ndarray) -> np.ndarray:
    """K(x_i, x_j) = (Ai(x)Ai'(y) - Ai'(x)Ai(y)) / (x - y); Ai'(x)^2 - x Ai(x)^2 on the diagonal."""
    ai, aip = airy(x)
    dx = x[:, None] - x[None, :]
    near = np.abs(dx) < 1e-6
    num = ai[:, None] * aip[None, :] - aip[:, None] * ai[None, :]
    with np.errstate(divide="ignore", invalid="ignore"):
        k = np.where(near, 0.0, num / np.where(near, 1.0, dx))
    diag = aip * aip - x * ai * ai
    # nodes are distinct, so only the diagonal is ever "near"
    k[near] = np.broadcast_to(diag[:, None], k.shape)[near]
    return k


def fredholm_det_airy(r: float, order: int) -> float:
    t, w = _gauss_legendre_unit(order)
    x = r + t / (1.0 - t)
    wx = w / (1.0 - t) ** 2
    sw = np.sqrt(wx)
    a = np.eye(order) - sw[:, None] * airy_kernel_matrix(x) * sw[None, :]
    return float(np.linalg.det(a))


@dataclass(frozen=True)
class TwEvaluator:
    """Order-doubling Nystrom evaluator for F_GUE."""

    quadrature_order: int = 40
    tolerance: float = 1e-8
    max_order: int = 320

    def evaluate(self, r: float) -> tuple[float, int, float]:
        """Return (F(r), order used, |F(order) - F(order/2)|)."""
        if not math.isfinite(r):
            raise ValueError(f"finite r required, got {r}")
        q = self.quadrature_order
        prev = fredholm_det_airy(r, q)
        while 2 * q <= self.max_order:
            q *= 2
            cur = fredholm_det_airy(r, q)
            diff = abs(cur - prev)
            if diff < self.tolerance:
                return min(1.0, max(0.0, cur)), q, diff
            prev = cur
        raise ConvergenceError(f"F_GUE({r}) did not settle to {self.tolerance} by order {self.max_order}")

    def cdf(self, r: float) -> float:
        return self.evaluate(r)[0]


DEFAULT_EVALUATOR = TwEvaluator()


def tracy_widom_gue_cdf(r: float, evaluator: TwEvaluator = DEFAULT_EVALUATOR) -> float:
    return evaluator.cdf(r)


def tw_moments(evaluator: TwEvaluator = DEFAULT_EVALUATOR, order: int | None = None,
               lo: float = -9.0, hi: float = 7.0, nodes: int = 96) -> tuple[float, float]:
    """Mean and variance of F_GUE from integrals of the CDF.

    mean = int_0^inf (1 - F) - int_-inf^0 F;  E[X^2] = 2 int_0^inf r (1 - F) + 2 int_-inf^0 |r| F.
    Gauss-Legendre on [lo, 0] and [0, hi]; the truncated tails are below
    1e-12 for the defaults.  With ``order`` given, every F uses that fixed
    Nystrom order instead of the adaptive evaluator.
    """
    f = (lambda r: fredholm_det_airy(r, order)) if order else evaluator.cdf
    t, w = np.polynomial.legendre.leggauss(nodes)
    neg = 0.5 * lo * (1.0 - t)  # maps to [lo, 0]
    pos = 0.5 * hi * (t + 1.0)
    fn = np.array([f(r) for r in neg])
    fp = np.array([f(r) for r in pos])
    wn = w * (-0.5 * lo)
    wp = w * (0.5 * hi)
    mean = float(np.sum(wp * (1.0 - fp)) - np.sum(wn * fn))
    second = float(2.0 * np.sum(wp * pos * (1.0 - fp)) + 2.0 * np.sum(wn * (-neg) * fn))
    return mean, second - mean * mean


@dataclass
class TwTable:
    """F_GUE tabulated on a uniform grid, cubic Hermite interpolation in between.

    Slopes come from centred differences of the tabulated values, so the
    interpolant is exact for cubics; outside the grid it returns 0 or 1.
    """

    lo: float = -8.0
    hi: float = 6.0
    step: float = 0.01
    evaluator: TwEvaluator = field(default_factory=TwEvaluator)

    def __post_init__(self):
        n = int(round((self.hi - self.lo) / self.step))
        self.r = self.lo + self.step * np.arange(n + 1)
        self.f = np.array([self.evaluator.cdf(x) for x in self.r])
        self.f = np.maximum.accumulate(self.f)
        d = np.gradient(self.f, self.step, edge_order=2)
        self.df = d

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        h = self.step
        pos = np.clip((x - self.lo) / h, 0.0, len(self.r) - 1 - 1e-12)
        k = np.floor(pos).astype(int)
        s = pos - k
        f0, f1 = self.f[k], self.f[k + 1]
        d0, d1 = self.df[k] * h, self.df[k + 1] * h
        h00 = 2 * s**3 - 3 * s**2 + 1
        h10 = s**3 - 2 * s**2 + s
        h01 = -2 * s**3 + 3 * s**2
        h11 = s**3 - s**2
        out = h00 * f0 + h10 * d0 + h01 * f1 + h11 * d1
        out = np.where(x < self.lo, 0.0, np.where(x > self.hi, 1.0, out))
        return np.clip(out, 0.0, 1.0)

    def rows(self) -> np.ndarray:
        return np.column_stack([self.r, self.f])


_TABLE: TwTable | None = None


def default_tw_table() -> TwTable:
    global _TABLE
    if _TABLE is None:
        _TABLE = TwTable()
    return _TABLE


# ---------------------------------------------------------------- extreme-value normalizers


@dataclass(frozen=True)
class GumbelNormalizers:
    C_N: float
    sigma_N: float
    dist: DistributionSpec
    N: int


def gumbel_normalizers(dist: DistributionSpec, N: int) -> GumbelNormalizers:
    """C_N, sigma_N with (max of N draws - C_N) / sigma_N => Gumbel.

    Only the exponential law is tabulated (C_N = log N, sigma_N = 1).  Other
    laws in the Gumbel domain of attraction need their own normalizers and
    are rejected rather than guessed.
    """
    if int(N) != N or N < 1:
        raise ValueError(f"N must be a positive integer, got {N}")
    if dist.kind is Kind.EXPONENTIAL:
        return GumbelNormalizers(math.log(N), 1.0, dist, int(N))
    raise UnsupportedDistribution(
        f"no normalizers tabulated for {dist.kind.value}: only the exponential law is "
        "implemented among distributions in the Gumbel domain of attraction"
    )
