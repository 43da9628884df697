"""Digamma, its second derivative, and the Airy function Ai with Ai'.

Double precision throughout; accuracy targets are ~1e-12 absolute on the
ranges the Tracy-Widom evaluator touches.
"""
from __future__ import annotations

import math

import numba
import numpy as np

EULER_GAMMA = 0.57721566490153286060651209008240243
LN2 = 0.69314718055994530941723212145817657
ZETA3 = 1.20205690315959428539973816151144999

# Ai(0) = 3^(-2/3) / Gamma(2/3),  -Ai'(0) = 3^(-1/3) / Gamma(1/3)
AI0 = 0.355028053887817239260063186004183177
AIP0 = 0.258819403792806798405183560189203963

# Maclaurin window; outside it the asymptotic expansions take over.  Both
# ends are where the two routes agree to ~1e-12: the oscillatory expansion
# needs |x| >= 7, the decaying one x >= 5.5 (it is only 5e-11 good at 4.5).
SERIES_MAX = 5.5
SERIES_MIN = -7.0
AI_SATURATE = 105.0  # exp(-2/3 x^1.5) underflows beyond this

# Bernoulli numbers B_2k for the digamma asymptotic series
_B2K = (1 / 6, -1 / 30, 1 / 42, -1 / 30, 5 / 66, -691 / 2730, 7 / 6, -3617 / 510)


class DomainError(ValueError):
    pass


def digamma(x: float) -> float:
    """Psi(x) for x > 0: shift up with Psi(x) = Psi(x+1) - 1/x, then the asymptotic series."""
    if not x > 0:
        raise DomainError(f"digamma implemented for x > 0 only, got {x}")
    acc = 0.0
    while x < 12.0:
        acc -= 1.0 / x
        x += 1.0
    inv2 = 1.0 / (x * x)
    tail = 0.0
    p = inv2
    for k, b in enumerate(_B2K, start=1):
        tail += b / (2 * k) * p
        p *= inv2
    return acc + math.log(x) - 0.5 / x - tail


def polygamma2(x: float) -> float:
    """Psi''(x) = -2 sum_{k>=0} (x+k)^-3, for x > 0.

    The first terms are summed directly until x + K >= 20; the tail is the
    asymptotic expansion of Psi'' at x + K.
    """
    if not x > 0:
        raise DomainError(f"polygamma2 implemented for x > 0 only, got {x}")
    head = 0.0
    while x < 20.0:
        head += x ** -3
        x += 1.0
    # Psi''(y) ~ -1/y^2 - 1/y^3 - sum_k B_2k (2k+1) / y^(2k+2)
    y = x
    tail = -1.0 / y**2 - 1.0 / y**3
    p = y ** -4
    for k, b in enumerate(_B2K, start=1):
        tail -= b * (2 * k + 1) * p
        p /= y * y
    return -2.0 * head + tail


# ---------------------------------------------------------------- Airy


@numba.njit(cache=True)
def _airy_series(x):
    x3 = x * x * x
    f = 1.0
    g = x
    gp = 1.0
    tf = 1.0
    tg = x
    tfp = 0.5 * x * x
    tgp = 1.0
    fp = tfp
    k = 1
    while True:
        tf *= x3 / ((3 * k - 1) * (3 * k))
        tg *= x3 / ((3 * k) * (3 * k + 1))
        if k >= 2:
            tfp *= x3 / ((3 * k - 3) * (3 * k - 1))
            fp += tfp
        tgp *= x3 / ((3 * k - 2) * (3 * k))
        f += tf
        g += tg
        gp += tgp
        if k > 3 and abs(tf) + abs(tg) + abs(tfp) + abs(tgp) < 1e-17 * (abs(f) + abs(g) + abs(fp) + abs(gp)):
            break
        k += 1
    return AI0 * f - AIP0 * g, AI0 * fp - AIP0 * gp


@numba.njit(cache=True)
def _u_coeffs(kmax):
    u = np.empty(kmax + 1)
    u[0] = 1.0
    for k in range(1, kmax + 1):
        u[k] = u[k - 1] * (6 * k - 5) * (6 * k - 3) * (6 * k - 1) / ((2 * k - 1) * 216.0 * k)
    return u


_KMAX = 80


@numba.njit(cache=True)
def _airy_asymptotic_pos(x):
    z = 2.0 / 3.0 * x * math.sqrt(x)
    u = _u_coeffs(_KMAX)
    sa = 1.0
    sv = 1.0
    best = 1.0
    zk = 1.0
    for k in range(1, _KMAX + 1):
        zk *= z
        term = u[k] / zk
        if term >= best:
            break
        best = term
        sgn = 1.0 if k % 2 == 0 else -1.0
        sa += sgn * term
        sv -= sgn * (6 * k + 1) / (6 * k - 1) * term
    pre = math.exp(-z) / (2.0 * math.sqrt(math.pi))
    q = x ** 0.25
    return pre / q * sa, -pre * q * sv


@numba.njit(cache=True)
def _airy_asymptotic_neg(x):
    y = -x
    z = 2.0 / 3.0 * y * math.sqrt(y)
    u = _u_coeffs(_KMAX)
    # truncate at the smallest term
    kstop = _KMAX
    best = 1.0
    zk = 1.0
    for k in range(1, _KMAX + 1):
        zk *= z
        if u[k] / zk >= best:
            kstop = k
            break
        best = u[k] / zk
    p = 0.0
    q = 0.0
    pv = 0.0
    qv = 0.0
    zk = 1.0
    for k in range(kstop):
        a = u[k] / zk
        v = a if k == 0 else -(6 * k + 1) / (6 * k - 1) * a
        if k % 2 == 0:
            s = 1.0 if (k // 2) % 2 == 0 else -1.0
            p += s * a
            pv += s * v
        else:
            s = 1.0 if ((k - 1) // 2) % 2 == 0 else -1.0
            q += s * a
            qv += s * v
        zk *= z
    th = z - math.pi / 4.0
    c = math.cos(th)
    sn = math.sin(th)
    r = y ** 0.25
    sp = math.sqrt(math.pi)
    return (c * p + sn * q) / (sp * r), r / sp * (sn * pv - c * qv)


@numba.njit(cache=True)
def airy_pair(x):
    """(Ai(x), Ai'(x))."""
    if x > AI_SATURATE:
        return 0.0, 0.0
    if x > SERIES_MAX:
        return _airy_asymptotic_pos(x)
    if x < SERIES_MIN:
        return _airy_asymptotic_neg(x)
    return _airy_series(x)


@numba.njit(cache=True)
def _airy_many(xs, ai, aip):
    for t in range(xs.size):
        ai[t], aip[t] = airy_pair(xs[t])


def airy(x):
    """Vectorized (Ai, Ai') over an array-like."""
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=float)).ravel())
    ai = np.empty_like(xs)
    aip = np.empty_like(xs)
    _airy_many(xs, ai, aip)
    shape = np.shape(x)
    return ai.reshape(shape), aip.reshape(shape)


def airy_ai(x):
    """Ai(x); Maclaurin series on [-7, 5.5], asymptotic expansions outside, 0 past 105."""
    a, _ = airy(x)
    return float(a) if np.ndim(x) == 0 else a


def airy_ai_prime(x):
    _, b = airy(x)
    return float(b) if np.ndim(x) == 0 else b


def airy_series(x: float) -> tuple[float, float]:
    """The Maclaurin route alone, for cross-checks at the switch points."""
    return _airy_series(float(x))


def airy_asymptotic(x: float) -> tuple[float, float]:
    """The asymptotic route alone (decaying form for x > 0, oscillatory for x < 0)."""
    x = float(x)
    if x > 0:
        return _airy_asymptotic_pos(x)
    if x < 0:
        return _airy_asymptotic_neg(x)
    raise DomainError("asymptotic expansions need x != 0")
