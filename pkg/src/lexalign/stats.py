"""Rank correlation, pooled t-test and percentile machinery.

p-values come from the regularized incomplete beta function evaluated with the
modified Lentz continued fraction, so small-df test vectors match tables
exactly rather than a normal approximation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_model import LexAlignError


class DegenerateDataError(LexAlignError):
    """Statistic undefined for this input (zero variance, empty sample, ...)."""


@dataclass(frozen=True)
class TTestResult:
    t: float
    df: int
    p: float


def average_ranks(x: np.ndarray) -> np.ndarray:
    """1-based ranks with ties given the mean rank of their run."""
    x = np.asarray(x, dtype=np.float64)
    # sort stability is irrelevant: tied values share one averaged rank
    order = np.argsort(x)
    sx = x[order]
    n = len(x)
    ranks = np.empty(n)
    tied = sx[1:] == sx[:-1]
    if not tied.any():
        ranks[order] = np.arange(1.0, n + 1.0)
        return ranks
    edge = np.flatnonzero(~tied)
    starts = np.concatenate(([0], edge + 1))
    ends = np.concatenate((edge, [n - 1]))
    run_rank = (starts + ends) / 2.0 + 1.0
    lengths = ends - starts + 1
    ranks[order] = np.repeat(run_rank, lengths)
    return ranks


def doubled_ranks(x: np.ndarray) -> np.ndarray:
    """2x average ranks: exact integers even when ties average to halves."""
    return 2.0 * average_ranks(x)


def pearson(x: np.ndarray, y: np.ndarray) -> float:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    xc = x - x.mean()
    yc = y - y.mean()
    denom = math.sqrt(float(xc @ xc) * float(yc @ yc))
    if denom == 0.0:
        raise DegenerateDataError("correlation undefined for constant input")
    return float(xc @ yc) / denom


def spearman(x, y) -> float:
    """Pearson correlation of tie-averaged ranks."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape or x.ndim != 1:
        raise ValueError("spearman needs two equal-length 1-d arrays")
    if len(x) < 2:
        raise ValueError("spearman needs at least 2 observations")
    return pearson(average_ranks(x), average_ranks(y))


def _betacf(a: float, b: float, x: float) -> float:
    # modified Lentz evaluation of the incomplete beta continued fraction
    tiny = 1e-300
    qab = a + b
    qap = a + 1.0
    qam = a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < tiny:
        d = tiny
    d = 1.0 / d
    h = d
    for m in range(1, 400):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < tiny:
            d = tiny
        c = 1.0 + aa / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < 3e-16:
            return h
    raise ArithmeticError("incomplete beta continued fraction did not converge")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b)."""
    if not 0.0 <= x <= 1.0:
        raise ValueError("x must be in [0, 1]")
    if x == 0.0:
        return 0.0
    if x == 1.0:
        return 1.0
    ln_bt = (
        math.lgamma(a + b)
        - math.lgamma(a)
        - math.lgamma(b)
        + a * math.log(x)
        + b * math.log1p(-x)
    )
    bt = math.exp(ln_bt)
    if x < (a + 1.0) / (a + b + 2.0):
        return bt * _betacf(a, b, x) / a
    return 1.0 - bt * _betacf(b, a, 1.0 - x) / b


def student_t_sf2(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t."""
    if t == 0.0:
        return 1.0
    x = df / (df + t * t)
    return betainc_reg(df / 2.0, 0.5, x)


def pooled_t_test(a, b) -> TTestResult:
    """Two-sample t-test with pooled variance; df = n_a + n_b - 2."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    na, nb = len(a), len(b)
    if na < 2 or nb < 2:
        raise ValueError("pooled t-test needs at least 2 observations per sample")
    df = na + nb - 2
    ma, mb = a.mean(), b.mean()
    ssa = float(((a - ma) ** 2).sum())
    ssb = float(((b - mb) ** 2).sum())
    sp2 = (ssa + ssb) / df
    if sp2 == 0.0:
        if ma == mb:
            return TTestResult(0.0, df, 1.0)
        raise DegenerateDataError("zero pooled variance with unequal means")
    t = (ma - mb) / math.sqrt(sp2 * (1.0 / na + 1.0 / nb))
    return TTestResult(float(t), df, student_t_sf2(float(t), df))


def percentile_linear(sorted_samples: np.ndarray, q: float) -> float:
    """Empirical quantile with linear interpolation on pre-sorted data."""
    n = len(sorted_samples)
    h = q * (n - 1)
    lo = int(math.floor(h))
    hi = min(lo + 1, n - 1)
    frac = h - lo
    return float(sorted_samples[lo] * (1.0 - frac) + sorted_samples[hi] * frac)


def percentile_ci(samples, level: float) -> tuple[float, float]:
    """Central percentile interval [(1-level)/2, 1-(1-level)/2]."""
    samples = np.asarray(samples, dtype=np.float64)
    if len(samples) < 2:
        raise ValueError("percentile_ci needs at least 2 samples")
    if not 0.0 < level < 1.0:
        raise ValueError("level must be in (0, 1)")
    s = np.sort(samples)
    alpha = (1.0 - level) / 2.0
    return percentile_linear(s, alpha), percentile_linear(s, 1.0 - alpha)
