"""Paired significance tests: Student t and Wilcoxon signed-rank.

The t-test p-value comes from the regularized incomplete beta function,
evaluated by a modified-Lentz continued fraction. The Wilcoxon test is
exact (full sign enumeration) up to n = 12 non-zero differences and a
normal approximation with continuity correction above, reporting Z.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

EXACT_WILCOXON_MAX_N = 12
_TINY = 1e-300
_CF_TOL = 1e-14
_CF_MAX_ITER = 500


@dataclass(frozen=True)
class TestResult:
    kind: str  # "paired_t" | "wilcoxon"
    statistic: float
    p_value: float
    n: int


def _betacf(a: float, b: float, x: float) -> float:
    qab, qap, qam = a + b, a + 1.0, a - 1.0
    c = 1.0
    d = 1.0 - qab * x / qap
    if abs(d) < _TINY:
        d = _TINY
    d = 1.0 / d
    h = d
    for m in range(1, _CF_MAX_ITER + 1):
        m2 = 2 * m
        aa = m * (b - m) * x / ((qam + m2) * (a + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        h *= d * c
        aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2))
        d = 1.0 + aa * d
        if abs(d) < _TINY:
            d = _TINY
        c = 1.0 + aa / c
        if abs(c) < _TINY:
            c = _TINY
        d = 1.0 / d
        delta = d * c
        h *= delta
        if abs(delta - 1.0) < _CF_TOL:
            return h
    raise ArithmeticError(f"incomplete beta continued fraction failed to converge (a={a}, b={b}, x={x})")


def betainc_reg(a: float, b: float, x: float) -> float:
    """Regularized incomplete beta I_x(a, b) for a, b > 0 and x in [0, 1]."""
    if a <= 0 or b <= 0:
        raise ValueError("betainc_reg requires a, b > 0")
    if x <= 0.0:
        return 0.0
    if x >= 1.0:
        return 1.0
    ln_front = (
        math.lgamma(a + b) - math.lgamma(a) - math.lgamma(b)
        + a * math.log(x) + b * math.log1p(-x)
    )
    front = math.exp(ln_front)
    if x < (a + 1.0) / (a + b + 2.0):
        return front * _betacf(a, b, x) / a
    return 1.0 - front * _betacf(b, a, 1.0 - x) / b


def t_two_sided_p(t: float, df: int) -> float:
    """Two-sided tail probability of Student's t with df degrees of freedom."""
    if df < 1:
        raise ValueError(f"df must be >= 1, got {df}")
    if math.isinf(t):
        return 0.0
    x = df / (df + t * t)
    return betainc_reg(df / 2.0, 0.5, x)


def _mean_sd(values: Sequence[float]) -> tuple[float, float]:
    n = len(values)
    mean = sum(values) / n
    var = sum((v - mean) ** 2 for v in values) / (n - 1)
    return mean, math.sqrt(var)


def paired_t_test(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Two-sided paired t-test on elementwise differences a - b.

    All-zero differences yield the degenerate sentinel (t=0, p=1); a
    non-zero constant difference yields (t=+/-inf, p=0).
    """
    if len(a) != len(b):
        raise ValueError(f"paired samples must have equal length ({len(a)} vs {len(b)})")
    n = len(a)
    if n < 2:
        raise ValueError("paired t-test needs n >= 2")
    d = [x - y for x, y in zip(a, b)]
    if all(v == 0.0 for v in d):
        return TestResult(kind="paired_t", statistic=0.0, p_value=1.0, n=n)
    mean, sd = _mean_sd(d)
    if sd == 0.0:
        t = math.inf if mean > 0 else -math.inf
        return TestResult(kind="paired_t", statistic=t, p_value=0.0, n=n)
    t = mean / (sd / math.sqrt(n))
    return TestResult(kind="paired_t", statistic=t, p_value=t_two_sided_p(t, n - 1), n=n)


def ranks_mean_ties(values: Sequence[float]) -> list[float]:
    """1-based ranks; tied values share the mean of their rank range."""
    n = len(values)
    order = sorted(range(n), key=lambda i: values[i])
    ranks = [0.0] * n
    i = 0
    while i < n:
        j = i
        while j + 1 < n and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j + 2) / 2.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _normal_cdf(z: float) -> float:
    return 0.5 * math.erfc(-z / math.sqrt(2.0))


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float]) -> TestResult:
    """Two-sided Wilcoxon signed-rank test on paired samples.

    Zero differences are dropped. For n <= 12 the p-value enumerates all
    2^n sign assignments exactly; beyond that a continuity-corrected
    normal approximation is used and the statistic reported is Z. For the
    exact branch the statistic is W = min(W+, W-).
    """
    if len(a) != len(b):
        raise ValueError(f"paired samples must have equal length ({len(a)} vs {len(b)})")
    d = [x - y for x, y in zip(a, b) if x - y != 0.0]
    n = len(d)
    if n == 0:
        return TestResult(kind="wilcoxon", statistic=0.0, p_value=1.0, n=0)
    ranks = ranks_mean_ties([abs(v) for v in d])
    w_plus = sum(r for r, v in zip(ranks, d) if v > 0)
    w_minus = sum(r for r, v in zip(ranks, d) if v < 0)
    w = min(w_plus, w_minus)
    if n <= EXACT_WILCOXON_MAX_N:
        total = sum(ranks)
        count = 0
        for mask in range(1 << n):
            wp = 0.0
            for i in range(n):
                if mask >> i & 1:
                    wp += ranks[i]
            if min(wp, total - wp) <= w + 1e-12:
                count += 1
        return TestResult(kind="wilcoxon", statistic=w, p_value=count / (1 << n), n=n)
    mu = n * (n + 1) / 4.0
    sigma = math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0)
    z = (w - mu + 0.5) / sigma
    p = min(1.0, 2.0 * _normal_cdf(z))
    return TestResult(kind="wilcoxon", statistic=z, p_value=p, n=n)
