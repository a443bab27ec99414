"""Exact one-sided binomial tail probabilities.

Point probabilities use Loader's saddle-point expansion (Stirling error
plus the deviance term ``bd0``), which keeps relative accuracy near machine
precision for n in the hundreds of thousands. Tails are summed with
``math.fsum`` over whichever side of the mean is shorter.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

_LN_2PI = math.log(2.0 * math.pi)

# stirlerr(n) = lgamma(n+1) - (n+1/2) log n + n - log sqrt(2 pi), for n = 1..15
_STIRLERR_TABLE = (
    0.0,
    0.08106146679532725821967,
    0.04134069595540929409382,
    0.02767792568499833914879,
    0.02079067210376509311152,
    0.01664469118982119216319,
    0.01387612882307074799875,
    0.01189670994589177009506,
    0.01041126526197209649748,
    0.009255462182712732917729,
    0.008330563433362871256469,
    0.007573675487951840794972,
    0.006942840107209529865664,
    0.00640899418800420706844,
    0.005951370112758847735624,
    0.005554733551962801371039,
)


class DomainError(ValueError):
    pass


@dataclass(frozen=True)
class BinomialTail:
    n: int
    k: int
    p: float

    def __post_init__(self):
        _check(self.k, self.n, self.p)

    @property
    def pvalue(self) -> float:
        return upper_tail_pvalue(self.k, self.n, self.p)


def _check(k: int, n: int, p: float) -> None:
    if n < 0 or k < 0 or k > n:
        raise DomainError(f"need 0 <= k <= n, got k={k}, n={n}")
    if not 0.0 < p < 1.0:
        raise DomainError(f"p must lie in (0, 1), got {p}")


def _stirlerr(n: int) -> float:
    if n <= 15:
        return _STIRLERR_TABLE[n]
    nn = float(n) * n
    s0, s1, s2, s3, s4 = 1 / 12, 1 / 360, 1 / 1260, 1 / 1680, 1 / 1188
    if n > 500:
        return (s0 - s1 / nn) / n
    if n > 80:
        return (s0 - (s1 - s2 / nn) / nn) / n
    if n > 35:
        return (s0 - (s1 - (s2 - s3 / nn) / nn) / nn) / n
    return (s0 - (s1 - (s2 - (s3 - s4 / nn) / nn) / nn) / nn) / n


def _bd0(x: float, np_: float) -> float:
    """x log(x/np) + np - x, evaluated without cancellation near x == np."""
    if abs(x - np_) < 0.1 * (x + np_):
        v = (x - np_) / (x + np_)
        s = (x - np_) * v
        ej = 2.0 * x * v
        v2 = v * v
        j = 1
        while True:
            ej *= v2
            s1 = s + ej / (2 * j + 1)
            if s1 == s:
                return s1
            s = s1
            j += 1
    return x * math.log(x / np_) + np_ - x


def binomial_pmf(i: int, n: int, p: float) -> float:
    q = 1.0 - p
    if i == 0:
        if n == 0:
            return 1.0
        lc = -_bd0(n, n * q) - n * p if p < 0.1 else n * math.log(q)
        return math.exp(lc)
    if i == n:
        lc = -_bd0(n, n * p) - n * q if q < 0.1 else n * math.log(p)
        return math.exp(lc)
    lc = _stirlerr(n) - _stirlerr(i) - _stirlerr(n - i) - _bd0(i, n * p) - _bd0(n - i, n * q)
    lf = _LN_2PI + math.log(i) + math.log1p(-i / n)
    return math.exp(lc - 0.5 * lf)


def _sum_upward(start: int, n: int, p: float) -> float:
    """P[X >= start], summing from start until terms stop mattering."""
    terms = []
    total = 0.0
    for i in range(start, n + 1):
        t = binomial_pmf(i, n, p)
        terms.append(t)
        total += t
        # past the mode the terms only shrink, geometrically
        if i > n * p and t <= total * 1e-18:
            break
    return math.fsum(terms)


def upper_tail_pvalue(k: int, n: int, p: float) -> float:
    """P[X >= k] for X ~ Binomial(n, p)."""
    _check(k, n, p)
    if k == 0:
        return 1.0
    if k <= n * p:
        lower = math.fsum(binomial_pmf(i, n, p) for i in range(0, k))
        return min(1.0, max(0.0, 1.0 - lower))
    return min(1.0, _sum_upward(k, n, p))


def binomial_test(k: int, n: int, p: float, alpha: float) -> tuple[float, bool]:
    """One-sided test of H0: success rate <= p. Returns (p-value, rejected)."""
    pvalue = upper_tail_pvalue(k, n, p)
    return pvalue, pvalue < alpha
