"""Bernoulli numbers and the special values zeta(alpha, 1-k), zeta*(beta, 1-k).

These are the constant terms and Dirichlet coefficients of every Eisenstein
expansion in the package.  Hurwitz values at alpha = 0 use the convention
x = 1 (the sum over n >= 1), so zeta(0, s) is the Riemann zeta and
zeta(0, 1-k) = -B_k(1)/k for every k >= 1.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

from .arith import DomainError, TorsionPoint
from .cyclotomic import CycloNum, zeta_pow

_bernoulli_cache: list = [Fraction(1)]
_bernoulli_lock = threading.Lock()


def bernoulli(k: int) -> Fraction:
    """B_k with B_1 = -1/2, by the defining recurrence."""
    if k < 0:
        raise DomainError("bernoulli needs k >= 0")
    with _bernoulli_lock:
        while len(_bernoulli_cache) <= k:
            n = len(_bernoulli_cache)
            # sum_{i<=n} binom(n+1, i) B_i = 0
            s = sum(Fraction(math.comb(n + 1, i)) * _bernoulli_cache[i] for i in range(n))
            _bernoulli_cache.append(-s / (n + 1))
        return _bernoulli_cache[k]


def bernoulli_poly(k: int, x) -> Fraction:
    """B_k(x) = sum binom(k, i) B_i x^(k-i)."""
    x = Fraction(x)
    return sum(Fraction(math.comb(k, i)) * bernoulli(i) * x ** (k - i)
               for i in range(k + 1))


def hurwitz_neg(alpha: TorsionPoint, k: int) -> Fraction:
    """zeta(alpha, 1-k) = -B_k(x)/k, x = {alpha} if alpha != 0 else 1."""
    if k < 1:
        raise DomainError("hurwitz_neg needs k >= 1")
    x = alpha.frac() if not alpha.is_zero() else Fraction(1)
    return -bernoulli_poly(k, x) / k


def dirichlet_star_neg(beta: TorsionPoint, k: int) -> CycloNum:
    """zeta*(beta, 1-k) = N^(k-1) sum_a zeta_N^(ab) zeta(a/N, 1-k), beta = b/N."""
    if k < 1:
        raise DomainError("dirichlet_star_neg needs k >= 1")
    N, b = beta.N, beta.a
    acc = CycloNum.from_rat(0, N)
    for a in range(1, N + 1):
        acc = acc + zeta_pow(N, a * b) * hurwitz_neg(TorsionPoint(a, N), k)
    return acc * Fraction(N) ** (k - 1)
