"""Measures on Z_p through their Amice transforms, and the p-adic Hurwitz zeta.

An AmiceSeries stores the binomial moments b_n = integral of binom(x, n);
polynomials integrate exactly through the Stirling expansion and continuous
functions through their Mahler coefficients (finite differences at 0), with
an empirical tail certificate taken over a trailing window.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .arith import (DomainError, PadicCtx, PadicNum, PrecisionError,
                    TorsionPoint, angle, char_power, stirling2, teichmuller, vp)


class AmiceSeries:
    """Truncated Amice transform: b[n] = integral of binom(x, n) d mu, n < D."""

    __slots__ = ("ctx", "b")

    def __init__(self, ctx: PadicCtx, b: list):
        self.ctx = ctx
        self.b = list(b)

    @property
    def D(self) -> int:
        return len(self.b)

    def moment(self, n: int) -> PadicNum:
        return self.b[n]

    def is_bounded(self) -> bool:
        """Boundedness of the measure: all stored moments p-integral."""
        return all(x.is_zero() or x.val >= 0 for x in self.b)


def mu_c(c: int, ctx: PadicCtx, D: int) -> AmiceSeries:
    """The smoothing measure with Amice transform c^2/T - c/((1+T)^(1/c) - 1).

    Computed as the power series quotient
    (c^2 ((1+T)^(1/c) - 1) - c T) / (T ((1+T)^(1/c) - 1)):
    numerator and denominator both start at T^2 with unit leading
    coefficient, so the division is precision-stable.
    """
    if math.gcd(c, ctx.p) != 1:
        raise DomainError(f"c = {c} is not a unit at p = {ctx.p}")
    work = PadicCtx(ctx.p, ctx.N + 2)
    cinv = PadicNum.from_rat(work, Fraction(1, c))
    # g[k] = binom(1/c, k), coefficients of (1+T)^(1/c), k <= D+2
    g = [PadicNum.from_rat(work, 1)]
    for k in range(1, D + 3):
        g.append(g[-1] * (cinv - (k - 1)) * Fraction(1, k))
    # numerator: c^2((1+T)^(1/c)-1) - cT = sum_{k>=2} c^2 g[k] T^k
    num = [g[k] * (c * c) for k in range(2, D + 3)]
    # denominator: T((1+T)^(1/c)-1) = sum_{k>=1} g[k] T^(k+1), shifted to start at T^2
    den = [g[k] for k in range(1, D + 3)]
    # divide num/den as power series; den[0] = 1/c is a unit
    inv0 = den[0].inverse()
    out = []
    num = num[:]
    for k in range(D):
        t = num[k] * inv0
        out.append(t)
        for j in range(1, len(den)):
            if k + j < len(num):
                num[k + j] = num[k + j] - t * den[j]
    return AmiceSeries(ctx, [x.truncate(ctx.N) for x in out])


def integrate_poly(mu: AmiceSeries, coeffs: list) -> PadicNum:
    """Integrate the polynomial sum a_k x^k exactly: x^k = sum S(k,n) n! binom(x,n)."""
    if len(coeffs) > mu.D:
        raise DomainError(f"degree {len(coeffs) - 1} >= truncation D = {mu.D}")
    ctx = mu.ctx
    acc = PadicNum.zero(ctx, ctx.N)
    for k, a in enumerate(coeffs):
        if isinstance(a, (int, Fraction)):
            a = PadicNum.from_rat(ctx, a)
        if not a:
            continue
        for n in range(k + 1):
            s = stirling2(k, n)
            if s:
                acc = acc + a * mu.b[n] * Fraction(s * math.factorial(n))
    return acc


def mahler_coeffs(f, D: int, ctx: PadicCtx) -> list:
    """First D Mahler coefficients of f: iterated finite differences at 0."""
    row = [f(x) for x in range(D)]
    for i, v in enumerate(row):
        if isinstance(v, (int, Fraction)):
            row[i] = PadicNum.from_rat(ctx, v)
    out = [row[0]]
    for _ in range(1, D):
        row = [row[i + 1] - row[i] for i in range(len(row) - 1)]
        out.append(row[0])
    return out


def integrate_mahler(mu: AmiceSeries, f, target_prec: int | None = None,
                     window: int = 8) -> PadicNum:
    """Sum c_n(f) b_n for n < D with an empirical tail certificate.

    The certificate is the largest valuation of c_n b_n over the trailing
    window of terms; the integration fails if it undercuts the requested
    precision.
    """
    ctx = mu.ctx
    if target_prec is None:
        target_prec = ctx.N
    cs = mahler_coeffs(f, mu.D, ctx)
    acc = PadicNum.zero(ctx, ctx.N)
    tail = []
    for n, (cn, bn) in enumerate(zip(cs, mu.b)):
        term = cn * bn
        acc = acc + term
        if n >= mu.D - window:
            tail.append(term.val if term.is_zero() else term.valuation())
    cert = max(tail) if tail else 0
    if cert < target_prec:
        raise PrecisionError(
            f"tail certificate p^{cert} below requested p^{target_prec}; "
            f"increase the truncation order D = {mu.D}")
    return acc


class AffineUnitMap:
    """x -> x_alpha = ord(alpha)({alpha} + x), landing in one unit residue disc.

    Requires v_p(ord alpha) >= 1, which makes omega(x_alpha) constant.
    """

    __slots__ = ("alpha", "ord", "frac", "p")

    def __init__(self, alpha: TorsionPoint, p: int):
        if alpha.N == 1 or vp(alpha.N, p) < 1:
            raise DomainError(f"ord({alpha}) = {alpha.N} needs a positive p-valuation")
        self.alpha = alpha
        self.ord = alpha.N
        self.frac = alpha.frac()
        self.p = p

    def value(self, x, ctx: PadicCtx) -> PadicNum:
        return PadicNum.from_rat(ctx, self.ord * (self.frac + Fraction(x)))

    def omega0(self, ctx: PadicCtx) -> PadicNum:
        """omega(0_alpha) = omega(ord(alpha) {alpha}), the constant Teichmueller part."""
        return teichmuller(self.ord * self.frac, ctx)

    def angle_at(self, x: int, ctx: PadicCtx) -> PadicNum:
        return angle(self.value(x, ctx))


def default_trunc(ctx: PadicCtx, xmap: AffineUnitMap, target: int) -> int:
    """Heuristic Mahler truncation: coefficients decay like v*(1 - 1/(p-1)) per step."""
    v = vp(xmap.ord, ctx.p)
    rate = Fraction(v) - Fraction(1, ctx.p - 1)
    D = int(target / rate) + 16
    return D


def padic_hurwitz_zeta(c: int, xmap: AffineUnitMap, j: int, kappa,
                       ctx: PadicCtx, D: int | None = None,
                       target_prec: int | None = None,
                       window: int = 8) -> PadicNum:
    """-omega(0_alpha)^i * integral of <x_alpha>^(s+1-j) d mu_c at kappa = (i, s).

    kappa is any object with integer attribute ``branch`` and exponent
    ``exponent`` (int, Fraction or PadicNum); integer weights take the exact
    power route.
    """
    if j < 1:
        raise DomainError("j >= 1 required")
    if target_prec is None:
        target_prec = ctx.N
    if D is None:
        D = default_trunc(ctx, xmap, target_prec)
    i = kappa.branch
    s = kappa.exponent
    mu = mu_c(c, ctx, D)
    if isinstance(s, PadicNum):
        sp = s - (j - 1)
    else:
        sp = Fraction(s) + 1 - j
    if isinstance(sp, Fraction) and sp.denominator == 1 and sp >= 0:
        e = int(sp)
        f = lambda x: xmap.angle_at(x, ctx) ** e
    else:
        f = lambda x: char_power(xmap.value(x, ctx), sp)
    integral = integrate_mahler(mu, f, target_prec=target_prec, window=window)
    om = xmap.omega0(ctx)
    return -(om ** (i % (ctx.p - 1))) * integral
