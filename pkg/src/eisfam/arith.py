"""Exact rational and p-adic arithmetic primitives.

Rationals are plain ``fractions.Fraction``.  p-adic numbers track their own
certified absolute precision: a nonzero value is known exactly modulo
p^(val + rprec), a zero is an explicit "zero to precision" state.  All
operations are pure; nothing here mutates shared state except the small
memo tables, which are only ever appended to.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache


class DomainError(ValueError):
    """Raised when an argument is outside an operation's domain."""


class PrecisionError(ArithmeticError):
    """Raised when an operation cannot certify the requested precision."""


def vp(x, p: int) -> int:
    """p-adic valuation of a nonzero int or Fraction."""
    if isinstance(x, Fraction):
        if x == 0:
            raise ZeroDivisionError("valuation of 0")
        return vp(x.numerator, p) - vp(x.denominator, p)
    if x == 0:
        raise ZeroDivisionError("valuation of 0")
    v = 0
    x = abs(x)
    while x % p == 0:
        x //= p
        v += 1
    return v


def _is_prime(n: int) -> bool:
    if n < 2:
        return False
    for q in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31):
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PadicCtx:
    """Working context: an odd prime p and a relative precision of N digits."""

    __slots__ = ("p", "N")

    def __init__(self, p: int, N: int):
        if p == 2 or not _is_prime(p):
            raise DomainError(f"p must be an odd prime, got {p}")
        if N < 1:
            raise DomainError("precision N must be >= 1")
        self.p = p
        self.N = N

    def __eq__(self, other):
        return isinstance(other, PadicCtx) and (self.p, self.N) == (other.p, other.N)

    def __hash__(self):
        return hash((self.p, self.N))

    def __repr__(self):
        return f"PadicCtx(p={self.p}, N={self.N})"


class PadicNum:
    """Element of Q_p with tracked absolute precision.

    Nonzero: the value is p^val * unit, with unit a unit residue known modulo
    p^rprec, so the value is certified modulo p^(val+rprec).  Zero: unit == 0,
    rprec == 0 and val records the certified precision (value ≡ 0 mod p^val).
    """

    __slots__ = ("ctx", "val", "unit", "rprec")

    def __init__(self, ctx: PadicCtx, val: int, unit: int, rprec: int):
        self.ctx = ctx
        if unit == 0:
            self.val = val
            self.unit = 0
            self.rprec = 0
        else:
            rprec = min(rprec, ctx.N)
            m = ctx.p ** rprec
            u = unit % m
            if u % ctx.p == 0:
                raise ValueError("unit part divisible by p")
            self.val = val
            self.unit = u
            self.rprec = rprec

    # -- constructors ---------------------------------------------------

    @classmethod
    def from_rat(cls, ctx: PadicCtx, x) -> "PadicNum":
        """Exact image of an int or Fraction, at full context precision."""
        x = Fraction(x)
        if x == 0:
            return cls.zero(ctx, ctx.N)
        v = vp(x, ctx.p)
        m = ctx.p ** ctx.N
        num = x.numerator // ctx.p ** max(0, v)
        den = x.denominator // ctx.p ** max(0, -v)
        u = num * pow(den, -1, m) % m
        return cls(ctx, v, u, ctx.N)

    @classmethod
    def zero(cls, ctx: PadicCtx, abs_prec: int | None = None) -> "PadicNum":
        return cls(ctx, ctx.N if abs_prec is None else abs_prec, 0, 0)

    # -- queries ----------------------------------------------------------

    @property
    def abs_prec(self) -> int:
        return self.val + self.rprec

    def is_zero(self) -> bool:
        return self.unit == 0

    def __bool__(self):
        return self.unit != 0

    def valuation(self) -> int:
        if self.unit == 0:
            raise PrecisionError(f"zero to precision {self.val}: valuation unknown")
        return self.val

    def is_unit(self) -> bool:
        return self.unit != 0 and self.val == 0

    def residue(self, k: int) -> int:
        """The value mod p^k as an integer in [0, p^k).  Needs val >= 0."""
        if self.abs_prec < k:
            raise PrecisionError(f"known mod p^{self.abs_prec}, requested p^{k}")
        if self.unit == 0:
            return 0
        if self.val < 0:
            raise DomainError("negative valuation has no integer residue")
        return self.unit * self.ctx.p ** self.val % self.ctx.p ** k

    def lift(self) -> int:
        """Integer lift mod p^abs_prec (val >= 0)."""
        return self.residue(self.abs_prec)

    def is_zero_mod(self, k: int) -> bool:
        if self.abs_prec < k:
            raise PrecisionError(f"known mod p^{self.abs_prec}, requested p^{k}")
        return self.unit == 0 or self.val >= k

    def eq_mod(self, other: "PadicNum", k: int) -> bool:
        return (self - other).is_zero_mod(k)

    def truncate(self, N2: int) -> "PadicNum":
        """The same value viewed at relative precision N2 <= current."""
        ctx2 = PadicCtx(self.ctx.p, N2)
        if self.unit == 0:
            return PadicNum.zero(ctx2, min(self.val, N2))
        return PadicNum(ctx2, self.val, self.unit % ctx2.p ** min(self.rprec, N2),
                        min(self.rprec, N2))

    # -- arithmetic -------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicNum):
            return other
        if isinstance(other, (int, Fraction)):
            return PadicNum.from_rat(self.ctx, other)
        return NotImplemented

    def __add__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        p = self.ctx.p
        a = min(self.abs_prec, o.abs_prec)
        if self.unit == 0 and o.unit == 0:
            return PadicNum.zero(self.ctx, a)
        lo = min([x.val for x in (self, o) if x.unit != 0])
        if lo >= a:
            return PadicNum.zero(self.ctx, a)
        m = p ** (a - lo)
        s = 0
        for x in (self, o):
            if x.unit != 0:
                s += x.unit * p ** (x.val - lo)
        s %= m
        if s == 0:
            return PadicNum.zero(self.ctx, a)
        w = vp(s, p)
        return PadicNum(self.ctx, lo + w, s // p ** w, a - lo - w)

    __radd__ = __add__

    def __neg__(self):
        if self.unit == 0:
            return self
        return PadicNum(self.ctx, self.val, (-self.unit) % self.ctx.p ** self.rprec,
                        self.rprec)

    def __sub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self + (-o)

    def __rsub__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else o + (-self)

    def __mul__(self, other):
        o = self._coerce(other)
        if o is NotImplemented:
            return o
        if self.unit == 0 or o.unit == 0:
            # v(xy) >= certified-zero precision + valuation of the other factor
            return PadicNum.zero(self.ctx, self.val + o.val)
        r = min(self.rprec, o.rprec)
        return PadicNum(self.ctx, self.val + o.val,
                        self.unit * o.unit % self.ctx.p ** r, r)

    __rmul__ = __mul__

    def inverse(self) -> "PadicNum":
        if self.unit == 0:
            raise DomainError("cannot invert zero-to-precision")
        m = self.ctx.p ** self.rprec
        return PadicNum(self.ctx, -self.val, pow(self.unit, -1, m), self.rprec)

    def __truediv__(self, other):
        o = self._coerce(other)
        return NotImplemented if o is NotImplemented else self * o.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        if n == 0:
            return PadicNum.from_rat(self.ctx, 1)
        if self.unit == 0:
            return PadicNum.zero(self.ctx, self.val * n)
        return PadicNum(self.ctx, self.val * n,
                        pow(self.unit, n, self.ctx.p ** self.rprec), self.rprec)

    def __eq__(self, other):
        """Equality at the minimum of the two certified precisions."""
        o = self._coerce(other)
        if o is NotImplemented:
            return NotImplemented
        return self.eq_mod(o, min(self.abs_prec, o.abs_prec))

    def __hash__(self):
        raise TypeError("PadicNum compares at precision; not hashable")

    def digits(self) -> str:
        """Unit part as a base-p digit string d0 d1 ... (least significant first)."""
        if self.unit == 0:
            return ""
        u, out = self.unit, []
        for _ in range(self.rprec):
            u, d = divmod(u, self.ctx.p)
            out.append(str(d))
        return "".join(out) if self.ctx.p < 10 else ".".join(out)

    def __repr__(self):
        if self.unit == 0:
            return f"O(p^{self.val})"
        return f"p^{self.val}*({self.unit} mod p^{self.rprec})"

    def to_json(self) -> dict:
        return {"p": self.ctx.p, "val": self.val, "unit": self.digits(),
                "rprec": self.rprec}


# -- Teichmueller character and unit decomposition -------------------------


def teichmuller(u, ctx: PadicCtx) -> PadicNum:
    """omega(u): the (p-1)-st root of unity congruent to u mod p.

    Computed by iterating x -> x^p to its fixed point mod p^N; at most N
    iterations are needed and the loop stops at stabilization.
    """
    x = u if isinstance(u, PadicNum) else PadicNum.from_rat(ctx, u)
    if not x.is_unit():
        raise DomainError("teichmuller needs a p-adic unit")
    m = ctx.p ** ctx.N
    t = x.unit % m
    for _ in range(ctx.N + 1):
        t2 = pow(t, ctx.p, m)
        if t2 == t:
            break
        t = t2
    return PadicNum(ctx, 0, t, ctx.N)


def angle(u, ctx: PadicCtx | None = None) -> PadicNum:
    """The principal-unit component <u> = u / omega(u), in 1 + p Z_p."""
    if not isinstance(u, PadicNum):
        u = PadicNum.from_rat(ctx, u)
    if not u.is_unit():
        raise DomainError("angle needs a p-adic unit")
    return u * teichmuller(u, u.ctx).inverse()


def padic_log(x: PadicNum) -> PadicNum:
    """log on 1 + p Z_p by the alternating series, certified to x's precision."""
    ctx = x.ctx
    z = x - 1
    if z.unit != 0 and z.val < 1:
        raise DomainError("padic_log needs v_p(x-1) >= 1")
    A = x.abs_prec
    if z.unit == 0:
        return PadicNum.zero(ctx, min(A, z.val))
    p, vz = ctx.p, z.val
    nmax = 1
    while nmax * vz - int(math.log(nmax, p)) < A:
        nmax += 1
    guard = int(math.log(nmax, p)) + 2
    M = p ** (A + guard)
    zl = z.unit * p ** vz % M
    acc, zn = 0, 1
    for n in range(1, nmax + 1):
        zn = zn * zl % M
        e = vp(n, p)
        t = zn * pow(n // p ** e, -1, M) % M
        t //= p ** e
        acc = (acc - t if n % 2 == 0 else acc + t) % p ** A
    if acc == 0:
        return PadicNum.zero(ctx, A)
    w = vp(acc, p)
    return PadicNum(ctx, w, acc // p ** w, A - w)


def padic_exp(y: PadicNum) -> PadicNum:
    """exp on p Z_p (p odd), certified to y's precision."""
    ctx = y.ctx
    if y.unit == 0:
        one = PadicNum.from_rat(ctx, 1)
        return PadicNum(ctx, 0, 1, min(ctx.N, y.val)) if y.val < ctx.N else one
    if y.val < 1:
        raise DomainError("padic_exp needs v_p(y) >= 1")
    p, A = ctx.p, y.abs_prec
    # v_p(y^n/n!) >= n*val - (n-1)/(p-1) grows since val >= 1 and p >= 3
    nmax = 1
    while nmax * y.val - (nmax - 1) // (p - 1) < A:
        nmax += 1
    guard = (nmax - 1) // (p - 1) + 2
    M = p ** (A + guard)
    yl = y.unit * p ** y.val % M
    acc, term = 1, 1
    for n in range(1, nmax + 1):
        e = vp(n, p)
        term = term * yl % M
        term = term * pow(n // p ** e, -1, M) % M
        assert term % p ** e == 0
        term //= p ** e
        acc = (acc + term) % p ** A
    w = vp(acc, p) if acc else A
    if acc == 0:
        return PadicNum.zero(ctx, A)
    return PadicNum(ctx, w, acc // p ** w, A - w)


def char_power(u, s, ctx: PadicCtx | None = None) -> PadicNum:
    """<u>^s for a unit u and exponent s in Z_p (int, Fraction or PadicNum).

    Integer exponents reduce to repeated multiplication of <u>; general
    exponents go through exp(s * log<u>).
    """
    if not isinstance(u, PadicNum):
        u = PadicNum.from_rat(ctx, u)
    a = angle(u)
    if isinstance(s, int):
        return a ** s
    if isinstance(s, Fraction) and s.denominator == 1:
        return a ** s.numerator
    if not isinstance(s, PadicNum):
        s = PadicNum.from_rat(u.ctx, s)
    return padic_exp(s * padic_log(a))


# -- combinatorial helpers --------------------------------------------------


@lru_cache(maxsize=None)
def stirling2(k: int, n: int) -> int:
    """Stirling number of the second kind S(k, n)."""
    if k < 0 or n < 0:
        raise DomainError("stirling2 needs k, n >= 0")
    if k == n:
        return 1
    if n == 0 or n > k:
        return 0
    return n * stirling2(k - 1, n) + stirling2(k - 1, n - 1)


def binom_rat(a, n: int):
    """Generalized binomial coefficient a(a-1)...(a-n+1)/n! over Fraction or PadicNum."""
    if n < 0:
        raise DomainError("binom_rat needs n >= 0")
    if isinstance(a, int):
        a = Fraction(a)
    if n == 0:
        return PadicNum.from_rat(a.ctx, 1) if isinstance(a, PadicNum) else Fraction(1)
    num = a
    for i in range(1, n):
        num = num * (a - i)
    if isinstance(num, PadicNum):
        return num * PadicNum.from_rat(num.ctx, Fraction(1, math.factorial(n)))
    return num / math.factorial(n)


# -- torsion points of Q/Z ---------------------------------------------------


class TorsionPoint:
    """alpha = a/N mod Z in lowest terms; ord(alpha) = N, frac in [0,1)."""

    __slots__ = ("a", "N")

    def __init__(self, a: int, N: int):
        if N < 1:
            raise DomainError("order must be positive")
        a %= N
        g = math.gcd(a, N)
        if g != 1:
            a, N = a // g, N // g
        if a == 0:
            N = 1
        self.a = a
        self.N = N

    @classmethod
    def from_fraction(cls, x) -> "TorsionPoint":
        x = Fraction(x)
        return cls(x.numerator % x.denominator, x.denominator)

    def frac(self) -> Fraction:
        """{alpha}, the representative in [0, 1)."""
        return Fraction(self.a, self.N)

    def order(self) -> int:
        return self.N

    def ord_p(self, p: int) -> int:
        """Order of the p-primary component: p^(v_p(N))."""
        return p ** vp(self.N, p) if self.N > 1 else 1

    def is_zero(self) -> bool:
        return self.a == 0

    def __neg__(self):
        return TorsionPoint(-self.a, self.N)

    def __add__(self, other: "TorsionPoint"):
        return TorsionPoint.from_fraction(self.frac() + other.frac())

    def mul_int(self, d: int) -> "TorsionPoint":
        return TorsionPoint(d * self.a % self.N, self.N)

    def division_points(self, f: int) -> list:
        """All alpha' with f*alpha' = alpha, as f torsion points."""
        return [TorsionPoint.from_fraction(Fraction(self.a + i * self.N, f * self.N))
                for i in range(f)]

    def __eq__(self, other):
        return isinstance(other, TorsionPoint) and (self.a, self.N) == (other.a, other.N)

    def __hash__(self):
        return hash((self.a, self.N))

    def __repr__(self):
        return f"{self.a}/{self.N}"
