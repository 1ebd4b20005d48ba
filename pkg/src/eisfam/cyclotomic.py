"""Exact arithmetic in Q(zeta_N) and its p-adic reduction ring.

CycloNum is a polynomial in zeta_N reduced modulo the N-th cyclotomic
polynomial, with Fraction coefficients; this is a field, so inversion is by
the extended Euclidean algorithm.  CycloPadic is the quotient ring
(Z/p^N')[x]/Phi_N(x), which need not be a field; it is only ever used as the
target of reductions, never lifted back.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .arith import DomainError, PadicCtx, PadicNum, TorsionPoint, vp


@lru_cache(maxsize=None)
def cyclotomic_poly(N: int) -> tuple:
    """Coefficients (ascending) of the N-th cyclotomic polynomial, as ints."""
    if N == 1:
        return (-1, 1)
    # Phi_N = (x^N - 1) / prod_{d | N, d < N} Phi_d, by exact poly division
    num = [-1] + [0] * (N - 1) + [1]
    for d in range(1, N):
        if N % d == 0:
            den = list(cyclotomic_poly(d))
            out = [0] * (len(num) - len(den) + 1)
            rem = list(num)
            for i in range(len(out) - 1, -1, -1):
                c = rem[i + len(den) - 1]
                out[i] = c
                if c:
                    for j, dj in enumerate(den):
                        rem[i + j] -= c * dj
            num = out
    return tuple(num)


def euler_phi(N: int) -> int:
    return len(cyclotomic_poly(N)) - 1


def _reduce_poly(coeffs: list, N: int):
    """Reduce a dense coefficient list mod Phi_N in place; return length phi(N)."""
    phi = cyclotomic_poly(N)
    deg = len(phi) - 1
    for i in range(len(coeffs) - 1, deg - 1, -1):
        c = coeffs[i]
        if c:
            coeffs[i] = 0
            for j in range(deg):
                coeffs[i - deg + j] -= c * phi[j]
    del coeffs[deg:]
    while len(coeffs) < deg:
        coeffs.append(0)
    return coeffs


class CycloNum:
    """Element of Q(zeta_N): coefficient vector of length phi(N) mod Phi_N."""

    __slots__ = ("N", "coeffs")

    def __init__(self, N: int, coeffs):
        self.N = N
        deg = euler_phi(N)
        cs = [Fraction(c) for c in coeffs]
        if len(cs) > deg:
            cs = _reduce_poly(cs, N)
        else:
            cs += [Fraction(0)] * (deg - len(cs))
        self.coeffs = cs

    @classmethod
    def from_rat(cls, x, N: int = 1) -> "CycloNum":
        return cls(N, [Fraction(x)])

    def lift_to(self, L: int) -> "CycloNum":
        """Image in Q(zeta_L) for N | L, by exponent dilation zeta_N = zeta_L^(L/N)."""
        if L == self.N:
            return self
        if L % self.N:
            raise DomainError(f"{self.N} does not divide {L}")
        d = L // self.N
        out = [Fraction(0)] * (euler_phi(self.N) * d + 1)
        for i, c in enumerate(self.coeffs):
            if c:
                out[i * d] += c
        return CycloNum(L, out)

    def _pair(self, other):
        if isinstance(other, (int, Fraction)):
            other = CycloNum.from_rat(other, 1)
        if not isinstance(other, CycloNum):
            return None, None
        L = self.N * other.N // math.gcd(self.N, other.N)
        return self.lift_to(L), other.lift_to(L)

    def __add__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return CycloNum(a.N, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CycloNum(self.N, [-c for c in self.coeffs])

    def __sub__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return CycloNum(a.N, [x - y for x, y in zip(a.coeffs, b.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return CycloNum(self.N, [c * other for c in self.coeffs])
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        n1, n2 = a.coeffs, b.coeffs
        out = [Fraction(0)] * (len(n1) + len(n2) - 1)
        for i, x in enumerate(n1):
            if x:
                for j, y in enumerate(n2):
                    if y:
                        out[i + j] += x * y
        return CycloNum(a.N, out)

    __rmul__ = __mul__

    def inverse(self) -> "CycloNum":
        """Inverse in the field Q(zeta_N), by extended gcd with Phi_N."""
        if not self:
            raise ZeroDivisionError("inverse of zero in Q(zeta_N)")
        phi = [Fraction(c) for c in cyclotomic_poly(self.N)]

        def polydivmod(u, v):
            u = u[:]
            dv = len(v) - 1
            while len(v) > 1 and v[-1] == 0:
                v = v[:-1]
                dv -= 1
            q = [Fraction(0)] * max(1, len(u) - dv)
            for i in range(len(u) - dv - 1, -1, -1):
                c = u[i + dv] / v[dv]
                q[i] = c
                if c:
                    for j in range(dv + 1):
                        u[i + j] -= c * v[j]
            while len(u) > 1 and u[-1] == 0:
                u.pop()
            return q, u

        def polymul(u, v):
            out = [Fraction(0)] * (len(u) + len(v) - 1)
            for i, x in enumerate(u):
                if x:
                    for j, y in enumerate(v):
                        if y:
                            out[i + j] += x * y
            return out

        r0, r1 = phi, [c for c in self.coeffs]
        while len(r1) > 1 and r1[-1] == 0:
            r1.pop()
        s0, s1 = [Fraction(0)], [Fraction(1)]
        while len(r1) > 1 or r1[0] != 0:
            q, r = polydivmod(r0, r1)
            r0, r1 = r1, r
            qs = polymul(q, s1)
            news = [Fraction(0)] * max(len(s0), len(qs))
            for i, c in enumerate(s0):
                news[i] += c
            for i, c in enumerate(qs):
                news[i] -= c
            s0, s1 = s1, news
        # r0 is the gcd, a nonzero constant since Phi_N is irreducible over Q
        c = r0[0]
        return CycloNum(self.N, [x / c for x in s0])

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self * Fraction(1, Fraction(other))
        a, b = self._pair(other)
        return a * b.inverse()

    def __eq__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return a.coeffs == b.coeffs

    def __bool__(self):
        return any(self.coeffs)

    def __hash__(self):
        return hash((self.N, tuple(self.coeffs)))

    def is_rational(self) -> bool:
        return not any(self.coeffs[1:])

    def rational_part(self) -> Fraction:
        if not self.is_rational():
            raise DomainError("not a rational element")
        return self.coeffs[0]

    def __repr__(self):
        return f"Cyclo(N={self.N}, {self.coeffs})"

    def to_json(self) -> dict:
        return {"N": self.N, "coeffs": [f"{c.numerator}/{c.denominator}" for c in self.coeffs]}


def zeta_pow(N: int, a: int) -> CycloNum:
    """zeta_N^a reduced mod Phi_N."""
    a %= N
    out = [Fraction(0)] * (a + 1)
    out[a] = Fraction(1)
    return CycloNum(N, out)


def root_of_unity(x: TorsionPoint) -> CycloNum:
    """e(x) = exp(2 pi i x) as an exact cyclotomic number."""
    return zeta_pow(x.N, x.a)


def galois_sigma(d: int, x: CycloNum) -> CycloNum:
    """The automorphism zeta_N -> zeta_N^d applied to x; needs gcd(d, N) = 1."""
    if math.gcd(d, x.N) != 1:
        raise DomainError(f"gcd({d}, {x.N}) != 1")
    out = [Fraction(0)] * x.N
    for i, c in enumerate(x.coeffs):
        if c:
            out[i * d % x.N] += c
    return CycloNum(x.N, out)


class CycloPadic:
    """Element of (Z/p^Nmod)[x]/Phi_N(x): coefficientwise residues."""

    __slots__ = ("ctx", "N", "coeffs")

    def __init__(self, ctx: PadicCtx, N: int, coeffs):
        self.ctx = ctx
        self.N = N
        m = ctx.p ** ctx.N
        cs = [int(c) % m for c in coeffs]
        deg = euler_phi(N)
        if len(cs) > deg:
            cs = [c % m for c in _reduce_poly(cs, N)]
        else:
            cs += [0] * (deg - len(cs))
        self.coeffs = cs

    @property
    def modulus(self) -> int:
        return self.ctx.p ** self.ctx.N

    @classmethod
    def from_int(cls, ctx: PadicCtx, x: int, N: int = 1) -> "CycloPadic":
        return cls(ctx, N, [x])

    def lift_to(self, L: int) -> "CycloPadic":
        if L == self.N:
            return self
        if L % self.N:
            raise DomainError(f"{self.N} does not divide {L}")
        d = L // self.N
        out = [0] * (len(self.coeffs) * d + 1)
        for i, c in enumerate(self.coeffs):
            out[i * d] = c
        return CycloPadic(self.ctx, L, out)

    def _pair(self, other):
        if isinstance(other, int):
            other = CycloPadic.from_int(self.ctx, other, 1)
        if not isinstance(other, CycloPadic):
            return None, None
        L = self.N * other.N // math.gcd(self.N, other.N)
        return self.lift_to(L), other.lift_to(L)

    def __add__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return CycloPadic(a.ctx, a.N, [x + y for x, y in zip(a.coeffs, b.coeffs)])

    __radd__ = __add__

    def __neg__(self):
        return CycloPadic(self.ctx, self.N, [-c for c in self.coeffs])

    def __sub__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return CycloPadic(a.ctx, a.N, [x - y for x, y in zip(a.coeffs, b.coeffs)])

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, int):
            return CycloPadic(self.ctx, self.N, [c * other for c in self.coeffs])
        if isinstance(other, PadicNum):
            return self * reduce_scalar(other, self.ctx)
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        out = [0] * (len(a.coeffs) + len(b.coeffs) - 1)
        for i, x in enumerate(a.coeffs):
            if x:
                for j, y in enumerate(b.coeffs):
                    if y:
                        out[i + j] += x * y
        return CycloPadic(a.ctx, a.N, out)

    __rmul__ = __mul__

    def __eq__(self, other):
        a, b = self._pair(other)
        if a is None:
            return NotImplemented
        return a.coeffs == b.coeffs

    def eq_mod(self, other, k: int) -> bool:
        a, b = self._pair(other)
        m = self.ctx.p ** k
        return all((x - y) % m == 0 for x, y in zip(a.coeffs, b.coeffs))

    def is_zero_mod(self, k: int) -> bool:
        m = self.ctx.p ** k
        return all(c % m == 0 for c in self.coeffs)

    def __bool__(self):
        return any(self.coeffs)

    def __repr__(self):
        return f"CycloPadic(N={self.N}, mod p^{self.ctx.N}, {self.coeffs})"


def reduce_scalar(x: PadicNum, ctx: PadicCtx) -> int:
    """Integer residue of a p-integral PadicNum mod p^ctx.N."""
    if x.unit == 0:
        if x.val < ctx.N:
            raise DomainError(f"zero only certified mod p^{x.val}, need p^{ctx.N}")
        return 0
    if x.val < 0:
        raise DomainError("negative valuation cannot reduce to Z/p^N")
    return x.residue(ctx.N)


def reduce_padic(x: CycloNum, ctx: PadicCtx) -> CycloPadic:
    """Coefficientwise reduction into (Z/p^N')[x]/Phi_N; denominators must be prime to p."""
    m = ctx.p ** ctx.N
    out = []
    for i, c in enumerate(x.coeffs):
        if c.denominator % ctx.p == 0:
            raise DomainError(f"coefficient {i} = {c} has denominator divisible by p={ctx.p}")
        out.append(c.numerator * pow(c.denominator, -1, m) % m)
    return CycloPadic(ctx, x.N, out)


def cc_act(c: int, alpha: TorsionPoint, p: int) -> TorsionPoint:
    """<<c>> alpha: multiply only the p-primary component of alpha by c."""
    if math.gcd(c, p) != 1:
        raise DomainError(f"c={c} not a unit at p={p}")
    v = vp(alpha.N, p) if alpha.N > 1 else 0
    if v == 0:
        return alpha
    q = p ** v
    Np = alpha.N // q
    # alpha = a_p/q + a'/Np mod 1 by CRT, then scale the q-part by c
    ap = alpha.a * pow(Np, -1, q) % q
    arest = alpha.a * pow(q, -1, Np) % Np if Np > 1 else 0
    return TorsionPoint.from_fraction(Fraction(c * ap, q) + Fraction(arest, Np))
