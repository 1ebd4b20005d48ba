"""q-expansions of the weight-k Eisenstein series indexed by torsion points.

Every expansion is assembled from the Dirichlet-series description of the
coefficients: the coefficient at exponent t > 0 is a finite sum over
factorizations t = m*n with m running through a coset of Z and n through
positive integers, weighted by n^(k-1) (E-type) or m^(k-1) (F-type) and a
root of unity e(+-beta*n).  Constant terms are Hurwitz and twisted zeta
values at negative integers.

The weight-2 E-series is only ever exposed through the holomorphic
combinations: "Etilde2" is the naive weight-2 convolution minus the
sigma_1 series -1/24 + sum sigma_1(n) q^n, and the c-variants take
differences in which every regularization ambiguity cancels.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from .arith import DomainError, TorsionPoint
from .cyclotomic import CycloNum, cc_act, galois_sigma, zeta_pow
from .lfunctions import dirichlet_star_neg, hurwitz_neg
from .qseries import QExp

KINDS = ("E", "F", "Etilde2", "Enaive2", "Ec", "Fc")


@dataclass(frozen=True)
class EisId:
    kind: str
    k: int
    alpha: TorsionPoint
    beta: TorsionPoint
    c: int | None = None
    p: int | None = None  # needed by Ec/Fc for the <<c>>-action

    def __post_init__(self):
        if self.kind not in KINDS:
            raise DomainError(f"unknown kind {self.kind}")
        if self.k < 1:
            raise DomainError("weight must be >= 1")
        if self.kind in ("E", "F") and self.k == 2:
            if self.kind == "E":
                raise DomainError("weight-2 E only via Etilde2 or Ec")
            if self.alpha.is_zero() and self.beta.is_zero():
                raise DomainError("F at weight 2 needs (alpha, beta) != (0, 0)")
        if self.kind in ("Etilde2", "Enaive2") and self.k != 2:
            raise DomainError(f"{self.kind} is the weight-2 case only")
        if self.kind in ("Ec", "Fc") and (self.c is None or self.p is None):
            raise DomainError("c-variants need c and p")


def _conv_coeffs(series: str, k: int, alpha: TorsionPoint, beta: TorsionPoint,
                 bound: Fraction, grid: int) -> dict:
    """Positive-exponent coefficients as {exponent: {zeta-exp mod L: Fraction}}."""
    L = beta.N
    acc: dict = {}
    sign = Fraction(1) if k % 2 == 0 else Fraction(-1)
    for branch_sign, al, be in ((Fraction(1), alpha, beta), (sign, -alpha, -beta)):
        start = al.frac()
        if start == 0:
            start = Fraction(1)
        m = start
        while m <= bound:
            n = 1
            while m * n <= bound:
                t = m * n
                w = branch_sign * (n ** (k - 1) if series == "E" else m ** (k - 1))
                z = be.a * n % L if L > 1 else 0
                slot = acc.setdefault(t, {})
                slot[z] = slot.get(z, Fraction(0)) + w
                n += 1
            m += 1
    return acc


def _const_term(series: str, k: int, alpha: TorsionPoint, beta: TorsionPoint) -> CycloNum:
    if k == 1:
        if not alpha.is_zero():
            return CycloNum.from_rat(hurwitz_neg(alpha, 1), 1)
        half = Fraction(1, 2)
        return (dirichlet_star_neg(beta, 1) - dirichlet_star_neg(-beta, 1)) * half
    if series == "E":
        if alpha.is_zero():
            return dirichlet_star_neg(beta, k)
        return CycloNum.from_rat(0, 1)
    return CycloNum.from_rat(hurwitz_neg(alpha, k), 1)


def sigma1_series(bound, grid: int = 1) -> QExp:
    """-1/24 + sum_{n>=1} sigma_1(n) q^n, the holomorphic part of the level-1 weight-2 series."""
    bound = Fraction(bound)
    coeffs = {Fraction(0): CycloNum.from_rat(Fraction(-1, 24), 1)}
    n = 1
    while n <= bound:
        s = sum(d for d in range(1, n + 1) if n % d == 0)
        coeffs[Fraction(n)] = CycloNum.from_rat(s, 1)
        n += 1
    return QExp(grid, bound, coeffs)


def eis_qexp(eis: EisId, bound) -> QExp:
    """The q-expansion of the requested Eisenstein series, to the given bound."""
    bound = Fraction(bound)
    k, alpha, beta = eis.k, eis.alpha, eis.beta
    if eis.kind in ("Ec", "Fc"):
        if eis.kind == "Ec":
            base = "Etilde2" if k == 2 else "E"
        else:
            base = "F"
        a2 = cc_act(eis.c, alpha, eis.p)
        b2 = cc_act(eis.c, beta, eis.p)
        c = eis.c
        if eis.kind == "Ec":
            cw = Fraction(c) ** 2 if k == 2 else Fraction(c) ** k
        else:
            cw = Fraction(c) ** (2 - k)
        lhs = eis_qexp(EisId(base, k, alpha, beta), bound) * Fraction(c * c)
        rhs = eis_qexp(EisId(base, k, a2, b2), bound) * cw
        return lhs - rhs

    series = "F" if eis.kind == "F" else "E"
    grid = alpha.N
    acc = _conv_coeffs(series, k, alpha, beta, bound, grid)
    L = beta.N
    coeffs = {}
    for t, slot in acc.items():
        vec = [Fraction(0)] * L
        for z, c in slot.items():
            vec[z] += c
        val = CycloNum(L, vec)
        if val:
            coeffs[t] = val
    c0 = _const_term(series, k, alpha, beta)
    if c0:
        coeffs[Fraction(0)] = c0
    out = QExp(grid, bound, coeffs)
    if eis.kind == "Etilde2":
        out = out - sigma1_series(bound)
    return out


# -- distribution relations --------------------------------------------------


def _report(ok: bool, **extra) -> dict:
    rep = {"ok": ok}
    rep.update(extra)
    return rep


def dist_check_rel(kind: str, k: int, alpha: TorsionPoint, beta: TorsionPoint,
                   f: int, bound, c: int | None = None, p: int | None = None) -> dict:
    """Check sum over f-division points = f^k E (resp. f^(2-k) F), exactly."""
    bound = Fraction(bound)
    target = eis_qexp(EisId(kind, k, alpha, beta, c, p), bound)
    total = None
    for a2 in alpha.division_points(f):
        for b2 in beta.division_points(f):
            s = eis_qexp(EisId(kind, k, a2, b2, c, p), bound)
            total = s if total is None else total + s
    power = f ** k if kind in ("E", "Etilde2", "Ec", "Enaive2") else Fraction(f) ** (2 - k)
    rhs = target * Fraction(power)
    bad = total.first_mismatch(rhs)
    return _report(bad is None, relation="rel", kind=kind, k=k, f=f,
                   alpha=str(alpha), beta=str(beta),
                   first_fail=None if bad is None else str(bad))


def dist_check_rel1(kind: str, k: int, alpha: TorsionPoint, beta: TorsionPoint,
                    f: int, bound, c: int | None = None, p: int | None = None) -> dict:
    """Check sum over f-division points of beta, at tau/f: = f^k E (resp. f F)."""
    bound = Fraction(bound)
    target = eis_qexp(EisId(kind, k, alpha, beta, c, p), bound)
    total = None
    for b2 in beta.division_points(f):
        s = eis_qexp(EisId(kind, k, alpha, b2, c, p), bound * f)
        s = s.rescale_tau_over_f(f)
        total = s if total is None else total + s
    power = f ** k if kind in ("E", "Etilde2", "Ec", "Enaive2") else f
    rhs = target * Fraction(power)
    bad = total.first_mismatch(rhs)
    return _report(bad is None, relation="rel1", kind=kind, k=k, f=f,
                   alpha=str(alpha), beta=str(beta),
                   first_fail=None if bad is None else str(bad))


def galois_compat(kind: str, k: int, alpha: TorsionPoint, beta: TorsionPoint,
                  d: int, bound) -> dict:
    """sigma_d on coefficients matches the diagonal action (alpha, d*beta)."""
    N = math.lcm(alpha.N, beta.N)
    if math.gcd(d, N) != 1:
        raise DomainError(f"gcd(d, {N}) != 1")
    lhs = eis_qexp(EisId(kind, k, alpha, beta), bound).map_coeffs(
        lambda x: galois_sigma(d, x))
    rhs = eis_qexp(EisId(kind, k, alpha, beta.mul_int(d)), bound)
    bad = lhs.first_mismatch(rhs)
    return _report(bad is None, check="galois-diag", kind=kind, k=k, d=d,
                   first_fail=None if bad is None else str(bad))


def twist_compat(kind: str, k: int, alpha: TorsionPoint, beta: TorsionPoint,
                 bound) -> dict:
    """q_M -> zeta_M q_M sends the series at (alpha, beta) to (alpha, beta+alpha)."""
    M = math.lcm(alpha.N, beta.N, (alpha + beta).N)
    lhs = eis_qexp(EisId(kind, k, alpha, beta), bound).with_grid(M).twist_root(1)
    rhs = eis_qexp(EisId(kind, k, alpha, alpha + beta), bound).with_grid(M)
    bad = lhs.first_mismatch(rhs)
    return _report(bad is None, check="twist-root", kind=kind, k=k,
                   first_fail=None if bad is None else str(bad))


# -- theta logarithmic derivatives -------------------------------------------


def _dlog_one_minus(r: int, e: Fraction, z: int, deg: int, M: int,
                    bound: Fraction, acc: dict):
    """Accumulate D_2^r log(1 - X) for the monomial X = q^e zeta_M^z of x2-degree deg.

    e > 0: the geometric series; e < 0: fold through log(-X) (log of a root of
    unity is 0, so only an r = 1 constant survives); e = 0: closed rational
    form evaluated at the root of unity, which must not be 1.
    """

    def add(t: Fraction, val):
        slot = acc.setdefault(t, CycloNum.from_rat(0, M))
        acc[t] = slot + val

    if e > 0:
        k = 1
        while k * e <= bound:
            w = -Fraction(deg) ** r * k ** (r - 1)
            add(k * e, zeta_pow(M, z * k) * w)
            k += 1
        return
    if e < 0:
        if r == 1:
            add(Fraction(0), CycloNum.from_rat(deg, M))
        _dlog_one_minus(r, -e, -z, -deg, M, bound, acc)
        return
    # e == 0: X is the constant zeta_M^z
    if z % M == 0:
        raise DomainError("log(1 - X) at X = 1: theta argument hits the lattice")
    # P_1 = deg * (1 + (X-1)^{-1}); recurrence P <- deg * X dP/dX on the basis (X-1)^{-j}
    basis = {0: Fraction(deg), 1: Fraction(deg)}
    for _ in range(r - 1):
        nxt: dict = {}
        for j, cj in basis.items():
            if j == 0 or cj == 0:
                continue
            nxt[j] = nxt.get(j, Fraction(0)) - deg * j * cj
            nxt[j + 1] = nxt.get(j + 1, Fraction(0)) - deg * j * cj
        basis = nxt
    X = zeta_pow(M, z)
    Xm1_inv = (X - 1).inverse()
    val = CycloNum.from_rat(0, M)
    for j, cj in basis.items():
        if cj:
            term = CycloNum.from_rat(cj, M)
            for _ in range(j):
                term = term * Xm1_inv
            val = val + term
    add(Fraction(0), val)


def _theta_dlog_raw(r: int, A: int, B: int, deg: int, M: int, n: int,
                    bound: Fraction, p: int) -> dict:
    """D_2^r log theta(x1, y) with x1 = q^(p^n), y = q_M^A zeta_M^B of x2-degree deg."""
    acc: dict = {}
    # leading factor y^(1/2) - y^(-1/2) = (-1) * y^(-1/2) * (1 - y)
    if r == 1 and deg:
        acc[Fraction(0)] = CycloNum.from_rat(Fraction(-deg, 2), M)
    _dlog_one_minus(r, Fraction(A, M), B, deg, M, bound, acc)
    np_ = 1
    # e_minus <= e_plus, and negative e_minus still contributes (folding)
    while Fraction(np_ * p ** n) - Fraction(A, M) <= bound:
        _dlog_one_minus(r, Fraction(np_ * p ** n) + Fraction(A, M), B, deg, M, bound, acc)
        _dlog_one_minus(r, Fraction(np_ * p ** n) - Fraction(A, M), -B, -deg, M, bound, acc)
        np_ += 1
    return acc


def theta_dlog_pow(c: int, r: int, a: int, b: int, M: int, n: int, bound,
                   p: int = 5) -> QExp:
    """D_2^r of log((c^2 - <c>) theta) at x2 = q_M^a zeta_M^b, x1 = q^(p^n)."""
    if r < 1:
        raise DomainError("r >= 1 required (r = 0 has log-period terms)")
    if a < 0:
        raise DomainError("need a >= 0")
    bound = Fraction(bound)
    for s in (1, c):
        # singular iff x2^s is a power of x1: s*a = 0 mod p^n*M and s*b = 0 mod M
        if s * b % M == 0 and s * a % (p ** n * M) == 0:
            raise DomainError(f"theta argument^{s} hits the lattice")
    acc1 = _theta_dlog_raw(r, a, b, 1, M, n, bound, p)
    acc2 = _theta_dlog_raw(r, c * a, c * b, c, M, n, bound, p)
    coeffs = {}
    for t in set(acc1) | set(acc2):
        v = CycloNum.from_rat(0, M)
        if t in acc1:
            v = v + acc1[t] * (c * c)
        if t in acc2:
            v = v - acc2[t]
        if v:
            coeffs[t] = v
    return QExp(M, bound, coeffs)


def eis_theta_side(c: int, r: int, a: int, b: int, M: int, n: int, bound,
                   p: int = 5) -> QExp:
    """c^2 E_r(x1, x2) - c^r E_r(x1, x2^c) assembled from Eisenstein expansions.

    The x1-level expansion E_r at torsion parameters (a/(M p^n), b/M) is
    rescaled to live on the q_M-grid (exponent times p^n).
    """
    bound = Fraction(bound)
    kind = "Enaive2" if r == 2 else "E"
    out = None
    for s, w in ((1, Fraction(c * c)), (c, -(Fraction(c) ** r))):
        al = TorsionPoint.from_fraction(Fraction(s * a, M * p ** n))
        be = TorsionPoint.from_fraction(Fraction(s * b, M))
        ser = eis_qexp(EisId(kind, r, al, be), bound / p ** n)
        ser = QExp(M, bound, {e * p ** n: co for e, co in ser.coeffs.items()})
        ser = ser * w
        out = ser if out is None else out + ser
    return out


def theta_check(c: int, r: int, a: int, b: int, M: int, n: int, bound,
                p: int = 5) -> dict:
    """Verify D_2^r log(r_c theta) against the Eisenstein combination.

    With the convolution normalization used here the two sides agree up to a
    global factor -1 (the theta derivative orients the lattice sum opposite
    to the Dirichlet-series convolution); the report records that sign.
    """
    lhs = theta_dlog_pow(c, r, a, b, M, n, bound, p)
    rhs = eis_theta_side(c, r, a, b, M, n, bound, p)
    bad = lhs.first_mismatch(-rhs)
    return _report(bad is None, check="theta", c=c, r=r, a=a, b=b, M=M, n=n,
                   sign=-1, first_fail=None if bad is None else str(bad))


# -- tower sums (the finite q-expansion identity behind the limit formula) ---


def eis_tower_sum(j: int, M: int, gamma: int, delta: int, n: int, bound,
                  p: int = 5, d: int | None = None) -> QExp:
    """sum over c0 = gamma mod M, 1 <= c0 <= M p^n of E_j(q^(p^n), q_M^(c0) zeta_M^delta).

    Each summand is the weight-j expansion at (c0/(M p^n), delta/M) written in
    the q_M-grid; with d set, the <<d>>-smoothed variant is summed instead.
    """
    bound = Fraction(bound)
    total = None
    for c0 in range(1, M * p ** n + 1):
        if c0 % M != gamma % M:
            continue
        al = TorsionPoint.from_fraction(Fraction(c0, M * p ** n))
        be = TorsionPoint.from_fraction(Fraction(delta, M))
        kind = "E" if j != 2 else "Etilde2"
        if d is None:
            ser = eis_qexp(EisId(kind, j, al, be), bound / p ** n)
        else:
            ser = eis_qexp(EisId("Ec", j, al, be, d, p), bound / p ** n)
        ser = QExp(M, bound, {e * p ** n: co for e, co in ser.coeffs.items()})
        total = ser if total is None else total + ser
    return total


def tower_sum_check(j: int, M: int, gamma: int, delta: int, n: int, bound,
                    p: int = 5, d: int | None = None) -> dict:
    """Exact equality of the tower sum with E^(j) at (gamma/M, delta/M)."""
    lhs = eis_tower_sum(j, M, gamma, delta, n, bound, p, d)
    al = TorsionPoint.from_fraction(Fraction(gamma, M))
    be = TorsionPoint.from_fraction(Fraction(delta, M))
    kind = "E" if j != 2 else "Etilde2"
    if d is None:
        rhs = eis_qexp(EisId(kind, j, al, be), bound)
    else:
        rhs = eis_qexp(EisId("Ec", j, al, be, d, p), bound)
    rhs = rhs.with_grid(M) if M % rhs.M == 0 else rhs
    bad = lhs.first_mismatch(rhs)
    return _report(bad is None, check="tower-sum", j=j, M=M, gamma=gamma,
                   delta=delta, n=n, d=d,
                   first_fail=None if bad is None else str(bad))


# -- box distributions --------------------------------------------------------


@dataclass(frozen=True)
class BoxQ2:
    """The open compact (a + r Zhat) x (b + r Zhat), a, b reduced mod r."""

    a: Fraction
    b: Fraction
    r: Fraction

    def __post_init__(self):
        if self.r == 0:
            raise DomainError("box scale r must be nonzero")
        object.__setattr__(self, "a", Fraction(self.a) % abs(Fraction(self.r)))
        object.__setattr__(self, "b", Fraction(self.b) % abs(Fraction(self.r)))
        object.__setattr__(self, "r", Fraction(self.r))

    def subdivide(self, f: int) -> list:
        """The f^2 sub-boxes refining this box at scale r*f."""
        return [BoxQ2(self.a + i * self.r, self.b + j * self.r, self.r * f)
                for i in range(f) for j in range(f)]


def zeis_box(kind: str, k: int, box: BoxQ2, bound, c: int | None = None,
             p: int | None = None) -> QExp:
    """Value of the Eisenstein box distribution on (a + r Zhat) x (b + r Zhat).

    E-type: r^(-k) E^(k) at (a/r, b/r), with weight 2 routed through Etilde2;
    F-type: r^(k-2) F^(k).  The c-variants use the smoothed series.
    """
    alpha = TorsionPoint.from_fraction(box.a / box.r)
    beta = TorsionPoint.from_fraction(box.b / box.r)
    if kind == "E":
        use = "Etilde2" if k == 2 else "E"
        ser = eis_qexp(EisId(use, k, alpha, beta), bound)
        return ser * box.r ** (-k)
    if kind == "F":
        ser = eis_qexp(EisId("F", k, alpha, beta), bound)
        return ser * box.r ** (k - 2)
    if kind == "Ec":
        ser = eis_qexp(EisId("Ec", k, alpha, beta, c, p), bound)
        return ser * box.r ** (-k)
    if kind == "Fc":
        ser = eis_qexp(EisId("Fc", k, alpha, beta, c, p), bound)
        return ser * box.r ** (k - 2)
    raise DomainError(f"unknown box kind {kind}")


def zeis_cd_box(k: int, j: int, c: int, d: int, box1: BoxQ2, box2: BoxQ2,
                bound, p: int = 5) -> QExp:
    """(1/(j-1)!) z'_c(k-j) on box1 times z_d(j) on box2, a weight-k expansion."""
    if k < 2 or not (1 <= j <= k - 1):
        raise DomainError("need k >= 2 and 1 <= j <= k-1")
    f1 = zeis_box("Fc", k - j, box1, bound, c, p)
    f2 = zeis_box("Ec", j, box2, bound, d, p)
    return (f1 * f2) * Fraction(1, math.factorial(j - 1))
