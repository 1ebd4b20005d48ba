"""The Iwahori-level representation layer on Dirac-supported measures.

Measures carry a left action gamma . delta_r = rho_j(gamma)(r) delta_(gamma r)
with rho_j(g) = kappa(a + cz) det(g)^(-j); symmetric-power vectors carry a
right action; the specialization map integrates (e1 + z e2)^(k-2) t^(-j)
against the measure and intertwines the two.  Everything is exact over Q
once a weight is fixed.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .arith import DomainError, TorsionPoint, vp
from .family import WeightTerm


class IwahoriMat:
    """Matrix (a b; c d) in GL_2(Z_p), upper triangular mod p, p-integral entries."""

    __slots__ = ("a", "b", "c", "d", "p")

    def __init__(self, a, b, c, d, p: int):
        self.a, self.b, self.c, self.d = (Fraction(x) for x in (a, b, c, d))
        self.p = p
        for x in (self.a, self.b, self.c, self.d):
            if x and vp(x, p) < 0:
                raise DomainError("entries must be p-integral")
        if vp(self.a, p) != 0:
            raise DomainError("upper-left entry must be a p-unit")
        if self.c and vp(self.c, p) < 1:
            raise DomainError("lower-left entry must be divisible by p")
        if vp(self.det(), p) != 0:
            raise DomainError("determinant must be a p-unit")

    def det(self) -> Fraction:
        return self.a * self.d - self.b * self.c

    def __matmul__(self, other: "IwahoriMat") -> "IwahoriMat":
        return IwahoriMat(self.a * other.a + self.b * other.c,
                          self.a * other.b + self.b * other.d,
                          self.c * other.a + self.d * other.c,
                          self.c * other.b + self.d * other.d, self.p)

    def moebius(self, z: Fraction) -> Fraction:
        """gamma z = (b + d z)/(a + c z), the modular action on Z_p."""
        return (self.b + self.d * z) / (self.a + self.c * z)

    def __repr__(self):
        return f"[{self.a} {self.b}; {self.c} {self.d}]"


def rho_univ(gamma: IwahoriMat, j: int, z) -> WeightTerm:
    """rho_j(gamma) at the point z: kappa(a + cz) det^(-j), as a symbolic term."""
    z = Fraction(z)
    u = gamma.a + gamma.c * z
    if vp(u, gamma.p) != 0:
        raise DomainError("a + cz must be a p-unit")
    return WeightTerm(gamma.det() ** (-j), u)


class DiracMeasure:
    """Finite list of (point, WeightTerm coefficient); points p-integral."""

    __slots__ = ("points", "p")

    def __init__(self, points, p: int):
        self.points = [(Fraction(r), w) for r, w in points]
        self.p = p
        for r, _ in self.points:
            if r and vp(r, p) < 0:
                raise DomainError("support must be p-integral")

    @classmethod
    def dirac(cls, r, p: int) -> "DiracMeasure":
        return cls([(Fraction(r), WeightTerm(1, 1))], p)

    def act(self, gamma: IwahoriMat, j: int) -> "DiracMeasure":
        """gamma . delta_r = rho_j(gamma)(r) delta_(gamma r), extended linearly."""
        out = []
        for r, w in self.points:
            out.append((gamma.moebius(r), w.times(rho_univ(gamma, j, r))))
        return DiracMeasure(out, self.p)

    def eval_weight(self, k: int) -> list:
        """Exact rational (point, coefficient) pairs at integer weight k."""
        out = []
        for r, w in self.points:
            if not w.scalar.is_rational():
                raise DomainError("non-rational coefficient")
            out.append((r, w.scalar.rational_part() * w.unit_arg ** (k - 2)))
        return out


def nu(j: int, p: int) -> DiracMeasure:
    """The interpolation vector: the Dirac mass at 0."""
    return DiracMeasure.dirac(0, p)


class SymVector:
    """Vector in Sym^(k-2) V tensor det^(-j): coords of e1^(k-2-l) e2^l t^(-j)."""

    __slots__ = ("k", "j", "coords")

    def __init__(self, k: int, j: int, coords):
        if k < 2:
            raise DomainError("k >= 2 required")
        cs = [Fraction(x) for x in coords]
        if len(cs) != k - 1:
            raise DomainError(f"need k-1 = {k - 1} coordinates")
        self.k, self.j = k, j
        self.coords = cs

    def __eq__(self, other):
        return (self.k, self.j) == (other.k, other.j) and self.coords == other.coords

    def __add__(self, other):
        return SymVector(self.k, self.j,
                         [x + y for x, y in zip(self.coords, other.coords)])

    def act(self, gamma: IwahoriMat) -> "SymVector":
        """Right action: e1 -> a e1 + b e2, e2 -> c e1 + d e2, times det^(-j)."""
        k = self.k
        # expand (a e1 + b e2)^(k-2-l) (c e1 + d e2)^l coordinatewise
        out = [Fraction(0)] * (k - 1)
        for l, coef in enumerate(self.coords):
            if not coef:
                continue
            for i in range(k - 2 - l + 1):
                for m in range(l + 1):
                    w = (coef * math.comb(k - 2 - l, i) * math.comb(l, m)
                         * self.gamma_pow(gamma.a, k - 2 - l - i)
                         * self.gamma_pow(gamma.b, i)
                         * self.gamma_pow(gamma.c, l - m)
                         * self.gamma_pow(gamma.d, m))
                    out[i + m] += w
        dj = gamma.det() ** (-self.j)
        return SymVector(k, self.j, [x * dj for x in out])

    @staticmethod
    def gamma_pow(x: Fraction, e: int) -> Fraction:
        return Fraction(1) if e == 0 else x ** e

    def __repr__(self):
        return f"Sym(k={self.k}, j={self.j}, {self.coords})"


def sp(k: int, j: int, mu: DiracMeasure) -> SymVector:
    """Integrate (e1 + z e2)^(k-2) t^(-j) against mu, at integer weight k.

    coords_l = sum over points of coeff * binom(k-2, l) * r^l.
    """
    if k < 2:
        raise DomainError("k >= 2 required")
    coords = [Fraction(0)] * (k - 1)
    for r, val in mu.eval_weight(k):
        for l in range(k - 1):
            coords[l] += val * math.comb(k - 2, l) * (r ** l if l else 1)
    return SymVector(k, j, coords)


# -- checks -------------------------------------------------------------------


def cocycle_check(g1: IwahoriMat, g2: IwahoriMat, j: int, z,
                  weights=(3, 5)) -> dict:
    """rho_j(g1 g2)(z) = rho_j(g2)(g1 z) * rho_j(g1)(z), exactly and at weights."""
    z = Fraction(z)
    lhs = rho_univ(g1 @ g2, j, z)
    rhs = rho_univ(g2, j, g1.moebius(z)).times(rho_univ(g1, j, z))
    exact = (lhs.unit_arg == rhs.unit_arg and lhs.scalar == rhs.scalar)
    wt_ok = all(
        lhs.scalar.rational_part() * lhs.unit_arg ** (w - 2)
        == rhs.scalar.rational_part() * rhs.unit_arg ** (w - 2)
        for w in weights)
    return {"ok": exact and wt_ok, "check": "rho-cocycle", "j": j, "z": str(z),
            "exact_symbol": exact, "weights_ok": wt_ok}


def sp_equivariance_check(gamma: IwahoriMat, k: int, j: int,
                          mu: DiracMeasure) -> dict:
    """Sp(gamma . mu) = Sp(mu) * gamma, exact over Q."""
    lhs = sp(k, j, mu.act(gamma, j))
    rhs = sp(k, j, mu).act(gamma)
    return {"ok": lhs == rhs, "check": "sp-equivariance", "k": k, "j": j,
            "gamma": repr(gamma)}


def highest_weight_check(k: int, j: int, p: int) -> dict:
    """Sp(nu_j) is the highest-weight vector e1^(k-2) t^(-j)."""
    v = sp(k, j, nu(j, p))
    want = SymVector(k, j, [1] + [0] * (k - 2))
    return {"ok": v == want, "check": "sp-nu", "k": k, "j": j}
