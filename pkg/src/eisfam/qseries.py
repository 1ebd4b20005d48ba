"""Truncated q-expansions with fractional exponents over a pluggable ring.

A QExp is a sparse map from exponents e in (1/M)Z, 0 <= e <= bound, to
coefficients in any ring whose elements support +, *, unary -, and are falsy
exactly when zero (Fraction, CycloNum, CycloPadic, FamilyCoeff all qualify).
Ring operations truncate to the minimum of the operand bounds.
"""

from __future__ import annotations

import math
from fractions import Fraction

from .arith import DomainError
from .cyclotomic import zeta_pow


class QExp:
    __slots__ = ("M", "bound", "coeffs")

    def __init__(self, M: int, bound, coeffs: dict | None = None):
        self.M = M
        self.bound = Fraction(bound)
        self.coeffs = {}
        if coeffs:
            for e, c in coeffs.items():
                e = Fraction(e)
                if c and e <= self.bound:
                    if (e * M).denominator != 1 or e < 0:
                        raise DomainError(f"exponent {e} not in (1/{M})Z>=0")
                    self.coeffs[e] = self.coeffs[e] + c if e in self.coeffs else c
            self.coeffs = {e: c for e, c in self.coeffs.items() if c}

    @classmethod
    def zero(cls, M: int, bound) -> "QExp":
        return cls(M, bound, {})

    def exponents(self):
        return sorted(self.coeffs)

    def get(self, e):
        return self.coeffs.get(Fraction(e))

    def with_grid(self, M2: int) -> "QExp":
        if M2 % self.M:
            raise DomainError(f"grid {M2} does not refine {self.M}")
        return QExp(M2, self.bound, self.coeffs)

    def _common(self, other: "QExp"):
        M = self.M * other.M // math.gcd(self.M, other.M)
        return M, min(self.bound, other.bound)

    def __add__(self, other):
        if not isinstance(other, QExp):
            return NotImplemented
        M, B = self._common(other)
        out = dict(self.coeffs)
        for e, c in other.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return QExp(M, B, out)

    def __neg__(self):
        return QExp(self.M, self.bound, {e: -c for e, c in self.coeffs.items()})

    def __sub__(self, other):
        if not isinstance(other, QExp):
            return NotImplemented
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, QExp):
            M, B = self._common(other)
            out = {}
            for e1, c1 in self.coeffs.items():
                if e1 > B:
                    continue
                for e2, c2 in other.coeffs.items():
                    e = e1 + e2
                    if e <= B:
                        c = c1 * c2
                        out[e] = out[e] + c if e in out else c
            return QExp(M, B, out)
        # scalar
        return QExp(self.M, self.bound, {e: c * other for e, c in self.coeffs.items()})

    def __rmul__(self, other):
        return QExp(self.M, self.bound, {e: other * c for e, c in self.coeffs.items()})

    def scale(self, s) -> "QExp":
        return self * s

    def truncate(self, bound) -> "QExp":
        bound = Fraction(bound)
        return QExp(self.M, min(self.bound, bound),
                    {e: c for e, c in self.coeffs.items() if e <= bound})

    def rescale_tau_over_f(self, fdiv: int) -> "QExp":
        """Substitution q -> q^(1/f): exponents shrink by f, bound becomes B/f."""
        if fdiv < 1:
            raise DomainError("fdiv must be >= 1")
        return QExp(self.M * fdiv, self.bound / fdiv,
                    {e / fdiv: c for e, c in self.coeffs.items()})

    def map_coeffs(self, fn) -> "QExp":
        return QExp(self.M, self.bound, {e: fn(c) for e, c in self.coeffs.items()})

    def twist_root(self, j: int) -> "QExp":
        """q_M -> zeta_M^j q_M: multiply the coefficient at e by zeta_M^(j e M).

        The coefficient ring must absorb multiplication by zeta_M (CycloNum
        or anything that multiplies with one).
        """
        out = {}
        for e, c in self.coeffs.items():
            k = int(e * self.M) * j % self.M
            out[e] = c * zeta_pow(self.M, k) if k else c
        return QExp(self.M, self.bound, out)

    def __eq__(self, other):
        """Equality of all coefficients up to the smaller bound."""
        if not isinstance(other, QExp):
            return NotImplemented
        return self.first_mismatch(other) is None

    def first_mismatch(self, other: "QExp"):
        """Smallest exponent where the two series differ (up to min bound), or None."""
        B = min(self.bound, other.bound)
        exps = {e for e in self.coeffs if e <= B} | {e for e in other.coeffs if e <= B}
        for e in sorted(exps):
            a, b = self.coeffs.get(e), other.coeffs.get(e)
            if a is None:
                if b:
                    return e
            elif b is None:
                if a:
                    return e
            elif not (a - b):
                continue
            else:
                return e
        return None

    def first_mismatch_mod(self, other: "QExp", k: int):
        """Like first_mismatch but comparing coefficients mod p^k (CycloPadic)."""
        B = min(self.bound, other.bound)
        exps = {e for e in self.coeffs if e <= B} | {e for e in other.coeffs if e <= B}
        for e in sorted(exps):
            a, b = self.coeffs.get(e), other.coeffs.get(e)
            if a is None:
                if not b.is_zero_mod(k):
                    return e
            elif b is None:
                if not a.is_zero_mod(k):
                    return e
            elif not a.eq_mod(b, k):
                return e
        return None

    def __bool__(self):
        return bool(self.coeffs)

    def __repr__(self):
        terms = ", ".join(f"q^{e}: {c!r}" for e, c in sorted(self.coeffs.items())[:6])
        return f"QExp(M={self.M}, bound={self.bound}, {{{terms}{'...' if len(self.coeffs) > 6 else ''}}})"

    def to_json(self) -> dict:
        def enc(c):
            if isinstance(c, Fraction):
                return f"{c.numerator}/{c.denominator}"
            return c.to_json() if hasattr(c, "to_json") else repr(c)

        return {
            "M": self.M,
            "bound": f"{self.bound.numerator}/{self.bound.denominator}",
            "coeffs": [{"e": f"{e.numerator}/{e.denominator}", "c": enc(c)}
                       for e, c in sorted(self.coeffs.items())],
        }
