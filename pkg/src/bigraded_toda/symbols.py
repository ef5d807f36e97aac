"""Power-series calculus in ``z = eps d/dx``.

A :class:`ShiftSymbol` is an exact rational expression in ``exp(a z)`` and
``z``; ``Lambda**a`` is the symbol ``exp(a z)``.  Symbols are expanded into
Laurent series with explicit precision tracking, so quotients such as
``z / (exp(m z) - 1)`` come out exact to the requested order.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import List, Sequence, Tuple, Union

from .algebra import AlgebraElement, AlgebraError, NotExact, integrate_x

_INF = math.inf


class PoleAtZero(AlgebraError):
    """Raised when a symbol's Laurent expansion at z = 0 has a pole."""


# ---------------------------------------------------------------------------
# Laurent series with absolute precision


@dataclass(frozen=True)
class _Laurent:
    val: int  # exponent of coeffs[0]
    coeffs: Tuple[Fraction, ...]
    prec: float  # coefficients of z**j are exact for j < prec

    @staticmethod
    def make(val, coeffs, prec):
        coeffs = list(coeffs)
        # trim to precision, strip leading zeros
        if prec != _INF:
            coeffs = coeffs[: max(0, int(prec) - val)]
        while coeffs and coeffs[0] == 0:
            coeffs.pop(0)
            val += 1
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        if not coeffs:
            val = prec if prec != _INF else 0
        return _Laurent(val, tuple(coeffs), prec)

    @property
    def is_zero(self):
        return not self.coeffs

    def coeff(self, j):
        i = j - self.val
        if 0 <= i < len(self.coeffs):
            return self.coeffs[i]
        return Fraction(0)

    def __add__(self, other):
        prec = min(self.prec, other.prec)
        lo = min(self.val, other.val)
        hi = max(self.val + len(self.coeffs), other.val + len(other.coeffs))
        if prec != _INF:
            hi = min(hi, int(prec))
        return _Laurent.make(lo, [self.coeff(j) + other.coeff(j) for j in range(lo, max(hi, lo))], prec)

    def __neg__(self):
        return _Laurent(self.val, tuple(-c for c in self.coeffs), self.prec)

    def __mul__(self, other):
        va = self.val if self.coeffs else self.prec
        vb = other.val if other.coeffs else other.prec
        prec = min(self.prec + vb, other.prec + va)
        if not self.coeffs or not other.coeffs:
            return _Laurent.make(0, [], prec)
        val = self.val + other.val
        n = len(self.coeffs) + len(other.coeffs) - 1
        if prec != _INF:
            n = min(n, max(0, int(prec) - val))
        out = [Fraction(0)] * n
        for i, a in enumerate(self.coeffs):
            if i >= n:
                break
            for j, b in enumerate(other.coeffs):
                if i + j >= n:
                    break
                out[i + j] += a * b
        return _Laurent.make(val, out, prec)

    def inverse(self):
        if not self.coeffs:
            raise ZeroDivisionError("inverse of a series known to be zero to its precision")
        rel = self.prec - self.val  # number of reliable coefficients
        n = int(rel) if rel != _INF else len(self.coeffs)
        a0 = self.coeffs[0]
        inv = [Fraction(1) / a0]
        for k in range(1, n):
            s = sum(self.coeffs[j] * inv[k - j] for j in range(1, min(k, len(self.coeffs) - 1) + 1))
            inv.append(-s / a0)
        prec = rel - self.val if rel != _INF else _INF
        return _Laurent.make(-self.val, inv, prec)


def _exp_series(a: int, P: int) -> _Laurent:
    return _Laurent.make(0, [Fraction(a) ** j / math.factorial(j) for j in range(max(P, 1))], P)


# ---------------------------------------------------------------------------
# symbols


class ShiftSymbol:
    """A rational expression in ``exp(a z)`` and ``z``.

    >>> Lam = ShiftSymbol.shift(1)
    >>> expand_symbol(1 / (1 + Lam), 2).coeffs
    (Fraction(1, 2), Fraction(-1, 4), Fraction(0, 1))
    """

    __slots__ = ("op", "args")

    def __init__(self, op: str, args: tuple):
        self.op = op
        self.args = args

    @classmethod
    def const(cls, c) -> "ShiftSymbol":
        return cls("const", (Fraction(c),))

    @classmethod
    def shift(cls, a: int = 1) -> "ShiftSymbol":
        """``Lambda**a = exp(a z)``."""
        return cls("exp", (int(a),))

    @classmethod
    def z(cls) -> "ShiftSymbol":
        """The symbol of ``eps d/dx``."""
        return cls("z", ())

    @staticmethod
    def _wrap(x) -> "ShiftSymbol":
        if isinstance(x, ShiftSymbol):
            return x
        if isinstance(x, (int, Fraction)):
            return ShiftSymbol.const(x)
        return NotImplemented

    def __add__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        return ShiftSymbol("add", (self, other))

    def __radd__(self, other):
        return self._wrap(other) + self

    def __neg__(self):
        return ShiftSymbol("mul", (ShiftSymbol.const(-1), self))

    def __sub__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return self._wrap(other) - self

    def __mul__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        return ShiftSymbol("mul", (self, other))

    def __rmul__(self, other):
        return self._wrap(other) * self

    def __truediv__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        return ShiftSymbol("div", (self, other))

    def __rtruediv__(self, other):
        return self._wrap(other) / self

    def __pow__(self, n: int):
        if self.op == "exp":
            return ShiftSymbol.shift(self.args[0] * n)
        if n < 0:
            return ShiftSymbol.const(1) / (self ** (-n))
        out = ShiftSymbol.const(1)
        for _ in range(n):
            out = out * self
        return out

    # evaluation ------------------------------------------------------------
    def _series(self, P: int) -> _Laurent:
        op = self.op
        if op == "const":
            return _Laurent.make(0, [self.args[0]], P)
        if op == "z":
            return _Laurent.make(1, [Fraction(1)], P)
        if op == "exp":
            return _exp_series(self.args[0], P)
        a = self.args[0]._series(P)
        b = self.args[1]._series(P)
        if op == "add":
            return a + b
        if op == "mul":
            return a * b
        if op == "div":
            return a * b.inverse()
        raise ValueError(op)

    def laurent(self, K: int) -> Tuple[int, List[Fraction]]:
        """Valuation and coefficients of z**val .. z**K, all exact."""
        P = K + 2
        for _ in range(64):
            s = self._series(P)
            if s.prec >= K + 1:
                coeffs = [s.coeff(j) for j in range(min(s.val, 0), K + 1)]
                return min(s.val, 0), coeffs
            P += max(4, K + 1 - int(s.prec))
        raise RuntimeError("symbol expansion did not reach the requested precision")

    def __str__(self):
        return _symbol_str(self)

    def __repr__(self):
        return f"ShiftSymbol({self})"


def _symbol_str(s: ShiftSymbol) -> str:
    if s.op == "const":
        c = s.args[0]
        return str(c)
    if s.op == "z":
        return "eps*d"
    if s.op == "exp":
        a = s.args[0]
        return "1" if a == 0 else ("L" if a == 1 else f"L^{a}")
    a, b = (_symbol_str(x) for x in s.args)
    if s.op == "add":
        return f"({a} + {b})"
    if s.op == "mul":
        return f"{a}*{b}"
    return f"{a}/({b})"


Lambda = ShiftSymbol.shift(1)
Z = ShiftSymbol.z()


@dataclass(frozen=True)
class SymbolSeries:
    """Exact Taylor coefficients ``s_0 .. s_K`` of a symbol regular at z = 0."""

    coeffs: Tuple[Fraction, ...]

    @property
    def order(self) -> int:
        return len(self.coeffs) - 1

    def __getitem__(self, j):
        return self.coeffs[j]


def bernoulli_numbers(n: int) -> List[Fraction]:
    """``B_0 .. B_{n-1}`` with ``B_1 = -1/2`` (generating function x/(e^x - 1))."""
    B: List[Fraction] = []
    for m in range(n):
        if m == 0:
            B.append(Fraction(1))
            continue
        s = sum(math.comb(m + 1, k) * B[k] for k in range(m))
        B.append(-s / (m + 1))
    return B


def expand_symbol(s: ShiftSymbol, K: int) -> SymbolSeries:
    """Taylor expansion of a symbol to order ``K``; raises PoleAtZero for a pole."""
    val, coeffs = s.laurent(K)
    if val < 0 and any(coeffs[: -val]):
        raise PoleAtZero(f"symbol {s} has a pole at z = 0")
    return SymbolSeries(tuple(coeffs[-val:] if val < 0 else coeffs))



def shift(a: AlgebraElement, m: int) -> AlgebraElement:
    return a.shift(m)


def apply_symbol(s: Union[SymbolSeries, ShiftSymbol, Sequence], a: AlgebraElement) -> AlgebraElement:
    """``sum_j s_j (eps d/dx)**j a`` truncated at the algebra's order."""
    K = a.algebra.K
    if isinstance(s, ShiftSymbol):
        s = expand_symbol(s, K)
    coeffs = s.coeffs if isinstance(s, SymbolSeries) else tuple(s)
    out = a.algebra.zero()
    term = a
    for j, c in enumerate(coeffs):
        if j > K or term.is_zero():
            break
        if c:
            out = out + term.scale(c)
        term = term.d_dx() * a.algebra.eps()
    return out


# ---------------------------------------------------------------------------
# inverses of discrete derivatives



@lru_cache(maxsize=None)
def inverse_difference_series(m: int, K: int) -> SymbolSeries:
    """Symbol of ``(Lambda**m - 1)**-1 eps d/dx`` via Bernoulli numbers."""
    B = bernoulli_numbers(K + 1)
    return SymbolSeries(
        tuple(B[k] * Fraction(m) ** (k - 1) / math.factorial(k) for k in range(K + 1))
    )


def invert_discrete_derivative(g: AlgebraElement, m: int) -> AlgebraElement:
    """Solve ``(Lambda**m - 1) X = g`` with zero constant term.

    ``g`` must be ``eps`` times a total x-derivative.  Dividing by ``eps``
    costs one order: the ``eps**K`` coefficient of the result would need the
    (absent) ``eps**(K+1)`` coefficient of ``g``, so callers that need the
    top order exact must work one order higher.
    """
    if m == 0:
        raise ValueError("m must be non-zero")
    if g.is_zero():
        return g
    if g.eps_order() == 0:
        raise NotExact("g has an eps**0 part, so it is not in the image of eps d/dx")
    h = g.divide_eps(1)
    F = integrate_x(h)
    return apply_symbol(inverse_difference_series(m, g.algebra.K), F).without_constant()


@lru_cache(maxsize=None)
def _ratio_series(num: Tuple[int, ...], den: Tuple[int, ...], with_z: int, K: int) -> SymbolSeries:
    """Expansion of ``z**with_z * prod(exp(a z) - 1 for a in num) / prod(...den)``."""
    s = ShiftSymbol.const(1)
    for a in num:
        s = s * (ShiftSymbol.shift(a) - 1)
    for _ in range(with_z):
        s = s * Z
    for a in den:
        s = s / (ShiftSymbol.shift(a) - 1)
    return expand_symbol(s, K)


def solve_difference(rhs_terms, m: int, algebra) -> AlgebraElement:
    """Solve ``(Lambda**m - 1) X = sum`` of terms in an explicitly exact form.

    ``rhs_terms`` is an iterable of ``(kind, a, X)``: ``('d', None, F)`` stands
    for ``eps dF/dx`` and ``('s', a, F)`` for ``(Lambda**a - 1) F``.  The
    inverse symbols are regular at z = 0, so no eps order is lost.  The
    result carries the zero-constant normalisation.
    """
    K = algebra.K
    out = algebra.zero()
    for kind, a, F in rhs_terms:
        if F.is_zero():
            continue
        if kind == "d":
            out = out + apply_symbol(_ratio_series((), (m,), 1, K), F)
        elif kind == "s":
            if a == 0:
                continue
            out = out + apply_symbol(_ratio_series((a,), (m,), 0, K), F)
        else:
            raise ValueError(kind)
    return out.without_constant()


def geometric_inverse_series(n: int, sign: int, K: int) -> SymbolSeries:
    """Expansion of ``(1 + Lambda**s + ... + Lambda**(s(n-1)))**-1`` with ``s = sign``."""
    return _geometric_inverse(n, sign, K)


@lru_cache(maxsize=None)
def _geometric_inverse(n: int, sign: int, K: int) -> SymbolSeries:
    s = ShiftSymbol.const(0)
    for i in range(n):
        s = s + ShiftSymbol.shift(sign * i)
    return expand_symbol(1 / s, K)



__all__ = [
    "Lambda",
    "PoleAtZero",
    "ShiftSymbol",
    "SymbolSeries",
    "Z",
    "apply_symbol",
    "bernoulli_numbers",
    "expand_symbol",
    "geometric_inverse_series",
    "invert_discrete_derivative",
    "shift",
    "solve_difference",
]
