"""Published Hamiltonian-operator matrices for small (N, M), as composable operator words.

Each entry is a sum of words ``c * F1 * F2 * ...`` whose factors are either
multiplication by a field ``U(k)`` or a shift symbol such as ``Lam - Lam**-1``
or ``2/(1+Lam)``.  Words act on a test function from the right.
"""
from __future__ import annotations

from fractions import Fraction
from typing import Dict, List, Tuple, Union

from .algebra import AlgebraElement, DiffAlgebra
from .symbols import ShiftSymbol, apply_symbol, expand_symbol, _symbol_str


class OpWord:
    """A formal sum of products of field multiplications and shift symbols."""

    def __init__(self, words: List[Tuple[Fraction, tuple]]):
        self.words = words

    @staticmethod
    def lift(x) -> "OpWord":
        if isinstance(x, OpWord):
            return x
        if isinstance(x, ShiftSymbol):
            return OpWord([(Fraction(1), (("sym", x),))])
        if isinstance(x, (int, Fraction)):
            return OpWord([(Fraction(x), ())])
        raise TypeError(type(x))

    def __add__(self, other):
        return OpWord(self.words + OpWord.lift(other).words)

    __radd__ = __add__

    def __neg__(self):
        return OpWord([(-c, w) for c, w in self.words])

    def __sub__(self, other):
        return self + (-OpWord.lift(other))

    def __rsub__(self, other):
        return OpWord.lift(other) - self

    def __mul__(self, other):
        other = OpWord.lift(other)
        return OpWord([(c1 * c2, w1 + w2) for c1, w1 in self.words for c2, w2 in other.words])

    def __rmul__(self, other):
        return OpWord.lift(other) * self

    def apply(self, f: AlgebraElement) -> AlgebraElement:
        alg = f.algebra
        out = alg.zero()
        for c, word in self.words:
            g = f
            for kind, x in reversed(word):
                if kind == "u":
                    g = alg.u(x) * g
                else:
                    g = apply_symbol(expand_symbol(x, alg.K), g)
            out = out + g.scale(c)
        return out

    def __str__(self):
        parts = []
        for c, word in self.words:
            body = " ".join(f"u[{x}]" if k == "u" else f"({_symbol_str(x)})" for k, x in word) or "1"
            parts.append(body if c == 1 else f"{c}*{body}")
        return " + ".join(parts) or "0"


def U(k: int) -> OpWord:
    return OpWord([(Fraction(1), (("u", k),))])


Lam = ShiftSymbol.shift(1)
ZERO = OpWord([])


def _inv(s: ShiftSymbol) -> ShiftSymbol:
    return ShiftSymbol.const(1) / s


def _matrices() -> Dict[Tuple[int, int, int], List[List[OpWord]]]:
    one = ShiftSymbol.const(1)
    L1 = Lam
    Lm1 = Lam ** -1
    Lm2 = Lam ** -2
    L2 = Lam ** 2
    opl = _inv(one + Lam)
    tables = {}
    tables[(1, 1, 1)] = [
        [ZERO, U(-1) * (one - Lm1)],
        [(L1 - one) * U(-1), ZERO],
    ]
    tables[(1, 1, 2)] = [
        [U(-1) * (L1 - Lm1) * U(-1), U(-1) * (one - Lm1) * U(0)],
        [U(0) * (L1 - one) * U(-1), L1 * U(-1) - U(-1) * Lm1],
    ]
    tables[(2, 1, 1)] = [
        [ZERO, U(-1) * (one - Lm1), ZERO],
        [(L1 - one) * U(-1), ZERO, ZERO],
        [ZERO, ZERO, OpWord.lift(L1 - Lm1)],
    ]
    tables[(2, 1, 2)] = [
        [U(-1) * (L1 - one - Lm1 + 2 * opl) * U(-1),
         U(-1) * (one - Lm1) * U(0),
         U(-1) * (2 * opl - Lm1) * U(1)],
        [U(0) * (L1 - one) * U(-1),
         U(1) * L1 * U(-1) - U(-1) * Lm1 * U(1),
         L1 * U(-1) - U(-1) * Lm2],
        [U(1) * (L1 - 2 + 2 * opl) * U(-1),
         L2 * U(-1) - U(-1) * Lm1,
         L1 * U(0) - U(0) * Lm1 - U(1) * U(1) + 2 * U(1) * opl * U(1)],
    ]
    tables[(1, 2, 1)] = [
        [ZERO, ZERO, U(-2) * (one - Lm2)],
        [ZERO, L1 * U(-2) - U(-2) * Lm1, U(-1) * (one - Lm1)],
        [(L2 - one) * U(-2), (L1 - one) * U(-1), ZERO],
    ]
    tables[(1, 2, 2)] = [
        [U(-2) * (L2 + L1 - Lm1 - Lm2) * U(-2),
         U(-2) * (L1 + one - Lm1 - Lm2) * U(-1),
         U(-2) * (one - Lm2) * U(0)],
        [U(-1) * (L2 + L1 - Lm1 - one) * U(-2),
         U(0) * L1 * U(-2) - U(-2) * Lm1 * U(0) + U(-1) * (L1 - Lm1) * U(-1),
         L1 * U(-2) - U(-2) * Lm2 + U(-1) * (one - Lm1) * U(0)],
        [U(0) * (L2 - one) * U(-2),
         L1 * U(-2) - U(-2) * Lm1 + U(0) * (L1 - one) * U(-1),
         L1 * U(-1) - U(-1) * Lm1],
    ]
    return tables


_TABLES = _matrices()


def reference_matrix(N: int, M: int, which: int) -> List[List[OpWord]]:
    """The published matrix for ``(N, M)``; rows and columns run over ``-M .. N-1``."""
    try:
        return _TABLES[(N, M, which)]
    except KeyError:
        raise KeyError(f"no reference matrix for N={N}, M={M}, P{which}") from None


def available() -> List[Tuple[int, int, int]]:
    return sorted(_TABLES)


def compare_with_reference(ham, which: int) -> List["CheckReport"]:
    """One report per entry: the computed matrix entry against the published word, both applied to f."""
    from .reports import CheckReport, element_report

    N, M, K = ham.N, ham.M, ham.K
    table = reference_matrix(N, M, which)
    f = ham.algebra.test_function()
    out = []
    for i, n in enumerate(range(-M, N)):
        for j, m in enumerate(range(-M, N)):
            res = ham.bracket_entry(which, n, m) - table[i][j].apply(f)
            rep = element_report(f"matrix-P{which}", [N, M, n, m], res, K)
            if not rep.passed:
                rep.detail["published"] = str(table[i][j])
            out.append(rep)
    return out


__all__ = ["Lam", "OpWord", "U", "ZERO", "available", "compare_with_reference", "reference_matrix"]
