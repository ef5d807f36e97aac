"""Laurent difference operators ``sum_k f_k Lambda^k`` over the eps-series algebra.

Semi-infinite operators are stored through a finite *window*: the interval
``[lo, hi]`` of Lambda-orders where the stored coefficients are exact.
``lo is None`` means the operator is known (and bounded) below, ``hi is None``
the same above.  Orders inside the window without a stored coefficient are
zero; orders outside it are unknown.  Products propagate the window so that
every reported coefficient only depends on exact data.
"""
from __future__ import annotations

import math
from fractions import Fraction
from math import comb
from typing import Callable, Dict, Iterable, Mapping, Optional, Tuple

from .algebra import AlgebraElement, AlgebraError, DiffAlgebra, format_element

_INF = math.inf


class WindowError(AlgebraError):
    """A requested Lambda-order lies outside an operator's exact window."""


class EmptyWindow(WindowError):
    """No coefficient of a product is computable from the factors' windows."""


def _opt_max(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return max(a, b)


def _opt_min(a, b):
    if a is None:
        return b
    if b is None:
        return a
    return min(a, b)


class DifferenceOperator:
    """An immutable difference operator with an exactness window."""

    __slots__ = ("algebra", "coeffs", "lo", "hi")

    def __init__(
        self,
        algebra: DiffAlgebra,
        coeffs: Mapping[int, AlgebraElement],
        lo: Optional[int] = None,
        hi: Optional[int] = None,
    ):
        if lo is not None and hi is not None and lo > hi:
            raise EmptyWindow(f"empty window [{lo}, {hi}]")
        clean = {}
        for k, c in coeffs.items():
            if c.algebra != algebra:
                raise AlgebraError(f"coefficient lives in {c.algebra}, expected {algebra}")
            if c.is_zero():
                continue
            if (lo is not None and k < lo) or (hi is not None and k > hi):
                continue
            clean[k] = c
        self.algebra = algebra
        self.coeffs: Dict[int, AlgebraElement] = clean
        self.lo = lo
        self.hi = hi

    # constructors -------------------------------------------------------------
    @classmethod
    def zero(cls, algebra: DiffAlgebra) -> "DifferenceOperator":
        return cls(algebra, {})

    @classmethod
    def shift_power(cls, algebra: DiffAlgebra, k: int) -> "DifferenceOperator":
        return cls(algebra, {k: algebra.one()})

    @classmethod
    def multiplication(cls, f: AlgebraElement) -> "DifferenceOperator":
        return cls(f.algebra, {0: f})

    # window bookkeeping ---------------------------------------------------------
    @property
    def window(self) -> Tuple[float, float]:
        return (-_INF if self.lo is None else self.lo, _INF if self.hi is None else self.hi)

    def is_known(self, k: int) -> bool:
        return (self.lo is None or k >= self.lo) and (self.hi is None or k <= self.hi)

    def _support_lo(self) -> float:
        if self.lo is not None:
            return -_INF
        if self.coeffs:
            return min(self.coeffs)
        return self.hi + 1 if self.hi is not None else _INF

    def _support_hi(self) -> float:
        if self.hi is not None:
            return _INF
        if self.coeffs:
            return max(self.coeffs)
        return self.lo - 1 if self.lo is not None else -_INF

    @property
    def is_finite(self) -> bool:
        return self.lo is None and self.hi is None

    def coefficient(self, k: int) -> AlgebraElement:
        if not self.is_known(k):
            raise WindowError(f"order {k} outside window {self.window}")
        return self.coeffs.get(k, self.algebra.zero())

    def __getitem__(self, k: int) -> AlgebraElement:
        return self.coefficient(k)

    def orders(self):
        return sorted(self.coeffs)

    # arithmetic -----------------------------------------------------------------
    def _check(self, other: "DifferenceOperator"):
        if other.algebra != self.algebra:
            raise AlgebraError(f"cannot combine operators over {self.algebra} and {other.algebra}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, AlgebraElement)):
            other = self._scalar_op(other)
        if not isinstance(other, DifferenceOperator):
            return NotImplemented
        self._check(other)
        lo = _opt_max(self.lo, other.lo)
        hi = _opt_min(self.hi, other.hi)
        out = dict(self.coeffs)
        for k, c in other.coeffs.items():
            out[k] = out[k] + c if k in out else c
        return DifferenceOperator(self.algebra, out, lo, hi)

    __radd__ = __add__

    def _scalar_op(self, c) -> "DifferenceOperator":
        if isinstance(c, AlgebraElement):
            return DifferenceOperator.multiplication(c)
        return DifferenceOperator(self.algebra, {0: self.algebra.const(c)})

    def __neg__(self):
        return DifferenceOperator(self.algebra, {k: -c for k, c in self.coeffs.items()}, self.lo, self.hi)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, AlgebraElement)):
            other = self._scalar_op(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "DifferenceOperator":
        if isinstance(c, AlgebraElement):
            return DifferenceOperator(self.algebra, {k: c * v for k, v in self.coeffs.items()}, self.lo, self.hi)
        return DifferenceOperator(self.algebra, {k: v.scale(c) for k, v in self.coeffs.items()}, self.lo, self.hi)

    def _product_window(self, other) -> Tuple[Optional[int], Optional[int]]:
        lower_bad = -_INF
        upper_bad = _INF
        for a, b in ((self, other), (other, self)):
            if a.lo is not None:
                lower_bad = max(lower_bad, a.lo - 1 + b._support_hi())
            if a.hi is not None:
                upper_bad = min(upper_bad, a.hi + 1 + b._support_lo())
        if lower_bad == _INF or upper_bad == -_INF or lower_bad + 1 > upper_bad - 1:
            raise EmptyWindow("product has no computable coefficients")
        lo = None if lower_bad == -_INF else int(lower_bad) + 1
        hi = None if upper_bad == _INF else int(upper_bad) - 1
        return lo, hi

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, AlgebraElement):
            other = DifferenceOperator.multiplication(other)
        if not isinstance(other, DifferenceOperator):
            return NotImplemented
        self._check(other)
        lo, hi = self._product_window(other)
        acc: Dict[int, AlgebraElement] = {}
        for i, a in self.coeffs.items():
            for j, b in other.coeffs.items():
                k = i + j
                if (lo is not None and k < lo) or (hi is not None and k > hi):
                    continue
                term = a * b.shift(i)
                acc[k] = acc[k] + term if k in acc else term
        return DifferenceOperator(self.algebra, acc, lo, hi)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if isinstance(other, AlgebraElement):
            return DifferenceOperator.multiplication(other) * self
        return NotImplemented

    def __pow__(self, n: int) -> "DifferenceOperator":
        if n < 0:
            raise ValueError("negative powers are not defined")
        out = DifferenceOperator.shift_power(self.algebra, 0)
        for _ in range(n):
            out = out * self
        return out

    def commutator(self, other: "DifferenceOperator") -> "DifferenceOperator":
        return self * other - other * self

    # projections and restrictions ---------------------------------------------
    def project(self, part: str) -> "DifferenceOperator":
        """Coefficient-wise restriction to ``'+'`` (k>=0), ``'-'`` (k<0), ``'<=0'`` or ``'>0'``."""
        cut = {"+": 0, ">=0": 0, ">0": 1, "-": -1, "<0": -1, "<=0": 0}[part]
        if part in ("+", ">=0", ">0"):
            if self.lo is not None and self.lo > cut:
                raise WindowError(f"window {self.window} does not reach the cut at {cut}")
            return DifferenceOperator(self.algebra, {k: c for k, c in self.coeffs.items() if k >= cut}, None, self.hi)
        if self.hi is not None and self.hi < cut:
            raise WindowError(f"window {self.window} does not reach the cut at {cut}")
        return DifferenceOperator(self.algebra, {k: c for k, c in self.coeffs.items() if k <= cut}, self.lo, None)

    def plus(self):
        return self.project("+")

    def minus(self):
        return self.project("-")

    def residue(self) -> AlgebraElement:
        return self.coefficient(0)

    def restrict(self, lo: int, hi: int) -> "DifferenceOperator":
        """The finite operator made of the orders ``lo..hi`` (all of which must be exact)."""
        if not (self.is_known(lo) and self.is_known(hi)):
            raise WindowError(f"[{lo}, {hi}] not inside window {self.window}")
        return DifferenceOperator(self.algebra, {k: c for k, c in self.coeffs.items() if lo <= k <= hi})

    def narrow(self, lo: Optional[int], hi: Optional[int]) -> "DifferenceOperator":
        """Shrink the exact window (never widens it)."""
        new_lo = _opt_max(self.lo, lo)
        new_hi = _opt_min(self.hi, hi)
        return DifferenceOperator(self.algebra, self.coeffs, new_lo, new_hi)

    # coefficient maps -----------------------------------------------------------
    def map(self, fn: Callable[[AlgebraElement], AlgebraElement]) -> "DifferenceOperator":
        return DifferenceOperator(self.algebra, {k: fn(c) for k, c in self.coeffs.items()}, self.lo, self.hi)

    def d_dx(self) -> "DifferenceOperator":
        return self.map(lambda c: c.d_dx())

    def eps_d_dx_power(self, j: int) -> "DifferenceOperator":
        return self.map(lambda c: c.eps_d_dx_power(j))

    def truncate(self, K: int) -> "DifferenceOperator":
        alg = self.algebra.with_truncation(K)
        return DifferenceOperator(alg, {k: c.truncate(K) for k, c in self.coeffs.items()}, self.lo, self.hi)

    def apply(self, f: AlgebraElement) -> AlgebraElement:
        """Action on a function: ``sum_k f_k * f(x + k eps)``; the operator must be finite."""
        if not self.is_finite:
            raise WindowError("only finite operators act on functions")
        out = self.algebra.zero()
        for k, c in self.coeffs.items():
            out = out + c * f.shift(k)
        return out

    # comparisons ----------------------------------------------------------------
    def is_zero(self) -> bool:
        """All exact coefficients vanish."""
        return not self.coeffs

    def equals_on_window(self, other: "DifferenceOperator") -> bool:
        return (self - other).is_zero()

    def __eq__(self, other):
        if not isinstance(other, DifferenceOperator):
            return NotImplemented
        return (
            self.algebra == other.algebra
            and self.lo == other.lo
            and self.hi == other.hi
            and self.coeffs == other.coeffs
        )

    __hash__ = None

    # display ---------------------------------------------------------------------
    def __str__(self):
        if not self.coeffs:
            body = "0"
        else:
            body = " + ".join(
                f"({format_element(self.coeffs[k])})" + ("" if k == 0 else f"*L^{k}")
                for k in sorted(self.coeffs, reverse=True)
            )
        if self.is_finite:
            return body
        return f"{body}  [window {self.lo}..{self.hi}]"

    def __repr__(self):
        return f"DifferenceOperator({self})"

    def to_json(self) -> dict:
        return {
            "N": self.algebra.N,
            "M": self.algebra.M,
            "K": self.algebra.K,
            "window": [self.lo, self.hi],
            "terms": [
                [k, self.coeffs[k].to_json()["terms"]] for k in sorted(self.coeffs, reverse=True)
            ],
        }

    def to_latex(self) -> str:
        if not self.coeffs:
            return "0"
        parts = []
        for k in sorted(self.coeffs, reverse=True):
            c = format_element(self.coeffs[k], latex=True)
            lam = "" if k == 0 else ("\\Lambda" if k == 1 else f"\\Lambda^{{{k}}}")
            parts.append(f"\\left({c}\\right){lam}")
        return " + ".join(parts)


def finite_operator(algebra: DiffAlgebra, coeffs: Mapping[int, AlgebraElement]) -> DifferenceOperator:
    return DifferenceOperator(algebra, coeffs)


def op_mul(a: DifferenceOperator, b: DifferenceOperator) -> DifferenceOperator:
    return a * b


def op_commutator(a: DifferenceOperator, b: DifferenceOperator) -> DifferenceOperator:
    return a.commutator(b)


def project(a: DifferenceOperator, part: str) -> DifferenceOperator:
    return a.project(part)


def residue(a: DifferenceOperator) -> AlgebraElement:
    return a.residue()


def residue_of_commutator_terms(a: DifferenceOperator, b: DifferenceOperator):
    """``res [a, b]`` written as ``sum_i (Lambda**-i - 1)(-a_i * Lambda**i b_{-i})``.

    ``a`` must be finite.  Returns ``('s', -i, X_i)`` terms understood by
    :func:`bigraded_toda.symbols.solve_difference`.
    """
    if not a.is_finite:
        raise WindowError("first factor must be finite")
    terms = []
    for i, ai in a.coeffs.items():
        if i == 0:
            continue
        bi = b.coefficient(-i)
        if not bi.is_zero():
            # a_i Lambda^i(b_{-i}) - b_{-i} Lambda^{-i}(a_i) = (1 - Lambda^{-i})(a_i Lambda^i b_{-i})
            terms.append(("s", -i, -(ai * bi.shift(i))))
    return terms


class DiffDiffOperator:
    """``sum_j D_j (eps d/dx)**j`` with difference-operator coefficients ``D_j``."""

    __slots__ = ("algebra", "parts")

    def __init__(self, algebra: DiffAlgebra, parts: Mapping[int, DifferenceOperator]):
        self.algebra = algebra
        self.parts: Dict[int, DifferenceOperator] = {
            j: d for j, d in parts.items() if not (d.is_zero() and d.is_finite)
        }

    @classmethod
    def from_difference(cls, d: DifferenceOperator) -> "DiffDiffOperator":
        return cls(d.algebra, {0: d})

    @classmethod
    def eps_d(cls, algebra: DiffAlgebra) -> "DiffDiffOperator":
        return cls(algebra, {1: DifferenceOperator.shift_power(algebra, 0)})

    @property
    def difference_part(self) -> DifferenceOperator:
        return self.parts.get(0, DifferenceOperator.zero(self.algebra))

    @property
    def dpoly_degree(self) -> int:
        return max(self.parts, default=0)

    def _wrap(self, other):
        if isinstance(other, DiffDiffOperator):
            return other
        if isinstance(other, DifferenceOperator):
            return DiffDiffOperator.from_difference(other)
        return NotImplemented

    def __add__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        out = dict(self.parts)
        for j, d in other.parts.items():
            out[j] = out[j] + d if j in out else d
        return DiffDiffOperator(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return DiffDiffOperator(self.algebra, {j: -d for j, d in self.parts.items()})

    def __sub__(self, other):
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "DiffDiffOperator":
        return DiffDiffOperator(self.algebra, {j: d.scale(c) for j, d in self.parts.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        out: Dict[int, DifferenceOperator] = {}
        for i, d in self.parts.items():
            for j, e in other.parts.items():
                # (eps d)^i g = sum_r C(i,r) ((eps d)^r g) (eps d)^(i-r)
                for r in range(i + 1):
                    term = (d * e.eps_d_dx_power(r)).scale(comb(i, r))
                    p = i - r + j
                    out[p] = out[p] + term if p in out else term
        return DiffDiffOperator(self.algebra, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        other = self._wrap(other)
        if other is NotImplemented:
            return other
        return other * self

    def commutator(self, other) -> "DiffDiffOperator":
        other = self._wrap(other)
        return self * other - other * self

    def map(self, fn) -> "DiffDiffOperator":
        return DiffDiffOperator(self.algebra, {j: d.map(fn) for j, d in self.parts.items()})

    def is_zero(self) -> bool:
        return all(d.is_zero() for d in self.parts.values())

    def truncate(self, K: int) -> "DiffDiffOperator":
        return DiffDiffOperator(self.algebra.with_truncation(K), {j: d.truncate(K) for j, d in self.parts.items()})

    def __str__(self):
        if not self.parts:
            return "0"
        chunks = []
        for j in sorted(self.parts, reverse=True):
            body = str(self.parts[j])
            chunks.append(body if j == 0 else f"[{body}]*ε∂" + (f"^{j}" if j > 1 else ""))
        return " + ".join(chunks)

    __repr__ = __str__

    def to_json(self) -> dict:
        return {"dpoly": {str(j): d.to_json() for j, d in sorted(self.parts.items())}}

    def to_latex(self) -> str:
        chunks = []
        for j in sorted(self.parts, reverse=True):
            body = self.parts[j].to_latex()
            if j == 0:
                chunks.append(body)
            else:
                tail = "\\epsilon\\partial" + (f"^{{{j}}}" if j > 1 else "")
                chunks.append(f"\\left[{body}\\right]{tail}")
        return " + ".join(chunks) or "0"


__all__ = [
    "DiffDiffOperator",
    "DifferenceOperator",
    "EmptyWindow",
    "WindowError",
    "finite_operator",
    "op_commutator",
    "op_mul",
    "project",
    "residue",
    "residue_of_commutator_terms",
]
