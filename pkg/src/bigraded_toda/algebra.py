"""Exact arithmetic in the graded differential algebra of epsilon-series.

Elements are finite rational combinations of monomials in the jet variables
``u_k^{(j)}`` (``-M < k < N``), ``v^{(j)}`` with ``v = u_{-M}^{1/M}``, the
underived symbol ``logu = log u_{-M}`` and the formal parameter ``eps``.
``u_{-M}`` is never a generator: it is always stored as ``v**M``, and the
x-derivative of ``logu`` is rewritten as ``M v_x / v``.  Every element carries
the truncation order ``K`` of its algebra; terms with ``eps**j``, ``j > K`` are
dropped on construction.

An auxiliary family ``f`` (a generic test function) is available for
canonicalising operators by their action on an arbitrary function.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Callable, Dict, Iterable, Iterator, Mapping, Optional, Tuple

Rational = Fraction

# Jet-variable kinds.  ``v`` with derivative order 0 lives in the monomial's
# v-exponent, never in the factor list.
KIND_U = 0
KIND_V = 1
KIND_F = 2
_KIND_NAMES = {KIND_U: "u", KIND_V: "v", KIND_F: "f"}
_KIND_CODES = {name: code for code, name in _KIND_NAMES.items()}

Var = Tuple[int, int, int]  # (kind, index, derivative order)
Factors = Tuple[Tuple[Var, int], ...]
Monomial = Tuple[int, int, int, Factors]  # (eps power, v exponent, logu exponent, factors)

ONE_MONOMIAL: Monomial = (0, 0, 0, ())


class AlgebraError(Exception):
    """Base class for errors raised by the algebra layer."""


class TruncationMismatch(AlgebraError):
    """Raised when elements of algebras with different (N, M, K) are combined."""


class NotExact(AlgebraError):
    """Raised when an element is not a total x-derivative."""


@dataclass(frozen=True, order=True)
class GeneratorId:
    """A jet variable: ``kind`` is one of ``'u'``, ``'v'``, ``'logu'``, ``'f'``."""

    kind: str
    index: int = 0
    order: int = 0

    def __post_init__(self):
        if self.kind not in ("u", "v", "logu", "f"):
            raise ValueError(f"unknown generator kind {self.kind!r}")
        if self.order < 0:
            raise ValueError("derivative order must be non-negative")
        if self.kind == "logu" and self.order:
            raise ValueError("logu carries no derivatives; use M v_x / v")

    def __str__(self):
        base = {"u": f"u_{{{self.index}}}", "v": "v", "logu": "logu", "f": "f"}[self.kind]
        return base + ("'" * self.order if self.order < 4 else f"^({self.order})")


# ---------------------------------------------------------------------------
# monomial kernels (cached; pure functions of hashable tuples)

def _merge(fa: Factors, fb: Factors) -> Factors:
    if not fa:
        return fb
    if not fb:
        return fa
    out = []
    i = j = 0
    la, lb = len(fa), len(fb)
    while i < la and j < lb:
        va, ea = fa[i]
        vb, eb = fb[j]
        if va == vb:
            out.append((va, ea + eb))
            i += 1
            j += 1
        elif va < vb:
            out.append(fa[i])
            i += 1
        else:
            out.append(fb[j])
            j += 1
    out.extend(fa[i:])
    out.extend(fb[j:])
    return tuple(out)


@lru_cache(maxsize=1 << 20)
def _mono_mul(a: Monomial, b: Monomial) -> Monomial:
    return (a[0] + b[0], a[1] + b[1], a[2] + b[2], _merge(a[3], b[3]))


def _with_factor(factors: Factors, var: Var, delta: int) -> Factors:
    """Change the exponent of ``var`` by ``delta`` (removing it at zero)."""
    out = []
    placed = False
    for w, e in factors:
        if w == var:
            placed = True
            if e + delta:
                out.append((w, e + delta))
        else:
            if not placed and var < w:
                out.append((var, delta))
                placed = True
            out.append((w, e))
    if not placed:
        out.append((var, delta))
    return tuple(out)


def _var_key(var: Var):
    kind, index, order = var
    return (order, kind, index)


# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DiffAlgebra:
    """The algebra of eps-series truncated at ``K`` for a Lax operator of bidegree (N, M)."""

    N: int
    M: int
    K: int

    def __post_init__(self):
        if self.N < 1 or self.M < 1:
            raise ValueError("N and M must be positive")
        if self.K < 0:
            raise ValueError("K must be non-negative")

    # constructors ---------------------------------------------------------
    def element(self, terms: Mapping[Monomial, object]) -> "AlgebraElement":
        return AlgebraElement(self, terms)

    def zero(self) -> "AlgebraElement":
        return AlgebraElement(self, {})

    def one(self) -> "AlgebraElement":
        return self.const(1)

    def const(self, c) -> "AlgebraElement":
        return AlgebraElement(self, {ONE_MONOMIAL: c})

    def eps(self, power: int = 1) -> "AlgebraElement":
        return AlgebraElement(self, {(power, 0, 0, ()): 1})

    def u(self, k: int, order: int = 0) -> "AlgebraElement":
        """The jet variable ``u_k^{(order)}``; ``u_{-M}`` expands to ``v**M``."""
        if k == self.N:
            return self.one() if order == 0 else self.zero()
        if k < -self.M or k > self.N:
            return self.zero()
        if k == -self.M:
            return self.v_power(self.M).d_dx(order)
        return AlgebraElement(self, {(0, 0, 0, (((KIND_U, k, order), 1),)): 1})

    def v(self, order: int = 0) -> "AlgebraElement":
        if order == 0:
            return self.v_power(1)
        return AlgebraElement(self, {(0, 0, 0, (((KIND_V, 0, order), 1),)): 1})

    def v_power(self, e: int) -> "AlgebraElement":
        return AlgebraElement(self, {(0, e, 0, ()): 1})

    def logu(self) -> "AlgebraElement":
        return AlgebraElement(self, {(0, 0, 1, ()): 1})

    def test_function(self, order: int = 0) -> "AlgebraElement":
        return AlgebraElement(self, {(0, 0, 0, (((KIND_F, 0, order), 1),)): 1})

    def generator(self, g: GeneratorId) -> "AlgebraElement":
        if g.kind == "u":
            return self.u(g.index, g.order)
        if g.kind == "v":
            return self.v(g.order)
        if g.kind == "logu":
            return self.logu()
        return self.test_function(g.order)

    def with_truncation(self, K: int) -> "DiffAlgebra":
        return DiffAlgebra(self.N, self.M, K)

    @property
    def u_indices(self) -> range:
        """Indices of the u-generators, ``-M+1 .. N-1``."""
        return range(-self.M + 1, self.N)

    def families(self) -> list:
        """Underived generator families, for variational derivatives."""
        return [GeneratorId("u", k) for k in self.u_indices] + [GeneratorId("v")]

    # grading --------------------------------------------------------------
    def var_degree(self, var: Var) -> Fraction:
        kind, index, _ = var
        if kind == KIND_U:
            return 1 - Fraction(index, self.N)
        if kind == KIND_V:
            return Fraction(1, self.N) + Fraction(1, self.M)
        return Fraction(0)

    def monomial_degree(self, mono: Monomial) -> Fraction:
        d = mono[1] * (Fraction(1, self.N) + Fraction(1, self.M))
        for var, e in mono[3]:
            d += e * self.var_degree(var)
        return d


def _monomial_partial_degree(mono: Monomial) -> int:
    return mono[0] - sum(var[2] * e for var, e in mono[3])


class AlgebraElement:
    """An immutable element of the truncated differential algebra."""

    __slots__ = ("algebra", "terms", "_hash")

    def __init__(self, algebra: DiffAlgebra, terms: Mapping[Monomial, object]):
        K = algebra.K
        clean = {}
        for mono, c in terms.items():
            if mono[0] > K or not c:
                continue
            clean[mono] = c if isinstance(c, Fraction) else Fraction(c)
        self.algebra = algebra
        self.terms: Dict[Monomial, Fraction] = clean
        self._hash = None

    @classmethod
    def _raw(cls, algebra, terms):
        obj = cls.__new__(cls)
        obj.algebra = algebra
        obj.terms = terms
        obj._hash = None
        return obj

    # basic protocol --------------------------------------------------------
    def _check(self, other: "AlgebraElement"):
        if other.algebra != self.algebra:
            raise TruncationMismatch(f"cannot combine {self.algebra} with {other.algebra}")

    def _coerce(self, other) -> "AlgebraElement":
        if isinstance(other, AlgebraElement):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return self.algebra.const(other)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m, 0) + c
            if s:
                out[m] = s
            else:
                out.pop(m, None)
        return AlgebraElement._raw(self.algebra, out)

    __radd__ = __add__

    def __neg__(self):
        return AlgebraElement._raw(self.algebra, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "AlgebraElement":
        c = Fraction(c)
        if not c:
            return self.algebra.zero()
        return AlgebraElement._raw(self.algebra, {m: v * c for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        self._check(other)
        K = self.algebra.K
        out: Dict[Monomial, Fraction] = {}
        a_terms = self.terms
        b_terms = other.terms
        if len(a_terms) > len(b_terms):
            a_terms, b_terms = b_terms, a_terms
        b_items = sorted(b_terms.items(), key=lambda t: t[0][0])
        for ma, ca in a_terms.items():
            room = K - ma[0]
            for mb, cb in b_items:
                if mb[0] > room:
                    break
                m = _mono_mul(ma, mb)
                s = out.get(m, 0) + ca * cb
                if s:
                    out[m] = s
                else:
                    del out[m]
        return AlgebraElement._raw(self.algebra, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(other)
        return NotImplemented

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self.scale(Fraction(1) / Fraction(other))
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            if len(self.terms) == 1:
                (mono, c), = self.terms.items()
                if mono[0] == 0 and mono[2] == 0 and not mono[3]:
                    return AlgebraElement(self.algebra, {(0, mono[1] * n, 0, ()): c ** n})
            raise ValueError("negative powers only exist for monomials c*v**e")
        result = self.algebra.one()
        base = self
        while n:
            if n & 1:
                result = result * base
            n >>= 1
            if n:
                base = base * base
        return result

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = self.algebra.const(other)
        if not isinstance(other, AlgebraElement):
            return NotImplemented
        return self.algebra == other.algebra and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.algebra, frozenset(self.terms.items())))
        return self._hash

    def __bool__(self):
        return bool(self.terms)

    def is_zero(self) -> bool:
        return not self.terms

    def __len__(self):
        return len(self.terms)

    def __iter__(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(self.terms.items())

    # eps structure --------------------------------------------------------
    def truncate(self, K: int) -> "AlgebraElement":
        """Re-home the element in the algebra with truncation ``K`` (dropping higher orders)."""
        return AlgebraElement(self.algebra.with_truncation(K), self.terms)

    def eps_order(self) -> Optional[int]:
        """Lowest eps power present, or None for zero."""
        return min((m[0] for m in self.terms), default=None)

    def eps_coefficient(self, j: int) -> "AlgebraElement":
        """The coefficient of ``eps**j``, returned as an eps-free element."""
        return AlgebraElement._raw(
            self.algebra,
            {(0,) + m[1:]: c for m, c in self.terms.items() if m[0] == j},
        )

    def divide_eps(self, power: int = 1) -> "AlgebraElement":
        """Exact division by ``eps**power``; the top ``power`` orders become unknown (zero)."""
        out = {}
        for m, c in self.terms.items():
            if m[0] < power:
                raise AlgebraError("element is not divisible by eps")
            out[(m[0] - power,) + m[1:]] = c
        return AlgebraElement._raw(self.algebra, out)

    def constant_part(self) -> "AlgebraElement":
        """The part lying in the kernel of every shift difference: pure eps-powers."""
        return AlgebraElement._raw(
            self.algebra,
            {m: c for m, c in self.terms.items() if not m[1] and not m[2] and not m[3]},
        )

    def without_constant(self) -> "AlgebraElement":
        return AlgebraElement._raw(
            self.algebra,
            {m: c for m, c in self.terms.items() if m[1] or m[2] or m[3]},
        )

    # calculus ---------------------------------------------------------------
    def derive(self, image: Callable[[object], "AlgebraElement"]) -> "AlgebraElement":
        """Apply the derivation fixed by its values on the jet variables.

        ``image`` receives a ``Var`` tuple, the string ``'v'`` (underived v)
        or ``'logu'`` and returns the element that variable is mapped to.
        """
        alg = self.algebra
        out = alg.zero()
        cache = {}

        def img(key):
            if key not in cache:
                cache[key] = image(key)
            return cache[key]

        for mono, c in self.terms.items():
            eps, ve, le, factors = mono
            if ve:
                rest = AlgebraElement._raw(alg, {(eps, ve - 1, le, factors): c * ve})
                out = out + rest * img("v")
            if le:
                rest = AlgebraElement._raw(alg, {(eps, ve, le - 1, factors): c * le})
                out = out + rest * img("logu")
            for var, e in factors:
                rest = AlgebraElement._raw(
                    alg, {(eps, ve, le, _with_factor(factors, var, -1)): c * e}
                )
                out = out + rest * img(var)
        return out

    def d_dx(self, times: int = 1) -> "AlgebraElement":
        """The total x-derivative (applied ``times`` times)."""
        out = self
        for _ in range(times):
            if not out.terms:
                break
            acc: Dict[Monomial, Fraction] = {}
            M = out.algebra.M
            for mono, c in out.terms.items():
                for m2, c2 in _mono_d_dx(mono, M):
                    s = acc.get(m2, 0) + c * c2
                    if s:
                        acc[m2] = s
                    else:
                        del acc[m2]
            out = AlgebraElement._raw(out.algebra, acc)
        return out

    def partial(self, g) -> "AlgebraElement":
        """Partial derivative with respect to one jet variable.

        ``g`` is a GeneratorId.  For ``GeneratorId('v')`` the dependence through
        ``logu = M log v`` is included.
        """
        alg = self.algebra
        if isinstance(g, GeneratorId):
            if g.kind == "logu":
                target = "logu"
            elif g.kind == "v" and g.order == 0:
                target = "v"
            else:
                target = (_KIND_CODES[g.kind], g.index if g.kind == "u" else 0, g.order)
        else:
            target = g
        v_inverse = alg.v_power(-1).scale(alg.M)

        def image(key):
            if key == target:
                return alg.one()
            if target == "v" and key == "logu":
                return v_inverse
            return alg.zero()

        return self.derive(image)

    def shift(self, m: int) -> "AlgebraElement":
        """The shift x -> x + m*eps, as the exponential of eps*m*d/dx."""
        if m == 0 or not self.terms:
            return self
        acc: Dict[Monomial, Fraction] = {}
        alg = self.algebra
        for mono, c in self.terms.items():
            for m2, c2 in _mono_shift(mono, m, alg.M, alg.K):
                s = acc.get(m2, 0) + c * c2
                if s:
                    acc[m2] = s
                else:
                    del acc[m2]
        return AlgebraElement._raw(alg, acc)

    def eps_d_dx_power(self, j: int) -> "AlgebraElement":
        """``(eps d/dx)**j`` applied to the element."""
        if j == 0:
            return self
        return self.d_dx(j) * self.algebra.eps(j)

    # grading ----------------------------------------------------------------
    def grading(self) -> Optional[Fraction]:
        """Common degree if homogeneous, else None (zero counts as homogeneous of any degree: None)."""
        degs = {self.algebra.monomial_degree(m) for m in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def grading_partial(self) -> Optional[int]:
        degs = {_monomial_partial_degree(m) for m in self.terms}
        return degs.pop() if len(degs) == 1 else None

    def is_homogeneous(self, degree, partial_degree=None) -> bool:
        alg = self.algebra
        for m in self.terms:
            if alg.monomial_degree(m) != degree:
                return False
            if partial_degree is not None and _monomial_partial_degree(m) != partial_degree:
                return False
        return True

    # queries ------------------------------------------------------------------
    def variables(self) -> set:
        out = set()
        for mono in self.terms:
            if mono[1]:
                out.add((KIND_V, 0, 0))
            if mono[2]:
                out.add("logu")
            out.update(var for var, _ in mono[3])
        return out

    def evaluate(self, values: Mapping, eps=0):
        """Numerically evaluate an element; ``values`` maps Var tuples, ``'v'``, ``'logu'``."""
        total = 0
        for (e, ve, le, factors), c in self.terms.items():
            t = float(c) if not isinstance(c, complex) else c
            if e:
                t = t * eps ** e
            if ve:
                t = t * values["v"] ** ve
            if le:
                t = t * values["logu"] ** le
            for var, p in factors:
                t = t * values[var] ** p
            total = total + t
        return total

    # display ----------------------------------------------------------------
    def __repr__(self):
        return f"AlgebraElement({self})"

    def __str__(self):
        return format_element(self)

    def to_latex(self) -> str:
        return format_element(self, latex=True)

    def to_json(self) -> dict:
        return element_to_json(self)


# ---------------------------------------------------------------------------
# cached monomial-level derivatives and shifts


@lru_cache(maxsize=1 << 18)
def _mono_d_dx(mono: Monomial, M: int) -> tuple:
    eps, ve, le, factors = mono
    out: Dict[Monomial, Fraction] = {}

    def add(m, c):
        s = out.get(m, 0) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)

    v1 = (KIND_V, 0, 1)
    if ve:
        add((eps, ve - 1, le, _with_factor(factors, v1, 1)), Fraction(ve))
    if le:
        # d logu = M v_x / v
        add((eps, ve - 1, le - 1, _with_factor(factors, v1, 1)), Fraction(le * M))
    for var, e in factors:
        kind, index, order = var
        f2 = _with_factor(factors, var, -1)
        f2 = _with_factor(f2, (kind, index, order + 1), 1)
        add((eps, ve, le, f2), Fraction(e))
    return tuple(out.items())


@lru_cache(maxsize=1 << 18)
def _mono_shift(mono: Monomial, m: int, M: int, K: int) -> tuple:
    out: Dict[Monomial, Fraction] = {mono: Fraction(1)}
    layer: Dict[Monomial, Fraction] = {mono: Fraction(1)}
    j = 0
    while layer:
        j += 1
        nxt: Dict[Monomial, Fraction] = {}
        for mo, c in layer.items():
            if mo[0] + 1 > K:
                continue
            for m2, c2 in _mono_d_dx(mo, M):
                m3 = (m2[0] + 1,) + m2[1:]
                s = nxt.get(m3, 0) + c * c2 * Fraction(m, j)
                if s:
                    nxt[m3] = s
                else:
                    nxt.pop(m3, None)
        for mo, c in nxt.items():
            s = out.get(mo, 0) + c
            if s:
                out[mo] = s
            else:
                out.pop(mo, None)
        layer = nxt
    return tuple(out.items())


# ---------------------------------------------------------------------------
# functional surface


def add(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a + b


def mul(a: AlgebraElement, b: AlgebraElement) -> AlgebraElement:
    return a * b


def d_dx(a: AlgebraElement) -> AlgebraElement:
    return a.d_dx()


def grading(a: AlgebraElement) -> Optional[Fraction]:
    return a.grading()


def grading_partial(a: AlgebraElement) -> Optional[int]:
    return a.grading_partial()


def euler_derivative(a: AlgebraElement, family: GeneratorId) -> AlgebraElement:
    """Variational derivative ``sum_j (-d/dx)^j d/d(g^{(j)})`` for the family of ``g``."""
    kind = family.kind
    if kind == "logu":
        raise ValueError("logu is not an independent family; use GeneratorId('v')")
    orders = set()
    for mono in a.terms:
        if kind == "v" and (mono[1] or mono[2]):
            orders.add(0)
        for (k, idx, o), _ in mono[3]:
            if _KIND_NAMES[k] == kind and (kind != "u" or idx == family.index):
                orders.add(o)
    result = a.algebra.zero()
    for j in sorted(orders):
        part = a.partial(GeneratorId(kind, family.index if kind == "u" else 0, j))
        term = part.d_dx(j)
        result = result + (term if j % 2 == 0 else -term)
    return result


def is_total_derivative(a: AlgebraElement) -> bool:
    """True iff ``a`` lies in the image of d/dx (Euler operator criterion, no constants)."""
    if a.constant_part():
        return False
    fams = a.algebra.families()
    if any(m[3] and any(var[0] == KIND_F for var, _ in m[3]) for m in a.terms):
        fams = fams + [GeneratorId("f")]
    return all(euler_derivative(a, g).is_zero() for g in fams)


def _integrate_in(A: AlgebraElement, var: Var) -> AlgebraElement:
    """Antiderivative of ``A`` with respect to the jet variable ``var``.

    For ``var = v^{(0)}`` the logarithm ``logu = M log v`` is handled exactly.
    """
    alg = A.algebra
    out: Dict[Monomial, Fraction] = {}

    def put(m, c):
        s = out.get(m, 0) + c
        if s:
            out[m] = s
        else:
            out.pop(m, None)

    if var == (KIND_V, 0, 0):
        M = alg.M
        for (eps, ve, le, factors), c in A.terms.items():
            # int v^e logu^l dv, reduced by parts on l
            coef = c
            l = le
            while True:
                if ve == -1:
                    put((eps, 0, l + 1, factors), coef / (M * (l + 1)))
                    break
                put((eps, ve + 1, l, factors), coef / (ve + 1))
                if l == 0:
                    break
                coef = -coef * l * M / (ve + 1)
                l -= 1
        return AlgebraElement._raw(alg, out)
    for (eps, ve, le, factors), c in A.terms.items():
        e = dict(factors).get(var, 0)
        put((eps, ve, le, _with_factor(factors, var, 1)), c / (e + 1))
    return AlgebraElement._raw(alg, out)


def integrate_x(a: AlgebraElement) -> AlgebraElement:
    """Formal antiderivative with zero constant term; raises NotExact otherwise."""
    alg = a.algebra
    remainder = a
    result = alg.zero()
    for _ in range(10000):
        if remainder.is_zero():
            return result.without_constant()
        top = None
        for mono in remainder.terms:
            if mono[1] or mono[2]:
                cand = (KIND_V, 0, 0)
                if top is None or _var_key(cand) > _var_key(top):
                    top = cand
            for var, _ in mono[3]:
                if top is None or _var_key(var) > _var_key(top):
                    top = var
        if top is None or top[2] == 0:
            raise NotExact(f"element is not an x-derivative: residual {remainder}")
        n = top[2]
        coeff_terms = {}
        for mono, c in remainder.terms.items():
            e = dict(mono[3]).get(top, 0)
            if e == 0:
                continue
            if e > 1:
                raise NotExact(f"top jet {top} appears non-linearly")
            m2 = (mono[0], mono[1], mono[2], _with_factor(mono[3], top, -1))
            if any(var[2] >= n for var, _ in m2[3]):
                raise NotExact(f"coefficient of top jet {top} contains order-{n} jets")
            coeff_terms[m2] = c
        A = AlgebraElement._raw(alg, coeff_terms)
        F = _integrate_in(A, (top[0], top[1], n - 1))
        result = result + F
        remainder = remainder - F.d_dx()
    raise NotExact("integration did not terminate")


# ---------------------------------------------------------------------------
# serialization


def _var_name(var: Var, latex: bool) -> str:
    kind, index, order = var
    if kind == KIND_U:
        base = f"u_{{{index}}}" if latex else f"u[{index}]"
    elif kind == KIND_V:
        base = "v"
    else:
        base = "f"
    if order == 0:
        return base
    if latex:
        return f"\\partial_x^{{{order}}}{base}" if order > 1 else f"\\partial_x {base}"
    return f"{base}_x{order}" if order > 1 else f"{base}_x"


def monomial_key(mono: Monomial, latex: bool = False) -> str:
    eps, ve, le, factors = mono
    parts = []
    if eps:
        parts.append(("\\epsilon" if latex else "eps") + (f"^{{{eps}}}" if latex and eps > 1 else (f"^{eps}" if eps > 1 else "")))
    if ve:
        if latex:
            parts.append("v" if ve == 1 else f"v^{{{ve}}}")
        else:
            parts.append("v" if ve == 1 else f"v^{ve}")
    if le:
        name = "\\log u_{-M}" if latex else "logu"
        parts.append(name if le == 1 else (f"({name})^{{{le}}}" if latex else f"{name}^{le}"))
    for var, e in factors:
        name = _var_name(var, latex)
        if e == 1:
            parts.append(name)
        else:
            parts.append(f"({name})^{{{e}}}" if latex else f"{name}^{e}")
    if not parts:
        return "1"
    return (" " if latex else "*").join(parts)


def _sort_key(mono: Monomial):
    return (mono[0], -mono[1], mono[2], tuple((_var_key(v), e) for v, e in mono[3]))


def format_element(a: AlgebraElement, latex: bool = False) -> str:
    if not a.terms:
        return "0"
    chunks = []
    for mono in sorted(a.terms, key=_sort_key):
        c = a.terms[mono]
        key = monomial_key(mono, latex)
        sign = "-" if c < 0 else "+"
        mag = abs(c)
        if key == "1":
            body = _fmt_rational(mag, latex)
        elif mag == 1:
            body = key
        else:
            body = f"{_fmt_rational(mag, latex)}{' ' if latex else '*'}{key}"
        chunks.append((sign, body))
    text = ("-" if chunks[0][0] == "-" else "") + chunks[0][1]
    for sign, body in chunks[1:]:
        text += f" {sign} {body}"
    return text


def _fmt_rational(q: Fraction, latex: bool) -> str:
    if q.denominator == 1:
        return str(q.numerator)
    if latex:
        return f"\\frac{{{q.numerator}}}{{{q.denominator}}}"
    return f"{q.numerator}/{q.denominator}"


def element_to_json(a: AlgebraElement) -> dict:
    """Canonical JSON form: sorted monomial keys, coefficients as 'p/q' strings."""
    alg = a.algebra
    terms = {monomial_key(m): f"{c.numerator}/{c.denominator}" for m, c in a.terms.items()}
    return {
        "N": alg.N,
        "M": alg.M,
        "K": alg.K,
        "terms": dict(sorted(terms.items())),
    }


def dumps(a: AlgebraElement) -> str:
    return json.dumps(element_to_json(a), sort_keys=True)


def from_monomials(algebra: DiffAlgebra, items: Iterable[Tuple[Monomial, object]]) -> AlgebraElement:
    acc: Dict[Monomial, Fraction] = {}
    for m, c in items:
        acc[m] = acc.get(m, 0) + Fraction(c)
    return AlgebraElement(algebra, acc)


def exp_series(y: AlgebraElement) -> AlgebraElement:
    """``exp(y)`` for ``y`` with no eps**0 part; terminates by truncation."""
    if y.eps_order() is not None and y.eps_order() == 0:
        raise AlgebraError("exp_series needs an element of positive eps order")
    alg = y.algebra
    total = alg.one()
    term = alg.one()
    for k in range(1, alg.K + 1):
        term = (term * y).scale(Fraction(1, k))
        if term.is_zero():
            break
        total = total + term
    return total


__all__ = [
    "AlgebraElement",
    "AlgebraError",
    "DiffAlgebra",
    "GeneratorId",
    "NotExact",
    "TruncationMismatch",
    "add",
    "d_dx",
    "dumps",
    "euler_derivative",
    "exp_series",
    "grading",
    "grading_partial",
    "integrate_x",
    "is_total_derivative",
    "mul",
]
