"""Roots, logarithms and flows of the bigraded Lax operator.

``L = Lambda**N + u_{N-1} Lambda**(N-1) + ... + v**M Lambda**(-M)``.  The two
fractional powers are built coefficient by coefficient, the logarithm from the
commuting relations of the dressed derivative, and the flows from both halves
of the flow generators ``B_{alpha,p}``.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial
from typing import Dict, Optional, Tuple

from .algebra import KIND_F, KIND_U, KIND_V, AlgebraElement, AlgebraError, DiffAlgebra, exp_series
from .operators import DiffDiffOperator, DifferenceOperator
from .symbols import ShiftSymbol, SymbolSeries, apply_symbol, expand_symbol, geometric_inverse_series, solve_difference


class InconsistentFlow(AlgebraError):
    """The two halves of a flow generator produce different vector fields."""


def harmonic(q: int) -> Fraction:
    return sum((Fraction(1, k) for k in range(1, q + 1)), Fraction(0))


@dataclass(frozen=True, order=True)
class FlowIndex:
    alpha: int
    p: int

    def __str__(self):
        return f"({self.alpha},{self.p})"

    def mu(self, N: int, M: int) -> Fraction:
        if self.alpha >= 0:
            return Fraction(-self.alpha, N)
        return Fraction(self.alpha, M)

    def validate(self, N: int, M: int) -> "FlowIndex":
        if not -M <= self.alpha <= N - 1:
            raise ValueError(f"alpha={self.alpha} outside [-{M}, {N - 1}]")
        if self.p < 0:
            raise ValueError("p must be non-negative")
        return self


def as_index(idx) -> FlowIndex:
    if isinstance(idx, FlowIndex):
        return idx
    a, p = idx
    return FlowIndex(int(a), int(p))


def gamma_ratio(x: Fraction, p: int) -> Fraction:
    """``Gamma(x) / Gamma(x + p)`` as a finite product."""
    out = Fraction(1)
    for j in range(p):
        out /= x + j
    return out


def _mul_dicts(A: Dict[int, AlgebraElement], B: Dict[int, AlgebraElement], lo=None, hi=None):
    out: Dict[int, AlgebraElement] = {}
    for i, a in A.items():
        for j, b in B.items():
            k = i + j
            if (lo is not None and k < lo) or (hi is not None and k > hi):
                continue
            t = a * b.shift(i)
            out[k] = out[k] + t if k in out else t
    return out


def _power_coefficient(op: Dict[int, AlgebraElement], n: int, target: int, zero: AlgebraElement) -> AlgebraElement:
    """The Lambda**target coefficient of ``op**n`` for a finite ``op``, skipping useless orders."""
    mn, mx = min(op), max(op)
    acc = {0: zero + 1}
    for i in range(1, n + 1):
        rest = n - i
        acc = _mul_dicts(acc, op, target - rest * mx, target - rest * mn)
    return acc.get(target, zero)


class LaxHierarchy:
    """All symbolic data of the hierarchy for fixed ``(N, M)`` and eps-truncation ``K``.

    Intermediate results are memoised; the memo is guarded by a lock so that
    one instance can be shared between threads.
    """

    def __init__(self, N: int, M: int, K: int):
        self.algebra = DiffAlgebra(N, M, K)
        self.N, self.M, self.K = N, M, K
        self.sigma = Fraction(1, M) + Fraction(1, N)
        self._lock = threading.RLock()
        self._memo: dict = {}
        self._a: list = []  # a_0, a_{-1}, ...
        self._bt: list = []  # gauged b~_0, b~_1, ...
        self._w_neg: list = []  # w_{-1}, w_{-2}, ...
        self._w_pos: list = []  # gauged w~_1, w~_2, ...

    def __repr__(self):
        return f"LaxHierarchy(N={self.N}, M={self.M}, K={self.K})"

    def _cached(self, key, build):
        with self._lock:
            if key not in self._memo:
                self._memo[key] = build()
            return self._memo[key]

    def lifted(self) -> "LaxHierarchy":
        """The same hierarchy one eps-order higher (used where a division by eps costs an order)."""
        return hierarchy(self.N, self.M, self.K + 1)

    def index(self, idx) -> FlowIndex:
        return as_index(idx).validate(self.N, self.M)

    def all_indices(self, pmax: int):
        return [FlowIndex(a, p) for a in range(-self.M, self.N) for p in range(pmax + 1)]

    # the Lax operator -----------------------------------------------------------
    @property
    def L(self) -> DifferenceOperator:
        alg = self.algebra
        return self._cached("L", lambda: DifferenceOperator(alg, {k: alg.u(k) for k in range(-self.M, self.N + 1)}))

    def L_power(self, p: int) -> DifferenceOperator:
        def build():
            return DifferenceOperator.shift_power(self.algebra, 0) if p == 0 else self.L_power(p - 1) * self.L
        return self._cached(("Lpow", p), build)

    # the N-th root ----------------------------------------------------------------
    def _extend_root_N(self, depth: int):
        alg, N = self.algebra, self.N
        ginv = geometric_inverse_series(N, 1, self.K)
        while len(self._a) <= depth:
            j = -len(self._a)
            p = j + N - 1
            partial = {1: alg.one()}
            partial.update({-i: c for i, c in enumerate(self._a)})
            rhs = alg.u(p) - _power_coefficient(partial, N, p, alg.zero())
            self._a.append(apply_symbol(ginv, rhs))

    def root_N_coefficient(self, k: int) -> AlgebraElement:
        """``a_k`` (``k <= 0``) of ``L**(1/N) = Lambda + sum a_k Lambda**k``."""
        if k == 1:
            return self.algebra.one()
        if k > 1:
            return self.algebra.zero()
        with self._lock:
            self._extend_root_N(-k)
            return self._a[-k]

    def root_N(self, depth: int) -> DifferenceOperator:
        """``L**(1/N)`` exact on the Lambda-orders ``>= -depth``."""
        with self._lock:
            self._extend_root_N(depth)
            coeffs = {-i: self._a[i] for i in range(depth + 1)}
        coeffs[1] = self.algebra.one()
        return DifferenceOperator(self.algebra, coeffs, lo=-depth)

    # gauge ratios -------------------------------------------------------------------
    def _gauge_tail(self, k: int) -> AlgebraElement:
        """``(Lambda**k - 1)(1 - Lambda**-M)**-1 logu`` without its ``(k/M) logu`` part."""
        s = (ShiftSymbol.shift(k) - 1) / (1 - ShiftSymbol.shift(-self.M))
        series = expand_symbol(s, self.K)
        return apply_symbol(SymbolSeries((Fraction(0),) + series.coeffs[1:]), self.algebra.logu())

    def gauge_ratio(self, k: int) -> AlgebraElement:
        """``Lambda**k q0 / q0`` for the leading dressing coefficient ``q0``."""
        def build():
            if k == 0:
                return self.algebra.one()
            return self.algebra.v_power(k) * exp_series(self._gauge_tail(k))
        return self._cached(("gauge", k), build)

    def gauge_ratio_inverse(self, k: int) -> AlgebraElement:
        def build():
            if k == 0:
                return self.algebra.one()
            return self.algebra.v_power(-k) * exp_series(-self._gauge_tail(k))
        return self._cached(("gauge_inv", k), build)

    # the M-th root ------------------------------------------------------------------
    def _gauged_u(self, k: int) -> AlgebraElement:
        if k == -self.M:
            return self.algebra.one()
        return self.algebra.u(k) * self.gauge_ratio(k)

    def _extend_root_M(self, height: int):
        alg, M = self.algebra, self.M
        ginv = geometric_inverse_series(M, -1, self.K)
        while len(self._bt) <= height:
            j = len(self._bt)
            p = j - M + 1
            partial = {-1: alg.one()}
            partial.update({i: c for i, c in enumerate(self._bt)})
            rhs = self._gauged_u(p) - _power_coefficient(partial, M, p, alg.zero())
            self._bt.append(apply_symbol(ginv, rhs))

    def root_M_gauged_coefficient(self, k: int) -> AlgebraElement:
        if k == -1:
            return self.algebra.one()
        if k < -1:
            return self.algebra.zero()
        with self._lock:
            self._extend_root_M(k)
            return self._bt[k]

    def root_M_coefficient(self, k: int) -> AlgebraElement:
        """``b_k`` (``k >= -1``) of ``L**(1/M) = sum b_k Lambda**k``."""
        def build():
            return self.root_M_gauged_coefficient(k) * self.gauge_ratio_inverse(k)
        if k < -1:
            return self.algebra.zero()
        return self._cached(("b", k), build)

    def root_M_gauged(self, height: int) -> DifferenceOperator:
        coeffs = {k: self.root_M_gauged_coefficient(k) for k in range(-1, height + 1)}
        return DifferenceOperator(self.algebra, coeffs, hi=height)

    def root_M(self, height: int) -> DifferenceOperator:
        """``L**(1/M)`` exact on the Lambda-orders ``<= height``."""
        coeffs = {k: self.root_M_coefficient(k) for k in range(-1, height + 1)}
        return DifferenceOperator(self.algebra, coeffs, hi=height)

    def root_N_power(self, n: int, lo: int) -> DifferenceOperator:
        """``L**(n/N)`` exact on orders ``>= lo``."""
        depth = max(0, n - 1 - lo)
        def build():
            R = self.root_N(depth)
            out = DifferenceOperator.shift_power(self.algebra, 0)
            for _ in range(n):
                out = out * R
            return out
        return self._cached(("Rpow", n, depth), build)

    def root_M_power(self, n: int, hi: int) -> DifferenceOperator:
        """``L**(n/M)`` exact on orders ``<= hi``."""
        height = max(0, hi + n - 1)
        def build():
            S = self.root_M(height)
            out = DifferenceOperator.shift_power(self.algebra, 0)
            for _ in range(n):
                out = out * S
            return out
        return self._cached(("Spow", n, height), build)

    # logarithm --------------------------------------------------------------------
    def _extend_w_neg(self, m_max: int):
        alg, N = self.algebra, self.N
        half = Fraction(1, 2)
        while len(self._w_neg) < m_max:
            m = len(self._w_neg) + 1
            partial = {1: alg.one()}
            partial.update({-i: self.root_N_coefficient(-i) for i in range(m)})
            acc = {0: alg.one()}
            for i in range(1, m + 1):
                acc = _mul_dicts(acc, partial, -(m - i), None)
            terms = [("d", None, acc.get(0, alg.zero()).scale(half))]
            for l in range(1, m):
                pl = acc.get(l)
                if pl is not None:
                    terms.append(("s", -l, pl * self._w_neg[l - 1].shift(l)))
            self._w_neg.append(solve_difference(terms, m, alg))

    def _extend_w_pos(self, m_max: int):
        alg = self.algebra
        half = Fraction(1, 2)
        while len(self._w_pos) < m_max:
            m = len(self._w_pos) + 1
            partial = {-1: alg.one()}
            partial.update({i: self.root_M_gauged_coefficient(i) for i in range(m)})
            acc = {0: alg.one()}
            for i in range(1, m + 1):
                acc = _mul_dicts(acc, partial, None, m - i)
            terms = [("d", None, -acc.get(0, alg.zero()).scale(half))]
            for k in range(1, m):
                pk = acc.get(-k)
                if pk is not None:
                    terms.append(("s", -k, -(self._w_pos[k - 1] * pk.shift(k))))
            self._w_pos.append(solve_difference(terms, -m, alg))

    def log_coefficient(self, k: int) -> AlgebraElement:
        """``w_k`` in ``log L = sum_k w_k Lambda**k``."""
        if k < 0:
            with self._lock:
                self._extend_w_neg(-k)
                return self._w_neg[-k - 1]
        if k == 0:
            def build0():
                s = ShiftSymbol.z() / (1 - ShiftSymbol.shift(-self.M))
                return apply_symbol(expand_symbol(s, self.K), self.algebra.logu()).scale(Fraction(1, 2))
            return self._cached(("w", 0), build0)

        def build():
            with self._lock:
                self._extend_w_pos(k)
                wt = self._w_pos[k - 1]
            return wt * self.gauge_ratio_inverse(k)
        return self._cached(("w", k), build)

    def log_coefficients(self, lo: int, hi: int) -> Dict[int, AlgebraElement]:
        return {k: self.log_coefficient(k) for k in range(lo, hi + 1)}

    def W_minus(self, depth: int) -> DifferenceOperator:
        """``sum_{k<0} w_k Lambda**k`` exact down to ``-depth``."""
        return DifferenceOperator(self.algebra, {k: self.log_coefficient(k) for k in range(-depth, 0)}, lo=-depth)

    def W_nonneg(self, height: int) -> DifferenceOperator:
        """``sum_{k>=0} w_k Lambda**k`` exact up to ``height``."""
        return DifferenceOperator(self.algebra, {k: self.log_coefficient(k) for k in range(0, height + 1)}, hi=height)

    def W_positive(self, height: int) -> DifferenceOperator:
        return DifferenceOperator(self.algebra, {k: self.log_coefficient(k) for k in range(1, height + 1)}, hi=height)

    def log_L(self, lo: int, hi: int) -> DifferenceOperator:
        return DifferenceOperator(self.algebra, self.log_coefficients(lo, hi), lo=lo, hi=hi)

    def log_plus(self, depth: int) -> DiffDiffOperator:
        """``N eps d + 2N W_-``."""
        alg = self.algebra
        return DiffDiffOperator(alg, {1: DifferenceOperator.shift_power(alg, 0).scale(self.N),
                                      0: self.W_minus(depth).scale(2 * self.N)})

    def log_minus(self, height: int) -> DiffDiffOperator:
        """``-M eps d + 2M (w_0 + W_{>0})``."""
        alg = self.algebra
        return DiffDiffOperator(alg, {1: DifferenceOperator.shift_power(alg, 0).scale(-self.M),
                                      0: self.W_nonneg(height).scale(2 * self.M)})

    # BCH operators ----------------------------------------------------------------
    def bch_W(self, side: str, order: int) -> DifferenceOperator:
        """The operator whose exponential turns ``Lambda**N`` (side ``'-'``) or ``v**M Lambda**-M`` (side ``'>0'``) into L."""
        alg = self.algebra
        if side == "-":
            X = self.L * DifferenceOperator.shift_power(alg, -self.N) - 1
            window = {"lo": -order}
        elif side == ">0":
            X = self.L * DifferenceOperator.shift_power(alg, self.M) * DifferenceOperator.multiplication(alg.v_power(-self.M)) - 1
            window = {"hi": order}
        else:
            raise ValueError(f"unknown side {side!r}")
        out = DifferenceOperator.zero(alg)
        Xk = DifferenceOperator.shift_power(alg, 0)
        for k in range(1, order + 1):
            Xk = Xk * X
            sign = 1 if k % 2 else -1
            out = out + Xk.scale(Fraction(sign, k))
        return out.narrow(window.get("lo"), window.get("hi"))

    # flow generators --------------------------------------------------------------
    def gamma(self, idx) -> Fraction:
        idx = self.index(idx)
        a, p = idx.alpha, idx.p
        if a >= 0:
            return gamma_ratio(2 - Fraction(a, self.N), p)
        if a > -self.M:
            return gamma_ratio(2 + Fraction(a, self.M), p)
        return Fraction(2, factorial(p))

    def kappa(self, p: int) -> Fraction:
        return self.sigma * harmonic(p) / 2

    def B_operator(self, idx, lo: Optional[int] = None, hi: Optional[int] = None) -> DifferenceOperator:
        """``B_{alpha,p}`` exact at least on ``[lo, hi]`` (defaults cover both flow halves)."""
        idx = self.index(idx)
        N, M = self.N, self.M
        lo = -N - M if lo is None else lo
        hi = N + M - 1 if hi is None else hi
        a, p = idx.alpha, idx.p
        g = self.gamma(idx)
        if a >= 0:
            out = self.root_N_power((p + 1) * N - a, lo).scale(g)
        elif a > -M:
            out = self.root_M_power((p + 1) * M + a, hi).scale(g)
        else:
            logL = self.log_L(min(lo - p * N, -1), max(hi + p * M, 1))
            Lp = self.L_power(p)
            out = (Lp * logL - Lp.scale(self.kappa(p))).scale(g)
        return out

    def A_operator(self, idx, hi: Optional[int] = None) -> DifferenceOperator:
        """The flow generator ``A_{alpha,q}``; for ``alpha=-M`` it is semi-infinite and exact up to ``hi``."""
        idx = self.index(idx)
        if idx.alpha >= 0:
            return self.B_operator(idx, lo=0, hi=0).project("+")
        if idx.alpha > -self.M:
            return -self.B_operator(idx, lo=-1, hi=-1).project("-")
        hi = self.N + self.M - 1 if hi is None else hi
        return self.B_operator(idx, lo=0, hi=hi).project("+")

    def A_tilde_minusM(self, q: int) -> DiffDiffOperator:
        """The finite differential-difference generator of the ``(-M, q)`` flow."""
        def build():
            alg = self.algebra
            N, M = self.N, self.M
            c = Fraction(1, factorial(q))
            shiftc = self.sigma * harmonic(q) / 4
            Lq = self.L_power(q)
            plus = (Lq * self.W_minus(max(q * N, 1)) - Lq.scale(shiftc)).project("+")
            minus = (Lq * self.W_nonneg(max(q * M - 1, 0)) - Lq.scale(shiftc)).project("-")
            diff = (plus - minus).scale(2 * c)
            return DiffDiffOperator(alg, {1: Lq.scale(c), 0: diff})
        return self._cached(("Atilde", q), build)

    def flow_generator(self, idx) -> DiffDiffOperator:
        """The finite generator used in zero-curvature checks (``A`` or ``A~``)."""
        idx = self.index(idx)
        if idx.alpha == -self.M:
            return self.A_tilde_minusM(idx.p)
        return DiffDiffOperator.from_difference(self.A_operator(idx))

    # vector fields --------------------------------------------------------------
    def eps_velocity(self, idx) -> Dict[int, AlgebraElement]:
        """``eps du_k/dt`` for ``-M <= k <= N-1`` from both halves of ``B``."""
        idx = self.index(idx)

        def build():
            N, M = self.N, self.M
            B = self.B_operator(idx)
            plus = B.project("+").commutator(self.L)
            minus = (-B.project("-")).commutator(self.L)
            out = {}
            for k in range(-M, N):
                c1, c2 = plus.coefficient(k), minus.coefficient(k)
                if c1 != c2:
                    raise InconsistentFlow(f"flow {idx}: halves disagree at Lambda^{k}")
                out[k] = c1
            return out
        return self._cached(("vel", idx), build)

    def _images(self, idx):
        alg, M = self.algebra, self.M
        vel = self.eps_velocity(idx)
        um = vel[-M]
        vdot = (alg.v_power(1 - M) * um).scale(Fraction(1, M))
        logdot = alg.v_power(-M) * um
        cache = {}

        def image(key):
            if key == "v":
                return vdot
            if key == "logu":
                return logdot
            if key in cache:
                return cache[key]
            kind, index, order = key
            if kind == KIND_U:
                val = vel[index].d_dx(order)
            elif kind == KIND_V:
                val = vdot.d_dx(order)
            else:
                val = alg.zero()
            cache[key] = val
            return val
        return image

    def eps_time_derivative(self, a: AlgebraElement, idx) -> AlgebraElement:
        """``eps da/dt^{alpha,p}`` through the chain rule on jet variables; no eps-order is lost."""
        if a.algebra != self.algebra:
            raise AlgebraError(f"element lives in {a.algebra}, hierarchy in {self.algebra}")
        return a.derive(self._images(self.index(idx)))

    def eps_time_derivative_operator(self, op, idx):
        return op.map(lambda c: self.eps_time_derivative(c, idx))

    def time_derivative(self, a: AlgebraElement, idx) -> AlgebraElement:
        """``da/dt^{alpha,p}``, exact to ``eps**K`` (computed one order higher and divided by eps)."""
        up = self.lifted()
        return up.eps_time_derivative(a.truncate(self.K + 1), idx).divide_eps(1).truncate(self.K)

    def zero_curvature_residual(self, idx1, idx2) -> DiffDiffOperator:
        i1, i2 = self.index(idx1), self.index(idx2)
        A1, A2 = self.flow_generator(i1), self.flow_generator(i2)
        return (
            self.eps_time_derivative_operator(A1, i2)
            - self.eps_time_derivative_operator(A2, i1)
            + A1.commutator(A2)
        )

    def check_zakharov_shabat(self, idx1, idx2):
        from .reports import operator_report
        i1, i2 = self.index(idx1), self.index(idx2)
        res = self.zero_curvature_residual(i1, i2)
        return operator_report("zero-curvature", [i1, i2], res, self.K)

    # densities ----------------------------------------------------------------------
    def density(self, idx) -> AlgebraElement:
        """``h_{alpha,q} = res B_{alpha,q+1}``."""
        idx = self.index(idx)
        return self._cached(("h", idx), lambda: self.B_operator(FlowIndex(idx.alpha, idx.p + 1), lo=0, hi=0).residue())

    def density_direct(self, idx) -> AlgebraElement:
        """The same density from the powers of L with the shifted normalisation."""
        idx = self.index(idx)
        a, q = idx.alpha, idx.p
        N, M = self.N, self.M
        if a >= 0:
            x = 2 - Fraction(a, N)
            return self.root_N_power((q + 2) * N - a, 0).residue().scale(gamma_ratio(x, q + 1))
        if a > -M:
            x = 2 + Fraction(a, M)
            return self.root_M_power((q + 2) * M + a, 0).residue().scale(gamma_ratio(x, q + 1))
        Lq = self.L_power(q + 1)
        logL = self.log_L(-(q + 1) * N - 1, (q + 1) * M + 1)
        op = Lq * logL - Lq.scale(self.sigma * harmonic(q + 1) / 2)
        return op.residue().scale(Fraction(2, factorial(q + 1)))


@lru_cache(maxsize=None)
def hierarchy(N: int, M: int, K: int) -> LaxHierarchy:
    """Shared hierarchy instance per ``(N, M, K)``."""
    return LaxHierarchy(N, M, K)


__all__ = [
    "FlowIndex",
    "InconsistentFlow",
    "LaxHierarchy",
    "as_index",
    "gamma_ratio",
    "harmonic",
    "hierarchy",
]
