"""The two Hamiltonian operators, their matrices, Hamiltonians and the recursion."""
from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Dict, List, Optional

from .algebra import AlgebraElement, is_total_derivative
from .lax import FlowIndex, LaxHierarchy
from .operators import DifferenceOperator, residue_of_commutator_terms
from .reports import CheckReport, element_report, operator_report
from .symbols import ShiftSymbol, SymbolSeries, apply_symbol, expand_symbol


@lru_cache(maxsize=None)
def _nonlocal_series(N: int, a: int, K: int) -> SymbolSeries:
    """``(Lambda**N + 1)(Lambda**a - 1)/(Lambda**N - 1)``; regular at z = 0."""
    lam_n = ShiftSymbol.shift(N)
    return expand_symbol((lam_n + 1) * (ShiftSymbol.shift(a) - 1) / (lam_n - 1), K)


def one_form_window(N: int, M: int):
    return -N + 1, M


def P1_apply(X: DifferenceOperator, L: DifferenceOperator) -> DifferenceOperator:
    """``[X_+, L]_{<=0} - [X_-, L]_{>0}`` for a finite one-form representative ``X``."""
    return X.project("+").commutator(L).project("<=0") - X.project("-").commutator(L).project(">0")


def P2_apply(X: DifferenceOperator, L: DifferenceOperator) -> DifferenceOperator:
    """The second Hamiltonian operator, including the nonlocal Dirac correction."""
    alg = L.algebra
    N = max(L.coeffs)
    half = Fraction(1, 2)
    LX = L * X
    XL = X * L
    c = L.commutator(X).project("<=0")
    out = L.commutator((LX + XL).project("-")) - (L * c) - (c * L)
    f = alg.zero()
    for _, a, term in residue_of_commutator_terms(L, X):
        f = f + apply_symbol(_nonlocal_series(N, a, alg.K), term)
    out = out + L.commutator(DifferenceOperator.multiplication(f))
    return out.scale(half)


def P_apply(which: int, X: DifferenceOperator, L: DifferenceOperator) -> DifferenceOperator:
    if which == 1:
        return P1_apply(X, L)
    if which == 2:
        return P2_apply(X, L)
    raise ValueError("which must be 1 or 2")


def tangent_part(op: DifferenceOperator, N: int, M: int) -> Dict[int, AlgebraElement]:
    return {k: op.coefficient(k) for k in range(-M, N)}


class HamiltonianStructure:
    """Hamiltonians, differentials and the bi-Hamiltonian identities of one hierarchy."""

    def __init__(self, hier: LaxHierarchy):
        self.hier = hier
        self.N, self.M, self.K = hier.N, hier.M, hier.K
        self.algebra = hier.algebra

    @property
    def L(self) -> DifferenceOperator:
        return self.hier.L

    # Hamiltonians ---------------------------------------------------------------
    def density(self, idx) -> AlgebraElement:
        return self.hier.density(idx)

    def density_degree(self, idx) -> Fraction:
        idx = self.hier.index(idx)
        return idx.p + 2 + idx.mu(self.N, self.M)

    def dH(self, idx) -> DifferenceOperator:
        """Canonical representative of ``dH_{alpha,p}``: ``B_{alpha,p}`` on ``[-N+1, M]``."""
        lo, hi = one_form_window(self.N, self.M)
        return self.hier._cached(("dH", self.hier.index(idx)),
                                 lambda: self.hier.B_operator(idx, lo=lo, hi=hi).restrict(lo, hi))

    def P(self, which: int, X: DifferenceOperator) -> DifferenceOperator:
        return P_apply(which, X, self.L)

    def hamiltonian_vector_field(self, which: int, idx) -> Dict[int, AlgebraElement]:
        return tangent_part(self.P(which, self.dH(idx)), self.N, self.M)

    # matrices -------------------------------------------------------------------
    def bracket_entry(self, which: int, n: int, m: int) -> AlgebraElement:
        """``(P_which)^{nm} f``: the Lambda**n coefficient of ``P(Lambda**-m o f)``."""
        alg = self.algebra
        X = DifferenceOperator(alg, {-m: alg.test_function().shift(-m)})
        return self.P(which, X).coefficient(n)

    def bracket_matrix(self, which: int) -> List[List[AlgebraElement]]:
        rng = range(-self.M, self.N)
        return [[self.bracket_entry(which, n, m) for m in rng] for n in rng]

    def explicit_bracket_entry(self, which: int, n: int, m: int) -> AlgebraElement:
        """The same entry from the closed-form component brackets."""
        alg = self.algebra
        N, M, K = self.N, self.M, self.K
        f = alg.test_function()
        u = alg.u
        if which == 1:
            c = 1 if (n > 0 and m > 0) else (-1 if (n <= 0 and m <= 0) else 0)
            return (u(n + m) * f.shift(n) - (u(n + m) * f).shift(-m)).scale(c)
        out = alg.zero()
        for l in range(-M, m):
            out = out + u(n + m - l) * (u(l) * f).shift(n - l)
            out = out - u(l) * (u(n + m - l) * f).shift(l - m)
        lam_n = ShiftSymbol.shift(N)
        sym = (ShiftSymbol.shift(n) - lam_n) * (ShiftSymbol.shift(-m) - 1) / (1 - lam_n)
        return out + u(n) * apply_symbol(expand_symbol(sym, K), u(m) * f)

    # identities -------------------------------------------------------------------
    def check_lax_flow(self, idx) -> CheckReport:
        """``P_1(dH)`` reproduces the Lax vector field."""
        idx = self.hier.index(idx)
        vf = self.hamiltonian_vector_field(1, idx)
        vel = self.hier.eps_velocity(idx)
        res = DifferenceOperator(self.algebra, {k: vf[k] - vel[k] for k in vf})
        return operator_report("hamiltonian-flow", [idx], res, self.K)

    def recursion_coefficient(self, idx) -> Fraction:
        idx = self.hier.index(idx)
        return idx.p + 2 + idx.mu(self.N, self.M)

    def check_recursion_operator(self, idx) -> CheckReport:
        """``L B_{a,p} = (p+2+mu) B_{a,p+1} + R B_{0,p}`` on a window around zero."""
        idx = self.hier.index(idx)
        h = self.hier
        lo, hi = -self.N - self.M, self.N + self.M
        left = self.L * h.B_operator(idx, lo=lo - self.N, hi=hi + self.M)
        right = h.B_operator(FlowIndex(idx.alpha, idx.p + 1), lo=lo, hi=hi).scale(self.recursion_coefficient(idx))
        if idx.alpha == -self.M:
            right = right + h.B_operator(FlowIndex(0, idx.p), lo=lo, hi=hi).scale(h.sigma)
        res = (left - right).narrow(lo, hi)
        return operator_report("operator-recursion", [idx], res, self.K)

    def check_recursion(self, idx) -> CheckReport:
        """``P_2 dH_{a,p} = (p+2+mu) P_1 dH_{a,p+1} + R P_1 dH_{0,p}`` on the tangent window."""
        idx = self.hier.index(idx)
        left = self.hamiltonian_vector_field(2, idx)
        nxt = self.hamiltonian_vector_field(1, FlowIndex(idx.alpha, idx.p + 1))
        c = self.recursion_coefficient(idx)
        res = {k: left[k] - nxt[k].scale(c) for k in left}
        if idx.alpha == -self.M:
            extra = self.hamiltonian_vector_field(1, FlowIndex(0, idx.p))
            res = {k: res[k] - extra[k].scale(self.hier.sigma) for k in res}
        return operator_report("bihamiltonian-recursion", [idx], DifferenceOperator(self.algebra, res), self.K)

    def bracket_density(self, which: int, X: DifferenceOperator, Y: DifferenceOperator) -> AlgebraElement:
        """``res(X P_which(Y))``; its integral is the bracket of the two functionals."""
        return (X * self.P(which, Y)).residue()

    def check_involution(self, idx1, idx2, which: int) -> CheckReport:
        i1, i2 = self.hier.index(idx1), self.hier.index(idx2)
        dens = self.bracket_density(which, self.dH(i1), self.dH(i2))
        ok = is_total_derivative(dens)
        return CheckReport(f"involution-{which}", [i1, i2], ok, self.K,
                           None if ok else "density is not a total x-derivative")

    def check_density_formulas(self, idx) -> CheckReport:
        idx = self.hier.index(idx)
        res = self.hier.density(idx) - self.hier.density_direct(idx)
        return element_report("density-formulas", [idx], res, self.K)


__all__ = [
    "HamiltonianStructure",
    "P1_apply",
    "P2_apply",
    "P_apply",
    "one_form_window",
    "tangent_part",
]
