"""Time derivatives of Hamiltonian densities, the Omega matrix and tau-symmetry."""
from __future__ import annotations

from fractions import Fraction
from itertools import permutations
from math import factorial

from .algebra import AlgebraElement
from .lax import FlowIndex, LaxHierarchy
from .reports import CheckReport, element_report
from .symbols import ShiftSymbol, apply_symbol, expand_symbol, invert_discrete_derivative


class TauStructure:
    """Omega entries ``(Lambda-1) Omega_{a,p;b,q} = eps dh_{a,p-1}/dt^{b,q}`` for one hierarchy."""

    def __init__(self, hier: LaxHierarchy):
        self.hier = hier
        self.N, self.M, self.K = hier.N, hier.M, hier.K
        self.algebra = hier.algebra

    def _ext(self, idx: FlowIndex) -> int:
        return (idx.p + 1) * (self.N + self.M) + 1

    def expected_degree(self, a, b) -> Fraction:
        a, b = self.hier.index(a), self.hier.index(b)
        return a.p + b.p + 2 + a.mu(self.N, self.M) + b.mu(self.N, self.M)

    def shifted_density(self, idx) -> AlgebraElement:
        """``h_{alpha,p-1} = res B_{alpha,p}`` (defined for ``p = 0`` as well)."""
        idx = self.hier.index(idx)
        return self.hier._cached(("h-1", idx), lambda: self.hier.B_operator(idx, lo=0, hi=0).residue())

    def eps_h_time_derivative(self, a, b) -> AlgebraElement:
        """``eps d h_{alpha,p-1} / d t^{beta,q}`` from the residue formulas (no eps-order lost)."""
        a, b = self.hier.index(a), self.hier.index(b)
        return self.hier._cached(("hdot", a, b), lambda: self._residue_formula(a, b))

    def _residue_formula(self, a: FlowIndex, b: FlowIndex) -> AlgebraElement:
        h = self.hier
        N, M = self.N, self.M
        ea, eb = self._ext(a), self._ext(b)
        Bb = h.B_operator(b, lo=-ea, hi=ea)
        if a.alpha >= 0:
            Ba = h.B_operator(a, lo=-eb, hi=eb)
            return (-Bb.project("-")).commutator(Ba).residue()
        if a.alpha > -M:
            Ba = h.B_operator(a, lo=-eb, hi=eb)
            return Bb.project("+").commutator(Ba).residue()
        p = a.p
        Lp = h.L_power(p)
        half_kappa = h.kappa(p) / 2
        low = Lp * h.W_minus(eb + p * N) - Lp.scale(half_kappa)
        high = Lp * h.W_nonneg(eb + p * M) - Lp.scale(half_kappa)
        total = (Lp * Bb.d_dx()).scale(Fraction(1, 2)).map(lambda c: c * self.algebra.eps())
        total = total + (-Bb.project("-")).commutator(low) + Bb.project("+").commutator(high)
        return total.residue().scale(Fraction(2, factorial(p)))

    def chain_rule_h_time_derivative(self, a, b) -> AlgebraElement:
        """The same derivative by differentiating the density along the flow."""
        a, b = self.hier.index(a), self.hier.index(b)
        return self.hier.eps_time_derivative(self.shifted_density(a), b)

    def h_time_derivative(self, a, b) -> AlgebraElement:
        """``d h_{alpha,p-1} / d t^{beta,q}`` exact to ``eps**K``."""
        up = TauStructure(self.hier.lifted())
        return up.eps_h_time_derivative(a, b).divide_eps(1).truncate(self.K)

    def omega(self, a, b) -> AlgebraElement:
        a, b = self.hier.index(a), self.hier.index(b)
        return self.hier._cached(("omega", a, b), lambda: self._omega(a, b))

    def _omega(self, a: FlowIndex, b: FlowIndex) -> AlgebraElement:
        M = self.M
        if a == b == FlowIndex(-M, 0):
            z = ShiftSymbol.z()
            sym = z * z / ((ShiftSymbol.shift(1) - 1) * (1 - ShiftSymbol.shift(-M)))
            return apply_symbol(expand_symbol(sym, self.K), self.algebra.logu())
        up = TauStructure(self.hier.lifted())
        return invert_discrete_derivative(up.eps_h_time_derivative(a, b), 1).truncate(self.K)

    # checks -------------------------------------------------------------------------
    def check_tau_symmetry(self, a, b) -> CheckReport:
        a, b = self.hier.index(a), self.hier.index(b)
        res = self.eps_h_time_derivative(a, b) - self.eps_h_time_derivative(b, a)
        return element_report("tau-symmetry", [a, b], res, self.K)

    def check_cross_oracle(self, a, b) -> CheckReport:
        a, b = self.hier.index(a), self.hier.index(b)
        res = self.eps_h_time_derivative(a, b) - self.chain_rule_h_time_derivative(a, b)
        return element_report("density-derivative-two-paths", [a, b], res, self.K)

    def check_omega_definition(self, a, b) -> CheckReport:
        a, b = self.hier.index(a), self.hier.index(b)
        om = self.omega(a, b)
        res = om.shift(1) - om - self.eps_h_time_derivative(a, b)
        return element_report("omega-definition", [a, b], res, self.K)

    def check_omega_symmetry(self, a, b) -> CheckReport:
        a, b = self.hier.index(a), self.hier.index(b)
        return element_report("omega-symmetry", [a, b], self.omega(a, b) - self.omega(b, a), self.K)

    def check_omega_degree(self, a, b) -> CheckReport:
        a, b = self.hier.index(a), self.hier.index(b)
        om = self.omega(a, b)
        ok = om.is_homogeneous(self.expected_degree(a, b), 0)
        return CheckReport("omega-degree", [a, b], ok, self.K,
                           None if ok else f"not homogeneous of degree {self.expected_degree(a, b)}")

    def check_tau_closedness(self, a, b, c) -> CheckReport:
        """``eps d Omega_{a;b} / dt^c`` is symmetric under every permutation of the three pairs."""
        idx = [self.hier.index(x) for x in (a, b, c)]
        vals = {}
        for x, y, z in permutations(idx):
            key = (x, y, z)
            vals[key] = self.hier.eps_time_derivative(self.omega(x, y), z)
        ref = vals[tuple(idx)]
        for key, val in vals.items():
            if val != ref:
                return element_report("omega-closedness", idx, val - ref, self.K, permutation=[str(k) for k in key])
        return CheckReport("omega-closedness", idx, True, self.K)

    def check_density_from_omega(self, idx) -> CheckReport:
        """``h_{a,p} = ((e^z - 1)/z) Omega_{a,p+1;-M,0}``."""
        idx = self.hier.index(idx)
        z = ShiftSymbol.z()
        series = expand_symbol((ShiftSymbol.shift(1) - 1) / z, self.K)
        om = self.omega(FlowIndex(idx.alpha, idx.p + 1), FlowIndex(-self.M, 0))
        res = apply_symbol(series, om) - self.hier.density(idx)
        return element_report("density-from-omega", [idx], res, self.K)


__all__ = ["TauStructure"]
