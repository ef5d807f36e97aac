"""Dispersionless brackets, their generating functions and the flat pencil of metrics.

All bracket formulas are written against a ``u(k)`` accessor, so the same code
produces exact rationals, complex numbers, sympy polynomials or algebra
elements depending on what the accessor returns.  The first bracket carries
the ``(-1)**N`` renormalization used for the Frobenius identification.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence

import numpy as np
import sympy

from .algebra import DiffAlgebra
from .reports import CheckReport
from .roots import aberth, sorted_roots
from .symbols import ShiftSymbol, expand_symbol


class SingularSample(ValueError):
    """Spectral parameters too close to the removable singularity p = q."""


class DegenerateCritical(ArithmeticError):
    """Critical points too close together, or a critical value too close to zero."""


def c_nm(n: int, m: int) -> int:
    if n > 0 and m > 0:
        return 1
    if n <= 0 and m <= 0:
        return -1
    return 0


def nonlocal_coefficients(N: int, n: int, m: int, kmax: int) -> List[Fraction]:
    """``c_1 .. c_kmax`` of ``(e^{n t} - e^{N t})(e^{-m t} - 1)/(1 - e^{N t})``."""
    lam_n = ShiftSymbol.shift(N)
    sym = (ShiftSymbol.shift(n) - lam_n) * (ShiftSymbol.shift(-m) - 1) / (1 - lam_n)
    return list(expand_symbol(sym, kmax).coeffs[1:])


# ---------------------------------------------------------------------------
# Lax function


class LambdaFunction:
    """``lambda(z) = z**N + sum_{k=-M}^{N-1} u_k z**k`` with coefficients of any ring type."""

    def __init__(self, N: int, M: int, coeffs: Dict[int, object]):
        if N < 1 or M < 1:
            raise ValueError("N and M must be positive")
        missing = set(range(-M, N)) - set(coeffs)
        if missing:
            raise ValueError(f"missing coefficients {sorted(missing)}")
        self.N, self.M = N, M
        self.coeffs = {k: coeffs[k] for k in range(-M, N)}

    @classmethod
    def symbolic(cls, N: int, M: int) -> "LambdaFunction":
        return cls(N, M, {k: sympy.Symbol(f"u_{k}") for k in range(-M, N)})

    @classmethod
    def random(cls, N: int, M: int, rng: np.random.Generator, low: float = 0.5,
               high: float = 2.0, complex_values: bool = False) -> "LambdaFunction":
        vals = rng.uniform(low, high, size=N + M)
        if complex_values:
            vals = vals * np.exp(1j * rng.uniform(0, 2 * np.pi, size=N + M))
        return cls(N, M, {k: complex(vals[k + M]) if complex_values else float(vals[k + M])
                          for k in range(-M, N)})

    @property
    def mode(self) -> str:
        vals = self.coeffs.values()
        if all(isinstance(x, (int, Fraction)) for x in vals):
            return "exact"
        if all(isinstance(x, (int, float, complex, np.number)) for x in vals):
            return "numeric"
        return "symbolic"

    def u(self, k: int):
        if k == self.N:
            return 1
        if k < -self.M or k > self.N:
            return 0
        return self.coeffs[k]

    def symbols(self) -> List[object]:
        return [self.coeffs[k] for k in range(-self.M, self.N)]

    def derivative(self, z, order: int = 0):
        """``d**order lambda / dz**order`` at ``z``."""
        total = 0
        for k in range(-self.M, self.N + 1):
            c = self.u(k)
            fall = math.prod(range(k - order + 1, k + 1)) if order else 1
            if fall:
                total = total + c * fall * z ** (k - order)
        return total

    def __call__(self, z):
        return self.derivative(z, 0)

    def critical_polynomial(self) -> np.ndarray:
        """Coefficients (highest first) of ``z**(M+1) lambda'(z)``, a polynomial of degree N+M."""
        N, M = self.N, self.M
        out = np.zeros(N + M + 1, dtype=complex)
        for k in range(-M, N + 1):
            out[N - k] = k * complex(self.u(k))
        return out

    def critical_points(self, separation: float = 1e-6,
                        rng: Optional[np.random.Generator] = None) -> np.ndarray:
        if self.mode == "symbolic":
            raise TypeError("critical points need numeric coefficients")
        if abs(complex(self.u(-self.M))) == 0:
            raise DegenerateCritical("u_{-M} vanishes")
        z = sorted_roots(aberth(self.critical_polynomial(), rng=rng))
        scale = max(1.0, float(np.max(np.abs(z))))
        gaps = np.abs(z[:, None] - z[None, :])
        np.fill_diagonal(gaps, np.inf)
        if np.min(gaps) < separation * scale:
            raise DegenerateCritical(f"critical points closer than {separation:g}")
        return z


# ---------------------------------------------------------------------------
# brackets of hydrodynamic type


UAccessor = Callable[[int], object]


def _accessor(N: int, M: int, values: Callable[[int], object]) -> UAccessor:
    def u(k: int):
        if k == N:
            return 1
        if k < -M or k > N:
            return 0
        return values(k)
    return u


def metric_entry(which: int, N: int, M: int, u: UAccessor, n: int, m: int):
    """``g^{nm}``: the coefficient of delta' in the dispersionless bracket."""
    if which == 1:
        return (-1) ** N * c_nm(n, m) * (n + m) * u(n + m)
    if which != 2:
        raise ValueError("which must be 1 or 2")
    total = Fraction(m * (n - N), N) * u(n) * u(m)
    for l in range(-M, m):
        total = total + (n + m - 2 * l) * u(l) * u(n + m - l)
    return total


def christoffel_entry(which: int, N: int, M: int, u: UAccessor, n: int, m: int) -> Dict[int, object]:
    """``Gamma^{nm}_k``: the coefficients of ``u_k' delta`` (k in -M .. N-1)."""
    out: Dict[int, object] = {}

    def add(k, c):
        if -M <= k < N and c != 0:
            out[k] = out.get(k, 0) + c

    if which == 1:
        add(n + m, (-1) ** N * c_nm(n, m) * m)
        return out
    if which != 2:
        raise ValueError("which must be 1 or 2")
    for l in range(-M, m):
        add(l, (n - l) * u(n + m - l))
        add(n + m - l, (m - l) * u(l))
    add(m, Fraction(m * (n - N), N) * u(n))
    return out


@dataclass
class HydroBracket:
    """``{u_n(x), u_m(y)} = g^{nm} delta'(x-y) + Gamma^{nm}_k u_k' delta(x-y)``."""

    which: int
    N: int
    M: int
    g: List[List[object]]
    gamma: Dict[tuple, Dict[int, object]] = field(default_factory=dict)

    @property
    def indices(self) -> range:
        return range(-self.M, self.N)

    def entry(self, n: int, m: int):
        return self.g[n + self.M][m + self.M]

    def is_symmetric(self) -> bool:
        size = self.N + self.M
        return all(_same(self.g[i][j], self.g[j][i]) for i in range(size) for j in range(i))

    def matrix(self) -> np.ndarray:
        return np.array([[complex(x) for x in row] for row in self.g])


def _same(a, b) -> bool:
    d = a - b
    if isinstance(d, sympy.Basic):
        return sympy.expand(d) == 0
    return d == 0


def dispersionless_bracket(which: int, N: int, M: int, u=None) -> HydroBracket:
    """The bracket with entries built from ``u``: a LambdaFunction, a callable or None (symbolic)."""
    if u is None:
        u = LambdaFunction.symbolic(N, M)
    acc = _accessor(N, M, u.u if isinstance(u, LambdaFunction) else u)
    rng = range(-M, N)
    g = [[_tidy(metric_entry(which, N, M, acc, n, m)) for m in rng] for n in rng]
    gamma = {(n, m): {k: _tidy(c) for k, c in christoffel_entry(which, N, M, acc, n, m).items()}
             for n in rng for m in rng}
    return HydroBracket(which, N, M, g, gamma)


def _tidy(x):
    return sympy.expand(x) if isinstance(x, sympy.Basic) else x


def leading_bracket_term(which: int, N: int, M: int, K: int, n: int, m: int):
    """``g f' + sum_k Gamma_k u_k' f`` in the differential algebra, with the
    first bracket's ``(-1)**N`` undone, for comparison with the eps**1 part of
    the dispersive matrix entry acting on the test function ``f``."""
    alg = DiffAlgebra(N, M, K)
    u = alg.u
    f = alg.test_function()
    out = metric_entry(which, N, M, u, n, m) * f.d_dx()
    for k, c in christoffel_entry(which, N, M, u, n, m).items():
        out = out + c * u(k).d_dx() * f
    return out.scale((-1) ** N) if which == 1 else out


def check_against_dispersive(which: int, N: int, M: int) -> CheckReport:
    """Every dispersive matrix entry starts at eps**1 with the hydrodynamic bracket."""
    from .hamiltonian import HamiltonianStructure
    from .lax import hierarchy

    K = 1
    ham = HamiltonianStructure(hierarchy(N, M, K))
    for n in range(-M, N):
        for m in range(-M, N):
            entry = ham.bracket_entry(which, n, m)
            lead = leading_bracket_term(which, N, M, K, n, m)
            if not entry.eps_coefficient(0).is_zero() or entry.eps_coefficient(1) != lead:
                return CheckReport("dispersionless-limit", [which, n, m], False, K,
                                   f"entry ({n},{m})")
    return CheckReport("dispersionless-limit", [which, N, M], True, K)


# ---------------------------------------------------------------------------
# generating functions


def generating_function(which: int, lam: LambdaFunction, p, q):
    """Closed form of ``sum_{n,m} g^{nm} p**n q**m``."""
    N = lam.N
    dp, dq = lam.derivative(p, 1), lam.derivative(q, 1)
    denom = 1 / p - 1 / q
    if which == 1:
        return (-1) ** N * (dq - dp) / denom
    return p * q * dp * dq / N + (lam(p) * dq - lam(q) * dp) / denom


def bracket_sum(bracket: HydroBracket, p, q):
    return sum(bracket.entry(n, m) * p ** n * q ** m for n in bracket.indices for m in bracket.indices)


def generating_function_difference(which: int, lam: LambdaFunction, p, q,
                                   threshold: float = 0.05):
    if abs(complex(p - q)) < threshold:
        raise SingularSample(f"|p - q| = {abs(complex(p - q)):.3g} below {threshold}")
    br = dispersionless_bracket(which, lam.N, lam.M, lam)
    return bracket_sum(br, p, q) - generating_function(which, lam, p, q)


def _child_rngs(seed: int, count: int) -> List[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _spectral_point(rng: np.random.Generator) -> complex:
    return complex(rng.uniform(0.5, 1.5) * np.exp(1j * rng.uniform(0, 2 * np.pi)))


def generating_function_check(which: int, N: int, M: int, samples: int = 100, seed: int = 0,
                              tol: float = 1e-10, threshold: float = 0.05) -> CheckReport:
    residuals = []
    skipped = 0
    for rng in _child_rngs(seed, samples):
        lam = LambdaFunction.random(N, M, rng, complex_values=True)
        while True:
            p, q = _spectral_point(rng), _spectral_point(rng)
            try:
                diff = generating_function_difference(which, lam, p, q, threshold)
                break
            except SingularSample:
                skipped += 1
        residuals.append(abs(diff))
    worst = max(residuals)
    return CheckReport(f"generating-function-{which}", [N, M], worst < tol, None,
                       None if worst < tol else f"|difference| = {worst:.3e}",
                       detail={"samples": samples, "seed": seed, "tol": tol, "worst": worst,
                               "resampled_pairs": skipped, "residuals": residuals})


# ---------------------------------------------------------------------------
# metrics from residues at the critical points


def covariant_metric(lam: LambdaFunction, crit=None) -> np.ndarray:
    """``<d_m, d_k> = (-1)**N sum_i z_i**(m+k-2) / lambda''(z_i)``."""
    z = lam.critical_points() if crit is None else crit
    weights = (-1) ** lam.N / lam.derivative(z, 2)
    return _moment_matrix(lam, z, weights)


def intersection_form(lam: LambdaFunction, crit=None, zero_value: float = 1e-8) -> np.ndarray:
    """``(d_m, d_k) = sum_i z_i**(m+k-2) / (lambda(z_i) lambda''(z_i))``."""
    z = lam.critical_points() if crit is None else crit
    values = lam(z)
    if np.min(np.abs(values)) < zero_value:
        raise DegenerateCritical("a critical value of lambda vanishes")
    weights = 1 / (values * lam.derivative(z, 2))
    return _moment_matrix(lam, z, weights)


def _moment_matrix(lam: LambdaFunction, z: np.ndarray, weights: np.ndarray) -> np.ndarray:
    idx = np.arange(-lam.M, lam.N)
    powers = idx[:, None] + idx[None, :] - 2
    return np.sum(weights[None, None, :] * z[None, None, :] ** powers[:, :, None], axis=2)


def metric_inverse_residual(contravariant: np.ndarray, covariant: np.ndarray) -> float:
    prod = contravariant @ covariant
    return float(np.max(np.abs(prod - np.eye(len(prod)))))


def metric_inverse_sample(lam: LambdaFunction) -> dict:
    z = lam.critical_points()
    out = {}
    for which, cov in ((1, covariant_metric(lam, z)), (2, intersection_form(lam, z))):
        contra = dispersionless_bracket(which, lam.N, lam.M, lam).matrix()
        out[which] = metric_inverse_residual(contra, cov)
        out[f"cond{which}"] = float(np.linalg.cond(cov))
    return out


def check_metric_inverse(N: int, M: int, samples: int = 50, seed: int = 0, tol: float = 1e-8,
                         min_pass_fraction: float = 0.95, max_resample: int = 5) -> CheckReport:
    """The contravariant metrics invert the residue metrics on random real points."""
    records = []
    for i, rng in enumerate(_child_rngs(seed, samples)):
        rec = {"sample": i, "resampled": 0}
        for attempt in range(max_resample + 1):
            lam = LambdaFunction.random(N, M, rng)
            try:
                res = metric_inverse_sample(lam)
            except DegenerateCritical as exc:
                rec["resampled"] += 1
                rec["degenerate"] = str(exc)
                continue
            rec.update({"u": {str(k): v for k, v in lam.coeffs.items()},
                        "residual_1": res[1], "residual_2": res[2],
                        "cond_1": res["cond1"], "cond_2": res["cond2"],
                        "pass": max(res[1], res[2]) < tol})
            break
        else:
            rec["pass"] = False
        records.append(rec)
    passed = [r["pass"] for r in records]
    fraction = sum(passed) / len(records)
    scored = [r for r in records if "residual_1" in r]
    worst = max(scored, key=lambda r: max(r["residual_1"], r["residual_2"]), default=None)
    ok = fraction >= min_pass_fraction
    detail = {"samples": samples, "seed": seed, "tol": tol, "pass_fraction": fraction,
              "per_sample": records}
    if worst is not None:
        detail["worst"] = {"sample": worst["sample"],
                           "residual": max(worst["residual_1"], worst["residual_2"])}
    return CheckReport("metric-inverse", [N, M], ok, None,
                       None if ok else f"pass fraction {fraction:.2f}", detail=detail)


# ---------------------------------------------------------------------------
# quasihomogeneity of the pencil


def euler_weights(N: int, M: int) -> Dict[int, Fraction]:
    return {k: Fraction(N - k, N) for k in range(-M, N)}


def tau_tilde(lam: LambdaFunction):
    """``(1/M) log u_{-M}``; its gradients in the two metrics are e and E."""
    return sympy.log(lam.u(-lam.M)) / lam.M


def _lie_derivative(g: sympy.Matrix, field_coeffs: Sequence, syms: Sequence) -> sympy.Matrix:
    """``(L_X g)^{ij} = X^k d_k g^{ij} - d_k X^i g^{kj} - d_k X^j g^{ik}``."""
    n = len(syms)
    jac = sympy.Matrix(n, n, lambda i, k: sympy.diff(field_coeffs[i], syms[k]))
    transport = g.applyfunc(lambda e: sum(field_coeffs[k] * sympy.diff(e, syms[k]) for k in range(n)))
    return (transport - jac * g - g * jac.T).applyfunc(sympy.expand)


def quasihomogeneity_data(N: int, M: int) -> dict:
    lam = LambdaFunction.symbolic(N, M)
    syms = lam.symbols()
    g1 = sympy.Matrix(dispersionless_bracket(1, N, M, lam).g)
    g2 = sympy.Matrix(dispersionless_bracket(2, N, M, lam).g)
    weights = euler_weights(N, M)
    e = [sympy.Integer((-1) ** N if k == 0 else 0) for k in range(-M, N)]
    E = [sympy.Rational(weights[k].numerator, weights[k].denominator) * lam.u(k) for k in range(-M, N)]
    return {"lam": lam, "syms": syms, "g1": g1, "g2": g2, "e": e, "E": E}


def check_quasihomogeneity(N: int, M: int) -> CheckReport:
    data = quasihomogeneity_data(N, M)
    syms, g1, g2, e, E = data["syms"], data["g1"], data["g2"], data["e"], data["E"]
    zero = sympy.zeros(N + M, N + M)
    commutator = [sympy.expand(sum(e[k] * sympy.diff(E[i], syms[k]) - E[k] * sympy.diff(e[i], syms[k])
                                   for k in range(N + M))) for i in range(N + M)]
    tt = tau_tilde(data["lam"])
    dtau = sympy.Matrix([sympy.diff(tt, s) for s in syms])
    grad1 = (g1 * dtau).applyfunc(sympy.simplify)
    grad2 = (g2 * dtau).applyfunc(sympy.simplify)
    results = {
        "L_E g2 = 0": _lie_derivative(g2, E, syms) == zero,
        "L_e g1 = 0": _lie_derivative(g1, e, syms) == zero,
        "L_e g2 = g1": (_lie_derivative(g2, e, syms) - g1).applyfunc(sympy.expand) == zero,
        "[e, E] = e": [c - x for c, x in zip(commutator, e)] == [0] * (N + M),
        "grad_1 tau = e": list(grad1) == list(e),
        "grad_2 tau = E": [sympy.expand(a - b) for a, b in zip(grad2, E)] == [0] * (N + M),
    }
    failed = [k for k, ok in results.items() if not ok]
    return CheckReport("quasihomogeneity", [N, M], not failed, None,
                       ", ".join(failed) or None, detail={k: bool(v) for k, v in results.items()})


def check_pencil_shift(N: int, M: int) -> CheckReport:
    """``g2 + s g1`` equals ``g2`` at ``u_0 -> u_0 + s (-1)**N``."""
    data = quasihomogeneity_data(N, M)
    s = sympy.Symbol("s")
    u0 = data["lam"].u(0)
    shifted = data["g2"].subs(u0, u0 + s * (-1) ** N)
    diff = (shifted - data["g2"] - s * data["g1"]).applyfunc(sympy.expand)
    ok = diff == sympy.zeros(N + M, N + M)
    return CheckReport("pencil-shift", [N, M], ok, None, None if ok else "entries differ")


__all__ = [
    "DegenerateCritical",
    "HydroBracket",
    "LambdaFunction",
    "SingularSample",
    "bracket_sum",
    "c_nm",
    "check_against_dispersive",
    "check_metric_inverse",
    "check_pencil_shift",
    "check_quasihomogeneity",
    "christoffel_entry",
    "covariant_metric",
    "dispersionless_bracket",
    "euler_weights",
    "generating_function",
    "generating_function_check",
    "generating_function_difference",
    "intersection_form",
    "leading_bracket_term",
    "metric_entry",
    "metric_inverse_residual",
    "metric_inverse_sample",
    "nonlocal_coefficients",
    "quasihomogeneity_data",
    "tau_tilde",
]
