from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, strategies as st

from bigraded_toda.dispersionless import (
    DegenerateCritical,
    LambdaFunction,
    SingularSample,
    bracket_sum,
    c_nm,
    check_against_dispersive,
    check_metric_inverse,
    check_pencil_shift,
    check_quasihomogeneity,
    covariant_metric,
    dispersionless_bracket,
    generating_function,
    generating_function_check,
    generating_function_difference,
    intersection_form,
    metric_inverse_residual,
    nonlocal_coefficients,
)

U0, UM1 = 0.3, 1.7
P, Q = 0.9, -1.2


def toda_lambda(u0=U0, um1=UM1):
    return LambdaFunction(1, 1, {0: u0, -1: um1})


def test_c_nm():
    assert (c_nm(1, 2), c_nm(0, 0), c_nm(-1, 0), c_nm(1, 0), c_nm(0, 1)) == (1, -1, -1, 0, 0)


def test_toda_metrics_by_hand():
    lam = toda_lambda()
    g1 = dispersionless_bracket(1, 1, 1, lam).matrix()
    g2 = dispersionless_bracket(2, 1, 1, lam).matrix()
    assert np.allclose(g1, [[0, -UM1], [-UM1, 0]], atol=1e-15)
    assert np.allclose(g2, [[2 * UM1 ** 2, U0 * UM1], [U0 * UM1, 2 * UM1]], atol=1e-15)


def test_toda_generating_functions_by_hand():
    lam = toda_lambda()
    first = -UM1 * (1 / P + 1 / Q)
    second = 2 * UM1 ** 2 / (P * Q) + U0 * UM1 * (1 / P + 1 / Q) + 2 * UM1
    assert abs(generating_function(1, lam, P, Q) - first) < 1e-10
    assert abs(generating_function(2, lam, P, Q) - second) < 1e-10
    for which in (1, 2):
        assert abs(generating_function_difference(which, lam, P, Q)) < 1e-10


def test_generating_function_seeded_sample():
    for which in (1, 2):
        rep = generating_function_check(which, 2, 2, samples=1, seed=42, tol=1e-8)
        assert rep.passed, rep.message


@pytest.mark.parametrize("N,M", [(1, 1), (2, 2), (3, 2), (1, 3)])
def test_generating_functions(N, M):
    for which in (1, 2):
        rep = generating_function_check(which, N, M, samples=30, seed=1, tol=1e-10)
        assert rep.passed, rep.message


def test_generating_function_detects_perturbation():
    lam = LambdaFunction.random(2, 2, np.random.default_rng(3), complex_values=True)
    p, q = 0.8 + 0.3j, -0.6 + 0.9j
    for which in (1, 2):
        br = dispersionless_bracket(which, 2, 2, lam)
        br.g[0][1] += 1e-3
        br.g[1][0] += 1e-3
        assert abs(bracket_sum(br, p, q) - generating_function(which, lam, p, q)) > 1e-10


def test_nearby_spectral_points_rejected():
    with pytest.raises(SingularSample):
        generating_function_difference(1, toda_lambda(), 0.9, 0.91)


@pytest.mark.parametrize("N,n,m", [(1, 0, 0), (2, 1, -1), (3, -2, 2), (2, 0, 1)])
def test_nonlocal_coefficients_against_sympy(N, n, m):
    t = sympy.Symbol("t")
    expr = (sympy.exp(n * t) - sympy.exp(N * t)) * (sympy.exp(-m * t) - 1) / (1 - sympy.exp(N * t))
    series = sympy.series(expr, t, 0, 6).removeO()
    expected = [Fraction(str(sympy.Rational(series.coeff(t, k)))) for k in range(1, 6)]
    assert nonlocal_coefficients(N, n, m, 5) == expected


@pytest.mark.parametrize("N,M", [(1, 1), (2, 1), (2, 3)])
def test_symbolic_brackets_symmetric(N, M):
    for which in (1, 2):
        assert dispersionless_bracket(which, N, M).is_symmetric()


@pytest.mark.parametrize("N,M", [(1, 1), (2, 1), (1, 2)])
def test_leading_order_of_dispersive_brackets(N, M):
    for which in (1, 2):
        assert check_against_dispersive(which, N, M).passed


def test_toda_critical_points():
    z = toda_lambda().critical_points()
    assert np.allclose(np.sort(z.real), [-np.sqrt(UM1), np.sqrt(UM1)], atol=1e-14)
    assert np.allclose(z.imag, 0)


def test_symmetric_point_inverse():
    lam = toda_lambda(u0=0.0)
    z = lam.critical_points()
    for which, cov in ((1, covariant_metric(lam, z)), (2, intersection_form(lam, z))):
        contra = dispersionless_bracket(which, 1, 1, lam).matrix()
        assert metric_inverse_residual(contra, cov) < 1e-12


@given(st.permutations(range(5)))
def test_residue_sums_ignore_ordering(perm):
    lam = LambdaFunction.random(2, 3, np.random.default_rng(7))
    z = lam.critical_points()
    zp = z[list(perm)]
    assert np.allclose(covariant_metric(lam, z), covariant_metric(lam, zp), atol=1e-14, rtol=0)
    assert np.allclose(intersection_form(lam, z), intersection_form(lam, zp), atol=1e-14, rtol=0)


@pytest.mark.parametrize("N,M", [(1, 1), (2, 2), (2, 3)])
def test_metric_inverse(N, M):
    rep = check_metric_inverse(N, M, samples=20, seed=5)
    assert rep.passed, rep.message


def test_metric_inverse_detects_perturbation():
    lam = LambdaFunction.random(2, 2, np.random.default_rng(11))
    contra = dispersionless_bracket(1, 2, 2, lam).matrix()
    contra[0, 1] += 1e-3
    assert metric_inverse_residual(contra, covariant_metric(lam)) > 1e-8


def test_degenerate_critical_points():
    # z^2 lambda' = 2 (z - 1)^2 (z + 1/2)
    lam = LambdaFunction(2, 1, {1: -3.0, 0: 0.4, -1: -1.0})
    with pytest.raises(DegenerateCritical):
        lam.critical_points()
    with pytest.raises(DegenerateCritical):
        LambdaFunction(1, 1, {0: 1.0, -1: 0.0}).critical_points()


def test_vanishing_critical_value():
    # lambda(1) = 1 - 2 + 1 = 0 at the critical point z = 1
    with pytest.raises(DegenerateCritical):
        intersection_form(toda_lambda(u0=-2.0, um1=1.0))


def test_missing_coefficients_rejected():
    with pytest.raises(ValueError):
        LambdaFunction(2, 1, {0: 1.0})


@pytest.mark.parametrize("N,M", [(1, 1), (2, 2), (2, 3)])
def test_quasihomogeneity_and_pencil(N, M):
    assert check_quasihomogeneity(N, M).passed
    assert check_pencil_shift(N, M).passed
