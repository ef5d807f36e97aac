from fractions import Fraction

import pytest
from hypothesis import given

from bigraded_toda.algebra import DiffAlgebra, is_total_derivative
from bigraded_toda.lax import hierarchy
from bigraded_toda.operators import (
    DiffDiffOperator,
    DifferenceOperator,
    EmptyWindow,
    WindowError,
    op_commutator,
    op_mul,
    project,
    residue,
    residue_of_commutator_terms,
)
from helpers import ALG, finite_operators

A = DiffAlgebra(2, 1, 3)


def op(coeffs, lo=None, hi=None, alg=A):
    return DifferenceOperator(alg, coeffs, lo, hi)


def lam(k, alg=A):
    return DifferenceOperator.shift_power(alg, k)


def test_composition_rule():
    u0 = A.u(0)
    assert op_mul(lam(1), op({-1: u0})) == op({0: u0.shift(1)})


def test_commutator_with_lax_ends():
    for N, M in [(1, 1), (2, 1), (1, 2), (2, 3)]:
        alg = DiffAlgebra(N, M, 3)
        vm = alg.v_power(M)
        c = op_commutator(lam(N, alg), op({-M: vm}, alg=alg))
        assert c.coefficient(N - M) == vm.shift(N) - vm
        assert set(c.coeffs) <= {N - M}


def test_projection_examples():
    L = op({1: A.one(), 0: A.u(0), -1: A.v()})
    assert project(L, "+") == op({1: A.one(), 0: A.u(0)})
    assert L.project("+") + L.project("-") == L
    assert L.project("<=0").project(">0").is_zero()
    assert L.project(">0") + L.project("<=0") == L


def test_projection_needs_the_cut():
    semi = op({3: A.one(), 2: A.u(1)}, lo=2)
    with pytest.raises(WindowError):
        semi.project("+")
    with pytest.raises(WindowError):
        semi.residue()


def test_residue_examples():
    assert residue(op({0: A.u(0), 1: A.one()})) == A.u(0)
    for k in (-2, -1, 1, 3):
        assert residue(lam(k)).is_zero()


def test_empty_window():
    with pytest.raises(EmptyWindow):
        op({}, lo=3, hi=1)
    bottom = op({}, lo=None, hi=-5)
    top = op({}, lo=5, hi=None)
    with pytest.raises(EmptyWindow):
        bottom * top


def test_semi_infinite_window_propagation():
    h = hierarchy(2, 1, 2)
    r = h.root_N(3)
    assert r.window[0] == -3
    sq = r * r
    # the exact part of the square is exactly what the factors determine
    assert sq.lo == -3 + 1
    bigger = h.root_N(6) * h.root_N(6)
    for k in range(sq.lo, 3):
        assert sq.coefficient(k) == bigger.coefficient(k)


def test_apply_requires_finite():
    with pytest.raises(WindowError):
        op({0: A.u(0)}, lo=-1).apply(A.test_function())
    f = A.test_function()
    assert op({1: A.u(0)}).apply(f) == A.u(0) * f.shift(1)


def test_diffdiff_leibniz():
    d = DiffDiffOperator.eps_d(A)
    f = DiffDiffOperator.from_difference(op({0: A.u(1)}))
    c = d.commutator(f)
    assert c.difference_part == op({0: A.eps() * A.u(1, 1)})
    assert set(c.parts) == {0}


def test_serialization():
    L = op({2: A.one(), 0: A.u(0), -1: A.v()}, lo=-1)
    doc = L.to_json()
    assert doc["window"] == [-1, None]
    assert [t[0] for t in doc["terms"]] == [2, 0, -1]
    assert "\\Lambda^{-1}" in L.to_latex()


@given(finite_operators(), finite_operators(), finite_operators())
def test_associativity(a, b, c):
    assert (a * b) * c == a * (b * c)


@given(finite_operators(), finite_operators())
def test_residue_of_commutator_is_exact(a, b):
    res = a.commutator(b).residue()
    assert is_total_derivative(res)
    telescoped = ALG.zero()
    for _, s, x in residue_of_commutator_terms(a, b):
        telescoped = telescoped + x.shift(s) - x
    assert telescoped == res


@given(finite_operators())
def test_self_commutator_vanishes(a):
    assert a.commutator(a).is_zero()
