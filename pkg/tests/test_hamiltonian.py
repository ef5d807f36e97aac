from fractions import Fraction

import pytest
from hypothesis import given

from bigraded_toda.algebra import is_total_derivative
from bigraded_toda.hamiltonian import HamiltonianStructure, P1_apply, P2_apply, one_form_window
from bigraded_toda.lax import FlowIndex, hierarchy
from bigraded_toda.operators import DifferenceOperator
from bigraded_toda.reference_matrices import Lam, OpWord, U, available, compare_with_reference, reference_matrix
from bigraded_toda.symbols import ShiftSymbol
from helpers import ALG, finite_operators


def ham(N, M, K=3):
    return HamiltonianStructure(hierarchy(N, M, K))


def test_density_degrees_and_constants():
    H = ham(2, 1, 2)
    for idx in H.hier.all_indices(1):
        assert H.density(idx).is_homogeneous(H.density_degree(idx), 0)
    h = H.hier
    assert h.kappa(0) == 0
    assert h.kappa(2) == Fraction(1, 2) * (Fraction(1, 2) + 1) * Fraction(3, 2)


def test_first_density_at_leading_order():
    H = ham(1, 1, 2)
    alg = H.algebra
    # h_{0,0} = (1/2) res L^2, and res L^2 = u0^2 + u_{-1}(x) + u_{-1}(x + eps)
    expected = (alg.u(0) * alg.u(0) + alg.u(-1).scale(2)).scale(Fraction(1, 2))
    assert H.density((0, 0)).eps_coefficient(0) == expected


@pytest.mark.parametrize("N,M", [(1, 1), (2, 1), (1, 2)])
def test_hamiltonian_flows(N, M):
    H = ham(N, M)
    for idx in H.hier.all_indices(1):
        assert H.check_lax_flow(idx).passed


@pytest.mark.parametrize("N,M", [(1, 1), (2, 1)])
def test_tangency(N, M):
    H = ham(N, M, 2)
    for idx in H.hier.all_indices(1):
        for which in (1, 2):
            out = H.P(which, H.dH(idx))
            assert set(out.coeffs) <= set(range(-M, N))


def test_bottom_hamiltonian_generates_translation():
    for N, M in [(1, 1), (2, 1), (1, 2)]:
        H = ham(N, M, 2)
        vf = H.hamiltonian_vector_field(1, (-M, 0))
        alg = H.algebra
        for k in range(-M, N):
            assert vf[k] == alg.eps() * alg.u(k, 1)


@pytest.mark.parametrize("N,M", [(1, 1), (2, 1)])
def test_representative_independence(N, M):
    """Orders outside the one-form window do not change either bracket."""
    H = ham(N, M, 2)
    alg = H.algebra
    lo, hi = one_form_window(N, M)
    for idx in H.hier.all_indices(1):
        X = H.dH(idx)
        Y = X + DifferenceOperator(alg, {hi + 1: alg.u(0) * alg.v(), lo - 1: alg.u(N - 1, 1)})
        for which in (1, 2):
            a, b = H.P(which, X), H.P(which, Y)
            assert all(a.coefficient(k) == b.coefficient(k) for k in range(-M, N))


@pytest.mark.parametrize("N,M", [(1, 1), (2, 1)])
def test_pairing_with_the_flow(N, M):
    """d h / dt equals res(dH . dL/dt) up to a total derivative."""
    H = ham(N, M, 2)
    h = H.hier
    alg = H.algebra
    for idx in h.all_indices(1):
        for flow in h.all_indices(1):
            vel = h.eps_velocity(flow)
            Ldot = DifferenceOperator(alg, vel)
            pairing = (H.dH(idx) * Ldot).residue()
            diff = h.eps_time_derivative(H.density(idx), flow) - pairing
            assert is_total_derivative(diff)


@pytest.mark.parametrize("N,M", [(1, 1), (2, 1)])
def test_recursion(N, M):
    H = ham(N, M)
    for idx in H.hier.all_indices(2):
        assert H.check_recursion_operator(idx).passed
        if idx.p <= 1:
            assert H.check_recursion(idx).passed


def test_recursion_mixing_only_from_bottom():
    H = ham(2, 1)
    assert H.recursion_coefficient((1, 0)) == 2 - Fraction(1, 2)
    # without the extra term the bottom recursion fails
    h = H.hier
    lo, hi = -3, 3
    left = H.L * h.B_operator((-1, 0), lo=lo - 2, hi=hi + 1)
    right = h.B_operator((-1, 1), lo=lo, hi=hi).scale(H.recursion_coefficient((-1, 0)))
    assert not (left - right).narrow(lo, hi).is_zero()


def test_involution_examples():
    assert ham(1, 1).check_involution((0, 0), (-1, 1), 1).passed
    assert ham(2, 1, 2).check_involution((1, 0), (0, 0), 2).passed
    assert ham(2, 1, 2).check_involution((1, 1), (1, 1), 2).passed


def test_non_commuting_densities_are_detected():
    H = ham(1, 1, 2)
    alg = H.algebra
    X = H.dH((0, 0))
    Y = DifferenceOperator(alg, {0: alg.u(0) * alg.u(0)})
    assert not is_total_derivative(H.bracket_density(1, X, Y))


@given(finite_operators(), finite_operators())
def test_skew_symmetry(X, Y):
    L = hierarchy(2, 1, 3).L
    for P in (P1_apply, P2_apply):
        dens = (X * P(Y, L)).residue() + (Y * P(X, L)).residue()
        assert is_total_derivative(dens)


def test_pencil_shift_dispersive():
    h = hierarchy(2, 1, 3)
    alg = h.algebra
    c = Fraction(3, 2)
    L = h.L
    Lc = L + DifferenceOperator(alg, {0: alg.const(c)})
    for idx in h.all_indices(1):
        X = HamiltonianStructure(h).dH(idx)
        diff = P2_apply(X, Lc) - P2_apply(X, L) - P1_apply(X, L).scale(c)
        assert all(diff.coefficient(k).is_zero() for k in range(-1, 2))


@pytest.mark.parametrize("N,M,which", [k for k in available() if k != (1, 2, 2)])
def test_published_matrices(N, M, which):
    H = ham(N, M)
    assert all(r.passed for r in compare_with_reference(H, which))


def test_published_matrix_entry_misprint():
    """One published entry disagrees; the skew-adjoint partner fixes the correct form."""
    H = ham(1, 2)
    reports = compare_with_reference(H, 2)
    failed = [r.indices for r in reports if not r.passed]
    assert failed == [[1, 2, 0, -1]]
    one = ShiftSymbol.const(1)
    corrected = Lam ** 2 * U(-2) - U(-2) * Lam ** -1 + U(0) * (Lam - one) * U(-1)
    f = H.algebra.test_function()
    assert H.bracket_entry(2, 0, -1) == corrected.apply(f)
    assert reference_matrix(1, 2, 2)[2][1].apply(f) != corrected.apply(f)


@pytest.mark.parametrize("N,M", [(1, 1), (2, 1), (1, 2), (2, 3), (3, 1)])
def test_component_brackets(N, M):
    H = ham(N, M, 2)
    for which in (1, 2):
        for n in range(-M, N):
            for m in range(-M, N):
                assert H.bracket_entry(which, n, m) == H.explicit_bracket_entry(which, n, m)


def test_golden_entries_spot_checks():
    f11 = ham(1, 1).algebra.test_function()
    H = ham(1, 1)
    assert H.bracket_entry(2, 0, 0) == (Lam * U(-1) - U(-1) * Lam ** -1).apply(f11)
    H = ham(2, 1)
    assert H.bracket_entry(1, 1, 1) == OpWord.lift(Lam - Lam ** -1).apply(H.algebra.test_function())
    H = ham(1, 2)
    one = ShiftSymbol.const(1)
    assert H.bracket_entry(1, -2, 0) == (U(-2) * (one - Lam ** -2)).apply(H.algebra.test_function())
