import numpy as np
import pytest
from hypothesis import given, strategies as st

from bigraded_toda.roots import aberth, backward_error, sorted_roots


@given(st.integers(1, 12), st.integers(0, 10 ** 6))
def test_residual_contract(degree, seed):
    rng = np.random.default_rng(seed)
    coeffs = rng.normal(size=degree + 1) + 1j * rng.normal(size=degree + 1)
    z = aberth(coeffs)
    assert len(z) == degree
    assert np.all(backward_error(coeffs, z) < 1e-12)


def test_matches_numpy():
    coeffs = [1, -6, 11, -6]
    assert np.allclose(sorted_roots(aberth(coeffs)), [1, 2, 3])


def test_leading_zeros_and_constants():
    assert np.allclose(aberth([0, 0, 2, -4]), [2])
    assert len(aberth([5])) == 0
    with pytest.raises(ValueError):
        aberth([0, 0])


def test_sorted_roots_order():
    z = sorted_roots(np.array([1 + 1j, -1, 1 - 1j]))
    assert list(z) == [-1, 1 - 1j, 1 + 1j]
