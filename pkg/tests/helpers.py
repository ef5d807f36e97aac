"""Hypothesis strategies for random algebra elements and operators."""
from fractions import Fraction

from hypothesis import strategies as st

from bigraded_toda.algebra import DiffAlgebra
from bigraded_toda.operators import DifferenceOperator

ALG = DiffAlgebra(2, 1, 3)

coefficients = st.fractions(min_value=-3, max_value=3, max_denominator=4)


@st.composite
def factors(draw, alg=ALG, derivatives=True, logs=True):
    kind = draw(st.sampled_from(["u", "v", "vpow", "logu", "eps"] if logs else ["u", "v", "vpow", "eps"]))
    order = draw(st.integers(0, 2)) if derivatives else 0
    if kind == "u":
        return alg.u(draw(st.integers(-alg.M + 1, alg.N - 1)), order)
    if kind == "v":
        return alg.v(order)
    if kind == "vpow":
        return alg.v_power(draw(st.integers(-2, 2)))
    if kind == "logu":
        return alg.logu()
    return alg.eps()


@st.composite
def elements(draw, alg=ALG, max_terms=4, derivatives=True, logs=True):
    out = alg.zero()
    for _ in range(draw(st.integers(0, max_terms))):
        term = alg.const(draw(coefficients))
        for _ in range(draw(st.integers(0, 3))):
            term = term * draw(factors(alg, derivatives, logs))
        out = out + term
    return out


@st.composite
def homogeneous_monomials(draw, alg=ALG):
    """Single monomials built from homogeneous generators (always homogeneous)."""
    term = alg.const(draw(st.sampled_from([Fraction(1), Fraction(-2), Fraction(1, 3)])))
    for _ in range(draw(st.integers(1, 3))):
        term = term * draw(factors(alg))
    return term


@st.composite
def finite_operators(draw, alg=ALG, lo=-2, hi=2):
    coeffs = {}
    for k in range(lo, hi + 1):
        if draw(st.booleans()):
            coeffs[k] = draw(elements(alg, max_terms=2, logs=False))
    return DifferenceOperator(alg, coeffs)
