import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from monopoisson.moments import (MAX_N, MomentMethod, StirlingTriangle, laplace_product,
                                 moment_eval, moment_poly, stirling)


def rising_factorial_coeffs(n):
    """Oracle: coefficients of x (x + 1) ... (x + n - 1) by explicit multiplication."""
    poly = [1]
    for j in range(n):
        nxt = [0] * (len(poly) + 1)
        for k, c in enumerate(poly):
            nxt[k + 1] += c
            nxt[k] += j * c
        poly = nxt
    return poly


def test_small_table():
    assert [stirling(4, k) for k in range(5)] == [0, 6, 11, 6, 1]
    assert stirling(5, 3) == 35
    assert stirling(0, 0) == 1


@pytest.mark.parametrize("n", [1, 5, 12, 30, MAX_N])
def test_against_rising_factorial(n):
    coeffs = rising_factorial_coeffs(n)
    assert [stirling(n, k) for k in range(n + 1)] == coeffs
    assert sum(coeffs) == math.factorial(n)


def test_triangle_bounds():
    tri = StirlingTriangle(5)
    assert tri[5, 6] == 0
    with pytest.raises(IndexError):
        tri[6, 1]
    with pytest.raises(ValueError):
        stirling(3, 4)


def test_second_moment():
    assert moment_poly(2).coeffs == (1, 3, 2)
    assert moment_poly(2).power_basis() == (1, 3, 1)
    assert moment_eval(2, 1.0) == 5.0
    assert moment_eval(1, 2.5) == 3.5
    assert moment_eval(0, 7.0) == 1.0


@pytest.mark.parametrize("n", range(1, 16))
def test_methods_agree_exactly(n):
    assert moment_poly(n, MomentMethod.RECURSION) == moment_poly(n, MomentMethod.STIRLING)


@given(st.integers(min_value=1, max_value=25))
def test_recursion_holds(n):
    cur = moment_poly(n).power_basis()
    prev = moment_poly(n - 1).power_basis()
    integral = (Fraction(0),) + tuple(c / (k + 1) for k, c in enumerate(prev))
    padded = prev + (Fraction(0),)
    assert all(a - b == n * c for a, b, c in zip(cur, padded, integral))


@given(st.integers(min_value=1, max_value=20), st.fractions(min_value=Fraction(1, 10), max_value=50))
def test_laplace_product(n, p):
    assert moment_poly(n).laplace(p) == laplace_product(n, p)


@given(st.integers(min_value=1, max_value=10), st.floats(min_value=0, max_value=10))
def test_evaluation_matches_exact(n, t):
    exact = sum(c * Fraction(t) ** k for k, c in enumerate(moment_poly(n).power_basis()))
    assert moment_eval(n, t) == pytest.approx(float(exact), rel=1e-12)


def test_domain():
    with pytest.raises(ValueError):
        moment_eval(2, -1.0)
    with pytest.raises(ValueError):
        moment_eval(MAX_N + 1, 1.0)
    with pytest.raises(ValueError):
        moment_poly(-1)
