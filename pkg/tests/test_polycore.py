import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nhkitaev.exceptions import DegeneratePolynomialError, PreconditionError
from nhkitaev.model import bulk_quartic
from nhkitaev.polycore import Polynomial, arccos_c, as_complex, match_multisets, polish_bound, roots, sqrt_pair

from conftest import P_REAL_MIXED
from oracles import multiset_distance, numpy_roots


def test_as_complex_rejects_nonfinite():
    assert as_complex(2) == 2 + 0j
    for bad in (float("nan"), complex(1, float("inf"))):
        with pytest.raises(PreconditionError):
            as_complex(bad)


def test_polynomial_trims_tiny_leading_coefficients():
    p = Polynomial([1, 2, 1e-20])
    assert p.degree == 1
    assert Polynomial([0, 0, 0]).degree == 0
    assert Polynomial([1, 2, 1e-20], trim=False).degree == 2


def test_polynomial_rejects_bad_input():
    with pytest.raises(PreconditionError):
        Polynomial([])
    with pytest.raises(PreconditionError):
        Polynomial([1, float("nan")])


def test_polynomial_eval_derivative_reciprocal():
    p = Polynomial([1, 2j, 3])
    assert p(2) == pytest.approx(1 + 4j + 12)
    assert np.allclose(p.derivative().coeffs, [2j, 6])
    assert np.allclose(p.reciprocal().coeffs, [3, -2j, 1])
    assert np.allclose(p.reciprocal(3).coeffs, [0, 3, -2j, 1])
    with pytest.raises(PreconditionError):
        p.reciprocal(1)


def test_roots_biquadratic():
    r = roots(Polynomial([4, 0, -5, 0, 1]))
    assert multiset_distance(r, [1, -1, 2, -2]) < 1e-12


def test_roots_x2_plus_1():
    r = roots(Polynomial([1, 0, 1]))
    assert multiset_distance(r, [1j, -1j]) < 1e-14


def test_roots_linear_and_degenerate():
    assert roots(Polynomial([2, 4]))[0] == pytest.approx(-0.5)
    with pytest.raises(DegeneratePolynomialError):
        roots(Polynomial([3]))
    with pytest.raises(DegeneratePolynomialError):
        roots(Polynomial([0, 0]))


def test_bulk_quartic_root_product_is_one():
    r = roots(bulk_quartic(P_REAL_MIXED, 1.0).poly)
    assert abs(np.prod(r) - 1) < 1e-10


def test_random_quartics_polished_below_bound(rng):
    for _ in range(1000):
        c = rng.uniform(0, 1, 5) * np.exp(2j * np.pi * rng.uniform(size=5))
        p = Polynomial(c)
        r = roots(p)
        assert r.size == p.degree
        for x in r:
            assert abs(p(x)) <= polish_bound(p, x)
        assert multiset_distance(r, numpy_roots(p.coeffs)) < 1e-6


def test_palindromic_quartic_product(rng):
    for _ in range(200):
        c = rng.normal(size=5) + 1j * rng.normal(size=5)
        c[4] = c[0]
        assert abs(np.prod(roots(Polynomial(c))) - 1) < 1e-10


def test_arccos_examples():
    assert arccos_c(0) == pytest.approx(math.pi / 2)
    assert arccos_c(1) == pytest.approx(0)
    w = arccos_c(2)
    assert abs(w.imag) == pytest.approx(math.log(2 + math.sqrt(3)))
    assert cmath.cos(w) == pytest.approx(2)


def test_sqrt_pair_examples():
    assert sqrt_pair(4) == (2, -2)
    assert sqrt_pair(-1) == (1j, -1j)
    w, mw = sqrt_pair(-3)
    assert w == pytest.approx(1j * math.sqrt(3)) and mw == -w


def test_round_trips_on_grid():
    g = np.linspace(-3, 3, 100)
    for a in g:
        for b in g:
            z = complex(a, b)
            assert abs(cmath.cos(arccos_c(z)) - z) <= 1e-12 * max(1, abs(z))
            w, mw = sqrt_pair(z)
            assert abs(w * w - z) <= 1e-12 * max(1, abs(z))
            assert mw == -w


def test_match_multisets():
    assert match_multisets([1, 2j], [2j, 1]) == 0
    assert match_multisets([0, 1], [0.1, 1]) == pytest.approx(0.1)
    with pytest.raises(PreconditionError):
        match_multisets([1], [1, 2])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.complex_numbers(max_magnitude=3, allow_nan=False, allow_infinity=False), min_size=1, max_size=6))
def test_roots_of_product_of_linear_factors(rts):
    c = np.poly(np.array(rts))[::-1]
    r = roots(Polynomial(c))
    # clustered roots are ill-conditioned, so compare the rebuilt coefficients instead
    back = np.poly(r)[::-1]
    assert np.max(np.abs(back - c)) <= 1e-9 * np.max(np.abs(c))
