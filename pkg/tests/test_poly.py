from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdsynth.errors import DegenerateDivisor, DegenerateInput
from tdsynth.poly import (AffinePoly, MultiPoly, RatPoly, format_fraction, poly_gcd,
                          poly_roots, solve_exact, to_fraction)
from tdsynth.semialg import precomputed

fractions = st.fractions(min_value=-20, max_value=20, max_denominator=12)
ratpolys = st.lists(fractions, min_size=0, max_size=6).map(RatPoly)
nonzero_ratpolys = ratpolys.filter(lambda p: not p.is_zero())


# --- RatPoly ---------------------------------------------------------------

def test_closed_loop_characteristic_polynomial():
    c0 = RatPoly([32, 28, 5, 1])
    assert RatPoly([1, 1]) * c0 + 68 == RatPoly([100, 60, 33, 6, 1])


def test_multiplicative_identity():
    p = RatPoly([Fraction(1, 3), -2, 5])
    assert p * 1 == p
    assert p * RatPoly([1]) == p


def test_exact_divmod():
    q, r = divmod(RatPoly([2, 3, 1]), RatPoly([1, 1]))
    assert q == RatPoly([2, 1])
    assert r.is_zero()


def test_divmod_by_zero():
    with pytest.raises(DegenerateDivisor):
        divmod(RatPoly([1, 1]), RatPoly([]))


def test_canonical_trailing_zeros():
    p = RatPoly([1, 2, 0, 0])
    assert p.degree() == 1
    assert p == RatPoly([1, 2])
    assert RatPoly([0]).is_zero() and RatPoly([]).is_zero()
    assert len(RatPoly([0, 0, 3]).coeffs) == 3


def test_rational_parsing():
    assert to_fraction("1/3") == Fraction(1, 3)
    assert to_fraction(0.25) == Fraction(1, 4)
    assert format_fraction(Fraction(-7, 2)) == "-7/2"
    p = RatPoly.parse("1/2 + 3*s^2")
    assert p == RatPoly([Fraction(1, 2), 0, 3])
    assert RatPoly.parse(p.to_text()) == p


def test_exact_evaluation():
    z = RatPoly([100, 60, 33, 6, 1])
    assert z(0) == 100
    assert z(Fraction(1, 2)) == Fraction(100) + 30 + Fraction(33, 4) + Fraction(6, 8) + Fraction(1, 16)


@given(ratpolys, nonzero_ratpolys)
def test_divmod_reconstruction(a, b):
    q, r = divmod(a, b)
    assert q * b + r == a
    assert r.is_zero() or r.degree() < b.degree()


# --- gcd -------------------------------------------------------------------

def test_gcd_coprime_plant():
    assert poly_gcd(RatPoly([1, 1]), RatPoly([1])) == RatPoly([1])


def test_gcd_with_zero_is_monic():
    assert poly_gcd(RatPoly([4, 2]), RatPoly([])) == RatPoly([2, 1])


def test_gcd_common_factor():
    a = RatPoly([1, 1]) * RatPoly([2, 1])
    b = RatPoly([1, 1]) * RatPoly([3, 1])
    assert poly_gcd(a, b) == RatPoly([1, 1])


def test_gcd_both_zero():
    with pytest.raises(DegenerateInput):
        poly_gcd(RatPoly([]), RatPoly([0]))


@given(nonzero_ratpolys, nonzero_ratpolys, nonzero_ratpolys)
@settings(max_examples=50)
def test_gcd_divides_both(a, b, c):
    g = poly_gcd(a * c, b * c)
    assert (a * c % g).is_zero()
    assert (b * c % g).is_zero()
    # the constructed common factor is found
    assert (g % c.monic()).is_zero()


# --- roots -----------------------------------------------------------------

def _same_roots(got, want, tol=1e-8):
    got = sorted(got, key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    want = sorted(want, key=lambda z: (round(z.real, 6), round(z.imag, 6)))
    return len(got) == len(want) and np.allclose(got, want, atol=tol)


def test_roots_quadratic():
    assert _same_roots(poly_roots(RatPoly([5, 2, 1])), [-1 + 2j, -1 - 2j])


def test_roots_closed_loop():
    r = poly_roots(RatPoly([100, 60, 33, 6, 1]))
    assert _same_roots(r, [-1 + 2j, -1 - 2j, -2 + 4j, -2 - 4j])


def test_roots_linear():
    assert _same_roots(poly_roots(RatPoly([1, 1])), [-1])


@given(st.lists(st.integers(-30, 30), min_size=1, max_size=10, unique=True))
@settings(max_examples=50)
def test_roots_reconstruct(roots):
    roots = [r / 3 for r in roots]
    p = RatPoly.from_roots([Fraction(r).limit_denominator(3) for r in roots])
    got = poly_roots(p)
    rebuilt = np.poly(got)[::-1].real
    assert np.allclose(rebuilt, p.to_float(), atol=1e-6 * np.abs(p.to_float()).max())


# --- MultiPoly ---------------------------------------------------------------

def test_psi0_at_unit_point():
    psi0 = precomputed().psis[0]
    assert psi0(1.0, 0.0, 0.0) == pytest.approx(0.398 + 0.616 - 0.015, abs=1e-12)


def test_multipoly_constant_at_origin():
    u, v, lam = MultiPoly.uvl()
    p = 3 * u * v + 2 * lam ** 2 - 7
    assert p(0, 0, 0) == -7


def test_multipoly_text_roundtrip():
    u, v, lam = MultiPoly.uvl()
    p = 0.5 * u ** 3 - 2 * u * v * lam + 1.25
    assert MultiPoly.parse(p.to_text()).allclose(p, atol=0)


def test_multipoly_no_stored_zeros():
    u, v, _ = MultiPoly.uvl()
    p = (u + v) - v
    assert p == u
    assert all(c != 0 for _, c in p.items())


coords = st.floats(-2, 2, allow_nan=False)
small_terms = st.dictionaries(
    st.tuples(st.integers(0, 3), st.integers(0, 3), st.integers(0, 3)),
    st.floats(-5, 5, allow_nan=False).filter(lambda x: abs(x) > 1e-3),
    max_size=6).map(MultiPoly)


@given(small_terms, small_terms, coords, coords, coords)
def test_multipoly_product_matches_evaluation(p, q, u, v, lam):
    lhs = (p * q)(u, v, lam)
    rhs = p(u, v, lam) * q(u, v, lam)
    assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-9)


# --- AffinePoly / exact solve ---------------------------------------------

def test_affine_poly_evaluation():
    u, v, lam = MultiPoly.uvl()
    g = AffinePoly(lam, {0: u, 1: v * 2.0}, ndec=2)
    assert g.at([3.0, -1.0]) == lam + 3.0 * u - 2.0 * v
    assert (g - g).at([1.0, 1.0]).is_zero()


def test_solve_exact():
    A = [[2, 1], [1, 3]]
    x = solve_exact(A, [3, 5])
    assert x == [Fraction(4, 5), Fraction(7, 5)]
