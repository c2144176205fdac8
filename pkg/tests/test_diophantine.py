from fractions import Fraction

import pytest
from hypothesis import given, strategies as st

from tdsynth.diophantine import YoulaFamily, controller, instantiate, solve_d_minimal, sylvester_system
from tdsynth.errors import DegenerateController, DegreeDeficit, NotCoprime, QDegreeViolation
from tdsynth.poly import RatPoly
from tdsynth.transfer import closed_loop

from conftest import A, B, Q_BOUNDS, Q_PEAK, Z


def test_d_minimal_solution(family):
    assert family.c0 == RatPoly([32, 28, 5, 1])
    assert family.d0 == RatPoly([68])
    assert family.dq == 2
    assert all(isinstance(c, Fraction) for c in family.c0.coeffs + family.d0.coeffs)


def test_degree_gate():
    with pytest.raises(DegreeDeficit):
        solve_d_minimal(RatPoly([1, 1]), RatPoly([1]), RatPoly([2, 1]))


def test_constant_q_family():
    a, z = RatPoly([2, 1]), RatPoly([2, 3, 1])
    f = solve_d_minimal(a, RatPoly([1]), z)
    # expansion oracle
    assert a * f.c0 + f.d0 == z
    assert f.c0 == RatPoly([1, 1])
    assert f.d0.is_zero()
    assert f.dq == 0


def test_not_coprime():
    with pytest.raises(NotCoprime):
        solve_d_minimal(RatPoly([2, 3, 1]), RatPoly([1, 1]), RatPoly([1, 4, 6, 4, 1]))


def test_bounds_controller(family):
    C = controller(family, Q_BOUNDS)
    assert C.num == RatPoly([100, 55, 26, 3])
    assert C.den == RatPoly([0, 5, 2, 1])


def test_zero_q_is_nominal(family):
    c, d = instantiate(family, [])
    assert (c, d) == (family.c0, family.d0)


def test_peak_controller(family):
    C = controller(family, Q_PEAK)
    num = [float(x) for x in C.num.coeffs]
    den = [float(x) for x in C.den.coeffs]
    # (3.0 s^3 + 20.0 s^2 + 49 s + 100) / (s^3 + 2.0 s^2 + 10.9 s)
    assert num == pytest.approx([100, 49.0607, 20.0834, 3.0227], abs=1e-4)
    assert den == pytest.approx([0, 10.9393, 1.9773, 1], abs=1e-4)
    assert [round(x, 1) for x in num] == [100, 49.1, 20.1, 3.0]


def test_q_degree_violation(family):
    with pytest.raises(QDegreeViolation):
        instantiate(family, [0, 0, 0, 1])


def test_degenerate_controller():
    # unreachable for solver-built families (deg b q < deg c0); guard checked directly
    f = YoulaFamily(c0=RatPoly([1]), d0=RatPoly([0]), a=RatPoly([0, 1]), b=RatPoly([1]),
                    z=RatPoly([0, 1]), dq=0)
    with pytest.raises(DegenerateController):
        instantiate(f, [-1])


def test_sylvester_shape(family):
    M, rhs = sylvester_system(A, B, Z)[:2]
    assert len(M) == len(rhs)


q_coeffs = st.lists(st.fractions(min_value=-50, max_value=50, max_denominator=20),
                    min_size=0, max_size=3)


@given(q_coeffs)
def test_pole_placement_invariance(family, q):
    try:
        C = controller(family, q)
    except DegenerateController:
        return
    T = closed_loop(family.plant(), C)
    assert T.den == Z


@given(st.fractions(min_value=-9, max_value=9, max_denominator=5))
def test_d_minimal_uniqueness(family, k):
    # every other solution differs by a multiple of (b, -a); only k = 0 keeps deg d < deg a
    c, d = family.c0 + B * k, family.d0 - A * k
    assert A * c + B * d == Z
    if k != 0:
        assert d.degree() >= A.degree()
