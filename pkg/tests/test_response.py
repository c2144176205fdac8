from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdsynth.diophantine import controller, solve_d_minimal
from tdsynth.errors import DistinctnessViolation, PoleCollision, ScalingFailure
from tdsynth.poly import MultiPoly, RatPoly, solve_exact
from tdsynth.response import (Reference, decompose, demoivre, rationalize_exponents,
                              time_eval, to_multipoly)
from tdsynth.transfer import PoleSpec, closed_loop

from conftest import POLES, Q_BOUNDS, Q_PEAK

RESIDUE_A = ((100, 0, 0, 0, 0),
             (60, 40, 80, 20, 40),
             (33, 48, 16, 18, 16),
             (6, 10, 4, 8, 8),
             (1, 2, 0, 2, 0))
RESIDUE_B = ((-1, 0, 0), (-1, -1, 0), (0, -1, -1), (0, 0, -1), (0, 0, 0))
RESIDUE_b = (68, 0, 0, 0, 0)

q_vectors = st.lists(st.fractions(min_value=-40, max_value=40, max_denominator=10),
                     min_size=3, max_size=3)


def test_residue_system_exact(step_lrs):
    assert step_lrs.A == RESIDUE_A
    assert step_lrs.B == RESIDUE_B
    assert step_lrs.b == RESIDUE_b
    assert all(isinstance(x, Fraction) for row in step_lrs.A for x in row)


def test_nominal_steady_state(step_dec):
    assert step_dec.real_modes[0].p == 0
    assert step_dec.real_modes[0].y([0, 0, 0]) == Fraction(68, 100)


def test_first_order_lag_residues():
    # plant 1/s, pole 2: T = 2/(s+2), step response 1/s - 1/(s+2)
    fam = solve_d_minimal(RatPoly([0, 1]), RatPoly([1]), RatPoly([2, 1]) * RatPoly([3, 1]))
    C = controller(fam, [0])
    T = closed_loop(fam.plant(), C)
    assert T.den == RatPoly([6, 5, 1])
    spec = PoleSpec(real_poles=(2, 3))
    dec, _ = decompose(Reference.step(), fam, spec)
    ys = {md.p: md.y([0]) for md in dec.real_modes}
    assert sum(ys.values()) == 0                         # y(0) = 0
    assert ys[0] == T.dc_gain()


@given(q_vectors)
@settings(max_examples=50)
def test_residue_formula_matches_linear_system(step_dec, step_lrs, q):
    coeffs = [ac(q) for ac in step_dec.coefficient_vector()]
    rhs = [sum(b * x for b, x in zip(row, q)) + c for row, c in zip(step_lrs.B, step_lrs.b)]
    assert solve_exact(step_lrs.A, rhs) == coeffs


def test_scaling_parameters(step_dec):
    assert step_dec.m == 1
    assert step_dec.abar == (1, 2)
    assert step_dec.bbar == (1, 2)
    assert step_dec.theta == 2
    dec1 = rationalize_exponents(step_dec, 1)
    assert dec1.theta == 1 and dec1.bbar == (2, 4)


def test_minimal_time_scale():
    fam = solve_d_minimal(RatPoly([0, 1]), RatPoly([1]),
                          RatPoly([1, 1]) * RatPoly([Fraction(1, 2), 1]))
    spec = PoleSpec(real_poles=(1, Fraction(1, 2)))
    ref = Reference(RatPoly([1]), PoleSpec(real_poles=(Fraction(1, 4),)))
    dec, _ = decompose(ref, fam, spec)
    # brute force over m = n/k: the smallest positive m making every p*m an integer
    rates = [md.p for md in dec.real_modes]
    cands = sorted({Fraction(n, k) for n in range(1, 20) for k in range(1, 20)})
    m = next(c for c in cands if all((p * c).denominator == 1 for p in rates))
    assert dec.m == m == 4
    assert dec.pbar == (1, 4, 2)


def test_integer_pole_keeps_unit_scale():
    fam = solve_d_minimal(RatPoly([0, 1]), RatPoly([1]), RatPoly([3, 1]) * RatPoly([4, 1]))
    dec, _ = decompose(Reference(RatPoly([1]), PoleSpec(real_poles=(1,))), fam,
                       PoleSpec(real_poles=(3, 4)))
    assert dec.m == 1
    assert dec.pbar == (1, 3, 4)


def test_scaling_failure(step_dec):
    with pytest.raises(ScalingFailure):
        rationalize_exponents(step_dec, Fraction(3))


def test_pole_collision(family):
    ref = Reference(RatPoly([1]), PoleSpec(complex_pairs=((1, 2),)))
    with pytest.raises(PoleCollision):
        decompose(ref, family, POLES)


def test_repeated_pole_rejected():
    with pytest.raises(DistinctnessViolation):
        PoleSpec(real_poles=(2, 2))


def test_optimized_loop_settles(step_dec):
    assert time_eval(step_dec, Q_BOUNDS, 60.0) == pytest.approx(1.0, abs=1e-12)


def test_initial_value_zero(step_dec):
    for q in ([0, 0, 0], Q_BOUNDS, [float(x) for x in Q_PEAK]):
        assert time_eval(step_dec, q, 0.0) == pytest.approx(0.0, abs=1e-12)


def test_tabulated_peak(step_dec):
    t = np.linspace(0, 10, 200001)
    y = time_eval(step_dec, [float(x) for x in Q_PEAK], t)
    assert y.max() == pytest.approx(1.0714, abs=5e-5)


def test_demoivre():
    u, v, _ = MultiPoly.uvl()
    assert demoivre(1) == (u, v)
    assert demoivre(2) == (u * u - v * v, 2 * u * v)
    w4, r4 = demoivre(4)
    assert w4 == u ** 4 + v ** 4 - 6 * u ** 2 * v ** 2
    assert r4 == 4 * v * u ** 3 - 4 * u * v ** 3


def test_multivariate_form(family):
    dec, _ = decompose(Reference.step(), family, POLES, theta=1)
    y = to_multipoly(dec)
    u, v, lam = MultiPoly.uvl()
    q = [1.5, -2.0, 0.25]
    y0, a1, b1, a2, b2 = (ac(q) for ac in dec.coefficient_vector())
    want = (y0 + (2 * a1 * (u * u - v * v) + 4 * b1 * u * v) * lam
            + (2 * a2 * (u ** 4 + v ** 4 - 6 * u * u * v * v)
               + 8 * b2 * (v * u ** 3 - u * v ** 3)) * lam ** 2)
    assert y.at(q).allclose(want, atol=1e-12)


@given(q_vectors, st.sampled_from([None, 1]))
@settings(max_examples=20, deadline=None)
def test_curve_representation(family, q, theta):
    dec, _ = decompose(Reference.step(), family, POLES, theta=theta)
    q = [float(x) for x in q]
    y = to_multipoly(dec, q)
    t = np.linspace(0, 20 * float(dec.m), 1000)
    tau = t / float(dec.m)
    th = float(dec.theta)
    on_curve = y(np.cos(th * tau), np.sin(th * tau), np.exp(-tau))
    assert np.max(np.abs(on_curve - time_eval(dec, q, t))) <= 1e-9 * (1 + np.abs(on_curve).max())


@given(q_vectors)
@settings(max_examples=30)
def test_coefficients_real(step_dec, q):
    for ac in step_dec.coefficient_vector():
        assert isinstance(ac(q), Fraction)


def test_control_signal(family):
    dec, _ = decompose(Reference.step(), family, POLES, signal="control")
    y_dec, _ = decompose(Reference.step(), family, POLES)
    q = [Fraction(x) for x in Q_BOUNDS]
    # final value: u = y * a(0) / b(0) = y
    assert dec.steady_state()(q) == y_dec.steady_state()(q)
    # initial value theorem: u(0+) = lc(a) lc(d) / lc(z) = 3 for d = 3s^3 + ...
    assert time_eval(dec, Q_BOUNDS, 0.0) == pytest.approx(3.0, abs=1e-12)
