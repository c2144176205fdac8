import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.optimize import linprog

from tdsynth.diophantine import solve_d_minimal
from tdsynth.errors import InfeasibleBoundSpec
from tdsynth.expbounds import bound_constraints, build_exp_bounds, lam_poly, sign_enumeration
from tdsynth.poly import RatPoly
from tdsynth.response import Reference, decompose, time_eval
from tdsynth.sdp import Status
from tdsynth.sos import (INTERVAL, Constraint, Objective, PolyOptProblem, mode_energy, solve,
                         steady_state)
from tdsynth.transfer import PoleSpec

from conftest import Q_BOUNDS

G_U = [1.01, 1.58, 0.38]
G_L = [0.99, -1.58, -0.38]


def _lam_coeffs(p, deg=2):
    return [p.coeff((0, 0, k)) for k in range(deg + 1)]


def test_nominal_upper_bound(step_dec):
    up, lo = build_exp_bounds(step_dec).at([0, 0, 0])
    # printed to two decimals: 0.68 + 1.58 lam + 0.38 lam^2
    assert _lam_coeffs(up) == pytest.approx([0.68, 1.58, 0.38], abs=5e-3)
    assert _lam_coeffs(lo) == pytest.approx([0.68, -1.58, -0.38], abs=5e-3)


def test_optimum_upper_bound(step_dec):
    up, lo = build_exp_bounds(step_dec).at(Q_BOUNDS)
    assert _lam_coeffs(up) == pytest.approx([1.0, 0.0, 1.25], abs=1e-12)
    assert _lam_coeffs(lo) == pytest.approx([1.0, 0.0, -1.25], abs=1e-12)


def test_no_oscillation_bounds_coincide():
    fam = solve_d_minimal(RatPoly([0, 1]), RatPoly([1]), RatPoly([2, 1]) * RatPoly([3, 1]))
    dec, _ = decompose(Reference.step(), fam, PoleSpec(real_poles=(2, 3)))
    b = build_exp_bounds(dec)
    assert b.lifts == ()
    up, lo = b.at([0.5])
    assert up == lo


def test_lift_layout(step_dec):
    b = build_exp_bounds(step_dec)
    assert b.names == ("q0", "q1", "q2", "s_a1", "s_b1", "s_a2", "s_b2")
    assert b.ndec == 7
    assert len(b.lifts) == 8


def test_crossing_bounds_rejected(step_dec):
    with pytest.raises(InfeasibleBoundSpec):
        bound_constraints(build_exp_bounds(step_dec), [0.5], [0.6])


q_vectors = st.lists(st.floats(-40, 40), min_size=3, max_size=3)


@given(q_vectors, st.lists(st.floats(0, 3), min_size=4, max_size=4))
@settings(max_examples=40)
def test_soundness_on_time_grid(step_dec, q, slack):
    # any admissible lift (tight value plus slack) brackets the true response
    b = build_exp_bounds(step_dec)
    lifts = b.lift_values(q) + np.array(slack)
    up, lo = b.at(q, lifts)
    t = np.linspace(0, 20, 10_000)
    lam = np.exp(-t / float(step_dec.m))
    y = time_eval(step_dec, q, t)
    z = 0 * lam
    assert np.all(lo(z, z, lam) - y <= 1e-9)
    assert np.all(y - up(z, z, lam) <= 1e-9)
    # spread identity: upper - lower = 4 sum(s) lam^abar
    spread = up - lo
    assert spread.coeff((0, 0, 1)) == pytest.approx(4 * (lifts[0] + lifts[1]))
    assert spread.coeff((0, 0, 2)) == pytest.approx(4 * (lifts[2] + lifts[3]))


def _bounds_problem(dec, g_u, g_l, objective=None):
    b = build_exp_bounds(dec)
    cons = bound_constraints(b, g_u, g_l)
    obj = objective if objective is not None else Objective.zero(dec.nq)
    return b, PolyOptProblem(b.ndec, obj.embed(b.ndec), cons, 1, b.names)


def test_bounds_problem_feasible_at_optimum(step_dec):
    b, p = _bounds_problem(step_dec, G_U, G_L)
    # the known optimum with tight lifts satisfies every constraint on a dense grid
    z = np.concatenate([Q_BOUNDS, b.lift_values(Q_BOUNDS)])
    lam = np.linspace(0, 1, 2001)
    for c in p.polynomial:
        g = c.g.at(z)
        assert np.min(g(0 * lam, 0 * lam, lam)) >= -1e-12
    for c in p.linear:
        assert c.violation(z) <= 1e-12


def test_wide_bounds_reduce_to_objective(step_dec):
    obj = steady_state(step_dec, 1.0, 1.0)
    b, p = _bounds_problem(step_dec, 1e6, -1e6, obj)
    r = solve(p)
    assert r.status == Status.OPTIMAL and r.certified
    assert step_dec.steady_state()(r.z[:3]) == pytest.approx(1.0, abs=1e-6)


def _lp_grid_oracle(dec, g_u, grid=200):
    """LP in (q, lifts): upper bound below g_u at sampled lam; infeasible => SOS infeasible."""
    b = build_exp_bounds(dec)
    n = b.ndec
    A, rhs = [], []
    gu = lam_poly(g_u)
    for lam in np.linspace(0, 1, grid):
        row = np.zeros(n)
        # upper(lam) is affine in the decisions
        for k in range(n):
            e = np.zeros(n)
            e[k] = 1.0
            row[k] = b.upper.at(e)(0, 0, lam) - b.upper.at(np.zeros(n))(0, 0, lam)
        const = b.upper.at(np.zeros(n))(0, 0, lam)
        A.append(row)
        rhs.append(gu(0, 0, lam) - const)
    for lc in b.lifts:
        A.append(-np.array(lc.lin))
        rhs.append(-lc.rhs)
    return linprog(np.zeros(n), A_ub=np.array(A), b_ub=np.array(rhs),
                   bounds=[(None, None)] * n, method="highs")


def test_zero_upper_bound_infeasible(step_dec):
    lp = _lp_grid_oracle(step_dec, [0.0])
    assert lp.status == 2                      # infeasible even on a finite grid
    b, p = _bounds_problem(step_dec, [0.0], None)
    r = solve(p)
    assert r.status == Status.INFEASIBLE


def test_lp_oracle_accepts_feasible_bounds(step_dec):
    assert _lp_grid_oracle(step_dec, G_U).status == 0


def test_lift_tightness_at_optimum(step_dec):
    obj = steady_state(step_dec, 1.0, 10.0)
    b, p = _bounds_problem(step_dec, G_U, G_L, obj)
    p.objective = p.objective + Objective.linear(np.r_[0, 0, 0, 1e-3, 1e-3, 1e-3, 1e-3])
    r = solve(p)
    assert r.status == Status.OPTIMAL
    q = r.z[:3]
    assert r.z[3:] == pytest.approx(b.lift_values(q), abs=1e-6)


def test_sign_enumeration_agrees(step_dec):
    cons = sign_enumeration(step_dec, G_U, G_L)
    assert len(cons) == 2 * 2 ** 4
    assert all(c.domain == INTERVAL for c in cons)
    obj = steady_state(step_dec, 1.0, 10.0) + mode_energy(step_dec, 1, 2.0)
    r = solve(PolyOptProblem(3, obj, cons, 1))
    assert r.status == Status.OPTIMAL and r.certified
    assert r.z == pytest.approx(Q_BOUNDS, abs=1e-4)


def test_constraint_is_interval_typed(step_dec):
    b = build_exp_bounds(step_dec)
    cons = bound_constraints(b, G_U, G_L)
    assert [type(c) for c in cons[:2]] == [Constraint, Constraint]
    assert cons[0].label == "upper" and cons[1].label == "lower"
