import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from tdsynth.sdp import SdpBuilder, Status, solve_sdp


def _max_eig_problem(C):
    """min lam s.t. lam I - C = X, X PSD."""
    n = len(C)
    b = SdpBuilder()
    lam = b.add_free(1, "lam")[0]
    X = b.add_block(n)
    for i in range(n):
        for j in range(i, n):
            b.add_row({lam: -1.0} if i == j else None, [(X, i, j, 1.0)], -C[i][j])
    b.minimize(lam)
    return b.build()


def test_scalar_lower_bound():
    b = SdpBuilder()
    x = b.add_free(1, "x")[0]
    s = b.add_block(1)
    b.add_row({x: 1.0}, [(s, 0, 0, -1.0)], 1.0)       # x - s = 1, s >= 0
    b.minimize(x)
    sol = solve_sdp(b.build())
    assert sol.status == Status.OPTIMAL
    assert sol.w[x] == pytest.approx(1.0, abs=1e-7)
    assert sol.objective == pytest.approx(1.0, abs=1e-7)


def test_two_by_two_block():
    b = SdpBuilder()
    w = b.add_free(1)[0]
    X = b.add_block(2)
    b.add_row({w: -1.0}, [(X, 0, 0, 1.0)], 0.0)
    b.add_row({w: -1.0}, [(X, 1, 1, 1.0)], 0.0)
    b.add_row(None, [(X, 0, 1, 1.0)], 1.0)
    b.minimize(w)
    sol = solve_sdp(b.build())
    assert sol.status == Status.OPTIMAL
    assert sol.w[w] == pytest.approx(1.0, abs=1e-6)
    assert np.allclose(sol.X[X], [[1, 1], [1, 1]], atol=1e-5)


def test_infeasible():
    b = SdpBuilder()
    s1, s2 = b.add_block(1), b.add_block(1)
    b.add_row(None, [(s1, 0, 0, 1.0), (s2, 0, 0, 1.0)], -1.0)
    assert solve_sdp(b.build()).status == Status.INFEASIBLE


def test_unbounded():
    b = SdpBuilder()
    x = b.add_free(1)[0]
    s = b.add_block(1)
    b.add_row({x: 1.0}, [(s, 0, 0, 1.0)], 0.0)          # x = -s <= 0
    b.minimize(x)
    assert solve_sdp(b.build()).status == Status.UNBOUNDED


def test_empty_row_with_rhs_infeasible():
    b = SdpBuilder()
    b.add_free(1)
    b.add_row(None, None, 1.0)
    assert solve_sdp(b.build()).status == Status.INFEASIBLE


def test_redundant_rows_dropped():
    b = SdpBuilder()
    x = b.add_free(1)[0]
    s = b.add_block(1)
    for _ in range(3):
        b.add_row({x: 1.0}, [(s, 0, 0, -1.0)], 2.0)
    b.minimize(x)
    sol = solve_sdp(b.build())
    assert sol.status == Status.OPTIMAL
    assert sol.w[x] == pytest.approx(2.0, abs=1e-7)


def test_inconsistent_rows_infeasible():
    b = SdpBuilder()
    x = b.add_free(1)[0]
    s = b.add_block(1)
    b.add_row({x: 1.0}, [(s, 0, 0, -1.0)], 2.0)
    b.add_row({x: 1.0}, [(s, 0, 0, -1.0)], 3.0)
    b.minimize(x)
    assert solve_sdp(b.build()).status == Status.INFEASIBLE


def test_dependent_free_variables():
    # only w0 + w1 is determined; the objective depends on that sum only
    b = SdpBuilder()
    w0, w1 = b.add_free(2)
    s = b.add_block(1)
    b.add_row({w0: 1.0, w1: 1.0}, [(s, 0, 0, -1.0)], 1.0)
    b.minimize(w0)
    b.minimize(w1)
    sol = solve_sdp(b.build())
    assert sol.status == Status.OPTIMAL
    assert sol.w[w0] + sol.w[w1] == pytest.approx(1.0, abs=1e-7)


def test_dependent_free_variables_unbounded():
    b = SdpBuilder()
    w0, w1 = b.add_free(2)
    s = b.add_block(1)
    b.add_row({w0: 1.0, w1: 1.0}, [(s, 0, 0, -1.0)], 1.0)
    b.minimize(w0)
    assert solve_sdp(b.build()).status == Status.UNBOUNDED


def test_text_export():
    P = _max_eig_problem([[2.0, 1.0], [1.0, 3.0]])
    text = P.to_text()
    assert text.startswith("nrows 3\nnfree 1\nblocks 2\n")
    assert "X 1 0 0 1 1.0" in text
    assert P.nscalar == 1 + 3


def test_residual_and_gap():
    P = _max_eig_problem([[2.0, 1.0], [1.0, 3.0]])
    sol = solve_sdp(P)
    assert sol.status == Status.OPTIMAL
    assert np.max(np.abs(P.residual(sol.w, sol.X))) <= 1e-7
    assert sol.relative_gap <= 1e-7
    assert min(np.linalg.eigvalsh(sol.X[0])) >= -1e-7


def test_deterministic():
    P = _max_eig_problem([[1.0, 0.3, 0.0], [0.3, -2.0, 0.5], [0.0, 0.5, 0.7]])
    a, b = solve_sdp(P), solve_sdp(P)
    assert np.array_equal(a.w, b.w)


sym = arrays(np.float64, (4, 4), elements=st.floats(-5, 5)).map(lambda A: (A + A.T) / 2)


@given(sym)
@settings(max_examples=25, deadline=None)
def test_max_eigenvalue_oracle(C):
    sol = solve_sdp(_max_eig_problem(C.tolist()))
    assert sol.status == Status.OPTIMAL
    assert sol.w[0] == pytest.approx(np.linalg.eigvalsh(C)[-1], abs=1e-6)
