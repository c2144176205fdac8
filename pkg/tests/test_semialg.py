import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tdsynth.errors import ApproximationBudgetExceeded
from tdsynth.poly import MultiPoly
from tdsynth.semialg import (Overapprox, _periodic_extension, build_overapprox, coverage,
                             fourier_coefficients, hermite_bridge, membership, precomputed,
                             trig_to_poly)

EPS = math.exp(-1.5 * math.pi)


@pytest.fixture(scope="module")
def built():
    return build_overapprox(EPS, 0.75 * math.pi, theta=1)


def test_interval_layout(built):
    assert built.N == 2
    assert built.tau_grid[:3] == pytest.approx((0.0, 0.75 * math.pi, 1.5 * math.pi))
    assert math.isinf(built.tau_grid[3])
    assert built.Tbar == pytest.approx(0.75 * math.pi)
    assert [r.label for r in built.regions] == ["F0", "F1", "F2"]


def test_uniform_fit_on_each_interval(built):
    for l in range(built.N):
        t = np.linspace(built.tau_grid[l], built.tau_grid[l + 1], 4001)
        psi = built.psis[l](np.cos(t), np.sin(t), 0 * t)
        assert np.max(np.abs(psi - np.exp(-t))) <= EPS - built.band + 1e-12


def test_coarse_tolerance_few_regions():
    o = build_overapprox(0.9, 0.1)
    assert o.N == math.ceil(-math.log(0.9) / 0.1) == 2
    assert max(o.degrees) <= 2
    # oracle: direct uniform-error measurement
    for l in range(o.N):
        t = np.linspace(o.tau_grid[l], o.tau_grid[l + 1], 2001)
        err = np.abs(o.psis[l](np.cos(t), np.sin(t), 0 * t) - np.exp(-t)).max()
        assert err <= 0.45 + 1e-12


def test_start_point_in_first_region(built):
    assert 0 in membership(built, (1.0, 0.0, 1.0))
    assert 0 in membership(precomputed(), (1.0, 0.0, 1.0))


def test_half_plane_cut(built):
    # the curve point at the start of the second arc lies on both cuts
    t = 0.75 * math.pi
    assert membership(built, (math.cos(t), math.sin(t), math.exp(-t))) >= {1}
    # opposite angle, right height: excluded by the cut of F1
    t2 = 0.25 * math.pi
    assert 1 not in membership(built, (math.cos(t2), math.sin(t2), math.exp(-t)))


def test_budget_exceeded():
    with pytest.raises(ApproximationBudgetExceeded):
        build_overapprox(1e-4, 2.0, K_max=2)


def test_invalid_arguments():
    with pytest.raises(ValueError):
        build_overapprox(1.5, 1.0)
    with pytest.raises(ValueError):
        build_overapprox(0.1, 7.0)


def test_precomputed_table():
    o = precomputed()
    u, v, _ = MultiPoly.uvl()
    psi0 = (0.398 * u - 0.971 * v + 0.616 * u * u - 0.192 * u * v + 1.179 * v * v
            - 0.015 * u ** 3 + 0.184 * u * u * v)
    psi1 = (0.033 * u + 0.096 * v + 0.076 * u * u + 0.0534 * u * v + 0.094 * v * v
            + 0.013 * u * v * v - 0.011 * v ** 3)
    assert o.psis[0].allclose(psi0, atol=1e-15)
    assert o.psis[1].allclose(psi1, atol=1e-15)
    assert o.eps == pytest.approx(EPS) and o.theta == 1 and o.N == 2


def test_precomputed_psi0_point():
    psi0 = precomputed().psis[0]
    assert abs(psi0(math.cos(0.3), math.sin(0.3), 0) - math.exp(-0.3)) <= 0.009


def test_precomputed_psi1_sweep():
    psi1 = precomputed().psis[1]
    t = np.linspace(0.75 * math.pi, 1.5 * math.pi, 512)
    assert np.abs(psi1(np.cos(t), np.sin(t), 0 * t) - np.exp(-t)).max() <= 0.009


def test_tail_membership():
    assert 2 in membership(precomputed(), (0.0, 1.0, 0.001))
    assert 2 not in membership(precomputed(), (0.0, 1.0, 0.02))


def test_serialization_roundtrip(built):
    again = Overapprox.from_text(built.to_text())
    assert again.N == built.N
    assert again.tau_grid == pytest.approx(built.tau_grid)
    for a, b in zip(again.psis, built.psis):
        assert a.allclose(b, atol=1e-15)
    assert again.to_text() == built.to_text()


def test_regions_basic_semialgebraic(built):
    for r in built.regions:
        assert all(isinstance(p, MultiPoly) for p in r.eqs + r.ineqs)
        u, v, _ = MultiPoly.uvl()
        assert (u * u + v * v - 1) in r.eqs


def test_hermite_bridge_matches_ends():
    f = hermite_bridge(1.0, (2.0, -1.0, 0.5), 3.0, (0.5, 0.25, -2.0))
    h = 1e-4
    assert f(1.0) == pytest.approx(2.0) and f(3.0) == pytest.approx(0.5)
    assert (f(1.0 + h) - f(1.0 - h)) / (2 * h) == pytest.approx(-1.0, abs=1e-6)
    assert (f(3.0 + h) - f(3.0 - h)) / (2 * h) == pytest.approx(0.25, abs=1e-6)
    d2 = (f(3.0 + h) - 2 * f(3.0) + f(3.0 - h)) / h ** 2
    assert d2 == pytest.approx(-2.0, abs=1e-3)


def test_periodic_extension_is_c1():
    phi = _periodic_extension(0.0, 2.0, 2 * math.pi)
    assert phi(1.0) == pytest.approx(math.exp(-1.0))
    assert phi(1.0 + 2 * math.pi) == pytest.approx(math.exp(-1.0))
    h = 1e-6
    for x in (2.0, 2 * math.pi):
        left = (phi(x) - phi(x - h)) / h
        right = (phi(x + h) - phi(x)) / h
        assert left == pytest.approx(right, abs=1e-4)


@pytest.mark.parametrize("interval", [0, 1])
def test_fourier_error_nonincreasing(built, interval):
    t0, t1 = built.tau_grid[interval], built.tau_grid[interval + 1]
    a, b = fourier_coefficients(_periodic_extension(t0, t1, 2 * math.pi), t0, 2 * math.pi, 30)
    t = np.linspace(t0, t1, 2050)
    errs = []
    partial = np.full_like(t, a[0])
    for K in range(1, 31):
        partial = partial + a[K] * np.cos(K * t) + b[K] * np.sin(K * t)
        errs.append(np.abs(partial - np.exp(-t)).max())
    assert np.all(np.diff(errs) <= 1e-15)


@given(st.lists(st.floats(-2, 2), min_size=1, max_size=6),
       st.lists(st.floats(-2, 2), min_size=6, max_size=6),
       st.floats(0, 2 * math.pi))
@settings(max_examples=50)
def test_trig_rewrite(a, b, phi):
    b = [0.0] + b[:len(a) - 1]
    psi = trig_to_poly(a, b)
    direct = sum(a[k] * math.cos(k * phi) + b[k] * math.sin(k * phi) for k in range(len(a)))
    assert psi(math.cos(phi), math.sin(phi), 0) == pytest.approx(direct, abs=1e-9)


def test_coverage_smoke(built):
    c = coverage(built, samples=5000, seed=1)
    assert c.all_covered
    assert c.max_distance <= built.eps
