"""Time-domain simulation of closed loops.

This module is an independent check of the modal closed form: signals are
obtained by integrating a state-space realization with the classic fourth
order Runge-Kutta method on a fixed grid, without using residues.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass

import numpy as np

from .errors import StepTooCoarse, UnstableLoop
from .poly import RatPoly, poly_roots
from .transfer import TransferFunction

__all__ = ["Series", "ResponseMetrics", "simulate", "simulate_loop", "metrics",
           "verify_bounds", "time_scales", "realize"]


@dataclass
class Series:
    """Sampled signals on a uniform grid; ``dy`` is the output derivative."""

    t: np.ndarray
    y: np.ndarray
    dy: np.ndarray
    u: np.ndarray = None

    @property
    def dt(self) -> float:
        return float(self.t[1] - self.t[0])

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        cols = ["t", "y"] + (["u"] if self.u is not None else [])
        w.writerow(cols)
        for k in range(len(self.t)):
            row = [repr(float(self.t[k])), repr(float(self.y[k]))]
            if self.u is not None:
                row.append(repr(float(self.u[k])))
            w.writerow(row)
        return buf.getvalue()


@dataclass
class ResponseMetrics:
    steady_state: float
    overshoot: float
    settling_time_2pct: float
    peak: float
    peak_time: float
    settled: bool
    drift: float
    max_violation: float = 0.0

    DRIFT_TOL = 1e-6

    @property
    def drifting(self) -> bool:
        """The signal still moves by more than ``DRIFT_TOL`` in the averaging window."""
        return self.drift > self.DRIFT_TOL

    def to_text(self) -> str:
        st = (f"{self.settling_time_2pct:.6g}" if self.settled
              else f"> {self.settling_time_2pct:.6g} (unsettled)")
        ss = f"{self.steady_state:.6g}" + (f" (drift {self.drift:.3g})" if self.drifting else "")
        return (f"steady state      {ss}\n"
                f"peak              {self.peak:.6g} at t = {self.peak_time:.6g}\n"
                f"overshoot         {self.overshoot:.6g}\n"
                f"settling time 2%  {st}\n"
                f"max violation     {self.max_violation:.6g}\n")


def _as_tf(x) -> TransferFunction:
    if isinstance(x, TransferFunction):
        return x
    return TransferFunction(x.num, x.den)


def _float_coeffs(p: RatPoly) -> np.ndarray:
    return np.array([float(c) for c in p.coeffs])


def realize(G: TransferFunction):
    """Controllable canonical realization ``(A, B, C)`` of a strictly proper ``G``."""
    num, den = _float_coeffs(G.num), _float_coeffs(G.den)
    n = len(den) - 1
    if len(num) > n:
        raise ValueError("realization needs a strictly proper transfer function")
    lead = den[-1]
    den, num = den / lead, num / lead
    A = np.zeros((n, n))
    A[:-1, 1:] = np.eye(n - 1)
    A[-1, :] = -den[:-1]
    B = np.zeros(n)
    B[-1] = 1.0
    C = np.zeros(n)
    C[:len(num)] = num
    return A, B, C


def _poles(p: RatPoly) -> np.ndarray:
    return poly_roots(p) if p.degree() >= 1 else np.zeros(0, dtype=complex)


def time_scales(T: TransferFunction, ref=None):
    """``(fastest, slowest)`` time constants of the loop and reference.

    The fastest uses the pole magnitudes of both; the slowest uses the decay
    rates of the loop poles.
    """
    T = _as_tf(T)
    loop = _poles(T.den)
    mags = list(np.abs(loop[np.abs(loop) > 0]))
    if ref is not None:
        rp = _poles(_as_tf(ref).den)
        mags += list(np.abs(rp[np.abs(rp) > 1e-12]))
    rates = -loop.real
    fastest = 1.0 / max(mags) if mags else 1.0
    slowest = 1.0 / min(rates) if len(rates) and min(rates) > 0 else fastest
    return fastest, slowest


def _check_stable(T: TransferFunction, ref):
    loop = _poles(T.den)
    if len(loop) and np.max(loop.real) >= 0:
        raise UnstableLoop(f"closed-loop pole with real part {np.max(loop.real):.4g} >= 0")
    if ref is not None:
        rp = _poles(_as_tf(ref).den)
        if len(rp) and np.max(rp.real) > 1e-12:
            raise UnstableLoop("reference grows without bound")


def _rk4(A, x0, dt, nsteps):
    """Fixed-step RK4 for ``x' = A x``; returns all states."""
    X = np.empty((nsteps + 1, len(x0)))
    X[0] = x0
    x = x0.copy()
    h2 = dt / 2
    for k in range(nsteps):
        k1 = A @ x
        k2 = A @ (x + h2 * k1)
        k3 = A @ (x + h2 * k2)
        k4 = A @ (x + dt * k3)
        x = x + (dt / 6) * (k1 + 2 * k2 + 2 * k3 + k4)
        X[k + 1] = x
    return X


def _response(G: TransferFunction, dt, nsteps, with_derivative=True):
    """Impulse response ``C exp(A t) B`` of a strictly proper ``G``.

    The derivative ``C A exp(A t) B`` comes for free from the same states.
    """
    A, B, C = realize(G)
    X = _rk4(A, B, dt, nsteps)
    y = X @ C
    dy = X @ (A.T @ C) if with_derivative else None
    return y, dy


def simulate(T, ref, horizon: float = None, dt: float = None) -> Series:
    """Response of the loop ``T`` to the reference ``ref``.

    Parameters
    ----------
    T : TransferFunction
        Proper closed-loop transfer function with strictly stable poles.
    ref : TransferFunction or Reference
        Strictly proper reference transform (step: ``1/s``).
    horizon, dt : float, optional
        Defaults: ten slowest loop time constants and a hundredth of the
        fastest time constant.  ``dt`` is reduced to divide the horizon.

    Raises
    ------
    UnstableLoop
        A loop pole has nonnegative real part.
    StepTooCoarse
        ``dt`` exceeds a tenth of the fastest time constant.
    """
    T = _as_tf(T)
    R = _as_tf(ref)
    if not T.proper():
        raise ValueError("closed loop must be proper")
    if not R.strictly_proper():
        raise ValueError("reference must be strictly proper")
    _check_stable(T, R)
    fastest, slowest = time_scales(T, R)
    if dt is None:
        dt = fastest / 100
    if dt > fastest / 10:
        raise StepTooCoarse(f"dt = {dt:.4g} exceeds fastest time constant / 10 = {fastest / 10:.4g}")
    if horizon is None:
        horizon = 10 * slowest
    # shrink dt slightly so the grid ends exactly at the horizon
    nsteps = int(math.ceil(horizon / dt - 1e-9))
    dt = horizon / nsteps
    G = TransferFunction(T.num * R.num, T.den * R.den)
    y, dy = _response(G, dt, nsteps)
    t = dt * np.arange(nsteps + 1)
    return Series(t, y, dy)


def simulate_loop(P: TransferFunction, C: TransferFunction, ref,
                  horizon: float = None, dt: float = None) -> Series:
    """Output and control signal of the unity feedback loop ``C``-``P``."""
    b, a = P.num, P.den
    d, c = C.num, C.den
    den = a * c + b * d
    Ty = TransferFunction(b * d, den)
    s = simulate(Ty, ref, horizon, dt)
    R = _as_tf(ref)
    # a proper controller makes a d / (a c + b d) proper, so Tu * R is
    # strictly proper for a strictly proper reference
    Gu = TransferFunction(a * d * R.num, den * R.den)
    u, _ = _response(Gu, s.dt, len(s.t) - 1, with_derivative=False)
    s.u = u
    return s


def _hermite(t0, t1, y0, y1, d0, d1):
    """Cubic Hermite interpolant on ``[t0, t1]`` and its derivative."""
    h = t1 - t0

    def f(t):
        s = (t - t0) / h
        return ((2 * s ** 3 - 3 * s ** 2 + 1) * y0 + (s ** 3 - 2 * s ** 2 + s) * h * d0
                + (-2 * s ** 3 + 3 * s ** 2) * y1 + (s ** 3 - s ** 2) * h * d1)

    def df(t):
        s = (t - t0) / h
        return ((6 * s ** 2 - 6 * s) * (y0 - y1) / h + (3 * s ** 2 - 4 * s + 1) * d0
                + (3 * s ** 2 - 2 * s) * d1)

    return f, df


def _bisect(f, a, b, iters=60):
    fa = f(a)
    for _ in range(iters):
        m = (a + b) / 2
        fm = f(m)
        if (fm > 0) == (fa > 0):
            a, fa = m, fm
        else:
            b = m
    return (a + b) / 2


def _refined_peak(s: Series):
    k = int(np.argmax(s.y))
    if k == 0 or k == len(s.t) - 1:
        return float(s.y[k]), float(s.t[k])
    # the derivative changes sign on one of the neighbouring intervals
    j = k - 1 if s.dy[k] < 0 else k
    if not (s.dy[j] >= 0 >= s.dy[j + 1]):
        return float(s.y[k]), float(s.t[k])
    f, df = _hermite(s.t[j], s.t[j + 1], s.y[j], s.y[j + 1], s.dy[j], s.dy[j + 1])
    tp = _bisect(df, s.t[j], s.t[j + 1]) if s.dy[j] > 0 > s.dy[j + 1] else s.t[k]
    return float(max(f(tp), s.y[k])), float(tp)


def _window_mean(t, y, t0):
    """Time average of the sampled signal over ``[t0, t[-1]]`` (trapezoid)."""
    k = int(np.searchsorted(t, t0))
    if k == 0:
        return float(np.trapezoid(y, t) / (t[-1] - t[0]))
    # partial first interval by linear interpolation
    y0 = y[k - 1] + (y[k] - y[k - 1]) * (t0 - t[k - 1]) / (t[k] - t[k - 1])
    area = np.trapezoid(y[k:], t[k:]) + 0.5 * (y0 + y[k]) * (t[k] - t0)
    return float(area / (t[-1] - t0))


def metrics(s: Series, window: float = 0.05, band: float = 0.02) -> ResponseMetrics:
    """Steady state, overshoot, 2% settling time and peak of a sampled output.

    The steady state is the time average over the final ``window`` fraction
    of the horizon; ``drift`` is the spread of the signal there.  Peak and settling
    instants are refined between samples with cubic Hermite interpolation
    using the exact output derivative.
    """
    t0 = s.t[0] + (1 - window) * (s.t[-1] - s.t[0])
    tail = s.y[s.t >= t0]
    ss = _window_mean(s.t, s.y, t0)
    drift = float(np.max(tail) - np.min(tail))
    peak, tpk = _refined_peak(s)
    if ss > 0:
        over = max(0.0, peak / ss - 1.0)
    else:
        over = float(np.max(np.abs(s.y)))
    tol = band * abs(ss) if ss != 0 else band
    out = np.abs(s.y - ss) > tol
    settled = not out[-1]
    if not out.any():
        ts = 0.0
    elif not settled:
        ts = float(s.t[-1])
    else:
        k = int(np.nonzero(out)[0][-1])
        f, _ = _hermite(s.t[k], s.t[k + 1], s.y[k], s.y[k + 1], s.dy[k], s.dy[k + 1])
        g = lambda t: abs(f(t) - ss) - tol  # noqa: E731
        ts = _bisect(g, s.t[k], s.t[k + 1])
    return ResponseMetrics(ss, over, float(ts), peak, tpk, settled, drift)


def verify_bounds(s: Series, g_u=None, g_l=None, m=1, form: str = "lambda") -> float:
    """Largest violation of ``g_l <= y <= g_u`` over the samples (0 if none).

    With ``form="lambda"`` the bounds are coefficient lists in
    ``lam = exp(-t/m)``; with ``form="time"`` they are callables of ``t``.
    """
    t = s.t
    if form == "time":
        gu = None if g_u is None else np.broadcast_to(np.asarray(g_u(t), float), t.shape)
        gl = None if g_l is None else np.broadcast_to(np.asarray(g_l(t), float), t.shape)
    elif form == "lambda":
        lam = np.exp(-t / float(m))
        pv = np.polynomial.polynomial.polyval
        gu = None if g_u is None else pv(lam, np.atleast_1d(np.asarray(g_u, float)))
        gl = None if g_l is None else pv(lam, np.atleast_1d(np.asarray(g_l, float)))
    else:
        raise ValueError(f"unknown bound form {form!r}")
    v = 0.0
    if gu is not None:
        v = max(v, float(np.max(s.y - gu)))
    if gl is not None:
        v = max(v, float(np.max(gl - s.y)))
    return v
