"""Finite semialgebraic overapproximation of the cylinder curve.

The curve ``{(cos(theta tau), sin(theta tau), exp(-tau)) : tau >= 0}`` is not
semialgebraic.  It is covered by a union of basic semialgebraic regions: one
per time interval ``[tau_l, tau_{l+1})`` where ``exp(-tau)`` is replaced by a
trigonometric polynomial ``psi_l(cos, sin)`` plus a band, and a tail region
``0 <= lam <= eps`` for ``tau >= -ln(eps)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ApproximationBudgetExceeded
from .poly import MultiPoly
from .response import demoivre

__all__ = [
    "Region",
    "Overapprox",
    "build_overapprox",
    "precomputed",
    "membership",
    "hermite_bridge",
    "fourier_coefficients",
    "trig_to_poly",
    "Coverage",
    "coverage",
]

_U, _V, _L = MultiPoly.uvl()
_CIRCLE = _U * _U + _V * _V - 1.0


@dataclass(frozen=True)
class Region:
    """Basic semialgebraic set ``{eqs == 0, ineqs >= 0}`` in ``(u, v, lam)``.

    ``arc`` records the time interval the region was built for (``tau_hi``
    is ``inf`` for the tail) and is only used for sampling and reports.
    """

    eqs: tuple
    ineqs: tuple
    arc: tuple = (0.0, math.inf)
    label: str = ""

    def contains(self, u, v, lam, tol: float = 1e-9):
        ok = np.ones(np.broadcast(u, v, lam).shape, dtype=bool)
        for f in self.eqs:
            ok &= np.abs(f(u, v, lam)) <= tol
        for e in self.ineqs:
            ok &= e(u, v, lam) >= -tol
        return ok

    def to_text(self) -> str:
        lines = [f"region {self.label} tau in [{self.arc[0]!r}, {self.arc[1]!r})"]
        lines += [f"  eq   {f.to_text()} = 0" for f in self.eqs]
        lines += [f"  ineq {e.to_text()} >= 0" for e in self.ineqs]
        return "\n".join(lines)


@dataclass(frozen=True)
class Overapprox:
    """Union of regions covering the curve within vertical distance ``eps``."""

    regions: tuple
    eps: float
    theta: float
    Tbar: float
    tau_grid: tuple
    psis: tuple
    band: float
    fit_errors: tuple = field(default=(), compare=False)

    @property
    def N(self) -> int:
        return len(self.regions) - 1

    @property
    def degrees(self) -> tuple:
        return tuple(p.degree() for p in self.psis)

    def to_text(self) -> str:
        """Structured text dump; :func:`from_text` reads it back."""
        out = [
            "overapprox v1",
            f"eps {self.eps!r}",
            f"theta {self.theta!r}",
            f"Tbar {self.Tbar!r}",
            f"band {self.band!r}",
            "tau " + " ".join(repr(t) for t in self.tau_grid),
        ]
        for l, p in enumerate(self.psis):
            out.append(f"psi {l} {p.to_text()}")
        for r in self.regions:
            out.append(r.to_text())
        return "\n".join(out) + "\n"

    @classmethod
    def from_text(cls, text: str) -> Overapprox:
        vals = {}
        psis = []
        for line in text.splitlines():
            key, _, rest = line.partition(" ")
            if key in ("eps", "theta", "Tbar", "band"):
                vals[key] = float(rest)
            elif key == "tau":
                vals["tau"] = tuple(float(x) for x in rest.split())
            elif key == "psi":
                _, _, poly = rest.partition(" ")
                psis.append(MultiPoly.parse(poly))
        return _assemble(vals["eps"], vals["theta"], vals["tau"], psis, vals["band"])


def _halfplane(theta: float, t0: float, t1: float) -> MultiPoly:
    """``-E >= 0`` where ``E <= 0`` selects the arc from ``theta t0`` to ``theta t1``."""
    C0, S0 = math.cos(theta * t0), math.sin(theta * t0)
    C1, S1 = math.cos(theta * t1), math.sin(theta * t1)
    E = _U * (S0 - S1) + _V * (C1 - C0) + (S1 * C0 - C1 * S0)
    return -E


def _assemble(eps, theta, tau_grid, psis, band, fit_errors=()) -> Overapprox:
    N = len(psis)
    regions = []
    for l, psi in enumerate(psis):
        t0, t1 = tau_grid[l], tau_grid[l + 1]
        ineqs = (
            band - (_L - psi),
            band + (_L - psi),
            _halfplane(theta, t0, t1),
        )
        regions.append(Region((_CIRCLE,), ineqs, (t0, t1), f"F{l}"))
    regions.append(Region((_CIRCLE,), (_L, eps - _L), (tau_grid[N], math.inf), f"F{N}"))
    Tbar = tau_grid[N] / N if N else 0.0
    return Overapprox(tuple(regions), float(eps), float(theta), Tbar,
                      tuple(tau_grid), tuple(psis), float(band), tuple(fit_errors))


def precomputed() -> Overapprox:
    """Tabulated three-region overapproximation for ``theta = 1``.

    ``eps = exp(-1.5 pi)``, two cubic ``psi`` polynomials on
    ``[0, 0.75 pi)`` and ``[0.75 pi, 1.5 pi)`` plus the tail.
    """
    psi0 = (0.398 * _U - 0.971 * _V + 0.616 * _U * _U - 0.192 * _U * _V
            + 1.179 * _V * _V - 0.015 * _U ** 3 + 0.184 * _U * _U * _V)
    psi1 = (0.033 * _U + 0.096 * _V + 0.0760 * _U * _U + 0.0534 * _U * _V
            + 0.094 * _V * _V + 0.013 * _U * _V * _V - 0.011 * _V ** 3)
    eps = math.exp(-1.5 * math.pi)
    grid = (0.0, 0.75 * math.pi, 1.5 * math.pi, math.inf)
    return _assemble(eps, 1.0, grid, [psi0, psi1], eps)


# ---------------------------------------------------------------------------
# construction


def hermite_bridge(x0, f0, x1, f1):
    """Quintic on ``[x0, x1]`` matching value, slope and curvature at both ends.

    ``f0`` and ``f1`` are ``(value, d1, d2)`` triples.  Returns a vectorized
    callable.
    """
    h = x1 - x0
    # solve for the coefficients of p(s) = sum c_k s^k on s = (x - x0) / h
    y0 = np.array([f0[0], f0[1] * h, f0[2] * h * h])
    y1 = np.array([f1[0], f1[1] * h, f1[2] * h * h])
    c0, c1, c2 = y0[0], y0[1], y0[2] / 2
    M = np.array([[1, 1, 1], [3, 4, 5], [6, 12, 20]], dtype=float)
    rhs = np.array([
        y1[0] - (c0 + c1 + c2),
        y1[1] - (c1 + 2 * c2),
        y1[2] - 2 * c2,
    ])
    c3, c4, c5 = np.linalg.solve(M, rhs)
    coef = np.array([c5, c4, c3, c2, c1, c0])

    def bridge(x):
        return np.polyval(coef, (np.asarray(x, dtype=float) - x0) / h)

    return bridge


def _periodic_extension(t0: float, t1: float, period: float):
    """C2 periodic function equal to ``exp(-tau)`` on ``[t0, t1]``."""
    e0, e1 = math.exp(-t0), math.exp(-t1)
    bridge = hermite_bridge(t1, (e1, -e1, e1), t0 + period, (e0, -e0, e0))

    def phi(tau):
        tau = np.asarray(tau, dtype=float)
        x = t0 + np.mod(tau - t0, period)
        return np.where(x <= t1, np.exp(-np.minimum(x, t1)), bridge(x))

    return phi


def fourier_coefficients(phi, t0: float, period: float, kmax: int, panels: int = 4096):
    """Real Fourier coefficients of a ``period``-periodic function.

    Composite Simpson quadrature over ``[t0, t0 + period]``; returns arrays
    ``a[0..kmax]``, ``b[0..kmax]`` with ``phi ~ a0 + sum a_k cos + b_k sin``
    in the angle ``2 pi tau / period``.  Coefficients below ``1e-13`` are
    zeroed.
    """
    if panels % 2:
        panels += 1
    x = np.linspace(t0, t0 + period, panels + 1)
    w = np.ones(panels + 1)
    w[1:-1:2] = 4
    w[2:-1:2] = 2
    w *= (period / panels) / 3
    f = phi(x) * w
    omega = 2 * math.pi / period
    k = np.arange(kmax + 1)[:, None]
    a = (2 / period) * (np.cos(k * omega * x) @ f)
    b = (2 / period) * (np.sin(k * omega * x) @ f)
    a[0] /= 2
    b[0] = 0.0
    a[np.abs(a) < 1e-13] = 0.0
    b[np.abs(b) < 1e-13] = 0.0
    return a, b


def trig_to_poly(a, b) -> MultiPoly:
    """Rewrite ``sum a_k cos(k phi) + b_k sin(k phi)`` as ``psi(cos phi, sin phi)``."""
    out = MultiPoly.const(float(a[0]))
    for k in range(1, len(a)):
        if a[k] == 0 and b[k] == 0:
            continue
        w, r = demoivre(k)
        out = out + w * float(a[k]) + r * float(b[k])
    return out


def build_overapprox(eps: float, T: float, theta=1.0, K_max: int = 40,
                     fit_fraction: float = 0.5, grid_points: int = 2048,
                     panels: int = 4096) -> Overapprox:
    """Construct an ``eps``-close overapproximation of the cylinder curve.

    Parameters
    ----------
    eps : float
        Vertical accuracy, ``0 < eps < 1``.
    T : float
        Desired interval length, ``0 < T < 2 pi / theta``; the actual length
        is ``Tbar = -ln(eps) / N <= T``.
    theta : float
        Angular scaling of the cylinder coordinates.
    K_max : int
        Largest admissible Fourier degree per interval.
    fit_fraction : float
        Share of ``eps`` spent on the Fourier fit; the rest is the band
        half-width, so points of every region stay within ``eps`` of the
        curve while the curve itself stays inside the band.

    Raises
    ------
    ApproximationBudgetExceeded
        Some interval needs a degree above ``K_max``; shrink ``T``.
    """
    theta = float(theta)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    period = 2 * math.pi / theta
    if not 0 < T < period:
        raise ValueError("T must lie in (0, 2 pi / theta)")
    if not 0 < fit_fraction < 1:
        raise ValueError("fit_fraction must lie in (0, 1)")
    tol = fit_fraction * eps
    band = eps - tol
    tau_N = -math.log(eps)
    N = math.ceil(tau_N / T)
    Tbar = tau_N / N
    grid = tuple(l * Tbar for l in range(N)) + (tau_N, math.inf)

    psis, errors = [], []
    for l in range(N):
        t0, t1 = grid[l], grid[l + 1]
        phi = _periodic_extension(t0, t1, period)
        a, b = fourier_coefficients(phi, t0, period, K_max, panels)
        tt = np.linspace(t0, t1, grid_points + 2)
        target = np.exp(-tt)
        ang = theta * tt
        partial = np.full_like(tt, a[0])
        for K in range(1, K_max + 1):
            partial = partial + a[K] * np.cos(K * ang) + b[K] * np.sin(K * ang)
            err = float(np.max(np.abs(partial - target)))
            if err <= tol:
                break
        else:
            raise ApproximationBudgetExceeded(
                f"interval {l}: degree {K_max} leaves error {err:.3g} > {tol:.3g}")
        psis.append(trig_to_poly(a[:K + 1], b[:K + 1]))
        errors.append(err)
    return _assemble(eps, theta, grid, psis, band, errors)


def membership(o: Overapprox, point, tol: float = 1e-9) -> set:
    """Indices of the regions containing ``point = (u, v, lam)``."""
    u, v, lam = point
    return {i for i, r in enumerate(o.regions) if bool(r.contains(u, v, lam, tol))}


@dataclass(frozen=True)
class Coverage:
    """Sampled checks of the two defining properties of an overapproximation."""

    samples: int
    covered: int
    max_distance: float
    eps: float

    @property
    def all_covered(self) -> bool:
        return self.covered == self.samples

    def to_text(self) -> str:
        return (f"curve samples covered   {self.covered} / {self.samples}\n"
                f"max vertical distance   {self.max_distance:.6g} (eps = {self.eps:.6g})\n")


def coverage(o: Overapprox, samples: int = 100_000, seed: int = 0,
             tau_max: float = None, tol: float = 1e-9) -> Coverage:
    """Monte Carlo check of containment and closeness.

    Curve points ``(cos theta tau, sin theta tau, exp(-tau))`` with ``tau``
    uniform on ``[0, tau_max]`` must all lie in some region.  Region points
    (sampled on each region's arc with ``lam`` uniform over the region's
    ``lam`` range) must lie within ``eps`` of the curve in ``lam``; the
    largest such distance is reported.
    """
    rng = np.random.default_rng(seed)
    tau_max = tau_max if tau_max is not None else 2 * o.tau_grid[o.N] + 10
    tau = rng.uniform(0, tau_max, samples)
    u, v, lam = np.cos(o.theta * tau), np.sin(o.theta * tau), np.exp(-tau)
    inside = np.zeros(samples, dtype=bool)
    for r in o.regions:
        inside |= r.contains(u, v, lam, tol)

    per = max(1, samples // len(o.regions))
    worst = 0.0
    period = 2 * math.pi / o.theta
    for l, r in enumerate(o.regions):
        t0, t1 = r.arc
        if math.isinf(t1):
            t = rng.uniform(t0, t0 + period, per)
            lo, hi = np.zeros(per), np.full(per, o.eps)
        else:
            t = rng.uniform(t0, t1, per)
            psi = o.psis[l](np.cos(o.theta * t), np.sin(o.theta * t), 0 * t)
            lo, hi = psi - o.band, psi + o.band
        pl = rng.uniform(lo, hi)
        # nearest curve point with the same angle: tau' = t + k * period
        k = np.round((-np.log(np.maximum(pl, 1e-300)) - t) / period)
        k = np.maximum(k, -np.floor(t / period))
        cands = [t + (k + j) * period for j in (-1, 0, 1)]
        d = np.min([np.where(c >= 0, np.abs(pl - np.exp(-np.maximum(c, 0))), np.inf)
                    for c in cands], axis=0)
        worst = max(worst, float(np.max(d)))
    return Coverage(samples, int(inside.sum()), worst, o.eps)
