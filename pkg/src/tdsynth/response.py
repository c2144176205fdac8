"""Modal decomposition of closed-loop signals, affine in ``q``.

For a reference ``r = ref_num / ref_den`` and a Youla-Kucera family, a loop
signal has the Laplace transform

    x(s, q) = G_0(s) + sum_k q_k G_k(s)

with common denominator ``D = ref_den * z``.  Because every pole of ``D`` is
simple, each mode's residue is ``N(pole) / D'(pole)`` and the residues of the
basis functions ``G_0, G_1, ...`` give the affine dependence on ``q``
directly.  Complex pairs ``-alpha +/- j beta`` are stored through
``a + j b = Res(x, -alpha - j beta)`` so that the mode reads
``exp(-alpha t) (2 a cos(beta t) + 2 b sin(beta t))``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import reduce

import numpy as np

from .diophantine import YoulaFamily
from .errors import (DistinctnessViolation, ImproperSignal, PoleCollision,
                     ScalingFailure)
from .poly import AffinePoly, MultiPoly, QComplex, RatPoly, format_fraction, to_fraction
from .transfer import PoleSpec, target_poly

__all__ = [
    "AffineCoeff",
    "Reference",
    "RealMode",
    "ComplexMode",
    "ModalDecomposition",
    "LinearResidueSystem",
    "decompose",
    "rationalize_exponents",
    "time_eval",
    "to_multipoly",
    "demoivre",
    "SIGNALS",
]

SIGNALS = ("output", "control", "error")


@dataclass(frozen=True)
class AffineCoeff:
    """Scalar ``c0 + lin . q`` with exact rational data."""

    c0: Fraction
    lin: tuple

    def __call__(self, q):
        q = list(q)
        if len(q) != len(self.lin):
            raise ValueError(f"expected {len(self.lin)} q-coefficients, got {len(q)}")
        if all(isinstance(x, (int, Fraction)) for x in q):
            return self.c0 + sum(l * x for l, x in zip(self.lin, q))
        return float(self.c0) + float(np.dot(self.lin_float, np.asarray(q, float)))

    @property
    def lin_float(self) -> np.ndarray:
        return np.array([float(x) for x in self.lin])

    def __str__(self):
        terms = [format_fraction(self.c0)]
        terms += [f"{format_fraction(c)}*q{k}" for k, c in enumerate(self.lin) if c]
        return " + ".join(terms)


@dataclass(frozen=True)
class Reference:
    """Laplace-transformable reference ``num(s) / den(s)``.

    The poles are given explicitly as a :class:`PoleSpec` (marginal poles
    allowed) and the denominator is the monic polynomial with those roots.
    """

    num: RatPoly
    poles: PoleSpec
    name: str = "custom"

    def __post_init__(self):
        object.__setattr__(self, "num", RatPoly(self.num))
        if not self.poles.allow_marginal:
            object.__setattr__(self, "poles", PoleSpec(
                self.poles.real_poles, self.poles.complex_pairs, allow_marginal=True))

    @property
    def den(self) -> RatPoly:
        return target_poly(self.poles)

    @classmethod
    def step(cls, amplitude=1) -> Reference:
        return cls(RatPoly([amplitude]), PoleSpec([0], allow_marginal=True), "step")


@dataclass(frozen=True)
class RealMode:
    p: Fraction
    y: AffineCoeff


@dataclass(frozen=True)
class ComplexMode:
    alpha: Fraction
    beta: Fraction
    a: AffineCoeff
    b: AffineCoeff


@dataclass(frozen=True)
class LinearResidueSystem:
    """Coefficient matching ``A coeffs = B q + b`` (rows: powers of ``s``).

    Columns of ``A`` follow the mode order ``y_0..y_{nr-1}, a_1, b_1, ...``.
    """

    A: tuple
    B: tuple
    b: tuple

    def solve(self, q) -> np.ndarray:
        """Floating-point solve for the mode coefficients at ``q``."""
        A = np.array(self.A, dtype=float)
        B = np.array(self.B, dtype=float)
        rhs = B @ np.asarray(q, dtype=float) + np.array(self.b, dtype=float)
        return np.linalg.solve(A, rhs)


@dataclass(frozen=True)
class ModalDecomposition:
    """Real and complex modes with coefficients affine in ``q``.

    ``m`` and ``theta`` are the time and frequency scalings: with
    ``tau = t/m`` and ``lam = exp(-tau)`` every real mode becomes
    ``lam**pbar`` and every complex pair oscillates as
    ``cos(bbar * theta * tau)``.
    """

    real_modes: tuple
    complex_modes: tuple
    nq: int
    signal: str = "output"
    m: Fraction = Fraction(1)
    theta: Fraction = Fraction(1)
    names: tuple = field(default=(), compare=False)

    @property
    def pbar(self) -> tuple:
        return tuple(_as_int(md.p * self.m) for md in self.real_modes)

    @property
    def abar(self) -> tuple:
        return tuple(_as_int(md.alpha * self.m) for md in self.complex_modes)

    @property
    def bbar(self) -> tuple:
        return tuple(_as_int(md.beta * self.m / self.theta) for md in self.complex_modes)

    def coefficient_vector(self) -> list:
        """All AffineCoeffs in LinearResidueSystem column order."""
        out = [md.y for md in self.real_modes]
        for md in self.complex_modes:
            out += [md.a, md.b]
        return out

    def steady_state(self) -> AffineCoeff:
        """Coefficient of the ``p = 0`` mode (zero if absent)."""
        for md in self.real_modes:
            if md.p == 0:
                return md.y
        return AffineCoeff(Fraction(0), (Fraction(0),) * self.nq)

    def to_text(self) -> str:
        lines = [f"signal: {self.signal}",
                 f"m = {format_fraction(self.m)}, theta = {format_fraction(self.theta)}"]
        for md, pb in zip(self.real_modes, self.pbar):
            lines.append(f"real pole -{format_fraction(md.p)} (pbar={pb}): y = {md.y}")
        for md, ab, bb in zip(self.complex_modes, self.abar, self.bbar):
            lines.append(f"pair -{format_fraction(md.alpha)}+/-{format_fraction(md.beta)}j "
                         f"(abar={ab}, bbar={bb}): a = {md.a}; b = {md.b}")
        return "\n".join(lines) + "\n"


def _as_int(x: Fraction) -> int:
    x = Fraction(x)
    if x.denominator != 1:
        raise ScalingFailure(f"scaled exponent {x} is not an integer")
    return x.numerator


def _signal_numerators(family: YoulaFamily, signal: str):
    a, b = family.a, family.b
    if signal == "output":
        base, per_q = b * family.d0, -(a * b)
    elif signal == "control":
        base, per_q = a * family.d0, -(a * a)
    elif signal == "error":
        base, per_q = a * family.c0, a * b
    else:
        raise ValueError(f"unknown signal {signal!r}; expected one of {SIGNALS}")
    return base, [per_q * RatPoly.monomial(k) for k in range(family.nq)]


def _residue(num: RatPoly, dden: RatPoly, pole):
    return num(pole) / dden(pole)


def decompose(reference: Reference, family: YoulaFamily, poles: PoleSpec,
              signal: str = "output", theta=None):
    """Modal decomposition of a loop signal and its coefficient-matching system.

    Parameters
    ----------
    reference : Reference
        Reference signal (e.g. :meth:`Reference.step`).
    family : YoulaFamily
        Controller family; ``family.z`` must equal ``target_poly(poles)``.
    poles : PoleSpec
        Rational closed-loop poles (never recomputed by root finding).
    signal : {"output", "control", "error"}
        Which loop signal to decompose.
    theta : rational, optional
        Frequency scaling passed to :func:`rationalize_exponents`.

    Returns
    -------
    (ModalDecomposition, LinearResidueSystem)
    """
    if target_poly(poles) != family.z:
        raise ValueError("pole specification does not match the family's z(s)")
    ref_locs = set(reference.poles.locations())
    if ref_locs & set(poles.locations()):
        raise PoleCollision("reference pole coincides with a closed-loop pole")

    D = reference.den * family.z
    dD = D.derivative()
    base, per_q = _signal_numerators(family, signal)
    nums = [reference.num * base] + [reference.num * p for p in per_q]
    for N in nums:
        if N.degree() >= D.degree():
            raise ImproperSignal(f"{signal} transform is not strictly proper")

    real_p = list(reference.poles.real_poles) + list(poles.real_poles)
    pairs = list(reference.poles.complex_pairs) + list(poles.complex_pairs)
    all_locs = [(-p, 0) for p in real_p] + [(-al, be) for al, be in pairs]
    if len(set(all_locs)) != len(all_locs):
        raise DistinctnessViolation("repeated pole in the signal transform")

    def coeff(values):
        return AffineCoeff(values[0], tuple(values[1:]))

    real_modes = []
    for p in real_p:
        res = [_residue(N, dD, -p) for N in nums]
        real_modes.append(RealMode(p, coeff(res)))
    complex_modes = []
    for alpha, beta in pairs:
        pole = QComplex(-alpha, -beta)
        res = [_residue(N, dD, pole) for N in nums]
        complex_modes.append(ComplexMode(alpha, beta,
                                         coeff([r.re for r in res]),
                                         coeff([r.im for r in res])))

    # coefficient-matching system
    n = D.degree()
    cols = []
    for p in real_p:
        cols.append(D // RatPoly([p, 1]))
    for alpha, beta in pairs:
        R = D // RatPoly([alpha * alpha + beta * beta, 2 * alpha, 1])
        cols.append(RatPoly([2 * alpha, 2]) * R)
        cols.append(R * (2 * beta))
    A = tuple(tuple(c[k] for c in cols) for k in range(n))
    B = tuple(tuple(N[k] for N in nums[1:]) for k in range(n))
    b = tuple(nums[0][k] for k in range(n))

    dec = ModalDecomposition(tuple(real_modes), tuple(complex_modes), family.nq, signal)
    return rationalize_exponents(dec, theta), LinearResidueSystem(A, B, b)


def _rational_gcd(values) -> Fraction:
    values = [Fraction(v) for v in values if v != 0]
    if not values:
        return Fraction(0)
    num = reduce(math.gcd, (v.numerator for v in values))
    den = reduce(lambda x, y: x * y // math.gcd(x, y), (v.denominator for v in values))
    return Fraction(num, den)


def rationalize_exponents(dec: ModalDecomposition, theta=None) -> ModalDecomposition:
    """Choose the scalings ``m`` and ``theta`` making all exponents integers.

    ``m`` is the smallest positive number with ``m * p`` and ``m * alpha``
    integral for every mode (``m = 1 / gcd`` of the decay rates), which keeps
    the degrees in ``lam`` minimal.  When ``theta`` is omitted the largest
    admissible value ``gcd(beta * m)`` is used; an explicit ``theta`` must
    make every ``beta * m / theta`` an integer.
    """
    rates = [md.p for md in dec.real_modes] + [md.alpha for md in dec.complex_modes]
    g = _rational_gcd(rates)
    m = Fraction(1) / g if g else Fraction(1)
    betas = [md.beta * m for md in dec.complex_modes]
    if theta is None:
        theta = _rational_gcd(betas) or Fraction(1)
    else:
        theta = to_fraction(theta)
        if theta <= 0:
            raise ScalingFailure("theta must be positive")
        for b in betas:
            if (b / theta).denominator != 1:
                raise ScalingFailure(
                    f"theta = {format_fraction(theta)} does not make "
                    f"beta*m/theta = {format_fraction(b / theta)} an integer")
    return replace(dec, m=m, theta=theta)


def time_eval(dec: ModalDecomposition, q, t):
    """Closed-form signal value at time(s) ``t`` for numeric ``q``."""
    q = np.asarray([float(x) for x in q])
    t = np.asarray(t, dtype=float)
    y = np.zeros_like(t)
    for md in dec.real_modes:
        y = y + md.y(q) * np.exp(-float(md.p) * t)
    for md in dec.complex_modes:
        wt = float(md.beta) * t
        y = y + np.exp(-float(md.alpha) * t) * (2 * md.a(q) * np.cos(wt)
                                                + 2 * md.b(q) * np.sin(wt))
    return y if y.ndim else float(y)


def demoivre(n: int) -> tuple[MultiPoly, MultiPoly]:
    """Real and imaginary parts ``(w, r)`` of ``(u + j v)**n``."""
    w, r = {}, {}
    for k in range(n + 1):
        c = math.comb(n, k)
        e = (n - k, k, 0)
        # j**k cycles through 1, j, -1, -j
        if k % 4 == 0:
            w[e] = c
        elif k % 4 == 1:
            r[e] = c
        elif k % 4 == 2:
            w[e] = -c
        else:
            r[e] = -c
    return MultiPoly(w), MultiPoly(r)


def to_multipoly(dec: ModalDecomposition, q=None):
    """Signal as a polynomial in ``(u, v, lam)`` on the cylinder curve.

    With ``q`` omitted the result is an :class:`AffinePoly` in the ``nq``
    decisions ``q_0..q_{dq}``; with numeric ``q`` it is a plain
    :class:`MultiPoly`.
    """
    nq = dec.nq
    lam = MultiPoly.var(2)
    out = AffinePoly(ndec=nq)

    def add(ac: AffineCoeff, poly: MultiPoly):
        lin = {k: poly * float(c) for k, c in enumerate(ac.lin) if c}
        return AffinePoly(poly * float(ac.c0), lin, nq)

    for md, pb in zip(dec.real_modes, dec.pbar):
        out = out + add(md.y, lam ** pb)
    for md, ab, bb in zip(dec.complex_modes, dec.abar, dec.bbar):
        w, r = demoivre(bb)
        lp = lam ** ab
        out = out + add(md.a, w * lp * 2.0) + add(md.b, r * lp * 2.0)
    if q is None:
        return out
    return out.at(q)
