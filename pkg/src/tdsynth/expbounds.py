"""Exponential-bounds relaxation.

The oscillating factors ``cos`` and ``sin`` of every complex mode are
replaced by their worst case ``+-1``.  With ``lam = exp(-t/m)`` the response
is then enclosed by the two polynomials

    upper(lam) = sum y_i lam**pbar_i + sum (2|a_i| + 2|b_i|) lam**abar_i
    lower(lam) = sum y_i lam**pbar_i - sum (2|a_i| + 2|b_i|) lam**abar_i

The absolute values are handled with lift variables ``s >= +-c`` so both
bounds stay affine in the decisions ``(q, s)``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import InfeasibleBoundSpec
from .poly import AffinePoly, MultiPoly
from .sos import INTERVAL, Constraint, LinearConstraint

__all__ = ["ExpBoundPair", "build_exp_bounds", "bound_constraints",
           "sign_enumeration", "lam_poly"]

_LAM = MultiPoly.var(2)


def lam_poly(coeffs) -> MultiPoly:
    """Polynomial in ``lam`` from low-to-high coefficients (or a constant)."""
    if np.isscalar(coeffs):
        coeffs = [coeffs]
    out = MultiPoly({})
    for k, c in enumerate(coeffs):
        out = out + _LAM ** k * float(c)
    return out


def _affine(ac, poly: MultiPoly, ndec: int) -> AffinePoly:
    lin = {k: poly * float(c) for k, c in enumerate(ac.lin) if c}
    return AffinePoly(poly * float(ac.c0), lin, ndec)


@dataclass(frozen=True)
class ExpBoundPair:
    """Upper and lower bound polynomials over decisions ``(q, lifts)``.

    Attributes
    ----------
    upper, lower : AffinePoly
        Polynomials in ``lam``; decision ``nq + 2 i`` is the lift of
        ``|a_i|`` and ``nq + 2 i + 1`` the lift of ``|b_i|``.
    lifts : tuple of LinearConstraint
        ``s >= c`` and ``s >= -c`` for every lifted coefficient.
    """

    upper: AffinePoly
    lower: AffinePoly
    lifts: tuple
    nq: int
    names: tuple
    dec: object

    @property
    def ndec(self) -> int:
        return self.upper.ndec

    def lift_values(self, q) -> np.ndarray:
        """Tight lifts ``|a_i|, |b_i|`` for numeric ``q``."""
        out = []
        for md in self.dec.complex_modes:
            out += [abs(md.a(q)), abs(md.b(q))]
        return np.array(out, dtype=float)

    def at(self, q, lifts=None):
        """``(upper, lower)`` as plain polynomials (tight lifts by default)."""
        q = [float(x) for x in q]
        s = self.lift_values(q) if lifts is None else np.asarray(lifts, float)
        z = np.concatenate([q, s])
        return self.upper.at(z), self.lower.at(z)


def build_exp_bounds(dec) -> ExpBoundPair:
    """Exponential upper/lower bounds of a rationalized decomposition."""
    nq = dec.nq
    nc = len(dec.complex_modes)
    ndec = nq + 2 * nc
    names = tuple(f"q{k}" for k in range(nq))
    base = AffinePoly(ndec=ndec)
    for md, pb in zip(dec.real_modes, dec.pbar):
        base = base + _affine(md.y, _LAM ** pb, ndec)
    spread = AffinePoly(ndec=ndec)
    lifts = []
    for i, (md, ab) in enumerate(zip(dec.complex_modes, dec.abar)):
        lp = _LAM ** ab
        for j, (coef, tag) in enumerate(((md.a, "a"), (md.b, "b"))):
            k = nq + 2 * i + j
            names += (f"s_{tag}{i + 1}",)
            spread = spread + AffinePoly.decision(k, ndec, lp * 2.0)
            lin = np.zeros(ndec)
            lin[:nq] = [float(x) for x in coef.lin]
            e = np.zeros(ndec)
            e[k] = 1.0
            lifts.append(LinearConstraint(tuple(e - lin), float(coef.c0), ">=",
                                          f"s_{tag}{i + 1}>=+{tag}{i + 1}"))
            lifts.append(LinearConstraint(tuple(e + lin), -float(coef.c0), ">=",
                                          f"s_{tag}{i + 1}>=-{tag}{i + 1}"))
    return ExpBoundPair(base + spread, base - spread, tuple(lifts), nq, names, dec)


def _check_order(g_u: MultiPoly, g_l: MultiPoly, grid: int = 10001):
    lam = np.linspace(0.0, 1.0, grid)
    gap = g_u(0 * lam, 0 * lam, lam) - g_l(0 * lam, 0 * lam, lam)
    if np.min(gap) < 0:
        k = int(np.argmin(gap))
        raise InfeasibleBoundSpec(
            f"upper bound below lower bound at lam = {lam[k]:.4g} (gap {gap[k]:.3g})")


def bound_constraints(b: ExpBoundPair, g_u, g_l) -> list:
    """``g_u - upper >= 0`` and ``lower - g_l >= 0`` on ``lam in [0, 1]``.

    ``g_u`` and ``g_l`` are polynomials in ``lam`` (coefficient lists,
    constants or :class:`MultiPoly`); ``None`` drops that side.  Returns the
    two interval constraints followed by the lift constraints.

    Raises
    ------
    InfeasibleBoundSpec
        ``g_u < g_l`` somewhere on ``[0, 1]``.
    """
    gu = None if g_u is None else (g_u if isinstance(g_u, MultiPoly) else lam_poly(g_u))
    gl = None if g_l is None else (g_l if isinstance(g_l, MultiPoly) else lam_poly(g_l))
    if gu is not None and gl is not None:
        _check_order(gu, gl)
    out = []
    if gu is not None:
        out.append(Constraint(gu - b.upper, INTERVAL, "upper"))
    if gl is not None:
        out.append(Constraint(b.lower - gl, INTERVAL, "lower"))
    return out + list(b.lifts)


def sign_enumeration(dec, g_u, g_l) -> list:
    """Lift-free encoding: one bound constraint per sign pattern.

    Every choice of signs for the ``2 n_c`` oscillation coefficients gives
    a polynomial bound affine in ``q`` alone; requiring all of them is
    equivalent to the lifted form.  Exponential in ``n_c``; meant for
    cross-checking small problems.
    """
    nq = dec.nq
    gu = None if g_u is None else lam_poly(g_u) if not isinstance(g_u, MultiPoly) else g_u
    gl = None if g_l is None else lam_poly(g_l) if not isinstance(g_l, MultiPoly) else g_l
    if gu is not None and gl is not None:
        _check_order(gu, gl)
    base = AffinePoly(ndec=nq)
    for md, pb in zip(dec.real_modes, dec.pbar):
        base = base + _affine(md.y, _LAM ** pb, nq)
    terms = []
    for md, ab in zip(dec.complex_modes, dec.abar):
        lp = _LAM ** ab * 2.0
        terms += [_affine(md.a, lp, nq), _affine(md.b, lp, nq)]
    out = []
    for signs in itertools.product((1.0, -1.0), repeat=len(terms)):
        spread = AffinePoly(ndec=nq)
        for s, t in zip(signs, terms):
            spread = spread + t * s
        tag = "".join("+" if s > 0 else "-" for s in signs)
        if gu is not None:
            out.append(Constraint(gu - (base + spread), INTERVAL, f"upper{tag}"))
        if gl is not None:
            out.append(Constraint((base - spread) - gl, INTERVAL, f"lower{tag}"))
    return out
