"""Pole placement through the polynomial Diophantine equation.

``a c + b d = z`` is solved for the d-minimal pair ``(c0, d0)`` with
``deg d0 < deg a``; every other solution is ``c = c0 + b q``,
``d = d0 - a q`` for a polynomial Youla-Kucera parameter ``q``.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import (DegenerateController, DegreeDeficit,
                     DistinctnessViolation, NotCoprime, QDegreeViolation)
from .poly import RatPoly, poly_gcd, solve_exact
from .transfer import TransferFunction

__all__ = ["YoulaFamily", "solve_d_minimal", "instantiate", "controller",
           "sylvester_system"]


@dataclass(frozen=True)
class YoulaFamily:
    """All proper controllers placing the roots of ``z`` for the plant ``b/a``.

    Attributes
    ----------
    c0, d0 : RatPoly
        d-minimal solution of ``a c0 + b d0 = z``.
    a, b : RatPoly
        Plant denominator and numerator.
    z : RatPoly
        Target closed-loop characteristic polynomial.
    dq : int
        Maximum admissible degree of ``q`` for a proper controller.
    """

    c0: RatPoly
    d0: RatPoly
    a: RatPoly
    b: RatPoly
    z: RatPoly
    dq: int

    @property
    def nq(self) -> int:
        """Number of free coefficients in ``q``."""
        return self.dq + 1

    def plant(self) -> TransferFunction:
        return TransferFunction(self.b, self.a)

    def nominal_controller(self) -> TransferFunction:
        return TransferFunction(self.d0, self.c0)

    def to_text(self) -> str:
        return (f"c0 = {self.c0.to_text()}\n"
                f"d0 = {self.d0.to_text()}\n"
                f"dq = {self.dq}\n")


def sylvester_system(a: RatPoly, b: RatPoly, z: RatPoly):
    """Coefficient-matching system for ``a c + b d = z``.

    Unknowns are ordered ``(c_0..c_{nc-1}, d_0..d_{na-1})`` with
    ``nc = deg z - deg a + 1`` and ``na = deg a``.  Returns ``(M, rhs, nc, na)``
    where row ``k`` matches the coefficient of ``s^k``.
    """
    na = a.degree()
    nc = z.degree() - na + 1
    n = z.degree() + 1
    M = [[0] * (nc + na) for _ in range(n)]
    for j in range(nc):
        for i, ac in enumerate(a.coeffs):
            if i + j < n:
                M[i + j][j] = ac
    for j in range(na):
        for i, bc in enumerate(b.coeffs):
            if i + j < n:
                M[i + j][nc + j] = bc
    return M, list(z.coeffs) + [0] * (n - len(z.coeffs)), nc, na


def solve_d_minimal(a, b, z) -> YoulaFamily:
    """d-minimal solution of the pole-placement equation ``a c + b d = z``.

    Parameters
    ----------
    a, b : RatPoly
        Denominator and numerator of a strictly proper coprime plant.
    z : RatPoly
        Desired characteristic polynomial, ``deg z >= 2 deg a``.

    Raises
    ------
    NotCoprime
        ``gcd(a, b) != 1``.
    DegreeDeficit
        ``deg z < 2 deg a`` (no free Youla-Kucera parameter remains) or the
        plant is not strictly proper.
    DistinctnessViolation
        The Sylvester system turned out singular.
    """
    a, b, z = RatPoly(a), RatPoly(b), RatPoly(z)
    if a.degree() < 1:
        raise DegreeDeficit("plant denominator must have degree >= 1")
    if b.degree() >= a.degree():
        raise DegreeDeficit("plant must be strictly proper")
    if poly_gcd(a, b) != RatPoly([1]):
        raise NotCoprime(f"plant polynomials share the factor {poly_gcd(a, b)}")
    na = a.degree()
    dq = z.degree() - 2 * na
    if z.degree() < 2 * na - 1:
        raise DegreeDeficit(
            f"deg z = {z.degree()} < 2 deg a - 1 = {2 * na - 1}: "
            "arbitrary pole placement with a proper controller is impossible")
    if dq < 0:
        raise DegreeDeficit(
            f"deg z = {z.degree()} leaves no Youla-Kucera freedom (dq = {dq})")
    M, rhs, nc, _ = sylvester_system(a, b, z)
    x = solve_exact(M, rhs)
    if x is None:
        raise DistinctnessViolation("singular Sylvester system")
    c0 = RatPoly(x[:nc])
    d0 = RatPoly(x[nc:])
    assert a * c0 + b * d0 == z
    return YoulaFamily(c0=c0, d0=d0, a=a, b=b, z=z, dq=dq)


def instantiate(f: YoulaFamily, q) -> tuple[RatPoly, RatPoly]:
    """Controller polynomials ``(c, d) = (c0 + b q, d0 - a q)``.

    ``q`` is a :class:`RatPoly` or a coefficient sequence (low-to-high).
    """
    q = RatPoly(q)
    if q.degree() > f.dq:
        raise QDegreeViolation(f"deg q = {q.degree()} exceeds dq = {f.dq}")
    c = f.c0 + f.b * q
    d = f.d0 - f.a * q
    if c.is_zero():
        raise DegenerateController("controller denominator c0 + b q vanishes")
    return c, d


def controller(f: YoulaFamily, q) -> TransferFunction:
    """Controller ``C = d / c`` for the Youla-Kucera parameter ``q``."""
    c, d = instantiate(f, q)
    return TransferFunction(d, c)
