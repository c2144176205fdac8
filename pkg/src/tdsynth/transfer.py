"""Transfer functions, pole specifications and loop interconnection."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .errors import AlgebraicLoop, DistinctnessViolation
from .poly import RatPoly, format_fraction, to_fraction

__all__ = ["TransferFunction", "PoleSpec", "closed_loop", "target_poly"]


@dataclass(frozen=True)
class TransferFunction:
    """Ratio ``num(s) / den(s)`` of exact rational polynomials.

    No pole-zero cancellation is ever performed.
    """

    num: RatPoly
    den: RatPoly

    def __post_init__(self):
        object.__setattr__(self, "num", RatPoly(self.num))
        object.__setattr__(self, "den", RatPoly(self.den))
        if self.den.is_zero():
            raise ZeroDivisionError("transfer function with zero denominator")

    def proper(self) -> bool:
        return self.num.degree() <= self.den.degree()

    def strictly_proper(self) -> bool:
        return self.num.degree() < self.den.degree()

    def dc_gain(self) -> Fraction:
        return self.num(Fraction(0)) / self.den(Fraction(0))

    def __call__(self, s):
        return self.num(s) / self.den(s)

    def __str__(self):
        return f"({self.num.to_text()}) / ({self.den.to_text()})"


def closed_loop(P: TransferFunction, C: TransferFunction) -> TransferFunction:
    """Complementary sensitivity ``T = b d / (a c + b d)`` of the unity loop.

    ``P = b/a`` is the plant and ``C = d/c`` the controller.  The result is
    returned unreduced.
    """
    b, a = P.num, P.den
    d, c = C.num, C.den
    den = a * c + b * d
    if den.is_zero():
        raise AlgebraicLoop("closed-loop characteristic polynomial is identically zero")
    return TransferFunction(b * d, den)


def _pair(x):
    alpha, beta = x
    return to_fraction(alpha), to_fraction(beta)


@dataclass(frozen=True)
class PoleSpec:
    """Desired pole locations in the positive-magnitude convention.

    ``real_poles`` holds ``p`` for poles at ``-p`` and ``complex_pairs`` holds
    ``(alpha, beta)`` for the pair ``-alpha +/- j beta``.  All entries are
    exact rationals.

    Closed-loop specifications require ``p > 0``, ``alpha > 0``.  Reference
    signals may use ``allow_marginal=True`` to admit ``p = 0`` (step) and
    ``alpha = 0`` (undamped sinusoid).
    """

    real_poles: tuple = ()
    complex_pairs: tuple = ()
    allow_marginal: bool = field(default=False, compare=False)

    def __post_init__(self):
        rp = tuple(to_fraction(p) for p in self.real_poles)
        cp = tuple(_pair(x) for x in self.complex_pairs)
        object.__setattr__(self, "real_poles", rp)
        object.__setattr__(self, "complex_pairs", cp)
        for p in rp:
            if p < 0 or (p == 0 and not self.allow_marginal):
                raise ValueError(f"real pole magnitude must be positive, got {p}")
        for alpha, beta in cp:
            if alpha < 0 or (alpha == 0 and not self.allow_marginal):
                raise ValueError(f"complex pole damping must be positive, got {alpha}")
            if beta <= 0:
                raise ValueError(f"complex pole frequency must be positive, got {beta}")
        locs = self.locations()
        if len(set(locs)) != len(locs):
            raise DistinctnessViolation("repeated pole in pole specification")

    def locations(self) -> list:
        """Pole locations as exact ``(re, im)`` tuples, upper half-plane first."""
        out = [(-p, Fraction(0)) for p in self.real_poles]
        for alpha, beta in self.complex_pairs:
            out += [(-alpha, beta), (-alpha, -beta)]
        return out

    @property
    def order(self) -> int:
        return len(self.real_poles) + 2 * len(self.complex_pairs)

    def __str__(self):
        parts = [f"-{format_fraction(p)}" for p in self.real_poles]
        parts += [f"-{format_fraction(a)}+/-{format_fraction(b)}j"
                  for a, b in self.complex_pairs]
        return "{" + ", ".join(parts) + "}"


def target_poly(spec: PoleSpec) -> RatPoly:
    """Monic ``prod(s + p) * prod((s + alpha)^2 + beta^2)``."""
    locs = spec.locations()
    if len(set(locs)) != len(locs):
        raise DistinctnessViolation("repeated pole in pole specification")
    z = RatPoly([1])
    for p in spec.real_poles:
        z = z * RatPoly([p, 1])
    for alpha, beta in spec.complex_pairs:
        z = z * RatPoly([alpha * alpha + beta * beta, 2 * alpha, 1])
    return z
