"""Polynomial arithmetic.

Three representations are used throughout the package:

``RatPoly``
    dense univariate polynomial in ``s`` with exact rational coefficients,
    stored low-to-high.  All synthesis-path algebra (Diophantine equation,
    partial fractions) runs on these.
``ComplexPoly``
    dense univariate polynomial with complex floating coefficients; only used
    for root finding and verification.
``MultiPoly``
    sparse multivariate polynomial with real coefficients keyed by exponent
    tuples (by default in the three variables ``u, v, lam``).

``QComplex`` is a tiny exact Gaussian-rational number used to evaluate
rational polynomials at rational complex poles without rounding.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction
from numbers import Number, Rational

import numpy as np

from .errors import DegenerateDivisor, DegenerateInput, NumericalFailure

__all__ = [
    "to_fraction",
    "QComplex",
    "RatPoly",
    "ComplexPoly",
    "MultiPoly",
    "poly_gcd",
    "poly_roots",
    "format_fraction",
    "solve_exact",
    "AffinePoly",
]


def to_fraction(x) -> Fraction:
    """Convert ``x`` to an exact :class:`Fraction`.

    Strings such as ``"3/4"`` or ``"0.25"`` and Python floats are converted
    through their decimal text, so ``to_fraction(0.1) == Fraction(1, 10)``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, (bool, np.bool_)):
        raise TypeError("boolean is not a polynomial coefficient")
    if isinstance(x, (int, np.integer)):
        return Fraction(int(x))
    if isinstance(x, Rational):
        return Fraction(x.numerator, x.denominator)
    if isinstance(x, (float, np.floating)):
        if not math.isfinite(x):
            raise ValueError(f"non-finite coefficient {x!r}")
        return Fraction(repr(float(x)))
    if isinstance(x, str):
        return Fraction(x.strip())
    raise TypeError(f"cannot convert {type(x).__name__} to Fraction")


def format_fraction(x: Fraction) -> str:
    x = Fraction(x)
    if x.denominator == 1:
        return str(x.numerator)
    return f"{x.numerator}/{x.denominator}"


class QComplex:
    """Exact complex number ``re + j*im`` with rational parts."""

    __slots__ = ("re", "im")

    def __init__(self, re=0, im=0):
        self.re = to_fraction(re)
        self.im = to_fraction(im)

    @staticmethod
    def _coerce(x):
        if isinstance(x, QComplex):
            return x
        return QComplex(x, 0)

    def __add__(self, other):
        o = self._coerce(other)
        return QComplex(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __neg__(self):
        return QComplex(-self.re, -self.im)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        return QComplex(self.re * o.re - self.im * o.im,
                        self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __truediv__(self, other):
        o = self._coerce(other)
        den = o.re * o.re + o.im * o.im
        if den == 0:
            raise ZeroDivisionError("division by zero complex")
        return QComplex((self.re * o.re + self.im * o.im) / den,
                        (self.im * o.re - self.re * o.im) / den)

    def __rtruediv__(self, other):
        return self._coerce(other) / self

    def conjugate(self):
        return QComplex(self.re, -self.im)

    def __eq__(self, other):
        if isinstance(other, (QComplex, Number)):
            o = self._coerce(other) if not isinstance(other, complex) else None
            if o is None:
                return complex(self) == other
            return self.re == o.re and self.im == o.im
        return NotImplemented

    def __hash__(self):
        return hash((self.re, self.im))

    def __complex__(self):
        return complex(float(self.re), float(self.im))

    def __repr__(self):
        return f"QComplex({format_fraction(self.re)}, {format_fraction(self.im)})"


# ---------------------------------------------------------------------------
# univariate, exact


_TERM_RE = re.compile(
    r"""\s*(?P<sign>[+-])?\s*
        (?:(?P<coef>\d+(?:\.\d*)?(?:/\d+)?|\.\d+)\s*(?P<star>\*)?\s*)?
        (?P<var>s(?:\s*\^\s*(?P<exp>\d+))?)?\s*""",
    re.VERBOSE,
)


class RatPoly:
    """Univariate polynomial in ``s`` with exact rational coefficients.

    Parameters
    ----------
    coeffs : iterable
        Coefficients low-to-high (``coeffs[k]`` multiplies ``s**k``).
        Anything :func:`to_fraction` accepts is allowed.  Trailing zeros are
        stripped, so the zero polynomial has ``coeffs == ()``.

    Examples
    --------
    >>> RatPoly([1, 1]) * RatPoly([32, 28, 5, 1]) + 68
    RatPoly('100 + 60*s + 33*s^2 + 6*s^3 + s^4')
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        if isinstance(coeffs, RatPoly):
            self.coeffs = coeffs.coeffs
            return
        if isinstance(coeffs, (str, int, Fraction, float)):
            coeffs = [coeffs]
        c = [to_fraction(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    # construction helpers
    @classmethod
    def monomial(cls, k: int, coef=1) -> RatPoly:
        return cls([0] * k + [coef])

    @classmethod
    def from_roots(cls, roots) -> RatPoly:
        """Monic ``prod(s - r)`` for rational roots ``r``."""
        p = cls([1])
        for r in roots:
            p = p * cls([-to_fraction(r), 1])
        return p

    @classmethod
    def parse(cls, text: str) -> RatPoly:
        """Parse the ``"c0 + c1*s + c2*s^2"`` text format."""
        text = text.strip()
        if not text:
            raise ValueError("empty polynomial text")
        coeffs: dict[int, Fraction] = {}
        pos = 0
        first = True
        while pos < len(text):
            m = _TERM_RE.match(text, pos)
            if m is None or m.end() == pos:
                raise ValueError(f"cannot parse polynomial near {text[pos:]!r}")
            sign, coef, var = m.group("sign"), m.group("coef"), m.group("var")
            if coef is None and var is None:
                raise ValueError(f"dangling sign in polynomial {text!r}")
            if not first and sign is None:
                raise ValueError(f"missing operator in polynomial {text!r}")
            if m.group("star") and var is None:
                raise ValueError(f"dangling '*' in polynomial {text!r}")
            value = to_fraction(coef) if coef is not None else Fraction(1)
            if sign == "-":
                value = -value
            k = 0
            if var is not None:
                k = int(m.group("exp")) if m.group("exp") else 1
            coeffs[k] = coeffs.get(k, Fraction(0)) + value
            pos = m.end()
            first = False
        n = max(coeffs) + 1
        return cls([coeffs.get(k, 0) for k in range(n)])

    # queries
    def degree(self) -> int:
        """Degree; ``-1`` for the zero polynomial."""
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def lc(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __getitem__(self, k: int) -> Fraction:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def __len__(self):
        return len(self.coeffs)

    # arithmetic
    @staticmethod
    def _coerce(x) -> RatPoly:
        return x if isinstance(x, RatPoly) else RatPoly([x])

    def __add__(self, other):
        o = self._coerce(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return RatPoly([self[k] + o[k] for k in range(n)])

    __radd__ = __add__

    def __neg__(self):
        return RatPoly([-c for c in self.coeffs])

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        o = self._coerce(other)
        if self.is_zero() or o.is_zero():
            return RatPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] += a * b
        return RatPoly(out)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            raise ValueError("negative power of a polynomial")
        out = RatPoly([1])
        for _ in range(k):
            out = out * self
        return out

    def __divmod__(self, other):
        b = self._coerce(other)
        if b.is_zero():
            raise DegenerateDivisor("division by the zero polynomial")
        r = list(self.coeffs)
        db = b.degree()
        lc = b.lc()
        q = [Fraction(0)] * max(len(r) - db, 1)
        for k in range(len(r) - 1 - db, -1, -1):
            f = r[k + db] / lc
            q[k] = f
            if f:
                for i, bc in enumerate(b.coeffs):
                    r[k + i] -= f * bc
        return RatPoly(q), RatPoly(r[:db] if db > 0 else [])

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __eq__(self, other):
        if isinstance(other, RatPoly):
            return self.coeffs == other.coeffs
        if isinstance(other, (int, Fraction)):
            return self == RatPoly([other])
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    def monic(self) -> RatPoly:
        if self.is_zero():
            return self
        lc = self.lc()
        return RatPoly([c / lc for c in self.coeffs])

    def derivative(self) -> RatPoly:
        return RatPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def __call__(self, x):
        """Horner evaluation; exact for ``Fraction``/``int``/``QComplex`` input."""
        acc = 0
        for c in reversed(self.coeffs):
            acc = acc * x + c
        if not self.coeffs:
            return Fraction(0) if isinstance(x, (int, Fraction)) else 0 * x
        return acc

    def to_float(self) -> np.ndarray:
        return np.array([float(c) for c in self.coeffs], dtype=float)

    def to_text(self, var: str = "s") -> str:
        if self.is_zero():
            return "0"
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            mag = format_fraction(abs(c))
            if k == 0:
                body = mag
            else:
                mono = var if k == 1 else f"{var}^{k}"
                body = mono if mag == "1" else f"{mag}*{mono}"
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    def __str__(self):
        return self.to_text()

    def __repr__(self):
        return f"RatPoly({self.to_text()!r})"


def poly_gcd(a: RatPoly, b: RatPoly) -> RatPoly:
    """Monic greatest common divisor by the exact Euclidean algorithm."""
    a, b = RatPoly(a), RatPoly(b)
    if a.is_zero() and b.is_zero():
        raise DegenerateInput("gcd of two zero polynomials is undefined")
    while not b.is_zero():
        a, b = b, a % b
    return a.monic()


# ---------------------------------------------------------------------------
# univariate, floating point


class ComplexPoly:
    """Univariate polynomial with complex floating coefficients (low-to-high)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs=()):
        if isinstance(coeffs, RatPoly):
            coeffs = [complex(float(c)) for c in coeffs.coeffs]
        c = [complex(x) for x in coeffs]
        while c and c[-1] == 0:
            c.pop()
        self.coeffs = tuple(c)

    def degree(self) -> int:
        return len(self.coeffs) - 1

    def __call__(self, x):
        acc = np.zeros_like(np.asarray(x, dtype=complex))
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self) -> ComplexPoly:
        return ComplexPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def __repr__(self):
        return f"ComplexPoly({list(self.coeffs)!r})"


def poly_roots(p, newton_steps: int = 3, tol: float = 1e-8) -> np.ndarray:
    """Roots of a univariate polynomial.

    Companion-matrix eigenvalues (:func:`numpy.roots`) followed by a few
    Newton refinement steps.  Raises :class:`NumericalFailure` when the final
    residual exceeds ``tol * ||coeffs||``.
    """
    cp = p if isinstance(p, ComplexPoly) else ComplexPoly(p)
    if cp.degree() < 1:
        raise DegenerateInput("root finding needs degree >= 1")
    roots = np.roots(np.array(cp.coeffs[::-1]))
    dp = cp.derivative()
    for _ in range(newton_steps):
        d = dp(roots)
        step = np.where(d != 0, cp(roots) / np.where(d != 0, d, 1), 0)
        cand = roots - step
        # keep a Newton step only if it does not increase the residual
        better = np.abs(cp(cand)) <= np.abs(cp(roots))
        roots = np.where(better, cand, roots)
    scale = np.linalg.norm(np.array(cp.coeffs))
    resid = np.abs(cp(roots))
    # residual is measured relative to the root magnitude scale as well
    bound = tol * scale * np.maximum(1.0, np.abs(roots)) ** cp.degree()
    if np.any(resid > bound):
        raise NumericalFailure("root refinement did not converge")
    return roots


# ---------------------------------------------------------------------------
# multivariate


def _grlex_key(e):
    return (sum(e), tuple(-x for x in e))


class MultiPoly:
    """Sparse real multivariate polynomial.

    ``terms`` maps exponent tuples to float coefficients; zero coefficients
    are never stored.  Iteration via :meth:`items` is in graded
    lexicographic order so that text output is reproducible.
    """

    __slots__ = ("terms", "nvars")

    VARS = ("u", "v", "lam")

    def __init__(self, terms=None, nvars: int = 3):
        self.nvars = nvars
        t = {}
        if terms:
            for e, c in dict(terms).items():
                e = tuple(int(x) for x in e)
                if len(e) != nvars:
                    raise ValueError(f"exponent {e} does not have {nvars} entries")
                c = float(c)
                if c != 0.0:
                    t[e] = t.get(e, 0.0) + c
        self.terms = {e: c for e, c in t.items() if c != 0.0}

    @classmethod
    def const(cls, c, nvars: int = 3) -> MultiPoly:
        return cls({(0,) * nvars: c}, nvars)

    @classmethod
    def var(cls, i: int, nvars: int = 3) -> MultiPoly:
        e = [0] * nvars
        e[i] = 1
        return cls({tuple(e): 1.0}, nvars)

    @classmethod
    def uvl(cls):
        """The three coordinate polynomials ``(u, v, lam)``."""
        return cls.var(0), cls.var(1), cls.var(2)

    def degree(self) -> int:
        return max((sum(e) for e in self.terms), default=-1)

    def degree_in(self, i: int) -> int:
        return max((e[i] for e in self.terms), default=-1)

    def is_zero(self) -> bool:
        return not self.terms

    def items(self):
        return sorted(self.terms.items(), key=lambda kv: _grlex_key(kv[0]))

    def coeff(self, e) -> float:
        return self.terms.get(tuple(e), 0.0)

    def _coerce(self, x) -> MultiPoly:
        if isinstance(x, MultiPoly):
            if x.nvars != self.nvars:
                raise ValueError("variable count mismatch")
            return x
        return MultiPoly.const(float(x), self.nvars)

    def __add__(self, other):
        if isinstance(other, AffinePoly):
            return NotImplemented
        o = self._coerce(other)
        t = dict(self.terms)
        for e, c in o.terms.items():
            t[e] = t.get(e, 0.0) + c
        return MultiPoly(t, self.nvars)

    __radd__ = __add__

    def __neg__(self):
        return MultiPoly({e: -c for e, c in self.terms.items()}, self.nvars)

    def __sub__(self, other):
        if isinstance(other, AffinePoly):
            return NotImplemented
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        if isinstance(other, AffinePoly):
            return NotImplemented
        if not isinstance(other, MultiPoly):
            c = float(other)
            return MultiPoly({e: c * v for e, v in self.terms.items()}, self.nvars)
        o = self._coerce(other)
        t: dict = {}
        for e1, c1 in self.terms.items():
            for e2, c2 in o.terms.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                t[e] = t.get(e, 0.0) + c1 * c2
        return MultiPoly(t, self.nvars)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        out = MultiPoly.const(1.0, self.nvars)
        for _ in range(k):
            out = out * self
        return out

    def __call__(self, *point):
        """Evaluate at a point; arguments may be numpy arrays (broadcast)."""
        if len(point) == 1 and self.nvars != 1:
            point = tuple(point[0])
        if len(point) != self.nvars:
            raise ValueError(f"expected {self.nvars} coordinates, got {len(point)}")
        point = [np.asarray(x, dtype=float) for x in point]
        acc = np.zeros(np.broadcast(*point).shape) if point else 0.0
        for e, c in self.terms.items():
            term = c
            for x, k in zip(point, e):
                if k:
                    term = term * x ** k
            acc = acc + term
        return acc if np.ndim(acc) else float(acc)

    def allclose(self, other, atol: float = 1e-12) -> bool:
        d = self - other
        return all(abs(c) <= atol for c in d.terms.values())

    def __eq__(self, other):
        if isinstance(other, MultiPoly):
            return self.nvars == other.nvars and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, tuple(self.items())))

    def to_text(self, names=None, digits: int = 17) -> str:
        names = names or (self.VARS if self.nvars == 3 else
                          tuple(f"x{i}" for i in range(self.nvars)))
        if not self.terms:
            return "0"
        parts = []
        for e, c in self.items():
            mono = "*".join(n if k == 1 else f"{n}^{k}"
                            for n, k in zip(names, e) if k)
            mag = f"{abs(c):.{digits}g}"
            body = mag if not mono else (mono if mag == "1" else f"{mag}*{mono}")
            if not parts:
                parts.append(body if c > 0 else f"-{body}")
            else:
                parts.append(("+ " if c > 0 else "- ") + body)
        return " ".join(parts)

    @classmethod
    def parse(cls, text: str, names=None) -> MultiPoly:
        """Inverse of :meth:`to_text` (same variable names)."""
        names = tuple(names or cls.VARS)
        nv = len(names)
        text = text.strip()
        if text == "0":
            return cls({}, nv)
        out = cls({}, nv)
        tokens = re.findall(r"[+-]|[^\s+-]+(?:[eE][+-]\d+)?[^\s+-]*", text)
        sign = 1.0
        for tok in tokens:
            if tok in "+-":
                sign = -1.0 if tok == "-" else 1.0
                continue
            coef = sign
            e = [0] * nv
            for factor in tok.split("*"):
                base, _, power = factor.partition("^")
                if base in names:
                    e[names.index(base)] += int(power) if power else 1
                else:
                    coef *= float(factor)
            out = out + cls({tuple(e): coef}, nv)
            sign = 1.0
        return out

    def __repr__(self):
        return f"MultiPoly({self.to_text(digits=6)!r})"


def solve_exact(A, b):
    """Solve the square system ``A x = b`` over the rationals.

    Gaussian elimination with row pivoting on the entry of largest magnitude.
    Returns ``None`` when ``A`` is singular.  ``b`` may be a vector or a list
    of right-hand-side columns given as rows of a matrix (``len(b[0]) > 1``).
    """
    n = len(A)
    M = [[to_fraction(x) for x in row] for row in A]
    multi = bool(b) and isinstance(b[0], (list, tuple))
    R = [[to_fraction(x) for x in (row if multi else [row])] for row in b]
    for col in range(n):
        piv = max(range(col, n), key=lambda r: abs(M[r][col]))
        if M[piv][col] == 0:
            return None
        M[col], M[piv] = M[piv], M[col]
        R[col], R[piv] = R[piv], R[col]
        inv = 1 / M[col][col]
        for r in range(n):
            if r == col or M[r][col] == 0:
                continue
            f = M[r][col] * inv
            M[r] = [x - f * y for x, y in zip(M[r], M[col])]
            R[r] = [x - f * y for x, y in zip(R[r], R[col])]
    X = [[x / M[i][i] for x in R[i]] for i in range(n)]
    return X if multi else [row[0] for row in X]


class AffinePoly:
    """Multivariate polynomial whose coefficients are affine in decisions.

    Represents ``const(x) + sum_k z_k * lin[k](x)`` where ``x`` are the
    polynomial indeterminates and ``z`` a vector of ``ndec`` decision
    variables.
    """

    __slots__ = ("const", "lin", "ndec")

    def __init__(self, const=None, lin=None, ndec: int = 0, nvars: int = 3):
        if const is None:
            const = MultiPoly({}, nvars)
        elif not isinstance(const, MultiPoly):
            const = MultiPoly.const(const, nvars)
        self.const = const
        self.lin = {int(k): p for k, p in (lin or {}).items() if not p.is_zero()}
        if any(k < 0 or k >= ndec for k in self.lin):
            raise IndexError("decision index out of range")
        self.ndec = ndec

    @property
    def nvars(self) -> int:
        return self.const.nvars

    @classmethod
    def decision(cls, k: int, ndec: int, poly=None, nvars: int = 3) -> AffinePoly:
        """The polynomial ``z_k * poly`` (``poly`` defaults to 1)."""
        poly = MultiPoly.const(1.0, nvars) if poly is None else poly
        return cls(MultiPoly({}, poly.nvars), {k: poly}, ndec)

    def degree(self) -> int:
        """Structural degree in the indeterminates."""
        return max([self.const.degree()] + [p.degree() for p in self.lin.values()])

    def _coerce(self, other) -> AffinePoly:
        if isinstance(other, AffinePoly):
            if other.ndec != self.ndec:
                raise ValueError("decision dimension mismatch")
            return other
        if isinstance(other, MultiPoly):
            return AffinePoly(other, {}, self.ndec)
        return AffinePoly(MultiPoly.const(float(other), self.nvars), {}, self.ndec)

    def __add__(self, other):
        o = self._coerce(other)
        lin = dict(self.lin)
        for k, p in o.lin.items():
            lin[k] = lin[k] + p if k in lin else p
        return AffinePoly(self.const + o.const, lin, self.ndec)

    __radd__ = __add__

    def __neg__(self):
        return AffinePoly(-self.const, {k: -p for k, p in self.lin.items()}, self.ndec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        """Product with a scalar or a decision-free :class:`MultiPoly`."""
        if isinstance(other, AffinePoly):
            raise TypeError("product of two affine polynomials is not affine")
        return AffinePoly(self.const * other,
                          {k: p * other for k, p in self.lin.items()}, self.ndec)

    __rmul__ = __mul__

    def embed(self, ndec: int, offset: int = 0) -> AffinePoly:
        """Re-index decisions into a larger vector starting at ``offset``."""
        return AffinePoly(self.const, {k + offset: p for k, p in self.lin.items()}, ndec)

    def at(self, z) -> MultiPoly:
        """Substitute numeric decisions, leaving a plain polynomial."""
        out = self.const
        for k, p in self.lin.items():
            out = out + p * float(z[k])
        return out

    def monomials(self) -> set:
        out = set(self.const.terms)
        for p in self.lin.values():
            out |= set(p.terms)
        return out

    def __repr__(self):
        lin = ", ".join(f"z{k}: {p!r}" for k, p in sorted(self.lin.items()))
        return f"AffinePoly({self.const!r}; {lin})"
