"""Sum-of-squares encoding of robust polynomial programs.

A :class:`PolyOptProblem` asks for a decision vector ``z`` minimizing a
quadratic objective subject to constraints ``g(x; z) >= 0`` for all ``x`` in
a union of basic semialgebraic sets, where ``g`` is affine in ``z``.  Every
(constraint, region) pair is replaced by a certificate identity

    g = sigma_0 + sum_i e_i sigma_i + sum_j f_j mu_j

with Gram-parametrized sums of squares ``sigma`` and free polynomials
``mu``.  Matching coefficients gives linear equalities in ``z`` and the Gram
entries, so the whole program becomes one SDP (see :mod:`tdsynth.sdp`).

Constraints on the unit interval in ``lam`` alone use the exact
Markov-Lukacs representation instead.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidObjective, OrderDeficit, UnknownMode
from .poly import AffinePoly, MultiPoly
from .sdp import SdpBuilder, SdpProblem, SdpSolution, Status, solve_sdp

__all__ = [
    "INTERVAL",
    "Objective",
    "Constraint",
    "LinearConstraint",
    "PolyOptProblem",
    "Certificate",
    "SolveResult",
    "steady_state",
    "mode_energy",
    "overshoot_epigraph",
    "encode_univariate",
    "encode_putinar",
    "assemble",
    "solve",
    "hierarchy",
    "audit",
    "monomial_basis",
]

#: Domain marker for univariate constraints in ``lam`` on ``[0, 1]``.
INTERVAL = "interval"

LAM = 2
GRAM_TOL = 1e-7
RESIDUAL_TOL = 1e-6


# ---------------------------------------------------------------------------
# objectives


@dataclass
class Objective:
    """Quadratic form ``z' Q z + c' z + r`` in the decision vector."""

    Q: np.ndarray
    c: np.ndarray
    r: float = 0.0

    @classmethod
    def zero(cls, ndec: int) -> Objective:
        return cls(np.zeros((ndec, ndec)), np.zeros(ndec), 0.0)

    @classmethod
    def square(cls, lin, const: float = 0.0, weight: float = 1.0) -> Objective:
        """``weight * (lin . z + const)**2``."""
        lin = np.asarray(lin, dtype=float)
        return cls(weight * np.outer(lin, lin), 2 * weight * const * lin,
                   weight * const * const)

    @classmethod
    def linear(cls, lin, weight: float = 1.0) -> Objective:
        lin = np.asarray(lin, dtype=float)
        return cls(np.zeros((len(lin), len(lin))), weight * lin, 0.0)

    @property
    def ndec(self) -> int:
        return len(self.c)

    def __add__(self, other: Objective) -> Objective:
        return Objective(self.Q + other.Q, self.c + other.c, self.r + other.r)

    def __mul__(self, w: float) -> Objective:
        return Objective(w * self.Q, w * self.c, w * self.r)

    __rmul__ = __mul__

    def embed(self, ndec: int, offset: int = 0) -> Objective:
        n = self.ndec
        Q = np.zeros((ndec, ndec))
        Q[offset:offset + n, offset:offset + n] = self.Q
        c = np.zeros(ndec)
        c[offset:offset + n] = self.c
        return Objective(Q, c, self.r)

    def value(self, z) -> float:
        z = np.asarray(z, dtype=float)
        return float(z @ self.Q @ z + self.c @ z + self.r)

    def is_zero(self) -> bool:
        return not (np.any(self.Q) or np.any(self.c))

    def factor(self):
        """``L`` with ``L' L = Q`` from the eigendecomposition.

        Eigenvalues down to ``-1e-12`` (relative) are clipped to zero and the
        corresponding directions dropped.

        Raises
        ------
        InvalidObjective
            ``Q`` is not symmetric positive semidefinite.
        """
        Q = np.asarray(self.Q, dtype=float)
        if not np.allclose(Q, Q.T, atol=1e-12 * (1 + np.abs(Q).max(initial=0))):
            raise InvalidObjective("quadratic term is not symmetric")
        w, V = np.linalg.eigh((Q + Q.T) / 2)
        floor = 1e-12 * max(1.0, np.abs(w).max(initial=0))
        if np.any(w < -floor):
            raise InvalidObjective(f"quadratic term has negative eigenvalue {w.min():.3g}")
        keep = w > floor
        return (np.sqrt(w[keep])[:, None] * V[:, keep].T)

    def completed_square(self):
        """``(L, l, r0)`` with ``objective = |L z + l|^2 + r0``, or ``None``.

        Only possible when ``c`` lies in the range of ``Q``.
        """
        L = self.factor()
        if L.shape[0] == 0:
            return None if np.any(self.c) else (L, np.zeros(0), self.r)
        l, *_ = np.linalg.lstsq(L.T, self.c / 2, rcond=None)
        if not np.allclose(L.T @ l, self.c / 2, atol=1e-10 * (1 + np.abs(self.c).max())):
            return None
        return L, l, float(self.r - l @ l)


def _coeff_vector(ac, nq: int) -> tuple[np.ndarray, float]:
    return np.array([float(x) for x in ac.lin]), float(ac.c0)


def steady_state(dec, target: float = 1.0, weight: float = 1.0) -> Objective:
    """``weight * (target - y0(q))**2`` on the ``q`` block."""
    lin, c0 = _coeff_vector(dec.steady_state(), dec.nq)
    return Objective.square(lin, c0 - float(target), weight)


def mode_energy(dec, index: int, weight: float = 1.0) -> Objective:
    """``weight * (a_i(q)**2 + b_i(q)**2)`` for complex pair ``index`` (1-based).

    Real modes are addressed with negative indices ``-1, -2, ...`` and give
    ``weight * y_i(q)**2``.
    """
    if index > 0 and index <= len(dec.complex_modes):
        md = dec.complex_modes[index - 1]
        la, ca = _coeff_vector(md.a, dec.nq)
        lb, cb = _coeff_vector(md.b, dec.nq)
        return Objective.square(la, ca, weight) + Objective.square(lb, cb, weight)
    if index < 0 and -index <= len(dec.real_modes):
        lin, c0 = _coeff_vector(dec.real_modes[-index - 1].y, dec.nq)
        return Objective.square(lin, c0, weight)
    raise UnknownMode(f"no mode with index {index} "
                      f"({len(dec.complex_modes)} complex, {len(dec.real_modes)} real)")


def overshoot_epigraph(signal: AffinePoly, regions, weight: float = 1.0):
    """Peak epigraph: a new decision ``gamma`` with ``gamma - y >= 0``.

    ``signal`` is the response as an :class:`AffinePoly` over decisions
    ``z``; the returned constraint and objective act on ``(z, gamma)``.

    Returns
    -------
    constraint : Constraint
    objective : Objective
        ``weight * gamma``.
    index : int
        Position of ``gamma`` in the extended decision vector.
    """
    n = signal.ndec
    g = AffinePoly.decision(n, n + 1) - signal.embed(n + 1)
    lin = np.zeros(n + 1)
    lin[n] = 1.0
    return Constraint(g, tuple(regions), "overshoot"), Objective.linear(lin, weight), n


# ---------------------------------------------------------------------------
# problems


@dataclass(frozen=True)
class Constraint:
    """``g(x; z) >= 0`` for every ``x`` in every region of ``domain``.

    ``domain`` is a tuple of :class:`~tdsynth.semialg.Region` or the marker
    :data:`INTERVAL` (``g`` then depends on ``lam`` only).
    """

    g: AffinePoly
    domain: object
    label: str = ""

    @property
    def regions(self) -> tuple:
        return (INTERVAL,) if self.domain == INTERVAL else tuple(self.domain)


@dataclass(frozen=True)
class LinearConstraint:
    """``lin . z == rhs`` (``sense="=="``) or ``lin . z >= rhs`` (``">="``)."""

    lin: tuple
    rhs: float
    sense: str = ">="
    label: str = ""

    def __post_init__(self):
        if self.sense not in ("==", ">="):
            raise ValueError(f"unknown sense {self.sense!r}")

    def violation(self, z) -> float:
        v = float(np.dot(self.lin, z)) - self.rhs
        return abs(v) if self.sense == "==" else max(0.0, -v)


@dataclass
class PolyOptProblem:
    """Robust polynomial program over decisions ``z``.

    ``constraints`` holds :class:`Constraint` (polynomial, robust) and
    :class:`LinearConstraint` (plain linear) entries.
    """

    ndec: int
    objective: Objective
    constraints: list = field(default_factory=list)
    relax_order: int = 1
    names: tuple = ()
    convention: str = "multiplier"

    def __post_init__(self):
        if self.objective.ndec != self.ndec:
            raise ValueError("objective dimension does not match ndec")
        for c in self.linear:
            if len(c.lin) != self.ndec:
                raise ValueError(f"linear constraint {c.label!r} has wrong length")
        for c in self.polynomial:
            if c.g.ndec != self.ndec:
                raise ValueError(f"constraint {c.label!r} has {c.g.ndec} decisions, "
                                 f"expected {self.ndec}")
        if not self.names:
            self.names = tuple(f"z{k}" for k in range(self.ndec))

    @property
    def polynomial(self) -> list:
        return [c for c in self.constraints if isinstance(c, Constraint)]

    @property
    def linear(self) -> list:
        return [c for c in self.constraints if isinstance(c, LinearConstraint)]


# ---------------------------------------------------------------------------
# certificates


def monomial_basis(variables, degree: int) -> list:
    """Exponent tuples (3 entries) of degree <= ``degree`` in ``variables``, graded."""
    out = []
    for d in range(degree + 1):
        for combo in itertools.combinations_with_replacement(sorted(variables), d):
            e = [0, 0, 0]
            for i in combo:
                e[i] += 1
            out.append(tuple(e))
    return out


@dataclass
class _SosTerm:
    multiplier: MultiPoly
    basis: list
    block: int


@dataclass
class _FreeTerm:
    multiplier: MultiPoly
    monomials: list
    free: list


@dataclass
class Certificate:
    """Positivity certificate of one (constraint, region) pair."""

    label: str
    g: AffinePoly
    sos: list
    free: list
    grams: list = field(default_factory=list)
    free_polys: list = field(default_factory=list)
    residual: float = math.nan
    min_eig: float = math.nan

    def reconstruct(self) -> MultiPoly:
        out = MultiPoly({})
        for term, G in zip(self.sos, self.grams):
            sigma = MultiPoly({})
            for i, a in enumerate(term.basis):
                for j, b in enumerate(term.basis):
                    if G[i, j]:
                        sigma = sigma + MultiPoly({tuple(x + y for x, y in zip(a, b)): G[i, j]})
            out = out + term.multiplier * sigma
        for term, mu in zip(self.free, self.free_polys):
            out = out + term.multiplier * mu
        return out

    @property
    def valid(self) -> bool:
        return self.residual <= RESIDUAL_TOL and self.min_eig >= -GRAM_TOL

    def summary(self) -> str:
        sizes = "x".join(str(len(t.basis)) for t in self.sos)
        return (f"{self.label}: grams [{sizes}], residual {self.residual:.3g}, "
                f"min eigenvalue {self.min_eig:.3g}")


def _encode(b: SdpBuilder, g: AffinePoly, zidx, sos_terms, free_terms, label) -> Certificate:
    """Add coefficient-matching rows for ``g = sum m_k sigma_k + sum f_j mu_j``."""
    sos = []
    for mult, basis in sos_terms:
        sos.append(_SosTerm(mult, list(basis), b.add_block(len(basis))))
    free = []
    for mult, monos in free_terms:
        ids = b.add_free(len(monos), f"{label}.mu")
        free.append(_FreeTerm(mult, list(monos), ids))

    rows: dict = {}

    def row(e):
        if e not in rows:
            rows[e] = ({}, [])
        return rows[e]

    for e, c in g.const.terms.items():
        row(e)
    for k, p in g.lin.items():
        for e, c in p.terms.items():
            fr, _ = row(e)
            fr[zidx[k]] = fr.get(zidx[k], 0.0) - c
    for t in sos:
        for i, a in enumerate(t.basis):
            for j in range(i, len(t.basis)):
                ab = tuple(x + y for x, y in zip(a, t.basis[j]))
                scale = 1.0 if i == j else 2.0
                for e, c in t.multiplier.terms.items():
                    _, bt = row(tuple(x + y for x, y in zip(ab, e)))
                    bt.append((t.block, i, j, scale * c))
    for t in free:
        for mono, fid in zip(t.monomials, t.free):
            for e, c in t.multiplier.terms.items():
                fr, _ = row(tuple(x + y for x, y in zip(mono, e)))
                fr[fid] = fr.get(fid, 0.0) + c
    for e in sorted(rows, key=lambda e: (sum(e), e)):
        fr, bt = rows[e]
        b.add_row(fr, _merge(bt), g.const.coeff(e))
    return Certificate(label, g, sos, free)


def _merge(terms):
    acc: dict = {}
    for blk, i, j, v in terms:
        acc[(blk, i, j)] = acc.get((blk, i, j), 0.0) + v
    return [(blk, i, j, v) for (blk, i, j), v in acc.items()]


def _lam_only(p: AffinePoly) -> bool:
    return all(e[0] == 0 and e[1] == 0 for e in p.monomials())


def encode_univariate(b: SdpBuilder, g: AffinePoly, zidx, label: str = "") -> Certificate:
    """Markov-Lukacs certificate of ``g(lam) >= 0`` on ``[0, 1]``.

    Degree ``2k``: ``g = s0 + lam (1 - lam) s1``; degree ``2k + 1``:
    ``g = lam s0 + (1 - lam) s1`` with Gram-parametrized ``s0, s1``.
    """
    if not _lam_only(g):
        raise ValueError("univariate encoding needs a polynomial in lam only")
    n = max(g.degree(), 0)
    lam = MultiPoly.var(LAM)
    one = MultiPoly.const(1.0)
    k = n // 2
    if n % 2 == 0:
        terms = [(one, monomial_basis([LAM], k))]
        if k >= 1:
            terms.append((lam * (one - lam), monomial_basis([LAM], k - 1)))
    else:
        terms = [(lam, monomial_basis([LAM], k)), (one - lam, monomial_basis([LAM], k))]
    return _encode(b, g, zidx, terms, [], label)


def _region_vars(g: AffinePoly, region) -> list:
    used = set()
    for e in g.monomials():
        used |= {i for i, x in enumerate(e) if x}
    for p in region.eqs + region.ineqs:
        for e in p.terms:
            used |= {i for i, x in enumerate(e) if x}
    return sorted(used) or [LAM]


def encode_putinar(b: SdpBuilder, g: AffinePoly, region, order: int, zidx,
                   label: str = "", convention: str = "multiplier") -> Certificate:
    """Putinar certificate of ``g >= 0`` on a basic semialgebraic region.

    Parameters
    ----------
    order : int
        Relaxation order.
    convention : {"multiplier", "lasserre"}
        ``"lasserre"``: every term of the identity has degree at most
        ``2 order`` (``sigma_0`` Gram basis of degree ``order``).
        ``"multiplier"``: ``order`` bounds the degree of the multipliers
        ``sigma_i`` and ``mu_j``; ``sigma_0`` gets the smallest basis that
        matches the remaining terms.

    Raises
    ------
    OrderDeficit
        Under ``"lasserre"``, ``order < ceil(deg g / 2)`` or below half the
        degree of a region polynomial; under ``"multiplier"``, ``order < 1``.
    """
    variables = _region_vars(g, region)
    dg = g.degree()
    ineq_deg = [e.degree() for e in region.ineqs]
    eq_deg = [f.degree() for f in region.eqs]
    if convention == "lasserre":
        need = max([math.ceil(dg / 2)] + [math.ceil(d / 2) for d in ineq_deg + eq_deg])
        if order < need:
            raise OrderDeficit(f"order {order} < {need} needed for {label or 'constraint'}")
        s_deg = [(2 * order - d) // 2 for d in ineq_deg]
        mu_deg = [2 * order - d for d in eq_deg]
        s0 = order
    elif convention == "multiplier":
        if order < 1:
            raise OrderDeficit("relaxation order must be at least 1")
        s_deg = [order // 2] * len(ineq_deg)
        mu_deg = [order] * len(eq_deg)
        top = max([dg] + [d + 2 * s for d, s in zip(ineq_deg, s_deg)]
                  + [d + m for d, m in zip(eq_deg, mu_deg)])
        s0 = math.ceil(top / 2)
    else:
        raise ValueError(f"unknown convention {convention!r}")
    sos = [(MultiPoly.const(1.0), monomial_basis(variables, s0))]
    sos += [(e, monomial_basis(variables, d)) for e, d in zip(region.ineqs, s_deg) if d >= 0]
    free = [(f, monomial_basis(variables, d)) for f, d in zip(region.eqs, mu_deg) if d >= 0]
    return _encode(b, g, zidx, sos, free, label)


# ---------------------------------------------------------------------------
# assembly and solution


@dataclass
class Assembled:
    sdp: SdpProblem
    certificates: list
    zidx: list
    t: int
    form: str
    square: tuple = None


def assemble(p: PolyOptProblem, order: int = None) -> Assembled:
    """Block-diagonal SDP for ``p`` at relaxation order ``order``.

    The objective goes through an epigraph variable ``t``.  A purely
    quadratic objective ``|L z + l|^2 + r0`` is minimized through the
    second-order cone ``t >= |L z + l|`` written as an arrow LMI, which keeps
    the optimizer accurate even when the optimal value is zero; otherwise
    the Schur complement ``[[t - r - c'z, (L z)'], [L z, I]] >= 0`` is used.
    """
    order = p.relax_order if order is None else order
    b = SdpBuilder()
    zidx = b.add_free(p.ndec, "z")
    for k, name in zip(zidx, p.names):
        b.free_names[k] = name
    for lc in p.linear:
        fr = {zidx[j]: float(v) for j, v in enumerate(lc.lin) if v}
        if lc.sense == "==":
            b.add_row(fr, None, lc.rhs)
        else:
            slack = b.add_block(1)
            b.add_row({k: -v for k, v in fr.items()}, [(slack, 0, 0, 1.0)], -lc.rhs)
    certs = []
    for ci, con in enumerate(p.polynomial):
        for ri, region in enumerate(con.regions):
            label = f"{con.label or f'c{ci}'}@{'I' if region == INTERVAL else region.label or ri}"
            if region == INTERVAL:
                certs.append(encode_univariate(b, con.g, zidx, label))
            else:
                certs.append(encode_putinar(b, con.g, region, order, zidx, label,
                                            p.convention))
    t = b.add_free(1, "t")[0]
    b.minimize(t)
    obj = p.objective
    L = obj.factor()
    sq = obj.completed_square()
    form = "none"
    if L.shape[0] == 0 and not np.any(obj.c):
        # constant objective: pin t
        b.add_row({t: 1.0}, None, 0.0)
        b.offset = obj.r
    elif sq is not None:
        L, l, r0 = sq
        k = L.shape[0]
        blk = b.add_block(k + 1)
        b.add_row({t: -1.0}, [(blk, 0, 0, 1.0)], 0.0)
        for i in range(k):
            b.add_row({zidx[j]: -L[i, j] for j in range(p.ndec)}, [(blk, 0, i + 1, 1.0)], l[i])
            b.add_row({t: -1.0}, [(blk, i + 1, i + 1, 1.0)], 0.0)
            for j in range(i + 1, k):
                b.add_row(None, [(blk, i + 1, j + 1, 1.0)], 0.0)
        form = "norm"
    else:
        k = L.shape[0]
        if k == 0:
            b.add_row({t: 1.0, **{zidx[j]: -obj.c[j] for j in range(p.ndec) if obj.c[j]}},
                      None, obj.r)
        else:
            blk = b.add_block(k + 1)
            b.add_row({t: -1.0, **{zidx[j]: obj.c[j] for j in range(p.ndec)}},
                      [(blk, 0, 0, 1.0)], -obj.r)
            for i in range(k):
                b.add_row({zidx[j]: -L[i, j] for j in range(p.ndec)}, [(blk, 0, i + 1, 1.0)], 0.0)
                b.add_row(None, [(blk, i + 1, i + 1, 1.0)], 1.0)
                for j in range(i + 1, k):
                    b.add_row(None, [(blk, i + 1, j + 1, 1.0)], 0.0)
        form = "schur"
    return Assembled(b.build(), certs, zidx, t, form, sq)


@dataclass
class SolveResult:
    status: Status
    z: np.ndarray
    objective: float
    relaxed_objective: float
    certificates: list
    sdp: SdpSolution
    order: int
    names: tuple = ()

    @property
    def certified(self) -> bool:
        return all(c.valid for c in self.certificates)

    def __getitem__(self, name):
        return self.z[list(self.names).index(name)]


def audit(cert: Certificate, z, sol: SdpSolution) -> Certificate:
    """Fill Gram matrices and check the identity against ``g(z)``."""
    cert.grams = [sol.X[t.block] for t in cert.sos]
    cert.free_polys = []
    for t in cert.free:
        mu = MultiPoly({m: sol.w[k] for m, k in zip(t.monomials, t.free)})
        cert.free_polys.append(mu)
    diff = cert.reconstruct() - cert.g.at(z)
    cert.residual = max((abs(c) for c in diff.terms.values()), default=0.0)
    cert.min_eig = min((float(np.linalg.eigvalsh(G).min()) for G in cert.grams),
                       default=0.0)
    return cert


def solve(p: PolyOptProblem, order: int = None, tol: float = 1e-8,
          max_iters: int = 200, assembled: Assembled = None) -> SolveResult:
    """Assemble and solve; audits every certificate at the returned point."""
    order = p.relax_order if order is None else order
    a = assembled or assemble(p, order)
    sol = solve_sdp(a.sdp, tol=tol, max_iters=max_iters)
    z = sol.w[a.zidx]
    t = sol.w[a.t]
    if a.form == "norm":
        relaxed = t * t + a.square[2]
    elif a.form == "none":
        relaxed = p.objective.r
    else:
        relaxed = t
    if sol.status in (Status.OPTIMAL, Status.SLOW_PROGRESS):
        for c in a.certificates:
            audit(c, z, sol)
    return SolveResult(sol.status, z, p.objective.value(z), float(relaxed),
                       a.certificates, sol, order, tuple(p.names))


def hierarchy(p: PolyOptProblem, orders, value_index: int = None, tol: float = 1e-8):
    """Solve at increasing relaxation orders.

    Returns a list of ``(order, value, z, result)`` where ``value`` is
    ``z[value_index]`` (e.g. the peak bound ``gamma``) or the objective when
    ``value_index`` is ``None``.
    """
    orders = list(orders)
    if any(b < a for a, b in zip(orders, orders[1:])):
        raise ValueError("orders must be nondecreasing")
    out = []
    for k in orders:
        r = solve(p, k, tol=tol)
        val = r.z[value_index] if value_index is not None else r.objective
        out.append((k, float(val), r.z.copy(), r))
    return out
