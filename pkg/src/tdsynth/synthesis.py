"""End-to-end controller synthesis.

Pole placement gives the Youla-Kucera family; the chosen relaxation turns
the time-domain requirements into SOS constraints on ``q``; the SDP optimum
is turned back into a controller and checked by simulation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import expbounds, sos
from .diophantine import YoulaFamily, controller, solve_d_minimal
from .errors import Infeasible, InfeasibleBoundSpec
from .poly import AffinePoly, RatPoly
from .response import decompose, to_multipoly
from .sdp import Status
from .semialg import Overapprox, build_overapprox, precomputed
from .sim import ResponseMetrics, Series, metrics, simulate_loop, verify_bounds
from .transfer import TransferFunction, closed_loop, target_poly

__all__ = ["Design", "SynthesisResult", "prepare", "build_problem", "synthesize",
           "evaluate", "format_report", "format_controller"]


@dataclass
class Design:
    """Everything derived from a configuration before optimization."""

    config: object
    family: YoulaFamily
    dec: object
    lrs: object
    problem: sos.PolyOptProblem
    value_index: int = None
    bounds: object = None
    overapprox: Overapprox = None


@dataclass
class SynthesisResult:
    design: Design
    runs: list
    chosen: sos.SolveResult
    q: np.ndarray
    controller: TransferFunction
    closed_loop: TransferFunction
    series: Series = None
    metrics: ResponseMetrics = None
    coefficients: list = field(default_factory=list)

    @property
    def value(self) -> float:
        d = self.design
        if d.value_index is not None:
            return float(self.chosen.z[d.value_index])
        return float(self.chosen.objective)


def _overapprox(cfg) -> Overapprox:
    if cfg.overapprox == "precomputed":
        return precomputed()
    spec = cfg.overapprox
    return build_overapprox(float(spec["eps"]), float(spec["T"]),
                            theta=float(cfg.theta or 1),
                            K_max=int(spec.get("max_degree", 40)))


def prepare(cfg) -> tuple:
    """Youla-Kucera family and modal decomposition for a configuration."""
    family = solve_d_minimal(cfg.plant_den, cfg.plant_num, target_poly(cfg.poles))
    theta = cfg.theta if cfg.relaxation == "multivariate" else None
    dec, lrs = decompose(cfg.reference, family, cfg.poles, cfg.signal, theta=theta)
    return family, dec, lrs


def _objective(cfg, dec, ndec: int) -> sos.Objective:
    obj = sos.Objective.zero(dec.nq)
    if cfg.steady_state_weight:
        obj = obj + sos.steady_state(dec, cfg.steady_state_target, cfg.steady_state_weight)
    for mode, w in cfg.mode_energy:
        obj = obj + sos.mode_energy(dec, mode, w)
    return obj.embed(ndec)


def _steady_pin(cfg, dec, ndec: int) -> list:
    if not cfg.steady_state_hard:
        return []
    ac = dec.steady_state()
    lin = np.zeros(ndec)
    lin[:dec.nq] = [float(x) for x in ac.lin]
    return [sos.LinearConstraint(tuple(lin), cfg.steady_state_target - float(ac.c0),
                                 "==", "steady-state")]


def build_problem(cfg) -> Design:
    """Assemble the robust polynomial program described by ``cfg``."""
    family, dec, lrs = prepare(cfg)
    order = max(cfg.orders)
    if cfg.relaxation == "exp-bounds":
        if cfg.encoding == "signs":
            cons = expbounds.sign_enumeration(dec, cfg.upper, cfg.lower)
            ndec, names, bounds = dec.nq, tuple(f"q{k}" for k in range(dec.nq)), None
        else:
            bounds = expbounds.build_exp_bounds(dec)
            cons = []
            if cfg.upper is not None or cfg.lower is not None:
                cons = expbounds.bound_constraints(bounds, cfg.upper, cfg.lower)
            ndec, names = bounds.ndec, bounds.names
        cons += _steady_pin(cfg, dec, ndec)
        prob = sos.PolyOptProblem(ndec, _objective(cfg, dec, ndec), cons, order, names,
                                  cfg.convention)
        return Design(cfg, family, dec, lrs, prob, None, bounds)

    over = _overapprox(cfg)
    y = to_multipoly(dec)
    ndec = dec.nq
    names = tuple(f"q{k}" for k in range(dec.nq))
    cons, obj, gi = [], _objective(cfg, dec, dec.nq), None
    if cfg.overshoot_weight is not None:
        con, oobj, gi = sos.overshoot_epigraph(y, over.regions, cfg.overshoot_weight)
        ndec = gi + 1
        names += ("gamma",)
        obj = obj.embed(ndec) + oobj
        cons.append(con)
        y = y.embed(ndec)
    for g, sign, label in ((cfg.upper, 1, "upper"), (cfg.lower, -1, "lower")):
        if g is None:
            continue
        gp = expbounds.lam_poly(g)
        expr = (AffinePoly(gp, {}, ndec) - y) if sign > 0 else (y - AffinePoly(gp, {}, ndec))
        cons.append(sos.Constraint(expr, over.regions, label))
    cons += _steady_pin(cfg, dec, ndec)
    prob = sos.PolyOptProblem(ndec, obj, cons, order, names, cfg.convention)
    return Design(cfg, family, dec, lrs, prob, gi, None, over)


def _exact_q(z, nq: int) -> list:
    """Round decisions that are integers to solver accuracy."""
    out = []
    for x in z[:nq]:
        r = round(float(x))
        out.append(r if abs(x - r) <= 1e-7 else float(x))
    return out


def evaluate(design: Design, q, horizon=None, dt=None) -> tuple:
    """Controller, closed loop, simulated response and metrics for ``q``."""
    cfg = design.config
    C = controller(design.family, [float(x) for x in q])
    T = closed_loop(design.family.plant(), C)
    s = simulate_loop(design.family.plant(), C, cfg.reference,
                      horizon if horizon is not None else cfg.horizon,
                      dt if dt is not None else cfg.dt)
    m = metrics(s)
    if cfg.upper is not None or cfg.lower is not None:
        m.max_violation = verify_bounds(s, cfg.upper, cfg.lower, m=design.dec.m)
    return C, T, s, m


def synthesize(cfg, orders=None, simulate: bool = True) -> SynthesisResult:
    """Run the configured synthesis.

    Raises
    ------
    InfeasibleBoundSpec
        Exponential-bounds problem without a certified solution.
    Infeasible
        No relaxation order produced a certified solution.
    """
    design = build_problem(cfg)
    orders = list(orders or cfg.orders)
    if cfg.relaxation == "exp-bounds":
        orders = orders[-1:]
    runs = []
    for k in orders:
        r = sos.solve(design.problem, k, tol=cfg.tol, max_iters=cfg.max_iters)
        ok = r.status == Status.OPTIMAL and r.certified
        if design.value_index is not None:
            val = float(r.z[design.value_index]) if ok else math.inf
        else:
            val = float(r.objective) if ok else math.inf
        runs.append((k, val, r))
    good = [r for k, v, r in runs if math.isfinite(v)]
    if not good:
        last = runs[-1][2]
        msg = f"solver status {last.status.value}; no certified solution"
        if cfg.relaxation == "exp-bounds":
            raise InfeasibleBoundSpec(msg)
        raise Infeasible(msg, last.status)
    chosen = good[-1]
    q = np.array(_exact_q(chosen.z, design.dec.nq), dtype=object)
    C = controller(design.family, list(q))
    T = closed_loop(design.family.plant(), C)
    res = SynthesisResult(design, runs, chosen, q, C, T,
                          coefficients=[c(list(map(float, q))) for c in
                                        design.dec.coefficient_vector()])
    if simulate:
        _, _, res.series, res.metrics = evaluate(design, q)
    return res


# ---------------------------------------------------------------------------
# reports


def _g(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if abs(x) < 1e-12:
        return "0"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    s = f"{x:.6g}"
    return "0" if s == "-0" else s


def _poly_text(p: RatPoly) -> str:
    return "[" + ", ".join(_g(float(c)) for c in p.coeffs) + "]"


def format_controller(res: SynthesisResult) -> str:
    lines = ["# coefficients from the constant term upwards"]
    lines.append("q = [" + ", ".join(_g(x) for x in res.q) + "]")
    lines.append(f"controller.num = {_poly_text(res.controller.num)}")
    lines.append(f"controller.den = {_poly_text(res.controller.den)}")
    lines.append(f"closed_loop.num = {_poly_text(res.closed_loop.num)}")
    lines.append(f"closed_loop.den = {_poly_text(res.closed_loop.den)}")
    return "\n".join(lines) + "\n"


def format_report(res: SynthesisResult) -> str:
    d = res.design
    cfg = d.config
    out = [f"synthesis report{': ' + cfg.name if cfg.name else ''}", ""]
    out.append(f"plant              b/a = {_poly_text(cfg.plant_num)} / {_poly_text(cfg.plant_den)}")
    out.append(f"closed-loop poles  {cfg.poles}")
    out.append(f"reference          {cfg.reference.name}")
    out.append(f"signal             {cfg.signal}")
    out.append(f"relaxation         {cfg.relaxation}")
    out.append("")
    out.append("youla-kucera family")
    out.append(f"  c0 = {_poly_text(d.family.c0)}")
    out.append(f"  d0 = {_poly_text(d.family.d0)}")
    out.append(f"  dq = {d.family.dq}")
    out.append(f"  m = {_g(float(d.dec.m))}, theta = {_g(float(d.dec.theta))}")
    out.append("")
    if d.overapprox is not None:
        o = d.overapprox
        out.append(f"overapproximation  eps = {_g(o.eps)}, N = {o.N}, degrees = {list(o.degrees)}")
        out.append("")
    label = "gamma" if d.value_index is not None else "objective"
    out.append(f"relaxation order   {label}        status")
    for k, v, r in res.runs:
        cert = "certified" if r.certified else "uncertified"
        out.append(f"  {k:<16} {_g(v):<14} {r.status.value} ({cert})")
    out.append("")
    out.append("decisions")
    for name, z in zip(d.problem.names, res.chosen.z):
        out.append(f"  {name:<8} {_g(z)}")
    out.append(f"objective          {_g(res.chosen.objective)}")
    out.append("")
    names = [f"y(p={_g(float(md.p))})" for md in d.dec.real_modes]
    for i, md in enumerate(d.dec.complex_modes, 1):
        names += [f"a{i}", f"b{i}"]
    out.append("modal coefficients")
    for n, v in zip(names, res.coefficients):
        out.append(f"  {n:<10} {_g(v)}")
    out.append("")
    out.append("certificates")
    for c in res.chosen.certificates:
        out.append(f"  {c.label:<24} residual {_g(c.residual)}, min eigenvalue {_g(c.min_eig)}")
    if res.metrics is not None:
        out.append("")
        out.append("simulation")
        out += ["  " + line for line in res.metrics.to_text().splitlines()]
    return "\n".join(out) + "\n"
