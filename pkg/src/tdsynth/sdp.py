"""Block-diagonal semidefinite programs in SOS (equality) form.

The problems produced by the SOS encoders have the shape

    minimize    c . w
    subject to  sum_b <A_rb, X_b> + F_r . w = g_r     for every row r
                X_b PSD

with free decisions ``w`` and symmetric block variables ``X_b`` (size-1
blocks are plain nonnegative scalars).  This is exactly the dual of the
conic program handled by :func:`cvxopt.solvers.conelp`, whose
primal-dual interior point method with Nesterov-Todd scaling and Mehrotra
correction does the numerical work.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
import scipy.linalg
import scipy.sparse as sp

__all__ = ["SdpBuilder", "SdpProblem", "SdpSolution", "Status", "solve_sdp"]


class Status(str, Enum):
    OPTIMAL = "Optimal"
    INFEASIBLE = "Infeasible"
    UNBOUNDED = "Unbounded"
    SLOW_PROGRESS = "SlowProgress"


@dataclass
class SdpProblem:
    """SDP data.

    ``entries`` holds ``(row, block, i, j, value)`` with ``i <= j``; an
    off-diagonal value multiplies ``X[i, j]`` once (the symmetric partner is
    implied).  ``F`` is the sparse ``rows x nfree`` matrix of free-variable
    coefficients.
    """

    nfree: int
    blocks: list
    entries: np.ndarray
    F: sp.csr_matrix
    rhs: np.ndarray
    objective: np.ndarray
    offset: float = 0.0
    free_names: list = field(default_factory=list)

    @property
    def nrows(self) -> int:
        return len(self.rhs)

    @property
    def nscalar(self) -> int:
        """Scalar unknowns: free variables plus upper-triangular block entries."""
        return self.nfree + sum(n * (n + 1) // 2 for n in self.blocks)

    def to_text(self) -> str:
        """Sparse text dump: sizes, then coefficient triplets per constraint."""
        buf = io.StringIO()
        buf.write(f"nrows {self.nrows}\nnfree {self.nfree}\n")
        buf.write("blocks " + " ".join(str(n) for n in self.blocks) + "\n")
        buf.write("objective " + " ".join(f"{k} {float(v)!r}"
                                          for k, v in enumerate(self.objective) if v)
                  + f"\noffset {float(self.offset)!r}\n")
        F = self.F.tocoo()
        for r, k, v in sorted(zip(F.row.tolist(), F.col.tolist(), F.data.tolist())):
            buf.write(f"F {r} {k} {v!r}\n")
        for r, b, i, j, v in self.entries.tolist():
            buf.write(f"X {int(r)} {int(b)} {int(i)} {int(j)} {v!r}\n")
        for r, v in enumerate(self.rhs.tolist()):
            if v:
                buf.write(f"g {r} {v!r}\n")
        return buf.getvalue()

    def residual(self, w, X) -> np.ndarray:
        """Row residuals ``sum <A, X> + F w - g`` for a candidate point."""
        res = self.F @ np.asarray(w, float) - self.rhs
        for r, b, i, j, v in self.entries:
            res[int(r)] += v * X[int(b)][int(i), int(j)]
        return res


@dataclass
class SdpSolution:
    status: Status
    w: np.ndarray
    X: list
    moments: np.ndarray
    objective: float
    gap: float
    relative_gap: float
    iterations: int
    info: dict = field(default_factory=dict, repr=False)


class SdpBuilder:
    """Incremental construction of an :class:`SdpProblem`."""

    def __init__(self):
        self.free_names: list = []
        self.blocks: list = []
        self._entries: list = []
        self._F: list = []
        self._rhs: list = []
        self.objective: dict = {}
        self.offset = 0.0

    def add_free(self, n: int = 1, name: str = "w") -> list:
        start = len(self.free_names)
        self.free_names += [f"{name}[{k}]" if n > 1 else name for k in range(n)]
        return list(range(start, start + n))

    def add_block(self, n: int) -> int:
        self.blocks.append(int(n))
        return len(self.blocks) - 1

    def add_row(self, free=None, block_terms=None, rhs: float = 0.0) -> int:
        """Append ``sum block_terms + sum free = rhs``.

        ``free`` maps free index to coefficient; ``block_terms`` is an
        iterable of ``(block, i, j, value)``.
        """
        r = len(self._rhs)
        for k, v in (free or {}).items():
            if v:
                self._F.append((r, k, float(v)))
        for b, i, j, v in (block_terms or ()):
            if v:
                if i > j:
                    i, j = j, i
                self._entries.append((r, b, i, j, float(v)))
        self._rhs.append(float(rhs))
        return r

    def minimize(self, k: int, coef: float = 1.0):
        self.objective[k] = self.objective.get(k, 0.0) + coef

    def build(self) -> SdpProblem:
        nfree = len(self.free_names)
        nrows = len(self._rhs)
        if self._F:
            r, c, v = zip(*self._F)
        else:
            r, c, v = (), (), ()
        F = sp.csr_matrix((v, (r, c)), shape=(nrows, nfree))
        ent = np.array(self._entries, dtype=float).reshape(-1, 5)
        obj = np.zeros(nfree)
        for k, val in self.objective.items():
            obj[k] = val
        return SdpProblem(nfree, list(self.blocks), ent, F, np.array(self._rhs),
                          obj, self.offset, list(self.free_names))


def _cone_layout(blocks):
    """Offsets of every block inside cvxopt's stacked cone vector."""
    lin = [b for b, n in enumerate(blocks) if n == 1]
    mats = [b for b, n in enumerate(blocks) if n > 1]
    offset = {}
    pos = 0
    for b in lin:
        offset[b] = pos
        pos += 1
    for b in mats:
        offset[b] = pos
        pos += blocks[b] ** 2
    return lin, mats, offset, pos


def _independent_rows(P: SdpProblem, G: sp.spmatrix, rows, tol: float = 1e-10):
    """Positions (within ``rows``) of a full-rank row subset.

    ``G`` holds the cone columns of ``rows``.  Returns ``None`` if the
    dropped rows are inconsistent with the kept ones.
    """
    dense = sp.hstack([G.T, P.F[rows]]).toarray()
    rhs = P.rhs[rows]
    q, r, piv = scipy.linalg.qr(dense.T, mode="economic", pivoting=True)
    d = np.abs(np.diag(r))
    rank = int(np.sum(d > tol * max(d[0], 1.0))) if d.size else 0
    keep = np.sort(piv[:rank])
    drop = np.setdiff1d(np.arange(len(rows)), keep)
    if drop.size:
        # dropped rows must be combinations of kept ones, rhs included
        coef, *_ = np.linalg.lstsq(dense[keep].T, dense[drop].T, rcond=None)
        if np.max(np.abs(coef.T @ rhs[keep] - rhs[drop])) > 1e-8 * (1 + np.abs(rhs).max()):
            return None
    return keep


def _independent_free(P: SdpProblem, tol: float = 1e-10):
    """Free variables with linearly independent columns in ``F``.

    Returns ``(keep, bounded)``.  Dependent free variables are fixed at zero,
    which loses nothing unless the objective moves along the null direction,
    in which case the problem is unbounded (``bounded`` is ``False``).
    """
    if P.nfree == 0:
        return np.arange(0), True
    F = P.F.toarray()
    q, r, piv = scipy.linalg.qr(F, mode="economic", pivoting=True)
    d = np.abs(np.diag(r))
    rank = int(np.sum(d > tol * max(d[0], 1.0))) if d.size else 0
    keep = np.sort(piv[:rank])
    drop = np.setdiff1d(np.arange(P.nfree), keep)
    if drop.size == 0:
        return keep, True
    if rank:
        coef, *_ = np.linalg.lstsq(F[:, keep], F[:, drop], rcond=None)
        implied = coef.T @ P.objective[keep]
    else:
        implied = np.zeros(drop.size)
    scale = 1 + np.abs(P.objective).max()
    return keep, bool(np.max(np.abs(implied - P.objective[drop])) <= 1e-9 * scale)


def solve_sdp(P: SdpProblem, tol: float = 1e-8, max_iters: int = 200,
              verbose: bool = False, loosest: float = 1e-7) -> SdpSolution:
    """Solve an :class:`SdpProblem` with a primal-dual interior point method.

    ``tol`` sets cvxopt's absolute gap, relative gap and feasibility
    tolerances.  When the iteration stalls before reaching ``tol`` (typical
    once the iterates are as accurate as double precision allows) the solve
    is repeated with tolerances relaxed tenfold at a time, down to
    ``loosest``.  A solve that still stalls is reported as ``SlowProgress``
    together with its last iterate.
    """
    from cvxopt import matrix, solvers, spmatrix

    lin, mats, offset, cone_dim = _cone_layout(P.blocks)
    rows, cols, vals = [], [], []
    for r, b, i, j, v in P.entries:
        b, i, j, r = int(b), int(i), int(j), int(r)
        n = P.blocks[b]
        if n == 1:
            rows.append(offset[b])
            cols.append(r)
            vals.append(v)
        elif i == j:
            rows.append(offset[b] + i * n + i)
            cols.append(r)
            vals.append(v)
        else:
            rows += [offset[b] + j * n + i, offset[b] + i * n + j]
            cols += [r, r]
            vals += [v / 2, v / 2]
    G = sp.coo_matrix((vals, (rows, cols)), shape=(cone_dim, P.nrows)).tocsc()
    G.sum_duplicates()

    keep = np.arange(P.nrows)
    empty = np.asarray((abs(G).sum(axis=0) == 0)).ravel() & \
        (np.asarray(abs(P.F).sum(axis=1)).ravel() == 0)
    if np.any(empty & (np.abs(P.rhs) > 1e-12)):
        return _trivially_infeasible(P)
    keep = keep[~empty]
    # cvxopt needs linearly independent rows; it does not always notice when
    # they are not, so redundant rows are removed (or found inconsistent) here
    sub = _independent_rows(P, G[:, keep], keep)
    if sub is None:
        return _trivially_infeasible(P)
    keep = keep[sub]
    free, bounded = _independent_free(P)
    if not bounded:
        return _trivially_infeasible(P, Status.UNBOUNDED)

    def to_cvx(M):
        M = M.tocoo()
        return spmatrix(M.data.tolist(), M.row.tolist(), M.col.tolist(), M.shape)

    def attempt(rows_kept, tol):
        Gk = G[:, rows_kept]
        Ak = P.F[rows_kept][:, free].T.tocsc()
        c = matrix(-P.rhs[rows_kept])
        h = matrix(np.zeros(cone_dim))
        b = matrix(P.objective[free].astype(float))
        dims = {"l": len(lin), "q": [], "s": [P.blocks[m] for m in mats]}
        opts = {"abstol": tol, "reltol": tol, "feastol": tol,
                "maxiters": max_iters, "show_progress": verbose}
        return solvers.conelp(c, to_cvx(Gk), h, dims, to_cvx(Ak), b, options=opts)

    def run(tol):
        try:
            return attempt(keep, tol)
        except ArithmeticError:
            return {"status": "unknown", "x": None, "y": None, "z": None,
                    "iterations": max_iters}

    cur = tol
    while True:
        sol = run(cur)
        if sol["status"] != "unknown" or cur >= loosest * (1 - 1e-12):
            break
        cur = min(cur * 10, loosest)

    status = {
        "optimal": Status.OPTIMAL,
        "dual infeasible": Status.INFEASIBLE,
        "primal infeasible": Status.UNBOUNDED,
    }.get(sol["status"], Status.SLOW_PROGRESS)

    w = np.zeros(P.nfree)
    X = [np.zeros((n, n)) for n in P.blocks]
    moments = np.zeros(P.nrows)
    if sol.get("z") is not None and status in (Status.OPTIMAL, Status.SLOW_PROGRESS):
        z = np.array(sol["z"]).ravel()
        y = np.array(sol["y"]).ravel()
        w[free] = y
        for b in lin:
            X[b][0, 0] = z[offset[b]]
        for b in mats:
            n = P.blocks[b]
            # cvxopt only defines the lower triangle of symmetric variables
            M = np.tril(z[offset[b]:offset[b] + n * n].reshape(n, n, order="F"))
            X[b] = M + np.tril(M, -1).T
        moments[keep] = np.array(sol["x"]).ravel()
    obj = float(P.objective @ w + P.offset)
    return SdpSolution(
        status=status, w=w, X=X, moments=moments, objective=obj,
        gap=float(sol.get("gap") or 0.0) if sol.get("gap") is not None else float("nan"),
        relative_gap=float(sol["relative gap"]) if sol.get("relative gap") is not None else float("nan"),
        iterations=int(sol.get("iterations", 0)),
        info={k: sol.get(k) for k in ("primal objective", "dual objective",
                                      "primal infeasibility", "dual infeasibility")},
    )


def _trivially_infeasible(P: SdpProblem, status: Status = Status.INFEASIBLE) -> SdpSolution:
    return SdpSolution(status, np.zeros(P.nfree),
                       [np.zeros((n, n)) for n in P.blocks], np.zeros(P.nrows),
                       float("nan"), float("nan"), float("nan"), 0)
