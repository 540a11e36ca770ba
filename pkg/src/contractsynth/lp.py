"""Dense two-phase tableau simplex with Bland's rule.

Programs are stated over free variables::

    minimize    c @ z
    subject to  G @ z <= g
                E @ z == e

Internally every free variable is split into a nonnegative pair, every
inequality gets a slack, and rows with a negative right-hand side are
flipped.  Phase 1 minimizes the sum of artificial variables; phase 2 the
true objective.  Bland's rule (lowest index enters, lowest basic index
leaves among ratio ties) rules out cycling, so results are deterministic.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)

FEAS_TOL = 1e-9
PIVOT_TOL = 1e-10
COST_TOL = 1e-10

OPTIMAL = "optimal"
INFEASIBLE = "infeasible"
UNBOUNDED = "unbounded"


@dataclass
class LinearProgram:
    c: np.ndarray
    G: np.ndarray
    g: np.ndarray
    E: Optional[np.ndarray] = None
    e: Optional[np.ndarray] = None
    ineq_labels: Optional[Sequence[str]] = None
    eq_labels: Optional[Sequence[str]] = None

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        nv = self.c.size
        self.G = np.asarray(self.G, dtype=float).reshape(-1, nv)
        self.g = np.asarray(self.g, dtype=float).ravel()
        if self.E is None:
            self.E = np.zeros((0, nv))
            self.e = np.zeros(0)
        self.E = np.asarray(self.E, dtype=float).reshape(-1, nv)
        self.e = np.asarray(self.e, dtype=float).ravel()
        if self.G.shape[0] != self.g.size or self.E.shape[0] != self.e.size:
            raise ValueError("constraint matrix and right-hand side sizes differ")
        for name in ("c", "G", "g", "E", "e"):
            if not np.all(np.isfinite(getattr(self, name))):
                raise ValueError(f"non-finite entries in {name}")

    @property
    def num_vars(self) -> int:
        return self.c.size

    def violation(self, z) -> float:
        """Largest constraint violation of ``z`` (0 when feasible)."""
        z = np.asarray(z, dtype=float)
        v = 0.0
        if self.G.shape[0]:
            v = max(v, float(np.max(self.G @ z - self.g)))
        if self.E.shape[0]:
            v = max(v, float(np.max(np.abs(self.E @ z - self.e))))
        return max(v, 0.0)


@dataclass
class LpResult:
    status: str
    z_star: Optional[np.ndarray] = None
    objective_value: float = float("nan")
    max_violation: float = 0.0
    infeasibility: float = 0.0
    violated_rows: list = field(default_factory=list)
    iterations: int = 0

    @property
    def optimal(self) -> bool:
        return self.status == OPTIMAL


class _Tableau:
    """Tableau ``[A | b]`` with the reduced-cost row appended last."""

    def __init__(self, A: np.ndarray, b: np.ndarray, basis: np.ndarray):
        m, n = A.shape
        self.m, self.n = m, n
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.basis = basis.copy()
        self.iterations = 0

    def set_objective(self, cost: np.ndarray) -> None:
        m, n = self.m, self.n
        row = np.zeros(n + 1)
        row[:n] = cost
        cb = cost[self.basis]
        row -= cb @ self.T[:m, :]
        self.T[m, :] = row

    def pivot(self, r: int, j: int) -> None:
        T = self.T
        T[r, :] /= T[r, j]
        colj = T[:, j].copy()
        colj[r] = 0.0
        T -= np.outer(colj, T[r, :])
        T[:, j] = 0.0
        T[r, j] = 1.0
        self.basis[r] = j
        self.iterations += 1

    def run(self, allowed: np.ndarray, max_iter: int) -> str:
        """Iterate with Bland's rule over columns where ``allowed`` is True."""
        m, n = self.m, self.n
        T = self.T
        while True:
            if self.iterations >= max_iter:
                raise RuntimeError("simplex iteration limit reached")
            reduced = T[m, :n]
            candidates = np.flatnonzero((reduced < -COST_TOL) & allowed)
            if candidates.size == 0:
                return OPTIMAL
            j = int(candidates[0])
            column = T[:m, j]
            pos = column > PIVOT_TOL
            if not np.any(pos):
                self.unbounded_column = j
                return UNBOUNDED
            ratios = np.full(m, np.inf)
            ratios[pos] = np.maximum(T[:m, n][pos], 0.0) / column[pos]
            best = ratios.min()
            ties = np.flatnonzero(ratios <= best + 1e-12 * max(1.0, abs(best)))
            r = int(ties[np.argmin(self.basis[ties])])
            self.pivot(r, j)


def _simplex(p: LinearProgram, max_iter: int = 200000) -> LpResult:
    nv = p.num_vars
    G, g, E, e = p.G, p.g, p.E, p.e
    mi, me = G.shape[0], E.shape[0]

    # Equilibrate rows so tolerances mean the same thing everywhere.
    gs = np.max(np.abs(G), axis=1) if mi else np.zeros(0)
    gs[gs == 0] = 1.0
    es = np.max(np.abs(E), axis=1) if me else np.zeros(0)
    es[es == 0] = 1.0
    Gn, gn = G / gs[:, None], g / gs
    En, en = E / es[:, None], e / es

    m = mi + me
    n_struct = 2 * nv + mi
    A = np.zeros((m, n_struct))
    A[:mi, :nv] = Gn
    A[:mi, nv:2 * nv] = -Gn
    A[:mi, 2 * nv:] = np.eye(mi)
    A[mi:, :nv] = En
    A[mi:, nv:2 * nv] = -En
    b = np.concatenate([gn, en])

    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0

    # Slack columns that are still +e_i can start in the basis.
    basis = np.full(m, -1, dtype=int)
    for i in range(mi):
        if not flip[i]:
            basis[i] = 2 * nv + i
    need_art = np.flatnonzero(basis < 0)
    n_art = need_art.size
    A_full = np.zeros((m, n_struct + n_art))
    A_full[:, :n_struct] = A
    for k, i in enumerate(need_art):
        A_full[i, n_struct + k] = 1.0
        basis[i] = n_struct + k
    ncols = n_struct + n_art

    tab = _Tableau(A_full, b, basis)
    is_art = np.zeros(ncols, dtype=bool)
    is_art[n_struct:] = True

    if n_art:
        cost1 = np.zeros(ncols)
        cost1[n_struct:] = 1.0
        tab.set_objective(cost1)
        tab.run(np.ones(ncols, dtype=bool), max_iter)
        phase1 = -tab.T[m, -1]
        if phase1 > FEAS_TOL:
            z = _extract(tab, nv)
            viol = p.violation(z)
            if viol > FEAS_TOL:
                rows = []
                for r in range(m):
                    if is_art[tab.basis[r]] and tab.T[r, -1] > FEAS_TOL:
                        rows.append(_row_label(p, r))
                logger.debug("phase 1 ended with infeasibility %.3e", phase1)
                return LpResult(status=INFEASIBLE, infeasibility=float(phase1),
                                violated_rows=rows, iterations=tab.iterations)
        # Drive zero-level artificials out of the basis; drop redundant rows.
        keep_rows = []
        for r in range(m):
            if is_art[tab.basis[r]]:
                row = tab.T[r, :n_struct]
                nz = np.flatnonzero(np.abs(row) > 1e-9)
                if nz.size:
                    tab.pivot(r, int(nz[0]))
                    keep_rows.append(r)
            else:
                keep_rows.append(r)
        if len(keep_rows) < m:
            keep = np.array(keep_rows + [m])
            tab.T = tab.T[keep]
            tab.basis = tab.basis[np.array(keep_rows)]
            tab.m = len(keep_rows)
            m = tab.m
            A, b = A[keep_rows], b[keep_rows]
        # Remove artificial columns.
        tab.T = np.hstack([tab.T[:, :n_struct], tab.T[:, -1:]])
        tab.n = n_struct
        ncols = n_struct

    cost2 = np.zeros(ncols)
    cost2[:nv] = p.c
    cost2[nv:2 * nv] = -p.c
    tab.set_objective(cost2)
    status = tab.run(np.ones(ncols, dtype=bool), max_iter)
    if status == UNBOUNDED:
        return LpResult(status=UNBOUNDED, iterations=tab.iterations)

    # Recompute the basic solution from the original columns to shed
    # accumulated pivoting error.
    x = np.zeros(ncols)
    try:
        x[tab.basis] = np.linalg.solve(A[:, tab.basis], b)
    except np.linalg.LinAlgError:
        x[tab.basis] = tab.T[:m, -1]
    z = x[:nv] - x[nv:2 * nv]
    viol = p.violation(z)
    if viol > FEAS_TOL:
        z_tab = _extract(tab, nv)
        if p.violation(z_tab) < viol:
            z = z_tab
            viol = p.violation(z)
    return LpResult(status=OPTIMAL, z_star=z, objective_value=float(p.c @ z),
                    max_violation=viol, iterations=tab.iterations)


def _row_label(p: LinearProgram, r: int):
    mi = p.G.shape[0]
    if r < mi:
        return p.ineq_labels[r] if p.ineq_labels is not None else f"ineq[{r}]"
    r -= mi
    return p.eq_labels[r] if p.eq_labels is not None else f"eq[{r}]"


def _extract(tab: _Tableau, nv: int) -> np.ndarray:
    x = np.zeros(tab.n)
    for r, j in enumerate(tab.basis):
        if j < tab.n:
            x[j] = tab.T[r, -1]
    return x[:nv] - x[nv:2 * nv]


def _highs(p: LinearProgram) -> LpResult:
    from scipy.optimize import linprog

    res = linprog(p.c, A_ub=p.G if p.G.shape[0] else None, b_ub=p.g if p.G.shape[0] else None,
                  A_eq=p.E if p.E.shape[0] else None, b_eq=p.e if p.E.shape[0] else None,
                  bounds=[(None, None)] * p.num_vars, method="highs")
    if res.status == 0:
        return LpResult(status=OPTIMAL, z_star=res.x, objective_value=float(res.fun),
                        max_violation=p.violation(res.x), iterations=int(res.nit))
    if res.status == 2:
        return LpResult(status=INFEASIBLE, infeasibility=float("nan"))
    if res.status == 3:
        return LpResult(status=UNBOUNDED)
    raise RuntimeError(f"HiGHS failed: {res.message}")


_BACKENDS: dict[str, Callable[[LinearProgram], LpResult]] = {
    "simplex": _simplex,
    "highs": _highs,
}


def register_backend(name: str, solver: Callable[[LinearProgram], LpResult]) -> None:
    _BACKENDS[name] = solver


def solve_lp(p: LinearProgram, backend: str = "simplex") -> LpResult:
    try:
        solver = _BACKENDS[backend]
    except KeyError:
        raise ValueError(f"unknown LP backend {backend!r}") from None
    return solver(p)


def is_empty(P, backend: str = "simplex") -> bool:
    """Phase-1 emptiness test for ``{z : P.H @ z <= P.h}``."""
    H = np.asarray(P.H, dtype=float)
    lp = LinearProgram(c=np.zeros(H.shape[1]), G=H, g=P.h)
    return solve_lp(lp, backend).status == INFEASIBLE
