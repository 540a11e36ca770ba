"""Polytopic contracts: H-polytopes, piecewise-constant contracts, smoothness
analysis, sampling-time selection and contract discretization."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from . import lp
from .errors import AssumptionViolated

TIME_EPS = 1e-12
RADIUS_CAP = 1e6


@dataclass(frozen=True)
class HPolytope:
    """The set ``{z : H @ z <= h}``."""

    H: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        H = np.atleast_2d(np.asarray(self.H, dtype=float))
        h = np.asarray(self.h, dtype=float).ravel()
        if H.shape[0] != h.size:
            raise ValueError(f"H has {H.shape[0]} rows but h has {h.size} entries")
        if not (np.all(np.isfinite(H)) and np.all(np.isfinite(h))):
            raise ValueError("polytope data must be finite")
        object.__setattr__(self, "H", H)
        object.__setattr__(self, "h", h)

    @classmethod
    def box(cls, lower, upper) -> "HPolytope":
        lower = np.asarray(lower, dtype=float).ravel()
        upper = np.asarray(upper, dtype=float).ravel()
        if lower.size != upper.size:
            raise ValueError("box bounds differ in length")
        d = lower.size
        return cls(np.vstack([np.eye(d), -np.eye(d)]), np.concatenate([upper, -lower]))

    @property
    def dim(self) -> int:
        return self.H.shape[1]

    def violation(self, z) -> float:
        """``max(H @ z - h)`` clipped at zero; works column-wise on a matrix of points."""
        z = np.asarray(z, dtype=float)
        if z.ndim == 1:
            return max(0.0, float(np.max(self.H @ z - self.h))) if self.h.size else 0.0
        if not self.h.size:
            return 0.0
        return max(0.0, float(np.max(self.H @ z - self.h[:, None])))

    def contains(self, z, tol: float = 1e-9) -> bool:
        return self.violation(z) <= tol

    def is_empty(self) -> bool:
        return lp.is_empty(self)

    def chebyshev_center(self) -> tuple[np.ndarray, float]:
        """Center and radius of the largest inscribed ball (radius capped at 1e6).

        A negative radius means the set is empty.
        """
        d = self.dim
        norms = np.linalg.norm(self.H, axis=1)
        G = np.vstack([np.column_stack([self.H, norms]), np.eye(1, d + 1, d)])
        g = np.concatenate([self.h, [RADIUS_CAP]])
        c = np.zeros(d + 1)
        c[-1] = -1.0
        res = lp.solve_lp(lp.LinearProgram(c=c, G=G, g=g))
        if not res.optimal:
            raise ArithmeticError(f"Chebyshev-center LP ended with status {res.status}")
        return res.z_star[:d], float(res.z_star[d])

    def contains_polytope(self, other: "HPolytope", tol: float = 1e-9) -> bool:
        """True iff ``other`` is a subset of this polytope (one LP per row)."""
        if other.is_empty():
            return True
        for a, b in zip(self.H, self.h):
            res = lp.solve_lp(lp.LinearProgram(c=-a, G=other.H, g=other.h))
            if res.status == lp.UNBOUNDED:
                return False
            if -res.objective_value > b + tol:
                return False
        return True

    def bounding_box(self) -> tuple[np.ndarray, np.ndarray]:
        """Axis bounds when the polytope is a box written with +-e_i rows; NaN otherwise."""
        lo = np.full(self.dim, -np.inf)
        hi = np.full(self.dim, np.inf)
        for a, b in zip(self.H, self.h):
            nz = np.flatnonzero(a)
            if nz.size != 1:
                return np.full(self.dim, np.nan), np.full(self.dim, np.nan)
            i = nz[0]
            if a[i] > 0:
                hi[i] = min(hi[i], b / a[i])
            else:
                lo[i] = max(lo[i], b / a[i])
        return lo, hi


def intersect(sets: Sequence[HPolytope], prune: bool = True) -> HPolytope:
    """Intersection by stacking rows; parallel duplicate rows keep the tightest bound."""
    if not sets:
        raise ValueError("need at least one set")
    d = sets[0].dim
    if any(s.dim != d for s in sets):
        raise ValueError("cannot intersect sets of different dimension")
    H = np.vstack([s.H for s in sets])
    h = np.concatenate([s.h for s in sets])
    if not prune:
        return HPolytope(H, h)
    norms = np.linalg.norm(H, axis=1)
    zero = norms == 0
    if np.any(zero & (h < 0)):
        # 0 <= negative: keep one witness row so emptiness is preserved.
        i = int(np.flatnonzero(zero & (h < 0))[0])
        return HPolytope(H[i:i + 1], h[i:i + 1])
    H, h, norms = H[~zero], h[~zero], norms[~zero]
    Hn = H / norms[:, None]
    hn = h / norms
    best: dict[tuple, int] = {}
    for i, row in enumerate(Hn):
        key = tuple(np.round(row, 12))
        if key not in best or hn[i] < hn[best[key]]:
            best[key] = i
    keep = sorted(best.values())
    return HPolytope(H[keep], h[keep])


@dataclass(frozen=True)
class ContractPiece:
    t_start: float
    t_end: float
    inputs: HPolytope
    states: HPolytope


@dataclass(frozen=True)
class PiecewiseContract:
    """Piecewise-constant contract on ``[0, T]``.

    Piece ``j`` is active on ``[t_start, t_end)``; the last piece also owns ``T``.
    """

    T: float
    pieces: tuple

    def __post_init__(self):
        pieces = tuple(self.pieces)
        object.__setattr__(self, "pieces", pieces)
        if self.T <= 0:
            raise ValueError("horizon T must be positive")
        if not pieces:
            raise ValueError("contract needs at least one piece")
        if abs(pieces[0].t_start) > TIME_EPS:
            raise ValueError("first piece must start at 0")
        if abs(pieces[-1].t_end - self.T) > TIME_EPS * max(1.0, self.T):
            raise ValueError("last piece must end at T")
        for a, b in zip(pieces, pieces[1:]):
            if abs(a.t_end - b.t_start) > TIME_EPS * max(1.0, self.T):
                raise ValueError(f"pieces are not contiguous at t={a.t_end}")
        for p in pieces:
            if p.t_end <= p.t_start:
                raise ValueError("piece intervals must have positive length")
            if p.inputs.dim != pieces[0].inputs.dim or p.states.dim != pieces[0].states.dim:
                raise ValueError("all pieces must share input and state dimensions")

    @property
    def m(self) -> int:
        return self.pieces[0].inputs.dim

    @property
    def n(self) -> int:
        return self.pieces[0].states.dim

    @property
    def starts(self) -> np.ndarray:
        return np.array([p.t_start for p in self.pieces])

    @property
    def breakpoints(self) -> np.ndarray:
        """Interior switching times."""
        return self.starts[1:]

    def piece_index(self, t: float) -> int:
        if t < -TIME_EPS or t > self.T + TIME_EPS:
            raise ValueError(f"t={t} outside [0, {self.T}]")
        idx = int(np.searchsorted(self.starts, t + TIME_EPS, side="right")) - 1
        return min(max(idx, 0), len(self.pieces) - 1)

    def pieces_at(self, t: float, closed: bool = True) -> list[int]:
        """Indices of pieces whose closure contains ``t`` (both neighbours at a breakpoint)."""
        j = self.piece_index(t)
        if closed and j > 0 and abs(self.pieces[j].t_start - t) <= TIME_EPS * max(1.0, self.T):
            return [j - 1, j]
        return [j]

    def pieces_in_window(self, a: float, b: float) -> list[int]:
        """Pieces active somewhere on the closed window ``[a, b]`` (pieces own ``[t_start, t_end)``)."""
        eps = TIME_EPS * max(1.0, self.T)
        out = []
        last = len(self.pieces) - 1
        for j, p in enumerate(self.pieces):
            ends_after = p.t_end > a + eps or (j == last and p.t_end >= a - eps)
            if p.t_start <= b + eps and ends_after:
                out.append(j)
        return out

    def input_set(self, t: float) -> HPolytope:
        return self.pieces[self.piece_index(t)].inputs

    def state_set(self, t: float) -> HPolytope:
        return self.pieces[self.piece_index(t)].states


def _pieces_nonempty(contract: PiecewiseContract, idx: Sequence[int]) -> bool:
    ins = intersect([contract.pieces[j].inputs for j in idx])
    sts = intersect([contract.pieces[j].states for j in idx])
    return not ins.is_empty() and not sts.is_empty()


@dataclass(frozen=True)
class SmoothnessReport:
    r_c: float
    min_ell: int
    radii: tuple          # ((time, r_lower, r_upper), ...) per piece start, then T

    def to_dict(self) -> dict:
        return {
            "r_c": self.r_c,
            "min_ell": self.min_ell,
            "radii": [{"t": t, "r_lower": lo, "r_upper": up} for t, lo, up in self.radii],
        }


def smoothness_analysis(contract: PiecewiseContract) -> SmoothnessReport:
    """Smoothness radii of a piecewise-constant contract.

    At each piece start ``b_i`` the forward radius is the distance to the first
    later start whose piece empties the running intersection (or to ``T``),
    and the backward radius is the distance back to the earliest start that
    keeps it nonempty.  ``r_c`` is the minimum forward radius over the starts
    in ``[0, T - r_lower(T)]``.
    """
    pieces = contract.pieces
    p = len(pieces)
    starts = contract.starts
    T = contract.T

    for j in range(p - 1):
        t_b = pieces[j + 1].t_start
        if intersect([pieces[j].inputs, pieces[j + 1].inputs]).is_empty():
            raise AssumptionViolated(f"input sets are disjoint at breakpoint t={t_b}",
                                     breakpoint=t_b, kind="inputs")
        if intersect([pieces[j].states, pieces[j + 1].states]).is_empty():
            raise AssumptionViolated(f"state sets are disjoint at breakpoint t={t_b}",
                                     breakpoint=t_b, kind="states")
    for j, pc in enumerate(pieces):
        if pc.inputs.is_empty() or pc.states.is_empty():
            raise AssumptionViolated(f"piece {j} has an empty set", piece=j)

    def backward(i: int) -> float:
        j = i
        while j > 0 and _pieces_nonempty(contract, range(j - 1, i + 1)):
            j -= 1
        return float(starts[i] - starts[j])

    def forward(i: int) -> float:
        j = i
        while j < p - 1 and _pieces_nonempty(contract, range(i, j + 2)):
            j += 1
        return float((starts[j + 1] if j < p - 1 else T) - starts[i])

    r_lower = [backward(i) for i in range(p)]
    r_upper = [forward(i) for i in range(p)]
    r_lower_T = float(T - starts[p - 1]) + r_lower[p - 1]

    eligible = [i for i in range(p) if starts[i] <= T - r_lower_T + TIME_EPS * max(1.0, T)]
    r_c = min(r_upper[i] for i in eligible)
    min_ell = max(1, math.ceil(T / r_c - 1e-9))
    radii = tuple((float(starts[i]), r_lower[i], r_upper[i]) for i in range(p)) + ((float(T), r_lower_T, 0.0),)
    return SmoothnessReport(r_c=r_c, min_ell=min_ell, radii=radii)


def select_sampling(contract: PiecewiseContract, ell_d: int,
                    report: Optional[SmoothnessReport] = None) -> float:
    """Sampling time ``T / ell_d``; rejects ``ell_d`` below the smoothness bound."""
    report = report or smoothness_analysis(contract)
    if int(ell_d) != ell_d or ell_d < 1:
        raise ValueError(f"ell_d must be a positive integer, got {ell_d!r}")
    if ell_d < report.min_ell:
        raise AssumptionViolated(
            f"ell_d={ell_d} is below the smoothness bound min_ell={report.min_ell}",
            ell_d=int(ell_d), min_ell=report.min_ell)
    return contract.T / ell_d


@dataclass(frozen=True)
class DiscreteContract:
    tau: float
    inputs: tuple     # HPolytope per k = 0..ell
    states: tuple

    @property
    def ell(self) -> int:
        return len(self.inputs) - 1


def discretize_contract(contract: PiecewiseContract, tau: float, ell_d: int) -> DiscreteContract:
    """Window intersections over ``[k tau, (k+1) tau]`` plus the terminal sets at ``T``."""
    if abs(ell_d * tau - contract.T) > 1e-12 * max(1.0, contract.T):
        raise ValueError(f"ell_d * tau = {ell_d * tau} does not equal T = {contract.T}")
    inputs, states = [], []
    for k in range(ell_d):
        idx = contract.pieces_in_window(k * tau, (k + 1) * tau)
        inputs.append(intersect([contract.pieces[j].inputs for j in idx]))
        states.append(intersect([contract.pieces[j].states for j in idx]))
    inputs.append(contract.pieces[-1].inputs)
    states.append(contract.pieces[-1].states)
    for k, (a, g) in enumerate(zip(inputs, states)):
        if a.is_empty():
            raise AssumptionViolated(f"discretized input set at k={k} is empty", k=k, kind="inputs")
        if g.is_empty():
            raise AssumptionViolated(f"discretized state set at k={k} is empty", k=k, kind="states")
    return DiscreteContract(tau=float(tau), inputs=tuple(inputs), states=tuple(states))


def constant_contract(T: float, inputs: HPolytope, states: HPolytope) -> PiecewiseContract:
    return PiecewiseContract(T=T, pieces=(ContractPiece(0.0, T, inputs, states),))
