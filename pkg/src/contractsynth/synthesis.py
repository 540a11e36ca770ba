"""Safety-controller synthesis as a single linear program.

Decision variables are the discrete inputs ``u_d(0..ell)``, the discrete
states ``x_d(1..ell)`` and, for the L1 objective, one slack per input entry.
Constraints:

* discrete dynamics ``x_d(k+1) = A_d x_d(k) + B_d u_d(k)``;
* membership of ``u_d(k)`` and ``x_d(k)`` in the discretized contract sets,
  for ``k = 0..ell``;
* for every segment ``k < ell`` and every Bernstein control point ``j``,
  membership of ``V^k_j`` in the discretized input set and of ``W^k_j`` in the
  discretized state set.  Control points are fixed linear images of
  ``(x_d(k), u_d(k), u_d(k+1))``, so these rows are linear as well.

Because each segment polynomial is a convex combination of its control
points, the last group certifies the continuous-time input and state on the
whole segment, not just at the samples.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import lp
from .bernstein import control_points
from .contracts import (DiscreteContract, PiecewiseContract, SmoothnessReport, discretize_contract,
                        select_sampling, smoothness_analysis)
from .errors import DiscreteInfeasible, PipelineError
from .interpolation import (InterpolationOperator, PiecewisePolynomial, SegmentSolution, assemble_trajectory,
                            build_operator, check_interpolator, design_discrete, segment_map)
from .systems import LtiSystem

logger = logging.getLogger(__name__)

MIN_L1 = "min_l1_input"
FEASIBILITY = "feasibility_only"
OBJECTIVE_MODES = (MIN_L1, FEASIBILITY)

INFEASIBLE_HINT = ("the discrete problem is infeasible for this (tau, N); smaller sampling times "
               "and lower polynomial degrees tend to enlarge the feasible set")


@dataclass
class SynthesisProblem:
    sys_c: LtiSystem
    contract: PiecewiseContract
    x0: np.ndarray
    ell_d: int
    N: int
    objective_mode: str = MIN_L1
    tol: float = 1e-8

    def __post_init__(self):
        self.x0 = np.asarray(self.x0, dtype=float).ravel()
        if self.objective_mode not in OBJECTIVE_MODES:
            raise ValueError(f"objective_mode must be one of {OBJECTIVE_MODES}")
        if self.x0.size != self.sys_c.n:
            raise ValueError(f"x0 has {self.x0.size} entries, system has n={self.sys_c.n}")
        if self.contract.n != self.sys_c.n or self.contract.m != self.sys_c.m:
            raise ValueError("contract dimensions do not match the system")


@dataclass
class SegmentTemplate:
    """Control points as linear maps of ``(x_k, u_k, u_{k+1})``.

    ``V[j] @ z`` is input control point ``j``; ``W[j] @ z`` state control point ``j``.
    """

    S: np.ndarray
    V: np.ndarray   # (N+1, m, n+2m)
    W: np.ndarray   # (N+1, n, n+2m)


def segment_template(op: InterpolationOperator, sys_d: LtiSystem) -> SegmentTemplate:
    n, m, N = op.n, op.m, op.N
    S = segment_map(op, sys_d)
    Minv = op.bernstein.M_inverse
    Sx = S[:n * N].reshape(N, n, -1)   # block i = column i of X
    Su = S[n * N:].reshape(N, m, -1)
    sel_x = np.hstack([np.eye(n), np.zeros((n, 2 * m))])
    sel_u = np.hstack([np.zeros((m, n)), np.eye(m), np.zeros((m, m))])
    V = np.einsum("j,ab->jab", Minv[0], sel_u) + np.einsum("ij,iab->jab", Minv[1:], Su)
    W = np.einsum("j,ab->jab", Minv[0], sel_x) + np.einsum("ij,iab->jab", Minv[1:], Sx)
    return SegmentTemplate(S=S, V=V, W=W)


@dataclass
class _Layout:
    n: int
    m: int
    ell: int
    slacks: bool

    @property
    def num_vars(self) -> int:
        nu = self.m * (self.ell + 1)
        return nu + self.n * self.ell + (nu if self.slacks else 0)

    def u(self, k: int) -> slice:
        return slice(k * self.m, (k + 1) * self.m)

    def x(self, k: int) -> slice:
        base = self.m * (self.ell + 1)
        return slice(base + (k - 1) * self.n, base + k * self.n)

    def s(self, k: int) -> slice:
        base = self.m * (self.ell + 1) + self.n * self.ell
        return slice(base + k * self.m, base + (k + 1) * self.m)


def _segment_affine(lay: _Layout, k: int, x0: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """``(P, p)`` with ``(x_k, u_k, u_{k+1}) = P @ v + p``."""
    n, m = lay.n, lay.m
    P = np.zeros((n + 2 * m, lay.num_vars))
    p = np.zeros(n + 2 * m)
    if k == 0:
        p[:n] = x0
    else:
        P[:n, lay.x(k)] = np.eye(n)
    P[n:n + m, lay.u(k)] = np.eye(m)
    P[n + m:, lay.u(k + 1)] = np.eye(m)
    return P, p


@dataclass
class EncodedProgram:
    program: lp.LinearProgram
    layout: _Layout
    template: SegmentTemplate


def encode(problem: SynthesisProblem, op: InterpolationOperator, sys_d: LtiSystem,
           dcontract: DiscreteContract, template: Optional[SegmentTemplate] = None) -> EncodedProgram:
    if not check_interpolator(op, sys_d):
        raise PipelineError("encode requires an interpolating discrete system")
    n, m, ell = op.n, op.m, dcontract.ell
    if ell != problem.ell_d:
        raise ValueError("discrete contract length does not match ell_d")
    slacks = problem.objective_mode == MIN_L1
    lay = _Layout(n=n, m=m, ell=ell, slacks=slacks)
    nv = lay.num_vars
    x0 = problem.x0
    template = template or segment_template(op, sys_d)

    G_rows, g_rows, g_labels = [], [], []
    E_rows, e_rows, e_labels = [], [], []

    def add_ineq(H, h, label):
        G_rows.append(H)
        g_rows.append(h)
        g_labels.extend(f"{label}[{i}]" for i in range(H.shape[0]))

    # Discrete dynamics.
    for k in range(ell):
        E = np.zeros((n, nv))
        rhs = np.zeros(n)
        E[:, lay.x(k + 1)] = np.eye(n)
        E[:, lay.u(k)] = -sys_d.B
        if k == 0:
            rhs = sys_d.A @ x0
        else:
            E[:, lay.x(k)] = -sys_d.A
        E_rows.append(E)
        e_rows.append(rhs)
        e_labels.extend(f"dynamics k={k}[{i}]" for i in range(n))

    # Sample-time membership, k = 0..ell.
    for k in range(ell + 1):
        A_set = dcontract.inputs[k]
        H = np.zeros((A_set.H.shape[0], nv))
        H[:, lay.u(k)] = A_set.H
        add_ineq(H, A_set.h, f"input k={k}")
        if k >= 1:
            G_set = dcontract.states[k]
            H = np.zeros((G_set.H.shape[0], nv))
            H[:, lay.x(k)] = G_set.H
            add_ineq(H, G_set.h, f"state k={k}")

    # Control-point membership, k = 0..ell-1.
    for k in range(ell):
        P, p = _segment_affine(lay, k, x0)
        A_set, G_set = dcontract.inputs[k], dcontract.states[k]
        for j in range(op.N + 1):
            Vj = A_set.H @ template.V[j]
            add_ineq(Vj @ P, A_set.h - Vj @ p, f"input control point k={k} j={j}")
            Wj = G_set.H @ template.W[j]
            add_ineq(Wj @ P, G_set.h - Wj @ p, f"state control point k={k} j={j}")

    c = np.zeros(nv)
    if slacks:
        for k in range(ell + 1):
            H = np.zeros((2 * m, nv))
            H[:m, lay.u(k)] = np.eye(m)
            H[m:, lay.u(k)] = -np.eye(m)
            H[:m, lay.s(k)] = -np.eye(m)
            H[m:, lay.s(k)] = -np.eye(m)
            add_ineq(H, np.zeros(2 * m), f"l1 k={k}")
            c[lay.s(k)] = 1.0

    program = lp.LinearProgram(
        c=c, G=np.vstack(G_rows), g=np.concatenate(g_rows),
        E=np.vstack(E_rows), e=np.concatenate(e_rows),
        ineq_labels=g_labels, eq_labels=e_labels,
    )
    return EncodedProgram(program=program, layout=lay, template=template)


@dataclass
class SynthesisResult:
    u_d: np.ndarray                # (ell+1, m)
    x_d: np.ndarray                # (ell+1, n)
    segments: list                 # SegmentSolution per k < ell
    control_points_u: list         # V^k, (m, N+1)
    control_points_x: list         # W^k, (n, N+1)
    u_c: PiecewisePolynomial
    x_c: PiecewisePolynomial
    objective_value: float
    sys_d: LtiSystem
    tau: float
    N: int
    ell_d: int
    discrete_contract: DiscreteContract
    smoothness: Optional[SmoothnessReport] = None
    lp_iterations: int = 0
    lp_agreement: float = 0.0
    certified_input_violation: float = 0.0
    certified_state_violation: float = 0.0
    meta: dict = field(default_factory=dict)


def reconstruct(op: InterpolationOperator, sys_d: LtiSystem, x0, u_d,
                dcontract: Optional[DiscreteContract] = None) -> dict:
    """Segments, control points and polynomial signals for a given input sequence."""
    traj = assemble_trajectory(op, sys_d, x0, u_d)
    V = [control_points(op.bernstein, u_d[k], s.U) for k, s in enumerate(traj.segments)]
    W = [control_points(op.bernstein, traj.x_d[k], s.X) for k, s in enumerate(traj.segments)]
    out = dict(traj=traj, V=V, W=W, vin=0.0, vst=0.0)
    if dcontract is not None:
        out["vin"] = max(dcontract.inputs[k].violation(Vk) for k, Vk in enumerate(V))
        out["vst"] = max(dcontract.states[k].violation(Wk) for k, Wk in enumerate(W))
    return out


def synthesize(problem: SynthesisProblem, op: Optional[InterpolationOperator] = None,
               sys_d: Optional[LtiSystem] = None, lp_backend: str = "simplex") -> SynthesisResult:
    """Run the full pipeline and return the certified controller.

    Raises ``AssumptionViolated``, ``InfeasibleOrder`` or ``DiscreteInfeasible``.
    """
    report = smoothness_analysis(problem.contract)
    tau = select_sampling(problem.contract, problem.ell_d, report)
    dcontract = discretize_contract(problem.contract, tau, problem.ell_d)
    if op is None:
        op = build_operator(problem.sys_c, problem.N, tau, tol=problem.tol)
    if sys_d is None:
        sys_d = design_discrete(op)

    if not dcontract.states[0].contains(problem.x0):
        raise DiscreteInfeasible("initial state lies outside the first discretized guarantee set",
                                 violated=["initial state"], hint=INFEASIBLE_HINT)

    enc = encode(problem, op, sys_d, dcontract)
    res = lp.solve_lp(enc.program, backend=lp_backend)
    logger.info("synthesis LP: %d vars, %d ineq, %d eq -> %s after %d pivots",
                enc.program.num_vars, enc.program.G.shape[0], enc.program.E.shape[0],
                res.status, res.iterations)
    if res.status == lp.INFEASIBLE:
        groups = sorted({str(r).rsplit("[", 1)[0] for r in res.violated_rows})
        raise DiscreteInfeasible(INFEASIBLE_HINT, violated=groups, infeasibility=res.infeasibility,
                                 tau=tau, N=op.N)
    if res.status != lp.OPTIMAL:
        raise PipelineError(f"synthesis LP ended with status {res.status}")

    lay = enc.layout
    z = res.z_star
    u_d = np.vstack([z[lay.u(k)] for k in range(lay.ell + 1)])
    x_lp = np.vstack([problem.x0] + [z[lay.x(k)] for k in range(1, lay.ell + 1)])

    rec = reconstruct(op, sys_d, problem.x0, u_d, dcontract)
    traj = rec["traj"]
    # Control points implied by the LP template versus the direct segment solves.
    agreement = 0.0
    for k in range(lay.ell):
        zk = np.concatenate([traj.x_d[k], u_d[k], u_d[k + 1]])
        for j in range(op.N + 1):
            agreement = max(agreement,
                            float(np.max(np.abs(enc.template.V[j] @ zk - rec["V"][k][:, j]))),
                            float(np.max(np.abs(enc.template.W[j] @ zk - rec["W"][k][:, j]))))
    logger.debug("LP/rollout state gap %.3e", float(np.max(np.abs(x_lp - traj.x_d))))

    return SynthesisResult(
        u_d=u_d, x_d=traj.x_d, segments=traj.segments,
        control_points_u=rec["V"], control_points_x=rec["W"],
        u_c=traj.u_c, x_c=traj.x_c, objective_value=res.objective_value,
        sys_d=sys_d, tau=tau, N=op.N, ell_d=problem.ell_d, discrete_contract=dcontract,
        smoothness=report, lp_iterations=res.iterations, lp_agreement=agreement,
        certified_input_violation=rec["vin"], certified_state_violation=rec["vst"],
    )
