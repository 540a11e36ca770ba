"""Shifted Legendre polynomials, left Radau nodes and the Lagrange basis on them."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numpy.polynomial import legendre as npleg

MAX_DEGREE = 20


def _legendre_and_derivative(k: int, s):
    """Standard Legendre ``P_k(s)`` and ``P_k'(s)`` by the three-term recurrence."""
    s = np.asarray(s, dtype=float)
    p_prev = np.ones_like(s)
    dp_prev = np.zeros_like(s)
    if k == 0:
        return p_prev, dp_prev
    p = s.copy()
    dp = np.ones_like(s)
    for j in range(1, k):
        p_next = ((2 * j + 1) * s * p - j * p_prev) / (j + 1)
        dp_next = dp_prev + (2 * j + 1) * p
        p_prev, p = p, p_next
        dp_prev, dp = dp, dp_next
    return p, dp


def legendre_eval(k: int, s):
    return _legendre_and_derivative(k, s)[0]


def shifted_legendre_eval(k: int, tau: float, t):
    """Shifted Legendre polynomial of degree ``k`` on ``[0, tau]``."""
    if k < 0:
        raise ValueError("degree must be nonnegative")
    t_arr = np.asarray(t, dtype=float)
    if np.any(t_arr < 0.0) or np.any(t_arr > tau):
        raise ValueError(f"t must lie in [0, {tau}]")
    out = legendre_eval(k, 2.0 * t_arr / tau - 1.0)
    return float(out) if out.ndim == 0 else out


def _check_degree(N: int) -> None:
    if not isinstance(N, (int, np.integer)) or N < 1:
        raise ValueError(f"polynomial degree must be an integer >= 1, got {N!r}")
    if N > MAX_DEGREE:
        raise ValueError(f"polynomial degree {N} exceeds supported maximum {MAX_DEGREE}")


def radau_nodes_standard(N: int) -> np.ndarray:
    """Roots of ``P_N + P_{N+1}`` on ``[-1, 1)``, first root pinned to -1."""
    _check_degree(N)
    coeffs = np.zeros(N + 2)
    coeffs[N] = 1.0
    coeffs[N + 1] = 1.0
    roots = npleg.legroots(coeffs)
    if np.max(np.abs(roots.imag if np.iscomplexobj(roots) else 0.0)) > 1e-8:
        raise ArithmeticError("Radau root finder returned complex roots")
    s = np.sort(np.real(roots))
    # Newton polish on the interior roots; s = -1 is a root exactly.
    for _ in range(2):
        p_n, dp_n = _legendre_and_derivative(N, s[1:])
        p_n1, dp_n1 = _legendre_and_derivative(N + 1, s[1:])
        s[1:] = s[1:] - (p_n + p_n1) / (dp_n + dp_n1)
    s[0] = -1.0
    if np.any(np.diff(s) <= 0) or s[-1] >= 1.0:
        raise ArithmeticError("Radau root finder did not converge to distinct nodes")
    return s


def radau_nodes(N: int, tau: float) -> np.ndarray:
    """The ``N + 1`` collocation nodes on ``[0, tau)``; the first one is exactly 0."""
    if tau <= 0:
        raise ValueError("tau must be positive")
    s = radau_nodes_standard(N)
    t = tau * (s + 1.0) / 2.0
    t[0] = 0.0
    return t


def _barycentric_weights(nodes: np.ndarray) -> np.ndarray:
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    return 1.0 / np.prod(diff, axis=1)


def _differentiation_matrix(nodes: np.ndarray) -> np.ndarray:
    """``D[j, i] = phi_i'(t_j)`` for the Lagrange basis on ``nodes``."""
    w = _barycentric_weights(nodes)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    D = (w[None, :] / w[:, None]) / diff
    inv = 1.0 / diff
    np.fill_diagonal(inv, 0.0)
    np.fill_diagonal(D, inv.sum(axis=1))
    return D


@dataclass(frozen=True)
class InterpolationBasis:
    """Lagrange cardinal basis on the left Radau nodes of ``[0, tau]``.

    Attributes follow the segment representation
    ``p(t) = p0 * phi_0(t) + C @ Phi(t)`` with ``Phi = (phi_1, ..., phi_N)``.
    """

    N: int
    tau: float
    nodes: np.ndarray
    phi0_at_tau: float
    phi0_dot_at_0: float
    sigma: np.ndarray          # (N,)  phi_0'(t_j), j = 1..N
    Phi_at_tau: np.ndarray     # (N,)
    Phi_dot_at_0: np.ndarray   # (N,)
    Psi: np.ndarray            # (N, N) Psi[i, j] = phi_{i+1}'(t_{j+1})
    D: np.ndarray = field(repr=False)  # (N+1, N+1) D[j, i] = phi_i'(t_j)
    _denominators: np.ndarray = field(repr=False)

    def values(self, t) -> np.ndarray:
        """All basis values ``phi_0..phi_N`` at ``t``; shape ``(N+1,)`` or ``(len(t), N+1)``."""
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        diff = t_arr[:, None] - self.nodes[None, :]
        n1 = self.N + 1
        out = np.empty((t_arr.size, n1))
        for i in range(n1):
            mask = np.ones(n1, dtype=bool)
            mask[i] = False
            out[:, i] = np.prod(diff[:, mask], axis=1) / self._denominators[i]
        return out[0] if np.ndim(t) == 0 else out

    def derivatives(self, t) -> np.ndarray:
        """All basis derivatives ``phi_0'..phi_N'`` at ``t``.

        Uses ``phi_i'(t) = sum_{j != i} prod_{k != i, j} (t - t_k) / prod_{k != i} (t_i - t_k)``,
        which stays exact at and near the nodes.
        """
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        diff = t_arr[:, None] - self.nodes[None, :]
        n1 = self.N + 1
        out = np.zeros((t_arr.size, n1))
        for i in range(n1):
            acc = np.zeros(t_arr.size)
            for j in range(n1):
                if j == i:
                    continue
                mask = np.ones(n1, dtype=bool)
                mask[[i, j]] = False
                acc += np.prod(diff[:, mask], axis=1)
            out[:, i] = acc / self._denominators[i]
        return out[0] if np.ndim(t) == 0 else out

    def check_interval(self, t) -> None:
        t_arr = np.asarray(t, dtype=float)
        if np.any(t_arr < 0.0) or np.any(t_arr > self.tau):
            raise ValueError(f"t must lie in [0, {self.tau}]")


def build_basis(N: int, tau: float) -> InterpolationBasis:
    nodes = radau_nodes(N, tau)
    diff = nodes[:, None] - nodes[None, :]
    np.fill_diagonal(diff, 1.0)
    denominators = np.prod(diff, axis=1)

    D = _differentiation_matrix(nodes)
    # Log-derivative at t = tau, which is never a node.
    at_tau = tau - nodes
    phi_tau = np.array([np.prod(np.delete(at_tau, i)) / denominators[i] for i in range(N + 1)])

    return InterpolationBasis(
        N=N,
        tau=float(tau),
        nodes=nodes,
        phi0_at_tau=float(phi_tau[0]),
        phi0_dot_at_0=float(D[0, 0]),
        sigma=D[1:, 0].copy(),
        Phi_at_tau=phi_tau[1:].copy(),
        Phi_dot_at_0=D[0, 1:].copy(),
        Psi=D[1:, 1:].T.copy(),
        D=D,
        _denominators=denominators,
    )


def eval_segment_poly(basis: InterpolationBasis, value_at_0, C, t) -> np.ndarray:
    """Evaluate ``value_at_0 * phi_0(t) + C @ Phi(t)``.

    A scalar ``t`` gives a vector of length ``n``; an array of times gives an
    ``(n, len(t))`` matrix.
    """
    basis.check_interval(t)
    value_at_0 = np.atleast_1d(np.asarray(value_at_0, dtype=float))
    C = np.asarray(C, dtype=float).reshape(value_at_0.size, basis.N)
    coeffs = np.column_stack([value_at_0, C])
    phi = basis.values(t)
    return coeffs @ phi.T if np.ndim(t) else coeffs @ phi
