from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class LtiSystem:
    """``x' = A x + B u`` (continuous) or ``x+ = A x + B u`` (discrete)."""

    A: np.ndarray
    B: np.ndarray
    kind: str = "continuous"

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        B = np.asarray(self.B, dtype=float)
        if B.ndim == 1:
            B = B.reshape(-1, 1)
        if A.shape[0] != A.shape[1]:
            raise ValueError(f"A must be square, got {A.shape}")
        if B.shape[0] != A.shape[0]:
            raise ValueError(f"B must have {A.shape[0]} rows, got {B.shape[0]}")
        if B.shape[1] == 0:
            raise ValueError("systems without inputs are not supported")
        if self.kind not in ("continuous", "discrete"):
            raise ValueError(f"unknown system kind {self.kind!r}")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    def step(self, x, u) -> np.ndarray:
        return self.A @ np.asarray(x, dtype=float) + self.B @ np.asarray(u, dtype=float)

    def rollout(self, x0, u_seq) -> np.ndarray:
        """States ``x(0..len(u_seq))`` of a discrete system, one row per step."""
        if self.kind != "discrete":
            raise ValueError("rollout is defined for discrete systems only")
        xs = [np.asarray(x0, dtype=float)]
        for u in u_seq:
            xs.append(self.step(xs[-1], u))
        return np.vstack(xs)


def double_integrator(axes: int = 1) -> LtiSystem:
    """Planar-style double integrator with state ``(positions, velocities)``."""
    A = np.zeros((2 * axes, 2 * axes))
    A[:axes, axes:] = np.eye(axes)
    B = np.zeros((2 * axes, axes))
    B[axes:, :] = np.eye(axes)
    return LtiSystem(A, B)
