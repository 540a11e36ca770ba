"""Planar robot benchmark: a double integrator per axis with boxed force limits
and a sequence of position corridors over ``t in [0, 5]``.

State order is ``(x, y, v_x, v_y)``; input order is ``(F_x, F_y)``.
"""

from __future__ import annotations

import numpy as np

from .contracts import ContractPiece, HPolytope, PiecewiseContract
from .systems import LtiSystem, double_integrator

HORIZON = 5.0
FORCE_LIMIT = 5.0
VELOCITY_LIMIT = 2.0
INITIAL_STATE = np.array([1.0, 1.0, 0.0, 0.0])

# (t_start, t_end, x-range, y-range)
POSITION_CORRIDORS = (
    (0.0, 1.0, (0.0, 1.5), (0.0, 1.5)),
    (1.0, 2.0, (0.5, 2.0), (0.5, 1.5)),
    (2.0, 3.0, (1.0, 2.5), (-1.0, 3.0)),
    (3.0, 4.0, (-1.0, 1.5), (-1.0, 0.75)),
    (4.0, 5.0, (-2.0, 1.25), (-2.0, 0.0)),
)


def robot_system() -> LtiSystem:
    return double_integrator(axes=2)


def robot_contract(force_limit: float = FORCE_LIMIT) -> PiecewiseContract:
    inputs = HPolytope.box([-force_limit] * 2, [force_limit] * 2)
    pieces = []
    for t0, t1, xr, yr in POSITION_CORRIDORS:
        states = HPolytope.box([xr[0], yr[0], -VELOCITY_LIMIT, -VELOCITY_LIMIT],
                               [xr[1], yr[1], VELOCITY_LIMIT, VELOCITY_LIMIT])
        pieces.append(ContractPiece(t0, t1, inputs, states))
    return PiecewiseContract(T=HORIZON, pieces=tuple(pieces))


def robot_config(force_limit: float = FORCE_LIMIT) -> dict:
    """The benchmark as a CLI configuration dictionary."""
    sys_c = robot_system()
    pieces = []
    for t0, t1, xr, yr in POSITION_CORRIDORS:
        pieces.append({
            "t_start": t0,
            "t_end": t1,
            "inputs": {"box": {"lower": [-force_limit] * 2, "upper": [force_limit] * 2}},
            "states": {"box": {"lower": [xr[0], yr[0], -VELOCITY_LIMIT, -VELOCITY_LIMIT],
                               "upper": [xr[1], yr[1], VELOCITY_LIMIT, VELOCITY_LIMIT]}},
        })
    return {
        "schema_version": 1,
        "name": "planar-robot",
        "system": {"A": sys_c.A.tolist(), "B": sys_c.B.tolist()},
        "contract": {"T": HORIZON, "pieces": pieces},
        "x0": INITIAL_STATE.tolist(),
        "discretization": {"ell_d": 5, "N": 5},
        "objective_mode": "min_l1_input",
        "state_names": ["x", "y", "v_x", "v_y"],
        "input_names": ["F_x", "F_y"],
    }
