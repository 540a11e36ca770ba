"""On-disk artifacts of a synthesis run and their reader.

Layout of an output directory::

    discrete_system.json     A_d, B_d, tau, N, ell_d, LP summary
    discrete_trajectory.csv  k, t, inputs..., states...
    segments.csv             k, signal, component, node, nodal_value, control_point
    trajectory.csv           time, states..., inputs..., <name>_lower/_upper per signal
    report.json              verification report and smoothness analysis

All CSV floats use 17 significant digits so values round-trip exactly.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .config import RunConfig
from .contracts import PiecewiseContract, discretize_contract
from .errors import ArtifactError
from .interpolation import build_operator
from .synthesis import SynthesisResult, reconstruct
from .systems import LtiSystem

SYSTEM_FILE = "discrete_system.json"
DISCRETE_FILE = "discrete_trajectory.csv"
SEGMENTS_FILE = "segments.csv"
TRAJECTORY_FILE = "trajectory.csv"
REPORT_FILE = "report.json"


def fmt(x) -> str:
    return format(float(x), ".17g")


def write_csv(path: Path, header: list, rows) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\r\n")
        w.writerow(header)
        for row in rows:
            w.writerow([v if isinstance(v, str) else fmt(v) if isinstance(v, float) else v for v in row])


def write_json(path: Path, obj: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _piece_bounds(contract: PiecewiseContract) -> list:
    return [(pc.states.bounding_box(), pc.inputs.bounding_box()) for pc in contract.pieces]


def sample_times(result: SynthesisResult, points_per_segment: int) -> np.ndarray:
    tau = result.tau
    pts = [np.linspace(k * tau, (k + 1) * tau, points_per_segment, endpoint=False)
           for k in range(result.ell_d)]
    return np.concatenate(pts + [np.array([result.ell_d * tau])])


def trajectory_rows(result: SynthesisResult, cfg: RunConfig, points_per_segment: int):
    """Header and rows of the plotting table, including the active contract bounds."""
    names_x, names_u = cfg.state_names, cfg.input_names
    header = ["time"] + names_x + names_u
    header += [f"{s}_{side}" for s in names_x + names_u for side in ("lower", "upper")]
    bounds = _piece_bounds(cfg.contract)
    t = sample_times(result, points_per_segment)
    X = result.x_c(t)
    U = result.u_c(t)
    rows = []
    for i, ti in enumerate(t):
        (xlo, xhi), (ulo, uhi) = bounds[cfg.contract.piece_index(ti)]
        row = [float(ti)] + [float(v) for v in X[:, i]] + [float(v) for v in U[:, i]]
        for lo, hi in zip(np.concatenate([xlo, ulo]), np.concatenate([xhi, uhi])):
            row += [float(lo), float(hi)]
        rows.append(row)
    return header, rows


def write_artifacts(out_dir, result: SynthesisResult, cfg: RunConfig, report: dict,
                    points_per_segment: int = 50) -> list:
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    write_json(out / SYSTEM_FILE, {
        "tau": result.tau, "N": result.N, "ell_d": result.ell_d,
        "A_d": result.sys_d.A.tolist(), "B_d": result.sys_d.B.tolist(),
        "objective_mode": cfg.objective_mode,
        "objective_value": result.objective_value, "lp_iterations": result.lp_iterations,
    })
    ell = result.ell_d
    write_csv(out / DISCRETE_FILE, ["k", "t"] + cfg.input_names + cfg.state_names,
              ([k, float(k * result.tau)] + [float(v) for v in result.u_d[k]]
               + [float(v) for v in result.x_d[k]] for k in range(ell + 1)))

    seg_rows = []
    for k in range(ell):
        for signal, names, poly, cps in (("u", cfg.input_names, result.u_c, result.control_points_u),
                                         ("x", cfg.state_names, result.x_c, result.control_points_x)):
            nodal = poly.nodal(k)
            for i, name in enumerate(names):
                for j in range(result.N + 1):
                    seg_rows.append([k, signal, name, j, float(nodal[i, j]), float(cps[k][i, j])])
    write_csv(out / SEGMENTS_FILE, ["k", "signal", "component", "node", "nodal_value", "control_point"],
              seg_rows)

    header, rows = trajectory_rows(result, cfg, points_per_segment)
    write_csv(out / TRAJECTORY_FILE, header, rows)
    write_json(out / REPORT_FILE, report)
    return [SYSTEM_FILE, DISCRETE_FILE, SEGMENTS_FILE, TRAJECTORY_FILE, REPORT_FILE]


@dataclass
class LoadedRun:
    """The pieces of a saved run needed to re-certify it."""
    sys_d: LtiSystem
    tau: float
    N: int
    ell_d: int
    u_d: np.ndarray
    x_d: np.ndarray
    u_c: object
    x_c: object
    certified_input_violation: float = float("nan")
    certified_state_violation: float = float("nan")
    stored_state_mismatch: float = 0.0


def load_run(out_dir, cfg: RunConfig) -> LoadedRun:
    """Rebuild the continuous signals from the saved discrete input sequence.

    Only ``discrete_system.json`` and ``discrete_trajectory.csv`` are read; the
    polynomial segments are recomputed, so edits to the stored inputs show up
    as contract violations rather than being trusted.
    """
    out = Path(out_dir)
    if not out.is_dir():
        raise ArtifactError(f"result directory {out} does not exist", path=str(out))
    for name in (SYSTEM_FILE, DISCRETE_FILE):
        if not (out / name).is_file():
            raise ArtifactError(f"missing artifact {name} in {out}", path=str(out / name))
    try:
        meta = json.loads((out / SYSTEM_FILE).read_text(encoding="utf-8"))
        sys_d = LtiSystem(np.asarray(meta["A_d"], dtype=float), np.asarray(meta["B_d"], dtype=float),
                          kind="discrete")
        tau, N, ell = float(meta["tau"]), int(meta["N"]), int(meta["ell_d"])
        with open(out / DISCRETE_FILE, newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        header, body = rows[0], rows[1:]
        m, n = cfg.sys_c.m, cfg.sys_c.n
        if len(header) != 2 + m + n or len(body) != ell + 1:
            raise ValueError("discrete trajectory table has the wrong shape")
        data = np.array([[float(v) for v in r] for r in body])
    except (OSError, KeyError, ValueError, TypeError, IndexError) as exc:
        raise ArtifactError(f"corrupt artifacts in {out}: {exc}", path=str(out)) from exc
    if sys_d.n != cfg.sys_c.n or sys_d.m != cfg.sys_c.m:
        raise ArtifactError("saved discrete system does not match the config dimensions", path=str(out))
    if not np.all(np.isfinite(data)):
        raise ArtifactError("non-finite values in the discrete trajectory table", path=str(out))

    u_d = data[:, 2:2 + m]
    x_saved = data[:, 2 + m:]
    op = build_operator(cfg.sys_c, N, tau, tol=cfg.residual_tol)
    dcontract = discretize_contract(cfg.contract, tau, ell)
    rec = reconstruct(op, sys_d, cfg.x0, u_d, dcontract)
    traj = rec["traj"]
    return LoadedRun(sys_d=sys_d, tau=tau, N=N, ell_d=ell, u_d=u_d, x_d=traj.x_d,
                     u_c=traj.u_c, x_c=traj.x_c,
                     certified_input_violation=rec["vin"], certified_state_violation=rec["vst"],
                     stored_state_mismatch=float(np.max(np.abs(x_saved - traj.x_d))))
