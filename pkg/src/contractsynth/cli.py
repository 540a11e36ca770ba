"""Command-line front end: ``analyze``, ``synthesize``, ``verify`` and ``demo``."""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from pathlib import Path
from typing import Optional

from . import artifacts
from .config import ELL_SEARCH_SPAN, RunConfig, load_config, parse_config
from .contracts import discretize_contract, smoothness_analysis
from .errors import AssumptionViolated, DiscreteInfeasible, InfeasibleOrder, PipelineError, VerificationFailed
from .interpolation import build_operator, design_discrete
from .robot import robot_config
from .synthesis import OBJECTIVE_MODES, SynthesisProblem, SynthesisResult, synthesize
from .verify import MISMATCH_TOL, certify

OUT_ENV = "CONTRACTSYNTH_OUT"
DEFAULT_OUT = "contractsynth_out"

logger = logging.getLogger("contractsynth")


def _clean(obj):
    """JSON-safe copy: non-finite floats become null."""
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    return obj


def resolve_out_dir(args_out: Optional[str], cfg: Optional[RunConfig]) -> Path:
    """``--out`` beats the environment variable, which beats ``output_dir`` in the config."""
    if args_out:
        return Path(args_out)
    if os.environ.get(OUT_ENV):
        return Path(os.environ[OUT_ENV])
    if cfg is not None and cfg.output_dir:
        return Path(cfg.output_dir)
    return Path(DEFAULT_OUT)


def apply_overrides(cfg: RunConfig, args) -> RunConfig:
    if getattr(args, "tolerance", None) is not None:
        cfg.residual_tol = args.tolerance
    if getattr(args, "grid", None) is not None:
        cfg.grid = args.grid
    if getattr(args, "objective", None) is not None:
        cfg.objective_mode = args.objective
    return cfg


def run_pipeline(cfg: RunConfig) -> SynthesisResult:
    """Synthesize with fixed or searched ``(ell_d, N)``.

    The search walks ``ell_d`` upward from the smoothness bound and, for each,
    ``N = 1..N_max``; the first feasible pair wins.  Under the search an
    ``ell_d`` whose windows produce an empty discretized set is skipped.
    """
    report = smoothness_analysis(cfg.contract)
    if cfg.ell_d == "auto":
        ell_hi = cfg.ell_max or report.min_ell + ELL_SEARCH_SPAN
        ells = range(report.min_ell, ell_hi + 1)
    else:
        ells = [int(cfg.ell_d)]
    Ns = range(1, cfg.N_max + 1) if cfg.N == "auto" else [int(cfg.N)]

    last_err: Optional[PipelineError] = None
    for ell in ells:
        tau = cfg.contract.T / ell
        if cfg.ell_d == "auto":
            try:
                discretize_contract(cfg.contract, tau, ell)
            except AssumptionViolated as exc:
                logger.info("ell_d=%d: %s", ell, exc)
                last_err = exc
                continue
        for N in Ns:
            problem = SynthesisProblem(cfg.sys_c, cfg.contract, cfg.x0, ell, N,
                                       objective_mode=cfg.objective_mode, tol=cfg.residual_tol)
            try:
                op = build_operator(cfg.sys_c, N, tau, tol=cfg.residual_tol)
                sys_d = design_discrete(op)
                result = synthesize(problem, op=op, sys_d=sys_d)
            except (InfeasibleOrder, DiscreteInfeasible) as exc:
                logger.info("ell_d=%d N=%d: %s", ell, N, exc.code)
                last_err = exc
                continue
            result.smoothness = report
            return result
    assert last_err is not None
    raise last_err


def verification_dict(result, cfg: RunConfig) -> dict:
    rep = certify(result, cfg.contract, cfg.sys_c, cfg.x0,
                  points_per_segment=cfg.grid, tol=cfg.membership_tol)
    d = rep.to_dict()
    if rep.max_trajectory_mismatch > MISMATCH_TOL:
        d["implements"] = False
    return d


def build_report(result: SynthesisResult, cfg: RunConfig) -> dict:
    return _clean({
        "name": cfg.name,
        "objective_mode": cfg.objective_mode,
        "tau": result.tau,
        "N": result.N,
        "ell_d": result.ell_d,
        "objective_value": result.objective_value,
        "lp_iterations": result.lp_iterations,
        "lp_agreement": result.lp_agreement,
        "smoothness": result.smoothness.to_dict() if result.smoothness else None,
        "verification": verification_dict(result, cfg),
    })


def _print_verification(v: dict, out=None) -> None:
    out = out or sys.stdout
    verdict = "IMPLEMENTS" if v["implements"] else "DOES NOT IMPLEMENT"
    print(f"verdict: {verdict}", file=out)
    print(f"  max input violation   {v['max_input_violation']:.3e}", file=out)
    print(f"  max state violation   {v['max_state_violation']:.3e}", file=out)
    print(f"  trajectory mismatch   {v['max_trajectory_mismatch']:.3e}", file=out)
    print(f"  grid points/segment   {v['grid_points_per_segment']}", file=out)


# -- commands ---------------------------------------------------------------

def cmd_analyze(args) -> int:
    cfg = load_config(args.config)
    report = smoothness_analysis(cfg.contract)
    if args.json:
        print(json.dumps(_clean(report.to_dict()), sort_keys=True))
        return 0
    print(f"r_c = {report.r_c:g}")
    print(f"min_ell = ceil(T / r_c) = {report.min_ell}")
    print("piece starts (t, backward radius, forward radius):")
    for t, lo, up in report.radii:
        print(f"  t={t:g}  r_lower={lo:g}  r_upper={up:g}")
    return 0


def _synthesize_and_write(cfg: RunConfig, out_dir: Path, plot_points: int) -> dict:
    t0 = time.perf_counter()
    result = run_pipeline(cfg)
    report = build_report(result, cfg)
    files = artifacts.write_artifacts(out_dir, result, cfg, report, points_per_segment=plot_points)
    elapsed = time.perf_counter() - t0
    print(f"tau = {result.tau:g}, N = {result.N}, ell_d = {result.ell_d}, "
          f"objective = {result.objective_value:.6g} ({elapsed:.2f} s)")
    _print_verification(report["verification"])
    print(f"artifacts written to {out_dir}: {', '.join(files)}")
    return report


def cmd_synthesize(args) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    out_dir = resolve_out_dir(args.out, cfg)
    report = _synthesize_and_write(cfg, out_dir, args.plot_points)
    if not report["verification"]["implements"]:
        raise VerificationFailed("synthesized controller failed independent verification",
                                 worst_time=report["verification"]["worst_time"])
    return 0


def cmd_verify(args) -> int:
    cfg = apply_overrides(load_config(args.config), args)
    out_dir = Path(args.results) if args.results else resolve_out_dir(args.out, cfg)
    run = artifacts.load_run(out_dir, cfg)
    v = verification_dict(run, cfg)
    v["stored_state_mismatch"] = run.stored_state_mismatch
    if run.stored_state_mismatch > MISMATCH_TOL:
        v["implements"] = False
    v = _clean(v)
    if args.json:
        print(json.dumps(v, sort_keys=True))
    else:
        _print_verification(v)
    if not v["implements"]:
        raise VerificationFailed("saved result does not implement the contract",
                                 worst_time=v["worst_time"])
    return 0


def cmd_demo(args) -> int:
    cfg = apply_overrides(parse_config(robot_config()), args)
    out_dir = resolve_out_dir(args.out, None)
    if not args.out and not os.environ.get(OUT_ENV):
        out_dir = Path(DEFAULT_OUT) / "demo"
    print("planar robot: T = 5, ell_d = 5, N = 5, x0 at rest at (1, 1)")
    report = _synthesize_and_write(cfg, out_dir, args.plot_points)
    if not report["verification"]["implements"]:
        raise VerificationFailed("demo controller failed independent verification")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="contractsynth",
                                     description="Contract-based safety controller synthesis.")
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, config_required=True):
        if config_required:
            p.add_argument("--config", required=True, help="JSON run configuration")
        p.add_argument("--out", help=f"output directory (overrides ${OUT_ENV})")
        p.add_argument("--tolerance", type=float, help="relative residual tolerance")
        p.add_argument("--grid", type=int, help="verification points per segment")
        p.add_argument("--objective", choices=OBJECTIVE_MODES)

    p = sub.add_parser("analyze", help="smoothness radius and minimum number of samples")
    p.add_argument("--config", required=True)
    p.add_argument("--json", action="store_true", help="machine-readable output")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("synthesize", help="synthesize, verify and write artifacts")
    common(p)
    p.add_argument("--plot-points", type=int, default=50, help="plot samples per segment")
    p.set_defaults(func=cmd_synthesize)

    p = sub.add_parser("verify", help="re-certify saved artifacts")
    common(p)
    p.add_argument("--results", help="artifact directory (defaults to the output directory)")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("demo", help="planar robot benchmark")
    common(p, config_required=False)
    p.add_argument("--plot-points", type=int, default=50)
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except PipelineError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        print(json.dumps(_clean(exc.to_dict()), sort_keys=True, default=str), file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
