"""Safety-controller synthesis for linear systems from time-varying contracts.

A continuous-time contract (input assumptions and state guarantees that vary
piecewise in time) is discretized, the system is replaced by a discrete-time
model whose trajectories lift exactly to piecewise-polynomial continuous ones,
and the discrete problem is solved as a linear program whose Bernstein
control-point constraints certify the lifted trajectory.
"""

from .contracts import (ContractPiece, HPolytope, PiecewiseContract, discretize_contract,
                        smoothness_analysis)
from .errors import (ArtifactError, AssumptionViolated, DiscreteInfeasible, InfeasibleOrder,
                     PipelineError, SchemaError, VerificationFailed)
from .interpolation import build_operator, check_interpolator, design_discrete
from .synthesis import SynthesisProblem, SynthesisResult, synthesize
from .systems import LtiSystem
from .verify import VerificationReport, certify, exact_simulate

__all__ = [
    "ArtifactError", "AssumptionViolated", "ContractPiece", "DiscreteInfeasible", "HPolytope",
    "InfeasibleOrder", "LtiSystem", "PiecewiseContract", "PipelineError", "SchemaError",
    "SynthesisProblem", "SynthesisResult", "VerificationFailed", "VerificationReport",
    "build_operator", "certify", "check_interpolator", "design_discrete", "discretize_contract",
    "exact_simulate", "smoothness_analysis", "synthesize",
]
