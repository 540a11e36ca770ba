"""Structured pipeline failures.  Each carries a stable ``code`` and CLI exit status."""

from __future__ import annotations


class PipelineError(Exception):
    code = "pipeline_error"
    exit_code = 1

    def __init__(self, message: str, **details):
        super().__init__(message)
        self.details = details

    def to_dict(self) -> dict:
        return {"error": self.code, "message": str(self), **self.details}


class SchemaError(PipelineError):
    code = "schema_error"
    exit_code = 2


class AssumptionViolated(PipelineError):
    code = "assumption_violated"
    exit_code = 3


class InfeasibleOrder(PipelineError):
    code = "infeasible_order"
    exit_code = 4


class DiscreteInfeasible(PipelineError):
    code = "discrete_infeasible"
    exit_code = 5


class VerificationFailed(PipelineError):
    code = "verification_failed"
    exit_code = 6


class ArtifactError(PipelineError):
    code = "artifact_error"
    exit_code = 7
