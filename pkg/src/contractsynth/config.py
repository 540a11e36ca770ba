"""Run configuration: JSON schema, validation and conversion to pipeline objects."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import jsonschema
import numpy as np

from .contracts import ContractPiece, HPolytope, PiecewiseContract
from .errors import SchemaError
from .synthesis import MIN_L1, OBJECTIVE_MODES
from .systems import LtiSystem

SCHEMA_VERSION = 1
N_MAX = 10
ELL_SEARCH_SPAN = 20

_matrix = {"type": "array", "minItems": 1,
           "items": {"type": "array", "minItems": 1, "items": {"type": "number"}}}
_vector = {"type": "array", "minItems": 1, "items": {"type": "number"}}
_auto_int = {"oneOf": [{"type": "integer", "minimum": 1}, {"const": "auto"}]}

CONFIG_SCHEMA = {
    "$schema": "https://json-schema.org/draft/2020-12/schema",
    "title": "contractsynth run configuration",
    "type": "object",
    "required": ["schema_version", "system", "contract", "x0"],
    "additionalProperties": False,
    "properties": {
        "schema_version": {"const": SCHEMA_VERSION},
        "name": {"type": "string"},
        "system": {
            "type": "object",
            "required": ["A", "B"],
            "additionalProperties": False,
            "properties": {"A": _matrix, "B": _matrix},
        },
        "contract": {
            "type": "object",
            "required": ["T", "pieces"],
            "additionalProperties": False,
            "properties": {
                "T": {"type": "number", "exclusiveMinimum": 0},
                "pieces": {"type": "array", "minItems": 1, "items": {"$ref": "#/$defs/piece"}},
            },
        },
        "x0": _vector,
        "discretization": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "ell_d": _auto_int,
                "N": _auto_int,
                "N_max": {"type": "integer", "minimum": 1, "maximum": 20},
                "ell_max": {"type": "integer", "minimum": 1},
            },
        },
        "tolerances": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "residual": {"type": "number", "exclusiveMinimum": 0},
                "membership": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "objective_mode": {"enum": list(OBJECTIVE_MODES)},
        "output_dir": {"type": "string"},
        "grid": {"type": "integer", "minimum": 2},
        "state_names": {"type": "array", "items": {"type": "string"}},
        "input_names": {"type": "array", "items": {"type": "string"}},
    },
    "$defs": {
        "set": {
            "oneOf": [
                {"type": "object", "required": ["box"], "additionalProperties": False,
                 "properties": {"box": {"type": "object", "required": ["lower", "upper"],
                                        "additionalProperties": False,
                                        "properties": {"lower": _vector, "upper": _vector}}}},
                {"type": "object", "required": ["H", "h"], "additionalProperties": False,
                 "properties": {"H": _matrix, "h": _vector}},
            ]
        },
        "piece": {
            "type": "object",
            "required": ["t_start", "t_end", "inputs", "states"],
            "additionalProperties": False,
            "properties": {
                "t_start": {"type": "number"},
                "t_end": {"type": "number"},
                "inputs": {"$ref": "#/$defs/set"},
                "states": {"$ref": "#/$defs/set"},
            },
        },
    },
}


@dataclass
class RunConfig:
    sys_c: LtiSystem
    contract: PiecewiseContract
    x0: np.ndarray
    ell_d: Union[int, str] = "auto"
    N: Union[int, str] = "auto"
    N_max: int = N_MAX
    ell_max: Optional[int] = None
    residual_tol: float = 1e-8
    membership_tol: float = 1e-7
    objective_mode: str = MIN_L1
    output_dir: Optional[str] = None
    grid: int = 200
    name: str = "run"
    state_names: list = field(default_factory=list)
    input_names: list = field(default_factory=list)
    raw: dict = field(default_factory=dict)


def _field_path(err: jsonschema.ValidationError) -> str:
    return "/".join(str(p) for p in err.absolute_path) or "<root>"


def _build_set(spec: dict, dim: int, where: str) -> HPolytope:
    if "box" in spec:
        lo, up = spec["box"]["lower"], spec["box"]["upper"]
        if len(lo) != dim or len(up) != dim:
            raise SchemaError(f"{where}: box bounds must have length {dim}", field=where)
        return HPolytope.box(lo, up)
    H = np.asarray(spec["H"], dtype=float)
    h = np.asarray(spec["h"], dtype=float)
    if H.ndim != 2 or H.shape[1] != dim or H.shape[0] != h.size:
        raise SchemaError(f"{where}: H must be (k, {dim}) with len(h) == k", field=where)
    return HPolytope(H, h)


def parse_config(raw: dict) -> RunConfig:
    """Validate a decoded config and build the pipeline objects."""
    validator = jsonschema.Draft202012Validator(CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(raw), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        raise SchemaError(f"{_field_path(err)}: {err.message}", field=_field_path(err),
                          num_errors=len(errors))

    try:
        sys_c = LtiSystem(np.asarray(raw["system"]["A"], dtype=float),
                          np.asarray(raw["system"]["B"], dtype=float))
    except ValueError as exc:
        raise SchemaError(f"system: {exc}", field="system") from exc
    n, m = sys_c.n, sys_c.m
    x0 = np.asarray(raw["x0"], dtype=float)
    if x0.size != n:
        raise SchemaError(f"x0: expected {n} entries, got {x0.size}", field="x0")

    pieces = []
    for j, pc in enumerate(raw["contract"]["pieces"]):
        where = f"contract/pieces/{j}"
        pieces.append(ContractPiece(float(pc["t_start"]), float(pc["t_end"]),
                                    _build_set(pc["inputs"], m, where + "/inputs"),
                                    _build_set(pc["states"], n, where + "/states")))
    try:
        contract = PiecewiseContract(T=float(raw["contract"]["T"]), pieces=tuple(pieces))
    except ValueError as exc:
        raise SchemaError(f"contract: {exc}", field="contract") from exc

    disc = raw.get("discretization", {})
    tols = raw.get("tolerances", {})
    names_x = raw.get("state_names") or [f"x{i}" for i in range(n)]
    names_u = raw.get("input_names") or [f"u{i}" for i in range(m)]
    if len(names_x) != n or len(names_u) != m:
        raise SchemaError("state_names/input_names do not match the system dimensions",
                          field="state_names")
    return RunConfig(
        sys_c=sys_c, contract=contract, x0=x0,
        ell_d=disc.get("ell_d", "auto"), N=disc.get("N", "auto"),
        N_max=disc.get("N_max", N_MAX), ell_max=disc.get("ell_max"),
        residual_tol=float(tols.get("residual", 1e-8)),
        membership_tol=float(tols.get("membership", 1e-7)),
        objective_mode=raw.get("objective_mode", MIN_L1),
        output_dir=raw.get("output_dir"), grid=int(raw.get("grid", 200)),
        name=raw.get("name", "run"), state_names=list(names_x), input_names=list(names_u),
        raw=raw,
    )


def load_config(path) -> RunConfig:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SchemaError(f"cannot read config {path}: {exc.strerror}", field="<file>") from exc
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
                          line=exc.lineno, column=exc.colno) from exc
    return parse_config(raw)
