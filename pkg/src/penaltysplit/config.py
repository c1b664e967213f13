"""Run configuration: JSON schema, validation and problem construction.

A config names either a registered benchmark or an inline problem. The
operator, set and schedule sub-objects use the same dictionaries as the
``*_from_dict`` builders, which reject unknown fields themselves.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .operators import resolvent_op_from_dict, single_valued_op_from_dict
from .penalty import penalty_from_dict
from .primal_dual import Block, StructuredProblem
from .problem import Certificate, InclusionProblem
from .problems import Benchmark, get_benchmark
from .schedules import DEFAULT_SCHEDULE, StepSchedule, schedule_from_dict

__all__ = [
    "CONFIG_SCHEMA_VERSION",
    "ConfigError",
    "RunConfig",
    "ProblemSpec",
    "load_config",
    "config_json_schema",
    "resolve",
    "Resolved",
]

CONFIG_SCHEMA_VERSION = 1

Vector = list[float]
Matrix = list[list[float]]


class ConfigError(ValueError):
    """The config is unreadable, fails validation, or describes an ill-formed problem."""


class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid")


class CertificateSpec(_Strict):
    u: Vector
    v: Vector
    p: Vector


class BlockSpec(_Strict):
    A: dict[str, Any] = Field(description="set-valued A_i, resolvent operator dictionary")
    D_inv: dict[str, Any] = Field(description="single-valued D_i^{-1}")
    L: Matrix = Field(description="nonzero g_i x d matrix")


class ProblemSpec(_Strict):
    A: dict[str, Any] = Field(description='e.g. {"kind": "subdiff_quadratic", "a": [2, 3], "weight": 1}')
    D: dict[str, Any] = Field(description='e.g. {"kind": "zero", "dim": 2} or {"kind": "skew", "matrix": ...}')
    B: dict[str, Any] = Field(description='e.g. {"penalty": "half_dist_sq", "set": {"variant": "halfspace", ...}}')
    x0: Optional[Vector] = None
    solution: Optional[Vector] = None
    certificate: Optional[CertificateSpec] = None
    blocks: Optional[list[BlockSpec]] = Field(
        default=None, description="dual blocks; present (possibly empty) only for the primal-dual scheme")
    v0: Optional[list[Vector]] = None
    dual_solution: Optional[list[Vector]] = None


class RunConfig(_Strict):
    schema_version: int = Field(default=CONFIG_SCHEMA_VERSION, alias="schema")
    algorithm: Optional[Literal["fbb", "fbfb", "pd"]] = Field(
        default=None, description="defaults to the benchmark's algorithm, or fbb")
    benchmark: Optional[str] = None
    problem: Optional[ProblemSpec] = None
    schedule: Optional[dict[str, Any]] = Field(
        default=None, description='{"family": "power_law", "lambda0", "p", "beta0", "q"} or '
                                  '{"family": "explicit", "lambdas", "betas"}')
    budget: int = Field(default=10_000, ge=1)
    seed: int = Field(default=0, description="seeds the sampled checks of the 'check' command")
    stop_tol: Optional[float] = Field(default=None, gt=0)
    out_dir: str = "out"
    override_hypotheses: bool = False
    trace: Literal["log", "all", "none"] = "log"
    p_witness: Optional[Vector] = None
    compare_steps: int = Field(default=1000, ge=1)
    variant: Literal["standard"] = Field(
        default="standard", description="reserved for future solver variants; only 'standard' exists")

    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    @model_validator(mode="after")
    def _one_source(self):
        if (self.benchmark is None) == (self.problem is None):
            raise ValueError("give exactly one of 'benchmark' and 'problem'")
        if self.schema_version != CONFIG_SCHEMA_VERSION:
            raise ValueError(f"unsupported config schema {self.schema_version}; expected {CONFIG_SCHEMA_VERSION}")
        return self


def config_json_schema() -> dict[str, Any]:
    schema = RunConfig.model_json_schema(by_alias=True)
    schema["$schema"] = "https://json-schema.org/draft/2020-12/schema"
    schema["title"] = "penaltysplit run config"
    return schema


def load_config(path: str | Path | None = None, **overrides) -> RunConfig:
    """Read and validate a JSON config; ``overrides`` with value ``None`` are ignored."""
    data: dict[str, Any] = {}
    if path is not None:
        try:
            data = json.loads(Path(path).read_text())
        except OSError as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        except json.JSONDecodeError as exc:
            raise ConfigError(f"malformed JSON in {path}: {exc}") from exc
        if not isinstance(data, dict):
            raise ConfigError("config must be a JSON object")
    for k, v in overrides.items():
        if v is not None:
            data[k] = v
    if overrides.get("benchmark") is not None:
        data.pop("problem", None)
    try:
        return RunConfig.model_validate(data)
    except ValidationError as exc:
        raise ConfigError(f"schema error:\n{exc}") from exc


class Resolved:
    """A validated config turned into concrete objects."""

    def __init__(self, cfg: RunConfig, problem, schedule: StepSchedule, algorithm: str,
                 benchmark: Benchmark | None):
        self.cfg = cfg
        self.problem = problem
        self.schedule = schedule
        self.algorithm = algorithm
        self.benchmark = benchmark

    @property
    def structured(self) -> bool:
        return isinstance(self.problem, StructuredProblem)


def _vec(x):
    return None if x is None else np.asarray(x, dtype=float)


def _inline_problem(spec: ProblemSpec):
    A = resolvent_op_from_dict(spec.A)
    D = single_valued_op_from_dict(spec.D)
    B = penalty_from_dict(spec.B)
    cert = None
    if spec.certificate is not None:
        c = spec.certificate
        cert = Certificate(_vec(c.u), _vec(c.v), _vec(c.p))
    if spec.blocks is None:
        if spec.v0 is not None or spec.dual_solution is not None:
            raise ConfigError("'v0' and 'dual_solution' need 'blocks'")
        return InclusionProblem(A, D, B, x0=_vec(spec.x0), known_solution=_vec(spec.solution),
                                certificate=cert, label="inline")
    blocks = [
        Block(resolvent_op_from_dict(b.A), single_valued_op_from_dict(b.D_inv), np.asarray(b.L, dtype=float))
        for b in spec.blocks
    ]
    return StructuredProblem(
        A, D, tuple(blocks), B,
        x0=_vec(spec.x0),
        v0=None if spec.v0 is None else tuple(_vec(v) for v in spec.v0),
        primal_solution=_vec(spec.solution),
        dual_solution=None if spec.dual_solution is None else tuple(_vec(v) for v in spec.dual_solution),
        certificate=cert,
        label="inline",
    )


def resolve(cfg: RunConfig) -> Resolved:
    """Build the problem and schedule a config describes.

    Construction failures (unknown kinds, dimension mismatches, invalid
    certificates) surface as :class:`ConfigError`.
    """
    bench = None
    try:
        if cfg.benchmark is not None:
            bench = get_benchmark(cfg.benchmark)
            problem = bench.problem
            schedule = bench.schedule
            algorithm = bench.algorithm
        else:
            problem = _inline_problem(cfg.problem)
            schedule = DEFAULT_SCHEDULE
            algorithm = "pd" if isinstance(problem, StructuredProblem) else "fbb"
        if cfg.schedule is not None:
            schedule = schedule_from_dict(cfg.schedule)
    except ConfigError:
        raise
    except (KeyError, ValueError, TypeError) as exc:
        raise ConfigError(str(exc).strip("'\"")) from exc

    algorithm = cfg.algorithm or algorithm
    structured = isinstance(problem, StructuredProblem)
    if structured and algorithm != "pd":
        raise ConfigError(f"a problem with dual blocks needs algorithm 'pd', not {algorithm!r}")
    if not structured and algorithm == "pd":
        raise ConfigError("algorithm 'pd' needs a problem with 'blocks'")
    return Resolved(cfg, problem, schedule, algorithm, bench)
