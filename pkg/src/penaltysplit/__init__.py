"""Backward penalty splitting schemes for monotone inclusions over a constraint set."""

from .fbb import fbb_run, fbb_step
from .fbfb import fbfb_run, fbfb_step
from .penalty import DistPenalty, HalfDistSqPenalty, NormalConePenalty, SkewLinearPenalty
from .primal_dual import Block, StructuredProblem, pd_run, pd_step
from .problem import Certificate, InclusionProblem
from .problems import get_benchmark, list_benchmarks
from .schedules import ExplicitSchedule, PowerLaw

__version__ = "0.1.0"

__all__ = [
    "Block",
    "Certificate",
    "DistPenalty",
    "ExplicitSchedule",
    "HalfDistSqPenalty",
    "InclusionProblem",
    "NormalConePenalty",
    "PowerLaw",
    "SkewLinearPenalty",
    "StructuredProblem",
    "fbb_run",
    "fbb_step",
    "fbfb_run",
    "fbfb_step",
    "get_benchmark",
    "list_benchmarks",
    "pd_run",
    "pd_step",
]
