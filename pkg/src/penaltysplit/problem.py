"""The constrained inclusion ``0 in Ax + Dx + N_C(x)`` with ``C = zer B``."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .operators import ResolventOp, SingleValuedOp
from .penalty import PenaltyOp
from .schedules import StepSchedule, Verdict, classify_gap_summability, classify_l2_not_l1
from .space import DimensionError, as_point, normal_cone_contains

__all__ = [
    "AdmissionError",
    "HypothesisViolation",
    "NumericalAbort",
    "Certificate",
    "InclusionProblem",
    "check_hypotheses",
    "enforce_hypotheses",
]


class AdmissionError(ValueError):
    """The problem's operator classes do not fit the requested solver."""


class HypothesisViolation(RuntimeError):
    """A machine-checkable convergence hypothesis is known to fail."""

    def __init__(self, message: str, verdicts: dict[str, Verdict]):
        super().__init__(message)
        self.verdicts = verdicts


class NumericalAbort(FloatingPointError):
    """An iterate became non-finite."""

    def __init__(self, message: str, iteration: int):
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class Certificate:
    """Decomposition ``w = v + D u + p`` with ``v in A u`` and ``p in N_C(u)``.

    ``w = 0`` exactly when ``u`` solves the inclusion.
    """

    u: np.ndarray
    v: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        for name in ("u", "v", "p"):
            object.__setattr__(self, name, as_point(getattr(self, name)))
        if not (self.u.shape == self.v.shape == self.p.shape):
            raise DimensionError("certificate components must share a dimension")


@dataclass(frozen=True)
class InclusionProblem:
    A: ResolventOp
    D: SingleValuedOp
    B: PenaltyOp
    x0: np.ndarray | None = None
    known_solution: np.ndarray | None = None
    certificate: Certificate | None = None
    label: str = ""

    def __post_init__(self):
        d = self.A.dim
        if self.D.dim != d or self.B.dim != d:
            raise DimensionError(f"operator dimensions disagree: A={d}, D={self.D.dim}, B={self.B.dim}")
        object.__setattr__(self, "x0", np.zeros(d) if self.x0 is None else as_point(self.x0, d))
        if self.known_solution is not None:
            object.__setattr__(self, "known_solution", as_point(self.known_solution, d))
        if self.certificate is not None:
            if self.certificate.u.shape != (d,):
                raise DimensionError("certificate dimension does not match the problem")
            self.validate_certificate(self.certificate)

    @property
    def dim(self) -> int:
        return self.A.dim

    @property
    def C(self):
        return self.B.zero_set

    def w(self, cert: Certificate) -> np.ndarray:
        return cert.v + self.D(cert.u) + cert.p

    def validate_certificate(self, cert: Certificate, tol: float = 1e-8) -> None:
        """Check ``u in C``, ``p in N_C(u)`` and ``v in A u`` (as ``u = J_A(u + v)``)."""
        if not self.C.contains(cert.u, tol):
            raise ValueError("certificate point u is not in C")
        if not normal_cone_contains(self.C, cert.u, cert.p, tol):
            raise ValueError("certificate p is not in N_C(u)")
        if np.linalg.norm(self.A(1.0, cert.u + cert.v) - cert.u) > tol:
            raise ValueError("certificate v is not in A(u)")


def check_hypotheses(problem: InclusionProblem, schedule: StepSchedule, p_witness=None) -> dict[str, Verdict]:
    """Verdicts for the three convergence hypotheses.

    Condition (i), maximal monotonicity of ``A + N_C`` together with a
    nonempty solution set, is recorded as a user assertion.
    """
    if p_witness is None and problem.certificate is not None:
        p_witness = problem.certificate.p
    return {
        "i": Verdict("unknown", "user-asserted: A + N_C maximally monotone and the solution set is nonempty"),
        "ii": classify_gap_summability(schedule, problem.B, p_witness),
        "iii": classify_l2_not_l1(schedule),
    }


def enforce_hypotheses(verdicts: dict[str, Verdict]) -> None:
    failed = {k: v for k, v in verdicts.items() if v.failed}
    if failed:
        detail = "; ".join(f"({k}) {v.status}: {v.reason}" for k, v in failed.items())
        raise HypothesisViolation(f"convergence hypotheses fail: {detail}", verdicts)
