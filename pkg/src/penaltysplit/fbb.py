"""Backward penalty scheme with one forward step (cocoercive ``D``).

Each iteration::

    y = x_prev - lam * D(x_prev)
    w = J_{lam A}(y)
    x = J_{lam beta B}(w)
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .diagnostics import SolveReport, Trace
from .operators import ETA_CAP
from .problem import AdmissionError, Certificate, InclusionProblem, check_hypotheses, enforce_hypotheses
from .runner import DEFAULT_STOP_TOL, drive
from .schedules import DEFAULT_SCHEDULE, StepSchedule

__all__ = ["FbbState", "admit_fbb", "fbb_step", "fbb_lemma_certificate", "fbb_run"]


@dataclass(frozen=True)
class FbbState:
    n: int
    x_prev: np.ndarray
    y_prev: np.ndarray
    w: np.ndarray
    x: np.ndarray


def admit_fbb(prob: InclusionProblem) -> None:
    if prob.D.regularity not in ("cocoercive", "zero"):
        raise AdmissionError(
            f"the one-forward-step scheme needs a cocoercive D, got {prob.D.regularity} "
            f"({prob.D.label or 'D'}); use the two-forward-step solver 'fbfb' instead"
        )


def fbb_step(prob: InclusionProblem, x_prev, lam: float, beta: float, n: int = 1) -> FbbState:
    if not (lam > 0 and beta > 0):
        raise ValueError("lambda and beta must be positive")
    admit_fbb(prob)
    x_prev = np.asarray(x_prev, dtype=float)
    y = x_prev - lam * prob.D(x_prev)
    w = prob.A(lam, y)
    x = prob.B.resolvent(lam * beta, w)
    return FbbState(n, x_prev, y, w, x)


def _eta(prob: InclusionProblem) -> float:
    return min(prob.D.eta, ETA_CAP)


def _sq(a: np.ndarray) -> float:
    return float(np.dot(a, a))


@dataclass(frozen=True)
class _CertTerms:
    """Certificate quantities that stay fixed along a run."""

    u: np.ndarray
    v: np.ndarray
    p: np.ndarray
    Du: np.ndarray
    w: np.ndarray
    shift_sq: float
    gap: Callable[[float], float]

    @classmethod
    def of(cls, prob: InclusionProblem, cert: Certificate) -> "_CertTerms":
        Du = prob.D(cert.u)
        return cls(cert.u, cert.v, cert.p, Du, cert.v + Du + cert.p, _sq(Du + cert.v),
                   prob.B.gap_curve(cert.p))


def _residual(t: _CertTerms, x_prev, Dx_prev, wn, x, lam, beta, eta) -> float:
    u = t.u
    lhs = (
        _sq(x - u) - _sq(x_prev - u)
        + lam * (2 * eta - lam) * _sq(Dx_prev - t.Du)
        + 0.5 * _sq(x - wn)
        + 0.5 * _sq(x - wn - lam * (t.Du + t.v))
        + _sq(x_prev - wn - lam * (Dx_prev - t.Du))
    )
    gap = t.gap(beta)
    gap_term = 2 * lam * beta * gap if gap != 0.0 else 0.0
    rhs = gap_term + 2 * lam * float(np.dot(t.w, u - x)) + 2 * lam**2 * t.shift_sq
    return float(lhs - rhs)


def fbb_lemma_certificate(state: FbbState, prob: InclusionProblem, cert: Certificate | None,
                          lam: float, beta: float, eta: float | None = None) -> float:
    """Signed ``LHS - RHS`` of the per-iteration inequality of the scheme.

    Nonpositive values confirm the inequality at this iteration. The gap
    term uses the penalty's closed-form gap (an upper bound where exact
    values are unavailable), which keeps the inequality valid.
    """
    if cert is None:
        raise ValueError("a certificate (u, v, p) is required")
    if eta is None:
        eta = _eta(prob)
    return _residual(_CertTerms.of(prob, cert), state.x_prev, prob.D(state.x_prev),
                     state.w, state.x, lam, beta, eta)


def fbb_run(
    prob: InclusionProblem,
    schedule: StepSchedule = DEFAULT_SCHEDULE,
    budget: int = 10_000,
    *,
    x0=None,
    override_hypotheses: bool = False,
    monitor_certificate: bool = True,
    stop_tol: float | None = DEFAULT_STOP_TOL,
    trace_mode: str = "log",
) -> tuple[SolveReport, Trace]:
    """Iterate the scheme from ``x0`` (default: the problem's ``x0``) for ``budget`` steps.

    Raises :class:`~penaltysplit.problem.HypothesisViolation` when the
    schedule/penalty pair is known to break the convergence hypotheses,
    unless ``override_hypotheses`` is set.
    """
    admit_fbb(prob)
    verdicts = check_hypotheses(prob, schedule)
    if not override_hypotheses:
        enforce_hypotheses(verdicts)

    cert = prob.certificate if monitor_certificate else None
    eta = _eta(prob)
    D, A, B = prob.D, prob.A, prob.B

    terms = _CertTerms.of(prob, cert) if cert is not None else None

    def advance(x_prev, n, lam, beta):
        Dx = D(x_prev)
        w = A(lam, x_prev - lam * Dx)
        x = B.resolvent(lam * beta, w)
        res = None if terms is None else _residual(terms, x_prev, Dx, w, x, lam, beta, eta)
        return x, x, res

    start = prob.x0 if x0 is None else np.asarray(x0, dtype=float)
    scale = 1.0 + (float(np.sum((start - cert.u) ** 2)) if cert is not None else 0.0)
    report, trace = drive(
        "fbb", advance, start, schedule, budget,
        coord_names=[f"x{i}" for i in range(prob.dim)],
        solution=prob.known_solution,
        step_bound=2 * eta if math.isfinite(eta) else None,
        lemma_scale=scale,
        stop_tol=stop_tol,
        trace_mode=trace_mode,
    )
    report.verdicts = {k: v.to_dict() for k, v in verdicts.items()}
    return report, trace
