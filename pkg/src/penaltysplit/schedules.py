"""Step sizes ``lambda_n`` and penalty parameters ``beta_n``, with hypothesis classifiers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Literal, Sequence

import numpy as np

from .penalty import DistPenalty, HalfDistSqPenalty, NormalConePenalty, PenaltyOp, SkewLinearPenalty

__all__ = [
    "StepSchedule",
    "PowerLaw",
    "ExplicitSchedule",
    "CustomSchedule",
    "Verdict",
    "DEFAULT_SCHEDULE",
    "classify_l2_not_l1",
    "classify_gap_summability",
    "tail_exponent",
    "numeric_summability",
    "schedule_from_dict",
]

PARTIAL_SUM_HORIZON = 10**5


class StepSchedule:
    """Sequence ``n -> (lambda_n, beta_n)`` for ``n >= 1``."""

    family: str = ""

    def __call__(self, n: int) -> tuple[float, float]:
        raise NotImplementedError

    def lambdas(self, n_max: int) -> np.ndarray:
        return np.array([self(n)[0] for n in range(1, n_max + 1)])

    def betas(self, n_max: int) -> np.ndarray:
        return np.array([self(n)[1] for n in range(1, n_max + 1)])

    @property
    def length(self) -> int | None:
        """Number of available terms, ``None`` if unbounded."""
        return None

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError


@dataclass(frozen=True)
class PowerLaw(StepSchedule):
    """``lambda_n = lambda0 * n^-p`` and ``beta_n = beta0 * n^q``."""

    lambda0: float = 1.0
    p: float = 1.0
    beta0: float = 1.0
    q: float = 1.0
    family: str = field(default="power_law", init=False)

    def __post_init__(self):
        if not (self.lambda0 > 0 and self.beta0 > 0):
            raise ValueError("lambda0 and beta0 must be positive")
        if not (math.isfinite(self.p) and math.isfinite(self.q)):
            raise ValueError("exponents must be finite")

    def __call__(self, n):
        if n < 1:
            raise ValueError("schedules are indexed from n = 1")
        return self.lambda0 * n ** (-self.p), self.beta0 * n ** self.q

    def lambdas(self, n_max):
        n = np.arange(1, n_max + 1, dtype=float)
        return self.lambda0 * n ** (-self.p)

    def betas(self, n_max):
        n = np.arange(1, n_max + 1, dtype=float)
        return self.beta0 * n ** self.q

    def to_dict(self):
        return {"family": self.family, "lambda0": self.lambda0, "p": self.p, "beta0": self.beta0, "q": self.q}


class ExplicitSchedule(StepSchedule):
    family = "explicit"

    def __init__(self, lambdas: Sequence[float], betas: Sequence[float]):
        lam = np.asarray(lambdas, dtype=float)
        bet = np.asarray(betas, dtype=float)
        if lam.ndim != 1 or lam.shape != bet.shape or lam.size == 0:
            raise ValueError("explicit schedule needs two nonempty lists of equal length")
        if np.any(~(lam > 0)) or np.any(~(bet > 0)) or not np.all(np.isfinite(lam * bet)):
            raise ValueError("explicit schedule entries must be positive and finite")
        self._lam = lam
        self._bet = bet

    def __call__(self, n):
        if not 1 <= n <= self._lam.size:
            raise IndexError(f"explicit schedule has {self._lam.size} terms, asked for n={n}")
        return float(self._lam[n - 1]), float(self._bet[n - 1])

    @property
    def length(self):
        return int(self._lam.size)

    def to_dict(self):
        return {"family": self.family, "lambdas": self._lam.tolist(), "betas": self._bet.tolist()}


class CustomSchedule(StepSchedule):
    family = "custom"

    def __init__(self, fn: Callable[[int], tuple[float, float]], label: str = "custom"):
        self._fn = fn
        self.label = label

    def __call__(self, n):
        lam, beta = self._fn(n)
        if not (lam > 0 and beta > 0):
            raise ValueError(f"schedule produced non-positive parameters at n={n}")
        return float(lam), float(beta)

    def to_dict(self):
        return {"family": self.family, "label": self.label}


DEFAULT_SCHEDULE = PowerLaw(1.0, 1.0, 1.0, 1.0)


Status = Literal["accepted", "rejected", "satisfied", "violated", "unknown"]


@dataclass(frozen=True)
class Verdict:
    status: Status
    reason: str
    diagnostics: dict[str, float] = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return self.status in ("accepted", "satisfied")

    @property
    def failed(self) -> bool:
        return self.status in ("rejected", "violated")

    def to_dict(self):
        return {"status": self.status, "reason": self.reason, "diagnostics": dict(self.diagnostics)}


def _partial_sums(terms: np.ndarray) -> dict[str, float]:
    n = terms.size
    checkpoints = sorted({min(n, 10**k) for k in range(1, 7)} | {n})
    c = np.cumsum(terms)
    return {f"S_{m}": float(c[m - 1]) for m in checkpoints if m >= 1}


def classify_l2_not_l1(s: StepSchedule, horizon: int = PARTIAL_SUM_HORIZON) -> Verdict:
    """Is ``(lambda_n)`` square-summable but not summable?"""
    if isinstance(s, PowerLaw):
        if s.p > 1:
            return Verdict("rejected", f"lambda_n ~ n^-{s.p:g} is summable (in l1)")
        if s.p <= 0.5:
            return Verdict("rejected", f"lambda_n ~ n^-{s.p:g} is not square-summable (not in l2)")
        return Verdict("accepted", f"1/2 < p = {s.p:g} <= 1")
    n = horizon if s.length is None else min(horizon, s.length)
    lam = s.lambdas(n)
    diag = {f"sum_lambda_{k}": v for k, v in _partial_sums(lam).items()}
    diag.update({f"sum_lambda_sq_{k}": v for k, v in _partial_sums(lam**2).items()})
    return Verdict("unknown", f"non-parametric schedule; partial sums up to n={n} reported", diag)


def classify_gap_summability(s: StepSchedule, B: PenaltyOp, p_witness=None,
                             horizon: int = PARTIAL_SUM_HORIZON) -> Verdict:
    """Classify ``sum_n lambda_n beta_n gap_B(p, beta_n) < inf`` for all ``p`` in ``Ran N_C``."""
    C = B.zero_set
    if isinstance(B, NormalConePenalty):
        return Verdict("satisfied", "gap of the normal cone vanishes for every schedule")
    if C.is_whole_space:
        return Verdict("satisfied", "C is the whole space, so Ran N_C = {0} and every gap term is 0")
    if isinstance(B, DistPenalty):
        return Verdict("violated", "for the distance penalty the gap is +inf once ||p|| > beta_n, "
                                   "and Ran N_C is an unbounded cone when C is not the whole space")
    if isinstance(B, SkewLinearPenalty):
        return Verdict("violated", "for a nonzero skew penalty the gap is +inf for every p != 0 in (ker B)^perp")
    if isinstance(B, HalfDistSqPenalty):
        if isinstance(s, PowerLaw):
            expo = s.p + s.q
            if expo > 1:
                return Verdict("satisfied", f"sum lambda_n/beta_n ~ sum n^-{expo:g} converges (p+q > 1)")
            return Verdict("violated", f"sum lambda_n/beta_n ~ sum n^-{expo:g} diverges (p+q <= 1)")
        n = horizon if s.length is None else min(horizon, s.length)
        ratio = s.lambdas(n) / s.betas(n)
        diag = {f"sum_lambda_over_beta_{k}": v for k, v in _partial_sums(ratio).items()}
        return Verdict("unknown", "criterion is sum lambda_n/beta_n < inf; partial sums reported", diag)
    # custom penalty
    if p_witness is None:
        return Verdict("unknown", "custom penalty without witness p; nothing to evaluate")
    n = horizon if s.length is None else min(horizon, s.length)
    lam, bet = s.lambdas(n), s.betas(n)
    terms = np.array([l * b * B.gap(p_witness, b) for l, b in zip(lam, bet)])
    if not np.all(np.isfinite(terms)):
        return Verdict("violated", "gap evaluator returned +inf at the witness")
    diag = {f"sum_terms_{k}": v for k, v in _partial_sums(terms).items()}
    return Verdict("unknown", "custom penalty; partial sums at the witness reported", diag)


def tail_exponent(term: Callable[[np.ndarray], np.ndarray], n: int = 10**4) -> float:
    """Richardson-extrapolated decay exponent ``s`` of ``term(n) ~ n^-s``.

    Local exponents are taken on the doubling pairs ``(n, 2n)`` and
    ``(2n, 4n)`` and combined as ``2 s(2n) - s(n)``.
    """
    pts = np.array([n, 2 * n, 4 * n], dtype=float)
    t = term(pts)
    s1 = -math.log(t[1] / t[0]) / math.log(2.0)
    s2 = -math.log(t[2] / t[1]) / math.log(2.0)
    return 2.0 * s2 - s1


def numeric_summability(term: Callable[[np.ndarray], np.ndarray], n: int = 10**4, margin: float = 1e-6) -> bool:
    """Numerical verdict: the series of ``term`` converges iff its tail exponent exceeds 1."""
    return tail_exponent(term, n) > 1.0 + margin


def schedule_from_dict(spec: dict[str, Any]) -> StepSchedule:
    spec = dict(spec)
    family = spec.pop("family", None)
    if family == "power_law":
        s = PowerLaw(float(spec.pop("lambda0", 1.0)), float(spec.pop("p", 1.0)),
                     float(spec.pop("beta0", 1.0)), float(spec.pop("q", 1.0)))
    elif family == "explicit":
        s = ExplicitSchedule(spec.pop("lambdas"), spec.pop("betas"))
    else:
        raise ValueError(f"unknown schedule family {family!r}")
    if spec:
        raise ValueError(f"unexpected schedule fields: {sorted(spec)}")
    return s
