"""Penalty operators ``B`` with ``zer B = C`` and their Fitzpatrick gaps.

The gap ``sup_{u in C} phi_B(u, p/beta) - sigma_C(p/beta)`` enters the
summability hypothesis on ``(lambda_n, beta_n)``. Each built-in variant
returns it in closed form (or a closed-form upper bound); arbitrary
operators must bring their own evaluator.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Any, Callable

import numpy as np

from .operators import LinearMap, _skew_check
from .space import AffineSubspace, ConvexSet, DimensionError, set_from_dict

__all__ = [
    "PenaltyOp",
    "NormalConePenalty",
    "HalfDistSqPenalty",
    "DistPenalty",
    "SkewLinearPenalty",
    "CustomPenalty",
    "penalty_resolvent",
    "fitzpatrick_gap",
    "sample_graph",
    "fitzpatrick_lower_estimate",
    "penalty_from_dict",
]


class PenaltyOp:
    """Maximally monotone ``B`` exposed through resolvent, zero set and gap."""

    kind: str = ""
    zero_set: ConvexSet

    @property
    def dim(self) -> int:
        return self.zero_set.dim

    def resolvent(self, gamma: float, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def gap(self, p: np.ndarray, beta: float) -> float:
        raise NotImplementedError

    def gap_curve(self, p) -> Callable[[float], float]:
        """``beta -> gap(p, beta)`` for a fixed ``p``, for use inside iteration loops."""
        p = self._args(p)
        return lambda beta: self.gap(p, beta)

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def _args(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f"penalty acts on R^{self.dim}, got shape {x.shape}")
        return x


def _sigma_finite(S: ConvexSet, p: np.ndarray, beta: float) -> bool:
    return math.isfinite(S.support(p / beta))


@dataclass(frozen=True, eq=False)
class NormalConePenalty(PenaltyOp):
    """``B = N_C``: the resolvent is the projection and the gap vanishes."""

    zero_set: ConvexSet
    kind = "normal_cone"

    def resolvent(self, gamma, x):
        return self.zero_set.project(self._args(x))

    def gap(self, p, beta):
        p = self._args(p)
        return 0.0 if _sigma_finite(self.zero_set, p, beta) else math.inf

    def gap_curve(self, p):
        # sigma_C is positively homogeneous, so finiteness does not depend on beta
        value = 0.0 if _sigma_finite(self.zero_set, self._args(p), 1.0) else math.inf
        return lambda beta: value

    def to_dict(self):
        return {"penalty": self.kind, "set": self.zero_set.to_dict()}


@dataclass(frozen=True, eq=False)
class HalfDistSqPenalty(PenaltyOp):
    """``B = grad(d_C^2 / 2) = Id - P_C``.

    The gap is bounded above by ``Psi*(u) - sigma_C(u) = ||u||^2 / 2`` with
    ``u = p / beta``; that bound is what :meth:`gap` returns.
    """

    zero_set: ConvexSet
    kind = "half_dist_sq"

    def resolvent(self, gamma, x):
        x = self._args(x)
        return (x + gamma * self.zero_set.project(x)) / (gamma + 1.0)

    def gap(self, p, beta):
        p = self._args(p)
        if not _sigma_finite(self.zero_set, p, beta):
            return math.inf
        u = p / beta
        return 0.5 * float(np.dot(u, u))

    def gap_curve(self, p):
        p = self._args(p)
        if not _sigma_finite(self.zero_set, p, 1.0):
            return lambda beta: math.inf
        half_sq = 0.5 * float(np.dot(p, p))
        return lambda beta: half_sq / beta**2

    def to_dict(self):
        return {"penalty": self.kind, "set": self.zero_set.to_dict()}


@dataclass(frozen=True, eq=False)
class DistPenalty(PenaltyOp):
    """``B = subdiff d_C``; the gap is infinite as soon as ``||p|| > beta``."""

    zero_set: ConvexSet
    kind = "dist"

    def resolvent(self, gamma, x):
        x = self._args(x)
        px = self.zero_set.project(x)
        r = x - px
        d = float(np.linalg.norm(r))
        if d <= gamma:
            return px
        return x - (gamma / d) * r

    def gap(self, p, beta):
        p = self._args(p)
        if not _sigma_finite(self.zero_set, p, beta):
            return math.inf
        return 0.0 if float(np.linalg.norm(p)) <= beta else math.inf

    def to_dict(self):
        return {"penalty": self.kind, "set": self.zero_set.to_dict()}


class SkewLinearPenalty(PenaltyOp):
    """Skew linear ``B x = K x``; ``zer B = ker K``.

    The gap is ``+inf`` for every ``p != 0`` since
    ``sup_y <y, p/beta>`` is unbounded.
    """

    kind = "skew_linear"

    def __init__(self, matrix):
        K = matrix if isinstance(matrix, LinearMap) else LinearMap(matrix)
        _skew_check(K.matrix)
        self.K = K
        d = K.shape[0]
        _, s, vt = np.linalg.svd(K.matrix)
        cutoff = 1e-10 * max(1.0, s[0] if s.size else 0.0)
        kernel = vt[s <= cutoff].T if s.size else np.eye(d)
        self.zero_set = AffineSubspace(kernel, np.zeros(d))
        self._eye = np.eye(d)

    def resolvent(self, gamma, x):
        return np.linalg.solve(self._eye + gamma * self.K.matrix, self._args(x))

    def gap(self, p, beta):
        p = self._args(p)
        return 0.0 if not np.any(p) else math.inf

    def to_dict(self):
        return {"penalty": self.kind, "matrix": self.K.matrix.tolist()}


@dataclass(frozen=True, eq=False)
class CustomPenalty(PenaltyOp):
    """User-supplied resolvent, zero set and gap evaluator.

    The library never assumes the summability hypothesis for a custom
    penalty; classifiers report ``unknown`` with partial sums.
    """

    resolvent_fn: Callable[[float, np.ndarray], np.ndarray]
    zero_set: ConvexSet
    gap_fn: Callable[[np.ndarray, float], float]
    label: str = "custom"
    kind = "custom"

    def resolvent(self, gamma, x):
        return self.resolvent_fn(gamma, self._args(x))

    def gap(self, p, beta):
        return float(self.gap_fn(self._args(p), beta))

    def to_dict(self):
        return {"penalty": self.kind, "label": self.label}


def penalty_resolvent(B: PenaltyOp, gamma: float, x) -> np.ndarray:
    if not gamma > 0:
        raise ValueError(f"resolvent parameter must be positive, got {gamma}")
    return B.resolvent(gamma, x)


def fitzpatrick_gap(B: PenaltyOp, p, beta: float) -> float:
    if not beta > 0:
        raise ValueError(f"beta must be positive, got {beta}")
    return B.gap(p, beta)


def sample_graph(resolvent: Callable[[float, np.ndarray], np.ndarray], points, gamma: float = 1.0):
    """Graph points ``(J z, (z - J z) / gamma)`` of the operator behind ``resolvent``."""
    out = []
    for z in points:
        z = np.asarray(z, dtype=float)
        y = resolvent(gamma, z)
        out.append((y, (z - y) / gamma))
    return out


def fitzpatrick_lower_estimate(x, u, graph) -> float:
    """Lower estimate of ``phi(x, u)`` as a maximum over finitely many graph points."""
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    return max(float(np.dot(x, v) + np.dot(y, u) - np.dot(y, v)) for y, v in graph)


def penalty_from_dict(spec: dict[str, Any]) -> PenaltyOp:
    """``{"penalty": "half_dist_sq", "set": {...}}`` or ``{"penalty": "skew_linear", "matrix": [[...]]}``."""
    spec = dict(spec)
    kind = spec.pop("penalty", None)
    if kind in ("normal_cone", "half_dist_sq", "dist"):
        if "set" not in spec:
            raise ValueError(f"penalty {kind!r} needs a 'set'")
        S = set_from_dict(spec.pop("set"))
        op = {"normal_cone": NormalConePenalty, "half_dist_sq": HalfDistSqPenalty, "dist": DistPenalty}[kind](S)
    elif kind == "skew_linear":
        if "matrix" not in spec:
            raise ValueError("penalty 'skew_linear' needs a 'matrix'")
        op = SkewLinearPenalty(spec.pop("matrix"))
    else:
        raise ValueError(f"unknown penalty {kind!r}")
    if spec:
        raise ValueError(f"unexpected fields for penalty {kind!r}: {sorted(spec)}")
    return op
