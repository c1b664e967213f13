"""Benchmark instances with solutions computed independently of the solvers.

Oracles come from closed-form projections or from brute-force active-set
enumeration of affine variational inequalities over polyhedral sets.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Any, Callable

import numpy as np

from .operators import (
    LinearMap,
    build_affine_op,
    build_skew_op,
    build_subdiff_quadratic,
    zero_op,
)
from .penalty import DistPenalty, HalfDistSqPenalty, NormalConePenalty, PenaltyOp, SkewLinearPenalty
from .primal_dual import Block, StructuredProblem
from .problem import Certificate, InclusionProblem
from .schedules import DEFAULT_SCHEDULE, PowerLaw, StepSchedule
from .space import Ball, Box, ConvexSet, Halfspace, WholeSpace, as_point, normal_cone_contains

__all__ = [
    "Benchmark",
    "OracleError",
    "solve_affine_vi",
    "projection_benchmark",
    "skew_saddle_benchmark",
    "skew_penalty_benchmark",
    "structured_benchmark",
    "characterization_spot_check",
    "BENCHMARKS",
    "get_benchmark",
    "list_benchmarks",
]

ORACLE_TOL = 1e-8


class OracleError(RuntimeError):
    pass


@dataclass
class Benchmark:
    name: str
    problem: InclusionProblem | StructuredProblem
    oracle_solution: np.ndarray
    oracle_method: str
    oracle_dual: tuple[np.ndarray, ...] | None = None
    algorithm: str = "fbb"
    schedule: StepSchedule = DEFAULT_SCHEDULE
    description: str = ""
    # forward evaluation of A, used by the zero-set characterization check
    A_forward: Callable[[np.ndarray], np.ndarray] | None = field(default=None, repr=False)

    @property
    def structured(self) -> bool:
        return isinstance(self.problem, StructuredProblem)

    def summary(self) -> dict[str, Any]:
        return {
            "name": self.name,
            "algorithm": self.algorithm,
            "dim": self.problem.dim,
            "penalty": self.problem.B.kind,
            "schedule": self.schedule.to_dict(),
            "oracle_method": self.oracle_method,
            "description": self.description,
        }


def _penalty(variant: str, S: ConvexSet) -> PenaltyOp:
    table = {"normal_cone": NormalConePenalty, "half_dist_sq": HalfDistSqPenalty, "dist": DistPenalty}
    if variant not in table:
        raise ValueError(f"penalty variant {variant!r} needs a set; choose one of {sorted(table)}")
    return table[variant](S)


def _polyhedral_rows(S: ConvexSet) -> tuple[np.ndarray, np.ndarray]:
    """Rows ``G x <= h`` describing ``S``."""
    d = S.dim
    if isinstance(S, WholeSpace):
        return np.zeros((0, d)), np.zeros(0)
    if isinstance(S, Halfspace):
        return S.a[None, :], np.array([S.b])
    if isinstance(S, Box):
        G, h = [], []
        for i in range(d):
            e = np.zeros(d)
            e[i] = 1.0
            if math.isfinite(S.hi[i]):
                G.append(e)
                h.append(S.hi[i])
            if math.isfinite(S.lo[i]):
                G.append(-e)
                h.append(-S.lo[i])
        return np.array(G).reshape(-1, d), np.array(h)
    raise OracleError(f"no polyhedral description for {S.variant}")


def solve_affine_vi(M: np.ndarray, r: np.ndarray, G: np.ndarray, h: np.ndarray,
                    tol: float = 1e-10) -> np.ndarray:
    """Solve ``0 in M x - r + N_{G x <= h}(x)`` by enumerating active sets.

    ``M`` must be strongly monotone (positive definite symmetric part), so
    the solution is unique and some active set reproduces it through the
    linear KKT system ``M x + G_J^T t = r``, ``G_J x = h_J`` with ``t >= 0``.
    """
    n = M.shape[0]
    rows = G.shape[0]
    for k in range(rows + 1):
        for J in itertools.combinations(range(rows), k):
            GJ = G[list(J)]
            K = np.zeros((n + k, n + k))
            K[:n, :n] = M
            K[:n, n:] = GJ.T
            K[n:, :n] = GJ
            rhs = np.concatenate([r, h[list(J)]])
            try:
                sol = np.linalg.solve(K, rhs)
            except np.linalg.LinAlgError:
                continue
            x, t = sol[:n], sol[n:]
            if np.all(t >= -tol) and (rows == 0 or np.all(G @ x <= h + tol * (1 + np.abs(h)))):
                return x
    raise OracleError("no active set satisfies the KKT conditions")


def _verify(prob: InclusionProblem, cert: Certificate) -> None:
    w = prob.w(cert)
    if np.linalg.norm(w) > ORACLE_TOL:
        raise OracleError(f"oracle residual v + Du + p = {w} is not zero")
    prob.validate_certificate(cert, ORACLE_TOL)


def projection_benchmark(a, S: ConvexSet, penalty_variant: str = "half_dist_sq",
                         name: str | None = None, schedule: StepSchedule = DEFAULT_SCHEDULE) -> Benchmark:
    """``A x = x - a``, ``D = 0``: the solution is ``P_S(a)``."""
    a = as_point(a, S.dim)
    u = S.project(a)
    cert = Certificate(u=u, v=u - a, p=a - u)
    prob = InclusionProblem(
        build_subdiff_quadratic(a, 1.0), zero_op(S.dim), _penalty(penalty_variant, S),
        known_solution=u, certificate=cert, label=name or "projection",
    )
    _verify(prob, cert)
    return Benchmark(
        name or f"projection-{S.variant}-{penalty_variant}", prob, u, "closed-form projection of a onto C",
        algorithm="fbb", schedule=schedule, A_forward=lambda x: x - a,
        description=f"min 1/2||x - a||^2 over a {S.variant}, penalty {penalty_variant}",
    )


def rotation_generator(pairs: int) -> np.ndarray:
    K = np.zeros((2 * pairs, 2 * pairs))
    for i in range(pairs):
        K[2 * i, 2 * i + 1] = 1.0
        K[2 * i + 1, 2 * i] = -1.0
    return K


def skew_saddle_benchmark(pairs: int = 1, strength: float = 1.0, a=None, S: ConvexSet | None = None,
                          penalty_variant: str = "normal_cone", name: str | None = None,
                          schedule: StepSchedule = DEFAULT_SCHEDULE, skew: bool = True) -> Benchmark:
    """``A x = strength (x - a)``, ``D = K`` skew (a rotation generator per coordinate pair).

    The oracle solves ``(strength I + K) x = strength a`` exactly, or the
    affine variational inequality over a polyhedral ``S`` by active sets.
    """
    d = 2 * pairs
    if a is None:
        a = np.zeros(d)
        a[0] = 1.0
    a = as_point(a, d)
    S = WholeSpace(d) if S is None else S
    K = rotation_generator(pairs) if skew else np.zeros((d, d))
    M = strength * np.eye(d) + K
    if S.is_whole_space:
        u = np.linalg.solve(M, strength * a)
        method = "dense linear solve of (strength I + K) x = strength a"
    else:
        G, h = _polyhedral_rows(S)
        u = solve_affine_vi(M, strength * a, G, h)
        method = "active-set enumeration of the affine variational inequality"
    v = strength * (u - a)
    cert = Certificate(u=u, v=v, p=-(v + K @ u))
    D = build_skew_op(K) if skew else zero_op(d)
    prob = InclusionProblem(
        build_subdiff_quadratic(a, strength), D, _penalty(penalty_variant, S),
        known_solution=u, certificate=cert, label=name or "skew-saddle",
    )
    _verify(prob, cert)
    return Benchmark(
        name or "skew-saddle", prob, u, method, algorithm="fbfb", schedule=schedule,
        A_forward=lambda x: strength * (x - a),
        description=f"strongly monotone quadratic plus skew coupling over a {S.variant}",
    )


def skew_penalty_benchmark(a=(1.0, 1.0), name: str = "skew-penalty") -> Benchmark:
    """Penalty ``B`` = rotation generator, so ``C = ker B = {0}``; the gap hypothesis fails."""
    a = as_point(a, 2)
    B = SkewLinearPenalty(rotation_generator(1))
    u = np.zeros(2)
    cert = Certificate(u=u, v=u - a, p=a - u)
    prob = InclusionProblem(build_subdiff_quadratic(a, 1.0), zero_op(2), B,
                            known_solution=u, certificate=cert, label=name)
    _verify(prob, cert)
    return Benchmark(name, prob, u, "C = ker B = {0}", algorithm="fbb", A_forward=lambda x: x - a,
                     description="skew linear penalty; the summability hypothesis is violated")


def structured_benchmark(
    d: int = 2,
    L=None,
    a=None,
    strength: float = 1.0,
    b=None,
    weight: float = 1.0,
    d_inv_scale: float = 0.0,
    skew_D: bool = False,
    S: ConvexSet | None = None,
    penalty_variant: str = "normal_cone",
    name: str | None = None,
    schedule: StepSchedule = DEFAULT_SCHEDULE,
) -> Benchmark:
    """One-block instance of the composite problem with an exact linear KKT oracle.

    ``A = strength (x - a)``, ``A_1 = weight (y - b)`` so
    ``A_1^{-1} v = b + v / weight``, ``D_1^{-1} = d_inv_scale * I``. The
    primal-dual pair solves the affine variational inequality with matrix
    ``[[strength I + D, L^T], [-L, (1/weight + d_inv_scale) I]]``.
    """
    L = np.array([[1.0, 1.0], [0.0, 1.0]]) if L is None else np.atleast_2d(np.asarray(L, dtype=float))
    if L.shape[1] != d:
        raise ValueError("L must have d columns")
    if not np.any(L):
        raise ValueError("L_1 must be nonzero")
    g = L.shape[0]
    a = np.arange(1.0, d + 1.0) if a is None else as_point(a, d)
    b = 0.5 * np.ones(g) if b is None else as_point(b, g)
    S = WholeSpace(d) if S is None else S
    Dm = rotation_generator(d // 2) if skew_D else np.zeros((d, d))
    if skew_D and d % 2:
        raise ValueError("a skew D needs an even dimension")
    s = 1.0 / weight + d_inv_scale
    M = np.zeros((d + g, d + g))
    M[:d, :d] = strength * np.eye(d) + Dm
    M[:d, d:] = L.T
    M[d:, :d] = -L
    M[d:, d:] = s * np.eye(g)
    r = np.concatenate([strength * a, -b])
    G, h = _polyhedral_rows(S)
    G = np.hstack([G, np.zeros((G.shape[0], g))])
    sol = solve_affine_vi(M, r, G, h)
    x_star, v_star = sol[:d], sol[d:]

    # dual feasibility 0 in A_1^{-1} v + D_1^{-1} v - L x
    if np.linalg.norm(b + v_star / weight + d_inv_scale * v_star - L @ x_star) > ORACLE_TOL:
        raise OracleError("dual oracle violates A_1^{-1} v + D_1^{-1} v = L x")
    n_vec = -(strength * (x_star - a) + L.T @ v_star + Dm @ x_star)
    if not normal_cone_contains(S, x_star, n_vec, ORACLE_TOL):
        raise OracleError("primal oracle violates the normal-cone inclusion")

    # product-space certificate: u = (x*, v*), v in bA u, p in N_C(x*) x {0}
    cert = Certificate(
        u=sol,
        v=np.concatenate([strength * (x_star - a), b + v_star / weight]),
        p=np.concatenate([n_vec, np.zeros(g)]),
    )
    D_inv = build_affine_op(d_inv_scale * np.eye(g)) if d_inv_scale else zero_op(g)
    block = Block(build_subdiff_quadratic(b, weight), D_inv, LinearMap(L))
    sp = StructuredProblem(
        build_subdiff_quadratic(a, strength),
        build_skew_op(Dm) if skew_D else zero_op(d),
        (block,),
        _penalty(penalty_variant, S),
        primal_solution=x_star,
        dual_solution=(v_star,),
        label=name or "structured",
        certificate=cert,
    )
    return Benchmark(
        name or "structured", sp, x_star, "exact dense KKT solve (active-set enumeration)",
        oracle_dual=(v_star,), algorithm="pd", schedule=schedule,
        A_forward=lambda x: strength * (x - a),
        description=f"d={d}, m=1, g={g}; penalty {penalty_variant} over a {S.variant}",
    )


def characterization_spot_check(bench: Benchmark, rng=None, n: int = 100, scale: float = 5.0) -> float:
    """Smallest ``<w, u - z>`` over sampled graph points ``(u, w)`` of ``A + D + N_C``.

    Nonnegative (up to rounding) exactly when the oracle ``z`` is a zero.
    """
    if bench.structured or bench.A_forward is None:
        raise ValueError("spot check needs an unstructured benchmark with a forward A")
    prob = bench.problem
    rng = np.random.default_rng(rng)
    z = bench.oracle_solution
    worst = math.inf
    for _ in range(n):
        y = scale * rng.standard_normal(prob.dim)
        u = prob.C.project(y)
        normal = rng.uniform(0.0, 2.0) * (y - u)
        w = bench.A_forward(u) + prob.D(u) + normal
        worst = min(worst, float(np.dot(w, u - z)))
    return worst


def _registry() -> dict[str, Callable[[], Benchmark]]:
    half = Halfspace([1.0, 0.0], 0.0)
    ergodic = PowerLaw(1.0, 0.6, 1.0, 1.0)
    return {
        "projection-halfspace": lambda: projection_benchmark(
            [2.0, 3.0], half, "half_dist_sq", "projection-halfspace"),
        "projection-halfspace-normal-cone": lambda: projection_benchmark(
            [2.0, 3.0], half, "normal_cone", "projection-halfspace-normal-cone"),
        "projection-halfspace-dist": lambda: projection_benchmark(
            [2.0, 3.0], half, "dist", "projection-halfspace-dist"),
        "projection-ball": lambda: projection_benchmark(
            [2.0, 0.0], Ball([0.0, 0.0], 1.0), "half_dist_sq", "projection-ball"),
        "projection-box": lambda: projection_benchmark(
            [-1.0, 0.5], Box([0.0, 0.0], [1.0, 1.0]), "half_dist_sq", "projection-box"),
        "skew-saddle": lambda: skew_saddle_benchmark(
            name="skew-saddle", schedule=ergodic),
        "skew-saddle-halfspace": lambda: skew_saddle_benchmark(
            a=[1.0, 1.0], S=Halfspace([0.0, 1.0], 0.0), penalty_variant="half_dist_sq",
            name="skew-saddle-halfspace", schedule=ergodic),
        "skew-penalty": skew_penalty_benchmark,
        "structured": lambda: structured_benchmark(
            S=Halfspace([1.0, 0.0], 0.0), penalty_variant="half_dist_sq", name="structured", schedule=ergodic),
        "structured-unconstrained": lambda: structured_benchmark(
            name="structured-unconstrained", schedule=ergodic),
    }


BENCHMARKS = _registry()


def get_benchmark(name: str) -> Benchmark:
    try:
        return BENCHMARKS[name]()
    except KeyError:
        raise KeyError(f"unknown benchmark {name!r}; available: {', '.join(sorted(BENCHMARKS))}") from None


def list_benchmarks() -> list[dict[str, Any]]:
    return [get_benchmark(n).summary() for n in sorted(BENCHMARKS)]
