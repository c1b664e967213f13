"""Iteration driver shared by all three schemes."""

from __future__ import annotations

import math
import time
from typing import Callable, Sequence

import numpy as np

from .diagnostics import ErgodicAverager, SolveReport, Trace, distance_to, log_checkpoints
from .problem import NumericalAbort
from .schedules import StepSchedule

__all__ = ["Advance", "drive", "DEFAULT_STOP_TOL", "STOP_PATIENCE"]

DEFAULT_STOP_TOL: float | None = None  # early stopping is opt-in; it freezes the ergodic average
STOP_PATIENCE = 50

# advance(x, n, lam, beta) -> (x_next, point to average with weight lam, lemma residual or None)
Advance = Callable[[np.ndarray, int, float, float], tuple[np.ndarray, np.ndarray, "float | None"]]


def drive(
    algorithm: str,
    advance: Advance,
    x_start: np.ndarray,
    schedule: StepSchedule,
    budget: int,
    *,
    coord_names: Sequence[str],
    solution: np.ndarray | None = None,
    step_bound: float | None = None,
    lemma_scale: float = 1.0,
    stop_tol: float | None = DEFAULT_STOP_TOL,
    trace_mode: str = "log",
    checkpoint_metrics: Callable[[np.ndarray, np.ndarray], dict] | None = None,
) -> tuple[SolveReport, Trace]:
    """Run ``advance`` for ``n = 1..budget`` and collect monitors.

    ``step_bound`` is the largest step size for which the per-iteration
    inequality drops its correction term; iterations with ``lambda_n`` above
    it are flagged and the first later index is reported as ``n0``.
    """
    if budget < 1:
        raise ValueError("budget must be at least 1")
    if schedule.length is not None and budget > schedule.length:
        raise ValueError(f"budget {budget} exceeds the {schedule.length} explicit schedule terms")
    if trace_mode not in ("log", "all", "none"):
        raise ValueError(f"unknown trace mode {trace_mode!r}")

    checkpoints = set(log_checkpoints(budget))
    trace = Trace(["n", "lambda", "beta", *coord_names, "dist_to_solution", "ergodic_dist", "lemma_residual"])
    avg = ErgodicAverager()
    history: list[tuple[int, float, float]] = []
    metrics: list[dict] = []
    flags: list[int] = []
    flag_count = 0
    n0: int | None = None
    # -inf is a legitimate residual (infinite gap term), so track whether any was seen
    res_max = res_max_all = -math.inf
    seen = seen_all = False
    quiet = 0
    stopped = False

    x = np.array(x_start, dtype=float)
    t0 = time.perf_counter()
    n = 0
    for n in range(1, budget + 1):
        lam, beta = schedule(n)
        try:
            x_next, averaged, residual = advance(x, n, lam, beta)
        except (OverflowError, FloatingPointError) as exc:
            raise NumericalAbort(f"overflow at n={n} ({exc}); the step schedule is likely too aggressive", n) from exc
        if not np.all(np.isfinite(x_next)):
            raise NumericalAbort(f"non-finite iterate at n={n}; the step schedule is likely too aggressive", n)
        avg.update(lam, averaged)

        if step_bound is not None:
            if lam > step_bound:
                flag_count += 1
                if len(flags) < 1000:
                    flags.append(n)
                n0 = None
            elif n0 is None:
                n0 = n
        if residual is not None:
            res_max_all = max(res_max_all, residual)
            seen_all = True
            if step_bound is None or n0 is not None:
                res_max = max(res_max, residual)
                seen = True

        is_last = n == budget
        moved = float(np.linalg.norm(x_next - x))
        if stop_tol is not None and moved < stop_tol * lam:
            quiet += 1
            if quiet >= STOP_PATIENCE:
                stopped = True
                is_last = True
        else:
            quiet = 0
        x = x_next

        if n in checkpoints or is_last or trace_mode == "all":
            dist = distance_to(x, solution) if solution is not None else math.nan
            edist = distance_to(avg.z, solution) if solution is not None else math.nan
            if n in checkpoints or is_last:
                history.append((n, dist, edist))
                if checkpoint_metrics is not None:
                    metrics.append({"n": n, **checkpoint_metrics(x, avg.z)})
            if trace_mode != "none":
                trace.add([n, lam, beta, *x, dist, edist, math.nan if residual is None else residual])
        if stopped:
            break

    wall = time.perf_counter() - t0
    report = SolveReport(
        algorithm=algorithm,
        final_x=x,
        final_z=avg.z.copy(),
        iterations=n,
        dist_history=history,
        final_dist=history[-1][1],
        final_ergodic_dist=history[-1][2],
        lemma_residual_max=res_max if seen else math.nan,
        lemma_residual_max_all=res_max_all if seen_all else math.nan,
        lemma_n0=n0,
        lemma_scale=lemma_scale,
        step_flags=flags,
        step_flag_count=flag_count,
        stopped_early=stopped,
        wall_time=wall,
    )
    if metrics:
        report.extra["checkpoint_metrics"] = metrics
    return report, trace
