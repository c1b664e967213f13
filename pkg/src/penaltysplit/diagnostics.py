"""Ergodic averaging, distances, checkpoints, solve reports and CSV traces."""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np

__all__ = [
    "ErgodicAverager",
    "ergodic_update",
    "distance_to",
    "log_checkpoints",
    "SolveReport",
    "Trace",
    "REPORT_SCHEMA_VERSION",
]

REPORT_SCHEMA_VERSION = 1


class ErgodicAverager:
    """Running ``z_n = (1/tau_n) sum_k lambda_k x_k`` with ``tau_n = sum_k lambda_k``.

    Updated incrementally as ``z <- z + (lambda / tau) (x - z)``.
    """

    __slots__ = ("tau", "z", "count")

    def __init__(self):
        self.tau = 0.0
        self.z: np.ndarray | None = None
        self.count = 0

    def update(self, lam: float, x) -> "ErgodicAverager":
        if not lam > 0:
            raise ValueError(f"averaging weight must be positive, got {lam}")
        x = np.asarray(x, dtype=float)
        self.tau += lam
        self.count += 1
        if self.z is None:
            self.z = x.copy()
        else:
            self.z += (lam / self.tau) * (x - self.z)
        return self


def ergodic_update(avg: ErgodicAverager, lam: float, x) -> ErgodicAverager:
    return avg.update(lam, x)


def distance_to(p, target) -> float:
    p = np.asarray(p, dtype=float)
    target = np.asarray(target, dtype=float)
    if p.shape != target.shape:
        raise ValueError(f"dimension mismatch: {p.shape} vs {target.shape}")
    return float(np.linalg.norm(p - target))


def log_checkpoints(budget: int, per_decade: int = 10) -> list[int]:
    """Roughly log-spaced iteration indices in ``[1, budget]``.

    Always includes ``1..10``, every power of ten up to ``budget`` and ``budget`` itself.
    """
    if budget < 1:
        return []
    decades = max(math.log10(budget), 0.0)
    count = max(2, int(math.ceil(decades * per_decade)) + 1)
    pts = np.unique(np.round(np.geomspace(1, budget, count)).astype(int))
    out = set(int(v) for v in pts) | set(range(1, min(budget, 10) + 1)) | {budget}
    out |= {10**k for k in range(int(math.log10(budget)) + 1) if 10**k <= budget}
    return sorted(out)


def _clean(v: float) -> float | None:
    return float(v) if v is not None and math.isfinite(v) else None


def _clean_residual(v: float) -> float | str | None:
    # an infinite gap term makes the residual -inf, which is worth keeping
    return "-inf" if v == -math.inf else _clean(v)


@dataclass
class SolveReport:
    algorithm: str
    final_x: np.ndarray
    final_z: np.ndarray
    iterations: int
    dist_history: list[tuple[int, float, float]] = field(default_factory=list)
    final_dist: float = math.nan
    final_ergodic_dist: float = math.nan
    lemma_residual_max: float = math.nan
    lemma_residual_max_all: float = math.nan
    lemma_n0: int | None = None
    lemma_scale: float = math.nan
    step_flags: list[int] = field(default_factory=list)
    step_flag_count: int = 0
    verdicts: dict[str, Any] = field(default_factory=dict)
    stopped_early: bool = False
    wall_time: float = 0.0
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "schema": REPORT_SCHEMA_VERSION,
            "algorithm": self.algorithm,
            "iterations": self.iterations,
            "stopped_early": self.stopped_early,
            "final_x": self.final_x.tolist(),
            "final_z": self.final_z.tolist(),
            "final_dist": _clean(self.final_dist),
            "final_ergodic_dist": _clean(self.final_ergodic_dist),
            "dist_history": [
                {"n": n, "dist": _clean(d), "ergodic_dist": _clean(e)} for n, d, e in self.dist_history
            ],
            "lemma": {
                "n0": self.lemma_n0,
                "residual_max_past_n0": _clean_residual(self.lemma_residual_max),
                "residual_max_all": _clean_residual(self.lemma_residual_max_all),
                "scale": _clean(self.lemma_scale),
            },
            "step_size_flags": {"count": self.step_flag_count, "first": self.step_flags[:20]},
            "verdicts": self.verdicts,
            "wall_time_s": self.wall_time,
            **self.extra,
        }


class Trace:
    """Accumulates trace rows and renders them as CSV.

    Floats are written with ``repr`` so identical runs give identical bytes.
    """

    def __init__(self, columns: Sequence[str]):
        self.columns = list(columns)
        self.rows: list[list[Any]] = []

    def add(self, values: Iterable[Any]) -> None:
        row = list(values)
        if len(row) != len(self.columns):
            raise ValueError(f"trace row has {len(row)} values for {len(self.columns)} columns")
        self.rows.append(row)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(self.columns)
        for row in self.rows:
            w.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
        return buf.getvalue()

    def write(self, path) -> None:
        with open(path, "w", newline="") as fh:
            fh.write(self.to_csv())
