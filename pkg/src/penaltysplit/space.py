"""Euclidean space primitives and closed convex sets.

Points are 1-D ``float64`` numpy arrays. Extended reals are plain floats,
with ``math.inf`` as the only non-finite value a support function returns.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np

__all__ = [
    "DimensionError",
    "as_point",
    "inner",
    "norm",
    "ConvexSet",
    "WholeSpace",
    "Singleton",
    "Box",
    "Halfspace",
    "Ball",
    "AffineSubspace",
    "ProductSet",
    "project",
    "support",
    "normal_cone_contains",
    "set_from_dict",
]

MEMBERSHIP_TOL = 1e-9
# relative tolerance deciding whether u lies in a ray or orthogonal complement
_DIRECTION_TOL = 1e-10


class DimensionError(ValueError):
    """Raised when points or operators of mismatched dimension are combined."""


def as_point(x, dim: int | None = None) -> np.ndarray:
    """Convert ``x`` to a finite 1-D float array, optionally checking its length."""
    arr = np.atleast_1d(np.asarray(x, dtype=float))
    if arr.ndim != 1:
        raise DimensionError(f"expected a 1-D point, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionError(f"expected dimension {dim}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("points must have finite coordinates")
    return arr


def _check_same(x: np.ndarray, y: np.ndarray) -> None:
    if x.shape != y.shape:
        raise DimensionError(f"dimension mismatch: {x.shape} vs {y.shape}")


def inner(x, y) -> float:
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    _check_same(x, y)
    return float(np.dot(x, y))


def norm(x) -> float:
    return float(np.linalg.norm(x))


class ConvexSet:
    """Nonempty closed convex subset of R^dim.

    Subclasses provide ``project``, ``support`` and ``to_dict``; membership
    is derived from the projection residual unless overridden.
    """

    variant: str = ""
    dim: int

    def project(self, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def support(self, u: np.ndarray) -> float:
        raise NotImplementedError

    def to_dict(self) -> dict[str, Any]:
        raise NotImplementedError

    def contains(self, x, tol: float = MEMBERSHIP_TOL) -> bool:
        x = np.asarray(x, dtype=float)
        return norm(x - self.project(x)) <= tol

    def distance(self, x) -> float:
        x = np.asarray(x, dtype=float)
        return norm(x - self.project(x))

    @property
    def is_whole_space(self) -> bool:
        return False

    def _check(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f"{self.variant} lives in R^{self.dim}, got shape {x.shape}")
        return x


def _parallel_coefficient(u: np.ndarray, a: np.ndarray) -> float | None:
    """Return t with u == t*a (up to rounding), or None if u is not on the line of a."""
    t = float(np.dot(u, a) / np.dot(a, a))
    if norm(u - t * a) <= _DIRECTION_TOL * max(1.0, norm(u)):
        return t
    return None


@dataclass(frozen=True, eq=False)
class WholeSpace(ConvexSet):
    dim: int
    variant: str = field(default="whole_space", init=False)

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError("dim must be positive")

    def project(self, x):
        return self._check(x).copy()

    def support(self, u):
        u = self._check(u)
        return 0.0 if norm(u) <= _DIRECTION_TOL else math.inf

    def contains(self, x, tol=MEMBERSHIP_TOL):
        self._check(x)
        return True

    @property
    def is_whole_space(self):
        return True

    def to_dict(self):
        return {"variant": self.variant, "dim": self.dim}


@dataclass(frozen=True, eq=False)
class Singleton(ConvexSet):
    point: np.ndarray
    variant: str = field(default="singleton", init=False)

    def __post_init__(self):
        object.__setattr__(self, "point", as_point(self.point))

    @property
    def dim(self):
        return self.point.shape[0]

    def project(self, x):
        self._check(x)
        return self.point.copy()

    def support(self, u):
        return float(np.dot(self.point, self._check(u)))

    def to_dict(self):
        return {"variant": self.variant, "point": self.point.tolist()}


@dataclass(frozen=True, eq=False)
class Box(ConvexSet):
    """Componentwise bounds ``lo <= x <= hi``; infinite bounds are allowed."""

    lo: np.ndarray
    hi: np.ndarray
    variant: str = field(default="box", init=False)

    def __post_init__(self):
        lo = np.asarray(self.lo, dtype=float).reshape(-1)
        hi = np.asarray(self.hi, dtype=float).reshape(-1)
        if lo.shape != hi.shape:
            raise DimensionError("box bounds must have equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)):
            raise ValueError("box bounds must not be NaN")
        if np.any(lo > hi):
            raise ValueError("box requires lo <= hi componentwise")
        if np.any(lo == math.inf) or np.any(hi == -math.inf):
            raise ValueError("box would be empty")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self):
        return self.lo.shape[0]

    def project(self, x):
        return np.clip(self._check(x), self.lo, self.hi)

    def support(self, u):
        u = self._check(u)
        total = 0.0
        for ui, lo, hi in zip(u, self.lo, self.hi):
            if ui > 0:
                total += ui * hi
            elif ui < 0:
                total += ui * lo
        return float(total)

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = self._check(x)
        return bool(np.all(x >= self.lo - tol) and np.all(x <= self.hi + tol))

    def to_dict(self):
        def enc(v):
            return [None if not math.isfinite(b) else float(b) for b in v]

        return {"variant": self.variant, "lo": enc(self.lo), "hi": enc(self.hi)}


@dataclass(frozen=True, eq=False)
class Halfspace(ConvexSet):
    """``{x : <a, x> <= b}`` with ``a != 0``."""

    a: np.ndarray
    b: float
    variant: str = field(default="halfspace", init=False)

    def __post_init__(self):
        a = as_point(self.a)
        if not np.any(a):
            raise ValueError("halfspace normal must be nonzero")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", float(self.b))

    @property
    def dim(self):
        return self.a.shape[0]

    def project(self, x):
        x = self._check(x)
        excess = np.dot(self.a, x) - self.b
        if excess <= 0:
            return x.copy()
        return x - (excess / np.dot(self.a, self.a)) * self.a

    def support(self, u):
        u = self._check(u)
        if not np.any(u):
            return 0.0
        t = _parallel_coefficient(u, self.a)
        if t is None or t < -_DIRECTION_TOL:
            return math.inf
        return max(t, 0.0) * self.b

    def contains(self, x, tol=MEMBERSHIP_TOL):
        x = self._check(x)
        return bool(np.dot(self.a, x) - self.b <= tol * norm(self.a))

    def to_dict(self):
        return {"variant": self.variant, "a": self.a.tolist(), "b": self.b}


@dataclass(frozen=True, eq=False)
class Ball(ConvexSet):
    center: np.ndarray
    radius: float
    variant: str = field(default="ball", init=False)

    def __post_init__(self):
        object.__setattr__(self, "center", as_point(self.center))
        if not (self.radius >= 0 and math.isfinite(self.radius)):
            raise ValueError("ball radius must be finite and nonnegative")
        object.__setattr__(self, "radius", float(self.radius))

    @property
    def dim(self):
        return self.center.shape[0]

    def project(self, x):
        x = self._check(x)
        d = x - self.center
        r = norm(d)
        if r <= self.radius:
            return x.copy()
        return self.center + (self.radius / r) * d

    def support(self, u):
        u = self._check(u)
        return float(np.dot(self.center, u) + self.radius * norm(u))

    def to_dict(self):
        return {"variant": self.variant, "center": self.center.tolist(), "radius": self.radius}


@dataclass(frozen=True, eq=False)
class AffineSubspace(ConvexSet):
    """``offset + span(columns of basis)``.

    ``basis`` is a ``dim x k`` matrix; it is orthonormalised internally, and
    rank-deficient columns are dropped (singular values below 1e-10).
    A ``k = 0`` basis gives the singleton ``{offset}``.
    """

    basis: np.ndarray
    offset: np.ndarray
    variant: str = field(default="affine_subspace", init=False)
    _q: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        offset = as_point(self.offset)
        basis = np.asarray(self.basis, dtype=float)
        if basis.size == 0:
            basis = np.zeros((offset.shape[0], 0))
        if basis.ndim != 2 or basis.shape[0] != offset.shape[0]:
            raise DimensionError("basis must be a dim x k matrix matching offset")
        if basis.shape[1]:
            u, s, _ = np.linalg.svd(basis, full_matrices=False)
            q = u[:, s > 1e-10 * max(1.0, s[0])]
        else:
            q = basis
        object.__setattr__(self, "offset", offset)
        object.__setattr__(self, "basis", basis)
        object.__setattr__(self, "_q", q)

    @property
    def dim(self):
        return self.offset.shape[0]

    @property
    def rank(self) -> int:
        return self._q.shape[1]

    @property
    def is_whole_space(self):
        return self.rank == self.dim

    def project(self, x):
        d = self._check(x) - self.offset
        return self.offset + self._q @ (self._q.T @ d)

    def support(self, u):
        u = self._check(u)
        along = self._q.T @ u
        if norm(along) > _DIRECTION_TOL * max(1.0, norm(u)):
            return math.inf
        return float(np.dot(self.offset, u))

    def to_dict(self):
        return {"variant": self.variant, "basis": self.basis.tolist(), "offset": self.offset.tolist()}


@dataclass(frozen=True, eq=False)
class ProductSet(ConvexSet):
    """Cartesian product of sets, acting on the concatenated coordinates."""

    parts: tuple
    variant: str = field(default="product", init=False)

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        if not self.parts:
            raise ValueError("product of zero sets")

    @property
    def dim(self):
        return sum(p.dim for p in self.parts)

    @property
    def is_whole_space(self):
        return all(p.is_whole_space for p in self.parts)

    def _split(self, x):
        x = self._check(x)
        out, start = [], 0
        for p in self.parts:
            out.append(x[start:start + p.dim])
            start += p.dim
        return out

    def project(self, x):
        return np.concatenate([p.project(xi) for p, xi in zip(self.parts, self._split(x))])

    def support(self, u):
        return float(sum(p.support(ui) for p, ui in zip(self.parts, self._split(u))))

    def contains(self, x, tol=MEMBERSHIP_TOL):
        return all(p.contains(xi, tol) for p, xi in zip(self.parts, self._split(x)))

    def to_dict(self):
        return {"variant": self.variant, "parts": [p.to_dict() for p in self.parts]}


def project(S: ConvexSet, x) -> np.ndarray:
    return S.project(x)


def support(S: ConvexSet, u) -> float:
    return S.support(u)


def normal_cone_contains(S: ConvexSet, x, u, tol: float = MEMBERSHIP_TOL) -> bool:
    """Test ``u in N_S(x)`` through ``sigma_S(u) == <u, x>``.

    Returns False when ``x`` is not in ``S`` (the normal cone is empty there).
    """
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    if not S.contains(x, tol):
        return False
    s = S.support(u)
    if not math.isfinite(s):
        return False
    return s - float(np.dot(u, x)) <= tol


def _decode_bounds(values) -> np.ndarray:
    return np.array([math.nan if v is None else float(v) for v in values])


def set_from_dict(spec: dict[str, Any]) -> ConvexSet:
    """Build a set from its JSON descriptor, e.g. ``{"variant": "halfspace", "a": [1, 0], "b": 0}``.

    Box bounds accept ``null`` (unbounded in that direction) or the strings
    ``"inf"``/``"-inf"``.
    """
    spec = dict(spec)
    variant = spec.pop("variant", None)
    builders = {
        "whole_space": lambda: WholeSpace(int(spec.pop("dim"))),
        "singleton": lambda: Singleton(spec.pop("point")),
        "box": lambda: _box_from(spec.pop("lo"), spec.pop("hi")),
        "halfspace": lambda: Halfspace(spec.pop("a"), spec.pop("b")),
        "ball": lambda: Ball(spec.pop("center"), spec.pop("radius")),
        "affine_subspace": lambda: AffineSubspace(spec.pop("basis"), spec.pop("offset")),
        "product": lambda: ProductSet(tuple(set_from_dict(p) for p in spec.pop("parts"))),
    }
    if variant not in builders:
        raise ValueError(f"unknown set variant {variant!r}")
    try:
        result = builders[variant]()
    except KeyError as exc:
        raise ValueError(f"set descriptor {variant!r} is missing field {exc.args[0]!r}") from None
    if spec:
        raise ValueError(f"unexpected fields for {variant!r}: {sorted(spec)}")
    return result


def _box_from(lo, hi) -> Box:
    lo = _decode_bounds(lo)
    hi = _decode_bounds(hi)
    lo[np.isnan(lo)] = -math.inf
    hi[np.isnan(hi)] = math.inf
    return Box(lo, hi)
