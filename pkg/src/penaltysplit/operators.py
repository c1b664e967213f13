"""Monotone operators represented through resolvents and forward evaluations.

Set-valued operators (``A``, ``A_i``) only ever appear through their
resolvents ``J_{gamma M} = (Id + gamma M)^{-1}``. Single-valued operators
(``D``, ``D_i^{-1}``) carry a declared regularity class which the solvers
use for admission and for the step-size monitors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Literal

import numpy as np

from .space import ConvexSet, DimensionError, as_point, set_from_dict

__all__ = [
    "ConstructionError",
    "ResolventOp",
    "SingleValuedOp",
    "LinearMap",
    "resolvent_of_inverse",
    "inverse_op",
    "build_subdiff_quadratic",
    "build_affine_resolvent",
    "build_normal_cone_op",
    "build_skew_op",
    "build_affine_op",
    "zero_op",
    "check_firmly_nonexpansive",
    "check_cocoercive",
    "check_lipschitz_monotone",
    "verify_declared_regularity",
    "resolvent_op_from_dict",
    "single_valued_op_from_dict",
]

Regularity = Literal["cocoercive", "lipschitz_monotone", "zero"]

# stand-in for eta = +inf when D = 0, keeps monitor arithmetic finite
ETA_CAP = 1e12


class ConstructionError(ValueError):
    """An operator was built from data violating its declared structure."""


@dataclass(frozen=True)
class ResolventOp:
    """Maximally monotone ``M`` given by ``resolvent(gamma, x) = J_{gamma M}(x)``.

    ``modulus`` is the strong monotonicity constant of ``M`` (0 if none is
    known), ``inverse_modulus`` the one of ``M^{-1}``.
    """

    resolvent: Callable[[float, np.ndarray], np.ndarray]
    dim: int
    modulus: float = 0.0
    inverse_modulus: float = 0.0
    label: str = ""

    def __call__(self, gamma: float, x) -> np.ndarray:
        if not gamma > 0:
            raise ValueError(f"resolvent parameter must be positive, got {gamma}")
        x = np.asarray(x, dtype=float)
        if x.shape != (self.dim,):
            raise DimensionError(f"{self.label or 'operator'} acts on R^{self.dim}, got shape {x.shape}")
        return self.resolvent(gamma, x)


@dataclass(frozen=True)
class SingleValuedOp:
    """Everywhere-defined monotone map with a declared regularity.

    ``constant`` is the cocoercivity modulus eta for ``cocoercive`` and the
    Lipschitz constant L for ``lipschitz_monotone``; it is ignored for ``zero``.
    """

    fn: Callable[[np.ndarray], np.ndarray]
    dim: int
    regularity: Regularity
    constant: float = 0.0
    label: str = ""
    matrix: np.ndarray | None = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.regularity not in ("cocoercive", "lipschitz_monotone", "zero"):
            raise ConstructionError(f"unknown regularity {self.regularity!r}")
        if self.regularity != "zero" and not (self.constant > 0 and math.isfinite(self.constant)):
            raise ConstructionError(f"{self.regularity} needs a positive finite constant")

    def __call__(self, x) -> np.ndarray:
        return self.fn(x)

    @property
    def eta(self) -> float:
        """eta such that D is eta-cocoercive, or 1/eta-Lipschitz; ``inf`` for the zero map."""
        if self.regularity == "zero":
            return math.inf
        if self.regularity == "cocoercive":
            return self.constant
        return 1.0 / self.constant

    @property
    def lipschitz(self) -> float:
        if self.regularity == "zero":
            return 0.0
        if self.regularity == "cocoercive":
            return 1.0 / self.constant
        return self.constant


class LinearMap:
    """Matrix ``K : R^cols -> R^rows`` with its adjoint and cached operator norm."""

    def __init__(self, matrix):
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        if m.ndim != 2:
            raise DimensionError("linear map needs a 2-D matrix")
        if not np.all(np.isfinite(m)):
            raise ConstructionError("matrix entries must be finite")
        self.matrix = m
        self.matrix.setflags(write=False)
        self._norm: float | None = None

    @property
    def shape(self) -> tuple[int, int]:
        return self.matrix.shape

    @property
    def operator_norm(self) -> float:
        if self._norm is None:
            self._norm = float(np.linalg.norm(self.matrix, 2)) if self.matrix.size else 0.0
        return self._norm

    @property
    def is_zero(self) -> bool:
        return not np.any(self.matrix)

    def apply(self, x) -> np.ndarray:
        return self.matrix @ x

    def adjoint(self, y) -> np.ndarray:
        return self.matrix.T @ y

    __call__ = apply

    def __repr__(self):
        return f"LinearMap(shape={self.shape})"


def resolvent_of_inverse(M: ResolventOp, gamma: float, y) -> np.ndarray:
    """``J_{gamma M^{-1}}(y) = y - gamma * J_{M/gamma}(y / gamma)``.

    This is the Moreau-type decomposition of the identity; it is how the
    dual resolvents of the primal-dual scheme are obtained from ``A_i``.
    """
    if not gamma > 0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    y = np.asarray(y, dtype=float)
    return y - gamma * M(1.0 / gamma, y / gamma)


def inverse_op(M: ResolventOp) -> ResolventOp:
    """The inverse operator ``M^{-1}`` with resolvents from :func:`resolvent_of_inverse`."""
    return ResolventOp(
        resolvent=lambda gamma, y: resolvent_of_inverse(M, gamma, y),
        dim=M.dim,
        modulus=M.inverse_modulus,
        inverse_modulus=M.modulus,
        label=f"inv({M.label})" if M.label else "inv",
    )


def build_subdiff_quadratic(a, weight: float = 1.0) -> ResolventOp:
    """Gradient of ``weight/2 * ||x - a||^2``, i.e. ``M x = weight * (x - a)``."""
    a = as_point(a)
    weight = float(weight)
    if not weight > 0:
        raise ConstructionError("weight must be positive")

    def resolvent(gamma, x):
        gw = gamma * weight
        return (x + gw * a) / (1.0 + gw)

    return ResolventOp(
        resolvent, dim=a.shape[0], modulus=weight, inverse_modulus=1.0 / weight,
        label=f"subdiff_quadratic(weight={weight:g})",
    )


def _monotone_part(Q: np.ndarray) -> tuple[float, float]:
    """Smallest and largest eigenvalue of the symmetric part of ``Q``."""
    eig = np.linalg.eigvalsh(0.5 * (Q + Q.T))
    return float(eig[0]), float(eig[-1])


def build_affine_resolvent(matrix, offset=None) -> ResolventOp:
    """``M x = Q x + c`` for a monotone matrix ``Q`` (PSD symmetric part)."""
    Q = LinearMap(matrix).matrix
    if Q.shape[0] != Q.shape[1]:
        raise ConstructionError("affine operator needs a square matrix")
    d = Q.shape[0]
    c = np.zeros(d) if offset is None else as_point(offset, d)
    lo, _ = _monotone_part(Q)
    if lo < -1e-12:
        raise ConstructionError("matrix is not monotone (symmetric part has a negative eigenvalue)")
    eye = np.eye(d)

    def resolvent(gamma, x):
        return np.linalg.solve(eye + gamma * Q, x - gamma * c)

    # M^{-1} is strongly monotone with modulus min_x <x, Qx> / ||Qx||^2 when Q is invertible;
    # for symmetric Q this is 1 / lambda_max.
    inv_mod = 0.0
    if np.allclose(Q, Q.T) and lo > 0:
        inv_mod = 1.0 / float(np.linalg.eigvalsh(Q)[-1])
    return ResolventOp(resolvent, dim=d, modulus=max(lo, 0.0), inverse_modulus=inv_mod, label="affine")


def build_normal_cone_op(S: ConvexSet) -> ResolventOp:
    """``N_S``; its resolvent is the projection for every gamma."""
    return ResolventOp(lambda gamma, x: S.project(x), dim=S.dim, label=f"normal_cone({S.variant})")


def _skew_check(m: np.ndarray) -> None:
    if m.shape[0] != m.shape[1]:
        raise ConstructionError("skew operator needs a square matrix")
    if not np.allclose(m, -m.T, rtol=0.0, atol=1e-12):
        raise ConstructionError("matrix is not antisymmetric")


def build_skew_op(matrix) -> SingleValuedOp:
    """Skew linear operator ``x -> K x``; monotone and ``||K||``-Lipschitz, never cocoercive."""
    K = matrix if isinstance(matrix, LinearMap) else LinearMap(matrix)
    _skew_check(K.matrix)
    d = K.shape[0]
    if K.is_zero:
        return zero_op(d)
    return SingleValuedOp(
        K.apply, dim=d, regularity="lipschitz_monotone", constant=K.operator_norm,
        label="skew", matrix=K.matrix,
    )


def build_affine_op(matrix, offset=None, regularity: Regularity | None = None) -> SingleValuedOp:
    """Single-valued ``D x = Q x + c``.

    Symmetric PSD ``Q`` is ``1/lambda_max``-cocoercive; a general monotone
    ``Q`` is declared Lipschitz-monotone with ``L = ||Q||``. Passing
    ``regularity="lipschitz_monotone"`` forces the weaker class.
    """
    Q = LinearMap(matrix)
    m = Q.matrix
    if m.shape[0] != m.shape[1]:
        raise ConstructionError("affine operator needs a square matrix")
    d = m.shape[0]
    c = np.zeros(d) if offset is None else as_point(offset, d)
    lo, _ = _monotone_part(m)
    if lo < -1e-12:
        raise ConstructionError("matrix is not monotone (symmetric part has a negative eigenvalue)")

    def fn(x):
        return m @ x + c

    if Q.is_zero and not np.any(c):
        return zero_op(d)
    if Q.is_zero:
        # constant maps are monotone and cocoercive for any eta
        return SingleValuedOp(fn, d, "cocoercive", ETA_CAP, "affine", matrix=m)
    symmetric = np.allclose(m, m.T, rtol=0.0, atol=1e-12)
    if regularity is None:
        regularity = "cocoercive" if symmetric else "lipschitz_monotone"
    if regularity == "cocoercive":
        if not symmetric:
            raise ConstructionError("cocoercive affine operator needs a symmetric PSD matrix")
        return SingleValuedOp(fn, d, "cocoercive", 1.0 / float(np.linalg.eigvalsh(m)[-1]), "affine", matrix=m)
    if regularity == "lipschitz_monotone":
        return SingleValuedOp(fn, d, "lipschitz_monotone", Q.operator_norm, "affine", matrix=m)
    raise ConstructionError(f"regularity {regularity!r} does not fit a nonzero affine map")


def zero_op(dim: int) -> SingleValuedOp:
    return SingleValuedOp(lambda x: np.zeros_like(x), dim, "zero", label="zero", matrix=np.zeros((dim, dim)))


# sampled spot checks ---------------------------------------------------------


def _pairs(dim: int, rng: np.random.Generator, n: int, scale: float):
    for _ in range(n):
        yield scale * rng.standard_normal(dim), scale * rng.standard_normal(dim)


def check_firmly_nonexpansive(M: ResolventOp, gamma: float, rng=None, n: int = 100,
                              scale: float = 10.0, tol: float = 1e-9) -> bool:
    """``||Jx - Jy||^2 <= <x - y, Jx - Jy>`` on ``n`` random pairs."""
    rng = np.random.default_rng(rng)
    for x, y in _pairs(M.dim, rng, n, scale):
        jx, jy = M(gamma, x), M(gamma, y)
        d = jx - jy
        if np.dot(d, d) > np.dot(x - y, d) + tol * max(1.0, np.dot(x - y, x - y)):
            return False
    return True


def check_cocoercive(D: SingleValuedOp, eta: float, rng=None, n: int = 100,
                     scale: float = 10.0, tol: float = 1e-9) -> bool:
    rng = np.random.default_rng(rng)
    for x, y in _pairs(D.dim, rng, n, scale):
        dd = D(x) - D(y)
        if np.dot(x - y, dd) < eta * np.dot(dd, dd) - tol:
            return False
    return True


def check_lipschitz_monotone(D: SingleValuedOp, L: float, rng=None, n: int = 100,
                             scale: float = 10.0, tol: float = 1e-9) -> bool:
    rng = np.random.default_rng(rng)
    for x, y in _pairs(D.dim, rng, n, scale):
        dd = D(x) - D(y)
        if np.dot(x - y, dd) < -tol:
            return False
        if np.linalg.norm(dd) > L * np.linalg.norm(x - y) + tol:
            return False
    return True


def verify_declared_regularity(D: SingleValuedOp, rng=None, n: int = 100) -> None:
    """Raise :class:`ConstructionError` if sampling contradicts ``D.regularity``."""
    if D.regularity == "zero":
        ok = all(not np.any(D(x)) for x, _ in _pairs(D.dim, np.random.default_rng(rng), 5, 1.0))
    elif D.regularity == "cocoercive":
        ok = check_cocoercive(D, D.constant, rng, n)
    else:
        ok = check_lipschitz_monotone(D, D.constant, rng, n)
    if not ok:
        raise ConstructionError(f"sampling contradicts declared regularity {D.regularity} of {D.label!r}")


# JSON descriptors ------------------------------------------------------------


def _take(spec: dict, key: str):
    try:
        return spec.pop(key)
    except KeyError:
        raise ValueError(f"operator descriptor {spec.get('kind')!r} is missing {key!r}") from None


def _finish(spec: dict, kind: str) -> None:
    if spec:
        raise ValueError(f"unexpected fields for operator {kind!r}: {sorted(spec)}")


def resolvent_op_from_dict(spec: dict[str, Any]) -> ResolventOp:
    """Set-valued operator from ``{"kind": "subdiff_quadratic" | "normal_cone" | "skew" | "affine", ...}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "subdiff_quadratic":
        op = build_subdiff_quadratic(_take(spec, "a"), spec.pop("weight", 1.0))
    elif kind == "normal_cone":
        op = build_normal_cone_op(set_from_dict(_take(spec, "set")))
    elif kind == "skew":
        m = LinearMap(_take(spec, "matrix")).matrix
        _skew_check(m)
        op = build_affine_resolvent(m)
    elif kind == "affine":
        op = build_affine_resolvent(_take(spec, "matrix"), spec.pop("offset", None))
    else:
        raise ValueError(f"unknown set-valued operator kind {kind!r}")
    _finish(spec, kind)
    return op


def single_valued_op_from_dict(spec: dict[str, Any]) -> SingleValuedOp:
    """Single-valued operator from ``{"kind": "zero" | "skew" | "affine", ...}``."""
    spec = dict(spec)
    kind = spec.pop("kind", None)
    if kind == "zero":
        op = zero_op(int(_take(spec, "dim")))
    elif kind == "skew":
        op = build_skew_op(_take(spec, "matrix"))
    elif kind == "affine":
        op = build_affine_op(_take(spec, "matrix"), spec.pop("offset", None), spec.pop("regularity", None))
    else:
        raise ValueError(f"unknown single-valued operator kind {kind!r}")
    _finish(spec, kind)
    return op
