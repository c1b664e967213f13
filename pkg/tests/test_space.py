import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from penaltysplit.space import (
    AffineSubspace,
    Ball,
    Box,
    DimensionError,
    Halfspace,
    ProductSet,
    Singleton,
    WholeSpace,
    as_point,
    inner,
    norm,
    normal_cone_contains,
    project,
    set_from_dict,
    support,
)

finite = st.floats(-50, 50, allow_nan=False, allow_infinity=False)
vec2 = arrays(float, 2, elements=finite)


def test_inner_examples():
    assert inner([1, 2], [3, 4]) == 11
    assert inner([3, 4], [3, 4]) == 25
    assert inner([1, 0], [0, 1]) == 0
    assert norm([3, 4]) == 5


def test_inner_dimension_mismatch():
    with pytest.raises(DimensionError):
        inner([1, 2], [1, 2, 3])


def test_as_point_rejects_nonfinite():
    with pytest.raises(ValueError):
        as_point([1.0, math.nan])
    with pytest.raises(ValueError):
        as_point([math.inf])


def test_project_examples():
    assert np.allclose(project(Halfspace([1, 0], 0), [2, 3]), [0, 3])
    assert np.allclose(project(Ball([0, 0], 1), [3, 4]), [0.6, 0.8])
    assert np.allclose(project(Box([0, 0], [1, 1]), [-1, 0.5]), [0, 0.5])
    assert np.allclose(project(Singleton([1, 2]), [5, 5]), [1, 2])
    assert np.allclose(project(WholeSpace(2), [5, -5]), [5, -5])


def test_support_examples():
    H = Halfspace([1, 0], 0)
    assert support(H, [2, 0]) == 0
    assert support(H, [0, 1]) == math.inf
    assert support(H, [-1, 0]) == math.inf
    assert support(Ball([0, 0], 2), [0, 3]) == pytest.approx(6)
    assert support(Halfspace([1, 0], 2), [3, 0]) == pytest.approx(6)
    assert support(WholeSpace(2), [0, 0]) == 0
    assert support(WholeSpace(2), [0, 1]) == math.inf
    assert support(Box([0, -1], [1, math.inf]), [1, 0]) == 1
    assert support(Box([0, -1], [1, math.inf]), [1, 1]) == math.inf


def test_normal_cone_examples():
    H = Halfspace([1, 0], 0)
    assert normal_cone_contains(H, [0, 1], [1, 0], 1e-12)
    assert not normal_cone_contains(H, [-1, 0], [1, 0], 1e-12)
    for S in (H, Ball([0, 0], 1), Box([-1, -1], [1, 1]), WholeSpace(2)):
        assert normal_cone_contains(S, [-0.5, 0], [0, 0], 1e-12)
    assert not normal_cone_contains(H, [1, 0], [1, 0], 1e-12)  # x outside S


def test_box_validation():
    with pytest.raises(ValueError):
        Box([1, 0], [0, 1])


def test_affine_subspace_and_product():
    L = AffineSubspace([[1.0], [0.0]], [0.0, 2.0])
    assert np.allclose(L.project([3, 5]), [3, 2])
    assert support(L, [0, 1]) == pytest.approx(2)
    assert support(L, [1, 0]) == math.inf
    P = ProductSet((Halfspace([1, 0], 0), WholeSpace(1)))
    assert P.dim == 3
    assert np.allclose(P.project([2, 3, 4]), [0, 3, 4])
    assert support(P, [1, 0, 0]) == 0
    assert support(P, [1, 0, 1]) == math.inf


def _sets():
    return [
        Halfspace([1, 0], 0),
        Halfspace([1, -2], 1.5),
        Ball([0.5, -1], 2),
        Box([0, 0], [1, 1]),
        Box([-math.inf, 0], [0, math.inf]),
        AffineSubspace([[1.0], [1.0]], [0.0, 1.0]),
        Singleton([1, 2]),
        WholeSpace(2),
    ]


@settings(max_examples=60, deadline=None)
@given(x=vec2, z=vec2)
def test_projection_variational_inequality(x, z):
    for S in _sets():
        px = S.project(x)
        assert S.contains(px, 1e-12 * (1 + norm(x)))
        pz = S.project(z)  # a point of S
        assert inner(x - px, pz - px) <= 1e-9 * (1 + norm(x) ** 2 + norm(z) ** 2)


@settings(max_examples=60, deadline=None)
@given(x=vec2)
def test_support_dominates_projection(x):
    # sigma_S(u) >= <u, s> for s in S, with equality at the projection for u = x - P x
    for S in _sets():
        px = S.project(x)
        u = x - px
        s = support(S, u)
        assert s >= inner(u, px) - 1e-7 * (1 + norm(x) ** 2)
        if math.isfinite(s):
            assert s == pytest.approx(inner(u, px), abs=1e-7 * (1 + norm(x) ** 2))
        assert normal_cone_contains(S, px, u, 1e-7 * (1 + norm(x) ** 2))


def test_set_from_dict_roundtrip():
    for S in _sets():
        T = set_from_dict(S.to_dict())
        x = np.array([2.0, -3.0])
        assert np.allclose(T.project(x), S.project(x))


def test_set_from_dict_rejects_bad_input():
    with pytest.raises(ValueError):
        set_from_dict({"variant": "ellipse"})
    with pytest.raises(ValueError):
        set_from_dict({"variant": "ball", "center": [0, 0]})
    with pytest.raises(ValueError):
        set_from_dict({"variant": "ball", "center": [0, 0], "radius": 1, "color": "red"})
