import numpy as np
import pytest

from penaltysplit.problems import (
    BENCHMARKS,
    OracleError,
    characterization_spot_check,
    get_benchmark,
    list_benchmarks,
    projection_benchmark,
    skew_saddle_benchmark,
    solve_affine_vi,
    structured_benchmark,
)
from penaltysplit.space import Ball, Box, Halfspace, normal_cone_contains


def test_projection_examples():
    assert np.allclose(projection_benchmark([2, 3], Halfspace([1, 0], 0)).oracle_solution, [0, 3])
    assert np.allclose(projection_benchmark([-2, 3], Halfspace([1, 0], 0)).oracle_solution, [-2, 3])
    assert np.allclose(projection_benchmark([2, 0], Ball([0, 0], 1)).oracle_solution, [1, 0])
    with pytest.raises(ValueError):
        projection_benchmark([2, 0], Ball([0, 0], 1), "skew_linear")


def test_skew_saddle_examples():
    b = skew_saddle_benchmark(a=[1.0, 0.0])
    assert np.allclose(b.oracle_solution, [0.5, 0.5])
    # K = 0 reduces to a projection benchmark
    S = Halfspace([1.0, 0.0], 0.0)
    k0 = skew_saddle_benchmark(a=[2.0, 3.0], S=S, skew=False)
    assert np.allclose(k0.oracle_solution, projection_benchmark([2, 3], S).oracle_solution)
    # an inactive halfspace through the unconstrained solution changes nothing
    free = skew_saddle_benchmark(a=[1.0, 0.0])
    u = free.oracle_solution
    through = skew_saddle_benchmark(a=[1.0, 0.0], S=Halfspace([1.0, 1.0], float(np.sum(u))))
    assert np.allclose(through.oracle_solution, u)


def test_structured_examples():
    b = structured_benchmark(d=2, L=np.eye(2))
    x, v = b.oracle_solution, b.oracle_dual[0]
    K = np.block([[np.eye(2), np.eye(2)], [-np.eye(2), np.eye(2)]])
    sol = np.linalg.solve(K, np.concatenate([[1.0, 2.0], [-0.5, -0.5]]))
    assert np.allclose(np.concatenate([x, v]), sol)
    with pytest.raises(ValueError):
        structured_benchmark(L=np.zeros((2, 2)))
    # D_1^{-1} = 0: the parallel sum is A_1 itself, v = weight (L x - b)
    b = structured_benchmark(d=2, weight=2.0, d_inv_scale=0.0)
    L = np.array([[1.0, 1.0], [0.0, 1.0]])
    assert np.allclose(b.oracle_dual[0], 2.0 * (L @ b.oracle_solution - 0.5))


def test_affine_vi_oracle_satisfies_kkt():
    rng = np.random.default_rng(0)
    for _ in range(30):
        K = rng.standard_normal((3, 3))
        M = np.eye(3) + (K - K.T)
        r = 3 * rng.standard_normal(3)
        box = Box([-1, -1, -1], [1, 1, 1])
        G = np.vstack([np.eye(3), -np.eye(3)])
        h = np.ones(6)
        x = solve_affine_vi(M, r, G, h)
        assert box.contains(x, 1e-9)
        assert normal_cone_contains(box, x, -(M @ x - r), 1e-8)


def test_affine_vi_unsolvable_raises():
    # x >= 1 and x <= 0: empty feasible set
    with pytest.raises(OracleError):
        solve_affine_vi(np.eye(1), np.zeros(1), np.array([[1.0], [-1.0]]), np.array([0.0, -1.0]))


@pytest.mark.parametrize("name", sorted(BENCHMARKS))
def test_every_benchmark_oracle_verified(name):
    b = get_benchmark(name)
    if b.structured:
        sp = b.problem
        assert sp.primal_solution is not None and sp.dual_solution is not None
        from penaltysplit.primal_dual import assemble_product
        prod = assemble_product(sp)
        assert np.linalg.norm(prod.w(prod.certificate)) <= 1e-8
    else:
        prob = b.problem
        assert np.linalg.norm(prob.w(prob.certificate)) <= 1e-8
        assert characterization_spot_check(b, rng=0) >= -1e-8


def test_spot_check_detects_wrong_oracle():
    b = get_benchmark("projection-halfspace")
    b.oracle_solution = np.array([0.0, 2.0])
    assert characterization_spot_check(b, rng=0) < -1e-3


def test_list_and_lookup():
    names = [row["name"] for row in list_benchmarks()]
    assert "projection-halfspace" in names and "structured" in names
    with pytest.raises(KeyError, match="available"):
        get_benchmark("nope")
