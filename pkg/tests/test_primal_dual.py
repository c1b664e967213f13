import numpy as np
import pytest

from penaltysplit.fbb import fbb_run
from penaltysplit.fbfb import fbfb_step
from penaltysplit.operators import (
    build_affine_op,
    build_affine_resolvent,
    build_normal_cone_op,
    build_subdiff_quadratic,
    zero_op,
)
from penaltysplit.penalty import HalfDistSqPenalty, NormalConePenalty
from penaltysplit.primal_dual import (
    Block,
    ProductPoint,
    StructuredProblem,
    assemble_product,
    compare_pd,
    pd_run,
    pd_step,
    power_norm,
)
from penaltysplit.problem import AdmissionError
from penaltysplit.problems import get_benchmark, structured_benchmark
from penaltysplit.schedules import PowerLaw
from penaltysplit.space import DimensionError, Halfspace, Singleton, WholeSpace


def _simple(L=np.eye(2), d_inv=None):
    A = build_subdiff_quadratic([1.0, 2.0])
    blk = Block(build_subdiff_quadratic([0.5, 0.5]), d_inv or zero_op(2), L)
    return StructuredProblem(A, zero_op(2), (blk,), HalfDistSqPenalty(Halfspace([1, 0], 0)))


def test_block_rejects_zero_L():
    with pytest.raises(DimensionError):
        Block(build_subdiff_quadratic([0.0, 0.0]), zero_op(2), np.zeros((2, 2)))


def test_dimension_checks():
    blk = Block(build_subdiff_quadratic([0.0]), zero_op(1), np.ones((1, 3)))
    with pytest.raises(DimensionError):
        StructuredProblem(build_subdiff_quadratic([0.0, 0.0]), zero_op(2), (blk,), NormalConePenalty(WholeSpace(2)))


def test_assembly_shape_and_skew_coupling():
    sp = _simple()
    prod = assemble_product(sp)
    assert prod.dim == 4
    # with D = 0 and D_1^{-1} = 0 the product D is the pure skew coupling
    K = np.column_stack([prod.D(e) for e in np.eye(4)])
    assert np.allclose(K, -K.T)
    assert np.allclose(K[:2, 2:], np.eye(2))
    assert power_norm(K) == pytest.approx(1.0)


def test_product_penalty_fixes_primal_feasible_points():
    prod = assemble_product(_simple())
    rng = np.random.default_rng(0)
    for _ in range(20):
        z = rng.standard_normal(4)
        z[0] = -abs(z[0])
        assert np.allclose(prod.B.resolvent(3.0, z), z)


def test_product_D_monotone():
    sp = _simple(L=np.array([[1.0, 2.0], [0.0, -1.0]]), d_inv=build_affine_op(0.5 * np.eye(2)))
    D = assemble_product(sp).D
    rng = np.random.default_rng(0)
    for _ in range(100):
        x, y = rng.standard_normal((2, 4))
        assert np.dot(x - y, D(x) - D(y)) >= -1e-9


def test_pd_step_equals_fbfb_on_product():
    sp = get_benchmark("structured").problem
    prod = assemble_product(sp)
    rng = np.random.default_rng(42)
    for _ in range(1000):
        z = 5 * rng.standard_normal(prod.dim)
        lam, beta = 1 - rng.random(2)  # in (0, 1]
        a = pd_step(sp, ProductPoint.split(z, sp.dim, sp.dual_dims), lam, beta).next.flat()
        b = fbfb_step(prod, z, lam, beta).x_next
        assert np.max(np.abs(a - b)) <= 1e-12


def test_all_zero_operators_are_stationary():
    zero_A = build_affine_resolvent(np.zeros((2, 2)))
    blk = Block(build_affine_resolvent(np.zeros((2, 2))), zero_op(2), np.eye(2))
    sp = StructuredProblem(zero_A, zero_op(2), (blk,), NormalConePenalty(WholeSpace(2)))
    st = pd_step(sp, ProductPoint(np.zeros(2), [np.zeros(2)]), 0.5, 1.0)
    assert np.array_equal(st.next.flat(), np.zeros(4))


def test_reduction_with_trivial_dual_operator():
    # A_1 = N_{0}, so A_1^{-1} = 0: solve 0 = x - a + L^T v, L x = 0
    a = np.array([1.0, 2.0])
    L = np.array([[1.0, 1.0]])
    blk = Block(build_normal_cone_op(Singleton([0.0])), zero_op(1), L)
    sp = StructuredProblem(build_subdiff_quadratic(a), zero_op(2), (blk,), NormalConePenalty(WholeSpace(2)))
    v = np.linalg.solve(L @ L.T, L @ a)
    x = a - L.T @ v
    assert np.allclose(x, [-0.5, 0.5])
    sp = StructuredProblem(sp.A, sp.D, sp.blocks, sp.B, primal_solution=x, dual_solution=(v,))
    report, _ = pd_run(sp, PowerLaw(1, 0.6, 1, 1), 20000)
    m = report.extra["checkpoint_metrics"]
    first, last = m[0], m[-1]
    assert last["primal_ergodic_dist"] < first["primal_ergodic_dist"]
    assert last["primal_ergodic_dist"] < 0.05 and last["dual_ergodic_dist"] < 0.05
    # A is strongly monotone, so the primal iterate itself converges
    assert last["primal_dist"] < 1e-3


def test_strongly_monotone_variant_converges_nonergodically():
    bench = get_benchmark("structured-unconstrained")
    report, _ = pd_run(bench.problem, bench.schedule, 5000)
    fm = report.extra["final_metrics"]
    assert fm["primal_dist"] < 1e-8 and fm["dual_dist"] < 1e-8
    assert report.lemma_residual_max <= 1e-7 * report.lemma_scale


def test_fbb_rejected_on_product():
    prod = assemble_product(get_benchmark("structured").problem)
    with pytest.raises(AdmissionError):
        fbb_run(prod, budget=5)


def test_compare_pd_and_fault_injection():
    sp = get_benchmark("structured").problem
    ok = compare_pd(sp, PowerLaw(1, 0.6, 1, 1), 200)
    assert ok.max_deviation <= 1e-12
    bad = compare_pd(sp, PowerLaw(1, 0.6, 1, 1), 200, coupling_scale=1.001)
    assert bad.max_deviation > 1e-6


def test_compare_pd_without_blocks():
    a = np.array([1.0, -1.0])
    sp = StructuredProblem(build_subdiff_quadratic(a), build_affine_op(np.diag([1.0, 2.0])), (),
                           HalfDistSqPenalty(Halfspace([1, 0], 0)))
    assert compare_pd(sp, PowerLaw(1, 1, 1, 1), 300).max_deviation == 0.0


def test_structured_benchmark_oracle_dual_and_primal():
    bench = structured_benchmark(d=2, L=np.eye(2), d_inv_scale=0.5)
    sp = bench.problem
    x, v = sp.primal_solution, sp.dual_solution[0]
    # dual: v = (A_1 [] D_1)(L x), i.e. A_1^{-1} v + D_1^{-1} v = L x
    assert np.allclose(0.5 + v + 0.5 * v, x)
    # primal: 0 = x - a + v
    assert np.allclose(x - np.array([1.0, 2.0]) + v, 0)
