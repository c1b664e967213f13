import numpy as np
import pytest

from penaltysplit.fbb import fbb_step
from penaltysplit.fbfb import fbfb_lemma_certificate, fbfb_run, fbfb_step
from penaltysplit.operators import build_skew_op, build_subdiff_quadratic, zero_op
from penaltysplit.penalty import NormalConePenalty
from penaltysplit.problem import InclusionProblem
from penaltysplit.problems import get_benchmark, skew_saddle_benchmark
from penaltysplit.schedules import PowerLaw
from penaltysplit.space import Halfspace, WholeSpace

ROT = np.array([[0.0, 1.0], [-1.0, 0.0]])


def test_step_hand_example():
    A = build_subdiff_quadratic([0.0, 0.0], 1.0)  # A = Id
    prob = InclusionProblem(A, build_skew_op(ROT), NormalConePenalty(WholeSpace(2)))
    st = fbfb_step(prob, np.array([1.0, 0.0]), 0.1, 1.0)
    assert np.allclose(st.y, [1.0, 0.1])
    p = np.array([1.0, 0.1]) / 1.1
    assert np.allclose(st.p, p)
    q = p - 0.1 * (ROT @ p)
    assert np.allclose(st.q, q)
    assert np.allclose(st.x_next, np.array([1.0, 0.0]) - np.array([1.0, 0.1]) + q)


def test_coincides_with_fbb_when_D_is_zero():
    rng = np.random.default_rng(0)
    prob = get_benchmark("projection-box").problem
    for _ in range(100):
        x = 3 * rng.standard_normal(2)
        lam, beta = rng.uniform(0.01, 2), rng.uniform(0.1, 10)
        a = fbfb_step(prob, x, lam, beta)
        assert np.array_equal(a.y, x) and np.array_equal(a.q, a.p)
        assert np.array_equal(a.x_next, fbb_step(prob, x, lam, beta).x)


def test_zero_is_fixed_point():
    prob = InclusionProblem(build_subdiff_quadratic([0.0, 0.0]), build_skew_op(ROT), NormalConePenalty(Halfspace([1, 0], 0)))
    x = np.zeros(2)
    for n in range(1, 20):
        x = fbfb_step(prob, x, 1.0 / n, n).x_next
    assert np.array_equal(x, np.zeros(2))


def test_certificate_nonpositive_past_n0():
    rng = np.random.default_rng(1)
    bench = get_benchmark("skew-saddle-halfspace")
    prob = bench.problem
    eta = prob.D.eta
    for _ in range(300):
        x = 4 * rng.standard_normal(2)
        lam = rng.uniform(0.01, eta / 2)
        beta = rng.uniform(0.1, 10.0)
        st = fbfb_step(prob, x, lam, beta)
        u = prob.certificate.u
        assert fbfb_lemma_certificate(st, prob, prob.certificate, lam, beta) <= 1e-9 * (1 + np.dot(x - u, x - u))


def test_certificate_with_zero_D_degenerates():
    prob = get_benchmark("projection-halfspace").problem
    x = np.array([3.0, -1.0])
    for n in range(1, 50):
        lam, beta = 1.0 / n, float(n)
        st = fbfb_step(prob, x, lam, beta)
        assert fbfb_lemma_certificate(st, prob, prob.certificate, lam, beta) <= 1e-12
        x = st.x_next


def test_run_converges_to_unconstrained_zero():
    bench = skew_saddle_benchmark(a=[1.0, 0.0])
    assert np.allclose(bench.oracle_solution, [0.5, 0.5])
    report, _ = fbfb_run(bench.problem, PowerLaw(1, 1, 1, 1), 2000)
    assert report.final_dist < 1e-10


def test_run_ergodic_constrained():
    bench = get_benchmark("skew-saddle-halfspace")
    report, _ = fbfb_run(bench.problem, PowerLaw(1, 1, 1, 1), 20000)
    e = {n: ed for n, _, ed in report.dist_history}
    assert e[20000] < e[1000] < e[100]
    assert report.lemma_residual_max <= 1e-7 * report.lemma_scale


def test_large_constant_step_is_flagged():
    bench = get_benchmark("skew-saddle")
    eta = bench.problem.D.eta
    report, _ = fbfb_run(bench.problem, PowerLaw(eta, 0.0, 1.0, 1.0), 50, override_hypotheses=True)
    assert report.step_flag_count == 50
    assert report.lemma_n0 is None


def test_identity_check_can_be_disabled():
    prob = get_benchmark("skew-saddle").problem
    st = fbfb_step(prob, np.array([1.0, 2.0]), 0.3, 1.0, check_identity=False)
    assert np.all(np.isfinite(st.x_next))


def test_rejects_nonpositive_parameters():
    with pytest.raises(ValueError):
        fbfb_step(get_benchmark("skew-saddle").problem, np.zeros(2), 1.0, -1.0)
