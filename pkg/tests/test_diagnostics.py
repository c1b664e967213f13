import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from penaltysplit.diagnostics import ErgodicAverager, SolveReport, Trace, distance_to, ergodic_update, log_checkpoints


def _avg(lams, xs):
    a = ErgodicAverager()
    for lam, x in zip(lams, xs):
        ergodic_update(a, lam, [x])
    return a


def test_ergodic_examples():
    assert _avg([1, 1, 1], [0, 3, 3]).z[0] == pytest.approx(2.0)
    assert _avg([0.3], [7.0]).z[0] == 7.0
    assert _avg([1, 2], [0, 3]).z[0] == pytest.approx(2.0)
    with pytest.raises(ValueError):
        _avg([0.0], [1.0])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.tuples(st.floats(1e-3, 10), st.floats(-100, 100)), min_size=1, max_size=40))
def test_ergodic_matches_weighted_mean_and_hull(pairs):
    lams = np.array([p[0] for p in pairs])
    xs = np.array([p[1] for p in pairs])
    a = _avg(lams, xs)
    assert a.z[0] == pytest.approx(np.dot(lams, xs) / lams.sum(), abs=1e-9 * (1 + np.abs(xs).max()))
    assert xs.min() - 1e-9 <= a.z[0] <= xs.max() + 1e-9
    assert a.tau == pytest.approx(lams.sum())


def test_distance_examples():
    assert distance_to([0, 0], [3, 4]) == 5
    assert distance_to([1.5, -2], [1.5, -2]) == 0
    rng = np.random.default_rng(0)
    for _ in range(100):
        a, b, c = rng.standard_normal((3, 3))
        assert distance_to(a, c) <= distance_to(a, b) + distance_to(b, c) + 1e-12
    with pytest.raises(ValueError):
        distance_to([0, 0], [0, 0, 0])


def test_log_checkpoints():
    cps = log_checkpoints(10**5)
    assert cps[0] == 1 and cps[-1] == 10**5
    for k in range(1, 6):
        assert 10**k in cps
    assert set(range(1, 11)) <= set(cps)
    assert log_checkpoints(3) == [1, 2, 3]


def test_trace_csv_and_report_schema(tmp_path):
    t = Trace(["n", "x0", "dist"])
    t.add([1, 0.1, math.nan])
    t.add([2, 1 / 3, 0.5])
    text = t.to_csv()
    assert text.splitlines()[0] == "n,x0,dist"
    assert "0.3333333333333333" in text
    t.write(tmp_path / "t.csv")
    assert (tmp_path / "t.csv").read_text() == text

    r = SolveReport("fbb", np.zeros(2), np.ones(2), 3, dist_history=[(3, 0.1, math.inf)],
                    final_dist=0.1, final_ergodic_dist=math.inf)
    d = r.to_dict()
    assert d["schema"] == 1
    assert d["final_ergodic_dist"] is None
