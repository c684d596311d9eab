import json
import math

import numpy as np
import pytest

from icvcdf.distributions import get_setting
from icvcdf.metrics import (MetricsReport, evaluate_cdf, l1_distance, metric_names,
                            quantile_abs_error, relative_improvement)
from icvcdf.model import StepCdf
from oracles import DiracSetting, UniformSetting


def test_l1_hand_examples():
    assert l1_distance(StepCdf.dirac(1.0), DiracSetting(1.0), 0.0) == 0.0
    assert l1_distance(StepCdf.dirac(0.0), DiracSetting(1.0), 0.0) == 1.0
    assert l1_distance(StepCdf.dirac(0.5), UniformSetting(), 0.0) == pytest.approx(0.25, abs=1e-15)
    assert l1_distance(StepCdf.dirac(0.5), UniformSetting(), 0.0, method="quad") == pytest.approx(
        0.25, abs=1e-8)


def test_l1_step_against_uniform():
    # F = 0.5 on [0, 1): |0.5 - y| integrates to 0.25 on [0, 1]; tails add 0
    est = StepCdf([0.0, 1.0], [0.5, 1.0])
    assert l1_distance(est, UniformSetting(), 0.0) == pytest.approx(0.25, abs=1e-15)
    # steps outside the support: F = 0.2 on [-1, 2): 0.2 + int_0^1 |0.2 - y| + 0.8
    est = StepCdf([-1.0, 2.0], [0.2, 1.0])
    expect = 0.2 + (0.02 + 0.32) + 0.8
    assert l1_distance(est, UniformSetting(), 0.0) == pytest.approx(expect, abs=1e-14)


@pytest.mark.parametrize("name", ["gamma", "student", "betabinom"])
def test_exact_matches_quadrature(name):
    st = get_setting(name)
    gen = np.random.default_rng(8)
    for x in (1.0, 2.5, 4.0):
        draws = np.sort(st.sample(np.full(40, x), gen))
        jumps, counts = np.unique(draws, return_counts=True)
        est = StepCdf(jumps, np.minimum(np.cumsum(counts) / 40, 1.0))
        exact = l1_distance(est, st, x)
        quad = l1_distance(est, st, x, method="quad", tol=1e-10)
        assert exact == pytest.approx(quad, abs=1e-7)


def test_l1_zero_iff_match_discrete():
    st = get_setting("betabinom")
    truth = StepCdf(st.support, st.cdf_table(2.0))
    assert l1_distance(truth, st, 2.0) == pytest.approx(0.0, abs=1e-12)
    bumped = truth.cum.copy()
    bumped[10] = min(bumped[10] + 0.01, bumped[11])
    assert l1_distance(StepCdf(st.support, bumped), st, 2.0) > 0


def test_l1_convex_under_mixing():
    st = get_setting("gamma")
    gen = np.random.default_rng(3)
    grid = np.sort(gen.uniform(0, 4, size=30))
    for _ in range(20):
        a = np.append(np.sort(gen.uniform(size=29)), 1.0)
        b = np.append(np.sort(gen.uniform(size=29)), 1.0)
        la = l1_distance(StepCdf(grid, a), st, 2.0)
        lb = l1_distance(StepCdf(grid, b), st, 2.0)
        lm = l1_distance(StepCdf(grid, 0.5 * (a + b)), st, 2.0)
        assert lm <= 0.5 * (la + lb) + 1e-12


def test_l1_errors():
    with pytest.raises(ValueError):
        l1_distance(StepCdf.dirac(0.0), UniformSetting(), 0.0, tol=0.0)
    with pytest.raises(ValueError):
        l1_distance(StepCdf.dirac(0.0), UniformSetting(), 0.0, method="simpson")


def test_quantile_error_examples():
    st = get_setting("student")
    assert quantile_abs_error(StepCdf.dirac(0.0), st, 2.0, 0.5) == pytest.approx(math.sqrt(2))
    q = float(st.quantile(2.0, 0.3))
    assert quantile_abs_error(StepCdf.dirac(q), st, 2.0, 0.3) == 0.0
    est = StepCdf([0.0, 2.0], [0.5, 1.0])
    assert quantile_abs_error(est, DiracSetting(0.0), 0.0, 0.9) == 2.0
    with pytest.raises(ValueError):
        quantile_abs_error(est, st, 2.0, 1.0)


def test_evaluate_cdf_layout():
    names = metric_names([0.1, 0.5, 0.9])
    assert names == ["L1", "dq_0.1", "dq_0.5", "dq_0.9"]
    out = evaluate_cdf(StepCdf.dirac(0.5), UniformSetting(), 0.0, [0.1, 0.5, 0.9])
    assert np.allclose(out, [0.25, 0.4, 0.0, 0.4])


def test_relative_improvement():
    value, se = relative_improvement([1.0, 1.0], [2.0, 2.0])
    assert value == 0.5 and se == 0.0
    assert relative_improvement([1.0], [0.0]) == (None, None)
    gen = np.random.default_rng(0)
    c = gen.uniform(1, 2, size=4000)
    m = 0.8 * c + gen.normal(scale=0.05, size=4000)
    value, se = relative_improvement(m, c)
    assert value == pytest.approx(0.2, abs=4 * se)
    # the standard error matches the spread across independent batches
    batches = [relative_improvement(m[i::10], c[i::10])[0] for i in range(10)]
    assert np.std(batches, ddof=1) / math.sqrt(10) == pytest.approx(se, rel=1.0)


def make_report():
    errors = {
        "icv": np.array([[[1.0, 0.1]], [[3.0, 0.3]]]),
        "ecdf": np.array([[[2.0, 0.2]], [[4.0, 0.2]]]),
    }
    return MetricsReport.from_errors("gamma", {"type": "ksample", "K": 1}, 7, [1.0],
                                     ["L1", "dq_0.5"], errors, [("icv", "ecdf")])


def test_report_contents_and_serialization():
    report = make_report()
    assert report.mean_error("icv", 1.0, "L1").mean == 2.0
    assert report.improvement("icv", 1.0, "L1").value == pytest.approx(1 - 2 / 3)
    data = json.loads(report.to_json())
    assert data["replications"] == 2 and len(data["summaries"]) == 4
    rows = report.to_csv().splitlines()
    assert rows[0].split(",")[:4] == ["setting", "estimator", "x", "metric"]
    assert len(rows) == 5
    assert "icv vs ecdf" in report.table()
    with pytest.raises(KeyError):
        report.improvement("icv", 2.0, "L1")
