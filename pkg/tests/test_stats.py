import io
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from betacoal import stats
from betacoal.sampling import RandomStream
from betacoal.stats import ExperimentReport


def test_ks_hand_cases():
    assert stats.ks_two_sample([1.0], [2.0]) == 1.0
    assert stats.ks_two_sample([1, 2, 3, 4], [1, 2, 3, 4]) == 0.0
    # [1,2] vs [2,3]: sup at x=1 (1/2 vs 0) and x in [2,3): (1 vs 1/2)
    assert stats.ks_two_sample([1, 2], [2, 3]) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        stats.ks_two_sample([], [1.0])


def test_ks_matches_scipy():
    from scipy.stats import ks_2samp

    rng = np.random.default_rng(0)
    a = rng.normal(size=257)
    b = rng.normal(0.3, 1.1, size=401)
    assert stats.ks_two_sample(a, b) == pytest.approx(ks_2samp(a, b).statistic, rel=1e-12)
    # with heavy ties
    c = rng.integers(0, 5, size=300)
    d = rng.integers(0, 5, size=200)
    assert stats.ks_two_sample(c, d) == pytest.approx(ks_2samp(c, d).statistic, rel=1e-12)


@settings(deadline=None, max_examples=25)
@given(st.lists(st.floats(-100, 100), min_size=1, max_size=50),
       st.lists(st.floats(-100, 100), min_size=1, max_size=50))
def test_ks_symmetric_and_bounded(a, b):
    d = stats.ks_two_sample(a, b)
    assert 0.0 <= d <= 1.0
    assert d == pytest.approx(stats.ks_two_sample(b, a))


def test_ks_critical_values():
    # c(0.01) = 1.62762 * sqrt((n+m)/nm)
    assert stats.ks_critical(1000, 1000, 0.01) == pytest.approx(1.62762 * math.sqrt(2 / 1000))
    assert stats.ks_critical(100, 400, 0.05) == pytest.approx(1.35810 * math.sqrt(500 / 40000))
    # fallback formula for unlisted significance levels
    got = stats.ks_critical(100, 100, 0.03)
    want = math.sqrt(-0.5 * math.log(0.015)) * math.sqrt(0.02)
    assert got == pytest.approx(want)
    assert stats.ks_critical(100, 100, 0.05) < stats.ks_critical(100, 100, 0.01)


def test_ks_null_rejection_rate():
    # same-law samples stay under the 1% critical distance almost always
    rng = RandomStream(0)
    crit = stats.ks_critical(500, 500, 0.01)
    rejections = sum(
        stats.ks_two_sample(rng.rng.normal(size=500), rng.rng.normal(size=500)) > crit
        for _ in range(200)
    )
    assert rejections <= 7


def test_hill_estimator_on_pareto():
    rng = np.random.default_rng(1)
    for alpha in [1.2, 1.8]:
        x = rng.pareto(alpha, size=50_000) + 1.0
        k = stats.default_hill_order(len(x))
        assert stats.hill_tail_index(x, k) == pytest.approx(alpha, rel=0.1)
    # left-tail mode: negate a Pareto
    x = -(rng.pareto(1.5, size=50_000) + 1.0)
    assert stats.hill_tail_index(x, 500, side="left") == pytest.approx(1.5, rel=0.15)
    with pytest.raises(ValueError):
        stats.hill_tail_index([1.0, 2.0], 5)
    with pytest.raises(ValueError):
        stats.hill_tail_index([1.0, 2.0, 3.0], 1, side="middle")


def test_default_hill_order_bounds():
    assert stats.default_hill_order(100_000) == round(100_000**0.6)
    assert stats.default_hill_order(12) >= 10
    assert stats.default_hill_order(11) == 10


def test_median_of_batches():
    vals = np.arange(100.0)
    assert stats.median_of_batches(vals, 10) == pytest.approx(49.5)
    # robust against one wild batch in heavy-tailed data
    vals = np.ones(100)
    vals[:10] = 1e9
    assert stats.median_of_batches(vals, 10) == 1.0
    with pytest.raises(ValueError):
        stats.median_of_batches([1.0, 2.0], 10)


def _dummy_report():
    r = ExperimentReport("demo", alpha=1.5, seed=1, n=10, replicates=2)
    r.statistics = {"ks": 0.03}
    r.thresholds = {"ks": 0.05}
    r.verdict = {"ks": True}
    r.raw = {"stat": np.array([1.0, 2.0])}
    return r


def test_report_finalize_and_json():
    r = _dummy_report().finalize()
    assert r.passed
    d = json.loads(r.to_json())
    assert d["experiment_id"] == "demo"
    assert d["verdict"] == {"ks": True}
    assert "runtime_seconds" in d
    assert "runtime_seconds" not in json.loads(r.to_json(include_runtime=False))
    # verdict without a matching threshold is rejected
    bad = _dummy_report()
    bad.verdict["extra"] = True
    with pytest.raises(ValueError):
        bad.finalize()


def test_report_passed_is_conjunction():
    r = _dummy_report()
    r.thresholds["other"] = 1.0
    r.verdict["other"] = False
    assert not r.finalize().passed


def test_report_raw_csv():
    buf = io.StringIO()
    _dummy_report().write_raw_csv(buf)
    lines = buf.getvalue().splitlines()
    assert lines[0] == "replicate,stat_name,value"
    assert lines[1] == "0,stat,1.0"
    assert len(lines) == 3


def test_run_experiment_delegation():
    rep = stats.run_experiment({"experiment": "rho2-exact", "seed": 0})
    assert rep.passed
    with pytest.raises(KeyError):
        stats.run_experiment({"experiment": "no-such-thing"})
