import math

import numpy as np
import pytest

from betacoal import limits, sampling, stats
from betacoal.limits import UnsupportedRegimeError
from betacoal.numerics import make_alpha_params
from betacoal.sampling import RandomStream

A14 = make_alpha_params(1.4)
A15 = make_alpha_params(1.5)
A17 = make_alpha_params(1.7)
A18 = make_alpha_params(1.8)


def test_classify_regime_cases():
    assert limits.classify_regime(A14).length_case == "I"
    assert limits.classify_regime(A14).sites_case == "I"
    assert limits.classify_regime(A15).length_case == "I"
    assert limits.classify_regime(A15).sites_case == "III"
    assert limits.classify_regime(A17).length_case == "III"
    assert limits.classify_regime(A18).length_case == "III"
    g = limits.classify_regime(make_alpha_params("golden"))
    assert g.length_case == "II"
    assert g.length_log_power == pytest.approx(1.0 / make_alpha_params("golden").alpha)
    s = limits.classify_regime(make_alpha_params("sqrt2"))
    assert s.sites_case == "II"
    # a float numerically at the boundary is NOT the symbolic boundary case
    f = limits.classify_regime(make_alpha_params((1 + math.sqrt(5)) / 2))
    assert f.length_case == "III"


def test_classify_regime_consistency():
    # sites case I implies length case I (sqrt2 < golden ratio)
    for a in [1.05, 1.2, 1.35, 1.41]:
        reg = limits.classify_regime(make_alpha_params(a))
        if reg.sites_case == "I":
            assert reg.length_case == "I"


def test_normalize_length_values():
    # centering zeroes out exactly
    for p in [A14, A15, A18]:
        assert limits.normalize_length(p.c1 * 100 ** (2 - p.alpha), 100, p) == pytest.approx(0.0, abs=1e-9)
    # case I scale at alpha=1.5, n=1e4 is 10^(4/6)
    x = A15.c1 * 1e4**0.5 + 1.0
    assert limits.normalize_length(x, 10_000, A15) == pytest.approx(10 ** (-4.0 / 6.0), rel=1e-10)
    # case III is a pure shift
    d = limits.normalize_length(7.0 + 2.5, 100, A18) - limits.normalize_length(7.0, 100, A18)
    assert d == pytest.approx(2.5, rel=1e-12)


def test_normalize_length_case_ii_log_scale():
    g = make_alpha_params("golden")
    n = 1000
    x = g.c1 * n ** (2 - g.alpha) + 5.0
    want = 5.0 / math.log(n) ** (1.0 / g.alpha)
    assert limits.normalize_length(x, n, g) == pytest.approx(want, rel=1e-10)


def test_normalize_sites_scale():
    # alpha=1.7, n=1e4: denominator 10^0.6
    s = 1.0 * A17.c1 * 1e4**0.3 + 3.0
    assert limits.normalize_sites(s, 10_000, 1.0, A17) == pytest.approx(3.0 / 10**0.6, rel=1e-9)
    with pytest.raises(ValueError):
        limits.normalize_sites(1.0, 10, 0.0, A17)
    with pytest.raises(ValueError):
        limits.normalize_sites(1.0, 1, 1.0, A17)


def test_normalize_monotone():
    for p in [A14, A17, make_alpha_params("golden")]:
        a = limits.normalize_length(10.0, 50, p)
        b = limits.normalize_length(11.0, 50, p)
        assert b > a
    xs = np.array([1.0, 2.0, 3.0])
    out = limits.normalize_sites(xs, 50, 2.0, A15)
    assert np.all(np.diff(out) > 0)


def test_reference_sample_length_cases():
    reg = limits.classify_regime(A14)
    x = limits.reference_sample(reg, "length", 1.0, 5000, RandomStream(0), A14)
    assert len(x) == 5000
    # matches c2/(1+a-a^2)^(1/a) times the stable draw stream-for-stream
    y = A14.c2 / (1 + 1.4 - 1.4**2) ** (1 / 1.4) * sampling.sample_stable(RandomStream(0), A14, size=5000)
    assert np.allclose(x, y)
    with pytest.raises(UnsupportedRegimeError):
        limits.reference_sample(limits.classify_regime(A18), "length", 1.0, 10, RandomStream(0), A18)
    assert len(limits.reference_sample(reg, "length", 1.0, 0, RandomStream(0), A14)) == 0


def test_reference_sample_sites_case_iii_is_gaussian():
    reg = limits.classify_regime(A17)
    theta = 2.0
    x = limits.reference_sample(reg, "sites", theta, 100_000, RandomStream(1), A17)
    assert float(np.mean(x)) == pytest.approx(0.0, abs=0.02)
    assert float(np.std(x)) == pytest.approx(math.sqrt(theta * A17.c1), rel=0.02)


def test_reference_sample_sites_case_ii_variance_floor():
    reg = limits.classify_regime(make_alpha_params("sqrt2"))
    p = make_alpha_params("sqrt2")
    theta = 1.0
    x = limits.reference_sample(reg, "sites", theta, 100_000, RandomStream(2), p)
    # the independent normal component alone contributes theta*c1
    assert float(np.var(x)) >= theta * p.c1 * 0.97


def test_reference_sample_validation():
    reg = limits.classify_regime(A14)
    with pytest.raises(ValueError):
        limits.reference_sample(reg, "depth", 1.0, 10, RandomStream(0), A14)
    with pytest.raises(ValueError):
        limits.reference_sample(reg, "sites", -1.0, 10, RandomStream(0), A14)
    with pytest.raises(ValueError):
        limits.reference_sample(reg, "length", 1.0, -1, RandomStream(0), A14)


def test_weighted_v_sum_statistic_deterministic_hook():
    # v_values hook: all V = gamma gives exactly zero
    p = A15
    v = np.full(100, p.gamma_const)
    assert limits.weighted_v_sum_statistic(100, RandomStream(0), p, v_values=v) == 0.0
    # one unit of excess at k=1: n^(a-1-1/a) * 1
    v[0] += 1.0
    want = 100 ** (1.5 - 1.0 - 1.0 / 1.5)
    assert limits.weighted_v_sum_statistic(100, RandomStream(0), p, v_values=v) == pytest.approx(want)


def test_weighted_v_sum_rejects_above_golden():
    with pytest.raises(UnsupportedRegimeError):
        limits.weighted_v_sum_statistic(10, RandomStream(0), A17)
    # but the golden tag itself is allowed (log scaling)
    g = make_alpha_params("golden")
    out = limits.weighted_v_sum_statistic(1000, RandomStream(0), g)
    assert math.isfinite(out)


def test_weighted_v_sum_stable_limit():
    # the registered fast probe: statistic -> -c_weighted_sum * stable
    p = A15
    reps, n = 1500, 4000
    vals = np.array(
        [limits.weighted_v_sum_statistic(n, RandomStream(3, i), p) for i in range(reps)]
    )
    ref = -p.c_weighted_sum * sampling.sample_stable(RandomStream(4), p, size=20_000)
    assert stats.ks_two_sample(vals, ref) < 0.08


def test_weighted_v_partial_sums():
    p = A15
    v = np.full(50, p.gamma_const)
    v[9] += 2.0
    out = limits.weighted_v_partial_sums(0.8, 50, RandomStream(0), p, v_values=v)
    assert out.shape == (50,)
    assert out[8] == pytest.approx(0.0)
    assert out[-1] == pytest.approx(2.0 * 10.0**-0.8)
    # convergent regime beta > 1/a: tail increments shrink
    big = limits.weighted_v_partial_sums(0.9, 20_000, RandomStream(5), p)
    assert abs(big[-1] - big[10_000]) < abs(big[100] - big[0]) + 5.0
