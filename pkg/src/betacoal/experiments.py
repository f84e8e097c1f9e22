"""Registered verification experiments.

Each experiment is a deterministic function of (seed, parameters): replicates
draw from per-replicate streams whose ids are derived from the experiment id,
and aggregation is order-independent, so reports do not depend on the thread
count.  Thresholds are pinned here; KS thresholds combine the 1% critical
distance with a finite-size bias allowance calibrated from pilot runs at
doubled n.
"""
from __future__ import annotations

import math
import time
import zlib
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .numerics import make_alpha_params, log_gamma, stable_cf
from . import rates, sampling, coalescent, coupling_lab, limits, stats
from .sampling import RandomStream
from .stats import ExperimentReport

DEFAULT_SEED = 0xC0A1E5CE

_ALPHA_GRID = [round(1.05 + 0.05 * i, 2) for i in range(19)]  # 1.05 .. 1.95


def _stream(seed: int, tag: str, i: int = 0) -> RandomStream:
    """Replicate stream: id mixes a per-purpose tag with the replicate index."""
    base = zlib.crc32(tag.encode("ascii"))
    return RandomStream(seed=seed, stream_id=(base << 20) + i)


def _pmap(fn, count: int, threads: int) -> list:
    """Order-preserving map over replicate indices, optionally threaded."""
    if threads <= 1:
        return [fn(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, range(count)))


# --------------------------------------------------------------------------
# deterministic rate-structure checks


def _exp_rho2_exact(seed, threads, **kw):
    errs = {}
    for a in _ALPHA_GRID:
        p = make_alpha_params(a)
        errs[a] = abs(rates.total_rate(2, p) - 1.0)
    worst = max(errs.values())
    r = ExperimentReport("rho2-exact", alpha=math.nan, seed=seed, n=2, replicates=0)
    r.statistics = {"max_abs_error": worst}
    r.thresholds = {"max_abs_error": 1e-12}
    r.verdict = {"max_abs_error": worst < 1e-12}
    return r


def _exp_jump_normalization(seed, threads, **kw):
    ms = [2, 10, 100, 1000, 10000]
    worst = 0.0
    for a in _ALPHA_GRID:
        p = make_alpha_params(a)
        for m in ms:
            worst = max(worst, abs(float(np.sum(rates.jump_pmf_vector(m, p))) - 1.0))
    r = ExperimentReport("jump-normalization", alpha=math.nan, seed=seed, n=max(ms), replicates=0)
    r.statistics = {"max_abs_error": worst}
    r.thresholds = {"max_abs_error": 1e-10}
    r.verdict = {"max_abs_error": worst < 1e-10}
    return r


def _exp_rate_asymptotics(seed, threads, **kw):
    m = 10_000
    ratios = {}
    for a in [1.2, 1.5, 1.8]:
        p = make_alpha_params(a)
        log_ratio = (
            float(rates.log_total_rate(float(m), p))
            + math.log(a)
            + log_gamma(a)
            - a * math.log(m)
        )
        ratios[f"ratio_alpha_{a}"] = math.exp(log_ratio)
    ok = all(0.999 <= v <= 1.001 for v in ratios.values())
    r = ExperimentReport("rate-asymptotics", alpha=math.nan, seed=seed, n=m, replicates=0)
    r.statistics = ratios
    r.thresholds = {"ratio_band": 0.001}
    r.verdict = {"ratio_band": ok}
    return r


def _exp_dominance(seed, threads, **kw):
    fails = 0
    for a in [1.1, 1.5, 1.9]:
        p = make_alpha_params(a)
        for m in range(2, 201):
            if not rates.dominance_check(m, p):
                fails += 1
    r = ExperimentReport("dominance", alpha=math.nan, seed=seed, n=200, replicates=0)
    r.statistics = {"violations": float(fails)}
    r.thresholds = {"violations": 0.0}
    r.verdict = {"violations": fails == 0}
    return r


def _exp_mismatch_bound(seed, threads, **kw):
    grid = sorted(set(int(round(m)) for m in np.logspace(math.log10(2.0), 4.0, 40)))
    worst = -math.inf  # max of mismatch/bound over the grid
    for a in [1.1, 1.5, 1.9]:
        p = make_alpha_params(a)
        for m in grid:
            bound = 1.0 / ((a - 1.0) * m)
            worst = max(worst, rates.mismatch_mass(m, p) / bound)
    r = ExperimentReport("mismatch-bound", alpha=math.nan, seed=seed, n=max(grid), replicates=0)
    r.statistics = {"max_mismatch_over_bound": worst}
    r.thresholds = {"max_mismatch_over_bound": 1.0 + 1e-9}
    r.verdict = {"max_mismatch_over_bound": worst <= 1.0 + 1e-9}
    return r


# --------------------------------------------------------------------------
# sampler correctness


def _exp_coupled_sampler_ks(seed, threads, *, draws=1_000_000, **kw):
    p = make_alpha_params(1.5)
    crit = stats.ks_critical(draws, draws, 0.01)
    statistics, verdict, thresholds = {}, {}, {}
    for m in [3, 50, 1000]:
        s1 = _stream(seed, f"coupled-{m}")
        s2 = _stream(seed, f"inversion-{m}")
        a = sampling.sample_jump_many(m, draws, s1, p)
        b = sampling.sample_jump_inversion(m, s2, p, size=draws)
        d = stats.ks_two_sample(a, b)
        statistics[f"ks_m_{m}"] = d
        thresholds[f"ks_m_{m}"] = crit
        verdict[f"ks_m_{m}"] = d <= crit
    r = ExperimentReport("coupled-sampler-ks", alpha=1.5, seed=seed, n=1000, replicates=draws)
    r.statistics, r.thresholds, r.verdict = statistics, thresholds, verdict
    return r


def _exp_stable_sampler(seed, threads, *, draws=100_000, **kw):
    p = make_alpha_params(1.5)
    x = sampling.sample_stable(_stream(seed, "stable"), p, size=draws)
    statistics, verdict, thresholds = {}, {}, {}
    for u in [0.5, 1.0, 2.0]:
        emp = np.mean(np.exp(1j * u * x))
        err = abs(emp - stable_cf(u, p))
        statistics[f"cf_error_u_{u}"] = float(err)
        thresholds[f"cf_error_u_{u}"] = 0.02
        verdict[f"cf_error_u_{u}"] = err <= 0.02
    left = float(np.mean(x < -10.0)) * 10.0 ** p.alpha
    right = float(np.mean(x > 10.0))
    statistics["left_tail_ratio_at_10"] = left
    thresholds["left_tail_ratio_band"] = 0.2
    verdict["left_tail_ratio_band"] = 0.8 <= left <= 1.2
    statistics["right_tail_at_10"] = right
    thresholds["right_tail_at_10"] = 0.5 * 10.0 ** (-p.alpha)
    verdict["right_tail_at_10"] = right < 0.5 * 10.0 ** (-p.alpha)
    r = ExperimentReport("stable-sampler", alpha=1.5, seed=seed, n=0, replicates=draws)
    r.statistics, r.thresholds, r.verdict = statistics, thresholds, verdict
    return r


def _exp_weighted_sum_ks(seed, threads, *, n=10_000, reps=2000, **kw):
    p = make_alpha_params(1.5)

    def one(i):
        return limits.weighted_v_sum_statistic(n, _stream(seed, "wsum", i), p)

    vals = np.asarray(_pmap(one, reps, threads))
    ref = -p.c_weighted_sum * sampling.sample_stable(_stream(seed, "wsum-ref"), p, size=reps)
    d = stats.ks_two_sample(vals, ref)
    r = ExperimentReport("weighted-sum-ks", alpha=1.5, seed=seed, n=n, replicates=reps)
    r.statistics = {"ks": d}
    r.thresholds = {"ks": 0.08}
    r.verdict = {"ks": d <= 0.08}
    r.raw = {"statistic": vals}
    return r


# --------------------------------------------------------------------------
# tree-length and site-count limit laws


def _simulate_lengths(seed, tag, n, reps, params, threads):
    def one(i):
        return coalescent.tree_length(coalescent.simulate_path(n, _stream(seed, tag, i), params))

    return np.asarray(_pmap(one, reps, threads))


def _exp_length_lln(seed, threads, *, n=100_000, reps=200, **kw):
    p = make_alpha_params(1.5)
    lengths = _simulate_lengths(seed, "lln", n, reps, p, threads)
    ratios = lengths / (p.c1 * n ** (2.0 - p.alpha))
    mob = stats.median_of_batches(ratios, 10)
    r = ExperimentReport("length-lln", alpha=1.5, seed=seed, n=n, replicates=reps)
    r.statistics = {"median_of_batches": mob, "mean_ratio": float(np.mean(ratios))}
    r.thresholds = {"median_of_batches_band": 0.05}
    r.verdict = {"median_of_batches_band": 0.95 <= mob <= 1.05}
    r.raw = {"length_ratio": ratios}
    return r


def _exp_length_stable_ks(seed, threads, *, reps=1000, ref_size=20_000, deep_n=None, **kw):
    # The centered mean E L_n - c1 n^(2-a) grows like n^(3-2a) below a=1.5,
    # slower than the fluctuation scale n^(1/a+1-a), so the KS distance to the
    # limit law decays only like n^((3-2a)-(1/a+1-a)); at a=1.4, n=10^4 the
    # residual location shift alone keeps KS near 0.22.  The pinned threshold
    # stays as declared; pass deep_n (e.g. 10^6, ~2 min) to also probe a size
    # where the distance does drop under it.
    p = make_alpha_params(1.4)
    reg = limits.classify_regime(p)
    ref = limits.reference_sample(reg, "length", 1.0, ref_size, _stream(seed, "lenref"), p)
    ns = [100, 10_000] + ([int(deep_n)] if deep_n else [])
    ks = {}
    for n in ns:
        lengths = _simulate_lengths(seed, "lenstable", n, reps, p, threads)
        ks[n] = stats.ks_two_sample(limits.normalize_length(lengths, n, p), ref)
    r = ExperimentReport("length-stable-ks", alpha=1.4, seed=seed, n=max(ns), replicates=reps)
    r.statistics = {f"ks_n_{n}": ks[n] for n in ns}
    r.thresholds = {"ks_n_10000": 0.12, "ks_decreasing": 0.0}
    r.verdict = {
        "ks_n_10000": ks[10_000] <= 0.12,
        "ks_decreasing": ks[10_000] <= ks[100],
    }
    if deep_n:
        r.thresholds["ks_deep_n"] = 0.12
        r.verdict["ks_deep_n"] = ks[int(deep_n)] <= 0.12
    return r


def _exp_length_shift_stability(seed, threads, *, reps=1000, **kw):
    p = make_alpha_params(1.8)
    shifted = {}
    for n in [1000, 10_000]:
        lengths = _simulate_lengths(seed, f"shift{n}", n, reps, p, threads)
        shifted[n] = limits.normalize_length(lengths, n, p)
    d = stats.ks_two_sample(shifted[1000], shifted[10_000])
    r = ExperimentReport("length-shift-stability", alpha=1.8, seed=seed, n=10_000, replicates=reps)
    r.statistics = {"ks": d}
    r.thresholds = {"ks": 0.08}
    r.verdict = {"ks": d <= 0.08}
    return r


def _exp_sites_clt_ks(seed, threads, *, n=10_000, reps=1000, ref_size=20_000, theta=1.0, **kw):
    p = make_alpha_params(1.7)
    reg = limits.classify_regime(p)

    def one(i):
        st = _stream(seed, "sites", i)
        length = coalescent.tree_length(coalescent.simulate_path(n, st, p))
        return coalescent.segregating_sites(length, theta, st)

    sites = np.asarray(_pmap(one, reps, threads))
    norm = limits.normalize_sites(sites, n, theta, p)
    ref = limits.reference_sample(reg, "sites", theta, ref_size, _stream(seed, "sitesref"), p)
    d = stats.ks_two_sample(norm, ref)
    r = ExperimentReport("sites-clt-ks", alpha=1.7, seed=seed, n=n, replicates=reps)
    r.statistics = {"ks": d}
    r.thresholds = {"ks": 0.08}
    r.verdict = {"ks": d <= 0.08}
    r.raw = {"normalized_sites": norm}
    return r


def _exp_length_reorder_ks(seed, threads, *, n=1000, reps=2000, **kw):
    p = make_alpha_params(1.5)
    direct = _simulate_lengths(seed, "reorder-direct", n, reps, p, threads)

    def one(i):
        st = _stream(seed, "reorder-pp", i)
        pp = coalescent.cpp_of_path(coalescent.simulate_path(n, st, p))
        return coalescent.length_functional(pp, st, p)

    reordered = np.asarray(_pmap(one, reps, threads))
    d = stats.ks_two_sample(direct, reordered)
    r = ExperimentReport("length-reorder-ks", alpha=1.5, seed=seed, n=n, replicates=reps)
    r.statistics = {"ks": d}
    r.thresholds = {"ks": 0.05}
    r.verdict = {"ks": d <= 0.05}
    return r


# --------------------------------------------------------------------------
# point-process machinery


def _exp_block_coupling(
    seed, threads, *, r_level=10, reps=100_000, law_trials=500, occ_trials=200, **kw
):
    p = make_alpha_params(1.5)
    b = 2 ** r_level
    m_law, mp_law = coupling_lab.window_max_laws(b, law_trials, _stream(seed, "maxlaw"), p)
    pick = _stream(seed, "blockstart").rng
    starts_m = m_law[pick.integers(0, len(m_law), size=reps)]
    starts_mp = mp_law[pick.integers(0, len(mp_law), size=reps)]

    def one(i):
        res = coupling_lab.dyadic_coupling_block(
            r_level, int(starts_m[i]), int(starts_mp[i]), _stream(seed, "block", i), p
        )
        n, nprime = res.n_steps
        return res.max_discrepancy, abs(n - nprime) <= res.max_discrepancy

    out = _pmap(one, reps, threads)
    d_r = np.asarray([o[0] for o in out], dtype=float)
    step_bound_ok = all(o[1] for o in out)
    t_grid = 2.0 ** np.arange(0, 9)  # 1 .. 256
    envelope = float(max(np.mean(d_r > t) / t ** (1.0 - p.alpha) for t in t_grid))
    # stationary occupancy on [100, 10^4]
    lo, hi = 100, 10_000
    occ = np.empty(occ_trials)
    for i in range(occ_trials):
        ren = coupling_lab.stationary_renewal(hi, _stream(seed, "occ", i), p)
        pts = ren.points
        occ[i] = np.count_nonzero((pts >= lo) & (pts <= hi)) / (hi - lo + 1)
    occupancy = float(np.mean(occ)) / (p.alpha - 1.0)
    r = ExperimentReport("block-coupling", alpha=1.5, seed=seed, n=b, replicates=reps)
    r.statistics = {
        "step_gap_violations": 0.0 if step_bound_ok else 1.0,
        "envelope_constant": envelope,
        "occupancy_ratio": occupancy,
        "median_discrepancy": float(np.median(d_r)),
    }
    r.thresholds = {
        "step_gap_violations": 0.0,
        "envelope_constant": 50.0,
        "occupancy_band": 0.02,
    }
    r.verdict = {
        "step_gap_violations": step_bound_ok,
        "envelope_constant": envelope <= 50.0,
        "occupancy_band": 0.98 <= occupancy <= 1.02,
    }
    r.raw = {"max_discrepancy": d_r}
    return r


def _exp_cpp_window_stability(seed, threads, *, reps=1000, a=2, b=1000, **kw):
    p = make_alpha_params(1.5)
    counts = {}
    for start_n in [100_000, 200_000]:
        def one(i, start_n=start_n):
            pp = coalescent.cpp_infinity_window(
                a, b, start_n, _stream(seed, f"cppwin{start_n}", i), p
            )
            return len(pp.atoms)

        counts[start_n] = np.asarray(_pmap(one, reps, threads), dtype=float)
    d = stats.ks_two_sample(counts[100_000], counts[200_000])
    r = ExperimentReport("cpp-window-stability", alpha=1.5, seed=seed, n=200_000, replicates=reps)
    r.statistics = {
        "ks": d,
        "mean_count_100k": float(np.mean(counts[100_000])),
        "mean_count_200k": float(np.mean(counts[200_000])),
    }
    r.thresholds = {"ks": 0.05}
    r.verdict = {"ks": d <= 0.05}
    r.raw = {"count_100k": counts[100_000], "count_200k": counts[200_000]}
    return r


# --------------------------------------------------------------------------

EXPERIMENTS = {
    "rho2-exact": _exp_rho2_exact,
    "jump-normalization": _exp_jump_normalization,
    "rate-asymptotics": _exp_rate_asymptotics,
    "dominance": _exp_dominance,
    "mismatch-bound": _exp_mismatch_bound,
    "coupled-sampler-ks": _exp_coupled_sampler_ks,
    "stable-sampler": _exp_stable_sampler,
    "weighted-sum-ks": _exp_weighted_sum_ks,
    "length-lln": _exp_length_lln,
    "length-stable-ks": _exp_length_stable_ks,
    "length-shift-stability": _exp_length_shift_stability,
    "sites-clt-ks": _exp_sites_clt_ks,
    "length-reorder-ks": _exp_length_reorder_ks,
    "block-coupling": _exp_block_coupling,
    "cpp-window-stability": _exp_cpp_window_stability,
}


def run_experiment(spec: dict) -> ExperimentReport:
    """Run one registered experiment from a parameter dict.

    ``spec`` must contain ``experiment``; optional ``seed`` (default the
    documented constant), ``threads``, and per-experiment overrides.  The
    report is fully determined by the spec, except for its runtime field.
    """
    spec = dict(spec)
    exp_id = spec.pop("experiment", None)
    if exp_id not in EXPERIMENTS:
        raise KeyError(f"unknown experiment {exp_id!r}")
    seed = int(spec.pop("seed", DEFAULT_SEED))
    threads = int(spec.pop("threads", 1))
    t0 = time.perf_counter()
    report = EXPERIMENTS[exp_id](seed, threads, **spec)
    report.runtime_seconds = time.perf_counter() - t0
    return report.finalize()


def run_all(seed: int = DEFAULT_SEED, threads: int = 1) -> list[ExperimentReport]:
    """Run the full registered suite in registry order."""
    return [
        run_experiment({"experiment": eid, "seed": seed, "threads": threads})
        for eid in EXPERIMENTS
    ]
