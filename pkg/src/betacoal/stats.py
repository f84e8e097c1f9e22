"""Statistical engine: empirical CDF distances, tail-index estimation,
heavy-tail-aware location summaries, and experiment reports.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

_KS_COEF = {0.10: 1.22385, 0.05: 1.35810, 0.02: 1.51743, 0.01: 1.62762}


def ks_two_sample(a, b) -> float:
    """Sup-norm distance between the empirical CDFs of two samples."""
    a = np.sort(np.asarray(a, dtype=float))
    b = np.sort(np.asarray(b, dtype=float))
    if len(a) == 0 or len(b) == 0:
        raise ValueError("samples must be nonempty")
    pooled = np.concatenate([a, b])
    cdf_a = np.searchsorted(a, pooled, side="right") / len(a)
    cdf_b = np.searchsorted(b, pooled, side="right") / len(b)
    return float(np.max(np.abs(cdf_a - cdf_b)))


def ks_critical(n: int, m: int, significance: float = 0.01) -> float:
    """Two-sample KS critical distance at the given significance level."""
    try:
        c = _KS_COEF[significance]
    except KeyError:
        c = math.sqrt(-0.5 * math.log(significance / 2.0))
    return c * math.sqrt((n + m) / (n * m))


def hill_tail_index(sample, k_order: int, side: str = "right") -> float:
    """Hill estimator of the power-law tail index over the top ``k_order``
    order statistics of the chosen tail magnitude.

    ``side="left"`` estimates the index of the lower tail (magnitudes of the
    negated sample).
    """
    x = np.asarray(sample, dtype=float)
    if side == "left":
        x = -x
    elif side != "right":
        raise ValueError("side must be 'left' or 'right'")
    if k_order < 1 or k_order >= len(x):
        raise ValueError("need 1 <= k_order < sample size")
    top = np.sort(x)[-(k_order + 1):]
    if top[0] <= 0.0:
        raise ValueError("tail magnitudes must be positive for the Hill estimator")
    logs = np.log(top)
    return 1.0 / float(np.mean(logs[1:] - logs[0]))


def default_hill_order(n: int, exponent: float = 0.6) -> int:
    """Default number of order statistics: n**exponent, clipped to [10, n-1]."""
    return int(min(max(10, round(n ** exponent)), n - 1))


def median_of_batches(values, n_batches: int = 10) -> float:
    """Median of batch means; the location summary used when Var = inf."""
    v = np.asarray(values, dtype=float)
    if len(v) < n_batches:
        raise ValueError("fewer values than batches")
    batches = np.array_split(v, n_batches)
    return float(np.median([np.mean(b) for b in batches]))


@dataclass
class ExperimentReport:
    """Deterministic verification result for one registered experiment.

    Every entry of ``verdict`` has a matching entry in ``thresholds``;
    ``passed`` is the conjunction.  ``raw`` holds per-replicate statistics
    for the companion CSV and never enters the pass logic.
    """

    experiment_id: str
    alpha: float
    seed: int
    n: int
    replicates: int
    statistics: dict = field(default_factory=dict)
    thresholds: dict = field(default_factory=dict)
    verdict: dict = field(default_factory=dict)
    passed: bool = False
    runtime_seconds: float = 0.0
    raw: dict = field(default_factory=dict, repr=False)

    def finalize(self) -> "ExperimentReport":
        missing = set(self.verdict) - set(self.thresholds)
        if missing:
            raise ValueError(f"verdicts without thresholds: {sorted(missing)}")
        self.passed = all(bool(v) for v in self.verdict.values())
        return self

    def to_dict(self, include_runtime: bool = True) -> dict:
        d = {
            "experiment_id": self.experiment_id,
            # experiments spanning several alpha values report null here
            "alpha": None if math.isnan(self.alpha) else self.alpha,
            "seed": self.seed,
            "n": self.n,
            "replicates": self.replicates,
            "statistics": {k: float(self.statistics[k]) for k in sorted(self.statistics)},
            "thresholds": {k: float(self.thresholds[k]) for k in sorted(self.thresholds)},
            "verdict": {k: bool(self.verdict[k]) for k in sorted(self.verdict)},
            "passed": self.passed,
        }
        if include_runtime:
            d["runtime_seconds"] = self.runtime_seconds
        return d

    def to_json(self, include_runtime: bool = True) -> str:
        return json.dumps(self.to_dict(include_runtime=include_runtime), sort_keys=True, indent=2)

    def write_raw_csv(self, fh) -> None:
        fh.write("replicate,stat_name,value\n")
        for name in sorted(self.raw):
            for i, val in enumerate(np.atleast_1d(self.raw[name])):
                fh.write(f"{i},{name},{float(val)!r}\n")


def run_experiment(spec: dict) -> ExperimentReport:
    """Run a registered experiment; see :mod:`betacoal.experiments`."""
    from . import experiments

    return experiments.run_experiment(spec)
