"""Regime classification, normalizations, and reference limit-law samplers.

The tree length has three fluctuation regimes split at the golden ratio, the
site count three split at sqrt(2).  This module centers/rescales simulated
statistics accordingly and draws i.i.d. samples of the closed-form limit laws
where one exists.  It also provides the fast verification path: the rescaled
weighted sums of centered V variables whose stable limit isolates the
heavy-tail machinery from chain-simulation noise.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .numerics import AlphaParams, GOLDEN_RATIO, SQRT2
from . import sampling
from .sampling import RandomStream


class UnsupportedRegimeError(ValueError):
    """Requested a closed-form limit sample in a regime that has none."""


@dataclass(frozen=True)
class RegimeClassification:
    """Case labels and normalization exponents for length and site counts.

    ``length_case`` is "I" below the golden ratio, "II" at it (symbolic tag
    only), "III" above; ``sites_case`` splits the same way at sqrt(2).
    """

    length_case: str
    sites_case: str
    centering_exponent: float  # 2 - a
    length_scale_exponent: float  # 1/a + 1 - a in case I, 0 otherwise
    length_log_power: float | None  # 1/a in case II, else None
    sites_scale_exponent: float  # 1/a + 1 - a (case I) or 1 - a/2


def classify_regime(params: AlphaParams) -> RegimeClassification:
    a = params.alpha
    if params.boundary == "golden":
        length_case = "II"
    elif a < GOLDEN_RATIO:
        length_case = "I"
    else:
        length_case = "III"
    if params.boundary == "sqrt2":
        sites_case = "II"
    elif a < SQRT2:
        sites_case = "I"
    else:
        sites_case = "III"
    stable_exp = 1.0 / a + 1.0 - a
    return RegimeClassification(
        length_case=length_case,
        sites_case=sites_case,
        centering_exponent=2.0 - a,
        length_scale_exponent=stable_exp if length_case == "I" else 0.0,
        length_log_power=1.0 / a if length_case == "II" else None,
        sites_scale_exponent=stable_exp if sites_case == "I" else 1.0 - a / 2.0,
    )


def normalize_length(l_n, n: int, params: AlphaParams):
    """Center and rescale a tree length per the regime of alpha (vectorizes)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    a = params.alpha
    reg = classify_regime(params)
    centered = np.asarray(l_n, dtype=float) - params.c1 * n ** (2.0 - a)
    if reg.length_case == "I":
        out = centered / n ** reg.length_scale_exponent
    elif reg.length_case == "II":
        out = centered / math.log(n) ** reg.length_log_power
    else:
        out = centered
    return float(out) if np.ndim(l_n) == 0 else out


def normalize_sites(s_n, n: int, theta: float, params: AlphaParams):
    """Center and rescale a segregating-site count per the regime (vectorizes)."""
    if n < 2:
        raise ValueError("n must be >= 2")
    if theta <= 0.0:
        raise ValueError("theta must be > 0")
    a = params.alpha
    reg = classify_regime(params)
    centered = np.asarray(s_n, dtype=float) - theta * params.c1 * n ** (2.0 - a)
    out = centered / n ** reg.sites_scale_exponent
    return float(out) if np.ndim(s_n) == 0 else out


def _length_limit_sample(m: int, stream: RandomStream, params: AlphaParams, case: str):
    a = params.alpha
    if case == "I":
        disc = 1.0 + a - a * a
        return params.c2 / disc ** (1.0 / a) * sampling.sample_stable(stream, params, size=m)
    if case == "II":
        return params.c2 * sampling.sample_stable(stream, params, size=m)
    raise UnsupportedRegimeError(
        "no closed-form length limit above the golden ratio; "
        "use run-vs-run distributional stability instead"
    )


def reference_sample(
    regime: RegimeClassification,
    which: str,
    theta: float,
    m: int,
    stream: RandomStream,
    params: AlphaParams,
) -> np.ndarray:
    """i.i.d. draws of the limit law for "length" or "sites" in the given regime."""
    if m < 0:
        raise ValueError("sample size must be >= 0")
    if m == 0:
        return np.empty(0)
    if which == "length":
        return _length_limit_sample(m, stream, params, regime.length_case)
    if which != "sites":
        raise ValueError(f"which must be 'length' or 'sites', got {which!r}")
    if theta <= 0.0:
        raise ValueError("theta must be > 0")
    if regime.sites_case == "I":
        return theta * _length_limit_sample(m, stream, params, "I")
    gauss = math.sqrt(theta * params.c1) * stream.rng.standard_normal(m)
    if regime.sites_case == "II":
        return gauss + theta * _length_limit_sample(m, stream, params, "I")
    return gauss


def weighted_v_sum_statistic(
    n: int, stream: RandomStream, params: AlphaParams, v_values=None
) -> float:
    """Rescaled sum_{k<=n} k^(1-a) (V_k - gamma), the fast stable-limit probe.

    Below the golden ratio the scale is n^(a-1-1/a) and the statistic
    converges to -c_weighted_sum times the stable reference law; with the
    golden tag the scale is (log n)^(-1/a).  ``v_values`` overrides the V
    draws (test hook).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    a = params.alpha
    if params.boundary != "golden" and a >= GOLDEN_RATIO:
        raise UnsupportedRegimeError("weighted-sum statistic requires alpha <= golden ratio")
    v = np.asarray(v_values) if v_values is not None else sampling.sample_v(stream, params, size=n)
    k = np.arange(1, n + 1, dtype=float)
    s = float(np.sum(k ** (1.0 - a) * (v - params.gamma_const)))
    if params.boundary == "golden":
        return s / math.log(n) ** (1.0 / a) if n > 1 else s
    return n ** (a - 1.0 - 1.0 / a) * s


def weighted_v_partial_sums(
    beta: float, n: int, stream: RandomStream, params: AlphaParams, v_values=None
) -> np.ndarray:
    """Trajectory of partial sums sum_{k<=j} k^(-beta) (V_k - gamma), j=1..n.

    For beta > 1/a the trajectory converges a.s.; below, it grows no faster
    than n^(1/a - beta + eps).  Used for convergence diagnostics.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    v = np.asarray(v_values) if v_values is not None else sampling.sample_v(stream, params, size=n)
    k = np.arange(1, n + 1, dtype=float)
    return np.cumsum(k ** (-beta) * (v - params.gamma_const))
