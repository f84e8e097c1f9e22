"""Exact Beta(2-a, a) coalescent rate structure.

Merger rates, the total rate, the downward-jump law of the block-counting
chain, the m-independent heavy-tailed V law, and the quantities entering the
U <= V coupling.  Everything is computed through log-Gamma differences, never
through factorial products, so block counts up to 10^7 stay in range.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np
from scipy.special import gammaln

from .numerics import AlphaParams, log_gamma


@dataclass(frozen=True)
class DiscreteLaw:
    """An integer-valued law given by callable pmf / upper tail.

    ``pmf(k)`` and ``tail(k)`` (tail meaning P(X >= k)) accept scalars or
    integer arrays and vectorize.  ``support_end`` is None for laws on all of
    {support_start, support_start+1, ...}.
    """

    support_start: int
    pmf: Callable
    tail: Callable
    mean: float
    support_end: int | None = None


@dataclass(frozen=True)
class CouplingWeights:
    """Per-k ingredients of the U <= V coupling at block count m.

    ``d_mk`` is the decreasing weight sequence with
    P(U = k) = d_mk * Gamma(k+1-a)/Gamma(k+2); ``d_m`` its normalizer;
    ``accept_prob[k-1]`` = 1 ^ P(U=k)/P(V=k) is the probability that a
    proposed V = k is kept as the jump.
    """

    m: int
    d_mk: np.ndarray
    d_m: float
    accept_prob: np.ndarray


def _check_m(m: int) -> None:
    if m < 2:
        raise ValueError(f"block count m must be >= 2, got {m}")


def merge_rate(m: int, k: int, params: AlphaParams) -> float:
    """Rate at which k of m blocks merge into one (jump from m to m-k+1).

    Equals C(m, k) B(k-a, m-k+a) / (Gamma(2-a) Gamma(a)), evaluated in log
    space.
    """
    _check_m(m)
    if not 2 <= k <= m:
        raise ValueError(f"merger size k must lie in [2, m], got k={k}, m={m}")
    a = params.alpha
    log_binom = log_gamma(m + 1.0) - log_gamma(k + 1.0) - log_gamma(m - k + 1.0)
    log_beta = log_gamma(k - a) + log_gamma(m - k + a) - log_gamma(m)
    return math.exp(log_binom + log_beta - log_gamma(2.0 - a) - log_gamma(a))


def log_total_rate(m, params: AlphaParams):
    """log of the total merging rate at block count m (vectorized).

    The sum of the per-merger rates telescopes to the closed form
    rho_m = Gamma(m + a - 1) / (a Gamma(a) Gamma(m - 1)); the identity is
    verified against direct summation in the test suite.
    """
    a = params.alpha
    m = np.asarray(m, dtype=float)
    return (
        gammaln(m + a - 1.0)
        - gammaln(m - 1.0)
        - math.log(a)
        - log_gamma(a)
    )


def total_rate(m: int, params: AlphaParams) -> float:
    """Total merging rate rho_m at block count m."""
    _check_m(m)
    return float(np.exp(log_total_rate(m, params)))


def total_rate_by_sum(m: int, params: AlphaParams) -> float:
    """rho_m by direct summation of merger rates (O(m) reference route)."""
    _check_m(m)
    return float(sum(merge_rate(m, k, params) for k in range(2, m + 1)))


def log_jump_pmf(m, k, params: AlphaParams):
    """log P(jump = k | current block count m), vectorized over both args.

    Returns -inf outside the support 1 <= k <= m-1 (requires m >= 2).
    """
    a = params.alpha
    m = np.asarray(m, dtype=float)
    k = np.asarray(k, dtype=float)
    valid = (k >= 1.0) & (k <= m - 1.0) & (m >= 2.0)
    ms = np.where(valid, m, 4.0)
    ks = np.where(valid, k, 1.0)
    # rho_{m, m-k} / rho_m with the closed-form total rate
    log_rate = (
        gammaln(ms + 1.0)
        - gammaln(ks + 2.0)
        - gammaln(ms - ks)
        + gammaln(ks + 1.0 - a)
        + gammaln(ms - ks - 1.0 + a)
        - gammaln(ms)
        - log_gamma(2.0 - a)
        - log_gamma(a)
    )
    out = log_rate - log_total_rate(ms, params)
    return np.where(valid, out, -np.inf)


def log_v_pmf(k, params: AlphaParams):
    """log P(V = k) = log[ a/Gamma(2-a) * Gamma(k+1-a)/Gamma(k+2) ]."""
    a = params.alpha
    k = np.asarray(k, dtype=float)
    return math.log(params.v_norm) + gammaln(k + 1.0 - a) - gammaln(k + 2.0)


def log_v_tail(k, params: AlphaParams):
    """log P(V >= k) = log[ Gamma(k+1-a) / (Gamma(2-a) Gamma(k+1)) ]."""
    a = params.alpha
    k = np.asarray(k, dtype=float)
    return gammaln(k + 1.0 - a) - gammaln(k + 1.0) - log_gamma(2.0 - a)


def v_law(params: AlphaParams) -> DiscreteLaw:
    """The m-independent jump-dominating law V on {1, 2, ...}.

    pmf, closed-form tail, and mean 1/(a-1); the tail obeys the recursion
    P(V >= k+1) = P(V >= k) (k+1-a)/(k+1).
    """
    return DiscreteLaw(
        support_start=1,
        pmf=lambda k: np.exp(log_v_pmf(k, params)),
        tail=lambda k: np.exp(log_v_tail(k, params)),
        mean=params.gamma_const,
    )


def jump_pmf_vector(m: int, params: AlphaParams) -> np.ndarray:
    """Full pmf of the downward jump at block count m, indices k = 1..m-1."""
    _check_m(m)
    k = np.arange(1, m)
    return np.exp(log_jump_pmf(float(m), k, params))


def jump_law(m: int, params: AlphaParams) -> DiscreteLaw:
    """Law of the downward jump U = X_0 - X_1 given X_0 = m.

    P(U = k) = rho_{m, m-k} / rho_m on {1, ..., m-1}.  The pmf evaluates in
    O(1) per point; the tail sums the pmf (O(m)) and is meant for checks, not
    for hot loops.
    """
    _check_m(m)

    def pmf(k):
        return np.exp(log_jump_pmf(float(m), k, params))

    def tail(k):
        karr = np.asarray(k)
        full = jump_pmf_vector(m, params)
        # suffix sums: tail_vec[j] = P(U >= j+1)
        tail_vec = np.concatenate([np.cumsum(full[::-1])[::-1], [0.0]])
        idx = np.clip(karr, 1, m) - 1
        out = np.where(karr < 1, 1.0, tail_vec[idx])
        return out if np.ndim(k) else float(out)

    mean = float(np.dot(np.arange(1, m), jump_pmf_vector(m, params)))
    return DiscreteLaw(support_start=1, pmf=pmf, tail=tail, mean=mean, support_end=m - 1)


def log_weight_ratio(m, k, params: AlphaParams):
    """log(d_mk / d_m) = log prod_{j=1}^{k} (m-j)/(m+a-1-j), vectorized."""
    a = params.alpha
    m = np.asarray(m, dtype=float)
    k = np.asarray(k, dtype=float)
    return (
        gammaln(m)
        - gammaln(m - k)
        + gammaln(m + a - 1.0 - k)
        - gammaln(m + a - 1.0)
    )


def norm_ratio(m: int, params: AlphaParams) -> float:
    """d_m / d, the coupling normalizer relative to d = a/Gamma(2-a).

    Rebased from P(U=1) = d_m1 Gamma(2-a)/Gamma(3); lies in
    [1, 1/(1 - 1/((a-1) m))^+].
    """
    _check_m(m)
    log_p1 = float(log_jump_pmf(float(m), 1.0, params))
    log_pv1 = float(log_v_pmf(1.0, params))
    return math.exp(log_p1 - log_pv1 - float(log_weight_ratio(float(m), 1.0, params)))


def log_accept_prob(m, k, params: AlphaParams):
    """log of 1 ^ P(U=k)/P(V=k), vectorized (log of the V-proposal accept).

    The pmf ratio collapses to
    log m + lnG(m-1) - lnG(m-k) + lnG(m-k-1+a) - lnG(m+a-1):
    every alpha-only constant cancels (equality with the pmf quotient is
    covered by the tests).  -inf outside the support.
    """
    a = params.alpha
    m = np.asarray(m, dtype=float)
    k = np.asarray(k, dtype=float)
    valid = (k >= 1.0) & (k <= m - 1.0) & (m >= 2.0)
    ms = np.where(valid, m, 4.0)
    ks = np.where(valid, k, 1.0)
    ratio = (
        np.log(ms)
        + gammaln(ms - 1.0)
        - gammaln(ms - ks)
        + gammaln(ms - ks - 1.0 + a)
        - gammaln(ms + a - 1.0)
    )
    return np.where(valid, np.minimum(ratio, 0.0), -np.inf)


def coupling_weights(m: int, params: AlphaParams) -> CouplingWeights:
    """All coupling quantities at block count m, materialized for k = 1..m-1."""
    _check_m(m)
    k = np.arange(1, m, dtype=float)
    d = params.v_norm
    d_m = d * norm_ratio(m, params)
    d_mk = d_m * np.exp(log_weight_ratio(float(m), k, params))
    accept = np.exp(log_accept_prob(float(m), k, params))
    return CouplingWeights(m=m, d_mk=d_mk, d_m=d_m, accept_prob=accept)


def dominance_check(m: int, params: AlphaParams, rtol: float = 1e-11) -> bool:
    """True iff P(U >= k | X_0 = m) <= P(V >= k) for every k, from exact CDFs.

    ``rtol`` absorbs floating-point noise at points of near-equality.
    """
    _check_m(m)
    pmf = jump_pmf_vector(m, params)
    u_tail = np.cumsum(pmf[::-1])[::-1]  # P(U >= k), k = 1..m-1
    vt = np.exp(log_v_tail(np.arange(1, m), params))
    return bool(np.all(u_tail <= vt * (1.0 + rtol) + 1e-300))


def mismatch_mass(m: int, params: AlphaParams) -> float:
    """Exact P(U != V) of the coupling: sum_k (P(V=k) - P(U=k))^+.

    Computed termwise on 1..m-1 plus the closed-form V tail at m (where the
    jump pmf vanishes identically), so no truncation error enters.
    """
    _check_m(m)
    k = np.arange(1, m)
    pv = np.exp(log_v_pmf(k, params))
    pu = jump_pmf_vector(m, params)
    head = float(np.sum(np.clip(pv - pu, 0.0, None)))
    return head + float(np.exp(log_v_tail(float(m), params)))


@lru_cache(maxsize=4096)
def residual_table(m: int, params: AlphaParams):
    """CDF of the rejection-branch jump law at block count m, or None.

    On a rejected V proposal the jump is drawn from the residual law
    proportional to (P(U=j) - P(V=j))^+, supported on j below the crossing
    index of the two pmfs.  Since d_mk/d is decreasing in k, the support is a
    prefix and is O(1) in m; scan until the sign flips.  Returns
    (values, cdf) or None when the residual mass is numerically zero (then
    callers fall back to direct inversion of the jump law).
    """
    _check_m(m)
    vals = []
    weights = []
    k = 1
    while k <= m - 1:
        diff = float(
            np.exp(log_jump_pmf(float(m), float(k), params))
            - np.exp(log_v_pmf(float(k), params))
        )
        if diff <= 0.0:
            break
        vals.append(k)
        weights.append(diff)
        k += 1
    mass = float(sum(weights))
    if mass <= 1e-15:
        return None
    cdf = np.cumsum(np.asarray(weights)) / mass
    cdf[-1] = 1.0
    return np.asarray(vals), cdf
