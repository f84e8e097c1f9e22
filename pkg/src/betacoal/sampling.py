"""Seeded random generation for the coalescent toolkit.

All draws go through a :class:`RandomStream`, a thin wrapper around numpy's
PCG64 generator seeded by a (seed, stream_id) pair.  Identical pairs give
bit-identical sequences on every platform; distinct stream ids give
independent streams (SeedSequence spawn keys), which is the contract Monte
Carlo drivers rely on for replicate-level parallelism.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .numerics import AlphaParams
from . import rates

# V-law CDF table is precomputed to the quantile where the closed-form tail
# drops below this mass; beyond the table, draws invert the exact tail by
# bisection, so sampling stays exact while the table stays bounded.
_V_TABLE_TAIL = 1e-6
_V_TABLE_MAX = 500_000


@dataclass
class RandomStream:
    """Single-owner source of randomness for one replicate.

    Not safe for concurrent sharing; create one stream per replicate instead.
    """

    seed: int
    stream_id: int = 0
    rng: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        ss = np.random.SeedSequence(entropy=int(self.seed), spawn_key=(int(self.stream_id),))
        self.rng = np.random.Generator(np.random.PCG64(ss))


@lru_cache(maxsize=64)
def _v_cdf_table(params: AlphaParams) -> np.ndarray:
    """cdf[i] = P(V <= i+1), built from the exact tail recursion."""
    a = params.alpha
    tails = [1.0]  # P(V >= 1)
    k = 1
    t = 1.0
    while True:
        t = t * (k + 1.0 - a) / (k + 1.0)  # P(V >= k+1)
        if t < _V_TABLE_TAIL or k >= _V_TABLE_MAX:
            break
        tails.append(t)
        k += 1
    tail_arr = np.asarray(tails)
    t_next = np.empty_like(tail_arr)
    t_next[:-1] = tail_arr[1:]
    t_next[-1] = t
    return 1.0 - t_next  # P(V <= k) for k = 1..K


def _v_quantile_beyond(u: float, k_lo: int, params: AlphaParams) -> int:
    """Smallest k > k_lo with P(V <= k) >= u, via the closed-form log tail."""
    target = math.log1p(-u)  # want log P(V >= k+1) <= target
    hi = max(2 * k_lo, 4)
    while float(rates.log_v_tail(hi + 1.0, params)) > target:
        hi *= 2
    lo = k_lo
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if float(rates.log_v_tail(mid + 1.0, params)) <= target:
            hi = mid
        else:
            lo = mid
    return hi


def sample_v(stream: RandomStream, params: AlphaParams, size=None):
    """Exact draw(s) from the V law by inversion.

    Returns an int for ``size=None``, else an int64 array of that shape.
    """
    cdf = _v_cdf_table(params)
    scalar = size is None
    u = stream.rng.random(1 if scalar else size)
    idx = np.searchsorted(cdf, u, side="left")
    out = (idx + 1).astype(np.int64)
    beyond = idx >= len(cdf)
    if np.any(beyond):
        flat = out.reshape(-1)
        uflat = np.asarray(u).reshape(-1)
        for i in np.nonzero(beyond.reshape(-1))[0]:
            flat[i] = _v_quantile_beyond(float(uflat[i]), len(cdf), params)
    return int(out[0]) if scalar else out


@lru_cache(maxsize=256)
def _jump_cdf_table(m: int, params: AlphaParams) -> np.ndarray:
    """Full CDF of the jump law at block count m (direct-inversion route)."""
    if m > 5_000_000:
        raise ValueError("jump CDF table too large; use the coupled sampler")
    cdf = np.cumsum(rates.jump_pmf_vector(m, params))
    cdf[-1] = 1.0
    return cdf


def sample_jump_inversion(m: int, stream: RandomStream, params: AlphaParams, size=None):
    """Draw from the jump law by plain CDF inversion (O(m) table, built once)."""
    if m < 2:
        raise ValueError("m must be >= 2")
    cdf = _jump_cdf_table(m, params)
    scalar = size is None
    u = stream.rng.random(1 if scalar else size)
    out = np.searchsorted(cdf, u, side="left").astype(np.int64) + 1
    return int(out[0]) if scalar else out


def _residual_draw(m: int, u: float, params: AlphaParams) -> int:
    tab = rates.residual_table(m, params)
    if tab is None:
        # degenerate residual mass: fall back to direct inversion
        cdf = _jump_cdf_table(m, params)
        return int(np.searchsorted(cdf, u, side="left")) + 1
    vals, cdf = tab
    return int(vals[np.searchsorted(cdf, u, side="left")])


# -- scalar accept helper (math.lgamma; hot loops avoid numpy overhead) ------

def _accept_prob_scalar(m: int, k: int, a: float) -> float:
    """1 ^ P(U=k)/P(V=k) at block count m (see rates.log_accept_prob)."""
    if not (2 <= m and 1 <= k <= m - 1):
        return 0.0
    ratio = (
        math.log(m)
        + math.lgamma(m - 1.0)
        - math.lgamma(m - k)
        + math.lgamma(m - k - 1.0 + a)
        - math.lgamma(m + a - 1.0)
    )
    return math.exp(min(ratio, 0.0))


def sample_uv_pair(m: int, stream: RandomStream, params: AlphaParams):
    """One coupled draw (U, V): U has the jump law at m, V the V law, U <= V.

    V is proposed, kept as U with probability 1 ^ P(U=V)/P(V=V); on rejection
    U comes from the residual law on the prefix where the jump pmf exceeds
    the V pmf, which keeps U <= V almost surely.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    v = sample_v(stream, params)
    if stream.rng.random() < _accept_prob_scalar(m, v, params.alpha):
        return v, v
    return _residual_draw(m, stream.rng.random(), params), v


def sample_jump(m: int, stream: RandomStream, params: AlphaParams) -> int:
    """Exact draw from the jump law at m via the coupling (amortized O(1))."""
    u, _ = sample_uv_pair(m, stream, params)
    return u


def sample_uv_pairs(m: int, size: int, stream: RandomStream, params: AlphaParams):
    """Vectorized coupled draws at fixed m: returns (u_array, v_array)."""
    if m < 2:
        raise ValueError("m must be >= 2")
    v = sample_v(stream, params, size=size)
    acc = np.exp(rates.log_accept_prob(float(m), v, params))
    u01 = stream.rng.random(size)
    rej = u01 >= acc
    u = v.copy()
    n_rej = int(np.count_nonzero(rej))
    if n_rej:
        ru = stream.rng.random(n_rej)
        tab = rates.residual_table(m, params)
        if tab is None:
            cdf = _jump_cdf_table(m, params)
            draws = np.searchsorted(cdf, ru, side="left") + 1
        else:
            vals, cdf = tab
            draws = vals[np.searchsorted(cdf, ru, side="left")]
        u[rej] = draws
    return u, v


def sample_jump_many(m: int, size: int, stream: RandomStream, params: AlphaParams):
    """Vectorized jump draws at fixed m via the coupled sampler."""
    u, _ = sample_uv_pairs(m, size, stream, params)
    return u


def sample_exponential(rate, stream: RandomStream, size=None):
    """Exponential draw(s) with the given rate(s), by inversion.

    ``rate`` may be a positive scalar or array; with ``size=None`` and array
    rate, one draw per rate entry is returned (shared-uniform scaling, so
    doubling the rate exactly halves the draws).
    """
    r = np.asarray(rate, dtype=float)
    if np.any(r <= 0.0) or not np.all(np.isfinite(r)):
        raise ValueError("rate must be positive and finite")
    shape = size if size is not None else r.shape
    u = stream.rng.random(shape)
    out = -np.log1p(-u) / r
    if np.ndim(out) == 0:
        return float(out)
    return out


def sample_poisson(mean, stream: RandomStream, size=None):
    """Exact Poisson draw(s); no normal approximation at any mean."""
    m = np.asarray(mean, dtype=float)
    if np.any(m < 0.0) or not np.all(np.isfinite(m)):
        raise ValueError("Poisson mean must be finite and >= 0")
    out = stream.rng.poisson(m, size=size)
    if np.ndim(out) == 0 and size is None and np.ndim(mean) == 0:
        return int(out)
    return out


def sample_stable(stream: RandomStream, params: AlphaParams, size=None):
    """Draw(s) of the maximally skewed index-a stable reference law.

    Chambers-Mallows-Stuck transform with skewness -1, location 0 and the
    scale fixed in :mod:`betacoal.numerics`, so that the mean is 0, the left
    tail satisfies P(x < -t) t^a -> 1 and the right tail is o(t^-a).
    """
    a = params.alpha
    scalar = size is None
    n = 1 if scalar else size
    u = (stream.rng.random(n) - 0.5) * math.pi
    w = -np.log1p(-stream.rng.random(n))
    tan_half = math.tan(math.pi * a / 2.0)
    b = math.atan(-tan_half) / a  # skewness -1
    s = (1.0 + tan_half * tan_half) ** (1.0 / (2.0 * a))
    x = (
        s
        * np.sin(a * (u + b))
        / np.cos(u) ** (1.0 / a)
        * (np.cos(u - a * (u + b)) / w) ** ((1.0 - a) / a)
    )
    out = params.sigma_alpha ** (1.0 / a) * x
    return float(out[0]) if scalar else out
