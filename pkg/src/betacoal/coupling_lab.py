"""Renewal point process and block-coupling diagnostics.

The stationary renewal process with V-distributed gaps is the tractable stand-in
for the coalescent's visited-state process; the dyadic block coupling runs both
chains on a window (2^(r-1), 2^r] from coupled jump draws and measures how far
they drift apart.  These constructions back the empirical verification of the
mismatch and discrepancy tail bounds.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln

from .numerics import AlphaParams, log_gamma
from . import rates, sampling, coalescent
from .sampling import RandomStream


@dataclass(frozen=True)
class RenewalProcess:
    """Stationary renewal points 2 <= R_1 < R_2 < ... <= n."""

    points: np.ndarray  # int64, sorted
    window_end: int


@dataclass(frozen=True)
class BlockCouplingResult:
    """Outcome of one dyadic coupling block on (2^(r-1), 2^r]."""

    r: int
    mu_atoms: np.ndarray
    nu_atoms: np.ndarray
    end_states: tuple[int, int]
    max_discrepancy: int  # max_{i <= N ^ N'} |X_i - Y_i|
    n_steps: tuple[int, int]  # (N, N')


def log_delay_tail(r, params: AlphaParams):
    """log P(R_1 >= r) = log[ Gamma(r-a) / (Gamma(2-a) Gamma(r-1)) ], r >= 2.

    Closed form obtained by telescoping the stationary delay weights
    P(R_1 = j) = (a-1) P(V >= j-1); verified against direct summation in the
    tests.
    """
    a = params.alpha
    r = np.asarray(r, dtype=float)
    return gammaln(r - a) - gammaln(r - 1.0) - log_gamma(2.0 - a)


@lru_cache(maxsize=64)
def _delay_cdf_table(params: AlphaParams) -> np.ndarray:
    """cdf[i] = P(R_1 <= i+2), delay tail recursion t(r+1) = t(r)(r-a)/(r-1)."""
    a = params.alpha
    tails = [1.0]  # P(R_1 >= 2)
    t = 1.0
    r = 2
    while True:
        t = t * (r - a) / (r - 1.0)  # P(R_1 >= r+1)
        if t < 1e-6 or r >= 500_000:
            break
        tails.append(t)
        r += 1
    tail_arr = np.asarray(tails)
    t_next = np.empty_like(tail_arr)
    t_next[:-1] = tail_arr[1:]
    t_next[-1] = t
    return 1.0 - t_next


def sample_delay(stream: RandomStream, params: AlphaParams, size=None):
    """Draw(s) of the stationary delay R_1 on {2, 3, ...} by exact inversion."""
    cdf = _delay_cdf_table(params)
    scalar = size is None
    u = stream.rng.random(1 if scalar else size)
    idx = np.searchsorted(cdf, u, side="left")
    out = (idx + 2).astype(np.int64)
    beyond = idx >= len(cdf)
    if np.any(beyond):
        flat = out.reshape(-1)
        uflat = np.asarray(u).reshape(-1)
        for i in np.nonzero(beyond.reshape(-1))[0]:
            target = math.log1p(-float(uflat[i]))
            lo, hi = len(cdf) + 1, 2 * (len(cdf) + 1)
            while float(log_delay_tail(hi + 1.0, params)) > target:
                hi *= 2
            while hi - lo > 1:
                mid = (lo + hi) // 2
                if float(log_delay_tail(mid + 1.0, params)) <= target:
                    hi = mid
                else:
                    lo = mid
            flat[i] = hi
    return int(out[0]) if scalar else out


def stationary_renewal(n: int, stream: RandomStream, params: AlphaParams) -> RenewalProcess:
    """Stationary renewal process on [2, n]: delayed start, i.i.d. V gaps."""
    if n < 2:
        raise ValueError("n must be >= 2")
    first = sample_delay(stream, params)
    points = []
    cur = first
    while cur <= n:
        points.append(cur)
        remaining = n - cur
        batch = int(1.3 * (remaining + 1) * (params.alpha - 1.0)) + 8
        gaps = sampling.sample_v(stream, params, size=batch)
        pts = cur + np.cumsum(gaps)
        inside = pts[pts <= n]
        points.extend(int(p) for p in inside)
        if len(inside) < len(pts):
            break
        cur = int(pts[-1])
        # keep extending from the last in-window point with fresh gaps
        cur_gap = sampling.sample_v(stream, params)
        cur = cur + cur_gap
    return RenewalProcess(points=np.asarray(points, dtype=np.int64), window_end=n)


class _PairBuffer:
    """Buffered coupled-pair supply for scalar chain loops.

    Pre-draws V proposals and accept uniforms in blocks; accept probabilities
    use scalar lgamma arithmetic to keep the per-step cost flat.
    """

    def __init__(self, stream: RandomStream, params: AlphaParams, block: int = 8192):
        self.stream = stream
        self.params = params
        self.block = block
        self._v = np.empty(0, dtype=np.int64)
        self._u = np.empty(0)
        self._i = 0
        self._a = params.alpha

    def _refill(self):
        self._v = sampling.sample_v(self.stream, self.params, size=self.block)
        self._u = self.stream.rng.random(self.block)
        self._i = 0

    def v_draw(self) -> int:
        if self._i >= len(self._v):
            self._refill()
        v = int(self._v[self._i])
        self._i += 1
        return v

    def pair(self, m: int) -> tuple[int, int]:
        if self._i >= len(self._v):
            self._refill()
        v = int(self._v[self._i])
        u01 = self._u[self._i]
        self._i += 1
        if u01 < sampling._accept_prob_scalar(m, v, self._a):
            return v, v
        return sampling._residual_draw(m, float(self.stream.rng.random()), self.params), v


def dyadic_coupling_block(
    r: int, m_start: int, m_prime_start: int, stream: RandomStream, params: AlphaParams
) -> BlockCouplingResult:
    """Run the coupled pair of chains across the dyadic window (2^(r-1), 2^r].

    X follows the block-counting jumps, Y subtracts the matching V proposals;
    both are stopped on first passage to 2^(r-1) or below, the construction
    halting at the later of the two stopping indices.
    """
    if r < 1:
        raise ValueError("r must be >= 1")
    top = 2 ** r
    half = 2 ** (r - 1)
    if not (1 <= m_start <= top and 1 <= m_prime_start <= top):
        raise ValueError("start states must lie in [1, 2^r]")
    buf = _PairBuffer(stream, params)
    xs = [m_start]
    ys = [m_prime_start]
    while xs[-1] > half or ys[-1] > half:
        m = xs[-1]
        if m >= 2:
            u, v = buf.pair(m)
        else:
            u, v = 0, buf.v_draw()
        xs.append(xs[-1] - u)
        ys.append(ys[-1] - v)
    xa = np.asarray(xs, dtype=np.int64)
    ya = np.asarray(ys, dtype=np.int64)
    n_stop = int(np.argmax(xa <= half))  # first passage; index 0 if already below
    np_stop = int(np.argmax(ya <= half))
    d_r = int(np.max(np.abs(xa[: min(n_stop, np_stop) + 1] - ya[: min(n_stop, np_stop) + 1])))
    return BlockCouplingResult(
        r=r,
        mu_atoms=xa[:n_stop],
        nu_atoms=ya[:np_stop],
        end_states=(int(xa[n_stop]), max(int(ya[np_stop]), 1)),
        max_discrepancy=d_r,
        n_steps=(n_stop, np_stop),
    )


def window_max_laws(
    b: int, trials: int, stream: RandomStream, params: AlphaParams, start_factor: int = 100
):
    """Empirical laws of the largest point <= b of the two point processes.

    Returns (m_samples, m_prime_samples): per trial, the largest visited state
    <= b of a chain descending from start_factor * b, and the largest renewal
    point <= b (1 when the window holds no point).
    """
    if b < 2:
        raise ValueError("b must be >= 2")
    m_samples = np.empty(trials, dtype=np.int64)
    mp_samples = np.empty(trials, dtype=np.int64)
    for i in range(trials):
        states = coalescent._descend_states(start_factor * b, b, stream, params)
        last = int(states[-1])
        m_samples[i] = last if last >= 2 else 1
        ren = stationary_renewal(b, stream, params)
        mp_samples[i] = int(ren.points[-1]) if len(ren.points) else 1
    return m_samples, mp_samples


def mismatch_rate(m: int, trials: int, stream: RandomStream, params: AlphaParams):
    """Empirical P(U != V) of the coupling with a 3-sigma binomial halfwidth."""
    if trials < 1000:
        raise ValueError("need at least 10^3 trials")
    u, v = sampling.sample_uv_pairs(m, trials, stream, params)
    rate = float(np.mean(u != v))
    hw = 3.0 * math.sqrt(max(rate * (1.0 - rate), 1.0 / trials) / trials)
    return rate, hw


@dataclass(frozen=True)
class MismatchTail:
    """Empirical tail of V on mismatch events, with a power-law fit."""

    k_grid: np.ndarray
    tail: np.ndarray  # P(V >= k | U != V)
    fitted_exponent: float  # slope of log tail vs log k (expected near 1-a)
    fitted_scale: float
    n_mismatch: int
    sufficient: bool


def conditional_tail_given_mismatch(
    m: int, trials: int, stream: RandomStream, params: AlphaParams, k_grid=None
) -> MismatchTail:
    """Empirical P(V >= k | U != V) over a k-grid, with fitted tail exponent.

    Flags ``sufficient=False`` (and skips the fit) when fewer than 100
    mismatches occurred.
    """
    if m < 2:
        raise ValueError("m must be >= 2")
    if k_grid is None:
        k_grid = np.asarray([1, 2, 4, 8, 16, 32, 64, 128, 256])
    k_grid = np.asarray(k_grid)
    u, v = sampling.sample_uv_pairs(m, trials, stream, params)
    vm = v[u != v]
    n_mis = len(vm)
    if n_mis < 100:
        return MismatchTail(k_grid, np.full(len(k_grid), np.nan), math.nan, math.nan, n_mis, False)
    tail = np.asarray([(vm >= k).mean() for k in k_grid])
    fit_mask = (k_grid >= 4) & (tail > 0)
    lx = np.log(k_grid[fit_mask].astype(float))
    ly = np.log(tail[fit_mask])
    slope, intercept = np.polyfit(lx, ly, 1)
    return MismatchTail(
        k_grid=k_grid,
        tail=tail,
        fitted_exponent=float(slope),
        fitted_scale=float(math.exp(intercept)),
        n_mismatch=n_mis,
        sufficient=True,
    )


def exact_conditional_tail(m: int, k, params: AlphaParams):
    """Exact P(V >= k | U != V) from the positive-part construction (oracle)."""
    k = np.atleast_1d(np.asarray(k))
    kk = np.arange(1, m)
    pv = np.exp(rates.log_v_pmf(kk, params))
    pu = rates.jump_pmf_vector(m, params)
    pos = np.clip(pv - pu, 0.0, None)
    total = rates.mismatch_mass(m, params)
    head_tail = np.concatenate([np.cumsum(pos[::-1])[::-1], [0.0]])
    out = np.empty(len(k))
    for i, kv in enumerate(k):
        kv = int(kv)
        if kv <= 1:
            out[i] = 1.0
            continue
        beyond = float(np.exp(rates.log_v_tail(float(m), params)))
        head = head_tail[kv - 1] if kv <= m - 1 else 0.0
        if kv >= m:
            beyond = float(np.exp(rates.log_v_tail(float(kv), params)))
        out[i] = (head + beyond) / total
    return out
