"""Block-counting chain simulation and tree functionals.

The chain is simulated through the U <= V coupling used as an exact sampler:
V proposals are drawn in bulk, the state path they imply is accepted
vectorized, and the (rare, probability <= 1/((a-1)m)) rejections are patched
scalar.  A descent from n therefore costs O(tau_n) vectorized work with only
O(log n) scalar fixups, and states are stored sparsely (visited values only).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .numerics import AlphaParams
from . import rates, sampling
from .sampling import RandomStream


@dataclass(frozen=True)
class BlockCountingPath:
    """One run of the block-counting chain: states X_i and jump times T_i."""

    n: int
    states: np.ndarray  # int64, strictly decreasing, states[0] = n, states[-1] = 1
    times: np.ndarray  # float, strictly increasing, times[0] = 0

    @property
    def tau(self) -> int:
        """Number of merging events."""
        return len(self.states) - 1


@dataclass(frozen=True)
class IntegerPointProcess:
    """0/1-multiplicity atoms on {2, 3, ...}, valid on the window [a, b]."""

    atoms: np.ndarray  # sorted ascending int64
    window: tuple[int, int]


def _descend_states(n: int, stop: int, stream: RandomStream, params: AlphaParams) -> np.ndarray:
    """States visited from n (inclusive) until the first state <= max(stop, 1).

    The terminal state is included.  ``stop=1`` runs to absorption.
    """
    limit = max(stop, 1)
    chunks = [np.asarray([n], dtype=np.int64)]
    m = n
    while m > limit:
        batch = int(1.3 * (m - limit) * (params.alpha - 1.0)) + 16
        batch = min(batch, 2_000_000)
        v = sampling.sample_v(stream, params, size=batch)
        x = m - np.cumsum(v)
        prev = np.empty(batch, dtype=np.int64)
        prev[0] = m
        prev[1:] = x[:-1]
        acc = np.exp(rates.log_accept_prob(prev, v, params))
        u01 = stream.rng.random(batch)
        rej = np.nonzero(u01 >= acc)[0]
        hit = np.nonzero(x <= limit)[0]
        j_rej = rej[0] if len(rej) else batch
        j_hit = hit[0] if len(hit) else batch
        if j_hit < j_rej:
            chunks.append(x[: j_hit + 1])
            m = int(x[j_hit])
        elif j_rej < batch:
            if j_rej > 0:
                chunks.append(x[:j_rej])
            m_cur = int(prev[j_rej])
            jump = sampling._residual_draw(m_cur, float(stream.rng.random()), params)
            m = m_cur - jump
            chunks.append(np.asarray([m], dtype=np.int64))
        else:
            chunks.append(x)
            m = int(x[-1])
    return np.concatenate(chunks)


def simulate_path(n: int, stream: RandomStream, params: AlphaParams) -> BlockCountingPath:
    """Simulate one n-coalescent block-counting path down to a single block.

    Holding times are exponential with the total merging rate of the current
    state; ``n=1`` gives the empty path (tau = 0).
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if n == 1:
        return BlockCountingPath(n=1, states=np.asarray([1], dtype=np.int64), times=np.asarray([0.0]))
    states = _descend_states(n, 1, stream, params)
    rho = np.exp(rates.log_total_rate(states[:-1].astype(float), params))
    holds = sampling.sample_exponential(rho, stream)
    times = np.concatenate([[0.0], np.cumsum(np.atleast_1d(holds))])
    return BlockCountingPath(n=n, states=states, times=times)


def tree_length(path: BlockCountingPath) -> float:
    """Total branch length sum_i X_i (T_{i+1} - T_i)."""
    if path.tau == 0:
        return 0.0
    return float(np.dot(path.states[:-1].astype(float), np.diff(path.times)))


def segregating_sites(length: float, theta: float, stream: RandomStream) -> int:
    """Poisson mutation count with mean theta * length."""
    if theta <= 0.0:
        raise ValueError("theta must be > 0")
    if length < 0.0:
        raise ValueError("length must be >= 0")
    return sampling.sample_poisson(theta * length, stream)


def watterson_theta(s_n: int, n: int, params: AlphaParams) -> float:
    """Mutation-rate estimate s_n / (c1 n^(2-a)) from the LLN-scale centering."""
    if n < 2:
        raise ValueError("n must be >= 2")
    return s_n / (params.c1 * n ** (2.0 - params.alpha))


def cpp_of_path(path: BlockCountingPath) -> IntegerPointProcess:
    """Point process of visited block counts {X_0, ..., X_{tau-1}} on [2, n]."""
    atoms = path.states[:-1] if path.n >= 2 else path.states[:0]
    return IntegerPointProcess(atoms=np.sort(atoms), window=(2, max(path.n, 2)))


def cpp_infinity_window(
    a: int, b: int, start_n: int, stream: RandomStream, params: AlphaParams
) -> IntegerPointProcess:
    """Windowed approximation of the coalescent point process from infinity.

    Simulates a chain from ``start_n`` down past ``a`` and keeps the visited
    states in [a, b].  The approximation error decays in start_n / b; doubling
    ``start_n`` and comparing window statistics is the convergence diagnostic
    used by the verification suite.
    """
    if not 2 <= a <= b:
        raise ValueError("need 2 <= a <= b")
    if start_n <= b:
        raise ValueError("start_n must exceed b")
    states = _descend_states(start_n, a - 1, stream, params)
    keep = states[(states >= a) & (states <= b)]
    return IntegerPointProcess(atoms=np.sort(keep), window=(a, b))


def length_functional(
    pp: IntegerPointProcess, stream: RandomStream, params: AlphaParams
) -> float:
    """Reordered length sum_{x in atoms} x E_x / rho_x with fresh unit exponentials.

    Exponentials are indexed by the atom value, matching the reversed-order
    representation of the tree length; distributionally equal to
    ``tree_length`` when applied to the same path's point process.
    """
    if len(pp.atoms) == 0:
        return 0.0
    x = pp.atoms.astype(float)
    rho = np.exp(rates.log_total_rate(x, params))
    e = sampling.sample_exponential(np.ones_like(x), stream)
    return float(np.sum(x * np.atleast_1d(e) / rho))


def dump_path_csv(path: BlockCountingPath, stream: RandomStream, params: AlphaParams, fh) -> None:
    """Write a path as CSV rows ``i,X_i,T_i`` with a seed-recording header."""
    fh.write(
        f"# seed={stream.seed} stream={stream.stream_id} "
        f"alpha={params.alpha!r} n={path.n}\n"
    )
    for i, (x, t) in enumerate(zip(path.states, path.times)):
        fh.write(f"{i},{int(x)},{float(t)!r}\n")
