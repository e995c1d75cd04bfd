"""Continuous-time Monte Carlo for the two-walker exclusion process.

simulate_pair is a plain event-driven (Gillespie) trajectory built on the
model generator.  ensemble_moments runs large replica ensembles through a
uniformized, lock-step vectorized kernel: every replica carries a Poisson
clock at the uniform rate 4F and blocked inward hops become self-loops,
which reproduces the generator exactly (adjacent pairs lose probability at
4F(1-p)) while letting numpy advance whole batches at once.

Reproducibility: replicas are partitioned into fixed-size batches; batch b
draws from Philox keyed by (seed, b), and accumulators are exact int64
sums, so results are bit-identical for a given seed regardless of worker
count or merge order.
"""
from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .model_core import PairParams, PairState, transition_rates

_BATCH = 8192  # fixed; part of the reproducibility contract


@dataclass(frozen=True)
class EnsembleSpec:
    """Replica count, sample-time grid and master seed for one ensemble."""
    n_replicas: int
    t_grid: tuple[float, ...]
    seed: int

    def __post_init__(self):
        if self.n_replicas < 1:
            raise ValueError("n_replicas must be >= 1")
        grid = tuple(self.t_grid)
        if any(b <= a for a, b in zip(grid, grid[1:])):
            raise ValueError("t_grid must be strictly increasing")
        if grid and grid[0] < 0:
            raise ValueError("t_grid times must be >= 0")
        object.__setattr__(self, "t_grid", grid)


@dataclass
class MomentSeries:
    """Ensemble moments of the pair process on a time grid (lengths in a)."""
    tau: np.ndarray
    d: np.ndarray
    x2: np.ndarray
    msd: np.ndarray
    se_d: np.ndarray
    se_x2: np.ndarray
    se_msd: np.ndarray
    n_replicas: int
    seed: int


def simulate_pair(params: PairParams, t_grid, rng: np.random.Generator) -> np.ndarray:
    """One exact event-driven trajectory, sampled at t_grid.

    Returns an array of shape (len(t_grid), 2) holding (n, m) site pairs.
    """
    grid = np.asarray(t_grid, dtype=float)
    out = np.empty((grid.size, 2), dtype=np.int64)
    state = PairState(params.N1, params.N2)
    t = 0.0
    k = 0
    while k < grid.size:
        moves = transition_rates(state, params)
        total = sum(r for _, r in moves)
        dt = rng.exponential(1.0 / total)
        t_next = t + dt
        while k < grid.size and grid[k] <= t_next:
            out[k] = (state.n, state.m)
            k += 1
        u = rng.random() * total
        acc = 0.0
        for nxt, r in moves:
            acc += r
            if u <= acc:
                state = nxt
                break
        t = t_next
    return out


def _batch_accumulate(p, F, N1, N2, grid, seed, batch_index, n):
    """Uniformized kernel for one batch; returns int64 power sums per grid time.

    Rows: sum x1, x1^2, x1^3, x1^4, sep, sep^2 with x1 = n - N1 (lattice
    units) and sep = m - n.
    """
    rng = np.random.Generator(np.random.Philox(key=(seed, batch_index)))
    G = grid.size
    t = np.zeros(n)
    npos = np.full(n, N1, dtype=np.int64)
    mpos = np.full(n, N2, dtype=np.int64)
    ptr = np.zeros(n, dtype=np.int64)
    lam = 4.0 * F
    S = np.zeros((6, G), dtype=np.int64)

    def record(t_new):
        while True:
            active = ptr < G
            if not active.any():
                return
            gi = np.minimum(ptr, G - 1)
            mask = active & (grid[gi] <= t_new)
            if not mask.any():
                return
            idx = ptr[mask]
            x1 = npos[mask] - N1
            sep = mpos[mask] - npos[mask]
            S[0] += np.bincount(idx, weights=x1, minlength=G).astype(np.int64)
            S[1] += np.bincount(idx, weights=x1 * x1, minlength=G).astype(np.int64)
            S[2] += np.bincount(idx, weights=x1 * x1 * x1, minlength=G).astype(np.int64)
            S[3] += np.bincount(idx, weights=x1 * x1 * x1 * x1, minlength=G).astype(np.int64)
            S[4] += np.bincount(idx, weights=sep, minlength=G).astype(np.int64)
            S[5] += np.bincount(idx, weights=sep * sep, minlength=G).astype(np.int64)
            ptr[mask] += 1

    record(t)  # grid entries at tau = 0 see the initial state
    while (ptr < G).any():
        t_new = t + rng.exponential(1.0 / lam, size=n)
        record(t_new)
        t = t_new
        u = rng.random(n)
        blocked = (mpos - npos) == 1
        half_p = p / 2.0
        left_in = (u < half_p) & ~blocked
        right_in = (u >= half_p) & (u < p) & ~blocked
        left_out = (u >= p) & (u < p + (1.0 - p) / 2.0)
        right_out = u >= p + (1.0 - p) / 2.0
        npos += left_in
        npos -= left_out
        mpos -= right_in
        mpos += right_out
    return S


def ensemble_states(params: PairParams, t: float, n_replicas: int, seed: int
                    ) -> tuple[np.ndarray, np.ndarray]:
    """(n, m) site arrays for n_replicas independent pairs at time t."""
    rng_batches = range(math.ceil(n_replicas / _BATCH))
    ns, ms = [], []
    for b in rng_batches:
        n = min(_BATCH, n_replicas - b * _BATCH)
        rng = np.random.Generator(np.random.Philox(key=(seed, b)))
        tcur = np.zeros(n)
        npos = np.full(n, params.N1, dtype=np.int64)
        mpos = np.full(n, params.N2, dtype=np.int64)
        lam = 4.0 * params.F
        done = np.zeros(n, dtype=bool)
        while not done.all():
            t_new = tcur + rng.exponential(1.0 / lam, size=n)
            u = rng.random(n)
            # replicas whose clock passes t freeze at their pre-move state
            freeze = ~done & (t_new > t)
            move = ~done & ~freeze
            blocked = (mpos - npos) == 1
            half_p = params.p / 2.0
            npos += (u < half_p) & ~blocked & move
            npos -= (u >= params.p) & (u < params.p + (1 - params.p) / 2) & move
            mpos -= (u >= half_p) & (u < params.p) & ~blocked & move
            mpos += (u >= params.p + (1 - params.p) / 2) & move
            tcur = np.where(move, t_new, tcur)
            done |= freeze
        ns.append(npos)
        ms.append(mpos)
    return np.concatenate(ns)[:n_replicas], np.concatenate(ms)[:n_replicas]


def _moments_from_sums(S, n, a, grid, seed):
    n = float(n)
    m1 = S[0] / n
    m2 = S[1] / n
    m3 = S[2] / n
    m4 = S[3] / n
    d1 = S[4] / n
    d2 = S[5] / n
    var_x = (S[1] - S[0] * S[0] / n) / (n - 1.0) if n > 1 else np.zeros_like(m1)
    var_d = (S[5] - S[4] * S[4] / n) / (n - 1.0) if n > 1 else np.zeros_like(d1)
    var_x2 = (m4 - m2 * m2) * n / (n - 1.0) if n > 1 else np.zeros_like(m1)
    # central moments for the SE of the sample variance
    mu2 = m2 - m1 * m1
    mu4 = m4 - 4.0 * m1 * m3 + 6.0 * m1 * m1 * m2 - 3.0 * m1 ** 4
    if n > 1:
        var_of_var = (mu4 - (n - 3.0) / (n - 1.0) * mu2 * mu2) / n
        var_of_var = np.maximum(var_of_var, 0.0)
    else:
        var_of_var = np.zeros_like(mu2)
    return MomentSeries(
        tau=grid.copy(),
        d=a * d1,
        x2=a * a * m2,
        msd=a * a * var_x,
        se_d=a * np.sqrt(np.maximum(var_d, 0.0) / n),
        se_x2=a * a * np.sqrt(np.maximum(var_x2, 0.0) / n),
        se_msd=a * a * np.sqrt(var_of_var),
        n_replicas=int(n),
        seed=seed,
    )


def ensemble_moments(params: PairParams, spec: EnsembleSpec,
                     threads: int = 1) -> MomentSeries:
    """Unbiased ensemble means of d, <x1^2> and the MSD with standard errors.

    Deterministic for a fixed seed whatever the thread count: batches own
    independent counter-based substreams and the int64 accumulators merge
    exactly.
    """
    grid = np.asarray(spec.t_grid, dtype=float)
    n_batches = math.ceil(spec.n_replicas / _BATCH)
    sizes = [min(_BATCH, spec.n_replicas - b * _BATCH) for b in range(n_batches)]
    args = [(params.p, params.F, params.N1, params.N2, grid, spec.seed, b, sizes[b])
            for b in range(n_batches)]
    if threads > 1 and n_batches > 1:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(_batch_worker, args, chunksize=1))
    else:
        parts = [_batch_worker(arg) for arg in args]
    S = np.zeros((6, grid.size), dtype=np.int64)
    for part in parts:  # fixed batch order; int64 sums are exact anyway
        S += part
    return _moments_from_sums(S, spec.n_replicas, params.a, grid, spec.seed)


def _batch_worker(arg):
    return _batch_accumulate(*arg)
