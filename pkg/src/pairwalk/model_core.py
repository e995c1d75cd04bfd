"""Discrete two-walker exclusion model: rate generator and a brute-force
master-equation oracle on a truncated lattice window.

The model: two walkers at sites n < m on an infinite 1D lattice.  The left
walker hops right at rate 2Fp and left at rate 2F(1-p); the right walker
hops left at rate 2Fp and right at rate 2F(1-p).  Moves that would place
both walkers on one site are removed from the generator, so the total
outflow rate is 4F for separated walkers and 4F(1-p) for adjacent ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class PairParams:
    """Lattice model parameters.

    p: probability weight of the inward hop (toward the partner), 0 < p < 1.
    F: hop rate scale (1/time); a: lattice spacing; N1 < N2: start sites.
    """
    p: float
    F: float = 1.0
    a: float = 1.0
    N1: int = 0
    N2: int = 1

    def __post_init__(self):
        if not 0.0 < self.p < 1.0:
            raise ValueError(f"p must be in (0,1), got {self.p}")
        if self.F <= 0:
            raise ValueError(f"F must be > 0, got {self.F}")
        if self.a <= 0:
            raise ValueError(f"a must be > 0, got {self.a}")
        if self.N1 >= self.N2:
            raise ValueError(f"need N1 < N2, got {self.N1} >= {self.N2}")

    @property
    def delta_n(self) -> int:
        return self.N2 - self.N1


@dataclass(frozen=True)
class PairState:
    """Sites of the left (n) and right (m) walker; n < m always."""
    n: int
    m: int

    def __post_init__(self):
        if self.n >= self.m:
            raise ValueError(f"ordering violated: n={self.n} >= m={self.m}")


def transition_rates(state: PairState, params: PairParams) -> list[tuple[PairState, float]]:
    """Allowed moves and their rates out of `state`.

    Outward hops (left walker left, right walker right) carry rate 2F(1-p)
    each and are always allowed; inward hops carry rate 2Fp each and vanish
    for adjacent walkers (m - n = 1), where they would create co-occupancy.
    """
    n, m = state.n, state.m
    rin = 2.0 * params.F * params.p
    rout = 2.0 * params.F * (1.0 - params.p)
    moves = [
        (PairState(n - 1, m), rout),
        (PairState(n, m + 1), rout),
    ]
    if m - n > 1:
        moves.append((PairState(n + 1, m), rin))
        moves.append((PairState(n, m - 1), rin))
    return moves


class TruncationError(RuntimeError):
    """Probability leaked past the lattice window beyond tolerance."""

    def __init__(self, msg, suggested_L):
        super().__init__(msg)
        self.suggested_L = suggested_L


@dataclass
class JointDistribution:
    """Occupancy probabilities P_{n,m}(t) on a truncated window.

    probs[i, j] holds P at (n, m) = (sites[i], sites[j]); entries with
    n >= m are exactly zero.  mass_deficit tracks probability absorbed at
    the window edge.
    """
    L: int
    sites: np.ndarray
    probs: np.ndarray
    t: float

    @property
    def total_mass(self) -> float:
        return float(self.probs.sum())

    @property
    def mass_deficit(self) -> float:
        return 1.0 - self.total_mass

    def prob(self, n: int, m: int) -> float:
        lo = int(self.sites[0])
        hi = int(self.sites[-1])
        if not (lo <= n <= hi and lo <= m <= hi):
            return 0.0
        return float(self.probs[n - lo, m - lo])


def default_window(params: PairParams, t_max: float) -> int:
    """Half-width covering diffusive spread plus ballistic drift (p < 1/2)."""
    L = math.ceil(8.0 * math.sqrt(max(params.F * t_max, 1e-12))) + params.delta_n
    if params.p < 0.5:
        L += math.ceil(4.0 * (1.0 - 2.0 * params.p) * params.F * t_max)
    return L


def _generator_apply(P, valid, gap, rin, rout):
    """dP/dt for the masked dense window; boundary outflow leaks."""
    dP = np.zeros_like(P)
    Pv = np.where(valid, P, 0.0)
    Pg = np.where(gap, P, 0.0)
    # losses: outward pair always active, inward pair only with a gap
    dP -= 2.0 * rout * Pv
    dP -= 2.0 * rin * Pg
    # gains (shifts stay inside the window; edge outflow is the leak)
    dP[1:, :] += rin * Pg[:-1, :]      # left walker n-1 -> n
    dP[:, :-1] += rin * Pg[:, 1:]      # right walker m+1 -> m
    dP[:-1, :] += rout * Pv[1:, :]     # left walker n+1 -> n
    dP[:, 1:] += rout * Pv[:, :-1]     # right walker m-1 -> m
    dP[~valid] = 0.0
    return dP


def integrate_master(params: PairParams, t_grid: Sequence[float],
                     L: int | None = None, dt: float | None = None,
                     leak_tol: float = 1e-9) -> list[JointDistribution]:
    """Integrate the joint master equation from the point start (N1, N2).

    Classic RK4 on the dense truncated window; distributions are returned
    at each time in the increasing t_grid.  When L is not given, the
    default window is used and grown (x1.5, up to 4 retries) if leakage
    exceeds leak_tol; a user-pinned L raises TruncationError instead.
    """
    t_grid = list(t_grid)
    if any(t < 0 for t in t_grid):
        raise ValueError("t_grid times must be >= 0")
    if any(b <= a for a, b in zip(t_grid, t_grid[1:])):
        raise ValueError("t_grid must be strictly increasing")
    auto = L is None
    Lcur = default_window(params, t_grid[-1] if t_grid else 1.0) if auto else L
    for _ in range(5):
        try:
            return _integrate_fixed_window(params, t_grid, Lcur, dt, leak_tol)
        except TruncationError:
            if not auto:
                raise
            Lcur = int(math.ceil(Lcur * 1.5))
    return _integrate_fixed_window(params, t_grid, Lcur, dt, leak_tol)


def _integrate_fixed_window(params, t_grid, L, dt, leak_tol):
    dt_target = dt if dt is not None else 0.0025 / params.F
    center = (params.N1 + params.N2) // 2
    lo = center - L
    hi = center + L + 1
    sites = np.arange(lo, hi + 1)
    size = sites.size
    P = np.zeros((size, size))
    P[params.N1 - lo, params.N2 - lo] = 1.0

    valid = sites[:, None] < sites[None, :]
    gap = (sites[None, :] - sites[:, None]) > 1
    rin = 2.0 * params.F * params.p
    rout = 2.0 * params.F * (1.0 - params.p)

    out = []
    t = 0.0
    for tk in t_grid:
        span = tk - t
        if span > 0:
            nsteps = max(1, int(math.ceil(span / dt_target)))
            h = span / nsteps
            for _ in range(nsteps):
                k1 = _generator_apply(P, valid, gap, rin, rout)
                k2 = _generator_apply(P + 0.5 * h * k1, valid, gap, rin, rout)
                k3 = _generator_apply(P + 0.5 * h * k2, valid, gap, rin, rout)
                k4 = _generator_apply(P + h * k3, valid, gap, rin, rout)
                P = P + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
            t = tk
        deficit = 1.0 - P.sum()
        if deficit > leak_tol:
            raise TruncationError(
                f"window L={L} leaked {deficit:.3e} > {leak_tol:.1e} by t={tk}; "
                f"grow L to about {int(math.ceil(L * 1.5))}",
                suggested_L=int(math.ceil(L * 1.5)))
        out.append(JointDistribution(L=L, sites=sites, probs=P.copy(), t=tk))
    return out


def moments_from_distribution(dist: JointDistribution, params: PairParams
                              ) -> tuple[float, float, float, float]:
    """(d, mean_x1, second_moment_x1, msd_x1) from a window distribution.

    d = a <m - n>; x1 = a*n moments are taken over the left walker.  The
    window's mass deficit bounds the absolute moment error.
    """
    P = dist.probs
    s = dist.sites.astype(float)
    n_grid = s[:, None]
    m_grid = s[None, :]
    a = params.a
    d = a * float(((m_grid - n_grid) * P).sum())
    mean = a * float((n_grid * P).sum())
    second = a * a * float((n_grid ** 2 * P).sum())
    return d, mean, second, second - mean * mean


def generating_function(dist: JointDistribution, phi: float, psi: float) -> complex:
    """Sum P_{n,m} e^{i n phi} e^{i m psi} over the window."""
    en = np.exp(1j * dist.sites * phi)
    em = np.exp(1j * dist.sites * psi)
    return complex(en @ dist.probs @ em)
