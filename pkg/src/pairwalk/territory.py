"""Territorial random walkers on a 1D ring.

Each animal hops to either neighbouring site at rate R per direction
(diffusion constant a^2 R, matching the first-passage decay
exp(-pi^2 R t / (4 N^2)) used for the traversal-failure estimate); a hop
onto a site carrying another animal's active scent (age < T_AS), or onto
an occupied site, is rejected.  The animal refreshes its own scent at its
current site on every event.  An animal's territory spans its active
scent field: the boundaries are its outermost active-scent sites, and the
gap between two facing boundaries of adjacent territories is a border.
(The active field of a nearest-neighbour walker is automatically
contiguous: last-visit times decrease monotonically with distance from
the current position, so the span equals the contiguous interval around
the animal.)

Boundary bookkeeping is exact: scent expiries are processed in time order
from a lazy heap, so a frontier retracts site by site at the true expiry
instants, while a frontier advances when its animal steps past it and
marks new ground.  The raw event log records every such displacement of a
bordered (gap > 0) pair; "toward" means the gap shrank.

The border bias p of the two-boundary picture is measured on the scent
renewal clock: each border's gap is observed every T_AS, and an
observation pair with a positive initial gap and a changed gap is one
trial, toward if the gap shrank.  A boundary holds only if its owner
re-scents it within T_AS, so per-window counting is what turns the
traversal-failure probability into 1 - p; counting every microscopic
flicker instead would dilute p to 1/2 by stationarity.

At most one animal's scent can be active on a site at a time (a deposit
requires standing there, which requires every foreign scent to be stale),
so per-site (owner, stamp) slots represent the full per-animal timestamp
table without loss.
"""
from __future__ import annotations

import heapq
import math
import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class TerritoryConfig:
    """Ring-lattice scent model parameters (times in 1/R units if R = 1)."""
    n_animals: int = 10
    lattice_size: int = 400
    R: float = 1.0
    T_AS: float = 100.0
    a: float = 1.0
    t_burn: float | None = None
    t_measure: float = 20000.0
    seed: int = 0

    def __post_init__(self):
        if self.n_animals < 2:
            raise ValueError("need at least 2 animals")
        if self.lattice_size < 4 * self.n_animals:
            raise ValueError("lattice_size must be >= 4 * n_animals")
        if self.R <= 0 or self.T_AS <= 0 or self.a <= 0:
            raise ValueError("R, T_AS and a must be > 0")
        if self.t_measure <= 0:
            raise ValueError("t_measure must be > 0")

    @property
    def rho(self) -> float:
        return self.n_animals / (self.lattice_size * self.a)

    @property
    def Z(self) -> float:
        return self.T_AS * self.R * self.rho ** 2 * self.a ** 2

    @property
    def burn_in(self) -> float:
        if self.t_burn is not None:
            return self.t_burn
        return 10.0 * max(self.T_AS, 1.0 / (self.R * self.rho ** 2 * self.a ** 2))


def tas_for_z(Z: float, cfg: TerritoryConfig) -> float:
    """Active-scent time realizing a target Z at cfg's density and rate."""
    return Z / (cfg.R * cfg.rho ** 2 * cfg.a ** 2)


@dataclass
class BoundaryEventLog:
    """Boundary displacements of bordered (gap > 0) territory pairs."""
    times: list[float] = field(default_factory=list)
    border: list[int] = field(default_factory=list)
    toward: list[bool] = field(default_factory=list)
    steps: list[int] = field(default_factory=list)

    def append(self, t, border_id, toward, steps):
        self.times.append(t)
        self.border.append(border_id)
        self.toward.append(toward)
        self.steps.append(steps)

    @property
    def n_events(self) -> int:
        return len(self.times)

    @property
    def n_toward(self) -> int:
        return sum(self.toward)


@dataclass
class TerritoryWorld:
    """Mutable simulation state (exposed for invariant checks)."""
    size: int
    pos: list[int]
    site_owner: list[int]
    site_stamp: list[float]
    occupant: list[int]
    terr_lo: list[int]
    terr_hi: list[int]
    time: float


@dataclass
class TerritoryResult:
    log: BoundaryEventLog     # every bordered boundary displacement
    trials: BoundaryEventLog  # net moves on the T_AS observation clock
    widths: np.ndarray        # (n_samples, n_animals) after burn-in
    sample_times: np.ndarray
    config: TerritoryConfig
    final_world: TerritoryWorld


def _width(lo, hi, S):
    return (hi - lo) % S + 1


class _Sim:
    def __init__(self, cfg: TerritoryConfig):
        self.cfg = cfg
        S = cfg.lattice_size
        n = cfg.n_animals
        self.S = S
        self.n = n
        self.rng = np.random.Generator(np.random.Philox(key=(cfg.seed, 0)))
        pos = [int(i * S // n) for i in range(n)]
        self.w = TerritoryWorld(
            size=S, pos=pos,
            site_owner=[-1] * S,
            site_stamp=[-math.inf] * S,
            occupant=[-1] * S,
            terr_lo=list(pos), terr_hi=list(pos), time=0.0)
        self.heap: list[tuple[float, int, float]] = []
        self.log = BoundaryEventLog()
        self.trials = BoundaryEventLog()
        self.measuring = False
        for i, s in enumerate(pos):
            self.w.occupant[s] = i
            self._deposit(i, s, 0.0)

    def _gaps(self):
        w = self.w
        return [(w.terr_lo[(i + 1) % self.n] - w.terr_hi[i] - 1) % self.S
                for i in range(self.n)]

    # -- scent primitives ----------------------------------------------------

    def _deposit(self, i, s, t):
        self.w.site_owner[s] = i
        self.w.site_stamp[s] = t
        heapq.heappush(self.heap, (t + self.cfg.T_AS, s, t))

    def _active_own(self, i, s, t):
        return (self.w.site_owner[s] == i
                and t - self.w.site_stamp[s] < self.cfg.T_AS)

    def _blocked(self, i, s, t):
        if self.w.occupant[s] >= 0 and self.w.occupant[s] != i:
            return True
        o = self.w.site_owner[s]
        return o >= 0 and o != i and t - self.w.site_stamp[s] < self.cfg.T_AS

    # -- boundary moves --------------------------------------------------------

    def _log_right_boundary(self, i, t, old_hi, new_hi):
        """Right frontier of territory i moved old_hi -> new_hi."""
        delta = (new_hi - old_hi) % self.S
        if delta and delta < self.S // 2:
            toward, steps = True, delta
        else:
            toward, steps = False, (old_hi - new_hi) % self.S
        gap_before = (self.w.terr_lo[(i + 1) % self.n] - old_hi - 1) % self.S
        if self.measuring and gap_before > 0:
            self.log.append(t, i, toward, steps)

    def _log_left_boundary(self, i, t, old_lo, new_lo):
        """Left frontier of territory i moved old_lo -> new_lo."""
        delta = (old_lo - new_lo) % self.S
        if delta and delta < self.S // 2:
            toward, steps = True, delta
        else:
            toward, steps = False, (new_lo - old_lo) % self.S
        j = (i - 1) % self.n
        gap_before = (old_lo - self.w.terr_hi[j] - 1) % self.S
        if self.measuring and gap_before > 0:
            self.log.append(t, j, toward, steps)

    # -- expiry processing -------------------------------------------------------

    def _drain_expiries(self, t_upto):
        w = self.w
        S = self.S
        while self.heap and self.heap[0][0] <= t_upto:
            te, s, stamp = heapq.heappop(self.heap)
            if w.site_stamp[s] != stamp:
                continue  # refreshed since; stale entry
            i = w.site_owner[s]
            if i < 0:
                continue
            if s == w.pos[i]:
                # presence keeps the current site marked
                self._deposit(i, s, te)
                continue
            lo, hi = w.terr_lo[i], w.terr_hi[i]
            if s == hi and s != lo:
                probe = (hi - 1) % S
                while not self._active_own(i, probe, te):
                    probe = (probe - 1) % S
                w.terr_hi[i] = probe
                self._log_right_boundary(i, te, hi, probe)
            elif s == lo and s != hi:
                probe = (lo + 1) % S
                while not self._active_own(i, probe, te):
                    probe = (probe + 1) % S
                w.terr_lo[i] = probe
                self._log_left_boundary(i, te, lo, probe)
            # interior sites go stale without moving a frontier

    # -- hop processing ------------------------------------------------------------

    def _hop(self, i, direction, t):
        w = self.w
        S = self.S
        src = w.pos[i]
        dst = (src + direction) % S
        if self._blocked(i, dst, t):
            self._deposit(i, src, t)  # rejected hop still refreshes
            return
        w.occupant[src] = -1
        w.occupant[dst] = i
        w.pos[i] = dst
        self._deposit(i, dst, t)
        lo, hi = w.terr_lo[i], w.terr_hi[i]
        if src == hi and direction == 1 and dst == (hi + 1) % S:
            w.terr_hi[i] = dst
            self._log_right_boundary(i, t, hi, dst)
        elif src == lo and direction == -1 and dst == (lo - 1) % S:
            w.terr_lo[i] = dst
            self._log_left_boundary(i, t, lo, dst)

    # -- main loop ---------------------------------------------------------------------

    def _observe_border_gaps(self, t, prev_gaps):
        """One tick of the T_AS observation clock: net gap changes of
        bordered pairs become trials."""
        gaps = self._gaps()
        for b in range(self.n):
            if prev_gaps[b] > 0 and gaps[b] != prev_gaps[b]:
                self.trials.append(t, b, gaps[b] < prev_gaps[b],
                                   abs(gaps[b] - prev_gaps[b]))
        return gaps

    def run(self, n_samples=512):
        cfg = self.cfg
        w = self.w
        burn = cfg.burn_in
        t_end = burn + cfg.t_measure
        dt_sample = cfg.t_measure / n_samples
        next_sample = burn + dt_sample
        next_obs = burn + cfg.T_AS
        prev_gaps = None
        widths = []
        sample_times = []
        rate = cfg.n_animals * 2.0 * cfg.R  # R per direction
        t = 0.0
        while True:
            t_next = t + self.rng.exponential(1.0 / rate)
            if not self.measuring and t_next >= burn:
                self._drain_expiries(burn)  # pre-burn expiries stay unlogged
                self.measuring = True
                prev_gaps = self._gaps()
            horizon = min(t_next, t_end)
            while True:  # scheduled epochs, strictly in time order
                e_obs = next_obs if self.measuring else math.inf
                e = min(e_obs, next_sample)
                if e > horizon:
                    break
                self._drain_expiries(e)
                if e_obs == e:
                    prev_gaps = self._observe_border_gaps(e, prev_gaps)
                    next_obs += cfg.T_AS
                if next_sample == e:
                    w.time = e
                    widths.append([_width(w.terr_lo[i], w.terr_hi[i], self.S)
                                   for i in range(self.n)])
                    sample_times.append(e)
                    next_sample += dt_sample
            if t_next > t_end:
                self._drain_expiries(t_end)
                w.time = t_end
                break
            self._drain_expiries(t_next)
            i = int(self.rng.integers(self.n))
            direction = 1 if self.rng.random() < 0.5 else -1
            self._hop(i, direction, t_next)
            w.time = t_next
            t = t_next
        return TerritoryResult(
            log=self.log,
            trials=self.trials,
            widths=np.asarray(widths, dtype=float),
            sample_times=np.asarray(sample_times),
            config=cfg,
            final_world=w)


def run_territory(cfg: TerritoryConfig, n_samples: int = 512) -> TerritoryResult:
    """Simulate and return the boundary event log plus width time series."""
    result = _Sim(cfg).run(n_samples=n_samples)
    if result.log.n_events == 0:
        warnings.warn("no bordered boundary moves observed: average gap is "
                      "zero for this configuration, p is undefined",
                      RuntimeWarning, stacklevel=2)
    return result


def check_world_invariants(w: TerritoryWorld, cfg: TerritoryConfig) -> None:
    """Raise AssertionError when exclusivity/containment/order break."""
    S, n = w.size, cfg.n_animals
    t = w.time
    active = {}
    for s in range(S):
        o = w.site_owner[s]
        if o >= 0 and t - w.site_stamp[s] < cfg.T_AS:
            active.setdefault(o, []).append(s)
    for i in range(n):
        lo, hi = w.terr_lo[i], w.terr_hi[i]
        width = _width(lo, hi, S)
        assert (w.pos[i] - lo) % S < width, f"animal {i} outside its territory"
        sites = active.get(i, [])
        assert sites, f"animal {i} has no active scent"
        offs = sorted((s - lo) % S for s in sites)
        assert offs[0] == 0 and offs[-1] == width - 1, \
            f"frontier bookkeeping of animal {i} disagrees with scent field"
    # territories are disjoint arcs in fixed ring order
    lo0 = w.terr_lo[0]
    marks = []
    for i in range(n):
        start = (w.terr_lo[i] - lo0) % S
        marks.append((start, start + _width(w.terr_lo[i], w.terr_hi[i], S) - 1))
    assert all(m[0] <= m[1] for m in marks)
    assert all(marks[k][1] < marks[k + 1][0] for k in range(n - 1)), \
        "territories overlap or left ring order"


def estimate_p(log: BoundaryEventLog) -> tuple[float, float]:
    """Fraction of bordered boundary moves that shrank the gap, with a
    binomial standard error."""
    total = log.n_events
    if total == 0:
        raise ValueError("empty boundary log")
    p_hat = log.n_toward / total
    return p_hat, math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / total)


def failure_probability(Z: float) -> float:
    """Probability of failing to traverse an average-width territory within
    the active-scent time: exp(-pi^2 Z / 4)."""
    return math.exp(-math.pi ** 2 * Z / 4.0)


def fit_exponential(zs, ys) -> tuple[float, float, float]:
    """Least squares of log(ys) on zs for ys ~ c * exp(-k z).

    Returns (c, k, rms_log_residual)."""
    zs = np.asarray(zs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    if zs.size < 3:
        raise ValueError("need at least 3 points")
    if np.any(ys <= 0):
        raise ValueError("ys must be positive for a log-linear fit")
    slope, intercept = np.polyfit(zs, np.log(ys), 1)
    resid = np.log(ys) - (slope * zs + intercept)
    return float(np.exp(intercept)), float(-slope), float(np.sqrt(np.mean(resid ** 2)))


def territory_variance(widths) -> float:
    """Stationary variance of the territory width over pooled samples."""
    widths = np.asarray(widths, dtype=float)
    if widths.size < 2:
        raise ValueError("need at least 2 width samples")
    return float(np.var(widths.ravel(), ddof=1))
