import numpy as np
import pytest

from pairwalk import discrete_analytics as da
from pairwalk.mc_engine import (EnsembleSpec, ensemble_moments, ensemble_states,
                                simulate_pair)
from pairwalk.model_core import PairParams, integrate_master


class TestSpec:
    def test_validation(self):
        with pytest.raises(ValueError):
            EnsembleSpec(n_replicas=0, t_grid=(1.0,), seed=1)
        with pytest.raises(ValueError):
            EnsembleSpec(n_replicas=5, t_grid=(1.0, 1.0), seed=1)
        with pytest.raises(ValueError):
            EnsembleSpec(n_replicas=5, t_grid=(-1.0, 1.0), seed=1)


class TestSimulatePair:
    def test_initial_only(self, rng):
        pars = PairParams(p=0.5, N1=2, N2=7)
        out = simulate_pair(pars, [0.0], rng)
        assert out.tolist() == [[2, 7]]

    def test_ordering_invariant(self, rng):
        pars = PairParams(p=0.8)
        grid = np.linspace(0.0, 40.0, 400)  # ~160 events, 400 samples
        for _ in range(5):
            out = simulate_pair(pars, grid, rng)
            assert (out[:, 0] < out[:, 1]).all()

    def test_strong_attraction_saturates(self):
        pars = PairParams(p=0.999)
        n, m = ensemble_states(pars, 50.0, 4000, seed=77)
        d = (m - n).mean()
        # saturation separation p/(2p-1) = 1.002
        assert d == pytest.approx(0.999 / 0.998, abs=0.01)
        assert (m > n).all()


class TestEnsembleMoments:
    def test_determinism_across_threads(self):
        pars = PairParams(p=0.45)
        spec = EnsembleSpec(n_replicas=20000, t_grid=(0.5, 2.0, 5.0), seed=99)
        a = ensemble_moments(pars, spec, threads=1)
        b = ensemble_moments(pars, spec, threads=3)
        for field in ("d", "x2", "msd", "se_d", "se_x2", "se_msd"):
            assert (getattr(a, field) == getattr(b, field)).all()

    def test_seed_changes_result(self):
        pars = PairParams(p=0.45)
        a = ensemble_moments(pars, EnsembleSpec(10000, (1.0,), seed=1))
        b = ensemble_moments(pars, EnsembleSpec(10000, (1.0,), seed=2))
        assert a.d[0] != b.d[0]

    def test_exactness_cellwise(self):
        # empirical occupancy at tau = 1 vs the master-equation oracle,
        # within 4 sigma binomial bounds cell by cell
        pars = PairParams(p=0.5)
        n_rep = 250000
        n, m = ensemble_states(pars, 1.0, n_rep, seed=2024)
        dist = integrate_master(pars, [1.0], L=24)[0]
        lo = int(dist.sites[0])
        counts = {}
        for nn, mm in zip(n, m):
            counts[(nn, mm)] = counts.get((nn, mm), 0) + 1
        checked = 0
        for ni in range(-5, 6):
            for mi in range(ni + 1, 7):
                pr = dist.prob(ni, mi)
                if pr < 1e-5:
                    continue
                c = counts.get((ni, mi), 0)
                sigma = np.sqrt(n_rep * pr * (1 - pr))
                assert abs(c - n_rep * pr) < 4.0 * sigma + 1.0, (ni, mi)
                checked += 1
        assert checked > 20

    @pytest.mark.parametrize("p", [0.4, 0.5, 0.6])
    def test_moments_track_exact_curves(self, p):
        pars = PairParams(p=p)
        spec = EnsembleSpec(n_replicas=100000, t_grid=(10.0, 50.0), seed=555)
        ms = ensemble_moments(pars, spec)
        for j, tau in enumerate(ms.tau):
            d_ex = da.mean_separation_time(tau, pars)
            x2_ex = da.second_moment_time(tau, pars)
            msd_ex = x2_ex - da.mean_position_time(tau, pars) ** 2
            assert abs(ms.d[j] - d_ex) < 3.5 * ms.se_d[j]
            assert abs(ms.x2[j] - x2_ex) < 3.5 * ms.se_x2[j]
            assert abs(ms.msd[j] - msd_ex) < 3.5 * ms.se_msd[j]

    def test_regime_signatures(self):
        # Fig.-3 style panels at modest replica count: saturation (p=0.6),
        # sqrt growth (p=0.5), near-ballistic growth (p=0.4)
        taus = (10.0, 20.0, 40.0)
        out = {}
        for p in (0.4, 0.5, 0.6):
            ms = ensemble_moments(PairParams(p=p),
                                  EnsembleSpec(60000, taus, seed=31))
            out[p] = ms.d
        slope = lambda d: np.polyfit(np.log(taus), np.log(d), 1)[0]
        assert abs(out[0.6][-1] - 3.0) < 0.1          # d_inf = p/(2p-1) = 3
        assert slope(out[0.6]) < 0.15
        assert 0.35 < slope(out[0.5]) < 0.65
        assert 0.8 < slope(out[0.4]) < 1.1
