import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pairwalk import discrete_analytics as da
from pairwalk.model_core import (JointDistribution, PairParams, PairState,
                                 TruncationError, default_window,
                                 generating_function, integrate_master,
                                 moments_from_distribution, transition_rates)
from pairwalk.numerics import inverse_laplace_complex


class TestParams:
    @given(st.floats(-1, 2))
    def test_p_range(self, p):
        if 0 < p < 1:
            PairParams(p=p)
        else:
            with pytest.raises(ValueError):
                PairParams(p=p)

    def test_ordering(self):
        with pytest.raises(ValueError):
            PairParams(p=0.5, N1=3, N2=3)
        with pytest.raises(ValueError):
            PairState(2, 2)


class TestTransitionRates:
    def test_symmetric_separated(self):
        moves = transition_rates(PairState(0, 5), PairParams(p=0.5))
        assert len(moves) == 4
        assert all(r == pytest.approx(1.0) for _, r in moves)
        assert sum(r for _, r in moves) == pytest.approx(4.0)

    def test_adjacent_blocked(self):
        moves = transition_rates(PairState(0, 1), PairParams(p=0.7))
        assert len(moves) == 2
        assert {(s.n, s.m) for s, _ in moves} == {(-1, 1), (0, 2)}
        assert all(r == pytest.approx(0.6) for _, r in moves)
        assert sum(r for _, r in moves) == pytest.approx(1.2)

    def test_biased_separated(self):
        moves = dict(((s.n, s.m), r) for s, r in
                     transition_rates(PairState(0, 2), PairParams(p=0.7)))
        assert moves[(1, 2)] == pytest.approx(1.4)   # inward
        assert moves[(0, 1)] == pytest.approx(1.4)
        assert moves[(-1, 2)] == pytest.approx(0.6)  # outward
        assert moves[(0, 3)] == pytest.approx(0.6)

    @given(st.floats(0.05, 0.95), st.integers(-5, 5), st.integers(1, 6),
           st.floats(0.2, 3.0))
    @settings(max_examples=60)
    def test_total_rate(self, p, n, gap, F):
        pars = PairParams(p=p, F=F)
        total = sum(r for _, r in transition_rates(PairState(n, n + gap), pars))
        expected = 4 * F * (1 - p) if gap == 1 else 4 * F
        assert total == pytest.approx(expected)
        for s, _ in transition_rates(PairState(n, n + gap), pars):
            assert s.n < s.m


class TestIntegrateMaster:
    def test_initial_condition(self):
        pars = PairParams(p=0.5)
        dist = integrate_master(pars, [0.0])[0]
        assert dist.prob(0, 1) == 1.0
        assert dist.total_mass == pytest.approx(1.0, abs=1e-15)

    def test_mass_conservation(self):
        pars = PairParams(p=0.5)
        dist = integrate_master(pars, [1.0], L=40)[0]
        assert abs(dist.mass_deficit) < 1e-8

    def test_mirror_symmetry_p_half(self):
        pars = PairParams(p=0.5)
        dist = integrate_master(pars, [1.0], L=25)[0]
        lo = int(dist.sites[0])
        P = dist.probs
        worst = 0.0
        for n in range(-6, 7):
            for m in range(n + 1, 8):
                worst = max(worst, abs(dist.prob(n, m) - dist.prob(1 - m, 1 - n)))
        assert worst < 1e-10

    def test_positivity_and_diagonal(self):
        pars = PairParams(p=0.3)
        for dist in integrate_master(pars, [0.5, 2.0]):
            assert dist.probs.min() > -1e-12
            s = dist.sites
            diag = s[:, None] >= s[None, :]
            assert np.abs(dist.probs[diag]).max() == 0.0

    def test_truncation_error_pinned_window(self):
        pars = PairParams(p=0.5)
        with pytest.raises(TruncationError) as exc:
            integrate_master(pars, [5.0], L=4)
        assert exc.value.suggested_L > 4
        assert "grow L" in str(exc.value)

    def test_auto_grow_handles_ballistic(self):
        pars = PairParams(p=0.25)
        dist = integrate_master(pars, [3.0])[0]
        assert abs(dist.mass_deficit) < 1e-9

    def test_short_time_drift(self):
        # blocked start: d<x1>/dt -> aF(2p-2)
        pars = PairParams(p=0.7)
        tau = 1e-3
        dist = integrate_master(pars, [tau], L=6)[0]
        _, mean, _, _ = moments_from_distribution(dist, pars)
        assert mean / tau == pytest.approx(2 * 0.7 - 2, rel=5e-3)


class TestMoments:
    def test_point_mass(self):
        pars = PairParams(p=0.5)
        dist = integrate_master(pars, [0.0])[0]
        d, mean, second, msd = moments_from_distribution(dist, pars)
        assert (d, mean, msd) == (1.0, 0.0, 0.0)

    def test_against_quadrature(self):
        pars = PairParams(p=0.5)
        dist = integrate_master(pars, [2.0])[0]
        d, mean, second, msd = moments_from_distribution(dist, pars)
        assert d == pytest.approx(da.mean_separation_time(2.0, pars), abs=1e-6)

    def test_short_time_separation(self):
        # linear approximation 1 + 4(1-p)tau = 1.028; the true quadratic
        # correction at tau = 0.01 is 1.66e-4, so the bound is 2e-4
        pars = PairParams(p=0.3)
        dist = integrate_master(pars, [0.01], L=8)[0]
        d, *_ = moments_from_distribution(dist, pars)
        assert d == pytest.approx(1.028, abs=2e-4)

    def test_antisymmetry_about_midpoint(self):
        # <x1> + <x2> = a for the (0, 1) start, any p and tau
        pars = PairParams(p=0.64)
        dist = integrate_master(pars, [1.7])[0]
        P = dist.probs
        s = dist.sites.astype(float)
        x1 = float((s[:, None] * P).sum())
        x2 = float((s[None, :] * P).sum())
        assert x1 + x2 == pytest.approx(1.0, abs=1e-9)


class TestGeneratingFunction:
    def test_normalization(self):
        pars = PairParams(p=0.4)
        dist = integrate_master(pars, [0.7])[0]
        assert generating_function(dist, 0.0, 0.0) == pytest.approx(
            dist.total_mass, abs=1e-14)

    def test_point_mass_phase(self):
        pars = PairParams(p=0.5)
        dist = integrate_master(pars, [0.0])[0]
        psi = 0.8
        assert generating_function(dist, 0.0, psi) == pytest.approx(
            np.exp(1j * psi), abs=1e-14)

    def test_vs_talbot_of_adjacent_form(self):
        pars = PairParams(p=0.5)
        dist = integrate_master(pars, [1.0], L=30)[0]
        phi, psi = 0.3, 0.7
        oracle = generating_function(dist, phi, psi)
        via_talbot = inverse_laplace_complex(
            lambda e: da.gf_laplace_adjacent(phi, psi, e, pars), 1.0)
        assert abs(oracle - via_talbot) < 1e-5


def test_default_window_grows_with_drift():
    assert default_window(PairParams(p=0.25), 5.0) > default_window(
        PairParams(p=0.75), 5.0)
