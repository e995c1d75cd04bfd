import math

import numpy as np
import pytest

from pairwalk import continuum_analytics as ca
from pairwalk.mc_engine import EnsembleSpec, ensemble_moments
from pairwalk.model_core import PairParams
from pairwalk.numerics import QuadratureSpec, adaptive_quad, inverse_laplace_complex


@pytest.fixture
def cp_drift():
    return ca.ContinuumParams(D=1.0, v=0.5, x10=0.0, x20=1.0)


@pytest.fixture
def cp_free():
    return ca.ContinuumParams(D=1.0, v=0.0, x10=0.0, x20=1.0)


class TestBridge:
    def test_values(self):
        assert ca.bridge(0.5, 2.0, 1.0) == (2.0, 0.0)
        D, v = ca.bridge(0.51, 1e4, 0.01)
        assert D == pytest.approx(1.0)
        assert v == pytest.approx(4.0)

    def test_discrete_asymptote_maps_to_continuum(self):
        # discrete saturation d = p a/(2p-1) equals 2Dp/v under the bridge,
        # and both it and the discrete msd slope reach the continuum limits
        # D/v and D as p -> 1/2
        a, F = 0.01, 1e4
        for p, tol in ((0.51, 0.021), (0.501, 0.0021), (0.5001, 0.00021)):
            D, v = ca.bridge(p, F, a)
            d_disc = p / (2 * p - 1) * a
            assert d_disc == pytest.approx(2 * D * p / v, rel=1e-12)
            assert d_disc == pytest.approx(D / v, rel=tol)
            msd_slope_disc = 2 * a * a * F * (1 - p)  # per unit t, p > 1/2
            assert msd_slope_disc == pytest.approx(D, rel=tol)


class TestFourierLaplace:
    def test_normalization(self, cp_drift):
        assert ca.q_laplace_fourier(0.0, 0.0, 3.0, cp_drift) == pytest.approx(
            1.0 / 3.0, abs=1e-14)

    @pytest.mark.parametrize("v", [-0.5, 0.0, 0.5])
    def test_talbot_matches_charfn(self, v):
        cp = ca.ContinuumParams(D=1.0, v=v, x10=0.0, x20=1.0)
        for (k1, k2) in ((0.3, 0.8), (-0.6, 0.4)):
            ref = inverse_laplace_complex(
                lambda e: ca.q_laplace_fourier(k1, k2, e, cp), 1.0)
            assert abs(ca.q_charfn_time(k1, k2, 1.0, cp) - ref) < 1e-6

    def test_symmetric_origin_reduction(self):
        # v = 0 with coincident starts: second summand loses its drift pole
        cp = ca.ContinuumParams(D=1.0, v=0.0, x10=0.0, x20=1e-12)
        k1, k2 = 0.4, -0.9
        got = ca.q_laplace_fourier(k1, k2, 2.0, cp)
        K, k = k1 + k2, k2 - k1
        den = 2.0 + 0.5 * (K * K + k * k)
        S = math.sqrt(2.0 + 0.5 * K * K)
        expect = (1.0 + 1j * math.sqrt(0.5) * k / S) / den
        assert got == pytest.approx(expect, abs=1e-10)


class TestCharfn:
    def test_initial(self, cp_drift):
        k1, k2 = 0.7, -0.3
        assert ca.q_charfn_time(k1, k2, 0.0, cp_drift) == pytest.approx(
            np.exp(1j * 1.0 * k2), abs=1e-14)

    def test_normalization_all_times(self, cp_drift):
        for t in (0.3, 1.0, 4.0):
            assert ca.q_charfn_time(0.0, 0.0, t, cp_drift) == pytest.approx(1.0, abs=1e-12)

    def test_fourier_grid_oracle(self, cp_drift):
        # trapezoid double Fourier transform of the closed propagator
        t = 0.5
        k1, k2 = 0.6, -0.4
        xs = np.linspace(-6.0, 7.0, 261)
        h = xs[1] - xs[0]
        Q = np.array([[ca.propagator_closed(x1, x2, t, cp_drift) for x2 in xs]
                      for x1 in xs])
        phase = np.exp(1j * k1 * xs)[:, None] * np.exp(1j * k2 * xs)[None, :]
        approx = (Q * phase).sum() * h * h
        assert abs(approx - ca.q_charfn_time(k1, k2, t, cp_drift)) < 1e-5


class TestPropagators:
    def test_domain(self, cp_drift):
        assert ca.propagator_closed(1.0, 0.5, 1.0, cp_drift) == 0.0
        assert ca.propagator_convolution(1.0, 0.5, 1.0, cp_drift) == 0.0

    @pytest.mark.parametrize("v", [-0.5, 0.0, 0.5])
    def test_equivalence_spot(self, v):
        cp = ca.ContinuumParams(D=1.0, v=v, x10=0.0, x20=1.0)
        rng = np.random.default_rng(5)
        for t in (0.1, 1.0, 5.0):
            for _ in range(8):
                x1 = rng.normal(0.0, 1.0 + math.sqrt(t))
                x2 = x1 + rng.uniform(0.01, 2.0 + 2.0 * math.sqrt(t))
                a = ca.propagator_closed(x1, x2, t, cp)
                b = ca.propagator_convolution(x1, x2, t, cp)
                assert a == pytest.approx(b, abs=1e-8)

    def test_normalization(self, cp_drift):
        t = 1.0
        hi = 1.0 + 8.0 * math.sqrt(2.0 * t) + 2.0 * t

        def rs(x):
            return np.array([ca.separation_density(xx, t, cp_drift)
                             for xx in np.atleast_1d(x)])

        mass, _ = adaptive_quad(rs, 0.0, hi, QuadratureSpec(1e-11, 1e-10, 60))
        assert mass == pytest.approx(1.0, abs=1e-6)

    def test_zero_flux(self):
        for v in (-0.5, 0.5):
            cp = ca.ContinuumParams(D=1.0, v=v, x10=0.0, x20=1.0)
            for t in (0.5, 2.0):
                h = 1e-6
                r0 = ca.separation_density(0.0, t, cp)
                r1 = ca.separation_density(h, t, cp)
                r2 = ca.separation_density(2 * h, t, cp)
                flux = cp.D * (-3 * r0 + 4 * r1 - r2) / (2 * h) + cp.v * r0
                assert abs(flux) < 1e-8

    def test_v0_image_form(self, cp_free):
        # image-pair reduction at v = 0
        t = 0.8
        for x_s in (0.1, 0.7, 2.3):
            expect = (math.exp(-(x_s - 1.0) ** 2 / (8 * t))
                      + math.exp(-(x_s + 1.0) ** 2 / (8 * t))) / math.sqrt(8 * math.pi * t)
            assert ca.separation_density(x_s, t, cp_free) == pytest.approx(expect, abs=1e-10)


class TestInteractionIntegral:
    def test_v0_closed_form(self, cp_free):
        t = 1.3
        for x_s in (0.4, 1.5):
            expect = math.exp(-(abs(x_s) + 1.0) ** 2 / (8 * t)) / math.sqrt(2 * math.pi * t)
            assert ca.interaction_integral(x_s, t, cp_free) == pytest.approx(expect, rel=1e-12)

    def test_quadrature_agreement(self):
        cp = ca.ContinuumParams(D=1.0, v=0.4, x10=0.0, x20=1.0)
        got = ca.interaction_integral(0.7, 1.3, cp)
        ref = ca.interaction_integral_quad(0.7, 1.3, cp)
        assert got == pytest.approx(ref, abs=1e-7)

    def test_decay(self, cp_drift):
        assert ca.interaction_integral(40.0, 1.0, cp_drift) < 1e-12


class TestContinuumMoments:
    def test_initial(self, cp_drift):
        assert ca.mean_separation_cont(0.0, cp_drift) == 1.0
        assert ca.msd_cont(0.0, cp_drift) == 0.0

    def test_v0_closed_forms(self, cp_free):
        for t in (0.3, 2.0, 10.0):
            assert ca.mean_sep_v0(t, cp_free) == pytest.approx(
                ca.mean_separation_cont(t, cp_free), abs=1e-8)
            assert ca.msd_v0(t, cp_free) == pytest.approx(
                ca.msd_cont(t, cp_free), abs=1e-8)

    def test_v0_coincident_start_limits(self):
        cp = ca.ContinuumParams(D=1.0, v=0.0, x10=0.0, x20=1e-9)
        assert ca.mean_sep_v0(1.0, cp) == pytest.approx(math.sqrt(8 / math.pi), abs=1e-6)
        assert ca.msd_v0(1.0, cp) == pytest.approx(2 * (1 - 1 / math.pi), abs=1e-6)
        assert ca.mean_sep_v0(1.0, cp) == pytest.approx(1.59577, abs=1e-5)
        assert ca.msd_v0(1.0, cp) == pytest.approx(1.36338, abs=1e-5)

    def test_v0_short_time(self, cp_free):
        assert ca.mean_sep_v0(1e-6, cp_free) == pytest.approx(1.0, abs=1e-9)

    def test_saturation(self):
        cp = ca.ContinuumParams(D=1.0, v=0.5, x10=0.0, x20=1.0)
        assert ca.mean_separation_cont(100.0, cp) == pytest.approx(2.0, rel=0.02)

    def test_requires_v0(self, cp_drift):
        with pytest.raises(ValueError):
            ca.mean_sep_v0(1.0, cp_drift)
        with pytest.raises(ValueError):
            ca.msd_v0(1.0, cp_drift)


class TestAsymptotics:
    def test_cases(self):
        d, msd = ca.asymptotic_cont(ca.ContinuumParams(D=0.5, v=0.25), 10.0)
        assert d == pytest.approx(2.0)
        d, msd = ca.asymptotic_cont(ca.ContinuumParams(D=1.0, v=-0.3), 10.0)
        assert d == pytest.approx(6.0)
        assert msd == pytest.approx(20.0)

    def test_msd_slope_halves_for_attraction(self):
        _, msd_pos = ca.asymptotic_cont(ca.ContinuumParams(D=1.0, v=0.5), 8.0)
        _, msd_neg = ca.asymptotic_cont(ca.ContinuumParams(D=1.0, v=-0.5), 8.0)
        assert msd_pos * 2 == pytest.approx(msd_neg)


class TestLaplaceMarginals:
    def test_talbot_reproduces_mean_separation(self, cp_drift):
        for t in (0.1, 1.0, 5.0):
            mean = inverse_laplace_complex(
                lambda e: ca.marginal_moments_laplace_cont(e, cp_drift)[0], t).real
            d = cp_drift.dx0 - 2.0 * mean
            assert d == pytest.approx(ca.mean_separation_cont(t, cp_drift), abs=1e-6)

    def test_talbot_reproduces_msd(self, cp_drift):
        for t in (0.5, 2.0):
            m1 = inverse_laplace_complex(
                lambda e: ca.marginal_moments_laplace_cont(e, cp_drift)[0], t).real
            m2 = inverse_laplace_complex(
                lambda e: ca.marginal_moments_laplace_cont(e, cp_drift)[1], t).real
            assert m2 - m1 * m1 == pytest.approx(ca.msd_cont(t, cp_drift), abs=1e-6)

    def test_large_eps_drift(self, cp_drift):
        eps = 1e9
        mean, second = ca.marginal_moments_laplace_cont(eps, cp_drift)
        assert (eps ** 2 * mean).real == pytest.approx(cp_drift.v, abs=1e-6)

    def test_requires_origin_start(self):
        with pytest.raises(ValueError):
            ca.marginal_moments_laplace_cont(1.0, ca.ContinuumParams(D=1.0, v=0.0, x10=1.0, x20=2.0))


class TestShortTimeCont:
    def test_values(self, cp_drift):
        assert ca.short_time_cont(cp_drift, 0.0) == (1.0, 0.0)
        d, msd = ca.short_time_cont(cp_drift, 0.01)
        assert d == pytest.approx(0.99)

    def test_matches_quadrature(self, cp_drift):
        d, _ = ca.short_time_cont(cp_drift, 0.001)
        assert d == pytest.approx(ca.mean_separation_cont(0.001, cp_drift), abs=1e-4)


class TestMonteCarloBridge:
    def test_lattice_converges_to_continuum(self):
        # (a, F, p) = (0.05, 400, 0.5125) maps to (D, v) = (1, 1)
        a, F, p = 0.05, 400.0, 0.5125
        D, v = ca.bridge(p, F, a)
        assert (D, v) == (pytest.approx(1.0), pytest.approx(1.0))
        pars = PairParams(p=p, F=F, a=a)
        cp = ca.ContinuumParams(D=D, v=v, x10=0.0, x20=a)
        ts = (0.5, 2.0)
        spec = EnsembleSpec(n_replicas=16384, t_grid=tuple(F * t for t in ts), seed=7)
        ms = ensemble_moments(pars, spec)
        for j, t in enumerate(ts):
            d_cont = ca.mean_separation_cont(t, cp)
            msd_cont_v = ca.msd_cont(t, cp)
            # statistical error plus an O(a) lattice-discreteness allowance
            assert abs(ms.d[j] - d_cont) < 4.0 * ms.se_d[j] + a
            assert abs(ms.msd[j] - msd_cont_v) < 4.0 * ms.se_msd[j] + 2 * a
