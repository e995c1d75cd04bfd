"""Cross-validation battery: every analytic surface is checked against an
independent numerical route, and the print-level ambiguities of the source
formulas are adjudicated (accepted vs rejected variant residuals).

Each check returns a dict {name, measured, tolerance, passed, ...}; the CLI
serializes the battery as JSON and exits nonzero when anything fails.
"""
from __future__ import annotations

import math

import numpy as np
from scipy import special as sp

from . import continuum_analytics as ca
from . import discrete_analytics as da
from . import fp_solver as fp
from .model_core import PairParams, integrate_master, moments_from_distribution
from .numerics import inverse_laplace_complex


def _check(name, measured, tolerance, larger_is_failure=True, note=""):
    passed = measured <= tolerance if larger_is_failure else measured >= tolerance
    return {"name": name, "measured": float(measured),
            "tolerance": float(tolerance), "passed": bool(passed),
            **({"note": note} if note else {})}


def check_oracle_vs_analytic(fast=False):
    """Eqs.-(12)/(13) quadrature vs the truncated master-equation oracle."""
    taus = [0.5, 1.0, 2.0] if fast else [0.5, 1.0, 2.0, 5.0]
    worst = 0.0
    for p in (0.3, 0.5, 0.7):
        pars = PairParams(p=p)
        dists = integrate_master(pars, taus)
        for tau, dist in zip(taus, dists):
            d_o, _, x2_o, _ = moments_from_distribution(dist, pars)
            d_a = da.mean_separation_time(tau, pars)
            x2_a = da.second_moment_time(tau, pars)
            worst = max(worst, abs(d_a / d_o - 1.0), abs(x2_a / x2_o - 1.0))
    return _check("oracle_vs_analytic_rel", worst, 1e-5)


def check_laplace_time_consistency():
    """Talbot inversion of the Laplace moments vs the exact time formulas."""
    worst = 0.0
    for p in (0.3, 0.5, 0.7):
        pars = PairParams(p=p)
        for tau in (0.1, 0.3, 1.0, 3.0, 10.0):
            m_t = inverse_laplace_complex(
                lambda e: da.mean_position_laplace(e, pars), tau).real
            s_t = inverse_laplace_complex(
                lambda e: da.second_moment_laplace(e, pars), tau).real
            worst = max(worst,
                        abs(m_t - da.mean_position_time(tau, pars)),
                        abs(s_t - da.second_moment_time(tau, pars)))
    return _check("laplace_time_consistency_abs", worst, 1e-6)


def check_fredholm(n_samples=100, seed=7):
    rng = np.random.default_rng(seed)
    worst_res = 0.0
    worst_g12 = 0.0
    for _ in range(n_samples):
        p = rng.uniform(0.15, 0.85)
        theta = rng.uniform(-2.7, 2.7)
        eps = rng.uniform(0.2, 6.0)
        N1 = int(rng.integers(-2, 3))
        dN = int(rng.integers(1, 4))
        pars = PairParams(p=p, N1=N1, N2=N1 + dN)
        chk = da.verify_fredholm(theta, eps, pars)
        worst_res = max(worst_res, chk.residual_norm)
        worst_g12 = max(worst_g12, chk.gamma12_max)
    return [_check("fredholm_residual", worst_res, 1e-8),
            _check("fredholm_gamma12", worst_g12, 1e-10)]


def check_continuum_equivalence(fast=False):
    """Convolution vs closed propagator, normalization, zero flux."""
    ts = (1.0,) if fast else (0.1, 1.0, 5.0)
    worst_eq = 0.0
    worst_norm = 0.0
    worst_flux = 0.0
    for v in (-0.5, 0.0, 0.5):
        cp = ca.ContinuumParams(D=1.0, v=v, x10=0.0, x20=1.0)
        for t in ts:
            span = 3.0 * math.sqrt(2.0 * t) + 2.0 * abs(v) * t + 1.0
            xs1 = np.linspace(-span, span, 21)
            for x1 in xs1:
                for x2 in np.linspace(x1 + 1e-3, x1 + span, 21):
                    worst_eq = max(worst_eq, abs(
                        ca.propagator_convolution(x1, x2, t, cp)
                        - ca.propagator_closed(x1, x2, t, cp)))
            # normalization: int R_c dx_c = 1 analytically, so check int R_s
            from .numerics import QuadratureSpec, adaptive_quad
            hi = cp.dx0 + 8.0 * math.sqrt(2.0 * t) + 2.0 * abs(v) * t + 5.0

            def rs_vec(x):
                return np.array([ca.separation_density(xx, t, cp) for xx in np.atleast_1d(x)])

            mass, _ = adaptive_quad(rs_vec, 0.0, hi, QuadratureSpec(1e-10, 1e-9, 60))
            worst_norm = max(worst_norm, abs(mass - 1.0))
            # zero-flux residual with a second-order one-sided derivative
            h = 1e-6
            r0 = ca.separation_density(0.0, t, cp)
            r1 = ca.separation_density(h, t, cp)
            r2 = ca.separation_density(2 * h, t, cp)
            flux = cp.D * (-3 * r0 + 4 * r1 - r2) / (2 * h) + cp.v * r0
            worst_flux = max(worst_flux, abs(flux))
    return [_check("continuum_equivalence_abs", worst_eq, 1e-8),
            _check("continuum_normalization", worst_norm, 1e-6),
            _check("continuum_zero_flux", worst_flux, 1e-8)]


def check_fp_solver(fast=False):
    """Crank-Nicolson separation density vs the analytic wall profile."""
    out = []
    cp = ca.ContinuumParams(D=1.0, v=0.5, x10=0.0, x20=1.0)
    errs = {}
    for n in (500, 1000, 2000):
        grid = fp.GridSpec(x_max=12.0, n_cells=n, t_end=1.0)
        sol = fp.solve_separation_density(cp, grid)
        ref = fp.analytic_separation_profile(sol.x, 1.0, cp)
        errs[n] = float(np.max(np.abs(sol.R - ref)))
        if n == 2000:
            out.append(_check("fp_supnorm_n2000", errs[n], 1e-3))
            out.append(_check("fp_mass_step_error", sol.max_mass_step_error, 1e-8))
    order_ratio = errs[500] / errs[2000] if errs[2000] > 0 else float("inf")
    # 4x grid refinement at second order gives ~16x error reduction
    out.append(_check("fp_convergence_ratio_500_2000", order_ratio, 8.0,
                      larger_is_failure=False,
                      note="expect ~16 for clean second order"))
    if not fast:
        cpv0 = ca.ContinuumParams(D=1.0, v=0.0, x10=0.0, x20=1.0)
        sol = fp.solve_separation_density(cpv0, fp.GridSpec(12.0, 2000, 1.0))
        ref = fp.analytic_separation_profile(sol.x, 1.0, cpv0)
        out.append(_check("fp_supnorm_v0_n2000", float(np.max(np.abs(sol.R - ref))), 1e-3))
    return out


# ---------------------------------------------------------------------------
# Typo adjudications (accepted vs printed variants)
# ---------------------------------------------------------------------------

def _printed_mean_sep_v0(t, D, dx0):
    """Literal print: exponent dx0/(8Dt), erfc argument dx0 sqrt(pi/(2Dt))."""
    return (math.sqrt(8.0 * D / math.pi) * math.exp(-dx0 / (8.0 * D * t)) * math.sqrt(t)
            + dx0 - dx0 * sp.erfc(dx0 * math.sqrt(math.pi / (2.0 * D * t))))


def _printed_msd_v0(t, D, dx0):
    """Literal print: leading exponent dx0/(8Dt) (no square)."""
    z = dx0 / math.sqrt(8.0 * D * t)
    E = sp.erfc(z)
    return (2.0 * D * t * (1.0 - math.exp(-dx0 / (8.0 * D * t)) / math.pi)
            - dx0 * math.sqrt(2.0 * D * t / math.pi) * math.exp(-z * z) * sp.erf(z)
            + dx0 * dx0 / 4.0 * E * (2.0 - E))


def _wall_density_no_exp(x_s, t, cp):
    """Rejected Appendix-B variant: erfc wall term without e^{-v x_s / D}."""
    if x_s < 0:
        return 0.0
    D, v, dx0 = cp.D, cp.v, cp.dx0
    g1 = math.exp(-(x_s - dx0 + 2 * v * t) ** 2 / (8 * D * t)) / math.sqrt(8 * math.pi * D * t)
    g2 = (math.exp(v / (2 * D) * (dx0 - v * t - x_s))
          * math.exp(-(x_s + dx0) ** 2 / (8 * D * t)) / math.sqrt(8 * math.pi * D * t))
    g3 = v / (2 * D) * sp.erfc((x_s + dx0 - 2 * v * t) / math.sqrt(8 * D * t))
    return g1 + g2 + g3


def check_typo_adjudications():
    out = []
    samples = [(0.3, 1.0, 1.0), (2.0, 1.0, 1.0), (10.0, 0.5, 2.0), (1.0, 2.0, 0.5)]

    acc = rej = 0.0
    for t, D, dx0 in samples:
        cp = ca.ContinuumParams(D=D, v=0.0, x10=0.0, x20=dx0)
        ref = ca.mean_separation_cont(t, cp)
        acc = max(acc, abs(ca.mean_sep_v0(t, cp) - ref))
        rej = max(rej, abs(_printed_mean_sep_v0(t, D, dx0) - ref))
    out.append(_check("eq28_accepted_residual", acc, 1e-8,
                      note="d_v0 = sqrt(8Dt/pi) e^{-dx0^2/(8Dt)} + dx0 erf(dx0/sqrt(8Dt))"))
    out.append(_check("eq28_printed_residual", rej, 1e-2, larger_is_failure=False,
                      note="printed exponent dx0/(8Dt) and erfc(dx0 sqrt(pi/(2Dt))) rejected"))

    acc = rej = 0.0
    for t, D, dx0 in samples:
        cp = ca.ContinuumParams(D=D, v=0.0, x10=0.0, x20=dx0)
        ref = ca.msd_cont(t, cp)
        acc = max(acc, abs(ca.msd_v0(t, cp) - ref))
        rej = max(rej, abs(_printed_msd_v0(t, D, dx0) - ref))
    out.append(_check("eq29_accepted_residual", acc, 1e-8,
                      note="leading term 2Dt(1 - e^{-dx0^2/(4Dt)}/pi); exponent is "
                           "dx0^2/(4Dt), the print lacks the square"))
    out.append(_check("eq29_printed_residual", rej, 1e-2, larger_is_failure=False,
                      note="printed exponent dx0/(8Dt) rejected"))

    # Appendix-B wall term symbol: x = x_s, adjudicated by the zero-flux
    # residual and by agreement with the convolution form.
    acc_flux = rej_flux = 0.0
    h = 1e-6
    for v in (-0.5, 0.5):
        cp = ca.ContinuumParams(D=1.0, v=v, x10=0.0, x20=1.0)
        for t in (0.5, 2.0):
            def flux_of(dens):
                r0, r1, r2 = dens(0.0, t, cp), dens(h, t, cp), dens(2 * h, t, cp)
                return abs(cp.D * (-3 * r0 + 4 * r1 - r2) / (2 * h) + cp.v * r0)
            acc_flux = max(acc_flux, flux_of(ca.separation_density))
            rej_flux = max(rej_flux, flux_of(_wall_density_no_exp))
    out.append(_check("appendixB_wall_exp_accepted_flux", acc_flux, 1e-8,
                      note="x in e^{-vx/D} read as the separation x_s"))
    out.append(_check("appendixB_wall_exp_rejected_flux", rej_flux, 1e-2,
                      larger_is_failure=False,
                      note="dropping the factor violates the zero-flux wall"))

    # Fredholm system diagonal: (1 - a33) accepted, printed (1 + a33) rejected.
    rng = np.random.default_rng(11)
    acc = rej = 0.0
    for _ in range(40):
        pars = PairParams(p=rng.uniform(0.2, 0.8), N1=0, N2=int(rng.integers(1, 4)))
        theta = rng.uniform(-2.5, 2.5)
        eps = rng.uniform(0.3, 4.0)
        alpha, beta = da._fredholm_coefficients(theta, eps, pars)
        g3 = da._gamma3_closed(theta, eps, pars)
        gamma = np.array([0.0, 0.0, g3])
        M_acc = np.eye(3, dtype=complex) - alpha
        M_rej = M_acc.copy()
        M_rej[2, 2] = 1.0 + alpha[2, 2]
        acc = max(acc, float(np.max(np.abs(M_acc @ gamma - beta))))
        rej = max(rej, float(np.max(np.abs(M_rej @ gamma - beta))))
    out.append(_check("appendixA_diagonal_accepted_residual", acc, 1e-8,
                      note="third diagonal read as (1 - a33)"))
    out.append(_check("appendixA_diagonal_printed_residual", rej, 1e-2,
                      larger_is_failure=False, note="printed (1 + a33) rejected"))

    # Characteristic-function s-exponent sign: +i(k2-k1)v accepted.
    cp = ca.ContinuumParams(D=1.0, v=0.5, x10=0.0, x20=1.0)
    acc = rej = 0.0
    for (k1, k2) in ((0.3, 0.8), (-0.6, 0.4)):
        ref = inverse_laplace_complex(
            lambda e: ca.q_laplace_fourier(k1, k2, e, cp), 1.0)
        acc = max(acc, abs(ca.q_charfn_time(k1, k2, 1.0, cp) - ref))
        rej = max(rej, abs(_charfn_printed_sign(k1, k2, 1.0, cp) - ref))
    out.append(_check("eq22_sign_accepted_residual", acc, 1e-6,
                      note="s-integrand exponent +(i(k2-k1)v + (D/2)(k2-k1)^2)s"))
    out.append(_check("eq22_sign_printed_residual", rej, 1e-2,
                      larger_is_failure=False,
                      note="printed -(i(k2-k1)v - (D/2)(k2-k1)^2)s rejected"))
    return out


def _charfn_printed_sign(k1, k2, t, cp):
    """Characteristic function with the printed (rejected) ikv sign."""
    from .numerics import QuadratureSpec, adaptive_quad
    D, v, dx0, x10 = cp.D, cp.v, cp.dx0, cp.x10
    K, k = k1 + k2, k2 - k1
    pref = np.exp(-1j * k * v * t - 0.5 * D * (K * K + k * k) * t)
    grow = -1j * k * v + 0.5 * D * k * k
    spec = QuadratureSpec(1e-12, 1e-10, 60)

    def f_re(u):
        s = u * u
        return (ca._wall_source(s, D, v, dx0) * np.exp(grow * s) * 2.0 * u).real

    def f_im(u):
        s = u * u
        return (ca._wall_source(s, D, v, dx0) * np.exp(grow * s) * 2.0 * u).imag

    re, _ = adaptive_quad(f_re, 0.0, math.sqrt(t), spec)
    im, _ = adaptive_quad(f_im, 0.0, math.sqrt(t), spec)
    return complex(pref * (np.exp(1j * dx0 * k2)
                           + 1j * math.sqrt(D / 2.0) * np.exp(1j * dx0 * K / 2.0)
                           * k * (re + 1j * im)) * np.exp(1j * x10 * K))


def run_battery(fast=False):
    """Full verification battery; returns (checks, all_passed)."""
    checks = [check_oracle_vs_analytic(fast=fast),
              check_laplace_time_consistency()]
    checks += check_fredholm(n_samples=30 if fast else 100)
    checks += check_continuum_equivalence(fast=fast)
    checks += check_fp_solver(fast=fast)
    checks += check_typo_adjudications()
    return checks, all(c["passed"] for c in checks)
