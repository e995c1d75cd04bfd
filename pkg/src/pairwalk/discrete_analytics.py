"""Exact analytics for the discrete two-walker model: Laplace-domain
generating functions, marginal moments, Bessel-integral time-domain moments,
asymptotic and short-time regimes, and the Fredholm-system verifier.

All Laplace-domain evaluators accept real or complex (array) frequency
arguments so they can be fed to the Talbot inverter; square roots of
quadratics are evaluated in factored form to keep branch cuts on the
negative real axis.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .model_core import PairParams
from .numerics import (QuadratureSpec, adaptive_quad, bessel_i1_scaled_over_x,
                       sqrt_shifted_quadratic)

_P_TOL = 1e-12


class RegimeLabel(enum.Enum):
    """Long-time behaviour class set by the sign of p - 1/2."""
    TOWARD = "toward"      # p > 1/2: walkers drift together, d saturates
    UNBIASED = "unbiased"  # p = 1/2
    APART = "apart"        # p < 1/2: ballistic separation


def regime_of(p: float) -> RegimeLabel:
    if abs(p - 0.5) <= _P_TOL:
        return RegimeLabel.UNBIASED
    return RegimeLabel.TOWARD if p > 0.5 else RegimeLabel.APART


@dataclass(frozen=True)
class LaplacePoint:
    """Laplace frequency eps and its dimensionless form Z = eps/(4F)."""
    eps: complex
    Z: complex

    @classmethod
    def from_eps(cls, eps, F: float = 1.0) -> "LaplacePoint":
        return cls(eps=eps, Z=eps / (4.0 * F))


def cos_p(theta, p):
    """Biased cosine p e^{i theta} + (1-p) e^{-i theta}; cos at p = 1/2."""
    return p * np.exp(1j * np.asarray(theta)) + (1.0 - p) * np.exp(-1j * np.asarray(theta))


def exp_u(theta: float, Z, p: float):
    """e^u with the principal branch, real and >= 1 for real Z >= 0.

    Defined by e^u = (Z + 1 + sqrt((Z+1)^2 - 4p(1-p)cos^2(theta/2)))
                     / (2 sqrt(p(1-p)) |cos(theta/2)|).
    """
    c = math.cos(theta / 2.0)
    if abs(c) < 1e-14:
        raise ValueError(f"exp_u singular: cos(theta/2) = 0 at theta = {theta}")
    w = 2.0 * math.sqrt(p * (1.0 - p)) * abs(c)
    S = sqrt_shifted_quadratic(np.asarray(Z), 1.0, w)
    return (np.asarray(Z) + 1.0 + S) / w


def gf_laplace_general(phi: float, psi: float, eps, params: PairParams):
    """Laplace-transformed generating function for an arbitrary start N1 < N2.

    Via the degenerate-kernel solution; the cos((phi+psi)/2) prefactors
    enter unsigned-squared only through e^u, and literally elsewhere.
    """
    p = params.p
    F = params.F
    dN = params.delta_n
    theta = phi + psi
    eps = np.asarray(eps, dtype=complex)
    Z = eps / (4.0 * F)
    eu = exp_u(theta, Z, p)
    c = math.cos(theta / 2.0)
    r = p / (1.0 - p)
    d1 = eps + 2.0 * F * (2.0 - cos_p(phi, p) - cos_p(psi, 1.0 - p))
    d2 = eu * c - math.sqrt(r)
    if np.any(np.abs(d1) < 1e-13):
        raise ValueError("singular denominator: eps + 2F(2 - cos_p(phi) - cos_(1-p)(psi)) = 0")
    if np.any(np.abs(d2) < 1e-13):
        raise ValueError("singular denominator: e^u cos((phi+psi)/2) - sqrt(p/(1-p)) = 0")
    num = (np.exp(1j * dN * psi) * c
           * (eu - eu ** (1 - dN) * np.exp(1j * dN * (phi - psi) / 2.0) * r ** (dN / 2.0))
           + eu ** (1 - dN) * np.exp(1j * psi) * np.exp(1j * (dN - 1) * (psi + phi) / 2.0)
           * r ** (dN / 2.0)
           - np.exp(1j * dN * psi) * math.sqrt(r))
    out = np.exp(1j * params.N1 * (phi + psi)) * num / (d1 * d2)
    return complex(out) if out.ndim == 0 else out


def _R_factor(theta, Z, p):
    w = 2.0 * math.sqrt(p * (1.0 - p)) * abs(math.cos(theta / 2.0))
    return Z + 1.0 - sqrt_shifted_quadratic(np.asarray(Z), 1.0, w)


def gf_laplace_adjacent(phi: float, psi: float, eps, params: PairParams):
    """Adjacent-start ((N1,N2) = (0,1)) generating function in Laplace domain.

    Valid on the principal domain phi + psi in (-pi, pi); outside it the
    general evaluator is the one that agrees with the dynamics.
    """
    if (params.N1, params.N2) != (0, 1):
        raise ValueError("adjacent form requires (N1, N2) = (0, 1)")
    p = params.p
    F = params.F
    theta = phi + psi
    eps = np.asarray(eps, dtype=complex)
    Z = eps / (4.0 * F)
    c = abs(math.cos(theta / 2.0))
    R = _R_factor(theta, Z, p)
    den1 = 4.0 * F * (Z + 1.0 - 0.5 * (cos_p(phi, p) + cos_p(psi, 1.0 - p)))
    den2 = R - 2.0 * (1.0 - p) * math.cos(theta / 2.0) ** 2
    out = (np.exp(1j * psi) * c / den1
           * (R * np.exp(1j * (phi - psi) / 2.0) - 2.0 * (1.0 - p) * c) / den2)
    return complex(out) if out.ndim == 0 else out


def marginal_gf_laplace(phi: float, eps, params: PairParams):
    """Left-walker marginal generating function, right walker traced out."""
    if not -math.pi < phi < math.pi:
        raise ValueError(f"phi must lie in (-pi, pi), got {phi}")
    if (params.N1, params.N2) != (0, 1):
        raise ValueError("marginal form requires (N1, N2) = (0, 1)")
    p = params.p
    F = params.F
    eps = np.asarray(eps, dtype=complex)
    Z = eps / (4.0 * F)
    c = math.cos(phi / 2.0)
    R = _R_factor(phi, Z, p)
    out = (c / (4.0 * F * (Z + 0.5 - 0.5 * cos_p(phi, p)))
           * (R * np.exp(1j * phi / 2.0) - 2.0 * (1.0 - p) * c)
           / (R - 2.0 * (1.0 - p) * c * c))
    return complex(out) if out.ndim == 0 else out


def _sqrt_moment(eps, params):
    # sqrt(eps^2 + 8F eps + 16F^2(1-2p)^2), factored about -4F
    B = 8.0 * params.F * math.sqrt(params.p * (1.0 - params.p))
    return sqrt_shifted_quadratic(eps, 4.0 * params.F, B)


def _pack_like(out, eps_in):
    if np.ndim(out):
        return out
    return complex(out) if np.iscomplexobj(np.asarray(eps_in)) else float(out.real)


def mean_position_laplace(eps, params: PairParams):
    """Laplace transform of the left-walker mean position, (0,1) start."""
    if (params.N1, params.N2) != (0, 1):
        raise ValueError("moment formulas require (N1, N2) = (0, 1)")
    a, F, p = params.a, params.F, params.p
    e = np.asarray(eps, dtype=complex)
    sq = _sqrt_moment(e, params)
    out = a / (4.0 * e) * (1.0 - sq / e) + a * F * (2.0 * p - 1.0) / e ** 2
    return _pack_like(out, eps)


def second_moment_laplace(eps, params: PairParams):
    """Laplace transform of the left-walker second moment, (0,1) start."""
    if (params.N1, params.N2) != (0, 1):
        raise ValueError("moment formulas require (N1, N2) = (0, 1)")
    a, F, p = params.a, params.F, params.p
    e = np.asarray(eps, dtype=complex)
    sq = _sqrt_moment(e, params)
    out = (a * a / (4.0 * e) * (1.0 + 8.0 * F / e - sq / e)
           + a * a * (1.0 - 2.0 * p) / e ** 3
           * (4.0 * F * F * (1.0 - 2.0 * p) + F * sq))
    return _pack_like(out, eps)


_QUAD = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11, max_depth=60)


def _bessel_kernel(s, p):
    """e^{-4s} I_1(8 sqrt(p(1-p)) s) / s, vectorized, finite at s = 0."""
    B = 8.0 * math.sqrt(p * (1.0 - p))
    s = np.asarray(s, dtype=float)
    return np.exp(-(4.0 - B) * s) * B * bessel_i1_scaled_over_x(B * s)


def mean_position_time(tau: float, params: PairParams,
                       spec: QuadratureSpec = _QUAD) -> float:
    """Exact left-walker mean position at dimensionless time tau = F t."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if (params.N1, params.N2) != (0, 1):
        raise ValueError("moment formulas require (N1, N2) = (0, 1)")
    if tau == 0.0:
        return 0.0
    a, p = params.a, params.p
    B = 8.0 * math.sqrt(p * (1.0 - p))
    val, _ = adaptive_quad(lambda s: (tau - s) * _bessel_kernel(s, p), 0.0, tau, spec)
    return a / 4.0 * (4.0 * (2.0 * p - 2.0) * tau + B * val)


def second_moment_time(tau: float, params: PairParams,
                       spec: QuadratureSpec = _QUAD) -> float:
    """Exact left-walker second moment at dimensionless time tau = F t."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    if (params.N1, params.N2) != (0, 1):
        raise ValueError("moment formulas require (N1, N2) = (0, 1)")
    if tau == 0.0:
        return 0.0
    a, p = params.a, params.p
    B = 8.0 * math.sqrt(p * (1.0 - p))
    q = 2.0 * (1.0 - 2.0 * p)

    def f(s):
        w = tau - s
        return (w - q * w * w) * _bessel_kernel(s, p)

    val, _ = adaptive_quad(f, 0.0, tau, spec)
    return a * a * ((2.0 - 2.0 * p) * tau + q * (2.0 - 2.0 * p) * tau * tau
                    + (B / 4.0) * val)


def mean_separation_time(tau: float, params: PairParams) -> float:
    """d(tau) = a - 2<x1(tau)> for the (0,1) start (mirror antisymmetry)."""
    return params.a - 2.0 * mean_position_time(tau, params)


def msd_time(tau: float, params: PairParams) -> float:
    """Mean-square displacement <x1^2> - <x1>^2 of either walker."""
    m1 = mean_position_time(tau, params)
    return second_moment_time(tau, params) - m1 * m1


def bessel_laplace_identities(p: float) -> tuple[float, float, float]:
    """Closed Laplace transforms of t^n I_1(8 sqrt(p(1-p)) t) at frequency 4,
    for n = -1, 0, 1.  Divergent at p = 1/2 for n = 0, 1."""
    if abs(p - 0.5) <= _P_TOL:
        raise ValueError("transforms for n = 0, 1 diverge at p = 1/2")
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0,1)")
    root = math.sqrt(p * (1.0 - p))
    ab = abs(1.0 - 2.0 * p)
    v_m1 = (1.0 - ab) / (2.0 * root)
    v_0 = (1.0 - ab) / (8.0 * root * ab)
    v_1 = root / (8.0 * ab ** 3)
    return v_m1, v_0, v_1


def asymptotic_moments(p: float, tau: float, a: float = 1.0
                       ) -> tuple[float, float, float]:
    """Long-time (tau >> 1) separation, second moment and MSD by regime."""
    if tau <= 0:
        raise ValueError("tau must be > 0")
    regime = regime_of(p)
    if regime is RegimeLabel.TOWARD:
        d = p / (2.0 * p - 1.0) * a
        x2 = 2.0 * a * a * (1.0 - p) * tau
        msd = 2.0 * a * a * (1.0 - p) * tau
    elif regime is RegimeLabel.UNBIASED:
        d = math.sqrt(8.0 / math.pi) * a * math.sqrt(tau)
        x2 = 2.0 * a * a * tau
        msd = 2.0 * a * a * (1.0 - 1.0 / math.pi) * tau
    else:
        d = 4.0 * a * (1.0 - 2.0 * p) * tau
        x2 = 4.0 * a * a * (1.0 - 2.0 * p) ** 2 * tau * tau
        msd = 2.0 * a * a * tau
    return d, x2, msd


def short_time_moments(p: float, tau: float, a: float = 1.0) -> tuple[float, float]:
    """Leading linear-in-tau behaviour: d = a(1 + 4(1-p)tau), x2 = 2a^2(1-p)tau."""
    if tau < 0:
        raise ValueError("tau must be >= 0")
    return a * (1.0 + 4.0 * (1.0 - p) * tau), 2.0 * a * a * (1.0 - p) * tau


def divergence_timescale(p: float, threshold: float = 0.01,
                         tau_floor: float = 1e-4, tau_cap: float = 1e4) -> float:
    """Smallest tau where |msd_p(tau)/msd_(1/2)(tau) - 1| exceeds threshold.

    Geometric scan from tau_floor followed by bisection; returns tau_floor
    when the curves already differ there (which happens for |p - 1/2|
    greater than about threshold/2, the short-time ratio being 2(1-p)).
    """
    if threshold <= 0:
        raise ValueError("threshold must be > 0 (0 is degenerate: tau' -> 0+)")
    if abs(p - 0.5) <= _P_TOL:
        raise ValueError("p = 1/2 never diverges from itself")
    if not 0.0 < p < 1.0:
        raise ValueError("p must be in (0,1)")
    pars_p = PairParams(p=p)
    pars_h = PairParams(p=0.5)

    def excess(tau):
        return abs(msd_time(tau, pars_p) / msd_time(tau, pars_h) - 1.0) - threshold

    if excess(tau_floor) > 0:
        return tau_floor
    lo = tau_floor
    hi = None
    tau = tau_floor
    while tau < tau_cap:
        tau *= 1.6
        if excess(tau) > 0:
            hi = tau
            break
        lo = tau
    if hi is None:
        raise ValueError(f"no divergence beyond {threshold} up to tau = {tau_cap}")
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        if excess(mid) > 0:
            hi = mid
        else:
            lo = mid
        if hi / lo < 1.0 + 1e-10:
            break
    return hi


# ---------------------------------------------------------------------------
# Fredholm (degenerate kernel) system verification
# ---------------------------------------------------------------------------

def _fredholm_kernel_functions(theta, eps, params):
    """g, a_i, b_i of the single-variable Fredholm equation at fixed theta."""
    p, F, N1, dN = params.p, params.F, params.N1, params.delta_n

    def den(phi):
        return eps + 2.0 * F * (2.0 - cos_p(phi, p) - cos_p(theta - phi, 1.0 - p))

    g = lambda phi: np.exp(1j * (theta - phi) * dN) * np.exp(1j * N1 * theta) / den(phi)
    a1 = lambda phi: 2.0 * F * (2.0 - cos_p(phi, p) - cos_p(theta - phi, 1.0 - p)) / den(phi)
    a2 = lambda phi: 2.0 * F * (1.0 - p) * (2.0 * np.exp(1j * phi) - (1.0 + np.exp(1j * theta))) / den(phi)
    a3 = lambda phi: 2.0 * F * p * (2.0 * np.exp(-1j * phi) - (1.0 + np.exp(-1j * theta))) / den(phi)
    b1 = lambda phi: np.ones_like(np.asarray(phi, dtype=complex)) / (2.0 * np.pi)
    b2 = lambda phi: np.exp(-1j * phi) / (2.0 * np.pi)
    b3 = lambda phi: np.exp(1j * phi) / (2.0 * np.pi)
    return g, (a1, a2, a3), (b1, b2, b3)


def _fredholm_coefficients(theta: float, eps: complex, params: PairParams):
    """Closed-form alpha_ij and beta_i of the projected 3x3 system."""
    p, F, N1, dN = params.p, params.F, params.N1, params.delta_n
    Z = eps / (4.0 * F)
    eu = complex(exp_u(theta, Z, p))
    u = np.log(eu)
    c = math.cos(theta / 2.0)
    sh = np.sinh(u)
    r = p / (1.0 - p)
    em = 1.0 / eu

    pref = np.exp(1j * N1 * theta) / (8.0 * F * (1.0 - p) * c * sh)
    beta = np.array([
        pref * np.exp(1j * dN * theta / 2.0) * eu ** (-dN) * r ** ((dN - 1) / 2.0),
        pref * np.exp(1j * (dN - 1) * theta / 2.0) * eu ** (-(dN + 1)) * r ** (dN / 2.0),
        pref * np.exp(1j * (dN + 1) * theta / 2.0) * eu ** (-(dN - 1)) * r ** ((dN - 2) / 2.0),
    ])
    den = 2.0 * c * sh
    ch = np.cosh(u)
    alpha = np.empty((3, 3), dtype=complex)
    alpha[0, 0] = ((p * (1.0 - p)) ** -0.5 - 2.0 * em * c) / den
    alpha[1, 0] = np.exp(-1j * theta / 2.0) * em * (1.0 / (1.0 - p) - 2.0 * math.sqrt(r) * c * ch) / den
    alpha[2, 0] = np.exp(1j * theta / 2.0) * em * (1.0 / p - 2.0 * c * ch / math.sqrt(r)) / den
    alpha[0, 1] = np.exp(1j * theta / 2.0) * (em / r - c / math.sqrt(r)) / den
    alpha[1, 1] = (1.0 / math.sqrt(r) - em * c) / den
    alpha[2, 1] = np.exp(1j * theta) * em * (em / math.sqrt(r) - c) / (r * den)
    alpha[0, 2] = np.exp(-1j * theta / 2.0) * (em * r - math.sqrt(r) * c) / den
    alpha[1, 2] = r * np.exp(-1j * theta) * em * (em * math.sqrt(r) - c) / den
    alpha[2, 2] = (math.sqrt(r) - em * c) / den
    return alpha, beta


def _gamma3_closed(theta: float, eps: complex, params: PairParams) -> complex:
    p, F, N1, dN = params.p, params.F, params.N1, params.delta_n
    Z = eps / (4.0 * F)
    eu = complex(exp_u(theta, Z, p))
    r = p / (1.0 - p)
    c = math.cos(theta / 2.0)
    num = (np.exp(1j * N1 * theta) * np.exp(1j * (dN + 1) * theta / 2.0)
           * eu ** (-dN) * r ** ((dN - 2) / 2.0))
    den = 4.0 * F * ((1.0 - p) * c - math.sqrt(p * (1.0 - p)) / eu)
    return complex(num / den)


@dataclass(frozen=True)
class FredholmCheck:
    """Residuals of (I - alpha) gamma = beta under the closed-form gamma."""
    residuals: np.ndarray
    residual_norm: float
    gamma_solved: np.ndarray
    gamma_closed3: complex
    gamma12_max: float
    gamma3_distance: float


def verify_fredholm(theta: float, eps: complex, params: PairParams) -> FredholmCheck:
    """Check that gamma = (0, 0, gamma3) solves the projected 3x3 system.

    The system is (I - alpha) gamma = beta with alpha_ij and beta_i from
    their closed forms (the uniform minus-sign diagonal; the lone plus-sign
    printing of the (3,3) entry fails this check by ~1e-1).  Also solves the
    system directly and reports how far that solution is from the closed one.
    """
    alpha, beta = _fredholm_coefficients(theta, eps, params)
    M = np.eye(3, dtype=complex) - alpha
    g3 = _gamma3_closed(theta, eps, params)
    gamma = np.array([0.0, 0.0, g3], dtype=complex)
    residuals = M @ gamma - beta
    solved = np.linalg.solve(M, beta)
    return FredholmCheck(
        residuals=residuals,
        residual_norm=float(np.max(np.abs(residuals))),
        gamma_solved=solved,
        gamma_closed3=g3,
        gamma12_max=float(max(abs(solved[0]), abs(solved[1]))),
        gamma3_distance=float(abs(solved[2] - g3)),
    )
