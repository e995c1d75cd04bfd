"""Continuum limit of the two-walker process: Fourier-Laplace propagator,
characteristic function, joint density in convolution and closed form, the
wall-interaction integral, and mean-separation / MSD formulas with their
v = 0 closed forms and long-time limits.

Conventions: D is each walker's diffusion constant, v > 0 drifts the
walkers toward each other, Delta x0 = x20 - x10 > 0 is the initial gap.
The separation coordinate x_s = x2 - x1 diffuses with constant 2D and
advects at -2v against a zero-flux wall at x_s = 0.

Two print corrections are applied, both adjudicated by quadrature:
the v = 0 closed forms carry exponents Delta x0^2/(8Dt) (mean separation)
and Delta x0^2/(4Dt) (leading MSD term), and the wall term of the closed
propagator reads e^{-v x_s / D}.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import special as sp

from .numerics import QuadratureSpec, adaptive_quad

_QUAD = QuadratureSpec(abs_tol=1e-13, rel_tol=1e-11, max_depth=60)


@dataclass(frozen=True)
class ContinuumParams:
    """Continuum model parameters; x10 < x20."""
    D: float
    v: float
    x10: float = 0.0
    x20: float = 1.0

    def __post_init__(self):
        if self.D <= 0:
            raise ValueError(f"D must be > 0, got {self.D}")
        if self.x10 >= self.x20:
            raise ValueError(f"need x10 < x20, got {self.x10} >= {self.x20}")

    @property
    def dx0(self) -> float:
        return self.x20 - self.x10

    @property
    def xc0(self) -> float:
        return 0.5 * (self.x10 + self.x20)


@dataclass(frozen=True)
class SeparationFrame:
    """Separation/centroid coordinates of a pair configuration."""
    x_s: float
    x_c: float

    @classmethod
    def from_pair(cls, x1: float, x2: float) -> "SeparationFrame":
        return cls(x_s=x2 - x1, x_c=0.5 * (x1 + x2))


def bridge(p: float, F: float, a: float) -> tuple[float, float]:
    """(D, v) reached by the lattice model under the diffusive scaling:
    D = a^2 F and v = 2 a F (2p - 1)."""
    if not 0.0 < p < 1.0 or F <= 0 or a <= 0:
        raise ValueError("need 0 < p < 1, F > 0, a > 0")
    return a * a * F, 2.0 * a * F * (2.0 * p - 1.0)


def q_laplace_fourier(k1: float, k2: float, eps, cp: ContinuumParams):
    """Joint propagator in Fourier-Laplace domain."""
    D, v, dx0, x10 = cp.D, cp.v, cp.dx0, cp.x10
    e = np.asarray(eps, dtype=complex)
    K = k1 + k2
    k = k2 - k1
    den = e + 1j * k * v + 0.5 * D * (K * K + k * k)
    b = v / math.sqrt(2.0 * D)
    S = np.sqrt(e + b * b + 0.5 * D * K * K)
    out = (np.exp(1j * dx0 * k2) * np.exp(1j * x10 * K) / den
           + 1j * math.sqrt(D / 2.0) * k * np.exp(1j * dx0 * K / 2.0)
           * np.exp(1j * x10 * K) / den
           * np.exp(dx0 / math.sqrt(2.0 * D) * (b - S)) / (S - b))
    return complex(out) if out.ndim == 0 else out


def _wall_source(s, D, v, dx0):
    """Bracket common to the interaction terms: the first-contact density
    convolved against the drifting wall, as a function of s > 0."""
    s = np.asarray(s, dtype=float)
    out = np.zeros_like(s)
    pos = s > 0
    ss = s[pos]
    out[pos] = (np.exp(-(dx0 - 2.0 * v * ss) ** 2 / (8.0 * D * ss)) / np.sqrt(np.pi * ss)
                + v / math.sqrt(2.0 * D) * sp.erfc((dx0 - 2.0 * v * ss) / np.sqrt(8.0 * D * ss)))
    return out


def q_charfn_time(k1: float, k2: float, t: float, cp: ContinuumParams) -> complex:
    """Joint characteristic function at time t (Laplace inversion of the
    Fourier-Laplace propagator; the s-exponent carries +i(k2-k1)v)."""
    if t < 0:
        raise ValueError("t must be >= 0")
    D, v, dx0, x10 = cp.D, cp.v, cp.dx0, cp.x10
    K = k1 + k2
    k = k2 - k1
    if t == 0.0:
        return complex(np.exp(1j * dx0 * k2) * np.exp(1j * x10 * K))
    pref = np.exp(-1j * k * v * t - 0.5 * D * (K * K + k * k) * t)
    grow = 1j * k * v + 0.5 * D * k * k

    def f_re(u):
        s = u * u
        z = _wall_source(s, D, v, dx0) * np.exp(grow * s) * 2.0 * u
        return z.real

    def f_im(u):
        s = u * u
        z = _wall_source(s, D, v, dx0) * np.exp(grow * s) * 2.0 * u
        return z.imag

    re, _ = adaptive_quad(f_re, 0.0, math.sqrt(t), _QUAD)
    im, _ = adaptive_quad(f_im, 0.0, math.sqrt(t), _QUAD)
    integral = re + 1j * im
    return complex(pref * (np.exp(1j * dx0 * k2)
                           + 1j * math.sqrt(D / 2.0) * np.exp(1j * dx0 * K / 2.0) * k * integral)
                   * np.exp(1j * x10 * K))


def interaction_integral(x_s: float, t: float, cp: ContinuumParams) -> float:
    """Wall-interaction kernel I(x_s, t), closed form (sgn/erfc expression)."""
    if t <= 0:
        raise ValueError("t must be > 0")
    D, v, dx0 = cp.D, cp.v, cp.dx0
    sg = 1.0 if x_s >= 0 else -1.0
    ax = abs(x_s)
    term1 = ((v / (2.0 * D)) * (sg + 1.0)
             * math.exp(-v / (2.0 * D) * (ax + x_s))
             * sp.erfc((ax + dx0 - 2.0 * v * t) / math.sqrt(8.0 * D * t)))
    term2 = (sg * math.exp(v / (2.0 * D) * (dx0 - x_s - v * t))
             * math.exp(-(ax + dx0) ** 2 / (8.0 * D * t))
             / math.sqrt(2.0 * math.pi * D * t))
    return term1 + term2


def interaction_integral_quad(x_s: float, t: float, cp: ContinuumParams,
                              spec: QuadratureSpec = _QUAD) -> float:
    """I(x_s, t) by direct time-convolution quadrature (reference path)."""
    if t <= 0:
        raise ValueError("t must be > 0")
    D, v, dx0 = cp.D, cp.v, cp.dx0

    def kernel(w):
        w = np.asarray(w, dtype=float)
        out = np.zeros_like(w)
        pos = w > 0
        wp = w[pos]
        arg = x_s + 2.0 * v * wp
        out[pos] = arg * np.exp(-arg * arg / (8.0 * D * wp)) / (4.0 * D * np.sqrt(np.pi * wp ** 3))
        return out

    def left(u):   # s = u^2 near s = 0
        s = u * u
        return kernel(t - s) * _wall_source(s, D, v, dx0) * 2.0 * u

    def right(u):  # s = t - u^2 near s = t
        s = t - u * u
        return kernel(u * u) * _wall_source(s, D, v, dx0) * 2.0 * u

    h = math.sqrt(t / 2.0)
    v1, _ = adaptive_quad(left, 0.0, h, spec)
    v2, _ = adaptive_quad(right, 0.0, h, spec)
    return v1 + v2


def _centroid_gaussian(x_c, t, cp):
    return (math.exp(-(x_c - cp.xc0) ** 2 / (2.0 * cp.D * t))
            / math.sqrt(2.0 * math.pi * cp.D * t))


def separation_density(x_s: float, t: float, cp: ContinuumParams) -> float:
    """Density of the separation x_s = x2 - x1: drift against a zero-flux
    wall, image Gaussian pair plus the erfc wall term."""
    if t <= 0:
        raise ValueError("t must be > 0")
    if x_s < 0:
        return 0.0
    D, v, dx0 = cp.D, cp.v, cp.dx0
    g1 = math.exp(-(x_s - dx0 + 2.0 * v * t) ** 2 / (8.0 * D * t)) / math.sqrt(8.0 * math.pi * D * t)
    g2 = (math.exp(v / (2.0 * D) * (dx0 - v * t - x_s))
          * math.exp(-(x_s + dx0) ** 2 / (8.0 * D * t)) / math.sqrt(8.0 * math.pi * D * t))
    g3 = (v / (2.0 * D) * math.exp(-v * x_s / D)
          * sp.erfc((x_s + dx0 - 2.0 * v * t) / math.sqrt(8.0 * D * t)))
    return g1 + g2 + g3


def propagator_closed(x1: float, x2: float, t: float, cp: ContinuumParams) -> float:
    """Joint density: centroid Gaussian times the wall separation density,
    zero on and below the diagonal."""
    if t <= 0:
        raise ValueError("t must be > 0")
    if x2 < x1:
        return 0.0
    return _centroid_gaussian(0.5 * (x1 + x2), t, cp) * separation_density(x2 - x1, t, cp)


def propagator_convolution(x1: float, x2: float, t: float, cp: ContinuumParams) -> float:
    """Joint density in the convolution form: free biased Gaussian product
    plus centroid Gaussian times the wall-interaction integral."""
    if t <= 0:
        raise ValueError("t must be > 0")
    if x2 <= x1:
        return 0.0
    D, v = cp.D, cp.v
    free = (math.exp(-(x1 - cp.x10 - v * t) ** 2 / (4.0 * D * t)) / math.sqrt(4.0 * math.pi * D * t)
            * math.exp(-(x2 - cp.x20 + v * t) ** 2 / (4.0 * D * t)) / math.sqrt(4.0 * math.pi * D * t))
    inter = (math.exp(-(x1 - cp.x10 + x2 - cp.x20) ** 2 / (8.0 * D * t))
             / math.sqrt(8.0 * math.pi * D * t)
             * interaction_integral_quad(x2 - x1, t, cp))
    return free + inter


def mean_separation_cont(t: float, cp: ContinuumParams,
                         spec: QuadratureSpec = _QUAD) -> float:
    """Mean separation d(t) = <x2 - x1> by quadrature."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return cp.dx0
    D, v, dx0 = cp.D, cp.v, cp.dx0
    ec = sp.erfc((2.0 * v * t - dx0) / math.sqrt(8.0 * D * t))

    def f(u):
        s = u * u
        return ((2.0 * v * v * s + dx0 * v - 4.0 * D) / np.sqrt(8.0 * D * s)
                * np.exp(-(dx0 - 2.0 * v * s) ** 2 / (8.0 * D * s)) * 2.0 * u)

    val, _ = adaptive_quad(f, 0.0, math.sqrt(t), spec)
    return dx0 - v * t * ec - val / math.sqrt(math.pi)


def msd_cont(t: float, cp: ContinuumParams,
             spec: QuadratureSpec = _QUAD) -> float:
    """MSD of either walker by quadrature."""
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 0.0
    D, v, dx0 = cp.D, cp.v, cp.dx0
    ec = sp.erfc((2.0 * v * t - dx0) / math.sqrt(8.0 * D * t))

    def gauss(s):
        return np.exp(-(dx0 - 2.0 * v * s) ** 2 / (8.0 * D * s))

    def f1(u):
        s = u * u
        num = (v * v * (2.0 * t - s) * (2.0 * v * s + dx0)
               - 8.0 * D * v * (t - s)
               + dx0 * (2.0 * v * v * s + dx0 * v - 4.0 * D))
        return num / (4.0 * np.sqrt(2.0 * D * s)) * gauss(s) * 2.0 * u

    def f2(u):
        s = u * u
        return ((2.0 * v * v * s + dx0 * v - 4.0 * D)
                / (4.0 * np.sqrt(2.0 * D * s)) * gauss(s) * 2.0 * u)

    v1, _ = adaptive_quad(f1, 0.0, math.sqrt(t), spec)
    v2, _ = adaptive_quad(f2, 0.0, math.sqrt(t), spec)
    bracket = 0.5 * v * t * ec + v2 / math.sqrt(math.pi)
    return (2.0 * D * t - dx0 * v * t
            + 0.5 * (v * v * t * t + dx0 * v * t) * ec
            + v1 / math.sqrt(math.pi) - bracket * bracket)


def mean_sep_v0(t: float, cp: ContinuumParams) -> float:
    """Driftless mean separation, closed form (corrected exponents)."""
    if abs(cp.v) > 1e-14:
        raise ValueError("closed form requires v = 0")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return cp.dx0
    D, dx0 = cp.D, cp.dx0
    z = dx0 / math.sqrt(8.0 * D * t)
    return math.sqrt(8.0 * D * t / math.pi) * math.exp(-z * z) + dx0 * sp.erf(z)


def msd_v0(t: float, cp: ContinuumParams) -> float:
    """Driftless MSD, closed form (leading exponent Delta x0^2 / (4Dt))."""
    if abs(cp.v) > 1e-14:
        raise ValueError("closed form requires v = 0")
    if t < 0:
        raise ValueError("t must be >= 0")
    if t == 0.0:
        return 0.0
    D, dx0 = cp.D, cp.dx0
    z = dx0 / math.sqrt(8.0 * D * t)
    E = sp.erfc(z)
    return (2.0 * D * t
            - (2.0 * D * t / math.pi) * math.exp(-2.0 * z * z)
            - dx0 * math.sqrt(2.0 * D * t / math.pi) * math.exp(-z * z) * sp.erf(z)
            + dx0 * dx0 / 4.0 * E * (2.0 - E))


def asymptotic_cont(cp: ContinuumParams, t: float) -> tuple[float, float]:
    """Long-time (d, msd) by drift sign: saturation D/v, sqrt growth, or
    ballistic -2vt; MSD slope D, 2D(1 - 1/pi), or 2D."""
    if t <= 0:
        raise ValueError("t must be > 0")
    D, v = cp.D, cp.v
    if v > 0:
        return D / v, D * t
    if v == 0:
        return math.sqrt(8.0 * D * t / math.pi), 2.0 * D * (1.0 - 1.0 / math.pi) * t
    return -2.0 * v * t, 2.0 * D * t


def short_time_cont(cp: ContinuumParams, t: float) -> tuple[float, float]:
    """Small-time behaviour: d = Delta x0 - 2vt, msd = 2Dt."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return cp.dx0 - 2.0 * cp.v * t, 2.0 * cp.D * t


def marginal_moments_laplace_cont(eps, cp: ContinuumParams):
    """Laplace-domain (mean, second moment) of the left walker, x10 = 0.

    Verification-only path: invert with the Talbot tool to cross-check the
    time-domain quadratures.
    """
    if abs(cp.x10) > 1e-14:
        raise ValueError("Laplace marginals assume x10 = 0")
    D, v, dx0 = cp.D, cp.v, cp.dx0
    e = np.asarray(eps, dtype=complex)
    b = v / math.sqrt(2.0 * D)
    S = np.sqrt(e + b * b)
    w = np.exp(dx0 / math.sqrt(2.0 * D) * (b - S)) / (S - b)
    mean = v / e ** 2 - math.sqrt(D / 2.0) * w / e
    second = (2.0 * v * v / e ** 3 + 2.0 * D / e ** 2
              - (dx0 * e + 2.0 * v) * math.sqrt(D / 2.0) * w / e ** 2)
    if mean.ndim == 0:
        return complex(mean), complex(second)
    return mean, second
