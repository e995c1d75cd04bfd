"""Numerical kernels: scaled modified Bessel functions, erfc, adaptive
Gauss-Kronrod quadrature, and a fixed-Talbot inverse Laplace transform.

The Talbot inverter is a verification tool only; production formulas never
go through it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import special as sp


class QuadratureError(RuntimeError):
    """Adaptive quadrature failed; carries the partial estimate."""

    def __init__(self, msg, value, error):
        super().__init__(msg)
        self.value = value
        self.error = error


class InversionError(RuntimeError):
    """Talbot inversion did not reach the requested accuracy."""


@dataclass(frozen=True)
class QuadratureSpec:
    abs_tol: float = 1e-12
    rel_tol: float = 1e-10
    max_depth: int = 50

    def __post_init__(self):
        if self.abs_tol <= 0 or self.rel_tol <= 0:
            raise ValueError("quadrature tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be >= 1")


def bessel_i_scaled(order: int, x: float) -> float:
    """Exponentially scaled modified Bessel function e^(-x) I_order(x).

    Only orders 0 and 1 are supported; x must be non-negative.  The scaled
    form keeps integrands like e^(-4s) I_1(8 sqrt(p(1-p)) s) finite at
    large s.
    """
    if order not in (0, 1):
        raise ValueError(f"order must be 0 or 1, got {order}")
    if x < 0:
        raise ValueError(f"x must be >= 0, got {x}")
    return float(sp.i0e(x) if order == 0 else sp.i1e(x))


def bessel_i1_scaled_over_x(x):
    """e^(-x) I_1(x) / x, stable at x = 0 (limit 1/2).  Vectorized."""
    x = np.asarray(x, dtype=float)
    small = x < 1e-6
    safe = np.where(small, 1.0, x)
    out = np.where(small, 0.5 - x / 2 + 5 * x * x / 16, sp.i1e(x) / safe)
    return out if out.ndim else float(out)


def erfc(x: float) -> float:
    """Complementary error function, 1 - erf(x)."""
    return math.erfc(x)


# Gauss-Kronrod 15-point nodes on [-1, 1]; 7-point Gauss weights embedded.
_GK_NODES = np.array([
    -0.991455371120813, -0.949107912342759, -0.864864423359769,
    -0.741531185599394, -0.586087235467691, -0.405845151377397,
    -0.207784955007898, 0.0,
    0.207784955007898, 0.405845151377397, 0.586087235467691,
    0.741531185599394, 0.864864423359769, 0.949107912342759,
    0.991455371120813,
])
_GK_WK = np.array([
    0.022935322010529, 0.063092092629979, 0.104790010322250,
    0.140653259715525, 0.169004726639267, 0.190350578064785,
    0.204432940075298, 0.209482141084728,
    0.204432940075298, 0.190350578064785, 0.169004726639267,
    0.140653259715525, 0.104790010322250, 0.063092092629979,
    0.022935322010529,
])
_GK_WG = np.array([
    0.129484966168870, 0.279705391489277, 0.381830050505119,
    0.417959183673469, 0.381830050505119, 0.279705391489277,
    0.129484966168870,
])


def _gk15(f, a, b):
    h = 0.5 * (b - a)
    x = a + h * (_GK_NODES + 1.0)
    y = np.asarray(f(x), dtype=float)
    k = h * float(_GK_WK @ y)
    g = h * float(_GK_WG @ y[1::2])
    # standard QUADPACK-style rescaled error estimate, floored to |K-G|
    diff = abs(k - g)
    scale = float(_GK_WK @ np.abs(y - np.mean(y))) * h
    if scale > 0 and diff > 0:
        err = scale * min(1.0, (200.0 * diff / scale) ** 1.5)
        err = max(err, diff)
    else:
        err = diff
    return k, err


def adaptive_quad(f: Callable, lo: float, hi: float,
                  spec: QuadratureSpec = QuadratureSpec()) -> tuple[float, float]:
    """Adaptive Gauss-Kronrod (15-point) integration of f over [lo, hi].

    f must accept a numpy array of abscissae and return array values, finite
    on (lo, hi].  Returns (value, error_estimate); raises QuadratureError
    (carrying the partial estimate) if max_depth bisections cannot meet
    max(abs_tol, rel_tol*|value|).
    """
    if hi == lo:
        return 0.0, 0.0
    v0, e0 = _gk15(f, lo, hi)
    # worklist of (error, a, b, value, depth); split the worst interval
    work = [(e0, lo, hi, v0, 0)]
    for _ in range(50000):
        total_v = sum(w[3] for w in work)
        total_e = sum(w[0] for w in work)
        tol = max(spec.abs_tol, spec.rel_tol * abs(total_v))
        if total_e <= tol:
            return total_v, total_e
        work.sort(key=lambda w: w[0])
        e, a, b, v, depth = work.pop()
        if depth >= spec.max_depth:
            raise QuadratureError(
                f"quadrature max_depth={spec.max_depth} exceeded on "
                f"[{a!r}, {b!r}]; partial value {total_v!r} +- {total_e!r}",
                total_v, total_e)
        mid = 0.5 * (a + b)
        vl, el = _gk15(f, a, mid)
        vr, er = _gk15(f, mid, b)
        work.append((el, a, mid, vl, depth + 1))
        work.append((er, mid, b, vr, depth + 1))
    raise QuadratureError("quadrature interval budget exhausted",
                          sum(w[3] for w in work), sum(w[0] for w in work))


def _talbot_nodes(t, M):
    r = 2.0 * M / (5.0 * t)
    theta = np.arange(1, M) * np.pi / M
    s = r * theta * (1.0 / np.tan(theta) + 1j)
    sigma = theta + (theta / np.tan(theta) - 1.0) / np.tan(theta)
    return r, s, sigma


def inverse_laplace_complex(fhat: Callable, t: float, M: int = 36) -> complex:
    """Fixed-Talbot inversion over the full contour (no conjugate-symmetry
    assumption, so complex-valued time functions are allowed).

    fhat must accept a complex numpy array and be analytic to the right of
    the contour; branch cuts must lie on the negative real axis (evaluate
    square roots of quadratics in factored form).
    """
    if t <= 0:
        raise ValueError("t must be > 0")
    r, s, sigma = _talbot_nodes(t, M)
    total = 0.5 * np.asarray(fhat(np.array([r + 0j])))[0] * np.exp(r * t)
    total = total + 0.5 * np.sum(np.exp(t * s) * np.asarray(fhat(s)) * (1 + 1j * sigma))
    sc = np.conj(s)
    total = total + 0.5 * np.sum(np.exp(t * sc) * np.asarray(fhat(sc)) * (1 - 1j * sigma))
    return complex(total * r / M)


def inverse_laplace(fhat: Callable, t: float, tol: float = 1e-8, M: int = 36) -> float:
    """Talbot inversion of a real-valued transform at time t > 0.

    The result of M and M-6 node counts must agree within tol (relative to
    max(1, |f|)); otherwise InversionError reports the discrepancy.  The
    consistency check flags singularities near the contour scale 2M/(5t);
    analyticity right of the contour remains the caller's obligation.
    """
    f1 = inverse_laplace_complex(fhat, t, M=M)
    f2 = inverse_laplace_complex(fhat, t, M=M - 6)
    delta = abs(f1 - f2)
    if delta > tol * max(1.0, abs(f1)):
        raise InversionError(
            f"Talbot inversion unstable at t={t}: |f_M - f_(M-6)| = {delta:.3e} "
            f"exceeds tol={tol:.1e}; singularity structure likely violates "
            "the contour assumptions")
    return f1.real


def sqrt_shifted_quadratic(eps, b, c):
    """sqrt((eps+b)^2 - c^2) = sqrt(eps+b-c) * sqrt(eps+b+c) for c >= 0.

    Factored so the branch cuts sit on the real axis left of c-b; safe to
    evaluate on a Talbot contour.  Works for real or complex eps arrays.
    """
    return np.sqrt(eps + b - c) * np.sqrt(eps + b + c)
