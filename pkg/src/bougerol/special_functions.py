"""Closed-form analytic targets for the verification suite.

Everything here is deterministic: the arcsinh change of variable and its
derivative, log-gamma, a real-argument Gauss hypergeometric evaluator, the
heat-kernel expectation identity for the exponential Brownian functional,
the Mellin transform of that functional at an independent exponential time,
the joint Laplace-Mellin closed form for the radial part and clock of the
planar process at a subordinated level, the joint density of reflected
Brownian motion with its local time, and the asymptotic Kolmogorov CDF
used for KS p-values.

Gamma ratios are always assembled in log space and exponentiated once, so
large parameters do not overflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import gammaln

__all__ = [
    "MellinParams",
    "JointLaplaceMellinParams",
    "arg_sinh",
    "log_gamma",
    "hyp2f1",
    "bougerol_kernel_rhs",
    "mellin_exp_functional",
    "joint_laplace_mellin_closed_form",
    "joint_density_abs_bm_local_time",
    "kolmogorov_cdf",
]

_HYP2F1_MAX_TERMS = 10 ** 6


@dataclass(frozen=True)
class MellinParams:
    """Parameters for moments of the drifted exponential functional stopped
    at an independent exponential time.

    r is the moment exponent, nu the drift, p the exponential rate. The
    derived shape pair (a, b) must satisfy r < b for the moment to exist.
    """

    r: float
    nu: float
    p: float

    def __post_init__(self):
        if not (self.p > 0 and math.isfinite(self.p)):
            raise ValueError(f"rate p must be positive and finite, got {self.p}")
        if 2 * self.p + self.nu ** 2 <= 0:
            raise ValueError("2p + nu^2 must be positive")
        if self.r >= self.b:
            raise ValueError(
                f"moment exponent r={self.r} must be < b={self.b} for finiteness"
            )
        if self.r <= -1:
            raise ValueError(f"moment exponent r={self.r} must exceed -1")

    @property
    def a(self) -> float:
        return (self.nu + math.sqrt(2 * self.p + self.nu ** 2)) / 2

    @property
    def b(self) -> float:
        return (-self.nu + math.sqrt(2 * self.p + self.nu ** 2)) / 2


@dataclass(frozen=True)
class JointLaplaceMellinParams:
    """Exponent b, index mu >= 0 and level lam > 0 for the closed-form joint
    transform E[R^{-2b} exp(-mu^2 H / 2)] of the radial part and clock at a
    subordinated level.

    Both gamma arguments of the normalizing constant must be positive:
    1 + mu/2 - b > 0 and b + mu/2 + 1/2 > 0.
    """

    b: float
    mu: float
    lam: float

    def __post_init__(self):
        if self.mu < 0:
            raise ValueError(f"index mu must be >= 0, got {self.mu}")
        if not self.lam > 0:
            raise ValueError(f"level lam must be positive, got {self.lam}")
        if not 1 + self.mu / 2 - self.b > 0:
            raise ValueError("need 1 + mu/2 - b > 0")
        if not self.b + self.mu / 2 + 0.5 > 0:
            raise ValueError("need b + mu/2 + 1/2 > 0")


def arg_sinh(x):
    """Return (a, a') with a = arcsinh(x) = log(x + sqrt(1+x^2)) and
    a' = 1/sqrt(1+x^2).

    Accepts scalars or arrays; odd in a, even in a', cancellation-free for
    negative x.
    """
    x = np.asarray(x, dtype=float)
    a = np.arcsinh(x)
    a_prime = 1.0 / np.sqrt(1.0 + x * x)
    if a.ndim == 0:
        return float(a), float(a_prime)
    return a, a_prime


def log_gamma(x) -> float:
    """log Gamma(x) for x > 0."""
    xa = np.asarray(x, dtype=float)
    if np.any(xa <= 0):
        raise ValueError(f"log_gamma requires positive argument, got {x}")
    out = gammaln(xa)
    return float(out) if out.ndim == 0 else out


def hyp2f1(alpha: float, beta: float, gamma: float, z: float) -> float:
    """Gauss hypergeometric 2F1(alpha, beta; gamma; z) for real z <= 0.

    For z in (-1, 0] the defining power series is summed directly. For
    z < -1 the argument is first mapped to z/(z-1) in (0, 1) by the Pfaff
    transformation F(a,b;c;z) = (1-z)^(-a) F(a, c-b; c; z/(z-1)).
    """
    if gamma <= 0 and gamma == int(gamma):
        raise ValueError(f"gamma must not be a nonpositive integer, got {gamma}")
    if z > 0:
        raise ValueError(f"argument must satisfy z <= 0, got {z}")
    if z == 0.0:
        return 1.0
    if z <= -1.0:
        w = z / (z - 1.0)
        return (1.0 - z) ** (-alpha) * _hyp2f1_series(alpha, gamma - beta, gamma, w)
    return _hyp2f1_series(alpha, beta, gamma, z)


def _hyp2f1_series(a: float, b: float, c: float, z: float) -> float:
    # plain Gauss series; caller guarantees |z| < 1
    total = 1.0
    term = 1.0
    small_streak = 0
    for n in range(_HYP2F1_MAX_TERMS):
        term *= (a + n) * (b + n) / ((c + n) * (1.0 + n)) * z
        total += term
        if abs(term) <= 1e-16 * abs(total):
            # two consecutive negligible terms, safe for alternating sums
            small_streak += 1
            if small_streak >= 2:
                return total
        else:
            small_streak = 0
        if term == 0.0:
            return total
    raise ArithmeticError(
        f"hypergeometric series did not converge within {_HYP2F1_MAX_TERMS} terms"
    )


def bougerol_kernel_rhs(x, t):
    """Closed-form value of E[(1/sqrt(A_t)) exp(-x^2 / (2 A_t))] where A_t is
    the exponential functional of Brownian motion: (a'(x)/sqrt(t)) *
    exp(-a(x)^2 / (2t)).
    """
    t = float(t)
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    a, a_prime = arg_sinh(x)
    a = np.asarray(a, dtype=float)
    out = (np.asarray(a_prime) / math.sqrt(t)) * np.exp(-a * a / (2.0 * t))
    return float(out) if out.ndim == 0 else out


def mellin_exp_functional(params: MellinParams) -> float:
    """Moment E[X^r] of the exponential functional at an independent
    exponential time, via its beta/gamma factorization:
    2^(-r) Gamma(1+a) Gamma(1+r) Gamma(b-r) / (Gamma(1+a+r) Gamma(b)).
    """
    a, b, r = params.a, params.b, params.r
    log_val = (
        -r * math.log(2.0)
        + log_gamma(1.0 + a)
        + log_gamma(1.0 + r)
        + log_gamma(b - r)
        - log_gamma(1.0 + a + r)
        - log_gamma(b)
    )
    return math.exp(log_val)


def joint_laplace_mellin_closed_form(params: JointLaplaceMellinParams) -> float:
    """Closed form for E[R^{-2b} exp(-mu^2 H / 2)] with (R, H) the radial
    part and clock evaluated at subordinated local-time level lam.

    Equals C * F((mu+1)/2 - b, mu/2 + 1 - b; mu+1; -1/lam^2)
    / ((1+lam^2)^(2b-1/2) (lam^2)^((mu+1)/2-b)), where
    C = Gamma(b + mu/2 + 1/2) Gamma(1 + mu/2 - b) / (Gamma(1/2) Gamma(1+mu)).
    """
    b, mu, lam = params.b, params.mu, params.lam
    log_c = (
        log_gamma(b + mu / 2 + 0.5)
        + log_gamma(1.0 + mu / 2 - b)
        - log_gamma(0.5)
        - log_gamma(1.0 + mu)
    )
    lam2 = lam * lam
    hyp = hyp2f1((mu + 1) / 2 - b, mu / 2 + 1 - b, mu + 1, -1.0 / lam2)
    log_den = (2 * b - 0.5) * math.log1p(lam2) + ((mu + 1) / 2 - b) * math.log(lam2)
    return math.exp(log_c - log_den) * hyp


def joint_density_abs_bm_local_time(x, l, t):
    """Joint density at (x, l) of (|B_t|, L_t), reflected Brownian motion and
    its local time at zero: 2 (x+l) / sqrt(2 pi t^3) * exp(-(x+l)^2 / (2t)).
    """
    t = float(t)
    if t <= 0:
        raise ValueError(f"time must be positive, got {t}")
    x = np.asarray(x, dtype=float)
    l = np.asarray(l, dtype=float)
    if np.any(x < 0) or np.any(l < 0):
        raise ValueError("arguments must be nonnegative")
    s = x + l
    out = 2.0 * s / math.sqrt(2.0 * math.pi * t ** 3) * np.exp(-s * s / (2.0 * t))
    return float(out) if out.ndim == 0 else out


def kolmogorov_cdf(x) -> float:
    """Asymptotic Kolmogorov distribution K(x) = 1 - 2 sum_k (-1)^(k-1)
    exp(-2 k^2 x^2), clamped to [0, 1]."""
    x = float(x)
    if x < 0:
        raise ValueError(f"argument must be >= 0, got {x}")
    if x < 1e-8:
        return 0.0
    if x < 1.0:
        # theta-dual form of the same series: stable where 1 - 2*sum cancels
        s = 0.0
        for k in range(1, 10 ** 5):
            term = math.exp(-((2 * k - 1) ** 2) * math.pi ** 2 / (8.0 * x * x))
            s += term
            if term < 1e-18:
                break
        return min(1.0, math.sqrt(2.0 * math.pi) / x * s)
    s = 0.0
    for k in range(1, 10 ** 5):
        term = (-1.0) ** (k - 1) * math.exp(-2.0 * k * k * x * x)
        s += term
        if abs(term) < 1e-12:
            break
    return min(1.0, max(0.0, 1.0 - 2.0 * s))
