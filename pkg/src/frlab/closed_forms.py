"""Gamma-function closed forms for the integrals over U.

Two identities carry everything here.  For z in U,

    int_U rho(w)^t / |rho(z,w)|^s dV(w) = C2(n,s,t) / rho(z)^(s-t-n-1)

when t > -1 and s - t > n + 1 (and +inf otherwise), and for z, u in U,

    int_U rho(w)^t / (rho(z,w)^r rho(w,u)^s) dV(w) = C1(n,r,s,t) / rho(z,u)^(r+s-t-n-1)

when r, s > 0, t > -1 and r + s - t > n + 1.

Parameter sets outside those regions return a :class:`Divergence` instead of
raising, so parameter scans can tabulate them.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .geometry import SiegelPoint, cpow, pairing, require_domain, rho


@dataclass(frozen=True)
class Divergence:
    """An integral outside its convergence region; ``condition`` names the broken hypothesis."""

    condition: str
    detail: str = ""

    def __str__(self) -> str:
        return f"divergent: {self.condition}" + (f" ({self.detail})" if self.detail else "")


def is_divergent(x) -> bool:
    return isinstance(x, Divergence)


def log_gamma(x: float) -> float:
    if not x > 0:
        raise ValueError(f"log_gamma needs x > 0, got {x!r}")
    return math.lgamma(x)


def log_c2(n: int, s: float, t: float) -> float | Divergence:
    if not t > -1:
        return Divergence("t>-1", f"t={t:.6g}")
    if not s - t > n + 1:
        return Divergence("s-t>n+1", f"s-t={s - t:.6g}, n+1={n + 1}")
    return (math.log(4.0) + n * math.log(math.pi) + log_gamma(1 + t)
            + log_gamma(s - t - n - 1) - 2.0 * log_gamma(s / 2.0))


def c2(n: int, s: float, t: float) -> float | Divergence:
    """4 pi^n Gamma(1+t) Gamma(s-t-n-1) / Gamma(s/2)^2."""
    lg = log_c2(n, s, t)
    return lg if is_divergent(lg) else math.exp(lg)


def log_c1(n: int, r: float, s: float, t: float) -> float | Divergence:
    if not r > 0:
        return Divergence("r>0", f"r={r:.6g}")
    if not s > 0:
        return Divergence("s>0", f"s={s:.6g}")
    if not t > -1:
        return Divergence("t>-1", f"t={t:.6g}")
    if not r + s - t > n + 1:
        return Divergence("r+s-t>n+1", f"r+s-t={r + s - t:.6g}, n+1={n + 1}")
    return (math.log(4.0) + n * math.log(math.pi) + log_gamma(1 + t)
            + log_gamma(r + s - t - n - 1) - log_gamma(r) - log_gamma(s))


def c1(n: int, r: float, s: float, t: float) -> float | Divergence:
    """4 pi^n Gamma(1+t) Gamma(r+s-t-n-1) / (Gamma(r) Gamma(s))."""
    lg = log_c1(n, r, s, t)
    return lg if is_divergent(lg) else math.exp(lg)


def key_integral(z: SiegelPoint, s: float, t: float):
    """Exact value of int_U rho(w)^t |rho(z,w)|^-s dV(w)."""
    require_domain(z)
    lg = log_c2(z.n, s, t)
    if is_divergent(lg):
        return lg
    out = np.exp(lg - (s - t - z.n - 1) * np.log(rho(z)))
    return float(out) if np.ndim(out) == 0 else out


def pair_integral(z: SiegelPoint, u: SiegelPoint, r: float, s: float, t: float):
    """Exact value of int_U rho(w)^t rho(z,w)^-r rho(w,u)^-s dV(w)."""
    require_domain(z, u)
    const = c1(z.n, r, s, t)
    if is_divergent(const):
        return const
    return const * cpow(pairing(z, u), -(r + s - t - z.n - 1))


def reproducing_constant(n: int, gamma: float) -> float:
    """Gamma(n+1+gamma) / (4 pi^n Gamma(1+gamma)).

    Inserting this factor in front of each kernel rho(z,u)^-(n+1+gamma) makes
    the weighted integral reproduce holomorphic kernel functions exactly.
    """
    if not gamma > -1:
        raise ValueError("gamma must exceed -1")
    return math.exp(log_gamma(n + 1 + gamma) - math.log(4.0) - n * math.log(math.pi)
                    - log_gamma(1 + gamma))


# -- test functions f(z,w) = rho(z)^t rho(w)^t / (rho(z, theta i)^s rho(w, delta i)^s)

def _check_finite(seq, name):
    if any(math.isinf(x) for x in seq):
        raise ValueError(f"{name} must be finite for the integral norm formulas")


def f_theta_delta(s: float, t: float, theta: float, delta: float, z: SiegelPoint, w: SiegelPoint):
    """Pointwise value of the two-variable test function."""
    a = rho(z) ** t * cpow(pairing(z, SiegelPoint.at_height(theta, z.n)), -s)
    b = rho(w) ** t * cpow(pairing(w, SiegelPoint.at_height(delta, w.n)), -s)
    return a * b


def f_theta_delta_norm(setting, s: float, t: float, theta: float, delta: float):
    """Exact weighted mixed norm of the test function in L^p_alpha."""
    n = setting.n
    _check_finite(setting.p, "p")
    total = 1.0
    for p, alpha, h in zip(setting.p, setting.alpha, (theta, delta)):
        k = key_integral(SiegelPoint.at_height(h, n), s * p, p * t + alpha)
        if is_divergent(k):
            return Divergence(f"norm of f: {k.condition}", k.detail)
        total *= k ** (1.0 / p)
    return total


def f_norm_exponents(setting, s: float, t: float) -> tuple[float, float]:
    """Growth exponents of the test-function norm in theta and delta."""
    n = setting.n
    return tuple((n + 1 + al) / p + t - s for p, al in zip(setting.p, setting.alpha))


def image_exponent(n: int, params, s: float, t: float, i: int) -> float:
    """A_i = c_i + s - b_i - t - n - 1, the kernel power of T applied to the test function."""
    return params.c[i] + s - params.b[i] - t - n - 1


def tf_theta_delta(params, s: float, t: float, theta: float, delta: float,
                   z: SiegelPoint, w: SiegelPoint):
    """Exact pointwise value of T_{a,b,c} applied to the test function."""
    require_domain(z, w)
    n = z.n
    out = 1.0
    for i, (x, h) in enumerate(((z, theta), (w, delta))):
        const = c1(n, params.c[i], s, params.b[i] + t)
        if is_divergent(const):
            return Divergence(f"inner integral for index {i + 1}: {const.condition}", const.detail)
        big_a = image_exponent(n, params, s, t, i)
        out = out * const * rho(x) ** params.a[i] * cpow(pairing(x, SiegelPoint.at_height(h, n)), -big_a)
    return out


def tf_theta_delta_norm(setting, params, s: float, t: float, theta: float, delta: float):
    """Exact L^q_beta mixed norm of T applied to the test function.

    Each factor of |Tf| is C1 * rho^a_i |rho(., theta i)|^-A_i, so its q_i-norm
    is C1 * [C2(n, q_i A_i, q_i a_i + beta_i)]^(1/q_i) theta^((n+1+beta_i)/q_i + a_i - A_i).
    """
    n = setting.n
    _check_finite(setting.q, "q")
    total = 1.0
    for i, h in enumerate((theta, delta)):
        const = c1(n, params.c[i], s, params.b[i] + t)
        if is_divergent(const):
            return Divergence(f"inner integral for index {i + 1}: {const.condition}", const.detail)
        q, beta, a = setting.q[i], setting.beta[i], params.a[i]
        big_a = image_exponent(n, params, s, t, i)
        k = key_integral(SiegelPoint.at_height(h, n), q * big_a, q * a + beta)
        if is_divergent(k):
            label = "weight q_i a_i+beta_i>-1" if k.condition == "t>-1" else "decay q_i A_i-q_i a_i-beta_i>n+1"
            return Divergence(f"{label} for index {i + 1}", k.detail)
        total *= const * k ** (1.0 / q)
    return total


def tf_norm_exponents(setting, params, s: float, t: float) -> tuple[float, float]:
    n = setting.n
    return tuple((n + 1 + setting.beta[i]) / setting.q[i] + params.a[i] - image_exponent(n, params, s, t, i)
                 for i in range(2))
