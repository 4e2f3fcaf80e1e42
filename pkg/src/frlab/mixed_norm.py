"""Weighted mixed norms of separable functions on U x U.

Only separable inputs f(z, w) = g(z) h(w) are accepted.  For those the iterated
norm factorises exactly (Fubini), ||f|| = ||g||_{L^p1_alpha1} ||h||_{L^p2_alpha2},
so no inner Monte-Carlo estimate is ever raised to a power.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .closed_forms import Divergence, is_divergent, key_integral
from .geometry import SiegelPoint, cpow, pairing, rho
from .sampler import Estimate, ProposalConfig, mc_integrate, sample_points, sub_seed


@dataclass(frozen=True)
class KernelPower:
    """z -> coef * rho(z)^t * K(z) with K = |rho(z, h i)|^-s (modulus) or rho(z, h i)^-s."""

    t: float
    s: float = 0.0
    height: float = 1.0
    coef: complex = 1.0
    modulus: bool = False

    def __call__(self, z: SiegelPoint):
        r = rho(z)
        if self.s == 0:
            return self.coef * r ** self.t
        anchor = SiegelPoint.at_height(self.height, z.n)
        if self.modulus:
            k = np.abs(pairing(z, anchor)) ** -self.s
        else:
            k = cpow(pairing(z, anchor), -self.s)
        return self.coef * r ** self.t * k

    def abs(self) -> KernelPower:
        return KernelPower(self.t, self.s, self.height, abs(self.coef), True)

    def sup(self, n: int) -> float:
        """Exact sup over U of |factor|.

        |rho(z, h i)| >= (h + rho(z))/2 with equality on the axis z = (0', y i),
        so the sup is 2^s |coef| max_y y^t/(h+y)^s.
        """
        t, s, h = self.t, self.s, self.height
        c = abs(self.coef)
        if c == 0:
            return 0.0
        if s == 0:
            return c if t == 0 else math.inf
        if t < 0 or t > s:
            return math.inf
        # y* = t h/(s-t) maximises y^t/(h+y)^s; t = s is the limit y -> inf
        log_val = s * math.log(2.0) + (t - s) * math.log(h)
        if 0 < t < s:
            log_val += t * math.log(t) + (s - t) * math.log(s - t) - s * math.log(s)
        return c * math.exp(log_val)


@dataclass(frozen=True)
class Unimodular:
    """z -> rho(z, u)^c / |rho(z, u)|^c for a fixed u."""

    c: float
    anchor: SiegelPoint

    def __call__(self, z: SiegelPoint):
        pr = pairing(z, self.anchor)
        return cpow(pr, self.c) / np.abs(pr) ** self.c

    def sup(self, n: int) -> float:
        return 1.0


@dataclass(frozen=True)
class ZeroFactor:
    def __call__(self, z: SiegelPoint):
        return np.zeros(np.shape(z.zn))

    def sup(self, n: int) -> float:
        return 0.0


@dataclass(frozen=True)
class SeparableFn:
    gfactor: Callable
    hfactor: Callable

    def __call__(self, z: SiegelPoint, w: SiegelPoint):
        return self.gfactor(z) * self.hfactor(w)


def test_function(s: float, t: float, theta: float, delta: float) -> SeparableFn:
    """rho(z)^t rho(w)^t / (rho(z, theta i)^s rho(w, delta i)^s)."""
    return SeparableFn(KernelPower(t, s, theta), KernelPower(t, s, delta))


def factor_norm_closed(factor, n: int, p: float, alpha: float):
    """Exact weighted L^p norm of a single-variable factor."""
    if isinstance(factor, ZeroFactor):
        return 0.0
    if math.isinf(p):
        if isinstance(factor, (KernelPower, Unimodular)):
            v = factor.sup(n)
            return Divergence("bounded factor", "sup is infinite") if math.isinf(v) else v
        raise TypeError(f"no closed form for the sup of {type(factor).__name__}")
    if isinstance(factor, Unimodular):
        return Divergence("t>-1 and s-t>n+1", "|factor| = 1 is not integrable against rho^alpha dV")
    if not isinstance(factor, KernelPower):
        raise TypeError(f"no closed form for {type(factor).__name__}")
    if factor.coef == 0:
        return 0.0
    k = key_integral(SiegelPoint.at_height(factor.height, n), p * factor.s, p * factor.t + alpha)
    if is_divergent(k):
        return k
    return abs(factor.coef) * k ** (1.0 / p)


def _proposal_for(factor, p, alpha, config):
    config = config or ProposalConfig()
    if isinstance(factor, KernelPower):
        return config.for_power(p * factor.t + alpha).at_height(factor.height)
    return config


def factor_norm_mc(factor, n: int, p: float, alpha: float, budget: int, seed: int,
                   config: ProposalConfig | None = None, workers: int = 1) -> Estimate:
    """Monte-Carlo weighted L^p norm of one factor; stderr by the delta method."""
    if math.isinf(p):
        raise ValueError("use ess_sup_norm for p = inf")
    est = mc_integrate(lambda z: np.abs(factor(z)) ** p * rho(z) ** alpha, n,
                       _proposal_for(factor, p, alpha, config), budget=budget, seed=seed,
                       workers=workers)
    val = est.real
    if val <= 0:
        return Estimate(0j, est.stderr, est.n_samples, est.seed, est.offending_point)
    norm = val ** (1.0 / p)
    return Estimate(complex(norm), norm * est.stderr / (p * val), est.n_samples, est.seed,
                    est.offending_point)


def mixed_norm_separable(f: SeparableFn, n: int, p, alpha, method: str = "closed",
                         budget: int = 10**6, seed: int = 0, config: ProposalConfig | None = None,
                         workers: int = 1):
    """||f||_{L^p_alpha} for separable f.

    ``method="closed"`` returns a float (or a :class:`Divergence` naming the
    factor).  ``method="mc"`` returns an :class:`Estimate`; infinite exponents are
    then handled by :func:`ess_sup_norm` and reported as lower bounds.
    """
    if not isinstance(f, SeparableFn):
        raise TypeError("mixed norms are only computed for separable functions")
    factors = (f.gfactor, f.hfactor)
    if method == "closed":
        total = 1.0
        for idx, (fac, pi, ai) in enumerate(zip(factors, p, alpha), start=1):
            v = factor_norm_closed(fac, n, pi, ai)
            if is_divergent(v):
                return Divergence(f"factor {idx}: {v.condition}", v.detail)
            total *= v
        return total
    if method != "mc":
        raise ValueError(f"unknown method {method!r}")
    value, rel2 = 1.0, 0.0
    for idx, (fac, pi, ai) in enumerate(zip(factors, p, alpha)):
        if math.isinf(pi):
            v = ess_sup_norm(fac, n, samples=min(budget, 10**5), seed=sub_seed(seed, idx))
            value *= v
            continue
        est = factor_norm_mc(fac, n, pi, ai, budget, sub_seed(seed, idx), config, workers)
        value *= est.real
        if est.real > 0:
            rel2 += (est.stderr / est.real) ** 2
    return Estimate(complex(value), abs(value) * math.sqrt(rel2), budget, seed)


def ess_sup_norm(factor, n: int, samples: int = 10**5, rounds: int = 4, seed: int = 0,
                 config: ProposalConfig | None = None) -> float:
    """Lower-bound estimate of sup_U |factor| from proposal samples plus local refinement.

    Each refinement round perturbs the best points found so far with a shrinking
    step in the (z', Re z_n, log h) coordinates; the running maximum never
    decreases and never exceeds the true sup.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & ((1 << 64) - 1), 7]))
    config = config or ProposalConfig()
    if isinstance(factor, KernelPower):
        config = config.at_height(factor.height)
    pts, _ = sample_points(n, config, rng, samples)
    vals = np.abs(np.broadcast_to(factor(pts), (samples,)))
    best = float(np.max(vals))
    keep = min(64, samples)
    step = 1.0
    for _ in range(rounds):
        top = np.argsort(vals)[-keep:]
        base = pts[top]
        reps = max(1, samples // (4 * keep))
        zp = np.repeat(base.zprime, reps, axis=0)
        zn = np.repeat(base.zn, reps)
        h = zn.imag - np.sum(np.abs(zp) ** 2, axis=-1)
        m = len(zn)
        scale = np.maximum(h, 1e-300)
        zp = zp + step * np.sqrt(scale)[:, None] * (rng.standard_normal(zp.shape) + 1j * rng.standard_normal(zp.shape))
        x = zn.real + step * scale * rng.standard_normal(m)
        h = h * np.exp(step * rng.standard_normal(m))
        cand = SiegelPoint(zp, x + 1j * (h + np.sum(np.abs(zp) ** 2, axis=-1)))
        cvals = np.abs(np.broadcast_to(factor(cand), (m,)))
        best = max(best, float(np.max(cvals)))
        pts = SiegelPoint(np.concatenate([pts.zprime, cand.zprime]), np.concatenate([pts.zn, cand.zn]))
        vals = np.concatenate([vals, cvals])
        step *= 0.5
    return best
