"""The operators T_{a,b,c}, S_{a,b,c}, the adjoint T*, and the distance-weighted S^d.

Single-parameter operators act on functions on U:

    T_{a,b,c} g(z) = rho(z)^a int_U rho(u)^b g(u) / rho(z,u)^c dV(u)
    S_{a,b,c} g(z) = rho(z)^a int_U rho(u)^b g(u) / |rho(z,u)|^c dV(u)

and the multiparameter versions are their tensor products on U x U.  The
"closed" engine evaluates on the kernel-power family through the Gamma-function
identities; the "mc" engine integrates any vectorised callable.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize_scalar

from .closed_forms import Divergence, is_divergent, key_integral, pair_integral
from .criteria import Condition, threshold_c
from .geometry import SiegelPoint, bergman_distance, bergman_ratio, cpow, distance_from_ratio, pairing, rho
from .mixed_norm import KernelPower, SeparableFn, ZeroFactor
from .params import DistParams, FRParams, Setting
from .sampler import Estimate, ProposalConfig, mc_integrate2


def _proposal(z: SiegelPoint, power: float, config: ProposalConfig | None) -> ProposalConfig:
    config = config or ProposalConfig()
    return config.for_power(power).at_height(rho(z))


# -- single-parameter closed forms --------------------------------------------

def apply_T1(a: float, b: float, c: float, factor, z: SiegelPoint):
    """Closed-form T_{a,b,c} of a holomorphic kernel power coef * rho^t rho(., h i)^-s, s > 0."""
    if isinstance(factor, ZeroFactor):
        return 0j
    if not isinstance(factor, KernelPower) or factor.modulus or factor.s <= 0:
        raise TypeError("closed T needs a holomorphic kernel power with s > 0")
    anchor = SiegelPoint.at_height(factor.height, z.n)
    v = pair_integral(z, anchor, c, factor.s, b + factor.t)
    if is_divergent(v):
        return v
    return factor.coef * rho(z) ** a * v


def apply_S1(a: float, b: float, c: float, factor, z: SiegelPoint):
    """Closed-form S_{a,b,c} of coef * rho^t (the key-integral family)."""
    if isinstance(factor, ZeroFactor):
        return 0.0
    if not isinstance(factor, KernelPower) or factor.s != 0:
        raise TypeError("closed S needs a pure power coef * rho^t")
    v = key_integral(z, c, b + factor.t)
    if is_divergent(v):
        return v
    return factor.coef * rho(z) ** a * v


def _closed_product(one, params: FRParams, f, z, w):
    if not isinstance(f, SeparableFn):
        raise TypeError("the closed engine needs a separable function")
    out = 1.0
    for i, (fac, x) in enumerate(((f.gfactor, z), (f.hfactor, w))):
        v = one(params.a[i], params.b[i], params.c[i], fac, x)
        if is_divergent(v):
            return Divergence(f"index {i + 1}: {v.condition}", v.detail)
        out = out * v
    return out


# -- Monte-Carlo engine --------------------------------------------------------

def _mc(params: FRParams, f, z, w, modulus: bool, budget, seed, config, workers,
        kernel_extra=None, powers=None) -> Estimate:
    def integrand(u, eta):
        pu, pe = pairing(z, u), pairing(w, eta)
        if modulus:
            k = np.abs(pu) ** -params.c[0] * np.abs(pe) ** -params.c[1]
        else:
            k = cpow(pu, -params.c[0]) * cpow(pe, -params.c[1])
        val = rho(u) ** params.b[0] * rho(eta) ** params.b[1] * k * f(u, eta)
        if kernel_extra is not None:
            val = val * kernel_extra(u, eta)
        return val

    powers = powers or params.b
    configs = (_proposal(z, powers[0], config), _proposal(w, powers[1], config))
    est = mc_integrate2(integrand, z.n, configs, budget=budget, seed=seed, workers=workers)
    scale = rho(z) ** params.a[0] * rho(w) ** params.a[1]
    return Estimate(est.value * scale, est.stderr * abs(scale), est.n_samples, est.seed,
                    est.offending_point)


def apply_T(params: FRParams, f, z: SiegelPoint, w: SiegelPoint, engine: str = "closed",
            budget: int = 10**6, seed: int = 0, config: ProposalConfig | None = None, workers: int = 1):
    """T_{a,b,c} f at (z, w): a complex number (closed), Divergence, or Estimate (mc)."""
    if engine == "closed":
        return _closed_product(apply_T1, params, f, z, w)
    if engine == "mc":
        return _mc(params, f, z, w, False, budget, seed, config, workers)
    raise ValueError(f"unknown engine {engine!r}")


def apply_S(params: FRParams, f, z: SiegelPoint, w: SiegelPoint, engine: str = "closed",
            budget: int = 10**6, seed: int = 0, config: ProposalConfig | None = None, workers: int = 1):
    if engine == "closed":
        return _closed_product(apply_S1, params, f, z, w)
    if engine == "mc":
        return _mc(params, f, z, w, True, budget, seed, config, workers)
    raise ValueError(f"unknown engine {engine!r}")


def apply_T_adjoint(setting: Setting, params: FRParams, g, z: SiegelPoint, w: SiegelPoint,
                    engine: str = "closed", budget: int = 10**6, seed: int = 0,
                    config: ProposalConfig | None = None, workers: int = 1):
    """T* g with respect to the pairings <.,.>_beta and <.,.>_alpha.

    The adjoint kernel is rho(z)^(b-alpha) rho(u)^(a+beta) / rho(z,u)^c, i.e. T*
    is again of the same type with parameters (b - alpha, a + beta, c).
    """
    return apply_T(params.adjoint(setting), g, z, w, engine, budget, seed, config, workers)


# -- distance-weighted operator and its domination ----------------------------

def apply_S_dist(dist: DistParams, f, z: SiegelPoint, w: SiegelPoint, budget: int = 10**6,
                 seed: int = 0, config: ProposalConfig | None = None, workers: int = 1,
                 powers=None) -> Estimate:
    """Monte-Carlo S^d f(z, w) with kernel factors delta_U(z,u)^d1 delta_U(w,eta)^d2."""
    d1, d2 = dist.d

    def weight(u, eta):
        out = 1.0
        if d1:
            out = out * bergman_distance(z, u) ** d1
        if d2:
            out = out * bergman_distance(w, eta) ** d2
        return out

    extra = weight if (d1 or d2) else None
    return _mc(dist.base, f, z, w, True, budget, seed, config, workers, kernel_extra=extra,
               powers=powers)


def dominate_shifts(dist: DistParams) -> list[FRParams]:
    """The unshifted triple followed by the three epsilon-shifted triples."""
    base, eps = dist.base, dist.eps
    sh = tuple(d * eps for d in dist.d)

    def shifted(mask):
        return FRParams(tuple(base.a[i] - sh[i] * mask[i] for i in range(2)),
                        tuple(base.b[i] - sh[i] * mask[i] for i in range(2)),
                        tuple(base.c[i] - 2 * sh[i] * mask[i] for i in range(2)))

    return [base, shifted((1, 0)), shifted((0, 1)), shifted((1, 1))]


def distance_envelope(d: float, eps: float) -> float:
    """Smallest K with delta_U^d <= K (1 + R^(d eps)) for every ratio R >= 1.

    delta_U depends on the pair only through R = |rho(z,w)|^2/(rho(z) rho(w)), so
    the sup is one-dimensional; it is located on a log-grid and refined.
    """
    if d == 0:
        return 0.5
    if not eps > 0:
        raise ValueError("eps must be positive")

    def g(x):
        return float(d * np.log(distance_from_ratio(np.exp(x))) - np.log1p(np.exp(d * eps * x)))

    top = max(60.0, 40.0 / (d * eps))
    grid = np.linspace(1e-9, top, 20001)
    vals = d * np.log(np.maximum(distance_from_ratio(np.exp(grid)), 1e-300)) - np.logaddexp(0.0, d * eps * grid)
    k = int(np.argmax(vals))
    lo, hi = grid[max(k - 1, 0)], grid[min(k + 1, len(grid) - 1)]
    res = minimize_scalar(lambda x: -g(x), bounds=(lo, hi), method="bounded",
                          options={"xatol": 1e-12})
    return float(math.exp(max(-res.fun, vals[k])))


@dataclass(frozen=True)
class Domination:
    lhs: Estimate
    terms: tuple[Estimate, ...]
    constant: float
    holds: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs.real, "terms": [t.real for t in self.terms],
                "constant": self.constant, "bound": self.constant * sum(t.real for t in self.terms),
                "pass": self.holds}


def check_domination(dist: DistParams, f, z: SiegelPoint, w: SiegelPoint, budget: int = 10**5,
                     seed: int = 0, config: ProposalConfig | None = None) -> Domination:
    """S^d f <= K1 K2 (S f + S^1 f + S^2 f + S^3 f) at (z, w).

    All five integrals use the same seed, so the pointwise kernel inequality
    carries over to the sample means exactly.
    """
    shifts = dominate_shifts(dist)
    powers = tuple(min(p.b[i] for p in shifts) for i in range(2))
    lhs = apply_S_dist(dist, f, z, w, budget, seed, config, powers=powers)
    terms = tuple(_mc(p, f, z, w, True, budget, seed, config, 1, powers=powers) for p in shifts)
    k = distance_envelope(dist.d[0], dist.eps) * distance_envelope(dist.d[1], dist.eps)
    bound = k * sum(t.real for t in terms)
    return Domination(lhs, terms, k, lhs.real <= bound * (1 + 1e-12))


def shifted_conditions(setting: Setting, dist: DistParams) -> list[Condition]:
    """Boundedness conditions (strict in c) for all four triples of the domination."""
    out = []
    for k, p in enumerate(dominate_shifts(dist)):
        for i in range(2):
            j = i + 1
            out.append(Condition(f"triple{k}: -q{j}a{j}<beta{j}+1", "<",
                                 m := setting.beta[i] + 1 + setting.q[i] * p.a[i], m > 0, "strict"))
            out.append(Condition(f"triple{k}: alpha{j}+1<p{j}(b{j}+1)", "<",
                                 m := setting.p[i] * (p.b[i] + 1) - setting.alpha[i] - 1, m > 0, "strict"))
            out.append(Condition(f"triple{k}: c{j}>threshold{j}", ">",
                                 m := p.c[i] - threshold_c(setting, i, p.a[i], p.b[i]), m > 0, "strict"))
    return out


def suggest_epsilon(setting: Setting, base: FRParams, d, safety: float = 0.5) -> float:
    """``safety`` times the largest eps keeping every shifted condition strict.

    Shifting by d_i eps lowers the weight margin by q_i d_i eps and the
    integrability margin by p_i d_i eps; the c-margin does not move.
    """
    caps = []
    for i in range(2):
        if d[i] == 0:
            continue
        wm = setting.beta[i] + 1 + setting.q[i] * base.a[i]
        im = setting.p[i] * (base.b[i] + 1) - setting.alpha[i] - 1
        if wm <= 0 or im <= 0:
            raise ValueError(f"index {i + 1}: the unshifted conditions already fail")
        caps += [wm / (setting.q[i] * d[i]), im / (setting.p[i] * d[i])]
    return safety * min(caps) if caps else 1.0


def distance_kernel_bound(z: SiegelPoint, w: SiegelPoint, eps: float):
    """Per-pair ratio delta_U / (1 + R^eps), whose sup is the fitted constant."""
    r = np.asarray(bergman_ratio(z, w))
    return distance_from_ratio(r) / (1.0 + r ** eps)
