"""Importance-sampled Monte-Carlo integration over U and U x U.

Points are drawn in the coordinates (z', Re z_n, h) with Im z_n = |z'|^2 + h.
That substitution is a shear with unit Jacobian, so U becomes the product
R^{2(n-1)} x R x (0, inf) and the proposal density in these coordinates is the
density with respect to dV.

The proposal is hierarchical and mimics the shape of the kernels
|rho(z, w)|^-s around a base point at height ~1:

* h follows a beta-prime law: density ~ h^t0 near 0, ~ h^-(1+height_tail) at infinity;
* z' given h is a multivariate Student t with scale horizontal_scale*sqrt(1+h);
* Re z_n given (h, z') is Cauchy with scale base_scale*(1 + h + |z'|^2).

``scale`` applies the dilation (z', z_n) -> (sqrt(l) z', l z_n) of U, which moves
the proposal to base points at height ``l``.

The budget is cut into fixed-size blocks, block ``k`` draws from its own
``SeedSequence([seed, k])`` and block statistics are merged in index order, so
results do not depend on the number of workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from .closed_forms import is_divergent, key_integral
from .geometry import SiegelPoint, pairing, rho

BLOCK_SIZE = 1 << 16
SEED_MASK = (1 << 64) - 1


class ConfigurationError(ValueError):
    pass


@dataclass(frozen=True)
class ProposalConfig:
    height_tail: float = 0.5
    horizontal_scale: float = 1.0
    base_scale: float = 1.0
    height_power: float = -0.5
    horizontal_dof: float = 3.0
    scale: float = 1.0
    center: float = 0.0

    def __post_init__(self):
        for name in ("height_tail", "horizontal_scale", "base_scale", "horizontal_dof", "scale"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if not self.height_power > -1:
            raise ConfigurationError("height_power must exceed -1")

    def dilated(self, factor: float) -> ProposalConfig:
        return replace(self, scale=self.scale * factor)

    def at_height(self, height: float) -> ProposalConfig:
        return replace(self, scale=height)

    def for_power(self, t: float) -> ProposalConfig:
        """Lower the near-boundary exponent so rho^t integrands keep finite variance."""
        return replace(self, height_power=max(-0.9, min(self.height_power, 2 * t + 0.5)))


@dataclass(frozen=True)
class Estimate:
    value: complex
    stderr: float
    n_samples: int
    seed: int
    offending_point: SiegelPoint | None = field(default=None, compare=False)

    @property
    def poisoned(self) -> bool:
        return self.offending_point is not None

    @property
    def real(self) -> float:
        return self.value.real

    def zscore(self, exact: complex) -> float:
        diff = abs(self.value - exact)
        if self.stderr == 0:
            return 0.0 if diff == 0 else math.inf
        return diff / self.stderr

    def rel_err(self, exact: complex) -> float:
        return abs(self.value - exact) / abs(exact)


def _log_beta(a: float, b: float) -> float:
    return math.lgamma(a) + math.lgamma(b) - math.lgamma(a + b)


def sample_points(n: int, config: ProposalConfig, rng: np.random.Generator, size: int):
    """Draw ``size`` points of U; returns (points, proposal density w.r.t. dV)."""
    t0, kappa = config.height_power, config.height_tail
    h = rng.gamma(t0 + 1.0, size=size) / rng.gamma(kappa, size=size)
    logq = t0 * np.log(h) - (t0 + 1.0 + kappa) * np.log1p(h) - _log_beta(t0 + 1.0, kappa)

    d = 2 * (n - 1)
    if d:
        nu = config.horizontal_dof
        sigma = config.horizontal_scale * np.sqrt(1.0 + h)
        g = rng.standard_normal((size, d))
        chi = rng.chisquare(nu, size=size)
        x = g * (sigma / np.sqrt(chi / nu))[:, None]
        r2 = np.sum(x * x, axis=1)
        logq += (math.lgamma((nu + d) / 2) - math.lgamma(nu / 2) - (d / 2) * math.log(nu * math.pi)
                 - d * np.log(sigma) - ((nu + d) / 2) * np.log1p(r2 / (nu * sigma * sigma)))
        zprime = x[:, 0::2] + 1j * x[:, 1::2]
    else:
        r2 = np.zeros(size)
        zprime = np.zeros((size, 0), dtype=complex)

    width = config.base_scale * (1.0 + h + r2)
    xn = width * rng.standard_cauchy(size)
    logq += -np.log(math.pi * width) - np.log1p((xn / width) ** 2)

    lam = config.scale
    if lam != 1.0:
        zprime = zprime * math.sqrt(lam)
        xn = xn * lam
        h = h * lam
        r2 = r2 * lam
        logq -= (n + 1) * math.log(lam)
    zn = (xn + config.center) + 1j * (h + r2)
    return SiegelPoint(zprime, zn), np.exp(logq)


# -- streaming statistics ---------------------------------------------------

@dataclass
class _Stats:
    count: int = 0
    mean: complex = 0j
    m2: float = 0.0

    @classmethod
    def of(cls, x: np.ndarray) -> _Stats:
        mean = complex(np.mean(x))
        dev = x - mean
        return cls(len(x), mean, float(np.sum(dev.real ** 2 + dev.imag ** 2)))

    def merge(self, other: _Stats) -> _Stats:
        if other.count == 0:
            return self
        if self.count == 0:
            return other
        total = self.count + other.count
        delta = other.mean - self.mean
        frac = other.count / total
        return _Stats(total, self.mean + delta * frac,
                      self.m2 + other.m2 + abs(delta) ** 2 * self.count * frac)


def sub_seed(seed: int, *keys: int) -> int:
    """Independent child seed for the ``keys``-th sub-run of ``seed``."""
    ss = np.random.SeedSequence([int(seed) & SEED_MASK, *keys])
    return int(ss.generate_state(1, np.uint64)[0])


def _block_sizes(budget: int, block_size: int) -> list[int]:
    full, rest = divmod(budget, block_size)
    return [block_size] * full + ([rest] if rest else [])


def _run_blocks(block_fn, budget, seed, workers, block_size) -> Estimate:
    if budget < 1:
        raise ConfigurationError("budget must be at least 1")
    seed = int(seed) & SEED_MASK
    sizes = _block_sizes(int(budget), block_size)
    jobs = [(k, size) for k, size in enumerate(sizes)]

    def run(job):
        k, size = job
        rng = np.random.default_rng(np.random.SeedSequence([seed, k]))
        return block_fn(rng, size)

    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(run, jobs))
    else:
        results = [run(job) for job in jobs]

    stats = _Stats()
    for res in results:
        if isinstance(res, SiegelPoint) or isinstance(res, tuple):
            return Estimate(complex("nan"), math.nan, int(budget), seed, offending_point=res)
        stats = stats.merge(res)
    n = stats.count
    stderr = math.sqrt(stats.m2 / (n - 1) / n) if n > 1 else 0.0
    return Estimate(stats.mean, stderr, n, seed)


def mc_integrate(integrand: Callable[[SiegelPoint], np.ndarray], n: int,
                 config: ProposalConfig | None = None, budget: int = 10**6, seed: int = 0,
                 workers: int = 1, block_size: int = BLOCK_SIZE, sampler=sample_points) -> Estimate:
    """Importance-sampling estimate of int_U integrand dV.

    ``integrand`` is vectorised: it receives a batch of points and returns an
    array of values.  A non-finite value poisons the estimate; the offending
    point is attached instead of being skipped.
    """
    config = config or ProposalConfig()

    def block(rng, size):
        pts, dens = sampler(n, config, rng, size)
        vals = np.broadcast_to(np.asarray(integrand(pts), dtype=complex), (size,))
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            ratio = vals / dens
        bad = ~np.isfinite(ratio)
        if bad.any():
            return pts[int(np.argmax(bad))]
        return _Stats.of(ratio)

    return _run_blocks(block, budget, seed, workers, block_size)


def mc_integrate2(integrand: Callable[[SiegelPoint, SiegelPoint], np.ndarray], n: int,
                  configs: ProposalConfig | Sequence[ProposalConfig] | None = None,
                  budget: int = 10**6, seed: int = 0, workers: int = 1,
                  block_size: int = BLOCK_SIZE, sampler=sample_points) -> Estimate:
    """Estimate of the double integral over U x U with independent product proposals."""
    if configs is None:
        configs = ProposalConfig()
    if isinstance(configs, ProposalConfig):
        configs = (configs, configs)
    cu, ceta = configs

    def block(rng, size):
        u, du = sampler(n, cu, rng, size)
        eta, deta = sampler(n, ceta, rng, size)
        vals = np.broadcast_to(np.asarray(integrand(u, eta), dtype=complex), (size,))
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            ratio = vals / (du * deta)
        bad = ~np.isfinite(ratio)
        if bad.any():
            k = int(np.argmax(bad))
            return (u[k], eta[k])
        return _Stats.of(ratio)

    return _run_blocks(block, budget, seed, workers, block_size)


# -- calibration against the key integral --------------------------------------

@dataclass(frozen=True)
class KeyParams:
    s: float
    t: float
    z: SiegelPoint


@dataclass(frozen=True)
class CalibrationEntry:
    s: float
    t: float
    z: SiegelPoint
    estimate: Estimate
    exact: float
    zscore: float
    rel_err: float
    passed: bool


@dataclass(frozen=True)
class CalibrationReport:
    n: int
    entries: list[CalibrationEntry]

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)


def default_suite(n: int) -> list[KeyParams]:
    st = [(4.0, 0.0), (5.0, 1.0), (3.5, 0.5)] if n == 1 else \
         [(n + 3.0, 0.0), (n + 4.0, 1.0), (n + 2.5, 0.5)]
    return [KeyParams(s, t, SiegelPoint.at_height(h, n)) for s, t in st for h in (1.0, 2.0)]


def key_integrand(z: SiegelPoint, s: float, t: float):
    def f(w):
        return rho(w) ** t / np.abs(pairing(z, w)) ** s
    return f


def calibrate(n: int, config: ProposalConfig | None = None, suite: Sequence[KeyParams] | None = None,
              budget: int = 10**6, seed: int = 0, workers: int = 1, sampler=sample_points,
              z_max: float = 3.0, rel_max: float = 0.02) -> CalibrationReport:
    """Check the sampler against exact key-integral values.

    The proposal is dilated to each base point's height before sampling.
    """
    if budget < 1:
        raise ConfigurationError("budget must be at least 1")
    config = config or ProposalConfig()
    suite = list(suite) if suite is not None else default_suite(n)
    entries = []
    for k, kp in enumerate(suite):
        exact = key_integral(kp.z, kp.s, kp.t)
        if is_divergent(exact):
            raise ConfigurationError(f"calibration entry (s={kp.s}, t={kp.t}) diverges: {exact}")
        est = mc_integrate(key_integrand(kp.z, kp.s, kp.t), n,
                           config.for_power(kp.t).dilated(rho(kp.z)),
                           budget=budget, seed=sub_seed(seed, k), workers=workers, sampler=sampler)
        z = est.zscore(exact)
        rel = est.rel_err(exact)
        entries.append(CalibrationEntry(kp.s, kp.t, kp.z, est, exact, z, rel, z <= z_max and rel <= rel_max))
    return CalibrationReport(n, entries)
