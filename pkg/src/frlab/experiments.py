"""Desk-scale numerical experiments built on the closed forms and the sampler."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .closed_forms import (Divergence, c1, f_norm_exponents, f_theta_delta_norm, is_divergent,
                           key_integral, log_c1, pair_integral, reproducing_constant,
                           tf_norm_exponents, tf_theta_delta_norm)
from .criteria import UNBOUNDED, check_bounded
from .geometry import (SiegelPoint, bergman_distance, bergman_ratio, cpow, pairing,
                       random_points, rho)
from .mixed_norm import KernelPower, factor_norm_mc
from .operators import apply_T1, distance_envelope
from .params import FRParams, Setting
from .sampler import (ConfigurationError, Estimate, KeyParams, ProposalConfig, default_suite, mc_integrate,
                      sub_seed)

DEFAULT_GRID = tuple(2.0 ** k for k in range(-6, 7))


def _fit_slope(x, y) -> tuple[float, float]:
    lx, ly = np.log(np.asarray(x, float)), np.log(np.asarray(y, float))
    slope, icpt = np.polyfit(lx, ly, 1)
    resid = float(np.max(np.abs(ly - (slope * lx + icpt))))
    return float(slope), resid


# -- test-function parameters ---------------------------------------------------

def choose_st(setting: Setting, params: FRParams) -> tuple[float, float]:
    """(s, t) with unit margins inside the region where every test-function integral converges.

    t must exceed -(1+alpha_i)/p_i (norm of f) and -1-b_i (inner integral of T f).
    s - t must exceed (n+1+alpha_i)/p_i (norm of f), n+1+b_i-c_i (inner integral)
    and (n+1+beta_i)/q_i + n+1+a_i+b_i-c_i (norm of T f, whose factors carry rho^a_i).
    """
    if not setting.finite():
        raise ValueError("choose_st needs finite exponents")
    n = setting.n
    t = max(max(-(1 + setting.alpha[i]) / setting.p[i], -1 - params.b[i]) for i in range(2)) + 1
    gap = max(max((n + 1 + setting.alpha[i]) / setting.p[i],
                  (n + 1 + setting.beta[i]) / setting.q[i] + n + 1 + params.a[i] + params.b[i] - params.c[i],
                  n + 1 + params.b[i] - params.c[i]) for i in range(2))
    return t + gap + 1, t


# -- scaling scans ----------------------------------------------------------------

@dataclass
class ScanResult:
    rows: list[tuple[float, float, float, float, float]]
    slopes: dict
    analytic: dict
    residuals: dict
    s: float
    t: float
    divergence: Divergence | None = None

    @property
    def ok(self) -> bool:
        return self.divergence is None

    def max_slope_error(self) -> float:
        return max(abs(self.slopes[k] - self.analytic[k]) for k in self.slopes)

    def to_dict(self) -> dict:
        out = {"s": self.s, "t": self.t, "slopes": self.slopes, "analytic": self.analytic,
               "residuals": self.residuals,
               "rows": [dict(zip(("theta", "delta", "f_norm", "Tf_norm", "ratio"), r)) for r in self.rows]}
        if self.divergence is not None:
            out["divergence"] = {"divergent": True, "condition": self.divergence.condition,
                                 "detail": self.divergence.detail}
        return out


def scaling_scan(setting: Setting, params: FRParams, st: tuple[float, float] | None = None,
                 theta_grid=DEFAULT_GRID, delta_grid=DEFAULT_GRID) -> ScanResult:
    """Exact norms of f_{theta,delta} and T f_{theta,delta} along theta (delta=1) and delta (theta=1)."""
    s, t = st if st is not None else choose_st(setting, params)
    e_f = f_norm_exponents(setting, s, t)
    e_tf = tf_norm_exponents(setting, params, s, t)
    analytic = {"f_theta": e_f[0], "f_delta": e_f[1], "Tf_theta": e_tf[0], "Tf_delta": e_tf[1],
                "ratio_theta": e_tf[0] - e_f[0], "ratio_delta": e_tf[1] - e_f[1]}
    rows = []
    pts = [(th, 1.0) for th in theta_grid] + [(1.0, de) for de in delta_grid]
    for th, de in pts:
        fn = f_theta_delta_norm(setting, s, t, th, de)
        tn = tf_theta_delta_norm(setting, params, s, t, th, de)
        for v in (fn, tn):
            if is_divergent(v):
                return ScanResult([], {}, analytic, {}, s, t, v)
        rows.append((th, de, fn, tn, tn / fn))
    k = len(theta_grid)
    slopes, resid = {}, {}
    for label, sel, col in (("theta", slice(0, k), 0), ("delta", slice(k, None), 1)):
        sub = rows[sel]
        x = [r[col] for r in sub]
        for name, j in (("f", 2), ("Tf", 3), ("ratio", 4)):
            slopes[f"{name}_{label}"], resid[f"{name}_{label}"] = _fit_slope(x, [r[j] for r in sub])
    return ScanResult(rows, slopes, analytic, resid, s, t)


@dataclass
class MCScanCheck:
    rows: list[dict]
    slope: float
    analytic: float
    passed: bool

    def to_dict(self) -> dict:
        return {"rows": self.rows, "slope": self.slope, "analytic": self.analytic, "pass": self.passed}


def scan_mc_check(setting: Setting, params: FRParams, st: tuple[float, float] | None = None,
                  thetas=(0.25, 1.0, 4.0), index: int = 0, budget: int = 10**6, seed: int = 0,
                  tol: float = 5e-2, workers: int = 1) -> MCScanCheck:
    """Monte-Carlo norms of the index-i factors of f and T f at a few grid points.

    Passes when every MC ratio is within ``tol`` (relative) of the closed value
    and the slope fitted through the MC ratios is within ``tol`` of the exponent.
    """
    s, t = st if st is not None else choose_st(setting, params)
    n, i = setting.n, index
    p, q, al, be = setting.p[i], setting.q[i], setting.alpha[i], setting.beta[i]
    a, b, c = params.a[i], params.b[i], params.c[i]
    big_a = c + s - b - t - n - 1
    const = c1(n, c, s, b + t)
    if is_divergent(const):
        raise ConfigurationError(f"inner integral diverges: {const}")
    rows, ratios = [], []
    for k, th in enumerate(thetas):
        f_fac = KernelPower(t, s, th, 1.0, True)
        tf_fac = KernelPower(a, big_a, th, const, True)
        fe = factor_norm_mc(f_fac, n, p, al, budget, sub_seed(seed, 2 * k), workers=workers)
        te = factor_norm_mc(tf_fac, n, q, be, budget, sub_seed(seed, 2 * k + 1), workers=workers)
        f_exact = key_integral(SiegelPoint.at_height(th, n), p * s, p * t + al) ** (1 / p)
        t_exact = const * key_integral(SiegelPoint.at_height(th, n), q * big_a, q * a + be) ** (1 / q)
        mc_ratio = te.real / fe.real
        exact = t_exact / f_exact
        ratios.append(mc_ratio)
        rows.append({"theta": th, "f_norm_mc": fe.real, "f_norm_stderr": fe.stderr, "f_norm": f_exact,
                     "Tf_norm_mc": te.real, "Tf_norm_stderr": te.stderr, "Tf_norm": t_exact,
                     "ratio_mc": mc_ratio, "ratio": exact, "rel_err": abs(mc_ratio - exact) / exact})
    slope, _ = _fit_slope(thetas, ratios)
    analytic = tf_norm_exponents(setting, params, s, t)[i] - f_norm_exponents(setting, s, t)[i]
    ok = all(r["rel_err"] <= tol for r in rows) and abs(slope - analytic) <= tol
    return MCScanCheck(rows, slope, analytic, ok)


# -- unboundedness witnesses --------------------------------------------------------

@dataclass
class Witness:
    kind: str
    index: int
    condition: str
    exponent: float | None = None
    deficit: float | None = None
    evidence: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "index": self.index, "condition": self.condition,
                "exponent": self.exponent, "deficit": self.deficit, "evidence": self.evidence}


def _divergence_dict(d: Divergence) -> dict:
    return {"divergent": True, "condition": d.condition, "detail": d.detail}


def _scan_witness(setting, params, i, cond_name, deficit, kind) -> Witness:
    st = choose_st(setting, params)
    scan = scaling_scan(setting, params, st)
    if not scan.ok:
        return Witness("divergence", i + 1, cond_name, evidence=_divergence_dict(scan.divergence))
    key = "ratio_theta" if i == 0 else "ratio_delta"
    rows = [r for r in scan.rows if (r[1] == 1.0 if i == 0 else r[0] == 1.0)]
    return Witness(kind, i + 1, cond_name, scan.slopes[key], deficit,
                   {"s": scan.s, "t": scan.t, "analytic": scan.analytic[key],
                    "grid": [r[i] for r in rows], "ratio": [r[4] for r in rows]})


def _adjoint_witness(setting, params, i, cond_name) -> Witness:
    """Integrability failure: the adjoint image of a test function has infinite norm.

    The index-i factor of T* g is a constant times rho^(b_i - alpha_i) times a
    kernel power; its L^{p'_i}_{alpha_i} norm needs p'_i (b_i - alpha_i) + alpha_i > -1,
    which is exactly the failed condition.
    """
    n = setting.n
    power = params.b[i] - setting.alpha[i]
    pc = setting.dual().q[i]
    if math.isinf(pc):
        sup = KernelPower(power, 1.0, 1.0).sup(n)
        return Witness("adjoint-divergence", i + 1, cond_name,
                       evidence={"divergent": math.isinf(sup), "condition": "bounded factor",
                                 "power": power})
    t = pc * power + setting.alpha[i]
    k = key_integral(SiegelPoint.at_height(1.0, n), t + n + 2, t)
    ev = _divergence_dict(k) if is_divergent(k) else {"divergent": False}
    return Witness("adjoint-divergence", i + 1, cond_name, evidence=ev)


def unboundedness_witness(setting: Setting, params: FRParams) -> Witness | None:
    """Numerical evidence for a failed boundedness condition, or None when nothing fails.

    Priority: a weight failure makes ||T f|| infinite outright; then a c-deficit is
    shown by the growth exponent of ||T f||/||f||; then an integrability failure by
    the adjoint image; an equality surplus by the negative exponent (growth as
    theta -> 0); conditions at an infinite index by their sup exponents.
    """
    verdict = check_bounded(setting, params)
    if verdict.outcome != UNBOUNDED:
        return None
    failing = [c for c in verdict.conditions if not c.passed]
    n = setting.n

    def first(pred):
        return next((c for c in failing if pred(c)), None)

    c = first(lambda c: c.role == "weight")
    if c is not None:
        i = c.index - 1
        t = setting.q[i] * params.a[i] + setting.beta[i]
        k = key_integral(SiegelPoint.at_height(1.0, n), t + n + 2, t)
        return Witness("divergence", c.index, c.name, evidence=_divergence_dict(k)
                       if is_divergent(k) else {"divergent": False})
    c = first(lambda c: c.role in ("threshold", "c-equality") and c.margin < 0)
    if c is not None:
        return _scan_witness(setting, params, c.index - 1, c.name, -c.margin, "scaling")
    c = first(lambda c: c.role == "integrability")
    if c is not None:
        return _adjoint_witness(setting, params, c.index - 1, c.name)
    c = first(lambda c: c.role == "c-equality")
    if c is not None:
        return _scan_witness(setting, params, c.index - 1, c.name, -c.margin, "equality-surplus")
    c = first(lambda c: c.role.startswith("sup"))
    if c is not None:
        i = c.index - 1
        ev = {"sup_exponent": n + 1 + params.a[i] + params.b[i] - params.c[i]}
        inner = key_integral(SiegelPoint.at_height(1.0, n), params.c[i], params.b[i])
        if is_divergent(inner):
            ev["inner"] = _divergence_dict(inner)
        return Witness("sup-exponent", c.index, c.name, ev["sup_exponent"], evidence=ev)
    c = failing[0]
    return Witness("condition", c.index, c.name, evidence={"margin": c.margin})


# -- identity verification -------------------------------------------------------------

@dataclass
class IdentityRow:
    params: dict
    z: list
    u: list | None
    estimate: Estimate
    exact: complex
    zscore: float
    rel_err: float
    arg_err: float
    passed: bool

    def to_dict(self) -> dict:
        return {"params": self.params, "z": self.z, "u": self.u, "mc": self.estimate.value,
                "stderr": self.estimate.stderr, "exact": self.exact, "zscore": self.zscore,
                "rel_err": self.rel_err, "arg_err": self.arg_err, "pass": self.passed}


@dataclass
class IdentityReport:
    kind: str
    n: int
    rows: list[IdentityRow]
    seconds: float = 0.0

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.rows)

    def to_dict(self) -> dict:
        return {"kind": self.kind, "n": self.n, "pass": self.passed,
                "rows": [r.to_dict() for r in self.rows]}


def default_pair_grid(n: int):
    if n == 1:
        rst = [(2.0, 2.0, 0.0), (3.0, 2.0, 0.5)]
    else:
        rst = [(n + 0.5, 2.0, 0.0), (n + 1.0, 2.5, 0.5)]
    zero = np.zeros(n - 1)
    off = np.full(n - 1, 0.5)
    pts = [(SiegelPoint.at_height(1.0, n), SiegelPoint.at_height(1.0, n)),
           (SiegelPoint.at_height(1.0, n), SiegelPoint.at_height(2.0, n)),
           (SiegelPoint(zero, 1j), SiegelPoint(off, 1.0 + 2j + np.sum(off ** 2) * 1j))]
    return rst, pts


def verify_identity(kind: str, n: int, grid=None, points=None, budget: int = 10**6, seed: int = 0,
                    config: ProposalConfig | None = None, workers: int = 1,
                    z_max: float = 3.0, rel_max: float = 0.02, arg_max: float = 0.02) -> IdentityReport:
    """Monte-Carlo versus closed form for the key integral or the two-kernel integral."""
    import time

    t0 = time.perf_counter()
    config = config or ProposalConfig()
    rows = []
    if kind == "key":
        if grid is None:
            suite = default_suite(n)
        else:
            pts = points or [SiegelPoint.at_height(1.0, n), SiegelPoint.at_height(2.0, n)]
            suite = [KeyParams(s, t, z) for s, t in grid for z in pts]
        for k, kp in enumerate(suite):
            exact = key_integral(kp.z, kp.s, kp.t)
            if is_divergent(exact):
                raise ConfigurationError(f"grid entry (s={kp.s}, t={kp.t}) diverges: {exact}")
        for k, kp in enumerate(suite):
            exact = key_integral(kp.z, kp.s, kp.t)

            def f(w, kp=kp):
                return rho(w) ** kp.t / np.abs(pairing(kp.z, w)) ** kp.s

            est = mc_integrate(f, n, config.for_power(kp.t).dilated(rho(kp.z)), budget, sub_seed(seed, k), workers)
            rows.append(_row({"s": kp.s, "t": kp.t}, kp.z, None, est, exact, z_max, rel_max, arg_max))
    elif kind == "pair":
        rst, pts = default_pair_grid(n)
        rst = grid if grid is not None else rst
        pts = points if points is not None else pts
        for r, s, t in rst:
            const = c1(n, r, s, t)
            if is_divergent(const):
                raise ConfigurationError(f"grid entry (r={r}, s={s}, t={t}) diverges: {const}")
        k = 0
        for r, s, t in rst:
            for z, u in pts:
                exact = pair_integral(z, u, r, s, t)

                def f(w, z=z, u=u, r=r, s=s, t=t):
                    return rho(w) ** t * cpow(pairing(z, w), -r) * cpow(pairing(w, u), -s)

                cfg = config.for_power(t).at_height(math.sqrt(rho(z) * rho(u)))
                est = mc_integrate(f, n, cfg, budget, sub_seed(seed, k), workers)
                rows.append(_row({"r": r, "s": s, "t": t}, z, u, est, exact, z_max, rel_max, arg_max))
                k += 1
    else:
        raise ValueError(f"unknown identity kind {kind!r}")
    return IdentityReport(kind, n, rows, time.perf_counter() - t0)


def _row(params, z, u, est, exact, z_max, rel_max, arg_max) -> IdentityRow:
    exact = complex(exact)
    zs = est.zscore(exact)
    rel = abs(abs(est.value) - abs(exact)) / abs(exact)
    arg = abs(np.angle(est.value / exact)) if est.value != 0 else math.pi
    ok = zs <= z_max and rel <= rel_max and arg <= arg_max and est.rel_err(exact) <= rel_max
    return IdentityRow(params, z.to_list(), None if u is None else u.to_list(), est, exact,
                       zs, rel, float(arg), ok)


# -- duality ----------------------------------------------------------------------------

@dataclass(frozen=True)
class KernelFamily:
    """rho(z)^t rho(w)^t / (rho(z, theta i)^s rho(w, delta i)^s)."""

    s: float
    t: float
    theta: float
    delta: float

    def factor(self, i: int) -> KernelPower:
        return KernelPower(self.t, self.s, (self.theta, self.delta)[i])

    def to_dict(self) -> dict:
        return {"s": self.s, "t": self.t, "theta": self.theta, "delta": self.delta}


def _product_estimate(parts: list[Estimate]) -> tuple[complex, float]:
    value = 1.0 + 0j
    rel2 = 0.0
    for e in parts:
        value *= e.value
        rel2 += (e.stderr / abs(e.value)) ** 2 if e.value != 0 else 0.0
    return value, abs(value) * math.sqrt(rel2)


def duality_exact(setting: Setting, params: FRParams, f: KernelFamily, g: KernelFamily):
    """Closed value of <T f, g>_beta (equal to <f, T* g>_alpha)."""
    n = setting.n
    out = 1.0
    for i in range(2):
        a, b, c = params.a[i], params.b[i], params.c[i]
        h, h2 = (f.theta, f.delta)[i], (g.theta, g.delta)[i]
        big_a = c + f.s - b - f.t - n - 1
        inner = c1(n, c, f.s, b + f.t)
        outer = pair_integral(SiegelPoint.at_height(h2, n), SiegelPoint.at_height(h, n),
                              g.s, big_a, a + g.t + setting.beta[i])
        for v in (inner, outer):
            if is_divergent(v):
                return Divergence(f"index {i + 1}: {v.condition}", v.detail)
        out *= inner * outer
    return complex(out)


@dataclass
class DualityReport:
    lhs: complex
    lhs_stderr: float
    rhs: complex
    rhs_stderr: float
    exact: complex | Divergence
    passed: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "lhs_stderr": self.lhs_stderr, "rhs": self.rhs,
                "rhs_stderr": self.rhs_stderr,
                "exact": _divergence_dict(self.exact) if is_divergent(self.exact) else self.exact,
                "pass": self.passed}


def verify_duality(setting: Setting, params: FRParams, f: KernelFamily, g: KernelFamily | None,
                   budget: int = 10**6, seed: int = 0, config: ProposalConfig | None = None,
                   workers: int = 1, z_max: float = 3.0) -> DualityReport:
    """<T f, g>_beta against <f, T* g>_alpha.

    Inner integrals (the operator images) are closed forms; the outer pairings
    are Monte-Carlo integrals, one per index, multiplied together.
    """
    if g is None:
        return DualityReport(0j, 0.0, 0j, 0.0, 0j, True)
    n = setting.n
    config = config or ProposalConfig()
    adj = params.adjoint(setting)
    lhs_parts, rhs_parts = [], []
    for i in range(2):
        fi, gi = f.factor(i), g.factor(i)
        a, b, c = params.a[i], params.b[i], params.c[i]
        aa, ab, ac = adj.a[i], adj.b[i], adj.c[i]
        be, al = setting.beta[i], setting.alpha[i]
        cfg = config.for_power(min(a + be + g.t, f.t + b)).at_height(math.sqrt(fi.height * gi.height))

        def left(z, fi=fi, gi=gi, a=a, b=b, c=c, be=be):
            return apply_T1(a, b, c, fi, z) * np.conj(gi(z)) * rho(z) ** be

        def right(z, fi=fi, gi=gi, aa=aa, ab=ab, ac=ac, al=al):
            return fi(z) * np.conj(apply_T1(aa, ab, ac, gi, z)) * rho(z) ** al

        for fn in (left, right):
            probe = fn(SiegelPoint.at_height(1.0, n))
            if is_divergent(probe):
                raise ConfigurationError(f"index {i + 1}: operator image diverges: {probe}")
        lhs_parts.append(mc_integrate(left, n, cfg, budget, sub_seed(seed, 2 * i), workers))
        rhs_parts.append(mc_integrate(right, n, cfg, budget, sub_seed(seed, 2 * i + 1), workers))
    lhs, lse = _product_estimate(lhs_parts)
    rhs, rse = _product_estimate(rhs_parts)
    exact = duality_exact(setting, params, f, g)
    ok = abs(lhs - rhs) <= z_max * math.hypot(lse, rse)
    return DualityReport(lhs, lse, rhs, rse, exact, ok)


# -- reproducing formula -------------------------------------------------------------------

@dataclass
class ReproducingReport:
    lhs: complex
    rhs: complex
    ratio: complex
    ratio_without_constant: complex
    expected_without_constant: float
    constants: tuple[float, float]
    s_independence_spread: float
    passed: bool

    def to_dict(self) -> dict:
        return {"lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio,
                "ratio_without_constant": self.ratio_without_constant,
                "expected_without_constant": self.expected_without_constant,
                "constants": list(self.constants), "s_independence_spread": self.s_independence_spread,
                "pass": self.passed}


def verify_reproducing(n: int, gamma, sst, z: SiegelPoint, w: SiegelPoint, tol: float = 1e-10,
                       s_probe=(0.5, 2.0, 7.5)) -> ReproducingReport:
    """f(z,w) = c_g1 c_g2 int int f(u,eta) rho(z,u)^-(n+1+g1) rho(w,eta)^-(n+1+g2) dV_g1 dV_g2.

    f(z,w) = rho(z, theta i)^-s1 rho(w, delta i)^-s2, and the inner integrals are
    two-kernel closed forms.  c_g = Gamma(n+1+g)/(4 pi^n Gamma(1+g)) is the
    normalisation that makes the formula exact.
    """
    s1, s2, theta, delta = sst
    anchors = (SiegelPoint.at_height(theta, n), SiegelPoint.at_height(delta, n))
    lhs = cpow(pairing(z, anchors[0]), -s1) * cpow(pairing(w, anchors[1]), -s2)
    raw = 1.0 + 0j
    for x, anchor, s, g in ((z, anchors[0], s1, gamma[0]), (w, anchors[1], s2, gamma[1])):
        v = pair_integral(x, anchor, n + 1 + g, s, g)
        if is_divergent(v):
            raise ConfigurationError(f"reproducing integral diverges: {v}")
        raw *= v
    consts = tuple(reproducing_constant(n, g) for g in gamma)
    rhs = consts[0] * consts[1] * raw
    ratio = rhs / lhs
    ratio_raw = raw / lhs
    expected = 1.0 / (consts[0] * consts[1])
    spread = 0.0
    for g in gamma:
        logs = [log_c1(n, n + 1 + g, s, g) for s in s_probe]
        spread = max(spread, max(logs) - min(logs))
    ok = (abs(ratio - 1) <= tol and abs(ratio_raw / expected - 1) <= tol and spread <= 1e-12)
    return ReproducingReport(lhs, rhs, ratio, ratio_raw, expected, consts, spread, ok)


# -- distance bound ------------------------------------------------------------------------

def sample_pairs(n: int, size: int, rng: np.random.Generator, log_height: float = 12.0):
    """Independent point pairs whose ratio R = |rho(z,w)|^2/(rho(z) rho(w)) spans ~e^(2 log_height)."""
    return random_points(n, size, rng, log_height), random_points(n, size, rng, log_height)


@dataclass
class DistanceReport:
    n: int
    rows: list[dict]
    symmetry_error: float
    diagonal_max: float
    passed: bool

    def to_dict(self) -> dict:
        return {"n": self.n, "rows": self.rows, "symmetry_error": self.symmetry_error,
                "diagonal_max": self.diagonal_max, "pass": self.passed}


def verify_distance_bound(n: int, eps_list=(0.1, 0.5), pairs: int = 10**5, seed: int = 0,
                          stability: float = 0.10) -> DistanceReport:
    """Fitted C with delta_U <= C (1 + R^eps) on sampled pairs, checked against doubling.

    The fitted constant is the sample max of delta_U/(1 + R^eps) on ``pairs``
    pairs and on twice as many; it must not move by more than ``stability``
    and can never exceed the exact envelope sup_R.
    """
    rng = np.random.default_rng(np.random.SeedSequence([int(seed) & ((1 << 64) - 1), 41]))
    z, w = sample_pairs(n, 2 * pairs, rng)
    dist = bergman_distance(z, w)
    ratio = bergman_ratio(z, w)
    sym = float(np.max(np.abs(dist - bergman_distance(w, z))))
    diag = float(np.max(np.abs(bergman_distance(z, z))))
    rows = []
    ok = sym <= 1e-12 and diag <= 1e-12
    prev = math.inf
    for eps in sorted(eps_list):
        q = dist / (1.0 + ratio ** eps)
        c_half = float(np.max(q[:pairs]))
        c_full = float(np.max(q))
        env = distance_envelope(1.0, eps)
        stable = c_full <= (1 + stability) * c_half
        finite = math.isfinite(c_full)
        below = c_full <= env * (1 + 1e-9)
        monotone = c_full <= prev * (1 + 1e-12)
        prev = c_full
        rows.append({"eps": eps, "C": c_full, "C_half": c_half, "envelope": env,
                     "stable": stable, "finite": finite, "below_envelope": below,
                     "non_increasing": monotone})
        ok = ok and stable and finite and below and monotone
    return DistanceReport(n, rows, sym, diag, ok)
