"""Acceptance suite: one test per criterion, each recording a single pass/fail line."""

import math
import time

import numpy as np

from frlab.cli import main
from frlab.closed_forms import key_integral, reproducing_constant
from frlab.criteria import BOUNDED, FINITE_CASES, UNBOUNDED, check_bounded
from frlab.experiments import (DEFAULT_GRID, KernelFamily, scaling_scan, scan_mc_check, unboundedness_witness,
                               verify_distance_bound, verify_duality, verify_identity, verify_reproducing)
from frlab.geometry import SiegelPoint, pairing, random_points, rho
from frlab.params import FRParams, Setting
from frlab.schur import build_certificate, verify_certificate_algebra, verify_certificate_integrals
from oracle import REGIMES, draw, oracle

WORKED = Setting(1, (2, 2), (4, 4), (0, 0), (1, 1))
WORKED_PARAMS = FRParams((0, 0), (0, 0), (2, 2))
BUDGET = 10**6


def _identity_summary(rep):
    return (f"max|z|={max(r.zscore for r in rep.rows):.2f} max rel={max(r.rel_err for r in rep.rows):.4f} "
            f"max arg={max(r.arg_err for r in rep.rows):.4f} {rep.seconds:.1f}s")


def test_criterion_1_key_identity(record):
    ok, details = True, []
    # anchor: int_U |rho(i,w)|^-4 dV = 4 pi at n = 1
    anchor = key_integral(SiegelPoint.at_height(1.0, 1), 4, 0)
    ok &= abs(anchor - 4 * math.pi) <= 1e-12 * 4 * math.pi
    for n in (1, 2):
        rep = verify_identity("key", n, budget=BUDGET, seed=0, rel_max=0.02, z_max=3.0)
        grid = {(r.params["s"], r.params["t"]) for r in rep.rows}
        points = {tuple(r.z) for r in rep.rows}
        ok &= rep.passed and rep.seconds <= 60 and len(grid) >= 3 and len(points) >= 2
        if n == 1:
            row = next(r for r in rep.rows if r.params == {"s": 4.0, "t": 0.0} and r.z == [1j])
            ok &= row.zscore <= 3 and row.rel_err <= 0.02
        details.append(f"n={n}: {_identity_summary(rep)}")
    assert record(1, "key integral identity", ok, "; ".join(details))


def test_criterion_2_pair_identity(record):
    ok, details = True, []
    for n in (1, 2):
        rep = verify_identity("pair", n, budget=BUDGET, seed=0, rel_max=0.02, arg_max=0.02, z_max=3.0)
        grid = {(r.params["r"], r.params["s"], r.params["t"]) for r in rep.rows}
        ok &= rep.passed and rep.seconds <= 60 and len(grid) >= 2 and len(rep.rows) >= 6
        details.append(f"n={n}: {_identity_summary(rep)}")
    assert record(2, "two-kernel integral identity", ok, "; ".join(details))


SCAN_CASES = [
    (WORKED, WORKED_PARAMS),
    (WORKED, FRParams((0, 0), (0, 0), (1.5, 2))),
    (Setting(2, (1.5, 3), (3, 4), (0.5, -0.5), (1, 0)), FRParams((0.25, 0), (0.5, 0.25), (4, 3.5))),
]


def test_criterion_3_scaling_law(record):
    ok, worst = True, 0.0
    for setting, params in SCAN_CASES:
        scan = scaling_scan(setting, params)
        ok &= scan.ok
        n, s, t = setting.n, scan.s, scan.t
        for i, label in enumerate(("theta", "delta")):
            big_a = params.c[i] + s - params.b[i] - t - n - 1
            f_exp = (n + 1 + setting.alpha[i]) / setting.p[i] + t - s
            tf_exp = (n + 1 + setting.beta[i]) / setting.q[i] + params.a[i] - big_a
            for key, exp in ((f"f_{label}", f_exp), (f"Tf_{label}", tf_exp)):
                err = abs(scan.slopes[key] - exp)
                worst = max(worst, err)
                ok &= err <= 1e-9
        grid = [r[0] for r in scan.rows[:len(DEFAULT_GRID)]]
        ok &= min(grid) == 2.0 ** -6 and max(grid) == 2.0 ** 6
    mc = scan_mc_check(WORKED, WORKED_PARAMS, budget=BUDGET, seed=0, tol=5e-2)
    ok &= mc.passed and len(mc.rows) == 3
    mc_err = max(r["rel_err"] for r in mc.rows)
    assert record(3, "test-function scaling law", ok,
                  f"max slope error {worst:.1e}; MC rel err {mc_err:.4f}, MC slope {mc.slope:.4f} vs {mc.analytic:.4f}")


def test_criterion_4_criterion_oracle(record):
    rng = np.random.default_rng(20240601)
    seen, mismatches = set(), 0
    t0 = time.perf_counter()
    for _ in range(10_000):
        n, p, q, al, be, a, b, c = draw(rng)
        expected = oracle(n, p, q, al, be, a, b, c)
        v = check_bounded(Setting(n, p, q, al, be), FRParams(a, b, c))
        mismatches += (v.outcome, v.case_tag, v.failing) != expected
        seen.add(expected[1])
    seconds = time.perf_counter() - t0
    missing = set(REGIMES) - seen
    ok = mismatches == 0 and not missing and seconds <= 10
    assert record(4, "criterion oracle agreement", ok,
                  f"10000 draws, {mismatches} mismatches, {len(seen - {None})} tags, {seconds:.1f}s")


def _c_deficit_only(verdict):
    fails = [c for c in verdict.conditions if not c.passed]
    return fails and all(c.role in ("threshold", "c-equality") and c.margin < 0 for c in fails)


def test_criterion_5_necessity_sufficiency(record):
    rng = np.random.default_rng(7)
    finite_tags = [t for t in REGIMES if not t.startswith("sup")]
    witnesses = certs = 0
    ok, worst_exp, worst_spread = True, 0.0, 0.0
    for k in range(1000):
        n, p, q, al, be, a, b, c = draw(rng, finite_tags[k % len(finite_tags)])
        if min(c) <= 0:
            continue
        setting, params = Setting(n, p, q, al, be), FRParams(a, b, c)
        v = check_bounded(setting, params)
        if v.outcome == UNBOUNDED and v.case_tag in FINITE_CASES and _c_deficit_only(v):
            w = unboundedness_witness(setting, params)
            err = abs(w.exponent - w.deficit) if w.exponent is not None else math.inf
            worst_exp = max(worst_exp, err)
            ok &= err <= 1e-2
            witnesses += 1
        elif v.outcome == BOUNDED and v.case_tag in FINITE_CASES:
            cert = build_certificate(setting, params)
            alg = verify_certificate_algebra(cert, setting, params)
            ints = verify_certificate_integrals(cert, setting, params, 20, seed=k)
            spread = max(ints.data.get("p_side_spread", 0.0), ints.data.get("q_side_spread", 0.0))
            worst_spread = max(worst_spread, spread)
            ok &= alg.passed and ints.passed and spread <= 1e-9
            certs += 1
    ok &= witnesses > 0 and certs > 0
    assert record(5, "necessity/sufficiency consistency", ok,
                  f"{witnesses} witnesses (max |E-deficit| {worst_exp:.1e}), "
                  f"{certs} certificates (max spread {worst_spread:.1e})")


DUALITY_PAIRS = [
    (KernelFamily(3.0, 0.5, 1.0, 1.0), KernelFamily(3.0, 0.5, 1.0, 1.0)),
    (KernelFamily(3.0, 0.5, 1.0, 1.0), KernelFamily(3.0, 0.5, 2.0, 0.5)),
    (KernelFamily(3.5, 0.5, 0.5, 2.0), KernelFamily(3.0, 0.25, 1.0, 1.5)),
    (KernelFamily(4.0, 1.0, 1.0, 1.0), KernelFamily(3.5, 0.5, 0.7, 1.3)),
    (KernelFamily(3.0, 0.25, 2.0, 2.0), KernelFamily(4.0, 1.0, 0.5, 0.5)),
]


def test_criterion_6_duality(record):
    ok, zs = True, []
    for k, (f, g) in enumerate(DUALITY_PAIRS):
        rep = verify_duality(WORKED, WORKED_PARAMS, f, g, budget=BUDGET, seed=k)
        zs.append(abs(rep.lhs - rep.rhs) / math.hypot(rep.lhs_stderr, rep.rhs_stderr))
        ok &= rep.passed
    assert record(6, "duality <Tf,g> = <f,T*g>", ok, f"5 pairs, max |z| {max(zs):.2f}")


def test_criterion_7_reproducing(record):
    cases = [(1, (0.0, 0.0), (2.0, 3.0)), (2, (0.5, 1.5), (1.0, 4.0)), (1, (-0.5, 2.0), (0.5, 2.5))]
    ok, worst = True, 0.0
    for n, gamma, s in cases:
        z = SiegelPoint.of([0.3j] * (n - 1), 0.2 + 1.5j)
        w = SiegelPoint.of([-0.1] * (n - 1), -0.7 + 0.9j)
        rep = verify_reproducing(n, gamma, (*s, 1.3, 0.4), z, w)
        expected = 1.0 / (reproducing_constant(n, gamma[0]) * reproducing_constant(n, gamma[1]))
        err = max(abs(rep.ratio - 1), abs(rep.ratio_without_constant / expected - 1))
        worst = max(worst, err)
        ok &= rep.passed and err <= 1e-10
    assert record(7, "reproducing formula with normalising constant", ok, f"max error {worst:.1e}")


def test_criterion_8_geometry(record):
    rng = np.random.default_rng(8)
    ok, worst = True, 0.0
    for n in (1, 2, 3):
        z, w = random_points(n, 100_000, rng), random_points(n, 100_000, rng)
        rz, rw = rho(z), rho(w)
        scale = np.maximum(1.0, np.maximum(rz, rw))
        e1 = np.max(np.abs(pairing(z, z) - rz) / np.maximum(1.0, rz))
        pzw, pwz = pairing(z, w), pairing(w, z)
        e2 = np.max(np.abs(pzw - np.conj(pwz)) / np.maximum(1.0, np.abs(pzw)))
        dz = np.sum(np.abs(z.zprime - w.zprime) ** 2, axis=-1)
        e3 = np.max(np.abs(pzw.real - (rz + rw + dz) / 2) / (scale + dz))
        strict = bool(np.all(2 * np.abs(pzw) > np.maximum(rz, rw)))
        worst = max(worst, e1, e2, e3)
        ok &= e1 <= 1e-12 and e2 <= 1e-12 and e3 <= 1e-12 and strict
    assert record(8, "geometry invariants", ok, f"3 x 1e5 pairs, max defect {worst:.1e}")


def test_criterion_9_distance(record):
    ok, parts = True, []
    for n in (1, 2):
        rep = verify_distance_bound(n, (0.1, 0.5), pairs=100_000, seed=n)
        ok &= rep.passed and rep.symmetry_error <= 1e-12 and rep.diagonal_max <= 1e-12
        for row in rep.rows:
            ok &= math.isfinite(row["C"]) and row["C"] <= 1.1 * row["C_half"]
            parts.append(f"n={n} eps={row['eps']}: C={row['C']:.4f}")
    assert record(9, "distance kernel bound", ok, ", ".join(parts))


DETERMINISM_RUNS = [
    ["apply", "--n", "2", "--a", "0,0", "--b", "0,0", "--c", "3,3", "--s", "4", "--t", "0.5",
     "--engine", "both", "--budget", "200000"],
    ["identity", "--kind", "pair", "--n", "1", "--budget", "100000"],
    ["duality", "--n", "1", "--p", "2,2", "--q", "4,4", "--alpha", "0,0", "--beta", "1,1", "--a", "0,0",
     "--b", "0,0", "--c", "2,2", "--f", "3,0.5,1,1", "--g", "3,0.5,2,1", "--budget", "100000"],
    ["scan", "--n", "1", "--p", "2,2", "--q", "4,4", "--alpha", "0,0", "--beta", "1,1", "--a", "0,0",
     "--b", "0,0", "--c", "2,2", "--mc-check", "true", "--budget", "100000", "--format", "csv"],
    ["norm", "--n", "2", "--p", "2,inf", "--alpha", "0,0", "--s", "4", "--t", "1", "--method", "mc"],
    ["calibrate", "--n", "2", "--budget", "100000"],
    ["distance", "--n", "2", "--pairs", "20000"],
    ["schur", "--n", "1", "--p", "2,2", "--q", "4,4", "--alpha", "0,0", "--beta", "1,1", "--a", "0,0",
     "--b", "0,0", "--c", "2,2"],
]


def test_criterion_10_determinism(record, tmp_path):
    ok, identical = True, 0
    for k, argv in enumerate(DETERMINISM_RUNS):
        cfg = tmp_path / f"run{k}.cfg"
        cfg.write_text("seed = 12345\n")
        outputs = []
        for rep, workers in enumerate((1, 1, 2, 4)):
            out = tmp_path / f"out{k}_{rep}"
            code = main(argv + ["--config", str(cfg), "--workers", str(workers), "--output", str(out)])
            ok &= code in (0, 1)
            outputs.append(out.read_bytes())
        same = all(o == outputs[0] for o in outputs)
        identical += same
        ok &= same
    assert record(10, "byte-identical CLI reports", ok,
                  f"{identical}/{len(DETERMINISM_RUNS)} commands identical over workers 1,1,2,4")
