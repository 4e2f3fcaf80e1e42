import math

import numpy as np
import pytest

from frlab.closed_forms import key_integral, tf_theta_delta
from frlab.geometry import SiegelPoint, bergman_distance, distance_from_ratio
from frlab.mixed_norm import KernelPower, SeparableFn, ZeroFactor
from frlab.mixed_norm import test_function as make_f
from frlab.operators import (apply_S, apply_S_dist, apply_T, apply_T1, apply_T_adjoint, check_domination,
                             distance_envelope, dominate_shifts, shifted_conditions, suggest_epsilon)
from frlab.params import DistParams, FRParams, Setting

WORKED = Setting(1, (2, 2), (4, 4), (0, 0), (1, 1))
P = FRParams((0, 0), (0, 0), (2, 2))
Z, W = SiegelPoint.of([], 0.3 + 1.2j), SiegelPoint.of([], -0.4 + 0.8j)


def test_closed_T_matches_test_function_image():
    params = FRParams((0.2, 0.1), (0.3, 0.0), (2.0, 2.5))
    f = make_f(3, 0.5, 1.5, 0.7)
    assert apply_T(params, f, Z, W) == pytest.approx(tf_theta_delta(params, 3, 0.5, 1.5, 0.7, Z, W), rel=1e-13)


def test_closed_and_mc_T_agree():
    f = make_f(3, 0.5, 1.0, 2.0)
    closed = apply_T(P, f, Z, W)
    est = apply_T(P, f, Z, W, engine="mc", budget=300_000, seed=4)
    assert est.zscore(closed) <= 3


def test_T_of_zero_is_zero():
    f = SeparableFn(ZeroFactor(), KernelPower(0.5, 3))
    assert apply_T(P, f, Z, W) == 0
    assert apply_T(P, f, Z, W, engine="mc", budget=1000).value == 0
    assert apply_T_adjoint(WORKED, P, f, Z, W) == 0


def test_T_factorises():
    f = make_f(3, 0.5, 1.0, 2.0)
    one = apply_T1(0, 0, 2, f.gfactor, Z) * apply_T1(0, 0, 2, f.hfactor, W)
    assert apply_T(P, f, Z, W) == pytest.approx(one, rel=1e-14)


def test_S_of_powers_is_product_of_key_integrals():
    s, t = 4.0, 0.5
    f = SeparableFn(KernelPower(t), KernelPower(t))
    params = FRParams((0, 0), (0, 0), (s, s))
    expected = key_integral(Z, s, t) * key_integral(W, s, t)
    assert apply_S(params, f, Z, W) == pytest.approx(expected, rel=1e-14)
    est = apply_S(params, f, Z, W, engine="mc", budget=300_000, seed=1)
    assert est.value.imag == 0 and est.real > 0
    assert est.zscore(expected) <= 3


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_T_bounded_by_S_of_modulus(seed):
    rng = np.random.default_rng(seed)
    f = make_f(3, 0.5, *rng.uniform(0.5, 2, 2))
    absf = SeparableFn(f.gfactor.abs(), f.hfactor.abs())
    t = apply_T(P, f, Z, W, engine="mc", budget=20_000, seed=seed)
    s = apply_S(P, absf, Z, W, engine="mc", budget=20_000, seed=seed)
    assert abs(t.value) <= s.real * (1 + 1e-12)


def test_adjoint_parameters():
    setting = Setting(1, (2, 2), (2, 2), (0.5, 0.3), (0.5, 0.3))
    params = FRParams((0, 0), (0.5, 0.3), (3, 3))
    adj = params.adjoint(setting)
    assert adj.a == (0.0, 0.0) and adj.b == (0.5, 0.3) and adj.c == (3.0, 3.0)
    g = make_f(3, 0.5, 1.0, 1.0)
    assert apply_T_adjoint(setting, params, g, Z, W) == pytest.approx(apply_T(params, g, Z, W))


def test_dominate_shifts_examples():
    base = FRParams((0.1, 0.2), (0.3, 0.4), (2.0, 2.5))
    same = dominate_shifts(DistParams(base, (0, 0), 0.1))
    assert all(t == base for t in same)
    shifted = dominate_shifts(DistParams(base, (1, 0), 0.1))
    assert shifted[1].a == pytest.approx((0.0, 0.2))
    assert shifted[1].b == pytest.approx((0.2, 0.4))
    assert shifted[1].c == pytest.approx((1.8, 2.5))
    assert shifted[2] == base
    assert shifted[3] == shifted[1]


def test_distance_operator_reduces_to_S():
    f = SeparableFn(KernelPower(0.5, 3, 1.0, modulus=True), KernelPower(0.5, 3, 2.0, modulus=True))
    d0 = apply_S_dist(DistParams(P, (0, 0), 0.1), f, Z, W, budget=20_000, seed=3)
    s = apply_S(P, f, Z, W, engine="mc", budget=20_000, seed=3)
    assert d0 == s
    d1 = apply_S_dist(DistParams(P, (1, 0.5), 0.1), f, Z, W, budget=20_000, seed=3)
    assert d1.real >= 0 and d1.value.imag == 0


@pytest.mark.parametrize("d, eps", [(1.0, 0.1), (1.0, 0.5), (2.0, 0.25), (0.5, 0.2)])
def test_distance_envelope_is_the_sup(d, eps):
    k = distance_envelope(d, eps)
    logr = np.linspace(0, 200, 200_001)
    r = np.exp(logr)
    vals = distance_from_ratio(r) ** d / (1 + r ** (d * eps))
    assert np.max(vals) <= k * (1 + 1e-9)
    assert np.max(vals) >= k * (1 - 1e-6)


def test_domination_holds():
    setting = WORKED
    base = FRParams((0.1, 0.1), (0.2, 0.2), (2.4, 2.4))
    eps = suggest_epsilon(setting, base, (1, 1))
    f = SeparableFn(KernelPower(0.5, 3, 1.0, modulus=True), KernelPower(0.5, 3, 2.0, modulus=True))
    for seed in range(3):
        res = check_domination(DistParams(base, (1, 1), eps), f, Z, W, budget=20_000, seed=seed)
        assert res.holds


def test_suggested_epsilon_keeps_shifted_conditions_strict():
    base = FRParams((0.0, 0.1), (0.0, 0.2), (2.0, 2.3))
    eps = suggest_epsilon(WORKED, base, (1.0, 2.0))
    conds = shifted_conditions(WORKED, DistParams(base, (1.0, 2.0), eps))
    assert all(c.passed for c in conds)
    too_big = shifted_conditions(WORKED, DistParams(base, (1.0, 2.0), 4 * eps))
    assert not all(c.passed for c in too_big)


def test_distance_of_sampled_pair_finite():
    assert math.isfinite(bergman_distance(Z, W))
