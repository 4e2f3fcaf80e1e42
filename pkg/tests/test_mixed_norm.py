import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from frlab.closed_forms import f_theta_delta_norm, is_divergent
from frlab.geometry import SiegelPoint, pairing, rho
from frlab.mixed_norm import (KernelPower, SeparableFn, Unimodular, ZeroFactor, ess_sup_norm, factor_norm_closed,
                              mixed_norm_separable)
from frlab.mixed_norm import test_function as make_f
from frlab.params import Setting


def test_closed_norm_example():
    f = make_f(2, 0, 1, 1)
    assert mixed_norm_separable(f, 1, (2, 2), (0, 0)) == pytest.approx(4 * math.pi, rel=1e-14)


def test_closed_norm_agrees_with_test_function_norm():
    setting = Setting(2, (3, 1.5), (3, 3), (0.5, -0.3), (0, 0))
    f = make_f(5, 0.5, 0.7, 2.0)
    assert mixed_norm_separable(f, 2, setting.p, setting.alpha) == pytest.approx(
        f_theta_delta_norm(setting, 5, 0.5, 0.7, 2.0), rel=1e-13)


def test_unimodular_factor_diverges_for_finite_p():
    g = Unimodular(1.5, SiegelPoint.at_height(1.0, 1))
    f = SeparableFn(g, KernelPower(0, 4))
    assert is_divergent(mixed_norm_separable(f, 1, (2, 2), (0, 0)))
    assert mixed_norm_separable(f, 1, (math.inf, 2), (0, 0)) == pytest.approx(
        factor_norm_closed(KernelPower(0, 4), 1, 2, 0))


def test_zero_function():
    f = SeparableFn(ZeroFactor(), KernelPower(0, 4))
    assert mixed_norm_separable(f, 1, (2, 2), (0, 0)) == 0.0


def test_non_separable_rejected():
    with pytest.raises(TypeError):
        mixed_norm_separable(lambda z, w: 1.0, 1, (2, 2), (0, 0))


def test_mc_norm_matches_closed():
    f = make_f(3, 0.5, 1.0, 2.0)
    exact = mixed_norm_separable(f, 1, (2, 2), (0, 0))
    est = mixed_norm_separable(f, 1, (2, 2), (0, 0), method="mc", budget=400_000, seed=2)
    assert est.zscore(exact) <= 3
    assert est.rel_err(exact) <= 0.02


def test_sup_of_constant_is_one():
    one = KernelPower(0.0)
    assert one.sup(1) == 1.0
    assert ess_sup_norm(one, 1, samples=1000) == pytest.approx(1.0)


def test_sup_of_height_ratio_is_at_most_two():
    factor = KernelPower(1.0, 1.0, 1.0, modulus=True)  # rho(z)/|rho(z, i)|
    assert factor.sup(1) == pytest.approx(2.0)
    for n in (1, 2):
        est = ess_sup_norm(factor, n, samples=20_000, seed=n)
        assert 1.9 <= est <= 2.0


@given(st.floats(0.05, 3), st.floats(0.2, 4), st.floats(0.1, 10))
def test_kernel_power_sup_bounds_samples(t, gap, h):
    factor = KernelPower(t, t + gap, h, modulus=True)
    bound = factor.sup(2)
    est = ess_sup_norm(factor, 2, samples=2000, rounds=2)
    assert est <= bound * (1 + 1e-9)
    # the exact maximiser lies on the axis at height t h / gap
    y = t * h / gap
    on_axis = float(factor(SiegelPoint.at_height(y, 2)))
    assert on_axis == pytest.approx(bound, rel=1e-9)


def test_sup_infinite_outside_range():
    assert math.isinf(KernelPower(-0.5, 1).sup(1))
    assert math.isinf(KernelPower(2, 1).sup(1))
    assert is_divergent(factor_norm_closed(KernelPower(2, 1), 1, math.inf, 0))


def test_kernel_power_values():
    z = SiegelPoint.of([0.2j], 0.3 + 2j)
    k = KernelPower(0.5, 3, 2.0, coef=2.0)
    expected = 2.0 * rho(z) ** 0.5 * pairing(z, SiegelPoint.at_height(2.0, 2)) ** -3
    assert k(z) == pytest.approx(expected, rel=1e-13)
    assert k.abs()(z) == pytest.approx(abs(expected), rel=1e-13)
    assert np.all(ZeroFactor()(SiegelPoint.at_height(np.ones(3), 1)) == 0)
