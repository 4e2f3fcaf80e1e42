import math

import numpy as np
import pytest

from frlab.closed_forms import c2, key_integral
from frlab.geometry import SiegelPoint, in_domain, pairing, rho
from frlab.sampler import (ConfigurationError, KeyParams, ProposalConfig, calibrate, key_integrand,
                           mc_integrate, mc_integrate2, sample_points)


def test_sample_points_in_domain_with_positive_density():
    for n in (1, 2, 3):
        pts, dens = sample_points(n, ProposalConfig(), np.random.default_rng(0), 5000)
        assert np.all(in_domain(pts))
        assert np.all(dens > 0) and np.all(np.isfinite(dens))


def test_density_normalised():
    # integrating a known probability density on U: rho^0 |rho(i,w)|^-4 / (4 pi)
    est = mc_integrate(lambda w: np.abs(pairing(SiegelPoint.at_height(1.0, 1), w)) ** -4 / (4 * math.pi),
                       1, budget=200_000, seed=3)
    assert abs(est.real - 1.0) <= 3 * est.stderr


def test_anchor_four_pi():
    z = SiegelPoint.at_height(1.0, 1)
    est = mc_integrate(key_integrand(z, 4, 0), 1, ProposalConfig().for_power(0), 10**6, seed=11)
    assert est.zscore(4 * math.pi) <= 3
    assert est.rel_err(4 * math.pi) <= 0.02


def test_weighted_example_at_height_two():
    z = SiegelPoint.at_height(2.0, 1)
    exact = c2(1, 6, 1) / 2 ** 3
    assert exact == pytest.approx(key_integral(z, 6, 1))
    est = mc_integrate(key_integrand(z, 6, 1), 1, ProposalConfig().for_power(1).dilated(2.0), 400_000, seed=5)
    assert est.zscore(exact) <= 3


def test_zero_integrand():
    est = mc_integrate(lambda w: np.zeros(w.shape), 2, budget=1000)
    assert est.value == 0 and est.stderr == 0
    est2 = mc_integrate2(lambda u, e: 0.0, 1, budget=1000)
    assert est2.value == 0 and est2.stderr == 0


def test_nonfinite_integrand_poisons():
    est = mc_integrate(lambda w: np.where(rho(w) > 1, np.inf, 1.0), 1, budget=1000)
    assert est.poisoned and math.isnan(est.stderr)
    assert rho(est.offending_point) > 1


def test_budget_zero_is_configuration_error():
    with pytest.raises(ConfigurationError):
        mc_integrate(lambda w: 1.0, 1, budget=0)
    with pytest.raises(ConfigurationError):
        calibrate(1, budget=0)


def test_invalid_config():
    with pytest.raises(ConfigurationError):
        ProposalConfig(height_tail=0)


def test_determinism_across_workers():
    f = key_integrand(SiegelPoint.at_height(1.0, 2), 6, 0.5)
    runs = [mc_integrate(f, 2, budget=150_000, seed=42, workers=w, block_size=20_000) for w in (1, 2, 4)]
    assert all(r == runs[0] for r in runs)
    other = mc_integrate(f, 2, budget=150_000, seed=43)
    assert other.value != runs[0].value


def test_stderr_scales_with_budget():
    f = key_integrand(SiegelPoint.at_height(1.0, 1), 5, 1)
    cfg = ProposalConfig().for_power(1)
    small = mc_integrate(f, 1, cfg, 20_000, seed=1)
    large = mc_integrate(f, 1, cfg, 200_000, seed=1)
    ratio = small.stderr / large.stderr
    assert math.sqrt(10) / 1.5 <= ratio <= math.sqrt(10) * 1.5


def test_separable_double_integral():
    z, w = SiegelPoint.at_height(1.0, 1), SiegelPoint.at_height(2.0, 1)
    g, h = key_integrand(z, 4, 0), key_integrand(w, 5, 1)
    cfg = (ProposalConfig().for_power(0), ProposalConfig().for_power(1).dilated(2.0))
    est = mc_integrate2(lambda u, e: g(u) * h(e), 1, cfg, 400_000, seed=9)
    assert est.zscore(key_integral(z, 4, 0) * key_integral(w, 5, 1)) <= 3


@pytest.mark.parametrize("n", [1, 2])
def test_default_calibration_passes(n):
    rep = calibrate(n, budget=300_000, seed=0)
    assert rep.passed, [(e.s, e.t, e.zscore, e.rel_err) for e in rep.entries]


def test_halved_density_is_detected():
    def broken(n, config, rng, size):
        pts, dens = sample_points(n, config, rng, size)
        return pts, dens / 2

    suite = [KeyParams(4.0, 0.0, SiegelPoint.at_height(1.0, 1))]
    rep = calibrate(1, suite=suite, budget=200_000, sampler=broken)
    assert not rep.passed
    e = rep.entries[0]
    assert e.estimate.real / e.exact == pytest.approx(2.0, rel=0.05)
