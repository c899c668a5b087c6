# -*- coding: utf-8 -*-

import math
import warnings

import numpy as np
import pytest

from bigjump import (
        CompoundPoisson,
        ConfigInvalid,
        Exponential,
        ParetoTail,
        TwoSided,
        WeibullTail,
        measure_from_config,
)
from bigjump.errors import NonPositiveLevel, NonPositiveThreshold


@pytest.fixture
def pareto():
    # ν̄(y) = min(1, y^-2)
    return ParetoTail(2.0)


@pytest.fixture
def poisson():
    return CompoundPoisson(1.0, Exponential(1.0))


def test_nu_tail(pareto, poisson):
    assert pareto.nu_tail(2.0) == pytest.approx(0.25)
    assert pareto.nu_tail(0.5) == pytest.approx(1.0)
    assert poisson.nu_tail(1.0) == pytest.approx(math.exp(-1.0))


def test_nu_tail_needs_positive_level(pareto):
    with pytest.raises(NonPositiveLevel):
        pareto.nu_tail(0.0)
    with pytest.raises(NonPositiveLevel):
        pareto.nu_int_tail(-1.0)


def test_nu_int_tail(pareto, poisson):
    assert pareto.nu_int_tail(1.0) == pytest.approx(1.0)
    assert pareto.nu_int_tail(20.0) == pytest.approx(0.05)
    assert poisson.nu_int_tail(1.0) == pytest.approx(math.exp(-1.0))


def test_gamma_bound(pareto, poisson):
    assert pareto.gamma_bound() == pytest.approx(1.0)
    # λ·E[1 ∧ J²] for unit exponential jumps is 2 - 4/e.
    assert poisson.gamma_bound() == pytest.approx(2.0 - 4.0 * math.exp(-1.0), rel=1e-8)
    far = ParetoTail(2.0, lower=3.0, weight=0.5)
    assert far.gamma_bound() == pytest.approx(far.nu_tail(1.0))


def test_split_at(pareto):
    upper, lower = pareto.split_at(2.0)
    assert upper.nu_tail(3.0) == pytest.approx(1.0 / 9)
    assert lower.nu_tail(3.0) == 0.0
    for y in (0.5, 1.5, 2.0, 7.0):
        assert upper.nu_tail(y) == pytest.approx(pareto.nu_tail(max(y, 2.0)))
    assert upper.gamma_bound() + lower.gamma_bound() == pytest.approx(pareto.gamma_bound())
    assert upper.nu_int_tail(0.5) + lower.nu_int_tail(0.5) == pytest.approx(
            pareto.nu_int_tail(0.5))
    with pytest.raises(NonPositiveLevel):
        pareto.split_at(0.0)


def test_sample_jumps(pareto):
    rng = np.random.default_rng(3)
    jumps = pareto.sample_jumps(1.0, 1000.0, rng)
    assert abs(len(jumps) - 1000) < 3 * math.sqrt(1000)
    assert np.all(np.diff(jumps.times) >= 0)
    assert np.all(jumps.sizes > 1.0)
    share = np.mean(jumps.sizes > 2.0)
    assert abs(share - 0.25) < 3 * math.sqrt(0.25 * 0.75 / len(jumps))


def test_sample_jumps_empty_horizon(pareto):
    jumps = pareto.sample_jumps(1.0, 0.0, np.random.default_rng(0))
    assert len(jumps) == 0
    assert list(jumps) == []


def test_sample_jumps_two_sided():
    nu = TwoSided(ParetoTail(2.0), CompoundPoisson(1.0, Exponential(1.0)))
    jumps = nu.sample_jumps(0.5, 2000.0, np.random.default_rng(11))
    assert np.all(np.abs(jumps.sizes) > 0.5)
    down = jumps.sizes < 0
    rate_up, rate_down = nu.large_jump_rates(0.5)
    share = down.mean()
    expected = rate_down / (rate_up + rate_down)
    assert abs(share - expected) < 4 * math.sqrt(expected * (1 - expected) / len(jumps))


def test_small_jump_stats(pareto, poisson):
    variance, compensator = pareto.small_jump_stats(1.0)
    assert compensator == pytest.approx(2.0)
    # Below the cap the measure has no mass at all.
    assert variance == pytest.approx(0.0, abs=1e-12)

    variance, compensator = poisson.small_jump_stats(1e-9)
    assert compensator == pytest.approx(1.0, rel=1e-6)
    assert variance == pytest.approx(0.0, abs=1e-12)

    with pytest.raises(NonPositiveThreshold):
        pareto.small_jump_stats(0.0)


def test_small_jump_variance_shrinks():
    nu = ParetoTail(1.5, capped=False)
    variances = [nu.small_jump_stats(delta)[0] for delta in (1.0, 0.1, 0.01)]
    assert variances[0] > variances[1] > variances[2] > 0
    # ∫_0^δ y² ν(dy) = 3 δ^0.5 for ν̄(y) = y^-1.5
    assert variances[1] == pytest.approx(3.0 * 0.1 ** 0.5, rel=1e-6)


def test_weibull_tail():
    nu = WeibullTail(0.5, weight=2.0)
    assert nu.nu_tail(4.0) == pytest.approx(2.0 * math.exp(-2.0))
    assert nu.finite


def test_measure_from_config():
    nu = measure_from_config({'family': 'CompoundPoisson', 'rate': 2.0,
        'jump': {'family': 'Exponential', 'rate': 1.0}})
    assert nu.nu_tail(1.0) == pytest.approx(2.0 * math.exp(-1.0))
    with pytest.raises(ConfigInvalid):
        measure_from_config({'family': 'Stable'})
    with pytest.raises(ConfigInvalid):
        measure_from_config({'family': 'ParetoTail', 'alpha': 0.5})


def test_tails_near_the_origin_stay_quiet():
    capped = ParetoTail(3.0)
    uncapped = ParetoTail(1.5, capped=False)
    levels = np.array([1e-250, 1e-12, 0.5, 2.0])
    with warnings.catch_warnings():
        warnings.simplefilter('error', RuntimeWarning)
        assert capped.nu_tail(levels) == pytest.approx([1.0, 1.0, 1.0, 0.125])
        assert capped.nu_int_tail(levels)[-1] == pytest.approx(0.5 * 2.0 ** -2)
        assert capped.gamma_bound() > 0
        tail = uncapped.nu_tail(levels)
    assert np.isinf(tail[0]) or tail[0] > 1e300
    assert tail[-1] == pytest.approx(2.0 ** -1.5)
