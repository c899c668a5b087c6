# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest
from scipy import optimize, stats

from bigjump import (
        Pareto,
        Shifted,
        TruncationRule,
        WalkSpec,
        asymptote,
        big_jump_series,
        drift_constant,
        exp_bound_check,
        iceland_constants,
        int_tail_level,
        lindley_tail,
        sample_supremum,
        shift_spec,
        simulate_path,
        slln_check,
)
from bigjump.discrete_walk import DiscreteSupremumSampler
from bigjump.errors import (
        IncrementBoundViolated,
        PeriodicModulator,
        StepCapExceeded,
)

from .scenarios import (
        alternating,
        compound_poisson,
        exponential_walk,
        single_state,
        two_state,
        unmodulated_pareto,
)


def exponential_walk_tail(y):
    # ξ = E - 1.5 with E ~ Exp(1): P(M > y) = (1 - θ)e^{-θy} where
    # E e^{θξ} = 1.
    theta = optimize.brentq(lambda t: 1.5 * t + math.log(1.0 - t), 0.1, 0.9)
    return (1.0 - theta) * np.exp(-theta * np.asarray(y, dtype=float))


def test_empty_path():
    path = simulate_path(unmodulated_pareto(), 0, np.random.default_rng(0))
    assert len(path) == 0
    assert list(path.S) == [0.0]
    assert list(path.M) == [0.0]


def test_path_increments_ks():
    spec = unmodulated_pareto()
    path = simulate_path(spec, 10 ** 5, np.random.default_rng(1))
    assert len(path) == 10 ** 5
    assert stats.kstest(path.increments, spec.reference.cdf).statistic < 0.01
    assert np.all(path.M >= path.S)
    assert np.all(path.regenerations)


def test_path_follows_states():
    spec = alternating()
    path = simulate_path(spec, 20000, np.random.default_rng(2))
    assert np.all(np.diff(path.states) != 0)
    first = path.increments[path.states == 0]
    second = path.increments[path.states == 1]
    assert stats.kstest(first, spec.law_for(0).cdf).statistic < 0.025
    # State 1 puts 0.6 of its mass on the atom at -1.3.
    share = np.mean(np.isclose(second, -1.3, atol=1e-9))
    assert abs(share - 0.6) < 4 * math.sqrt(0.24 / second.size)


def test_simulate_path_needs_discrete_spec():
    with pytest.raises(ValueError):
        simulate_path(compound_poisson(), 10, np.random.default_rng(0))


def test_dominating_laws_raise_the_path():
    spec = two_state([[0.5, 0.5], [0.5, 0.5]])
    upper = WalkSpec(spec.modulator, {'default': spec.reference}, spec.reference)
    for seed in range(5):
        low = simulate_path(spec, 500, np.random.default_rng(seed))
        high = simulate_path(upper, 500, np.random.default_rng(seed))
        assert np.array_equal(low.states, high.states)
        assert np.all(low.increments <= high.increments + 1e-9)
        assert np.all(low.M <= high.M + 1e-9)


def test_supremum_is_non_negative():
    rule = TruncationRule(20.0)
    sample = sample_supremum(two_state(), rule, np.random.default_rng(3), size=500)
    assert np.all(sample.M >= 0)
    assert np.all(sample.stopped_at >= 1)
    assert sample.bias_bound == pytest.approx(rule.bias_bound(two_state()))


def test_supremum_scalar():
    sample = sample_supremum(exponential_walk(), TruncationRule(10.0),
            np.random.default_rng(4))
    assert isinstance(sample.M, float)
    assert sample.M >= 0


def test_supremum_matches_ladder_tail():
    n = 20000
    sampler = DiscreteSupremumSampler(exponential_walk(), TruncationRule(30.0), batch=5000)
    M = sampler.sample(n, np.random.default_rng(5))
    assert M.size == n
    for y in (0.0, 1.0, 2.0):
        expected = float(exponential_walk_tail(y))
        phat = np.mean(M > y)
        assert abs(phat - expected) < 4 * math.sqrt(expected * (1 - expected) / n)


def test_lindley_tail_matches_ladder_tail():
    law = exponential_walk().reference
    grid = np.array([0.5, 1.0, 2.0, 4.0])
    assert lindley_tail(law, grid) == pytest.approx(exponential_walk_tail(grid), rel=0.03)


def test_bias_bound_decreases_in_distance():
    spec = unmodulated_pareto()
    bounds = [TruncationRule(L).bias_bound(spec) for L in (10.0, 100.0, 1000.0)]
    assert bounds[0] > bounds[1] > bounds[2] > 0


def test_step_cap():
    rule = TruncationRule(1e6, step_cap=10)
    with pytest.raises(StepCapExceeded):
        sample_supremum(exponential_walk(), rule, np.random.default_rng(0), size=10)


def test_truncation_rule_for_grid():
    spec = unmodulated_pareto()
    rule = TruncationRule.for_grid(spec, [1.0, 10.0, 100.0])
    target = 0.01 * spec.reference.int_tail(100.0)
    assert spec.reference.int_tail(rule.L) == pytest.approx(target, rel=1e-4)
    assert rule.n_min == 10
    assert TruncationRule.for_grid(spec, [1.0], L=50.0).L == 50.0
    with pytest.raises(ValueError):
        TruncationRule(0.0)


def test_int_tail_level():
    reference = unmodulated_pareto().reference
    # F̄ᴵ(y) = 1/(2.5 + y)
    assert int_tail_level(reference, 1e-3) == pytest.approx(997.5, rel=1e-5)
    assert int_tail_level(reference, 0.5, start=10.0) == 10.0
    assert int_tail_level(compound_poisson().reference, math.exp(-5.0)) == pytest.approx(5.0, rel=1e-5)


def test_asymptote():
    spec = unmodulated_pareto()
    assert asymptote(spec, 9.0) == pytest.approx(2.0 / 11.5)
    assert asymptote(spec, 9.0) == pytest.approx(0.17391, abs=1e-5)


def test_asymptote_scales_with_weights():
    law = Shifted(Pareto(2.0), -1.5)
    silent = WalkSpec(single_state(), {'default': law}, law, weights={'default': 0.0})
    assert asymptote(silent, 5.0) == 0.0
    half = WalkSpec(single_state(), {'default': law}, law, weights={'default': 0.5})
    assert 2 * asymptote(half, 5.0) == pytest.approx(asymptote(unmodulated_pareto(), 5.0))


@pytest.mark.parametrize('spec,y', [
    (unmodulated_pareto(), 50.0),
    (unmodulated_pareto(), 500.0),
    (two_state(), 100.0),
])
def test_big_jump_series_matches_asymptote(spec, y):
    assert big_jump_series(spec, y) / asymptote(spec, y) == pytest.approx(1.0, abs=0.02)


def test_big_jump_series_offset():
    spec = unmodulated_pareto()
    plain = big_jump_series(spec, 50.0)
    faster = big_jump_series(spec, 50.0, drift_offset=0.5)
    assert faster < plain
    with pytest.raises(ValueError):
        big_jump_series(spec, 50.0, drift_offset=-1.0)


def test_big_jump_series_underflow():
    assert big_jump_series(exponential_walk(), 1000.0) == 0.0


def test_big_jump_series_periodic():
    with pytest.raises(PeriodicModulator):
        big_jump_series(alternating(), 50.0)


def test_shift_spec():
    spec = two_state()
    shifted = shift_spec(spec, 0.2)
    assert drift_constant(shifted) == pytest.approx(0.4)
    assert shifted.weight_for(1) == pytest.approx(0.4)
    assert shifted.reference.tail(10.2) == pytest.approx(spec.reference.tail(10.0))


def test_iceland_constants():
    c = iceland_constants(Pareto(2.0), 0.25, 1.0)
    # (2t + 1)/(1 + t)² = 1/16 at t = y*.
    expected = (2.0 + math.sqrt(3.75)) / 0.125 - 1.0
    assert c.ystar == pytest.approx(expected, rel=1e-5)
    assert c.ystar == pytest.approx(31.0, abs=1.0)
    assert c.epsilon == pytest.approx((1.0 + c.ystar) ** -2)
    assert c.epsilon == pytest.approx(9.77e-4, rel=0.05)
    assert c.K == max(c.beta, c.ystar, c.K0)
    assert abs(c.residual()) < 1e-10
    assert c.bound(0.0) == 1.0
    assert c.drift_margin() <= 0.75 * c.alpha


def test_iceland_constants_monotone_in_alpha():
    loose = iceland_constants(Pareto(2.0), 0.5, 1.0)
    tight = iceland_constants(Pareto(2.0), 0.25, 1.0)
    assert loose.ystar < tight.ystar


def test_iceland_constants_needs_positive_margin():
    with pytest.raises(ValueError):
        iceland_constants(Pareto(2.0), 0.0, 1.0)
    with pytest.raises(ValueError):
        iceland_constants(Pareto(2.0), 0.25, -1.0)


def test_exp_bound_check():
    reference = Pareto(2.0)
    constants = iceland_constants(reference, 0.25, 1.0)
    laws = [Shifted(reference, -1.5), Shifted(reference, -2.0)]
    grid = np.array([1.0, 5.0, 10.0, 50.0])
    report = exp_bound_check(constants, reference, laws, 2000, grid,
            np.random.default_rng(6), n_steps=300, martingale_steps=20)
    assert report.violations == 0
    assert report.coupling_violations == 0
    assert report.supermartingale_ok
    assert report.drift_margin_ok
    assert len(report.martingale_means) == 21
    assert report.r_hat >= 0
    assert report.as_dict()['y_grid'] == grid.tolist()


def test_exp_bound_check_rejects_bad_laws():
    reference = Pareto(2.0)
    constants = iceland_constants(reference, 0.25, 1.0)
    rng = np.random.default_rng(0)
    with pytest.raises(IncrementBoundViolated):
        exp_bound_check(constants, reference, [Pareto(1.5)], 10, [1.0], rng)
    with pytest.raises(IncrementBoundViolated):
        exp_bound_check(constants, reference, [Shifted(reference, -0.9)], 10, [1.0], rng)


def test_slln():
    result = slln_check(unmodulated_pareto(), n=1000, tol=float('inf'), k=2)
    assert result.passed
    assert result.target == pytest.approx(-0.5)
    assert len(result.observed) == 2

    result = slln_check(two_state(), n=10 ** 5, tol=0.05, k=2, seed=3)
    assert result.passed
    assert result.target == pytest.approx(-0.6)
