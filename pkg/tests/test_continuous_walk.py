# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest

from bigjump import (
        CompoundPoisson,
        ConfigInvalid,
        Exponential,
        FiniteMarkov,
        LevyTriple,
        ParetoTail,
        PointMixture,
        Sojourn,
        TruncationRule,
        WalkSpec,
        cts_asymptote,
        cts_big_jump_integral,
        cts_iceland_s,
        cts_slln_check,
        gamma_sup,
        pk_exponential_tail,
        sample_cts_supremum,
        simulate_cts_path,
        v2_sup,
)
from bigjump.continuous_walk import CtsSupremumSampler, _CtsEngine
from bigjump.errors import (
        EpsilonOutOfRange,
        GridTooCoarse,
        HorizonCapExceeded,
        NonPositiveThreshold,
        PeriodicModulator,
)

from .scenarios import compound_poisson, pareto_measure, single_state


def infinite_activity(a=-3.0, v2=0.0):
    nu = ParetoTail(1.5, capped=False)
    return WalkSpec(single_state(), {'default': LevyTriple(nu, v2, a)}, nu)


def test_cts_asymptote():
    assert cts_asymptote(pareto_measure(), 20.0) == pytest.approx(0.1)
    assert cts_asymptote(pareto_measure(weight=2.0), 20.0) == pytest.approx(0.2)


def test_cts_big_jump_integral():
    spec = pareto_measure()
    for y in (5.0, 20.0, 200.0):
        exact = spec.reference.nu_int_tail(y) / 0.5
        assert cts_big_jump_integral(spec, y) == pytest.approx(exact, rel=1e-6)
        assert cts_big_jump_integral(spec, y) / cts_asymptote(spec, y) == pytest.approx(1.0, rel=1e-6)


def test_cts_big_jump_integral_beyond_support():
    nu = CompoundPoisson(1.0, PointMixture([2.0]))
    spec = WalkSpec(single_state(), {'default': LevyTriple(nu, 0.0, -1.0)}, nu)
    assert cts_big_jump_integral(spec, 3.0) == 0.0


def test_cts_big_jump_integral_periodic():
    nu = ParetoTail(2.0)
    mod = FiniteMarkov([[0.0, 1.0], [1.0, 0.0]])
    laws = {'default': LevyTriple(nu, 0.0, -0.5)}
    with pytest.raises(PeriodicModulator):
        cts_big_jump_integral(WalkSpec(mod, laws, nu), 10.0)
    spec = WalkSpec(mod, laws, nu, sojourn=Sojourn('exponential', 1.0))
    assert cts_big_jump_integral(spec, 10.0) == pytest.approx(0.2, rel=1e-6)


def test_cts_iceland_s():
    nu = ParetoTail(2.0)
    alpha, beta, gamma, epsilon = 0.5, 1.0, nu.gamma_bound(), 0.04
    ystar, s = cts_iceland_s(nu, alpha, beta, gamma, 0.0, epsilon)
    assert ystar == pytest.approx(5.0)
    K = max(ystar, beta, 1.0)
    residual = -alpha + 2 * epsilon + s * (beta ** 2 * gamma / 2
            + math.exp(s * K) * K ** 2 * gamma)
    assert abs(residual) < 1e-10
    assert s > 0


def test_cts_iceland_s_monotone_in_v2():
    nu = ParetoTail(2.0)
    _, quiet = cts_iceland_s(nu, 0.5, 1.0, 1.0, 0.0, 0.04)
    _, noisy = cts_iceland_s(nu, 0.5, 1.0, 1.0, 1.0, 0.04)
    assert noisy < quiet


def test_cts_iceland_s_degenerate():
    _, s = cts_iceland_s(ParetoTail(2.0), 0.5, 1.0, 0.0, 0.0, 0.04)
    assert s == math.inf


def test_cts_iceland_s_epsilon_range():
    with pytest.raises(EpsilonOutOfRange):
        cts_iceland_s(ParetoTail(2.0), 0.5, 1.0, 1.0, 0.0, 0.3)
    with pytest.raises(EpsilonOutOfRange):
        cts_iceland_s(ParetoTail(2.0), 0.5, 1.0, 1.0, 0.0, 0.0)


def test_pk_exponential_tail():
    assert pk_exponential_tail(1.0, 1.0, -2.0, 0.0) == pytest.approx(0.5)
    assert pk_exponential_tail(1.0, 1.0, -2.0, 2.0) == pytest.approx(0.5 * math.exp(-1.0))
    assert pk_exponential_tail(1.0, 1.0, -2.0, -1.0) == 1.0
    out = pk_exponential_tail(1.0, 1.0, -2.0, np.array([0.0, 1.0]))
    assert out.shape == (2,)


def test_compound_poisson_supremum_matches_oracle():
    n = 20000
    sample = sample_cts_supremum(compound_poisson(), TruncationRule(40.0), 0.01, 1.0,
            np.random.default_rng(8), size=n)
    assert sample.M.shape == (n,)
    assert np.all(sample.M >= 0)
    for y in (0.0, 1.0, 2.0):
        expected = pk_exponential_tail(1.0, 1.0, -2.0, y)
        phat = np.mean(sample.M > y)
        assert abs(phat - expected) < 4 * math.sqrt(expected * (1 - expected) / n)


def test_cts_sampler_batches():
    sampler = CtsSupremumSampler(compound_poisson(), TruncationRule(10.0), 0.01, 1.0,
            batch=300)
    M = sampler.sample(1000, np.random.default_rng(9))
    assert M.size == 1000
    assert sampler.bias_bound == pytest.approx(TruncationRule(10.0).bias_bound(compound_poisson()))


def test_zero_activity_supremum():
    nu = CompoundPoisson(0.0, Exponential(1.0))
    spec = WalkSpec(single_state(), {'default': LevyTriple(nu, 0.0, -1.0)}, nu)
    sample = sample_cts_supremum(spec, TruncationRule(1.0), 0.01, np.inf,
            np.random.default_rng(0), size=100)
    assert np.all(sample.M == 0.0)
    assert sample.bias_bound == 0.0


def test_horizon_cap():
    with pytest.raises(HorizonCapExceeded):
        sample_cts_supremum(compound_poisson(), TruncationRule(1e6), 0.01, 1.0,
                np.random.default_rng(0), size=10, horizon_cap=5.0)


def test_grid_too_coarse():
    with pytest.raises(GridTooCoarse):
        simulate_cts_path(pareto_measure(), 10.0, 0.01, 2.0, np.random.default_rng(0))


def test_non_positive_threshold():
    with pytest.raises(NonPositiveThreshold):
        simulate_cts_path(infinite_activity(), 10.0, 0.0, 1.0, np.random.default_rng(0))


def test_compound_poisson_path_structure():
    spec = compound_poisson()
    path = simulate_cts_path(spec, 100.0, 0.01, 1.0, np.random.default_rng(10))
    assert path.horizon == pytest.approx(100.0)
    assert np.all(np.diff(path.times) >= 0)
    assert len(path) == path.times.size - 1
    # Linear drift between jumps: the supremum sits at a jump time or at 0.
    assert path.supremum == pytest.approx(path.S.max())
    top = path.times[np.argmax(path.S)]
    assert top == 0.0 or np.any(np.isclose(path.jumps.times, top))
    assert path.drift_part() == pytest.approx(-100.0)
    assert path.S[-1] == pytest.approx(path.drift_part() + path.centred_jumps())
    assert path.state_at(50.0) == 0


def test_infinite_activity_path():
    path = simulate_cts_path(infinite_activity(v2=0.5), 10.0, 0.1, np.inf,
            np.random.default_rng(11))
    assert np.all(path.M >= path.S - 1e-12)
    assert np.all(np.diff(path.M) >= 0)
    assert np.all(np.abs(path.jumps.sizes) >= 0.1)


def test_threshold_moves_mass_between_parts():
    spec = infinite_activity()
    coarse = _CtsEngine(spec, 1.0)
    fine = _CtsEngine(spec, 0.1)
    assert fine.sigma2[0] < coarse.sigma2[0]
    assert fine.rates[0] > coarse.rates[0]
    # Compensation keeps the mean rate at a for every threshold.
    assert fine.mu[0] + fine.compensators[0] == pytest.approx(-3.0)
    assert coarse.mu[0] + coarse.compensators[0] == pytest.approx(-3.0)


def test_cts_slln():
    result = cts_slln_check(compound_poisson(), t=2000.0, tol=0.15, k=4, grid_dt=1.0)
    assert result.passed
    assert result.target == pytest.approx(-1.0)
    result = cts_slln_check(pareto_measure(v2=0.25), t=100.0, tol=float('inf'), k=2)
    assert result.passed


def test_triple_from_config():
    triple = LevyTriple.from_config({'nu': {'family': 'ParetoTail', 'alpha': 2.0},
        'v2': 0.25, 'a': -0.5})
    assert triple.mean() == -0.5
    assert triple.nu.nu_tail(2.0) == pytest.approx(0.25)
    with pytest.raises(ConfigInvalid):
        LevyTriple.from_config({'v2': 0.25})
    with pytest.raises(ConfigInvalid):
        LevyTriple.from_config({'nu': {'family': 'ParetoTail', 'alpha': 2.0}, 'v2': -1.0})


def test_suprema_of_loads():
    spec = pareto_measure(v2=0.25)
    assert gamma_sup(spec) == pytest.approx(1.0)
    assert v2_sup(spec) == 0.25
