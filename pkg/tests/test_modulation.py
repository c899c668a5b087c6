# -*- coding: utf-8 -*-

import math

import numpy as np
import pytest

from bigjump import (
        ClassVerdict,
        ConfigInvalid,
        Countdown,
        Exponential,
        FiniteMarkov,
        Lattice,
        NonNegativeDrift,
        Pareto,
        PointMixture,
        Shifted,
        WalkSpec,
        Weibull,
        check_d4,
        check_domination,
        check_tail_weights,
        drift_constant,
        kappa,
        sample_cycle,
        stationary_law,
        weight_constant,
)
from bigjump.errors import GridTooShort, InvalidProbability, NotIrreducible
from bigjump.modulation import modulator_from_config

from .scenarios import alternating, single_state, two_state, unmodulated_pareto


def countdown(gamma=0.5, c=0.7):
    return Countdown(Lattice(Weibull(gamma, c ** (-1.0 / gamma))))


def test_finite_markov_stationary_law():
    states, pi = stationary_law(FiniteMarkov([[0.0, 1.0], [1.0, 0.0]]))
    assert list(states) == [0, 1]
    assert np.allclose(pi, [0.5, 0.5])

    states, pi = stationary_law(FiniteMarkov([[0.9, 0.1], [0.3, 0.7]]))
    assert np.allclose(pi, [0.75, 0.25])


def test_finite_markov_rejects_bad_matrices():
    with pytest.raises(NotIrreducible):
        FiniteMarkov([[1.0, 0.0], [0.0, 1.0]])
    with pytest.raises(InvalidProbability):
        FiniteMarkov([[0.5, 0.4], [0.5, 0.5]])
    with pytest.raises(ValueError):
        FiniteMarkov([[1.0, 0.0]])


def test_period():
    assert FiniteMarkov([[0.0, 1.0], [1.0, 0.0]]).period() == 2
    assert FiniteMarkov([[0.5, 0.5], [0.5, 0.5]]).period() == 1
    assert not FiniteMarkov([[0.0, 1.0], [1.0, 0.0]]).is_aperiodic()
    assert countdown().period() == 1


def test_alternating_cycles():
    mod = FiniteMarkov([[0.0, 1.0], [1.0, 0.0]], regen_state=1)
    rng = np.random.default_rng(0)
    for _ in range(20):
        assert len(sample_cycle(mod, rng)) == 2


def test_finite_markov_cycle_tail():
    mod = FiniteMarkov([[0.5, 0.5], [0.5, 0.5]])
    assert mod.mean_cycle_length() == pytest.approx(2.0)
    # Geometric return time with success probability 1/2.
    assert mod.cycle_tail(3) == pytest.approx(0.125)


def test_countdown_single_atom():
    mod = Countdown(PointMixture([1.0]))
    states, pi = stationary_law(mod)
    assert mod.mean_cycle_length() == pytest.approx(2.0)
    assert np.allclose(pi[:2], [0.5, 0.5])


def test_countdown_cycle_lengths():
    mod = countdown()
    rng = np.random.default_rng(5)
    lengths = np.array([len(sample_cycle(mod, rng)) for _ in range(20000)])
    expected = mod.mean_cycle_length()
    sd = lengths.std() / math.sqrt(lengths.size)
    assert abs(lengths.mean() - expected) < 4 * sd
    for n in (2, 5, 20):
        assert np.mean(lengths > n) == pytest.approx(mod.cycle_tail(n), abs=0.015)


def test_countdown_cycle_path():
    mod = Countdown(PointMixture([3.0]))
    cycle = mod.sample_cycle(np.random.default_rng(0))
    assert list(cycle.states) == [0, 3, 2, 1]


def test_occupancy_matches_stationary_law():
    mod = FiniteMarkov([[0.9, 0.1], [0.3, 0.7]])
    rng = np.random.default_rng(2)
    paths = mod.state_paths(200, 400, rng)
    share = np.mean(paths[:, 100:] == 0)
    assert share == pytest.approx(0.75, abs=0.02)


def test_long_state_paths_cross_blocks():
    flip = FiniteMarkov([[0.0, 1.0], [1.0, 0.0]])
    flip.block = 7
    paths = flip.state_paths(3, 50, np.random.default_rng(0))
    assert np.all(np.abs(np.diff(paths, axis=1)) == 1)

    sticky = FiniteMarkov([[0.9, 0.1], [0.3, 0.7]])
    sticky.block = 1000
    path = sticky.state_paths(1, 20000, np.random.default_rng(1))[0]
    assert path.mean() == pytest.approx(0.25, abs=0.03)
    leaving = path[1:][path[:-1] == 0]
    assert np.mean(leaving == 1) == pytest.approx(0.1, abs=0.015)


def test_drift_and_weight_constants():
    spec = two_state([[0.0, 1.0], [1.0, 0.0]])
    assert drift_constant(spec) == pytest.approx(0.6)
    assert weight_constant(spec) == pytest.approx(0.7)
    assert drift_constant(unmodulated_pareto()) == pytest.approx(0.5)
    assert weight_constant(unmodulated_pareto()) == pytest.approx(1.0)


def test_drift_allows_mixed_signs():
    mod = FiniteMarkov([[0.0, 1.0], [1.0, 0.0]])
    laws = {0: PointMixture([1.0]), 1: PointMixture([-2.0])}
    spec = WalkSpec(mod, laws, PointMixture([1.0]), weights={'default': 0.0})
    assert drift_constant(spec) == pytest.approx(0.5)
    assert weight_constant(spec) == 0.0


def test_non_negative_drift():
    law = Shifted(Pareto(2.0), -0.5)
    spec = WalkSpec(single_state(), {'default': law}, law)
    with pytest.raises(NonNegativeDrift) as e:
        drift_constant(spec)
    assert 'finite and strictly positive' in str(e.value)
    assert drift_constant(spec, strict=False) == pytest.approx(-0.5)


def test_kappa():
    law = Shifted(Exponential(1.0), -1.5)
    spec = WalkSpec(single_state(), {'default': law}, law)
    assert float(kappa(spec, [1.0, 2.0, 4.0, 8.0])) == pytest.approx(-0.5)

    law = PointMixture([-10.0, 1.0])
    spec = WalkSpec(single_state(), {'default': law}, law)
    trace = kappa(spec, [2.0, 10.0, 20.0])
    values = [v for _, v in trace.trace]
    assert values == pytest.approx([-0.5, -4.5, -4.5])


def test_kappa_grid_too_short():
    spec = unmodulated_pareto()
    with pytest.raises(GridTooShort):
        kappa(spec, [1.0])
    law = PointMixture([-10.0, 1.0])
    spec = WalkSpec(single_state(), {'default': law}, law)
    with pytest.raises(GridTooShort):
        kappa(spec, [2.0, 4.0])


def test_d4_zero_b():
    verdict = check_d4(countdown(), 0.0, Pareto(2.0), np.linspace(10, 100, 5))
    assert verdict.consistent


def test_d4_geometric_cycles():
    mod = FiniteMarkov([[0.5, 0.5], [0.5, 0.5]])
    verdict = check_d4(mod, 1.0, Pareto(2.0), np.linspace(5, 200, 10))
    assert verdict.consistent


def test_d4_countdown_threshold():
    gamma, c = 0.5, 0.7
    reference = Weibull(gamma)
    levels = np.geomspace(100.0, 1e5, 10)
    # b^γ < c keeps P(bτ > y) negligible against e^{-√y}.
    small = check_d4(countdown(gamma, c), 0.25, reference, levels)
    assert small.consistent
    large = check_d4(countdown(gamma, c), 0.9, reference, levels)
    assert large.verdict == ClassVerdict.INCONSISTENT


def test_d4_negative_b():
    with pytest.raises(ValueError):
        check_d4(countdown(), -1.0, Pareto(2.0), [1.0, 2.0])


def test_domination():
    assert check_domination(two_state())
    heavy = Pareto(1.5)
    spec = WalkSpec(single_state(), {'default': heavy}, Pareto(2.0))
    with pytest.raises(ConfigInvalid):
        check_domination(spec)


def test_tail_weights():
    verdicts = check_tail_weights(two_state())
    assert len(verdicts) == 2
    for (index, weight), verdict in verdicts.items():
        assert verdict.target == weight
        assert verdict.consistent


def test_walk_spec_needs_every_state():
    mod = FiniteMarkov([[0.5, 0.5], [0.5, 0.5]])
    with pytest.raises(ConfigInvalid):
        WalkSpec(mod, {0: Pareto(2.0)}, Pareto(2.0))
    with pytest.raises(ConfigInvalid):
        WalkSpec(mod, {'default': Pareto(2.0)}, Pareto(2.0), weights={0: 1.5})


def test_modulator_from_config():
    mod = modulator_from_config({'kind': 'FiniteMarkov', 'P': [[0, 1], [1, 0]]})
    assert mod.period() == 2
    mod = modulator_from_config({'kind': 'Countdown',
        'p0j': {'family': 'PointMixture', 'atoms': [2.0]}})
    assert mod.mean_cycle_length() == pytest.approx(3.0)
    with pytest.raises(ConfigInvalid):
        modulator_from_config({'kind': 'SemiMarkov'})


def test_alternating_spec_periodic():
    assert alternating().modulator.period() == 2
