# -*- coding: utf-8 -*-

"""
Regenerative background processes and the walk specification that binds
per-state increment laws (or Lévy triples) to them.
"""

import collections
import logging
import math

import numpy as np
from scipy.sparse import csgraph

from .errors import (
        ConfigInvalid,
        CycleLengthCap,
        GridTooShort,
        InvalidProbability,
        NonNegativeDrift,
        NotIrreducible,
)
from .levy_measures import LevyMeasure
from .tail_laws import ClassVerdict, Empirical, law_from_config, trend_verdict

logger = logging.getLogger(__name__)


class CyclePath(object):
    """
    States visited between two regenerations, the last one included.
    """

    def __init__(self, states, length=None, is_initial=False):
        self.states = np.asarray(states, dtype=int)
        self.length = self.states.size if length is None else length
        self.is_initial = is_initial

    def __len__(self):
        return self.states.size

    def __repr__(self):
        return 'CyclePath(length={}, is_initial={})'.format(self.length, self.is_initial)


class Modulator(object):
    """
    Base class for regenerative background chains on the non-negative
    integers. States are advanced for whole batches of paths at once.
    """
    kind = None
    regen_state = 0
    cycle_cap = 10 ** 8

    def initial_states(self, n, rng):
        raise NotImplementedError

    def step(self, states, rng):
        raise NotImplementedError

    def stationary_law(self):
        """
        :returns: ``(states, probabilities)`` arrays.
        """
        raise NotImplementedError

    def mean_cycle_length(self):
        raise NotImplementedError

    def cycle_tail(self, n):
        """
        Return P(τ₁ > n) for the length of a regular cycle.
        """
        raise NotImplementedError

    def initial_cycle_tail(self, n):
        """
        Return P(τ₀ > n) for the delayed first cycle.
        """
        raise NotImplementedError

    def marginal_sequence(self, count):
        """
        Return a ``(count, len(states))`` array whose row n-1 is the law
        of the state at time n, over the states of :meth:`stationary_law`.
        """
        raise NotImplementedError

    def period(self):
        raise NotImplementedError

    def is_aperiodic(self):
        return self.period() == 1

    def regenerates(self, states):
        return np.asarray(states) == self.regen_state

    def state_paths(self, k, n, rng):
        """
        Simulate ``k`` independent state paths of ``n`` steps.
        """
        out = np.empty((k, n), dtype=int)
        states = self.initial_states(k, rng)
        for t in range(n):
            out[:, t] = states
            states = self.step(states, rng)
        return out

    def sample_cycle(self, rng):
        raise NotImplementedError

    def _check_cap(self, length):
        if length > self.cycle_cap:
            raise CycleLengthCap('cycle longer than {} steps'.format(self.cycle_cap))


class FiniteMarkov(Modulator):
    """
    Irreducible Markov chain on ``0..k-1``; regenerations are the visits
    to ``regen_state``.

    :param P: Transition matrix.
    :param initial: Law of the first state, defaults to the stationary law.
    """
    kind = 'FiniteMarkov'
    block = 2 ** 16

    def __init__(self, P, initial=None, regen_state=0, cycle_cap=None):
        P = np.asarray(P, dtype=float)
        if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] == 0:
            raise ValueError('transition matrix must be square')
        if np.any(P < 0) or np.any(np.abs(P.sum(axis=1) - 1.0) > 1e-9):
            raise InvalidProbability('transition matrix rows must be probability vectors')
        count, _ = csgraph.connected_components(P > 0, directed=True,
                connection='strong')
        if count != 1:
            raise NotIrreducible('transition matrix has {} communicating classes'.format(count))
        self.P = P / P.sum(axis=1, keepdims=True)
        self.k = P.shape[0]
        if not 0 <= regen_state < self.k:
            raise ValueError('regen_state must be a state of the chain')
        self.regen_state = int(regen_state)
        if cycle_cap is not None:
            self.cycle_cap = int(cycle_cap)

        self._pi = self._solve_stationary()
        if initial is None:
            initial = self._pi
        initial = np.asarray(initial, dtype=float)
        if initial.shape != (self.k,) or np.any(initial < 0) or abs(initial.sum() - 1.0) > 1e-9:
            raise InvalidProbability('initial law must be a probability vector over the states')
        self.initial = initial / initial.sum()

        self._cum = np.cumsum(self.P, axis=1)
        self._cum[:, -1] = 1.0
        self._initial_cum = np.cumsum(self.initial)
        self._initial_cum[-1] = 1.0

        self._taboo = self.P.copy()
        self._taboo[:, self.regen_state] = 0.0
        self._taboo[self.regen_state, :] = 0.0

    def _solve_stationary(self):
        system = np.vstack([self.P.T - np.eye(self.k), np.ones(self.k)])
        rhs = np.zeros(self.k + 1)
        rhs[-1] = 1.0
        pi, *_ = np.linalg.lstsq(system, rhs, rcond=None)
        pi = np.maximum(pi, 0.0)
        return pi / pi.sum()

    def initial_states(self, n, rng):
        u = rng.random(n)
        return np.searchsorted(self._initial_cum, u, side='right')

    def step(self, states, rng):
        u = rng.random(states.size)
        return (u[:, None] >= self._cum[states]).sum(axis=1)

    def state_paths(self, k, n, rng):
        """
        Simulate ``k`` independent state paths of ``n`` steps.

        Each block of steps turns its uniforms into per-step transition
        maps and composes them by prefix doubling, so long paths run
        without a per-step Python loop.
        """
        out = np.empty((k, n), dtype=int)
        if n == 0:
            return out
        states = self.initial_states(k, rng)
        for i in range(k):
            state = states[i]
            out[i, 0] = state
            for lo in range(1, n, self.block):
                hi = min(n, lo + self.block)
                u = rng.random(hi - lo)
                # maps[t, x] starts as the next state from x and ends as the state t + 1 steps on
                maps = (u[:, None, None] >= self._cum[None, :, :]).sum(axis=2)
                width = 1
                while width < maps.shape[0]:
                    maps[width:] = np.take_along_axis(maps[width:], maps[:-width], axis=1)
                    width *= 2
                out[i, lo:hi] = maps[:, state]
                state = out[i, hi - 1]
        return out

    def stationary_law(self):
        return np.arange(self.k), self._pi.copy()

    def mean_cycle_length(self):
        return 1.0 / self._pi[self.regen_state]

    def _avoid_tail(self, start, n):
        # P(no visit to the regeneration state in steps 1..n | law ``start`` at step 1)
        n = np.floor(np.asarray(n, dtype=float))
        out = np.ones(n.shape)
        for idx, m in np.ndenumerate(n):
            if m >= 1:
                power = np.linalg.matrix_power(self._taboo, int(m) - 1)
                out[idx] = (start @ power).sum()
        return out if out.ndim else float(out)

    def cycle_tail(self, n):
        start = self.P[self.regen_state].copy()
        start[self.regen_state] = 0.0
        return self._avoid_tail(start, n)

    def initial_cycle_tail(self, n):
        start = self.initial.copy()
        start[self.regen_state] = 0.0
        return self._avoid_tail(start, n)

    def marginal_sequence(self, count):
        out = np.empty((count, self.k))
        dist = self.initial.copy()
        for n in range(count):
            out[n] = dist
            dist = dist @ self.P
        return out

    def period(self):
        level = {0: 0}
        queue = collections.deque([0])
        edges = np.argwhere(self.P > 0)
        while queue:
            x = queue.popleft()
            for y in np.flatnonzero(self.P[x] > 0):
                if y not in level:
                    level[y] = level[x] + 1
                    queue.append(y)
        d = 0
        for x, y in edges:
            d = math.gcd(d, abs(level[x] + 1 - level[y]))
        return d

    def sample_cycle(self, rng):
        x = self.regen_state
        states = []
        while True:
            x = int(np.searchsorted(self._cum[x], rng.random(), side='right'))
            states.append(x)
            if x == self.regen_state:
                break
            self._check_cap(len(states))
        return CyclePath(states)


class Countdown(Modulator):
    """
    From state 0 jump to j ≥ 1 with probability p₀ⱼ, then count down
    j, j-1, ..., 1 and return to 0. Cycles end in state 1 and the
    chain starts in state 0.

    :param p0j: Integer-valued law on {1, 2, ...} of the jump out of 0.
    :param warmup: Number of steps for which the marginal law is
        propagated exactly before it is replaced by the stationary law.
    """
    kind = 'Countdown'
    regen_state = 1

    state_tolerance = 1e-13
    max_states = 10 ** 6

    def __init__(self, p0j, warmup=200, cycle_cap=None):
        if p0j.support_lower < 1:
            raise ValueError('countdown jump law must live on {1, 2, ...}')
        self.p0j = p0j
        self.warmup = int(warmup)
        if cycle_cap is not None:
            self.cycle_cap = int(cycle_cap)
        self._mean_cycle = 1.0 + p0j.mean()
        if not np.isfinite(self._mean_cycle):
            raise ValueError('countdown jump law must have a finite mean')

        top = 1
        while p0j.tail(top) >= self.state_tolerance and top < self.max_states:
            top *= 2
        tails = p0j.tail(np.arange(top + 1, dtype=float))
        small = np.flatnonzero(tails < self.state_tolerance)
        self.top = int(small[0]) if small.size else top
        self._tails = tails[:self.top + 1]
        # _jump_probs[j] = P(J = j) = P(J > j-1) - P(J > j)
        self._jump_probs = np.zeros(self.top + 1)
        self._jump_probs[1:] = self._tails[:-1] - self._tails[1:]

        pi = np.empty(self.top + 1)
        pi[0] = 1.0
        pi[1:] = self._tails[:-1]
        self._pi = pi / pi.sum()

    def initial_states(self, n, rng):
        return np.zeros(n, dtype=int)

    def step(self, states, rng):
        out = states - 1
        zero = states == 0
        jumps = self.p0j._quantile(rng.random(int(zero.sum())))
        out[zero] = jumps.astype(int)
        return out

    def stationary_law(self):
        return np.arange(self.top + 1), self._pi.copy()

    def mean_cycle_length(self):
        return self._mean_cycle

    def cycle_tail(self, n):
        return self.p0j.tail(np.floor(n) - 1.0)

    def initial_cycle_tail(self, n):
        n = np.asarray(n, dtype=float)
        out = np.where(n < 0, 1.0, 0.0)
        return out if out.ndim else float(out)

    def marginal_sequence(self, count):
        out = np.empty((count, self.top + 1))
        dist = np.zeros(self.top + 1)
        dist[0] = 1.0
        exact = min(count, self.warmup)
        for n in range(exact):
            out[n] = dist
            nxt = np.zeros_like(dist)
            nxt[0] = dist[1]
            nxt[1:-1] = dist[2:]
            nxt[1:] += dist[0] * self._jump_probs[1:]
            dist = nxt
        out[exact:] = self._pi
        return out

    def period(self):
        lengths = np.flatnonzero(self._jump_probs > 0)[:1000] + 1
        d = 0
        for length in lengths:
            d = math.gcd(d, int(length))
        return d

    def sample_cycle(self, rng):
        j = int(self.p0j._quantile(np.array([rng.random()]))[0])
        self._check_cap(j + 1)
        return CyclePath([0] + list(range(j, 0, -1)))


class Sojourn(object):
    """
    Time spent in each state by the continuous-time embedding.
    """
    kinds = ('deterministic', 'exponential')

    def __init__(self, kind='deterministic', mean=1.0):
        if kind not in self.kinds:
            raise ValueError('sojourn kind must be one of {}'.format(self.kinds))
        if not mean > 0:
            raise ValueError('sojourn mean must be positive')
        self.kind = kind
        self.mean = float(mean)

    def draw(self, n, rng):
        if self.kind == 'deterministic':
            return np.full(n, self.mean)
        return rng.exponential(self.mean, n)


def modulator_from_config(config, field='modulator'):
    if isinstance(config, Modulator):
        return config
    if not isinstance(config, dict) or 'kind' not in config:
        raise ConfigInvalid(field, "expected a mapping with a 'kind' key")
    params = dict(config)
    kind = params.pop('kind')
    try:
        if kind == 'FiniteMarkov':
            return FiniteMarkov(**params)
        if kind == 'Countdown':
            p0j = law_from_config(params.pop('p0j', None), field + '.p0j')
            return Countdown(p0j, **params)
    except (TypeError, ValueError) as e:
        raise ConfigInvalid(field, str(e))
    raise ConfigInvalid(field, 'unknown modulator kind {!r}'.format(kind))


class WalkSpec(object):
    """
    A modulator together with the per-state increment laws (discrete
    time) or Lévy triples (continuous time), the reference law or
    measure and the tail weights c(x).

    :param laws: Mapping from state to law; the key ``'default'`` covers
        every state not listed.
    :param weights: Mapping from state to c(x), same ``'default'``
        convention; unlisted states get weight 1.
    """

    def __init__(self, modulator, laws, reference, weights=None, sojourn=None):
        self.modulator = modulator
        self.reference = reference
        self.sojourn = sojourn or Sojourn()
        self.mode = 'continuous' if isinstance(reference, LevyMeasure) else 'discrete'

        laws = dict(laws)
        self.default = laws.pop('default', None)
        self.laws = {int(k): v for k, v in laws.items()}
        weights = dict(weights or {})
        self.default_weight = float(weights.pop('default', 1.0))
        self.weights = {int(k): float(v) for k, v in weights.items()}
        for x, c in list(self.weights.items()) + [('default', self.default_weight)]:
            if not 0.0 <= c <= 1.0:
                raise ConfigInvalid('c', 'weight of state {} must lie in [0, 1]'.format(x))

        self.law_table = []
        for law in list(self.laws.values()) + [self.default]:
            if law is not None and not any(law is other for other in self.law_table):
                self.law_table.append(law)
        top = max(self.laws) if self.laws else -1
        beyond = self._table_index(self.default) if self.default is not None else -1
        self._lookup = np.full(top + 2, beyond, dtype=int)
        for x, law in self.laws.items():
            self._lookup[x] = self._table_index(law)

        states, _ = modulator.stationary_law()
        if np.any(self.law_index(states) < 0):
            raise ConfigInvalid('laws', 'every state needs a law or a default')

    def _table_index(self, law):
        for i, other in enumerate(self.law_table):
            if other is law:
                return i
        raise KeyError(law)

    def law_index(self, states):
        states = np.asarray(states, dtype=int)
        return self._lookup[np.minimum(states, self._lookup.size - 1)]

    def law_for(self, state):
        return self.law_table[int(self.law_index(state))]

    def weight_for(self, state):
        return self.weights.get(int(state), self.default_weight)

    def weight_vector(self, states):
        return np.array([self.weight_for(x) for x in states])

    def state_means(self):
        if self.mode == 'continuous':
            return np.array([triple.a for triple in self.law_table])
        return np.array([law.mean() for law in self.law_table])

    def __repr__(self):
        return 'WalkSpec(mode={!r}, modulator={}, laws={})'.format(
                self.mode, self.modulator.kind, len(self.law_table))


def stationary_law(mod):
    """
    Return ``(states, probabilities)`` of the stationary measure π.
    """
    return mod.stationary_law()


def sample_cycle(mod, rng):
    return mod.sample_cycle(rng)


def drift_constant(spec, strict=True):
    """
    Return a = -Σ π(x)·mean(F_x), the negated stationary drift.

    :raises NonNegativeDrift: when ``strict`` and a is not finite and
        strictly positive.
    """
    states, pi = spec.modulator.stationary_law()
    a = -float(pi @ spec.state_means()[spec.law_index(states)])
    if strict and not (np.isfinite(a) and a > 0):
        raise NonNegativeDrift(a)
    return a


def weight_constant(spec):
    """
    Return C = Σ π(x)·c(x).
    """
    states, pi = spec.modulator.stationary_law()
    return float(pi @ spec.weight_vector(states))


class KappaTrace(object):

    def __init__(self, value, betas, values):
        self.value = value
        self.trace = list(zip(np.asarray(betas, dtype=float).tolist(),
            np.asarray(values, dtype=float).tolist()))

    def __float__(self):
        return float(self.value)

    def __repr__(self):
        return 'KappaTrace(value={}, n={})'.format(self.value, len(self.trace))


def _truncated_drift(spec, law, beta):
    if spec.mode == 'continuous':
        return law.a + law.nu.truncated_left_excess(beta)
    return law.truncated_mean(beta)


def kappa(spec, beta_grid, tolerance=1e-6):
    """
    Trace sup_x a_x^β over ``beta_grid`` and return its limit.

    :raises GridTooShort: if the last two values differ by more than
        ``tolerance``.
    :rtype: KappaTrace
    """
    betas = np.asarray(beta_grid, dtype=float)
    if betas.size < 2 or np.any(betas <= 0) or np.any(np.diff(betas) <= 0):
        raise GridTooShort('beta grid must hold at least two increasing positive values')
    states, pi = spec.modulator.stationary_law()
    present = np.unique(spec.law_index(states[pi > 0]))
    values = np.array([max(_truncated_drift(spec, spec.law_table[i], beta) for i in present)
        for beta in betas])
    if abs(values[-1] - values[-2]) > tolerance:
        raise GridTooShort('kappa trace has not settled: {} -> {}'.format(values[-2], values[-1]))
    return KappaTrace(float(values[-1]), betas, values)


def _reference_tails(reference, levels):
    if isinstance(reference, LevyMeasure):
        return reference.nu_tail(levels), reference.nu_int_tail(levels)
    return reference.tail(levels), reference.int_tail(levels)


def check_d4(mod, b, reference, levels, time_scale=1.0, cycle_samples=None,
        tolerance=0.05):
    """
    Compare the scaled cycle-length tails with the reference:
    P(bτ₀ > n)/F̄ᴵ(n) and P(bτ₁ > n)/F̄(n) must both decay to 0.

    Exact cycle tails are used unless ``cycle_samples`` (observed regular
    cycle lengths) is given, in which case levels beyond the data are
    left undecided.

    :param time_scale: Duration of one discrete step, for the
        continuous-time embedding with deterministic sojourns.
    :rtype: ClassVerdict
    """
    levels = np.asarray(levels, dtype=float)
    if b < 0:
        raise ValueError('b must be non-negative')
    if b == 0:
        zeros = np.zeros_like(levels)
        return ClassVerdict(ClassVerdict.CONSISTENT, zip(levels, zeros), tolerance,
                target=0.0, initial_trace=list(zip(levels.tolist(), zeros.tolist())))

    scaled = levels / (b * time_scale)
    if cycle_samples is not None:
        observed = Empirical(cycle_samples)
        regular = np.where(scaled < observed.samples[-1], observed.tail(scaled), np.nan)
        initial = np.where(scaled < observed.samples[-1], mod.initial_cycle_tail(scaled), np.nan)
    else:
        regular = mod.cycle_tail(scaled)
        initial = mod.initial_cycle_tail(scaled)

    tail, int_tail = _reference_tails(reference, levels)
    with np.errstate(divide='ignore', invalid='ignore'):
        ratios = regular / tail
        initial_ratios = initial / int_tail

    first = trend_verdict(ratios, 0.0, tolerance)
    second = trend_verdict(initial_ratios, 0.0, tolerance)
    if ClassVerdict.INCONSISTENT in (first, second):
        verdict = ClassVerdict.INCONSISTENT
    elif first == second == ClassVerdict.CONSISTENT:
        verdict = ClassVerdict.CONSISTENT
    else:
        verdict = ClassVerdict.INCONCLUSIVE
    return ClassVerdict(verdict, zip(levels, ratios), tolerance, target=0.0,
            initial_trace=list(zip(levels.tolist(), np.asarray(initial_ratios).tolist())))


def dense_grid(reference, size=200):
    """
    Levels spanning the bulk and far tail of the reference law or measure.
    """
    if isinstance(reference, LevyMeasure):
        return np.geomspace(1e-3, 1e6, size)
    u = np.concatenate([np.linspace(0.0, 0.99, size // 2),
        1.0 - np.geomspace(1e-2, 1e-12, size - size // 2)])
    return np.unique(reference.quantile(u))


def check_domination(spec, levels=None):
    """
    Check F̄_x ≤ F̄ (or ν̄_x ≤ ν̄) for every law on a dense grid.

    :raises ConfigInvalid: naming the first dominated law that exceeds
        the reference.
    """
    levels = dense_grid(spec.reference) if levels is None else np.asarray(levels, dtype=float)
    for i, law in enumerate(spec.law_table):
        if spec.mode == 'continuous':
            mine, ref = law.nu.nu_tail(levels), spec.reference.nu_tail(levels)
        else:
            mine, ref = law.tail(levels), spec.reference.tail(levels)
        over = mine > ref * (1.0 + 1e-9) + 1e-15
        if over.any():
            raise ConfigInvalid('laws', 'law {!r} exceeds the reference tail at y={}'.format(
                law, levels[np.argmax(over)]))
    return True


def check_tail_weights(spec, levels=None, tolerance=0.05):
    """
    Trace int_tail(F_x)/int_tail(F) against c(x) for every distinct
    (law, weight) pair carried by the stationary law.

    :returns: dict mapping ``(law index, weight)`` to :class:`ClassVerdict`.
    """
    if levels is None:
        if spec.mode == 'continuous':
            levels = np.geomspace(1.0, 1e6, 12)
        else:
            levels = np.unique(spec.reference.quantile(1.0 - np.geomspace(1e-2, 1e-12, 12)))
    levels = np.asarray(levels, dtype=float)
    states, pi = spec.modulator.stationary_law()
    states = states[pi > 0]
    pairs = sorted(set(zip(spec.law_index(states).tolist(),
        spec.weight_vector(states).tolist())))

    _, ref_int = _reference_tails(spec.reference, levels)
    out = dict()
    for index, weight in pairs:
        law = spec.law_table[index]
        if spec.mode == 'continuous':
            mine = law.nu.nu_int_tail(levels)
        else:
            mine = law.int_tail(levels)
        with np.errstate(divide='ignore', invalid='ignore'):
            ratios = mine / ref_int
        verdict = trend_verdict(ratios, weight, tolerance)
        out[(index, weight)] = ClassVerdict(verdict, zip(levels, ratios), tolerance,
                target=weight)
    return out
