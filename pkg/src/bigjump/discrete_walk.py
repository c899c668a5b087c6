# -*- coding: utf-8 -*-

"""
Discrete-time modulated random walk.

Increments are drawn by inversion of shared uniforms through the
per-state laws, paths are advanced in vectorised batches, and the
supremum M = sup_n S_n is read off once the walk has fallen a distance
L below its running maximum.
"""

import collections
import functools
import logging
import math

import numpy as np
from scipy import optimize, signal

from .errors import (
        IncrementBoundViolated,
        NoFiniteYstar,
        ParameterInequalityViolated,
        PeriodicModulator,
        StepCapExceeded,
)
from .levy_measures import LevyMeasure
from .modulation import WalkSpec, drift_constant, dense_grid, weight_constant
from .process import WorkerPool
from .tail_laws import Shifted

logger = logging.getLogger(__name__)


SupremumSample = collections.namedtuple('SupremumSample', 'M stopped_at bias_bound')


class WalkPath(object):
    """
    One simulated path: increments ξ, partial sums S (with S_0 = 0),
    running maxima M, the state trace and the regeneration marks.
    """

    def __init__(self, increments, states, regenerations):
        self.increments = np.asarray(increments, dtype=float)
        self.states = np.asarray(states, dtype=int)
        self.regenerations = np.asarray(regenerations, dtype=bool)
        self.S = np.concatenate([[0.0], np.cumsum(self.increments)])
        self.M = np.maximum.accumulate(self.S)

    def __len__(self):
        return self.increments.size


def _invert(spec, states, u):
    idx = spec.law_index(states)
    out = np.empty(u.shape)
    for i in np.unique(idx):
        mask = idx == i
        out[mask] = spec.law_table[i]._quantile(u[mask])
    return out


def draw_increments(spec, states, rng):
    """
    Draw one increment per entry of ``states`` from F_state.
    """
    states = np.asarray(states, dtype=int)
    return _invert(spec, states, rng.random(states.shape))


def simulate_path(spec, n_steps, rng):
    """
    Simulate the state trace and increments of one path of ``n_steps``.

    :rtype: WalkPath
    """
    if spec.mode != 'discrete':
        raise ValueError('simulate_path needs a discrete-time spec')
    states = spec.modulator.state_paths(1, int(n_steps), rng)[0]
    increments = draw_increments(spec, states, rng)
    return WalkPath(increments, states, spec.modulator.regenerates(states))


def _reference_int_tail(reference, y):
    if isinstance(reference, LevyMeasure):
        return reference.nu_int_tail(y)
    return reference.int_tail(y)


def int_tail_level(reference, target, start=1.0):
    """
    Return the level where the integrated tail of the reference law (or
    measure) falls to ``target``, or ``start`` if it is already below.
    """
    if not target > 0:
        return start
    f = lambda y: math.log(max(float(_reference_int_tail(reference, y)), 1e-300)) - math.log(target)
    if f(start) <= 0:
        return start
    hi = start
    for _ in range(200):
        if f(hi) <= 0:
            break
        hi *= 2.0
    return optimize.brentq(f, start, hi, xtol=1e-6 * hi)


class TruncationRule(object):
    """
    Stop a path at the first step n ≥ n_min with S_n ≤ M_n - L.

    In continuous time ``n_min`` is read as a minimum time.
    """
    step_cap = 10 ** 7
    safety_factor = 2.0

    def __init__(self, L, n_min=1, step_cap=None, safety_factor=None):
        if not L > 0:
            raise ValueError('truncation distance L must be positive')
        self.L = float(L)
        self.n_min = n_min
        if step_cap is not None:
            self.step_cap = int(step_cap)
        if safety_factor is not None:
            self.safety_factor = float(safety_factor)

    def __repr__(self):
        return 'TruncationRule(L={}, n_min={}, step_cap={}, safety_factor={})'.format(
                self.L, self.n_min, self.step_cap, self.safety_factor)

    def as_dict(self):
        return dict(L=self.L, n_min=self.n_min, step_cap=self.step_cap,
                safety_factor=self.safety_factor)

    def bias_bound(self, spec):
        """
        First-order estimate (C/a)·F̄ᴵ(L)·safety of the chance that the
        walk would still have raised its maximum after stopping.
        """
        a = drift_constant(spec)
        C = weight_constant(spec)
        return C / a * float(_reference_int_tail(spec.reference, self.L)) * self.safety_factor

    @classmethod
    def for_grid(cls, spec, y_grid, fraction=0.01, **kwargs):
        """
        Pick L so that F̄ᴵ(L) is ``fraction`` of F̄ᴵ at the top of the
        y-grid, and n_min as ten mean cycle lengths (in time units for
        the continuous embedding).
        """
        drift_constant(spec)
        top = float(np.max(y_grid))
        target = fraction * float(_reference_int_tail(spec.reference, max(top, 1e-9)))
        if 'L' not in kwargs:
            kwargs['L'] = int_tail_level(spec.reference, target, start=max(top, 1.0))
        if 'n_min' not in kwargs:
            n_min = 10.0 * spec.modulator.mean_cycle_length()
            if spec.mode == 'continuous':
                kwargs['n_min'] = n_min * spec.sojourn.mean
            else:
                kwargs['n_min'] = int(math.ceil(n_min))
        rule = cls(**kwargs)
        logger.debug('truncation rule %r', rule)
        return rule


def sample_supremum(spec, trunc, rng, size=None):
    """
    Sample the supremum of the walk under a truncation rule.

    :returns: ``(M, stopped_at, bias_bound)``; arrays when ``size`` is
        given.
    :raises StepCapExceeded: if a path is still running after
        ``trunc.step_cap`` steps.
    """
    drift_constant(spec)
    n = 1 if size is None else int(size)
    mod = spec.modulator
    states = mod.initial_states(n, rng)
    S = np.zeros(n)
    M = np.zeros(n)
    stopped = np.zeros(n, dtype=int)
    active = np.arange(n)
    step = 0
    while active.size:
        step += 1
        if step > trunc.step_cap:
            raise StepCapExceeded('{} paths still running after {} steps'.format(
                active.size, trunc.step_cap))
        S[active] += draw_increments(spec, states[active], rng)
        M[active] = np.maximum(M[active], S[active])
        done = (S[active] <= M[active] - trunc.L) if step >= trunc.n_min else np.zeros(active.size, bool)
        stopped[active[done]] = step
        states[active] = mod.step(states[active], rng)
        active = active[~done]
    logger.debug('%d paths stopped after at most %d steps', n, step)

    bias = trunc.bias_bound(spec)
    if size is None:
        return SupremumSample(float(M[0]), int(stopped[0]), bias)
    return SupremumSample(M, stopped, bias)


class DiscreteSupremumSampler(object):
    """
    Picklable sampler of supremum values for :class:`~bigjump.process.WorkerPool`.
    """
    batch = 20000

    def __init__(self, spec, rule, batch=None):
        self.spec = spec
        self.rule = rule
        if batch is not None:
            self.batch = int(batch)

    @property
    def bias_bound(self):
        return self.rule.bias_bound(self.spec)

    def sample(self, n, rng):
        parts = []
        left = int(n)
        while left > 0:
            size = min(left, self.batch)
            parts.append(sample_supremum(self.spec, self.rule, rng, size=size).M)
            left -= size
        if not parts:
            return np.zeros(0)
        return np.concatenate(parts)


def asymptote(spec, y):
    """
    Return (C/a)·F̄ᴵ(y), the tail of M predicted by the single-big-jump
    asymptotics.
    """
    a = drift_constant(spec)
    C = weight_constant(spec)
    return C / a * spec.reference.int_tail(y)


def shift_spec(spec, c):
    """
    Add the constant ``c`` to every increment (and to the reference), so
    that the drift constant becomes a - c.
    """
    shifted = {id(law): Shifted(law, c) for law in spec.law_table}
    laws = {x: shifted[id(law)] for x, law in spec.laws.items()}
    if spec.default is not None:
        laws['default'] = shifted[id(spec.default)]
    weights = dict(spec.weights)
    weights['default'] = spec.default_weight
    return WalkSpec(spec.modulator, laws, Shifted(spec.reference, c),
            weights=weights, sojourn=spec.sojourn)


def _law_marginals(spec, rows):
    states, _ = spec.modulator.stationary_law()
    idx = spec.law_index(states)
    return np.stack([rows[..., idx == i].sum(axis=-1)
        for i in range(len(spec.law_table))], axis=-1)


def big_jump_series(spec, y, drift_offset=0.0, head=2000, max_terms=2 ** 22):
    """
    Evaluate Σ_{n≥1} Σ_x π_n(x)·F̄_x(y + d₂n) with d₂ = a + drift_offset.

    The first ``head`` terms use the exact marginal laws π_n, the rest
    the stationary law; summation stops once a term falls below 1e-12
    of the partial sum and the remainder is closed off with the
    integrated tails.

    :raises PeriodicModulator: for periodic background chains.
    """
    mod = spec.modulator
    if not mod.is_aperiodic():
        raise PeriodicModulator('{} modulator has period {}'.format(mod.kind, mod.period()))
    d2 = drift_constant(spec) + drift_offset
    if not d2 > 0:
        raise ValueError('drift_offset must keep a + drift_offset positive')

    y = float(y)
    table = spec.law_table
    marginals = _law_marginals(spec, mod.marginal_sequence(head))
    steps = np.arange(1, head + 1, dtype=float)
    total = sum(float(marginals[:, i] @ table[i].tail(y + d2 * steps))
            for i in range(len(table)))

    _, pi = mod.stationary_law()
    weights = _law_marginals(spec, pi)
    start = head + 1
    chunk = 4096
    while True:
        n = np.arange(start, start + chunk, dtype=float)
        terms = sum(w * table[i].tail(y + d2 * n) for i, w in enumerate(weights) if w > 0)
        total += float(np.sum(terms))
        start += chunk
        if terms[-1] <= 1e-12 * total or start > max_terms:
            break
        chunk = min(2 * chunk, 2 ** 20)
    remainder = sum(w * float(table[i].integrated_tail(y + d2 * (start - 0.5)))
            for i, w in enumerate(weights) if w > 0) / d2
    return total + remainder


def lindley_tail(law, y_grid, h=0.01, upper=None, tol=1e-12, max_iter=200000):
    """
    Tail of the supremum of an i.i.d. walk with increment law ``law``,
    from the stationary Lindley recursion W ← max(0, W + ξ) iterated on
    a lattice of step ``h``.

    :param upper: Largest lattice level kept; mass above it is held at
        the top. Defaults to twice the top of ``y_grid`` plus a margin.
    """
    y_grid = np.asarray(y_grid, dtype=float)
    if upper is None:
        upper = 2.0 * y_grid.max() + 20.0
    top = int(math.ceil(upper / h))
    lo = int(math.floor(law.quantile(1e-12) / h))
    hi = int(math.ceil(law.quantile(1.0 - 1e-12) / h))
    edges = (np.arange(lo, hi + 2) - 0.5) * h
    masses = np.maximum(-np.diff(law.tail(edges)), 0.0)
    masses /= masses.sum()

    w = np.zeros(top + 1)
    w[0] = 1.0
    positions = np.arange(top + 1 + masses.size - 1) + lo
    below = positions <= 0
    inside = (positions > 0) & (positions <= top)
    above = positions > top
    for it in range(max_iter):
        conv = np.maximum(signal.fftconvolve(w, masses), 0.0)
        new = np.zeros_like(w)
        new[0] = conv[below].sum()
        new[positions[inside]] = conv[inside]
        new[top] += conv[above].sum()
        new /= new.sum()
        change = np.abs(new - w).sum()
        w = new
        if change < tol:
            break
    logger.debug('lindley recursion stopped after %d iterations', it + 1)
    levels = h * np.arange(top + 1)
    survival = np.append(np.cumsum(w[::-1])[::-1], 0.0)
    idx = np.searchsorted(levels, y_grid, side='right')
    return survival[idx]


class IcelandConstants(object):
    """
    Constants of the exponential bound for the bounded part of the
    decomposition ξ = φ + ψ.

    :ivar ystar: Level splitting big reference jumps off.
    :ivar epsilon: F̄(y*).
    :ivar m: E[η·1(η > y*)].
    :ivar K0: m/ε + 1.
    :ivar K: max(β, y*, K0), a bound on |φ|.
    :ivar s: Exponent with s·K²·e^{sK} = α/4.
    """

    def __init__(self, ystar, epsilon, m, K0, K, s, alpha, beta):
        self.ystar = ystar
        self.epsilon = epsilon
        self.m = m
        self.K0 = K0
        self.K = K
        self.s = s
        self.alpha = alpha
        self.beta = beta

    def drift_margin(self):
        """
        Return (β+1)ε + m, which has to stay below 3α/4.
        """
        return (self.beta + 1.0) * self.epsilon + self.m

    def residual(self):
        return self.s * self.K ** 2 * math.exp(self.s * self.K) - self.alpha / 4.0

    def bound(self, y):
        return np.exp(-self.s * np.asarray(y, dtype=float))

    def as_dict(self):
        return dict(ystar=self.ystar, epsilon=self.epsilon, m=self.m, K0=self.K0,
                K=self.K, s=self.s, alpha=self.alpha, beta=self.beta)

    def __repr__(self):
        return 'IcelandConstants({})'.format(', '.join(
            '{}={:.6g}'.format(k, v) for k, v in self.as_dict().items()))


def _upper_mean(law, y):
    return y * float(law.tail(y)) + float(law.integrated_tail(y))


def iceland_constants(reference, alpha, beta, xtol=1e-6):
    """
    Build the constants of the exponential supermartingale bound from
    the reference law and the drift margin ``alpha`` of increments
    truncated at ``-beta``.

    :rtype: IcelandConstants
    """
    if not (alpha > 0 and beta > 0):
        raise ValueError('alpha and beta must be positive')
    quarter = alpha / 4.0
    scale = max(1.0, beta)

    def meets(y):
        return _upper_mean(reference, y) <= quarter and scale * float(reference.tail(y)) <= quarter

    lo, hi = 0.0, 1.0
    if meets(lo):
        hi = lo
    else:
        while not meets(hi):
            lo, hi = hi, 2.0 * hi
            if hi > 1e300:
                raise NoFiniteYstar('upper mean never drops below alpha/4')
        while hi - lo > xtol * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if meets(mid):
                hi = mid
            else:
                lo = mid
    ystar = hi
    epsilon = float(reference.tail(ystar))
    m = _upper_mean(reference, ystar)
    K0 = m / epsilon + 1.0 if epsilon > 0 else 1.0
    K = max(beta, ystar, K0)

    f = lambda s: s * K ** 2 * math.exp(s * K) - quarter
    top = quarter / K ** 2
    s = optimize.bisect(f, 0.0, top, xtol=top * 1e-15, maxiter=500)

    constants = IcelandConstants(ystar, epsilon, m, K0, K, s, alpha, beta)
    if constants.drift_margin() > 3.0 * alpha / 4.0 + 1e-12:
        raise ParameterInequalityViolated('(beta+1)*epsilon + m exceeds 3*alpha/4')
    return constants


class BoundCheckReport(object):

    def __init__(self, **fields):
        self.__dict__.update(fields)

    def as_dict(self):
        out = dict()
        for k, v in self.__dict__.items():
            out[k] = v.tolist() if isinstance(v, np.ndarray) else v
        return out


def _check_admissible(constants, reference, laws):
    levels = dense_grid(reference)
    for law in laws:
        if np.any(law.tail(levels) > reference.tail(levels) * (1.0 + 1e-9) + 1e-15):
            raise IncrementBoundViolated('{!r} is not dominated by the reference'.format(law))
        if law.truncated_mean(constants.beta) > -constants.alpha + 1e-12:
            raise IncrementBoundViolated(
                    '{!r} has truncated mean above -alpha={}'.format(law, constants.alpha))


def exp_bound_check(constants, reference, laws, N, y_grid, rng, n_steps=2000,
        martingale_steps=50):
    """
    Simulate the bounded process φ and the walk ξ itself from shared
    uniforms, for increments cycling through ``laws``.

    The report holds the empirical P(M^φ > y) against e^{-sy} (violations
    are counted beyond three binomial standard errors), the supermartingale
    trace of E e^{sS^φ_n}, the coupling check ξ ≤ φ + ψ and the ratio
    P̂(M > y)/F̄ᴵ(y) whose maximum estimates the uniform constant r. It
    also records whether (β+1)ε + m ≤ 3α/4 held.

    :rtype: BoundCheckReport
    """
    laws = list(laws)
    _check_admissible(constants, reference, laws)
    y_grid = np.asarray(y_grid, dtype=float)
    c = constants

    S_phi = np.zeros(N)
    M_phi = np.zeros(N)
    S_xi = np.zeros(N)
    M_xi = np.zeros(N)
    coupling = 0
    means = [1.0]
    errors = [0.0]
    for n in range(n_steps):
        u = rng.random(N)
        eta = reference._quantile(u)
        xi = laws[n % len(laws)]._quantile(u)
        big = eta > c.ystar
        bounded = np.maximum(xi, -c.beta)
        phi = np.where(big, c.K0, bounded)
        psi = np.where(big, eta - c.K0, 0.0)
        coupling += int(np.sum(bounded > phi + psi + 1e-9))
        S_phi += phi
        np.maximum(M_phi, S_phi, out=M_phi)
        S_xi += xi
        np.maximum(M_xi, S_xi, out=M_xi)
        if n < martingale_steps:
            e = np.exp(c.s * S_phi)
            means.append(float(e.mean()))
            errors.append(float(e.std(ddof=1) / math.sqrt(N)) if N > 1 else 0.0)

    means = np.array(means)
    errors = np.array(errors)
    slack = 3.0 * np.sqrt(errors[1:] ** 2 + errors[:-1] ** 2)
    supermartingale_ok = bool(np.all(means[1:] <= means[:-1] + slack + 1e-12))

    phat_phi = np.array([(M_phi > y).mean() for y in y_grid])
    bound = c.bound(y_grid)
    noise = 3.0 * np.sqrt(bound * (1.0 - bound) / N) + 1.0 / N
    violations = int(np.sum(phat_phi > bound + noise))

    counts = np.array([(M_xi > y).sum() for y in y_grid])
    with np.errstate(divide='ignore', invalid='ignore'):
        ratios = counts / N / reference.int_tail(y_grid)
    seen = counts > 0
    r_hat = float(ratios[seen].max()) if seen.any() else 0.0

    return BoundCheckReport(
        constants=c.as_dict(),
        y_grid=y_grid,
        phat_phi=phat_phi,
        bound=bound,
        violations=violations,
        martingale_means=means,
        supermartingale_ok=supermartingale_ok,
        coupling_violations=coupling,
        drift_margin_ok=bool(c.drift_margin() <= 0.75 * c.alpha + 1e-12),
        counts=counts,
        ratios=ratios,
        r_hat=r_hat,
        N=N,
        n_steps=n_steps,
    )


SllnResult = collections.namedtuple('SllnResult', 'passed observed target tol')


def _slln_path(spec, n, _, rng):
    path = simulate_path(spec, n, rng)
    return float(path.S[-1] / n)


def slln_check(spec, n=10 ** 6, tol=0.05, k=8, seed=0, workers=1):
    """
    Check |S_n/n + a| < tol on ``k`` independent paths.

    :rtype: SllnResult
    """
    a = drift_constant(spec)
    task = functools.partial(_slln_path, spec, int(n))
    observed = WorkerPool(workers).map(task, range(k), seed)
    passed = all(abs(o + a) < tol for o in observed)
    return SllnResult(passed, observed, -a, tol)
