# -*- coding: utf-8 -*-

"""
Continuous-time modulated walk S_t = A_t + W_t + Y_t.

The background chain is embedded in time through sojourns, each state
carries a Lévy triple (ν, v², a) with ``a`` the mean drift rate, and
paths are advanced event by event: the next event is the first of a
large jump, a grid point or the end of the current sojourn. Between
events the path is Brownian with drift, and its maximum over the
segment is drawn from the exact bridge law.
"""

import collections
import functools
import logging
import math

import numpy as np
from scipy import integrate, optimize

from .errors import (
        ConfigInvalid,
        EpsilonOutOfRange,
        GridTooCoarse,
        HorizonCapExceeded,
        NonNegativeDrift,
        NonPositiveThreshold,
        PeriodicModulator,
)
from .levy_measures import Jumps, measure_from_config
from .modulation import drift_constant, weight_constant
from .process import WorkerPool

logger = logging.getLogger(__name__)


class LevyTriple(object):
    """
    Jump measure ``nu``, diffusion variance rate ``v2`` and mean drift
    rate ``a`` of one background state, so that E S_t = a·t while the
    state is held.
    """

    def __init__(self, nu, v2=0.0, a=0.0):
        if not v2 >= 0:
            raise ValueError('v2 must be non-negative')
        if not np.isfinite(a):
            raise ValueError('drift rate must be finite')
        self.nu = nu
        self.v2 = float(v2)
        self.a = float(a)

    @classmethod
    def from_config(cls, config, field='laws'):
        if isinstance(config, LevyTriple):
            return config
        if not isinstance(config, dict) or 'nu' not in config:
            raise ConfigInvalid(field, "expected a mapping with a 'nu' key")
        params = dict(config)
        nu = measure_from_config(params.pop('nu'), field + '.nu')
        try:
            return cls(nu, **params)
        except (TypeError, ValueError) as e:
            raise ConfigInvalid(field, str(e))

    def params(self):
        return dict(nu=self.nu, v2=self.v2, a=self.a)

    def mean(self):
        return self.a

    def __repr__(self):
        return 'LevyTriple(nu={!r}, v2={}, a={})'.format(self.nu, self.v2, self.a)


def triple_from_config(config, field='laws'):
    return LevyTriple.from_config(config, field)


class CtsPath(object):
    """
    A recorded continuous-time path.

    ``times``/``S``/``M`` hold the skeleton at every event (jump times,
    grid points, state changes) with the running supremum including the
    bridge maxima. Each segment between events carries its start,
    length, state, drift part, Gaussian part and the compensator removed
    for the jumps it may end with.
    """

    def __init__(self, times, S, M, jumps, jump_states, segments):
        self.times = np.asarray(times, dtype=float)
        self.S = np.asarray(S, dtype=float)
        self.M = np.asarray(M, dtype=float)
        self.jumps = jumps
        self.jump_states = np.asarray(jump_states, dtype=int)
        self.seg_start = np.asarray(segments['start'], dtype=float)
        self.seg_length = np.asarray(segments['length'], dtype=float)
        self.seg_state = np.asarray(segments['state'], dtype=int)
        self.seg_drift = np.asarray(segments['drift'], dtype=float)
        self.seg_noise = np.asarray(segments['noise'], dtype=float)
        self.seg_compensator = np.asarray(segments['compensator'], dtype=float)

    @property
    def horizon(self):
        return float(self.times[-1])

    @property
    def supremum(self):
        return float(self.M[-1])

    def drift_part(self):
        return float(self.seg_drift.sum() + self.seg_compensator.sum())

    def centred_jumps(self):
        """
        Large jumps minus their compensator, the exactly simulated part
        of Y_t.
        """
        return float(self.jumps.sizes.sum() - self.seg_compensator.sum())

    def state_at(self, t):
        i = np.searchsorted(self.seg_start, t, side='right') - 1
        return self.seg_state[np.clip(i, 0, self.seg_state.size - 1)]

    def __len__(self):
        return self.seg_start.size


class _Batch(object):

    def __init__(self, ids, states, sojourn_left, grid_left):
        n = ids.size
        self.ids = ids
        self.x = states
        self.t = np.zeros(n)
        self.S = np.zeros(n)
        self.M = np.zeros(n)
        self.sojourn_left = sojourn_left
        self.grid_left = grid_left

    @property
    def size(self):
        return self.ids.size

    def keep(self, mask):
        for name in ('ids', 'x', 't', 'S', 'M', 'sojourn_left', 'grid_left'):
            setattr(self, name, getattr(self, name)[mask])


_Event = collections.namedtuple('_Event', 'dt states drift noise compensator jumped sizes')


class _CtsEngine(object):
    """
    Per-law simulation constants and the one-event update shared by the
    recording simulator and the vectorised supremum sampler.

    Jump measures of finite mass are simulated exactly (every jump, no
    Gaussian part); for the others the jumps with |y| ≤ δ are replaced by
    a Gaussian with their variance.
    """
    horizon_cap = 1e7

    def __init__(self, spec, delta, grid_dt=np.inf, horizon_cap=None):
        if spec.mode != 'continuous':
            raise ValueError('continuous simulation needs Lévy triples')
        if not delta > 0:
            raise NonPositiveThreshold('small-jump threshold must be positive')
        if not grid_dt > 0:
            raise ValueError('grid_dt must be positive')
        if horizon_cap is not None:
            self.horizon_cap = float(horizon_cap)
        self.spec = spec
        self.delta = float(delta)
        self.grid_dt = float(grid_dt)

        table = spec.law_table
        self.thresholds = np.empty(len(table))
        self.rates = np.empty(len(table))
        self.compensators = np.empty(len(table))
        self.mu = np.empty(len(table))
        self.sigma2 = np.empty(len(table))
        for i, triple in enumerate(table):
            nu = triple.nu
            if nu.finite:
                threshold, variance, comp = 0.0, 0.0, nu._compensator(0.0)
            else:
                threshold = self.delta
                variance, comp = nu.small_jump_stats(threshold)
            self.thresholds[i] = threshold
            self.rates[i] = sum(nu.large_jump_rates(threshold))
            self.compensators[i] = comp
            self.mu[i] = triple.a - comp
            self.sigma2[i] = triple.v2 + variance
        top = float(self.rates.max()) if len(table) else 0.0
        if np.isfinite(self.grid_dt) and self.grid_dt * top > 1.0:
            raise GridTooCoarse('grid_dt={} exceeds 1/rate={:.6g} at delta={}'.format(
                self.grid_dt, 1.0 / top, self.delta))
        logger.debug('engine rates=%s drift=%s variance=%s', self.rates.tolist(),
                self.mu.tolist(), self.sigma2.tolist())

    def start(self, n, rng):
        spec = self.spec
        return _Batch(np.arange(n), spec.modulator.initial_states(n, rng),
                spec.sojourn.draw(n, rng), np.full(n, self.grid_dt))

    def advance(self, batch, rng, limit=None):
        spec = self.spec
        n = batch.size
        idx = spec.law_index(batch.x)
        states = batch.x.copy()

        rate = self.rates[idx]
        clock = np.full(n, np.inf)
        busy = rate > 0
        clock[busy] = rng.exponential(1.0 / rate[busy])
        dt = np.minimum(np.minimum(clock, batch.grid_left), batch.sojourn_left)
        if limit is not None:
            dt = np.minimum(dt, limit)

        sig2 = self.sigma2[idx]
        drift = self.mu[idx] * dt
        noise = np.sqrt(sig2 * dt) * rng.standard_normal(n)
        b = drift + noise
        u = 1.0 - rng.random(n)
        peak = 0.5 * (b + np.sqrt(b * b - 2.0 * sig2 * dt * np.log(u)))
        np.maximum(batch.M, batch.S + peak, out=batch.M)
        batch.S += b
        batch.t += dt

        jumped = clock <= dt
        sizes = np.zeros(n)
        if jumped.any():
            for i in np.unique(idx[jumped]):
                sel = jumped & (idx == i)
                sizes[sel] = spec.law_table[i].nu.draw_large_jumps(
                        int(sel.sum()), self.thresholds[i], rng)
            batch.S += sizes
            np.maximum(batch.M, batch.S, out=batch.M)

        batch.grid_left -= dt
        batch.grid_left[batch.grid_left <= 0] = self.grid_dt
        batch.sojourn_left -= dt
        moved = batch.sojourn_left <= 0
        if moved.any():
            batch.x[moved] = spec.modulator.step(batch.x[moved], rng)
            batch.sojourn_left[moved] = spec.sojourn.draw(int(moved.sum()), rng)
        return _Event(dt, states, drift, noise, self.compensators[idx] * dt, jumped, sizes)


def simulate_cts_path(spec, horizon, delta, grid_dt, rng):
    """
    Simulate one path on [0, horizon] and record every event.

    :raises NonPositiveThreshold: if ``delta`` is not positive.
    :raises GridTooCoarse: if ``grid_dt`` exceeds the inverse large-jump
        rate.
    :rtype: CtsPath
    """
    engine = _CtsEngine(spec, delta, grid_dt)
    batch = engine.start(1, rng)
    times, values, sups = [0.0], [0.0], [0.0]
    jump_times, jump_sizes, jump_states = [], [], []
    segments = collections.defaultdict(list)
    while batch.t[0] < horizon:
        start = float(batch.t[0])
        ev = engine.advance(batch, rng, limit=np.array([horizon - start]))
        segments['start'].append(start)
        segments['length'].append(float(ev.dt[0]))
        segments['state'].append(int(ev.states[0]))
        segments['drift'].append(float(ev.drift[0]))
        segments['noise'].append(float(ev.noise[0]))
        segments['compensator'].append(float(ev.compensator[0]))
        if ev.jumped[0]:
            jump_times.append(float(batch.t[0]))
            jump_sizes.append(float(ev.sizes[0]))
            jump_states.append(int(ev.states[0]))
        times.append(float(batch.t[0]))
        values.append(float(batch.S[0]))
        sups.append(float(batch.M[0]))
    logger.debug('recorded %d segments and %d jumps', len(times) - 1, len(jump_times))
    return CtsPath(times, values, sups, Jumps(jump_times, jump_sizes), jump_states, segments)


CtsSupremumSample = collections.namedtuple('CtsSupremumSample', 'M bias_bound')


def sample_cts_supremum(spec, trunc, delta, grid_dt, rng, size=None, horizon_cap=None):
    """
    Sample sup_t S_t, stopping a path at the first event with t ≥ t_min
    and S_t ≤ M_t - L (``trunc.n_min`` is read as t_min).

    :raises HorizonCapExceeded: if a path is still running beyond the
        horizon cap.
    """
    drift_constant(spec)
    engine = _CtsEngine(spec, delta, grid_dt, horizon_cap)
    n = 1 if size is None else int(size)
    batch = engine.start(n, rng)
    out = np.zeros(n)
    events = 0
    while batch.size:
        engine.advance(batch, rng)
        events += 1
        done = (batch.t >= trunc.n_min) & (batch.S <= batch.M - trunc.L)
        out[batch.ids[done]] = batch.M[done]
        batch.keep(~done)
        if batch.size and batch.t.max() > engine.horizon_cap:
            raise HorizonCapExceeded('{} paths still running at t={:.6g}'.format(
                batch.size, batch.t.max()))
    logger.debug('%d paths stopped after %d events', n, events)

    bias = trunc.bias_bound(spec)
    if size is None:
        return CtsSupremumSample(float(out[0]), bias)
    return CtsSupremumSample(out, bias)


class CtsSupremumSampler(object):
    batch = 20000

    def __init__(self, spec, rule, delta, grid_dt, horizon_cap=None, batch=None):
        self.spec = spec
        self.rule = rule
        self.delta = delta
        self.grid_dt = grid_dt
        self.horizon_cap = horizon_cap
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
            parts.append(sample_cts_supremum(self.spec, self.rule, self.delta,
                self.grid_dt, rng, size=size, horizon_cap=self.horizon_cap).M)
            left -= size
        return np.concatenate(parts) if parts else np.zeros(0)


def cts_asymptote(spec, y):
    """
    Return (C/a)·ν̄ᴵ(y) for y > 0.
    """
    a = drift_constant(spec)
    return weight_constant(spec) / a * spec.reference.nu_int_tail(y)


def gamma_sup(spec):
    """
    Return sup_x ∫(1 ∧ y²)ν_x(dy) over the laws of the walk.
    """
    return max(triple.nu.gamma_bound() for triple in spec.law_table)


def v2_sup(spec):
    return max(triple.v2 for triple in spec.law_table)


CtsExponent = collections.namedtuple('CtsExponent', 'ystar s')


def _smallest_level(tail, epsilon, xtol=1e-12):
    lo, hi = 0.0, 1.0
    if tail(1e-300) <= epsilon:
        return 0.0
    while tail(hi) > epsilon:
        lo, hi = hi, 2.0 * hi
        if hi > 1e300:
            raise ValueError('jump tail never falls to epsilon')
    while hi - lo > xtol * max(1.0, hi):
        mid = 0.5 * (lo + hi)
        if tail(mid) <= epsilon:
            hi = mid
        else:
            lo = mid
    return hi


def cts_iceland_s(nu, alpha, beta, gamma, v2, epsilon):
    """
    Exponent of the bound P(M > y) ≤ e^{-sy} for the process with jumps
    cut at y*.

    :returns: ``(ystar, s)`` where ν̄(y*) ≤ ε and s solves
        -α + 2ε + s(β²γ/2 + e^{sK}K²γ + v²/2) = 0 with K = max(y*, β, 1).
    :raises EpsilonOutOfRange: unless 0 < ε < α/2.
    """
    if not 0.0 < epsilon < alpha / 2.0:
        raise EpsilonOutOfRange('epsilon must lie in (0, alpha/2), got {}'.format(epsilon))
    ystar = _smallest_level(lambda y: float(nu.nu_tail(y)), epsilon)
    K = max(ystar, beta, 1.0)

    def f(s):
        return -alpha + 2.0 * epsilon + s * (beta ** 2 * gamma / 2.0
                + math.exp(s * K) * K ** 2 * gamma + v2 / 2.0)

    if gamma == 0 and v2 == 0:
        return CtsExponent(ystar, math.inf)
    hi = 1.0
    while f(hi) <= 0:
        hi *= 2.0
    s = optimize.brentq(f, 0.0, hi, xtol=1e-15, rtol=4.0 * np.finfo(float).eps, maxiter=500)
    return CtsExponent(ystar, s)


def cts_big_jump_integral(spec, y, drift_offset=0.0):
    """
    Evaluate ∫₀^∞ Σ_x π(x)·ν̄_x(y + d₂t) dt with d₂ = a + drift_offset by
    quadrature in t, with the states taken at stationarity.

    :raises PeriodicModulator: for a periodic chain on deterministic
        sojourns.
    """
    mod = spec.modulator
    if spec.sojourn.kind == 'deterministic' and not mod.is_aperiodic():
        raise PeriodicModulator('{} modulator has period {}'.format(mod.kind, mod.period()))
    d2 = drift_constant(spec) + drift_offset
    if not d2 > 0:
        raise NonNegativeDrift(d2)

    states, pi = mod.stationary_law()
    idx = spec.law_index(states)
    weights = [(float(pi[idx == i].sum()), triple.nu)
            for i, triple in enumerate(spec.law_table)]
    weights = [(w, nu) for w, nu in weights if w > 0]

    def integrand(t):
        return sum(w * float(nu.nu_tail(y + d2 * t)) for w, nu in weights)

    split = max(float(y), 1.0) / d2
    near, _ = integrate.quad(integrand, 0.0, split, epsrel=1e-11, limit=500)
    far, _ = integrate.quad(integrand, split, np.inf, epsrel=1e-11, limit=500)
    return near + far


def pk_exponential_tail(rate, jump_mean, drift, y):
    """
    P(M > y) = ρ·e^{-(1-ρ)y/μ} for Poisson(rate) arrivals of
    exponential jumps with mean μ on a linear drift ``drift`` < 0, where
    ρ = rate·μ/|drift|.
    """
    if not drift < 0:
        raise NonNegativeDrift(-drift)
    rho = rate * jump_mean / -drift
    if not rho < 1:
        raise NonNegativeDrift(-drift - rate * jump_mean)
    y = np.asarray(y, dtype=float)
    out = np.where(y < 0, 1.0, rho * np.exp(-(1.0 - rho) * np.maximum(y, 0.0) / jump_mean))
    return out if out.ndim else float(out)


SllnResult = collections.namedtuple('SllnResult', 'passed observed target tol')


def _cts_slln_path(spec, horizon, delta, grid_dt, _, rng):
    engine = _CtsEngine(spec, delta, grid_dt)
    batch = engine.start(1, rng)
    while batch.t[0] < horizon:
        engine.advance(batch, rng, limit=np.array([horizon - batch.t[0]]))
    return float(batch.S[0] / horizon)


def cts_slln_check(spec, t=1e5, tol=0.05, k=8, seed=0, workers=1, delta=0.01,
        grid_dt=np.inf):
    """
    Check |S_t/t + a| < tol on ``k`` independent paths.
    """
    a = drift_constant(spec)
    task = functools.partial(_cts_slln_path, spec, float(t), delta, grid_dt)
    observed = WorkerPool(workers).map(task, range(k), seed)
    return SllnResult(all(abs(o + a) < tol for o in observed), observed, -a, tol)
