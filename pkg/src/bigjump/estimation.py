# -*- coding: utf-8 -*-

"""
Monte Carlo tail estimates, ratio verdicts against the asymptotes, the
counterexample run for the cycle-tail condition and the battery of
single-big-jump lemmas.
"""

import csv
import logging

import numpy as np
from scipy import integrate, special, stats

from .discrete_walk import DiscreteSupremumSampler, TruncationRule, asymptote
from .errors import ParameterInequalityViolated
from .modulation import (
        Countdown,
        FiniteMarkov,
        WalkSpec,
        check_d4,
        drift_constant,
        kappa,
        weight_constant,
)
from .process import WorkerPool
from .tail_laws import (
        ClassVerdict,
        Empirical,
        Exponential,
        Lattice,
        Mixture,
        Pareto,
        PointMixture,
        Shifted,
        Weibull,
        check_subexponential,
        trend_verdict,
)

logger = logging.getLogger(__name__)

DIVERGING = 'diverging'

CSV_COLUMNS = ('y', 'count', 'phat', 'ci_lo', 'ci_hi', 'asymptote', 'ratio', 'reliable')


def wilson_interval(count, n, level=0.95):
    ci = stats.binomtest(int(count), int(n)).proportion_ci(level, method='wilson')
    return ci.low, ci.high


class TailReport(object):
    """
    Empirical tail P̂(M > y) on a grid with Wilson intervals and, when an
    asymptote is attached, the ratios to it.

    Ratios are reported only where the expected number of exceedances
    (N times the asymptote, or the observed count without one) reaches
    ``min_expected``.
    """
    min_expected = 20

    def __init__(self, y_grid, counts, N, asymptote=None, seed=None, workers=1,
            bias_bound=None):
        self.y_grid = np.asarray(y_grid, dtype=float)
        self.counts = np.asarray(counts, dtype=int)
        self.N = int(N)
        self.seed = seed
        self.workers = workers
        self.bias_bound = bias_bound
        self.phat = self.counts / self.N
        bounds = np.array([wilson_interval(k, self.N) for k in self.counts]).reshape(-1, 2)
        self.ci_lo = bounds[:, 0]
        self.ci_hi = bounds[:, 1]
        self.verdict = None
        self.set_asymptote(asymptote)

    def set_asymptote(self, values):
        if values is None:
            self.asymptote = None
            self.ratio = None
            self.reliable = self.counts >= self.min_expected
            return
        self.asymptote = np.asarray(values, dtype=float) * np.ones_like(self.y_grid)
        with np.errstate(divide='ignore', invalid='ignore'):
            self.ratio = self.phat / self.asymptote
        self.reliable = self.N * self.asymptote >= self.min_expected

    def ratio_half_widths(self):
        with np.errstate(divide='ignore', invalid='ignore'):
            return 0.5 * (self.ci_hi - self.ci_lo) / self.asymptote

    def monotone(self):
        """
        Return True when P̂ is non-increasing in y.
        """
        return bool(np.all(np.diff(self.phat) <= 0))

    def rows(self):
        for i, y in enumerate(self.y_grid):
            asym = None if self.asymptote is None else float(self.asymptote[i])
            ratio = None
            if self.ratio is not None and self.reliable[i]:
                ratio = float(self.ratio[i])
            yield (float(y), int(self.counts[i]), float(self.phat[i]), float(self.ci_lo[i]),
                    float(self.ci_hi[i]), asym, ratio, bool(self.reliable[i]))

    def to_csv(self, file):
        writer = csv.writer(file, lineterminator='\n')
        writer.writerow(CSV_COLUMNS)
        for row in self.rows():
            writer.writerow(['' if v is None else (repr(v) if isinstance(v, float) else v)
                for v in row])

    def as_dict(self):
        return dict(
            N=self.N,
            seed=self.seed,
            workers=self.workers,
            bias_bound=self.bias_bound,
            verdict=self.verdict,
            rows=[dict(zip(CSV_COLUMNS, row)) for row in self.rows()],
        )


def estimate_tail(sampler, y_grid, N, seed, workers=1, asymptote=None):
    """
    Draw ``N`` supremum samples and count the exceedances of every level.

    :param sampler: Object with ``sample(n, rng)`` and ``bias_bound``.
    :param asymptote: Optional array of asymptote values, or a callable
        evaluated on the grid.
    :rtype: TailReport
    """
    if N < 1:
        raise ValueError('N must be at least 1')
    y_grid = np.asarray(y_grid, dtype=float)
    if np.any(np.diff(y_grid) <= 0):
        raise ValueError('y_grid must be increasing')
    samples = np.sort(WorkerPool(workers).sample(sampler, N, seed))
    counts = samples.size - np.searchsorted(samples, y_grid, side='right')
    if callable(asymptote):
        asymptote = asymptote(y_grid)
    logger.debug('counted exceedances %s over %d samples', counts.tolist(), samples.size)
    return TailReport(y_grid, counts, N, asymptote=asymptote, seed=seed, workers=workers,
            bias_bound=getattr(sampler, 'bias_bound', None))


def classify_ratios(ratios, half_widths, tolerance=0.05, divergence=0.5, noise_cap=0.25):
    """
    Classify ratio-to-asymptote values as ``consistent``, ``diverging`` or
    ``inconclusive``.

    Only the top half of the grid is judged. The ratios diverge when the
    last deviation from 1 stays above ``divergence`` after removing its
    half-width, and either the deviations never shrink by more than their
    joint noise or the last ratio is certainly more than twice the first.
    They are consistent when :func:`trend_verdict` says so and the mean
    half-width over the top half is at most ``noise_cap``.
    """
    ratios = np.asarray(ratios, dtype=float)
    half_widths = np.asarray(half_widths, dtype=float)
    if ratios.size == 0:
        return ClassVerdict.INCONCLUSIVE
    start = ratios.size // 2
    top = ratios[start:]
    hw = half_widths[start:]
    if not (np.all(np.isfinite(top)) and np.all(np.isfinite(hw))):
        return ClassVerdict.INCONCLUSIVE

    dev = np.abs(top - 1.0)
    if dev[-1] - hw[-1] > divergence:
        away = bool(np.all(np.diff(dev) >= -(hw[1:] + hw[:-1])))
        grown = ratios[-1] - half_widths[-1] > 2.0 * (ratios[0] + half_widths[0])
        if away or grown:
            return DIVERGING
    if hw.mean() > noise_cap:
        return ClassVerdict.INCONCLUSIVE
    if trend_verdict(ratios, 1.0, tolerance, divergence, half_widths) == ClassVerdict.CONSISTENT:
        return ClassVerdict.CONSISTENT
    return ClassVerdict.INCONCLUSIVE


def ratio_report(report, tolerance=0.05):
    """
    Apply the trend rule to the reliable ratios of a report and store the
    verdict on it.

    :rtype: ClassVerdict
    """
    if report.ratio is None:
        raise ValueError('report has no asymptote column')
    keep = report.reliable & np.isfinite(report.ratio)
    ratios = report.ratio[keep]
    widths = report.ratio_half_widths()[keep]
    verdict = classify_ratios(ratios, widths, tolerance)
    report.verdict = verdict
    return ClassVerdict(verdict, zip(report.y_grid[keep], ratios), tolerance,
            target=1.0, half_widths=widths.tolist())


class CounterexampleParams(object):
    """
    Parameters of the countdown walk. Without an explicit ``d`` the drop
    is d = (1 + a)·Eτ, so the stationary drift is -a. The control chain
    returns to 0 at every step with probability ``control_pi0`` and its
    drop is scaled to keep the same a.
    """
    gamma = 0.5
    c = 0.7
    b = 0.25
    d = None
    a = 3.0
    control_pi0 = 0.9
    epsilon = 0.1
    N = 50000
    seed = 0
    workers = 1
    y_grid = None
    d4_levels = None
    L = None

    names = ('gamma', 'c', 'b', 'd', 'a', 'control_pi0', 'epsilon', 'N', 'seed', 'workers',
            'y_grid', 'd4_levels', 'L')

    def __init__(self, **kwargs):
        for name, value in kwargs.items():
            if name not in self.names:
                raise ValueError('unknown counterexample parameter {!r}'.format(name))
            setattr(self, name, value)

    def as_dict(self):
        out = {name: getattr(self, name) for name in self.names}
        for name in ('y_grid', 'd4_levels'):
            if out[name] is not None:
                out[name] = np.asarray(out[name], dtype=float).tolist()
        return out


def counterexample_laws(gamma, c):
    """
    Return ``(zeta, p0j)``: ζ ≥ 0 with Eζ = 1 and F̄(y) ∝ e^{-y^γ}, and the
    countdown jump law with P(J > j) = e^{-c·j^γ}.
    """
    p = 1.0 / special.gamma(1.0 + 1.0 / gamma)
    zeta = Mixture([PointMixture([0.0]), Weibull(gamma, 1.0)], [1.0 - p, p])
    p0j = Lattice(Weibull(gamma, c ** (-1.0 / gamma)))
    return zeta, p0j


def _check_counterexample(params):
    g, c, b, eps = params.gamma, params.c, params.b, params.epsilon
    if not 0.0 < g < 1.0:
        raise ParameterInequalityViolated('gamma must lie in (0, 1)')
    if not b ** g < c < 1.0:
        raise ParameterInequalityViolated('c must lie in (b^gamma, 1) = ({:.6g}, 1)'.format(b ** g))
    if not (0.0 < eps < 1.0 and (1.0 - eps) ** g > c):
        raise ParameterInequalityViolated('(1-epsilon)^gamma must exceed c')
    if not 0.0 < params.control_pi0 < 1.0:
        raise ParameterInequalityViolated('control_pi0 must lie in (0, 1)')


def counterexample_spec(params, control=False):
    """
    Build the countdown-modulated walk ξ = ζ - d·1(X = 0), or with
    ``control`` the same laws on a two-state chain with geometric cycles
    and the same drift constant.

    :raises ParameterInequalityViolated: before any law is built, if the
        parameters break the construction.
    :returns: ``(spec, d, mean_cycle)`` for the chosen chain.
    """
    _check_counterexample(params)
    zeta, p0j = counterexample_laws(params.gamma, params.c)
    countdown = Countdown(p0j)
    mean_cycle = countdown.mean_cycle_length()
    d = params.d if params.d is not None else (1.0 + params.a) * mean_cycle
    if not d > mean_cycle:
        raise ParameterInequalityViolated('d={} must exceed the mean cycle length {:.6g}'.format(
            d, mean_cycle))
    mod = countdown
    if control:
        s = params.control_pi0
        mod = FiniteMarkov([[s, 1.0 - s], [s, 1.0 - s]], regen_state=0)
        d = d * mod.mean_cycle_length() / mean_cycle
        mean_cycle = mod.mean_cycle_length()
    laws = {0: Shifted(zeta, -d), 'default': zeta}
    return WalkSpec(mod, laws, zeta), d, mean_cycle


def run_counterexample(params, control=False):
    """
    Estimate P(M > y) for the counterexample walk and compare it with
    (C/a)F̄ᴵ(y) and with H̄ᴵ(y), H̄(y) = exp(-c·y^γ/(1-ε)^γ).

    :param params: :class:`CounterexampleParams` or a mapping of its
        fields.
    :raises ParameterInequalityViolated: if the parameters break the
        construction.
    :returns: dict with the constants, the cycle-tail verdict and the two
        ratio tables.
    """
    if not isinstance(params, CounterexampleParams):
        params = CounterexampleParams(**dict(params or {}))
    spec, d, mean_cycle = counterexample_spec(params, control)

    a = drift_constant(spec)
    C = weight_constant(spec)
    k = kappa(spec, [1.0, 2.0, 4.0, 8.0])
    y_grid = params.y_grid
    if y_grid is None:
        y_grid = np.linspace(5.0, 60.0, 12)
    y_grid = np.asarray(y_grid, dtype=float)
    # Cycle-tail ratios decay like e^{-(c/b^γ - 1)y^γ}; judge them far out.
    d4_levels = params.d4_levels
    if d4_levels is None:
        d4_levels = np.geomspace(10.0, 1e4, 12)
    d4 = check_d4(spec.modulator, params.b, spec.reference, d4_levels)

    extra = {} if params.L is None else dict(L=params.L)
    rule = TruncationRule.for_grid(spec, y_grid, **extra)
    sampler = DiscreteSupremumSampler(spec, rule)
    report = estimate_tail(sampler, y_grid, params.N, params.seed, params.workers,
            asymptote=lambda y: asymptote(spec, y))
    verdict = ratio_report(report)

    scale = (1.0 - params.epsilon) * params.c ** (-1.0 / params.gamma)
    H = Weibull(params.gamma, scale)
    with np.errstate(divide='ignore', invalid='ignore'):
        h_ratio = report.phat / H.int_tail(y_grid)
    logger.debug('counterexample control=%s a=%g C=%g verdict=%s', control, a, C,
            verdict.verdict)
    return dict(
        control=bool(control),
        params=params.as_dict(),
        d=d,
        mean_cycle_length=mean_cycle,
        a=a,
        C=C,
        kappa=float(k),
        d4=d4.as_dict(),
        truncation=rule.as_dict(),
        verdict=verdict.verdict,
        ratio_trace=verdict.ratio_trace,
        h_ratio=list(zip(y_grid.tolist(), h_ratio.tolist())),
        report=report,
    )


def _sum_tail_check(name, first, second, levels, target, F, relation='approx',
        min_count=200, tolerance=0.1):
    total = first + second
    total.sort()
    counts = total.size - np.searchsorted(total, levels, side='right')
    ratios = counts / total.size / F.tail(levels)
    usable = counts >= min_count
    if not usable.any():
        verdict = ClassVerdict.INCONCLUSIVE
    else:
        top = ratios[usable][-1]
        if relation == 'approx':
            ok = abs(top - target) <= tolerance * target
        else:
            ok = top <= target * (1.0 + tolerance)
        verdict = ClassVerdict.CONSISTENT if ok else ClassVerdict.INCONSISTENT
    return ClassVerdict(verdict, zip(levels[usable], ratios[usable]), tolerance,
            target=target, name=name, counts=counts.tolist())


def second_lemma_ratio(first, second, levels):
    """
    Return E[I₁(y + Y₂)]/I₁(y), the integrated tail of Y₁ - Y₂ over that of
    Y₁, by quadrature over the quantiles of Y₂.
    """
    levels = np.asarray(levels, dtype=float)
    out = np.empty_like(levels)
    for i, y in enumerate(levels):
        f = lambda u: float(first.integrated_tail(y + float(second.quantile(u))))
        value, _ = integrate.quad(f, 0.0, 1.0, epsrel=1e-12, limit=200)
        out[i] = value / first.integrated_tail(y)
    return out


def verify_appendix_lemmas(config=None):
    """
    Monte Carlo and quadrature checks of the single-big-jump lemmas for
    sums of two variables.

    :param config: Mapping with optional ``N`` (default 10⁶), ``seed`` and
        ``levels``.
    :returns: dict of :class:`ClassVerdict` keyed by check name.
    """
    config = dict(config or {})
    N = int(config.get('N', 10 ** 6))
    rng = np.random.default_rng(config.get('seed', 0))
    levels = np.asarray(config.get('levels', np.geomspace(5.0, 200.0, 12)), dtype=float)
    F = Pareto(2.0)
    light = Exponential(1.0)
    out = dict()

    out['addtails'] = _sum_tail_check('addtails', F.sample(rng, N), F.sample(rng, N),
            levels, 2.0, F)
    out['addtails_light'] = _sum_tail_check('addtails_light', F.sample(rng, N),
            light.sample(rng, N), levels, 1.0, F)

    # Latent state Z picks which summand is heavy; given Z the pair is
    # independent and P(Y_i > y | Z) ≤ F̄(y).
    z = rng.random(N) < 0.5
    heavy, calm = F.sample(rng, N), light.sample(rng, N)
    y1 = np.where(z, heavy, calm)
    y2 = np.where(z, light.sample(rng, N), F.sample(rng, N))
    out['addtails2'] = _sum_tail_check('addtails2', y1, y2, levels, 1.0, F,
            relation='upper')

    second = Pareto(3.0)
    exact = second_lemma_ratio(F, second, levels)
    verdict = ClassVerdict.CONSISTENT if abs(exact[-1] - 1.0) <= 0.05 else ClassVerdict.INCONSISTENT
    mc_levels = levels[levels <= 20.0]
    diff = Empirical(F.sample(rng, N) - second.sample(rng, N))
    mc = diff.integrated_tail(mc_levels) / F.integrated_tail(mc_levels)
    out['second'] = ClassVerdict(verdict, zip(levels, exact), 0.05, target=1.0,
            name='second', monte_carlo=list(zip(mc_levels.tolist(), mc.tolist())))

    out['subexponential_pareto'] = check_subexponential(F, np.geomspace(100.0, 2000.0, 8))
    out['subexponential_exponential'] = check_subexponential(light, np.linspace(5.0, 50.0, 10))
    for name, verdict in out.items():
        logger.debug('appendix check %s: %s', name, verdict.verdict)
    return out


def appendix_passed(results):
    """
    Return True when every check came out as expected: the light-tailed
    law fails subexponentiality and everything else is consistent.
    """
    for name, verdict in results.items():
        expected = ClassVerdict.INCONSISTENT if name == 'subexponential_exponential' \
                else ClassVerdict.CONSISTENT
        if verdict.verdict != expected:
            return False
    return True
