# -*- coding: utf-8 -*-

"""
Scalar probability laws described through their tails.

Every law exposes the tail F̄(y), the integrated tail
F̄ᴵ(y) = min(1, ∫_y^∞ F̄(z)dz), the mean, the generalised inverse
sup{z : F(z) ≤ u} and inversion sampling. Sampling always goes
through the generalised inverse so that two laws fed with the
same uniforms are coupled monotonically.
"""

import functools
import logging
import math

import numpy as np
from scipy import integrate, special, stats

from .errors import (
        ConfigInvalid,
        DiscretizationTooCoarse,
        InvalidProbability,
        MeanInfinite,
        NonPositiveLevel,
        UnderflowAtLevel,
)

logger = logging.getLogger(__name__)


def _vectorized(func):
    # Methods receive a flat float array and may return an array of the
    # same size; scalars in, scalars out.
    @functools.wraps(func)
    def wrapper(self, y, *args, **kwargs):
        arr = np.asarray(y, dtype=float)
        out = np.asarray(func(self, arr.reshape(-1), *args, **kwargs),
                dtype=float)
        if arr.ndim == 0:
            return float(out[0])
        return out.reshape(arr.shape)
    return wrapper


class ClassVerdict(object):
    """
    Outcome of a numerical membership test.

    :param verdict: One of ``consistent``, ``inconsistent`` or
        ``inconclusive``.
    :param ratio_trace: List of ``(level, ratio)`` pairs.
    :param tolerance: Tolerance used by the trend rule.
    :param target: The limit the ratios are compared against.
    """
    CONSISTENT = 'consistent'
    INCONSISTENT = 'inconsistent'
    INCONCLUSIVE = 'inconclusive'

    def __init__(self, verdict, ratio_trace, tolerance, target=1.0, **extra):
        self.verdict = verdict
        self.ratio_trace = [(float(y), float(r)) for y, r in ratio_trace]
        self.tolerance = tolerance
        self.target = target
        for name, value in extra.items():
            setattr(self, name, value)

    @property
    def levels(self):
        return np.array([y for y, _ in self.ratio_trace])

    @property
    def ratios(self):
        return np.array([r for _, r in self.ratio_trace])

    @property
    def consistent(self):
        return self.verdict == self.CONSISTENT

    def as_dict(self):
        return dict(
            verdict=self.verdict,
            target=self.target,
            tolerance=self.tolerance,
            ratio_trace=self.ratio_trace,
        )

    def __repr__(self):
        return 'ClassVerdict({!r}, target={}, n={})'.format(
                self.verdict, self.target, len(self.ratio_trace))


def trend_verdict(ratios, target, tolerance=0.05, divergence=0.5,
        half_widths=None):
    """
    Classify a ratio sequence against its expected limit.

    Only the top half of the sequence is judged. The sequence is
    consistent when its mean deviation from ``target`` (after removing
    the noise given by ``half_widths``) is below ``tolerance`` and the
    last ratio is the closest one. It is inconsistent when the
    deviations never shrink and the final one exceeds ``divergence``.
    Anything else is inconclusive.

    :rtype: str
    """
    ratios = np.asarray(ratios, dtype=float)
    if ratios.size == 0:
        return ClassVerdict.INCONCLUSIVE
    if half_widths is None:
        half_widths = np.zeros_like(ratios)
    half_widths = np.asarray(half_widths, dtype=float)

    start = ratios.size // 2
    top = ratios[start:]
    hw = half_widths[start:]
    if not np.all(np.isfinite(top)):
        return ClassVerdict.INCONCLUSIVE

    dev = np.abs(top - target)
    excess = np.maximum(dev - hw, 0.0)
    if excess.mean() < tolerance and dev[-1] <= dev.min() + hw[-1]:
        return ClassVerdict.CONSISTENT

    moving_away = top.size >= 2 and np.all(np.diff(dev) >= -1e-12)
    if moving_away and dev[-1] > max(divergence, hw[-1]):
        return ClassVerdict.INCONSISTENT
    return ClassVerdict.INCONCLUSIVE


def _check_levels(levels):
    levels = np.asarray(levels, dtype=float).reshape(-1)
    if levels.size == 0 or np.any(np.diff(levels) <= 0):
        raise ValueError('levels must be a non-empty increasing grid')
    return levels


class TailLaw(object):
    """
    Base class for laws on the real line.

    Sub-classes implement ``_tail`` and, where they have closed forms,
    ``_integrated_tail``, ``_quantile`` and ``mean``. Everything
    else falls back on adaptive quadrature and bisection.
    """
    family = None
    support_lower = -np.inf

    quad_epsrel = 1e-10
    quad_limit = 200

    def params(self):
        return dict()

    def __repr__(self):
        args = ', '.join('{}={!r}'.format(k, v) for k, v in self.params().items())
        return '{}({})'.format(self.family, args)

    @classmethod
    def from_config(cls, params, field='law'):
        return cls(**params)

    # -- tails ------------------------------------------------------------

    @_vectorized
    def tail(self, y):
        """
        Return F̄(y) = P(Y > y).
        """
        return self._tail(y)

    def _tail(self, y):
        raise NotImplementedError

    @_vectorized
    def log_tail(self, y):
        with np.errstate(divide='ignore'):
            return self._log_tail(y)

    def _log_tail(self, y):
        return np.log(self._tail(y))

    def cdf(self, y):
        return 1.0 - self.tail(y)

    @_vectorized
    def integrated_tail(self, y):
        """
        Return ∫_y^∞ F̄(z)dz = E[(Y - y)^+] without the cap at 1.
        """
        return self._integrated_tail(y)

    def _integrated_tail(self, y):
        return self._quad_integrated_tail(y)

    @_vectorized
    def quad_integrated_tail(self, y):
        """
        Same as :meth:`integrated_tail`, always computed by quadrature.
        """
        return self._quad_integrated_tail(y)

    def _quad_integrated_tail(self, y):
        return np.array([self._quad_one(yi) for yi in y])

    def _scalar_tail(self, z):
        return float(self._tail(np.array([z]))[0])

    def _quad_one(self, y):
        total = 0.0
        lower = self.support_lower
        if np.isfinite(lower) and y < lower:
            total += lower - y
            y = lower
        if y < 0:
            part, _ = integrate.quad(self._scalar_tail, y, 0.0,
                    epsrel=self.quad_epsrel, limit=self.quad_limit)
            total += part
            y = 0.0
        part, _ = integrate.quad(self._scalar_tail, y, np.inf,
                epsrel=self.quad_epsrel, limit=self.quad_limit)
        if not np.isfinite(part):
            raise MeanInfinite('positive part of the mean diverges for {!r}'.format(self))
        return total + part

    def int_tail(self, y):
        """
        Return the integrated tail F̄ᴵ(y) = min(1, ∫_y^∞ F̄(z)dz).
        """
        return np.minimum(1.0, self.integrated_tail(y))

    def mean(self):
        lower = self.support_lower
        if np.isfinite(lower):
            return lower + self.integrated_tail(lower)
        positive = self.integrated_tail(0.0)
        negative, _ = integrate.quad(lambda z: 1.0 - self._scalar_tail(z),
                -np.inf, 0.0, epsrel=self.quad_epsrel, limit=self.quad_limit)
        return positive - negative

    def truncated_mean(self, beta):
        """
        Return ∫(y ∨ -β)F(dy).

        :param beta: Truncation level, strictly positive.
        """
        beta = np.asarray(beta, dtype=float)
        if np.any(beta <= 0):
            raise NonPositiveLevel(beta)
        out = self.integrated_tail(-beta) - beta
        if out.ndim == 0:
            return float(out)
        return out

    # -- inversion --------------------------------------------------------

    @_vectorized
    def quantile(self, u):
        """
        Return the generalised inverse sup{z : F(z) ≤ u}.

        :raises InvalidProbability: if ``u`` is outside [0, 1).
        """
        if np.any(~((u >= 0.0) & (u < 1.0))):
            raise InvalidProbability('probability must lie in [0, 1): {}'.format(u))
        return self._quantile(u)

    def _quantile(self, u):
        return self._bisect_quantile(u)

    def _bisect_quantile(self, u):
        u = np.asarray(u, dtype=float)
        survive = 1.0 - u
        if np.isfinite(self.support_lower):
            lo = np.full_like(u, self.support_lower - 1.0)
        else:
            lo = np.full_like(u, -1.0)
            for _ in range(1100):
                low = self._tail(lo) < survive
                if not low.any():
                    break
                lo[low] *= 2.0
        hi = np.maximum(lo + 1.0, 1.0)
        for _ in range(1100):
            high = self._tail(hi) >= survive
            if not high.any():
                break
            hi[high] = lo[high] + 2.0 * (hi[high] - lo[high])

        for _ in range(200):
            mid = 0.5 * (lo + hi)
            below = self._tail(mid) >= survive
            lo = np.where(below, mid, lo)
            hi = np.where(below, hi, mid)
            if np.all(hi - lo <= 1e-13 * np.maximum(1.0, np.abs(hi))):
                break
        return hi

    def sample(self, rng, size=None):
        """
        Draw from the law by inversion of ``rng`` uniforms.
        """
        u = rng.random(size)
        if size is None:
            return float(self._quantile(np.array([u]))[0])
        return self._quantile(np.asarray(u))


class Pareto(TailLaw):
    """
    Lomax-type Pareto law, F̄(y) = (1 + (y - loc)/scale)^(-alpha) for y ≥ loc.

    :param alpha: Tail exponent, must exceed 1 for a finite mean.
    """
    family = 'Pareto'

    def __init__(self, alpha, scale=1.0, loc=0.0):
        if not alpha > 1:
            raise MeanInfinite('Pareto tail exponent alpha={} gives an infinite mean'.format(alpha))
        if not scale > 0:
            raise ValueError('scale must be positive')
        self.alpha = float(alpha)
        self.scale = float(scale)
        self.loc = float(loc)
        self.support_lower = self.loc

    def params(self):
        return dict(alpha=self.alpha, scale=self.scale, loc=self.loc)

    def _z(self, y):
        return np.maximum((y - self.loc) / self.scale, 0.0)

    def _tail(self, y):
        return np.where(y < self.loc, 1.0, (1.0 + self._z(y)) ** -self.alpha)

    def _log_tail(self, y):
        return -self.alpha * np.log1p(self._z(y))

    def _integrated_tail(self, y):
        head = self.scale / (self.alpha - 1.0)
        return np.where(y < self.loc,
                (self.loc - y) + head,
                head * (1.0 + self._z(y)) ** (1.0 - self.alpha))

    def mean(self):
        return self.loc + self.scale / (self.alpha - 1.0)

    def _quantile(self, u):
        return self.loc + self.scale * ((1.0 - u) ** (-1.0 / self.alpha) - 1.0)


class Weibull(TailLaw):
    """
    Weibull-type law, F̄(y) = exp(-(y/scale)^shape) for y ≥ 0.
    """
    family = 'Weibull'
    support_lower = 0.0

    def __init__(self, shape, scale=1.0):
        if not shape > 0 or not scale > 0:
            raise ValueError('shape and scale must be positive')
        self.shape = float(shape)
        self.scale = float(scale)

    def params(self):
        return dict(shape=self.shape, scale=self.scale)

    def _power(self, y):
        return (np.maximum(y, 0.0) / self.scale) ** self.shape

    def _tail(self, y):
        return np.where(y < 0, 1.0, np.exp(-self._power(y)))

    def _log_tail(self, y):
        return -self._power(y)

    def _integrated_tail(self, y):
        m = self.mean()
        upper = special.gammaincc(1.0 / self.shape, self._power(y))
        return np.where(y < 0, m - y, m * upper)

    def mean(self):
        return self.scale * special.gamma(1.0 + 1.0 / self.shape)

    def _quantile(self, u):
        return self.scale * (-np.log1p(-u)) ** (1.0 / self.shape)


class Lognormal(TailLaw):
    family = 'Lognormal'
    support_lower = 0.0

    def __init__(self, mu=0.0, sigma=1.0):
        if not sigma > 0:
            raise ValueError('sigma must be positive')
        self.mu = float(mu)
        self.sigma = float(sigma)

    def params(self):
        return dict(mu=self.mu, sigma=self.sigma)

    def _standard(self, y, extra=0.0):
        safe = np.where(y > 0, y, 1.0)
        return (np.log(safe) - self.mu - extra) / self.sigma

    def _tail(self, y):
        return np.where(y <= 0, 1.0, stats.norm.sf(self._standard(y)))

    def _log_tail(self, y):
        return np.where(y <= 0, 0.0, stats.norm.logsf(self._standard(y)))

    def _integrated_tail(self, y):
        m = self.mean()
        positive = (m * stats.norm.sf(self._standard(y, self.sigma ** 2))
                - y * stats.norm.sf(self._standard(y)))
        return np.where(y <= 0, m - y, positive)

    def mean(self):
        return math.exp(self.mu + 0.5 * self.sigma ** 2)

    def _quantile(self, u):
        return np.exp(self.mu + self.sigma * special.ndtri(u))


class Exponential(TailLaw):
    family = 'Exponential'

    def __init__(self, rate=1.0, loc=0.0):
        if not rate > 0:
            raise ValueError('rate must be positive')
        self.rate = float(rate)
        self.loc = float(loc)
        self.support_lower = self.loc

    def params(self):
        return dict(rate=self.rate, loc=self.loc)

    def _excess(self, y):
        return np.maximum(y - self.loc, 0.0)

    def _tail(self, y):
        return np.where(y < self.loc, 1.0, np.exp(-self.rate * self._excess(y)))

    def _log_tail(self, y):
        return -self.rate * self._excess(y)

    def _integrated_tail(self, y):
        return np.where(y < self.loc,
                self.loc - y + 1.0 / self.rate,
                np.exp(-self.rate * self._excess(y)) / self.rate)

    def mean(self):
        return self.loc + 1.0 / self.rate

    def _quantile(self, u):
        return self.loc - np.log1p(-u) / self.rate


class PointMixture(TailLaw):
    """
    Finitely many atoms with the given weights.
    """
    family = 'PointMixture'

    def __init__(self, atoms, weights=None):
        atoms = np.asarray(atoms, dtype=float).reshape(-1)
        if weights is None:
            weights = np.full(atoms.size, 1.0 / max(atoms.size, 1))
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if atoms.size == 0 or atoms.size != weights.size:
            raise ValueError('atoms and weights must be non-empty and of equal length')
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise InvalidProbability('weights must be non-negative and sum to 1')
        keep = weights > 0
        order = np.argsort(atoms[keep], kind='stable')
        self.atoms = atoms[keep][order]
        self.weights = weights[keep][order] / weights[keep].sum()
        # upper[k] = P(Y >= atoms[k]); trailing zero for "beyond the last atom".
        self._upper = np.append(np.cumsum(self.weights[::-1])[::-1], 0.0)
        self._cum = np.cumsum(self.weights)
        self.support_lower = float(self.atoms[0])

    def params(self):
        return dict(atoms=self.atoms.tolist(), weights=self.weights.tolist())

    def _tail(self, y):
        idx = np.searchsorted(self.atoms, y, side='right')
        return self._upper[idx]

    def _integrated_tail(self, y):
        excess = np.maximum(self.atoms[None, :] - y[:, None], 0.0)
        return excess @ self.weights

    def mean(self):
        return float(self.atoms @ self.weights)

    def _quantile(self, u):
        idx = np.searchsorted(self._cum, u, side='right')
        return self.atoms[np.minimum(idx, self.atoms.size - 1)]


class Shifted(TailLaw):
    """
    The law of ``Y + offset`` where ``Y`` has law ``base``.
    """
    family = 'Shifted'

    def __init__(self, base, offset):
        self.base = base
        self.offset = float(offset)
        self.support_lower = base.support_lower + self.offset

    @classmethod
    def from_config(cls, params, field='law'):
        params = dict(params)
        base = law_from_config(params.pop('base', None), field + '.base')
        return cls(base, **params)

    def params(self):
        return dict(base=self.base, offset=self.offset)

    def _tail(self, y):
        return self.base._tail(y - self.offset)

    def _log_tail(self, y):
        return self.base._log_tail(y - self.offset)

    def _integrated_tail(self, y):
        return self.base._integrated_tail(y - self.offset)

    def mean(self):
        return self.base.mean() + self.offset

    def _quantile(self, u):
        return self.base._quantile(u) + self.offset


class Mixture(TailLaw):
    """
    Finite mixture of laws. The generalised inverse is found by bisection,
    so sampling stays monotone in the uniforms.
    """
    family = 'Mixture'

    def __init__(self, components, weights):
        weights = np.asarray(weights, dtype=float).reshape(-1)
        if len(components) == 0 or len(components) != weights.size:
            raise ValueError('components and weights must be non-empty and of equal length')
        if np.any(weights < 0) or abs(weights.sum() - 1.0) > 1e-9:
            raise InvalidProbability('weights must be non-negative and sum to 1')
        self.components = list(components)
        self.weights = weights / weights.sum()
        self.support_lower = min(c.support_lower for c in self.components)

    @classmethod
    def from_config(cls, params, field='law'):
        params = dict(params)
        components = [law_from_config(c, '{}.components[{}]'.format(field, i))
                for i, c in enumerate(params.pop('components', []))]
        return cls(components, **params)

    def params(self):
        return dict(components=self.components, weights=self.weights.tolist())

    def _tail(self, y):
        return sum(w * c._tail(y) for w, c in zip(self.weights, self.components))

    def _log_tail(self, y):
        with np.errstate(divide='ignore'):
            logs = np.array([np.log(w) + c._log_tail(y)
                for w, c in zip(self.weights, self.components)])
        return special.logsumexp(logs, axis=0)

    def _integrated_tail(self, y):
        return sum(w * c._integrated_tail(y)
                for w, c in zip(self.weights, self.components))

    def mean(self):
        return float(sum(w * c.mean() for w, c in zip(self.weights, self.components)))


class Lattice(TailLaw):
    """
    The integer-valued law of ``floor(Y) + 1``, so that P(J > j) = P(Y > j)
    at every integer j.
    """
    family = 'Lattice'

    max_terms = 10 ** 7
    chunk = 4096

    def __init__(self, base):
        if not np.isfinite(base.support_lower):
            raise ValueError('Lattice needs a base law bounded below')
        self.base = base
        self.support_lower = math.floor(base.support_lower) + 1.0

    @classmethod
    def from_config(cls, params, field='law'):
        params = dict(params)
        base = law_from_config(params.pop('base', None), field + '.base')
        return cls(base, **params)

    def params(self):
        return dict(base=self.base)

    def _tail(self, y):
        return self.base._tail(np.floor(y))

    def _log_tail(self, y):
        return self.base._log_tail(np.floor(y))

    def _tail_sum(self, start):
        # Σ_{k >= start} P(J > k), closed off by the integral of the base tail.
        total = 0.0
        k = start
        while k - start < self.max_terms:
            ks = np.arange(k, k + self.chunk, dtype=float)
            terms = self.base._tail(ks)
            total += terms.sum()
            k += self.chunk
            if terms[-1] <= 1e-17 * max(total, 1e-300):
                break
        remainder = float(self.base._integrated_tail(np.array([k - 0.5]))[0])
        return total + remainder

    def _integrated_tail(self, y):
        out = np.empty_like(y)
        lower = self.support_lower
        for i, yi in enumerate(y):
            extra = 0.0
            if yi < lower:
                extra = lower - yi
                yi = lower
            up = math.ceil(yi)
            head = (up - yi) * float(self.base._tail(np.array([math.floor(yi)]))[0])
            out[i] = extra + head + self._tail_sum(up)
        return out

    def mean(self):
        return self.support_lower + float(self._integrated_tail(
            np.array([self.support_lower]))[0])

    def _quantile(self, u):
        return np.floor(self.base._quantile(u)) + 1.0


class Empirical(TailLaw):
    """
    Empirical law of a sample; the integrated tail is the exact mean
    excess over the sorted sample.
    """
    family = 'Empirical'

    def __init__(self, samples):
        samples = np.sort(np.asarray(samples, dtype=float).reshape(-1))
        if samples.size == 0:
            raise ValueError('empty sample')
        self.samples = samples
        self.n = samples.size
        # suffix[k] = sum of samples[k:]
        self._suffix = np.append(np.cumsum(samples[::-1])[::-1], 0.0)
        self.support_lower = float(samples[0])

    def params(self):
        return dict(n=self.n)

    def _tail(self, y):
        idx = np.searchsorted(self.samples, y, side='right')
        return (self.n - idx) / self.n

    def _integrated_tail(self, y):
        idx = np.searchsorted(self.samples, y, side='right')
        return (self._suffix[idx] - (self.n - idx) * y) / self.n

    def mean(self):
        return float(self._suffix[0] / self.n)

    def _quantile(self, u):
        idx = np.floor(u * self.n).astype(int)
        return self.samples[np.minimum(idx, self.n - 1)]


FAMILIES = dict(
    Pareto=Pareto,
    Weibull=Weibull,
    Lognormal=Lognormal,
    Exponential=Exponential,
    PointMixture=PointMixture,
    Shifted=Shifted,
    Mixture=Mixture,
    Lattice=Lattice,
    Empirical=Empirical,
)


def law_from_config(config, field='law'):
    """
    Build a law from a ``{"family": name, ...params}`` mapping.

    :raises ConfigInvalid: on unknown families or bad parameters.
    """
    if isinstance(config, TailLaw):
        return config
    if not isinstance(config, dict) or 'family' not in config:
        raise ConfigInvalid(field, "expected a mapping with a 'family' key")
    params = dict(config)
    name = params.pop('family')
    cls = FAMILIES.get(name)
    if cls is None:
        raise ConfigInvalid(field, 'unknown law family {!r}'.format(name))
    try:
        return cls.from_config(params, field)
    except (TypeError, ValueError) as e:
        raise ConfigInvalid(field, str(e))


def check_long_tailed(law, shift, levels, tolerance=0.05):
    """
    Trace F̄(y + shift)/F̄(y) over ``levels`` and classify the law as
    long-tailed when the ratios settle at 1.

    :rtype: ClassVerdict
    """
    if shift == 0:
        raise ValueError('shift must be non-zero')
    levels = _check_levels(levels)
    here = law.log_tail(levels)
    there = law.log_tail(levels + shift)
    bad = ~np.isfinite(here) | ~np.isfinite(there)
    if bad.any():
        raise UnderflowAtLevel(levels[np.argmax(bad)])
    ratios = np.exp(there - here)
    verdict = trend_verdict(ratios, 1.0, tolerance)
    return ClassVerdict(verdict, zip(levels, ratios), tolerance, target=1.0)


def _convolution_ratio(law, levels, h):
    # Lattice Y^L = h*floor(Y+/h) satisfies Y - h < Y^L <= Y, so the two-fold
    # sum tail lies between P(S^L > y) and P(S^L > y - 2h).
    top = int(math.ceil(levels[-1] / h)) + 2
    grid = h * np.arange(top + 1)
    tails = law.tail(grid)
    tails[0] = 1.0
    masses = np.empty_like(tails)
    masses[:-1] = tails[:-1] - tails[1:]
    masses[0] = 1.0 - tails[1]
    masses[-1] = tails[-1]

    def sum_tail(y):
        if y < 0:
            return 1.0
        m = int(math.floor(y / h + 1e-9))
        return float(masses[:m + 1] @ tails[m + 1:0:-1]) + tails[m + 1]

    base = law.tail(levels)
    lower = np.array([sum_tail(y) for y in levels]) / base
    upper = np.array([sum_tail(y - 2 * h) for y in levels]) / base
    return 0.5 * (lower + upper), 0.5 * (upper - lower)


def check_subexponential(law, levels, h=0.01, tolerance=0.05,
        rel_error=0.01, max_points=4 * 10 ** 6):
    """
    Trace the two-fold convolution tail of the law mapped to [0, ∞)
    against twice its tail. The discretisation step is halved until its
    error bound drops below ``rel_error`` of the target and a run at
    half the step agrees.

    :raises DiscretizationTooCoarse: when the grid would need more than
        ``max_points`` nodes.
    :rtype: ClassVerdict
    """
    levels = _check_levels(levels)
    if np.any(levels <= 0):
        raise NonPositiveLevel(levels[0])
    if not law.tail(levels[-1]) > 0:
        raise UnderflowAtLevel(levels[-1])

    target = 2.0
    allowed = rel_error * target
    step = float(h)
    while True:
        if levels[-1] / step > max_points:
            raise DiscretizationTooCoarse(
                    'convolution grid would need more than {} points'.format(max_points))
        ratios, errors = _convolution_ratio(law, levels, step)
        if errors.max() <= allowed:
            if levels[-1] / (step / 2) > max_points:
                break
            finer, finer_errors = _convolution_ratio(law, levels, step / 2)
            if np.max(np.abs(finer - ratios)) <= allowed:
                ratios, errors, step = finer, finer_errors, step / 2
                break
        logger.debug('convolution step %g too coarse (error %g)', step, errors.max())
        step /= 2

    verdict = trend_verdict(ratios, target, tolerance)
    return ClassVerdict(verdict, zip(levels, ratios), tolerance,
            target=target, errors=errors.tolist(), step=step)
