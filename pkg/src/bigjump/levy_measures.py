# -*- coding: utf-8 -*-

"""
Jump-intensity measures for the continuous-time walk.

A measure is described by its right tail ν̄(y) = ν((y, ∞)) and its left
tail ν((-∞, -y]) for y > 0. Large jumps are simulated exactly by
inversion of the normalised restricted tails; small jumps only enter
through their variance and compensator.
"""

import logging

import numpy as np
from scipy import integrate

from .errors import ConfigInvalid, NonPositiveLevel, NonPositiveThreshold
from .tail_laws import _vectorized, law_from_config, Weibull

logger = logging.getLogger(__name__)


def _check_positive(y):
    if np.any(np.asarray(y) <= 0):
        raise NonPositiveLevel(y)


class Jumps(object):
    """
    Jump times and sizes of a Poisson point process on a time window.
    Iterating yields ``(time, size)`` pairs in time order.
    """

    def __init__(self, times, sizes):
        self.times = np.asarray(times, dtype=float)
        self.sizes = np.asarray(sizes, dtype=float)

    def __len__(self):
        return self.times.size

    def __iter__(self):
        return iter(zip(self.times.tolist(), self.sizes.tolist()))


class LevyMeasure(object):
    """
    Base class for jump measures with ν({0}) = 0 and ∫(y² ∧ |y|)ν(dy) < ∞.

    Sub-classes implement ``_nu_tail`` and ``_nu_left_tail`` and the
    conditional inverses ``_jump_quantile``/``_left_jump_quantile``.
    """
    family = None
    finite = False

    quad_epsrel = 1e-10
    quad_limit = 200

    def params(self):
        return dict()

    def __repr__(self):
        args = ', '.join('{}={!r}'.format(k, v) for k, v in self.params().items())
        return '{}({})'.format(self.family, args)

    @classmethod
    def from_config(cls, params, field='nu'):
        return cls(**params)

    def _check_integrable(self):
        near = self.gamma_bound()
        far = self._int_scalar(self._nu_tail, 1.0) + self._int_scalar(self._nu_left_tail, 1.0)
        if not (np.isfinite(near) and np.isfinite(far)):
            raise ValueError('jump measure must integrate y² ∧ |y|')

    def _scalar(self, func):
        return lambda z: float(func(np.array([z]))[0])

    def _int_scalar(self, func, y, upper=np.inf):
        if upper <= y:
            return 0.0
        value, _ = integrate.quad(self._scalar(func), y, upper,
                epsrel=self.quad_epsrel, limit=self.quad_limit)
        return value

    # -- tails ------------------------------------------------------------

    @_vectorized
    def nu_tail(self, y):
        """
        Return ν̄(y) = ν((y, ∞)) for y > 0.
        """
        _check_positive(y)
        return self._nu_tail(y)

    @_vectorized
    def nu_left_tail(self, y):
        """
        Return ν((-∞, -y]) for y > 0.
        """
        _check_positive(y)
        return self._nu_left_tail(y)

    def _nu_left_tail(self, y):
        return np.zeros_like(y)

    @_vectorized
    def nu_int_tail(self, y):
        """
        Return the integrated tail ν̄ᴵ(y) = ∫_y^∞ ν̄(z)dz for y > 0.
        """
        _check_positive(y)
        return self._nu_int_tail(y)

    def _nu_int_tail(self, y):
        return np.array([self._int_scalar(self._nu_tail, yi) for yi in y])

    @_vectorized
    def nu_left_int_tail(self, y):
        _check_positive(y)
        return self._nu_left_int_tail(y)

    def _nu_left_int_tail(self, y):
        return np.array([self._int_scalar(self._nu_left_tail, yi) for yi in y])

    def positive_mass(self):
        return np.inf

    def negative_mass(self):
        return np.inf

    # -- functionals ------------------------------------------------------

    def gamma_bound(self):
        """
        Return ∫(1 ∧ y²)ν(dy).
        """
        both = lambda z: 2.0 * z * float(self._nu_tail(np.array([z]))[0]
                + self._nu_left_tail(np.array([z]))[0])
        value, _ = integrate.quad(both, 0.0, 1.0,
                epsrel=self.quad_epsrel, limit=self.quad_limit)
        return value

    def _small_variance(self, threshold):
        if threshold <= 0:
            return 0.0
        at = np.array([threshold])
        right = float(self._nu_tail(at)[0])
        left = float(self._nu_left_tail(at)[0])
        inner = lambda z: 2.0 * z * max(
                float(self._nu_tail(np.array([z]))[0]) - right
                + float(self._nu_left_tail(np.array([z]))[0]) - left, 0.0)
        value, _ = integrate.quad(inner, 0.0, threshold,
                epsrel=self.quad_epsrel, limit=self.quad_limit)
        return value

    def _compensator(self, threshold):
        # ∫_{|y|>threshold} y ν(dy) written through the tails.
        at = np.array([float(threshold)])
        right = threshold * self._nu_tail(at)[0] + self._nu_int_tail(at)[0]
        left = threshold * self._nu_left_tail(at)[0] + self._nu_left_int_tail(at)[0]
        return float(right - left)

    def small_jump_stats(self, threshold):
        """
        Return ``(variance, compensator_mean)``: the second moment of the
        jumps with |y| ≤ threshold and the mean of the jumps beyond it.
        """
        if not threshold > 0:
            raise NonPositiveThreshold('small-jump threshold must be positive')
        return self._small_variance(threshold), self._compensator(threshold)

    def truncated_left_excess(self, beta):
        """
        Return ∫_β^∞ ν((-∞, -z])dz, the amount by which truncating
        negative jumps at -β raises the drift.
        """
        return float(self.nu_left_int_tail(beta))

    def split_at(self, ystar):
        """
        Split into the restriction to (y*, ∞) and the rest.

        :returns: ``(upper, lower)``
        """
        if not ystar > 0:
            raise NonPositiveLevel(ystar)
        return Restricted(self, ystar, 'upper'), Restricted(self, ystar, 'lower')

    # -- jumps ------------------------------------------------------------

    def large_jump_rates(self, threshold):
        """
        Return the rates of jumps above ``threshold`` and below
        ``-threshold``. ``threshold=0`` is accepted for finite measures.
        """
        if threshold == 0 and self.finite:
            return self.positive_mass(), self.negative_mass()
        at = np.array([float(threshold)])
        return float(self._nu_tail(at)[0]), float(self._nu_left_tail(at)[0])

    def _jump_quantile(self, u, threshold):
        raise NotImplementedError

    def _left_jump_quantile(self, u, threshold):
        raise NotImplementedError

    def draw_large_jumps(self, count, threshold, rng):
        rate_pos, rate_neg = self.large_jump_rates(threshold)
        total = rate_pos + rate_neg
        up = rng.random(count) * total < rate_pos
        u = rng.random(count)
        sizes = np.empty(count)
        if up.any():
            sizes[up] = self._jump_quantile(u[up], threshold)
        if (~up).any():
            sizes[~up] = -self._left_jump_quantile(u[~up], threshold)
        return sizes

    def sample_jumps(self, threshold, horizon, rng):
        """
        Sample the jumps with |size| > threshold on [0, horizon].

        :rtype: Jumps
        """
        if not threshold > 0:
            raise NonPositiveThreshold('jump threshold must be positive')
        rate = sum(self.large_jump_rates(threshold))
        count = 0
        if rate > 0 and horizon > 0:
            count = int(rng.poisson(rate * horizon))
        times = np.sort(rng.uniform(0.0, horizon, count))
        sizes = self.draw_large_jumps(count, threshold, rng)
        return Jumps(times, sizes)


class ParetoTail(LevyMeasure):
    """
    ν̄(y) = weight·(y/lower)^(-alpha) beyond ``lower``. Below ``lower`` the
    tail is held at ``weight`` when ``capped`` (a finite measure) or the
    power law continues to 0 (infinite activity, needs alpha < 2).
    """
    family = 'ParetoTail'

    def __init__(self, alpha, lower=1.0, weight=1.0, capped=True):
        if not alpha > 1:
            raise ValueError('alpha must exceed 1 for integrable large jumps')
        if not capped and not alpha < 2:
            raise ValueError('uncapped power tails need alpha < 2 near the origin')
        if not (lower > 0 and weight > 0):
            raise ValueError('lower and weight must be positive')
        self.alpha = float(alpha)
        self.lower = float(lower)
        self.weight = float(weight)
        self.capped = bool(capped)
        self.finite = self.capped
        self._check_integrable()

    def params(self):
        return dict(alpha=self.alpha, lower=self.lower, weight=self.weight,
                capped=self.capped)

    def _floor(self, y):
        # Capped tails are flat below ``lower``; the power is only needed above it.
        return np.maximum(y, self.lower if self.capped else 1e-300)

    def _power(self, y):
        with np.errstate(over='ignore'):
            return self.weight * (self._floor(y) / self.lower) ** -self.alpha

    def _nu_tail(self, y):
        if self.capped:
            return np.where(y < self.lower, self.weight, self._power(y))
        return self._power(y)

    def _nu_int_tail(self, y):
        head = self.weight * self.lower / (self.alpha - 1.0)
        with np.errstate(over='ignore'):
            far = head * (self._floor(y) / self.lower) ** (1.0 - self.alpha)
        if self.capped:
            return np.where(y < self.lower,
                    self.weight * (self.lower - y) + head, far)
        return far

    def _nu_left_int_tail(self, y):
        return np.zeros_like(y)

    def positive_mass(self):
        return self.weight if self.capped else np.inf

    def negative_mass(self):
        return 0.0

    def _jump_quantile(self, u, threshold):
        level = (1.0 - u) * float(self.large_jump_rates(threshold)[0])
        return self.lower * (level / self.weight) ** (-1.0 / self.alpha)


class CompoundPoisson(LevyMeasure):
    """
    ν = rate × law of the jump ``jump``.
    """
    family = 'CompoundPoisson'
    finite = True

    def __init__(self, rate, jump):
        if rate < 0:
            raise ValueError('rate must be non-negative')
        self.rate = float(rate)
        self.jump = jump
        self._check_integrable()

    @classmethod
    def from_config(cls, params, field='nu'):
        params = dict(params)
        jump = law_from_config(params.pop('jump', None), field + '.jump')
        return cls(jump=jump, **params)

    def params(self):
        return dict(rate=self.rate, jump=self.jump)

    def _nu_tail(self, y):
        return self.rate * self.jump._tail(y)

    def _nu_left_tail(self, y):
        return self.rate * (1.0 - self.jump._tail(-y))

    def _nu_int_tail(self, y):
        return self.rate * self.jump._integrated_tail(y)

    def _nu_left_int_tail(self, y):
        if self.jump.support_lower >= 0:
            return np.zeros_like(y)
        return super(CompoundPoisson, self)._nu_left_int_tail(y)

    def positive_mass(self):
        return self.rate * float(self.jump.tail(0.0))

    def negative_mass(self):
        return self.rate * (1.0 - float(self.jump.tail(np.nextafter(0.0, -1.0))))

    def _jump_quantile(self, u, threshold):
        above = float(self.jump.tail(threshold))
        return self.jump._quantile(1.0 - above * (1.0 - u))

    def _left_jump_quantile(self, u, threshold):
        if threshold == 0:
            below = self.negative_mass() / self.rate
        else:
            below = 1.0 - float(self.jump.tail(-threshold))
        return -self.jump._quantile(u * below)


class WeibullTail(CompoundPoisson):
    """
    ν̄(y) = weight·exp(-(y/scale)^shape) for y > 0.
    """
    family = 'WeibullTail'

    def __init__(self, shape, scale=1.0, weight=1.0):
        super(WeibullTail, self).__init__(weight, Weibull(shape, scale))
        self.shape = float(shape)
        self.scale = float(scale)

    @classmethod
    def from_config(cls, params, field='nu'):
        return cls(**params)

    def params(self):
        return dict(shape=self.shape, scale=self.scale, weight=self.rate)


class TwoSided(LevyMeasure):
    """
    Positive jumps from ``pos`` and negative jumps mirrored from the
    positive part of ``neg``.
    """
    family = 'TwoSided'

    def __init__(self, pos, neg):
        self.pos = pos
        self.neg = neg
        self.finite = pos.finite and neg.finite

    @classmethod
    def from_config(cls, params, field='nu'):
        params = dict(params)
        pos = measure_from_config(params.pop('pos', None), field + '.pos')
        neg = measure_from_config(params.pop('neg', None), field + '.neg')
        if params:
            raise ConfigInvalid(field, 'unknown keys {}'.format(sorted(params)))
        return cls(pos, neg)

    def params(self):
        return dict(pos=self.pos, neg=self.neg)

    def _nu_tail(self, y):
        return self.pos._nu_tail(y)

    def _nu_left_tail(self, y):
        return self.neg._nu_tail(y)

    def _nu_int_tail(self, y):
        return self.pos._nu_int_tail(y)

    def _nu_left_int_tail(self, y):
        return self.neg._nu_int_tail(y)

    def positive_mass(self):
        return self.pos.positive_mass()

    def negative_mass(self):
        return self.neg.positive_mass()

    def _jump_quantile(self, u, threshold):
        return self.pos._jump_quantile(u, threshold)

    def _left_jump_quantile(self, u, threshold):
        return self.neg._jump_quantile(u, threshold)


class Restricted(LevyMeasure):
    """
    Restriction of ``base`` to (y*, ∞) (``side='upper'``) or to
    (-∞, y*] (``side='lower'``).
    """
    family = 'Restricted'

    def __init__(self, base, ystar, side):
        if side not in ('upper', 'lower'):
            raise ValueError('side must be upper or lower')
        self.base = base
        self.ystar = float(ystar)
        self.side = side
        self.finite = side == 'upper' or base.finite
        self._cut = float(base._nu_tail(np.array([self.ystar]))[0])
        self._cut_int = float(base._nu_int_tail(np.array([self.ystar]))[0])

    def params(self):
        return dict(base=self.base, ystar=self.ystar, side=self.side)

    def _nu_tail(self, y):
        if self.side == 'upper':
            return self.base._nu_tail(np.maximum(y, self.ystar))
        inside = np.maximum(self.base._nu_tail(y) - self._cut, 0.0)
        return np.where(y < self.ystar, inside, 0.0)

    def _nu_left_tail(self, y):
        if self.side == 'upper':
            return np.zeros_like(y)
        return self.base._nu_left_tail(y)

    def _nu_int_tail(self, y):
        gap = np.maximum(self.ystar - y, 0.0)
        if self.side == 'upper':
            return gap * self._cut + self.base._nu_int_tail(np.maximum(y, self.ystar))
        inside = (self.base._nu_int_tail(np.minimum(y, self.ystar))
                - self._cut_int - gap * self._cut)
        return np.maximum(inside, 0.0)

    def _nu_left_int_tail(self, y):
        if self.side == 'upper':
            return np.zeros_like(y)
        return self.base._nu_left_int_tail(y)

    def positive_mass(self):
        if self.side == 'upper':
            return self._cut
        return self.base.positive_mass() - self._cut

    def negative_mass(self):
        if self.side == 'upper':
            return 0.0
        return self.base.negative_mass()

    def _jump_quantile(self, u, threshold):
        if self.side == 'upper':
            return self.base._jump_quantile(u, max(threshold, self.ystar))
        full = self.base.large_jump_rates(threshold)[0]
        level = self._cut + (1.0 - u) * (full - self._cut)
        return self.base._jump_quantile(1.0 - level / full, threshold)

    def _left_jump_quantile(self, u, threshold):
        return self.base._left_jump_quantile(u, threshold)


FAMILIES = dict(
    ParetoTail=ParetoTail,
    WeibullTail=WeibullTail,
    CompoundPoisson=CompoundPoisson,
    TwoSided=TwoSided,
)


def measure_from_config(config, field='nu'):
    """
    Build a jump measure from a ``{"family": name, ...params}`` mapping.
    """
    if isinstance(config, LevyMeasure):
        return config
    if not isinstance(config, dict) or 'family' not in config:
        raise ConfigInvalid(field, "expected a mapping with a 'family' key")
    params = dict(config)
    name = params.pop('family')
    cls = FAMILIES.get(name)
    if cls is None:
        raise ConfigInvalid(field, 'unknown measure family {!r}'.format(name))
    try:
        return cls.from_config(params, field)
    except (TypeError, ValueError) as e:
        raise ConfigInvalid(field, str(e))
