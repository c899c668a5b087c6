# -*- coding: utf-8 -*-


class BigJumpError(Exception):

    def __init__(self, msg, *args):
        super(BigJumpError, self).__init__(msg, *args)
        self.msg = msg

    def __str__(self):
        return self.msg


class MeanInfinite(BigJumpError):
    pass


class InvalidProbability(BigJumpError, ValueError):
    pass


class UnderflowAtLevel(BigJumpError):

    def __init__(self, level, *args):
        msg = 'tail underflows at level {}'.format(level)
        super(UnderflowAtLevel, self).__init__(msg, level, *args)
        self.level = level


class DiscretizationTooCoarse(BigJumpError):
    pass


class NonPositiveLevel(BigJumpError, ValueError):

    def __init__(self, level, *args):
        msg = 'level must be strictly positive, got {}'.format(level)
        super(NonPositiveLevel, self).__init__(msg, level, *args)
        self.level = level


class NotIrreducible(BigJumpError):
    pass


class CycleLengthCap(BigJumpError):
    pass


class NonNegativeDrift(BigJumpError):

    def __init__(self, a, *args):
        msg = ('drift constant a={} must be finite and strictly positive; '
               'the supremum may be infinite').format(a)
        super(NonNegativeDrift, self).__init__(msg, a, *args)
        self.a = a


class GridTooShort(BigJumpError):
    pass


class PeriodicModulator(BigJumpError):
    pass


class StepCapExceeded(BigJumpError):
    pass


class NoFiniteYstar(BigJumpError):
    pass


class IncrementBoundViolated(BigJumpError):
    pass


class NonPositiveThreshold(BigJumpError, ValueError):
    pass


class GridTooCoarse(BigJumpError):
    pass


class HorizonCapExceeded(BigJumpError):
    pass


class EpsilonOutOfRange(BigJumpError, ValueError):
    pass


class ParameterInequalityViolated(BigJumpError):
    pass


class ConfigInvalid(BigJumpError):

    def __init__(self, field, msg, *args):
        full = '{}: {}'.format(field, msg) if field else msg
        super(ConfigInvalid, self).__init__(full, field, *args)
        self.field = field
