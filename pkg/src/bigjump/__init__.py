# -*- coding: utf-8 -*-

import sys

from importlib import metadata

from .errors import BigJumpError, ConfigInvalid, NonNegativeDrift
from .tail_laws import (
        ClassVerdict,
        TailLaw,
        Pareto, Weibull, Lognormal, Exponential,
        PointMixture, Shifted, Mixture, Lattice, Empirical,
        check_long_tailed, check_subexponential, law_from_config, trend_verdict,
)
from .levy_measures import (
        LevyMeasure,
        ParetoTail, CompoundPoisson, WeibullTail, TwoSided,
        measure_from_config,
)
from .modulation import (
        FiniteMarkov, Countdown, Sojourn, WalkSpec,
        stationary_law, sample_cycle,
        drift_constant, weight_constant, kappa, check_d4,
        check_domination, check_tail_weights,
)
from .discrete_walk import (
        TruncationRule,
        simulate_path, sample_supremum, asymptote, big_jump_series,
        iceland_constants, exp_bound_check, slln_check, shift_spec, lindley_tail,
        int_tail_level,
)
from .continuous_walk import (
        LevyTriple,
        simulate_cts_path, sample_cts_supremum, cts_asymptote, cts_iceland_s,
        cts_big_jump_integral, cts_slln_check, pk_exponential_tail,
        gamma_sup, v2_sup,
)
from .estimation import (
        TailReport,
        estimate_tail, ratio_report, run_counterexample, verify_appendix_lemmas,
)
from .cli import bigjump, Lab, Scenario


def _entry_points(group):
    eps = metadata.entry_points()
    if hasattr(eps, 'select'):
        return eps.select(group=group)
    return eps.get(group, [])


def load_plugins(group='bigjump_plugins'):
    """
    Call every entry point of ``group`` with this package, so plugins can
    register law families, measures or commands.

    :returns: The names of the loaded entry points.
    """
    package = sys.modules[__name__]
    loaded = []
    for entry_point in _entry_points(group):
        plugin = entry_point.load()
        plugin(package)
        loaded.append(entry_point.name)
    return loaded


load_plugins()
