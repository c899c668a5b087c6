# -*- coding: utf-8 -*-

"""
Command-line front end.

A run loads one JSON scenario, applies the command-line overrides and
hands the resolved scenario to one of the subcommands. Every summary it
writes carries the resolved config, so a run can be repeated from its
own output.
"""

import argparse
import collections
import copy
import json
import logging
import math
import os
import shlex
import sys

import numpy as np

from .argparsing import GroupingArgumentParser
from .continuous_walk import (
        CtsSupremumSampler,
        LevyTriple,
        cts_asymptote,
        cts_big_jump_integral,
        cts_iceland_s,
        cts_slln_check,
        gamma_sup,
        pk_exponential_tail,
        v2_sup,
)
from .discrete_walk import (
        DiscreteSupremumSampler,
        TruncationRule,
        asymptote,
        big_jump_series,
        exp_bound_check,
        iceland_constants,
        int_tail_level,
        slln_check,
)
from .errors import BigJumpError, ConfigInvalid, NonNegativeDrift
from .estimation import (
        DIVERGING,
        appendix_passed,
        estimate_tail,
        ratio_report,
        run_counterexample,
        verify_appendix_lemmas,
)
from .levy_measures import measure_from_config
from .modulation import (
        FiniteMarkov,
        Sojourn,
        WalkSpec,
        check_d4,
        check_domination,
        check_tail_weights,
        drift_constant,
        kappa,
        modulator_from_config,
        weight_constant,
)
from .tail_laws import ClassVerdict, law_from_config

logger = logging.getLogger(__name__)

COMMANDS = ('constants', 'simulate', 'asymptote', 'verify', 'counterexample', 'iceland')

PASS = 'pass'
FAIL = 'fail'
INCONCLUSIVE = 'inconclusive'

# The oracle is compared with the asymptote from the level where F̄ᴵ = 1e-3 on.
ORACLE_LEVEL = 1e-3

DEFAULTS = dict(
    name='scenario',
    mode='discrete',
    c=dict(),
    sojourn=dict(kind='deterministic', mean=1.0),
    y_grid=dict(lo=1.0, hi=100.0, steps=12),
    N=100000,
    seed=0,
    workers=1,
    truncation=dict(),
    delta=0.01,
    grid_dt=0.1,
    horizon_cap=1e7,
    kappa=dict(beta_grid=[1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0]),
    d4=dict(b=None, levels=None),
    slln=dict(),
    iceland=dict(alpha=0.25, beta=1.0),
)

SPEC_MODES = ('discrete', 'continuous')
MODES = SPEC_MODES + ('counterexample', 'appendix')


def _merge(base, extra):
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def _set_dotted(config, dotted, value):
    keys = dotted.split('.')
    node = config
    for key in keys[:-1]:
        if not isinstance(node.get(key), dict):
            node[key] = dict()
        node = node[key]
    node[keys[-1]] = value


def resolve_y_grid(value, field='y_grid'):
    """
    Turn a list or a ``{lo, hi, steps}`` mapping into an increasing grid;
    steps are geometric when ``lo > 0``.
    """
    if isinstance(value, dict):
        try:
            lo, hi, steps = float(value['lo']), float(value['hi']), int(value['steps'])
        except (KeyError, TypeError, ValueError):
            raise ConfigInvalid(field, 'expected lo, hi and steps')
        if steps < 1 or hi < lo:
            raise ConfigInvalid(field, 'need steps >= 1 and hi >= lo')
        if steps == 1:
            grid = np.array([lo])
        elif lo > 0:
            grid = np.geomspace(lo, hi, steps)
        else:
            grid = np.linspace(lo, hi, steps)
    else:
        try:
            grid = np.asarray(value, dtype=float).reshape(-1)
        except (TypeError, ValueError):
            raise ConfigInvalid(field, 'expected a list of numbers')
    if grid.size == 0 or np.any(np.diff(grid) <= 0):
        raise ConfigInvalid(field, 'grid must be non-empty and increasing')
    return grid


def jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        value = float(obj)
        return value if math.isfinite(value) else repr(value)
    if isinstance(obj, ClassVerdict):
        return jsonable(obj.as_dict())
    if obj is None or isinstance(obj, (int, str)):
        return obj
    return repr(obj)


class Scenario(object):
    """
    A validated scenario: the walk spec built from the config and the
    resolved run parameters.

    :ivar config: Resolved config (defaults, overrides and the explicit
        y-grid), safe to dump as JSON and load back.
    :ivar warnings: Messages about conditions that could not be
        established at load.
    """

    def __init__(self, config):
        self.config = config
        self.mode = config['mode']
        self.warnings = []
        self.spec = None
        self.tail_weights = None
        if self.mode in SPEC_MODES:
            self.spec = self._build_spec(config)
            self._validate()

    @classmethod
    def from_config(cls, config, overrides=None):
        if not isinstance(config, dict):
            raise ConfigInvalid('config', 'expected a JSON object')
        config = _merge(DEFAULTS, config)
        for dotted, value in overrides or ():
            _set_dotted(config, dotted, value)
        if config['mode'] not in MODES:
            raise ConfigInvalid('mode', 'must be one of {}'.format(', '.join(MODES)))
        config['y_grid'] = resolve_y_grid(config['y_grid']).tolist()
        for field in ('N', 'workers'):
            if not (isinstance(config[field], int) and config[field] >= 1):
                raise ConfigInvalid(field, 'must be a positive integer')
        return cls(config)

    @classmethod
    def from_file(cls, path, overrides=None):
        try:
            with open(path) as f:
                config = json.load(f)
        except (IOError, OSError) as e:
            raise ConfigInvalid('config', 'cannot read {}: {}'.format(path, e))
        except ValueError as e:
            raise ConfigInvalid('config', 'invalid JSON in {}: {}'.format(path, e))
        return cls.from_config(config, overrides)

    def _build_spec(self, config):
        continuous = self.mode == 'continuous'
        build = LevyTriple.from_config if continuous else law_from_config
        if 'modulator' in config:
            modulator = modulator_from_config(config['modulator'])
        else:
            modulator = FiniteMarkov([[1.0]])
        if not isinstance(config.get('laws'), dict) or not config['laws']:
            raise ConfigInvalid('laws', 'expected a mapping from state to law')
        if 'reference' not in config:
            raise ConfigInvalid('reference', 'missing')

        cache = dict()
        laws = dict()
        for key, value in config['laws'].items():
            # Identical configs share one law object.
            token = json.dumps(value, sort_keys=True)
            if token not in cache:
                cache[token] = build(value, 'laws.{}'.format(key))
            laws[key if key == 'default' else int(key)] = cache[token]
        if continuous:
            reference = measure_from_config(config['reference'], 'reference')
        else:
            reference = law_from_config(config['reference'], 'reference')
        weights = {k if k == 'default' else int(k): v for k, v in config['c'].items()}
        try:
            sojourn = Sojourn(**config['sojourn'])
        except (TypeError, ValueError) as e:
            raise ConfigInvalid('sojourn', str(e))
        try:
            return WalkSpec(modulator, laws, reference, weights=weights, sojourn=sojourn)
        except ValueError as e:
            raise ConfigInvalid('laws', str(e))

    def _validate(self):
        spec = self.spec
        check_domination(spec)
        drift_constant(spec)
        self.tail_weights = check_tail_weights(spec)
        for (index, weight), verdict in self.tail_weights.items():
            if not verdict.consistent:
                self.warnings.append('tail weight {} of law {!r} is {}'.format(
                    weight, spec.law_table[index], verdict.verdict))
        if spec.mode == 'continuous':
            for name, value in (('gamma', gamma_sup(spec)), ('v2', v2_sup(spec))):
                if not math.isfinite(value):
                    raise ConfigInvalid('laws', 'sup of {} is not finite'.format(name))
        k = self.kappa()
        if float(k) >= 0 and self.config['d4'].get('b') is None:
            self.warnings.append('kappa={:.6g} >= 0 and no cycle-tail evidence is '
                    'configured (d4.b)'.format(float(k)))

    @property
    def y_grid(self):
        return np.asarray(self.config['y_grid'], dtype=float)

    def kappa(self):
        return kappa(self.spec, self.config['kappa']['beta_grid'])

    def truncation_rule(self):
        try:
            return TruncationRule.for_grid(self.spec, self.y_grid, **self.config['truncation'])
        except TypeError as e:
            raise ConfigInvalid('truncation', str(e))

    def sampler(self):
        rule = self.truncation_rule()
        if self.mode == 'continuous':
            return CtsSupremumSampler(self.spec, rule, self.config['delta'],
                    self.config['grid_dt'], horizon_cap=self.config['horizon_cap'])
        return DiscreteSupremumSampler(self.spec, rule)

    def asymptote(self, y):
        if self.mode == 'continuous':
            # The jump measure may be infinite near 0; levels y <= 0 get nan.
            y = np.asarray(y, dtype=float)
            out = np.full(y.shape, np.nan)
            positive = y > 0
            out[positive] = cts_asymptote(self.spec, y[positive])
            return out if out.ndim else float(out)
        return asymptote(self.spec, y)

    def oracle(self, y):
        if self.mode == 'continuous':
            return cts_big_jump_integral(self.spec, y)
        return big_jump_series(self.spec, y)

    def oracle_available(self):
        if self.mode == 'continuous' and self.spec.sojourn.kind == 'exponential':
            return True
        return self.spec.modulator.is_aperiodic()

    def d4(self):
        section = self.config['d4']
        if section.get('b') is None:
            return None
        levels = section.get('levels')
        levels = self.y_grid if levels is None else resolve_y_grid(levels, 'd4.levels')
        scale = self.spec.sojourn.mean if self.mode == 'continuous' else 1.0
        return check_d4(self.spec.modulator, section['b'], self.spec.reference, levels,
                time_scale=scale)

    def constants(self):
        spec = self.spec
        k = self.kappa()
        out = collections.OrderedDict()
        out['a'] = drift_constant(spec)
        out['C'] = weight_constant(spec)
        out['kappa'] = k.value
        out['kappa_trace'] = k.trace
        out['mean_cycle_length'] = spec.modulator.mean_cycle_length()
        out['tail_weights'] = [dict(law=repr(spec.law_table[i]), c=w, verdict=v.verdict)
                for (i, w), v in sorted(self.tail_weights.items())]
        if self.mode == 'continuous':
            out['gamma'] = gamma_sup(spec)
            out['v2'] = v2_sup(spec)
        d4 = self.d4()
        if d4 is not None:
            out['d4'] = d4.verdict
        return out


class LabContext(object):
    """
    Verbosity switches and output streams shared by the CLI runners.
    """
    D = False
    v = False
    stdout = sys.stdout
    stderr = sys.stderr

    v_loaded = 'loaded scenario {name!r} ({mode}, a={a:.6g}, C={C:.6g})'
    v_warning = 'warning: {}'
    v_running = 'running {command} with N={N} seed={seed} workers={workers}'
    v_wrote = 'wrote {}'
    v_check = 'check {}: {}'

    def __init__(self, D=None, v=None, stdout=None, stderr=None, **kwargs):
        if D is not None:
            self.D = D
        if v is not None:
            self.v = v
        self.stdout = stdout or self.stdout
        self.stderr = stderr or self.stderr
        self._init_kwargs(**kwargs)

    def _init_kwargs(self, **kwargs):
        if kwargs:
            raise ValueError(kwargs)

    def __enter__(self):
        return self

    def __exit__(self, *args, **kwargs):
        self.close()

    def close(self):
        pass

    def _print_message(self, message, file=None):
        if message:
            file = file or self.stderr
            file.write(message + '\n')
            file.flush()

    def print_verbose(self, message):
        if self.v:
            self._print_message(message, file=self.stderr)

    def print_debug(self, message):
        if self.D:
            self._print_message(message, file=self.stderr)


class LabArgumentParser(GroupingArgumentParser):
    prog = 'bigjump'
    usage = ('%(prog)s [-hvD] [--config file] [--seed n] [--workers n] [--out-dir dir]'
            '\n\t       [--paths N] [--y-grid lo:hi:steps] [--set key=value]'
            '\n\t       [--alpha a] [--beta b] [--gamma g] [--v2 v] [--epsilon e]'
            '\n\t       [--control] command')
    description = 'Monte Carlo laboratory for suprema of heavy-tailed modulated walks.'
    epilog = ('commands:\n'
            '  constants       print a, C and kappa with their traces\n'
            '  simulate        estimate P(M > y) and write tail.csv\n'
            '  asymptote       write the asymptote curve to asymptote.csv\n'
            '  verify          run the acceptance checks of the scenario\n'
            '  counterexample  run the cycle-tail counterexample\n'
            '  iceland         print the exponential-bound constants')
    add_help = False

    def __init__(self, *args, **kwargs):
        super(LabArgumentParser, self).__init__(*args, **kwargs)

        self.add_argument('command',
                help='One of ' + ', '.join(COMMANDS),
                choices=COMMANDS,
                metavar='command',
        )

        self.add_argument('-h', '--help',
                help='show this help message and exit.',
                action='help',
        )

        self.add_argument('-v',
                help='Print progress to stderr',
                action='store_true',
        )

        self.add_argument('-D',
                help='Print debug logging to stderr',
                action='store_true',
        )

        self.add_argument('--config',
                group='scenario arguments',
                help='JSON scenario file',
                metavar='file',
        )

        self.add_argument('--seed',
                group='scenario arguments',
                help='Master random seed',
                type=self.non_negative_int,
                metavar='n',
        )

        self.add_argument('--workers',
                group='scenario arguments',
                help='Number of worker processes',
                type=self.positive_int,
                metavar='n',
        )

        self.add_argument('--paths',
                group='scenario arguments',
                help='Number of supremum samples N',
                type=self.positive_int,
                metavar='N',
        )

        self.add_argument('--y-grid',
                group='scenario arguments',
                help='Grid of levels as lo:hi:steps',
                type=self.y_grid,
                dest='y_grid',
                metavar='lo:hi:steps',
        )

        self.add_argument('--set',
                group='scenario arguments',
                help='Override a config entry, value in JSON (repeatable)',
                type=self.override,
                action='append',
                default=[],
                dest='overrides',
                metavar='key=value',
        )

        self.add_argument('--out-dir',
                group='output arguments',
                help='Directory for CSV and summary files (default: stdout)',
                dest='out_dir',
                metavar='dir',
        )

        for name in ('alpha', 'beta', 'gamma', 'v2', 'epsilon'):
            self.add_argument('--' + name,
                    group='iceland arguments',
                    help='Override iceland.{}'.format(name),
                    type=float,
                    metavar=name[0],
            )

        self.add_argument('--control',
                group='counterexample arguments',
                help='Run the geometric-cycle control instead',
                action='store_true',
        )

    def positive_int(self, value):
        value = int(value)
        if value < 1:
            raise ValueError('must be at least 1')
        return value

    def non_negative_int(self, value):
        value = int(value)
        if value < 0:
            raise ValueError('must be non-negative')
        return value

    def y_grid(self, value):
        lo, hi, steps = value.split(':')
        return dict(lo=float(lo), hi=float(hi), steps=int(steps))

    def override(self, value):
        key, sep, raw = value.partition('=')
        if not sep or not key:
            raise ValueError('expected key=value')
        try:
            return key, json.loads(raw)
        except ValueError:
            return key, raw

    def parse_args(self, argv):
        args, groups = self.group_parse_args(argv)
        overrides = []
        for name in ('seed', 'workers'):
            if getattr(args, name) is not None:
                overrides.append((name, getattr(args, name)))
        if args.paths is not None:
            overrides.append(('N', args.paths))
        if args.y_grid is not None:
            overrides.append(('y_grid', args.y_grid))
        for name in ('alpha', 'beta', 'gamma', 'v2', 'epsilon'):
            if getattr(args, name) is not None:
                overrides.append(('iceland.' + name, getattr(args, name)))
        overrides.extend(args.overrides)
        if args.config is None:
            self.error('--config is required for {}'.format(args.command))
        return dict(
            command=args.command,
            config=args.config,
            overrides=overrides,
            out_dir=args.out_dir,
            control=args.control,
            v=args.v,
            D=args.D,
        )


class Lab(LabContext):
    """
    Runs one subcommand on one scenario.

    :param command: One of :data:`COMMANDS`.
    :param scenario: A :class:`Scenario`, or a path to its JSON file.
    :param out_dir: Directory for CSV and summary files; without it the
        CSV goes to stdout.
    """
    ArgumentParser = LabArgumentParser
    command = 'constants'
    out_dir = None
    control = False

    def _init_kwargs(self, command=None, scenario=None, overrides=None, out_dir=None,
            control=None, config=None, **kwargs):
        super(Lab, self)._init_kwargs(**kwargs)
        if command is not None:
            if command not in COMMANDS:
                raise ValueError('unknown command {!r}'.format(command))
            self.command = command
        if out_dir is not None:
            self.out_dir = out_dir
        if control is not None:
            self.control = control
        self._handler = None
        if self.D:
            self._handler = logging.StreamHandler(self.stderr)
            self._handler.setFormatter(logging.Formatter('%(name)s: %(message)s'))
            root = logging.getLogger('bigjump')
            root.addHandler(self._handler)
            root.setLevel(logging.DEBUG)
        scenario = scenario if scenario is not None else config
        if not isinstance(scenario, Scenario):
            try:
                scenario = Scenario.from_file(scenario, overrides)
            except BaseException:
                self.close()
                raise
        self.scenario = scenario
        for message in scenario.warnings:
            self.print_verbose(self.v_warning.format(message))

    def close(self):
        if self._handler is not None:
            logging.getLogger('bigjump').removeHandler(self._handler)
            self._handler = None

    @classmethod
    def from_args(cls, args, stdout=None, stderr=None):
        """
        Create a Lab from command-line arguments.

        :param args: A string or list of command-line arguments.
        """
        stdout = stdout or cls.stdout
        stderr = stderr or cls.stderr
        try:
            args = shlex.split(args)
        except AttributeError:
            pass
        parser = cls.ArgumentParser(stdout=stdout, stderr=stderr)
        kwargs = parser.parse_args(args)
        kwargs.update(stdout=stdout, stderr=stderr)
        return cls(**kwargs)

    # -- output -----------------------------------------------------------

    def _open(self, name):
        if self.out_dir is None:
            return None
        if not os.path.isdir(self.out_dir):
            os.makedirs(self.out_dir)
        return open(os.path.join(self.out_dir, name), 'w', newline='')

    def write_csv(self, name, write):
        f = self._open(name)
        if f is None:
            write(self.stdout)
            return
        with f:
            write(f)
        self.print_verbose(self.v_wrote.format(f.name))

    def write_summary(self, summary):
        summary = collections.OrderedDict(summary)
        summary['config'] = self.scenario.config
        text = json.dumps(jsonable(summary), indent=2, sort_keys=True)
        f = self._open('summary.json')
        if f is None:
            if self.command not in ('simulate', 'asymptote', 'counterexample'):
                self.stdout.write(text + '\n')
            return
        with f:
            f.write(text + '\n')
        self.print_verbose(self.v_wrote.format(f.name))

    def _require_spec(self):
        if self.scenario.spec is None:
            raise ConfigInvalid('mode', '{} needs a discrete or continuous scenario'.format(
                self.command))

    # -- commands ---------------------------------------------------------

    def run(self):
        """
        Run the command and return the exit status.
        """
        config = self.scenario.config
        if self.scenario.spec is not None:
            self.print_verbose(self.v_loaded.format(name=config['name'], mode=config['mode'],
                a=drift_constant(self.scenario.spec),
                C=weight_constant(self.scenario.spec)))
        self.print_verbose(self.v_running.format(command=self.command, N=config['N'],
            seed=config['seed'], workers=config['workers']))
        return getattr(self, 'run_' + self.command)()

    def run_constants(self):
        self._require_spec()
        self.write_summary(self.scenario.constants())
        return 0

    def _simulate(self):
        sc = self.scenario
        config = sc.config
        sampler = sc.sampler()
        report = estimate_tail(sampler, sc.y_grid, config['N'], config['seed'],
                workers=config['workers'], asymptote=sc.asymptote)
        verdict = ratio_report(report)
        return sampler, report, verdict

    def run_simulate(self):
        self._require_spec()
        sampler, report, verdict = self._simulate()
        self.write_csv('tail.csv', report.to_csv)
        summary = self.scenario.constants()
        summary.update(verdict=verdict.verdict, truncation=sampler.rule.as_dict(),
                bias_bound=report.bias_bound, N=report.N, seed=report.seed)
        self.write_summary(summary)
        return 0

    def run_asymptote(self):
        self._require_spec()
        sc = self.scenario
        y = sc.y_grid
        values = sc.asymptote(y)
        oracle = None
        if sc.oracle_available():
            oracle = np.array([sc.oracle(yi) for yi in y])

        def write(f):
            f.write('y,asymptote,oracle\n')
            for i, yi in enumerate(y.tolist()):
                extra = '' if oracle is None else repr(float(oracle[i]))
                f.write('{!r},{!r},{}\n'.format(yi, float(values[i]), extra))

        self.write_csv('asymptote.csv', write)
        self.write_summary(dict(a=drift_constant(sc.spec), C=weight_constant(sc.spec)))
        return 0

    def _record(self, checks, name, outcome, detail=None):
        checks[name] = dict(outcome=outcome, detail=detail)
        self.print_verbose(self.v_check.format(name, outcome))

    def run_verify(self):
        sc = self.scenario
        config = sc.config
        checks = collections.OrderedDict()
        if sc.spec is not None:
            if 'pk' in config:
                self._verify_pk(checks)
            else:
                self._verify_ratio(checks)
                self._verify_oracle(checks)
            d4 = sc.d4()
            if d4 is not None:
                self._record(checks, 'd4', _outcome(d4.verdict), d4.as_dict())
            if config['slln']:
                self._verify_slln(checks)
        if 'appendix' in config:
            results = verify_appendix_lemmas(config['appendix'])
            self._record(checks, 'appendix', PASS if appendix_passed(results) else FAIL,
                    {k: v.verdict for k, v in results.items()})
        if self.scenario.mode == 'counterexample':
            self._verify_counterexample(checks)

        self.write_summary(dict(checks=checks))
        outcomes = [c['outcome'] for c in checks.values()]
        if FAIL in outcomes:
            return 1
        if INCONCLUSIVE in outcomes or not outcomes:
            return 3
        return 0

    def _verify_ratio(self, checks):
        _, report, verdict = self._simulate()
        self._record(checks, 'ratio_trend', _outcome(verdict.verdict), verdict.as_dict())
        usable = np.flatnonzero(report.reliable & (report.counts > 0))
        if usable.size == 0:
            self._record(checks, 'ratio_band', INCONCLUSIVE)
            return
        i = usable[np.argmin(np.abs(np.log(report.phat[usable] / 1e-3)))]
        ratio = float(report.ratio[i])
        outcome = PASS if 0.8 <= ratio <= 1.25 else FAIL
        self._record(checks, 'ratio_band', outcome, dict(y=float(report.y_grid[i]), ratio=ratio))

    def _verify_pk(self, checks):
        pk = self.scenario.config['pk']
        _, report, _ = self._simulate()
        exact = pk_exponential_tail(pk['rate'], pk['jump_mean'], pk['drift'],
                report.y_grid)
        inside = (report.ci_lo <= exact) & (exact <= report.ci_hi)
        self._record(checks, 'pk_oracle', PASS if inside.all() else FAIL,
                list(zip(report.y_grid.tolist(), report.phat.tolist(), exact.tolist())))

    def _verify_oracle(self, checks):
        sc = self.scenario
        if not sc.oracle_available():
            return
        start = int_tail_level(sc.spec.reference, ORACLE_LEVEL)
        levels = start * np.array([1.0, 2.0, 4.0, 8.0])
        ratios = np.array([sc.oracle(yi) for yi in levels]) / sc.asymptote(levels)
        outcome = PASS if np.all((ratios >= 0.98) & (ratios <= 1.02)) else FAIL
        self._record(checks, 'oracle', outcome, list(zip(levels.tolist(), ratios.tolist())))

    def _verify_slln(self, checks):
        sc = self.scenario
        section = dict(sc.config['slln'])
        k = section.get('k', 8)
        tol = section.get('tol', 0.05)
        if sc.mode == 'continuous':
            result = cts_slln_check(sc.spec, t=section.get('n', 1e5), tol=tol, k=k,
                    seed=sc.config['seed'], workers=sc.config['workers'],
                    delta=sc.config['delta'])
        else:
            result = slln_check(sc.spec, n=int(section.get('n', 10 ** 6)), tol=tol, k=k,
                    seed=sc.config['seed'], workers=sc.config['workers'])
        self._record(checks, 'slln', PASS if result.passed else FAIL, result._asdict())

    def _verify_counterexample(self, checks):
        params = dict(self.scenario.config.get('counterexample', {}))
        params.pop('control', None)
        main = run_counterexample(params, control=False)
        control = run_counterexample(params, control=True)
        d4_ok = main['d4']['verdict'] == ClassVerdict.CONSISTENT
        if main['verdict'] == DIVERGING and control['verdict'] == ClassVerdict.CONSISTENT and d4_ok:
            outcome = PASS
        elif INCONCLUSIVE in (main['verdict'], control['verdict']):
            outcome = INCONCLUSIVE
        else:
            outcome = FAIL
        self._record(checks, 'counterexample', outcome, dict(
            verdict=main['verdict'], control=control['verdict'], d4=main['d4']['verdict']))

    def run_counterexample(self):
        params = dict(self.scenario.config.get('counterexample', {}))
        control = bool(params.pop('control', False)) or self.control
        result = run_counterexample(params, control=control)
        report = result.pop('report')
        self.write_csv('tail.csv', report.to_csv)
        self.write_summary(result)
        return 0

    def run_iceland(self):
        self._require_spec()
        sc = self.scenario
        section = sc.config['iceland']
        alpha, beta = section['alpha'], section['beta']
        if sc.mode == 'continuous':
            gamma = section.get('gamma')
            v2 = section.get('v2')
            epsilon = section.get('epsilon')
            result = cts_iceland_s(sc.spec.reference, alpha, beta,
                    gamma_sup(sc.spec) if gamma is None else gamma,
                    v2_sup(sc.spec) if v2 is None else v2,
                    alpha / 4.0 if epsilon is None else epsilon)
            summary = result._asdict()
        else:
            constants = iceland_constants(sc.spec.reference, alpha, beta)
            summary = constants.as_dict()
            summary['residual'] = constants.residual()
            check = section.get('check')
            if check:
                rng = np.random.default_rng(sc.config['seed'])
                report = exp_bound_check(constants, sc.spec.reference, sc.spec.law_table,
                        int(check.get('N', 10 ** 5)), sc.y_grid, rng,
                        n_steps=int(check.get('n_steps', 2000)))
                summary['check'] = report.as_dict()
        self.write_summary(summary)
        return 0


def _outcome(verdict):
    if verdict == ClassVerdict.CONSISTENT:
        return PASS
    if verdict in (ClassVerdict.INCONSISTENT, DIVERGING):
        return FAIL
    return INCONCLUSIVE


def bigjump(args, stdout=None, stderr=None, Lab=Lab):
    """
    Run one command, as ``bigjump`` does from the command line.

    :param args: A string (split like a shell would) or a list of
        command-line arguments.
    :param stdout: A file-like object for CSV and summaries.
    :param stderr: A file-like object for errors, progress and debug
        output.
    :return: 0 on success, 1 on a runtime failure or a failed check, 2 on
        an invalid scenario, 3 when ``verify`` is inconclusive.
    :rtype: int

    :Example:

    .. code-block:: python

       from bigjump import bigjump
       bigjump('constants --config scenarios/two_state.json')
    """
    _stdout = stdout or Lab.stdout
    _stderr = stderr or Lab.stderr

    exit = argparse.Namespace()
    exit.status = 1

    class BigjumpArgumentParser(Lab.ArgumentParser):

        def exit(self, status=0, message=None):
            exit.status = status
            super(BigjumpArgumentParser, self).exit(status, message)

    class BigjumpLab(Lab):
        ArgumentParser = BigjumpArgumentParser

    try:
        with BigjumpLab.from_args(args, stdout=_stdout, stderr=_stderr) as lab:
            exit.status = lab.run()
    except (ConfigInvalid, NonNegativeDrift) as e:
        _stderr.write('bigjump: {}\n'.format(e))
        exit.status = 2
    except BigJumpError as e:
        _stderr.write('bigjump: {}\n'.format(e))
        exit.status = 1
    except KeyboardInterrupt:
        _stderr.write('\n')
        exit.status = 130
    except SystemExit:
        return exit.status
    return exit.status
