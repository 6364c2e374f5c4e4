# -*- coding: utf-8 -*-

"""
Scenario files.

A scenario is a flat list of ``key = value`` lines with ``#`` comments and
dotted keys, e.g.::

    model = pauli
    pauli.gamma1 = constant(1)
    pauli.gamma2 = constant(1)
    pauli.gamma3 = neg_tanh
    grid.t_end = 3
    analyses = divisibility, backflow

Every problem found is collected with its line number before a single
ScenarioError is raised.
"""

import logging
from dataclasses import dataclass, field, replace

import numpy as np

from qdiv.exceptions import ScenarioError, ScenarioIssue, UnknownBuiltin
from qdiv.models import CompositionParams, ManiscalcoParams, PauliRates
from qdiv.propagation import TimeGrid, Tolerances, is_column_stochastic
from qdiv.rates import Zero, make_ramp, make_rate

logger = logging.getLogger(__name__)

MODELS = ('pauli', 'maniscalco', 'composition', 'classical')
ANALYSES = ('trajectory', 'image-profile', 'divisibility', 'backflow', 'certify')
SOURCES = ('analytic', 'integrated')
MIN_STEPS = 10

# model parameter keys: (required, default spec)
MODEL_KEYS = {
    'pauli': {'gamma1': (True, None), 'gamma2': (True, None), 'gamma3': (True, None)},
    'maniscalco': {'omega': (False, 'zero'), 'gamma_plus': (True, None),
                   'gamma_minus': (True, None), 'gamma3': (False, 'zero')},
    'composition': {'p': (True, None)},
    'classical': {'matrix': (True, None), 'steps': (False, '10')},
}

_TRUE = ('true', 'yes', 'on', '1')
_FALSE = ('false', 'no', 'off', '0')


@dataclass(frozen=True)
class Scenario():
    """Validated scenario: model, its parameters, grid, analyses, sampler and tolerances."""

    model: str
    params: dict = field(default_factory=dict)
    t_end: float = 2.0
    steps: int = 100
    source: str = 'analytic'
    analyses: tuple = ANALYSES
    n_pairs: int = 100
    ancilla_dim: int = 2
    biased: bool = True
    seed: int = 0
    workers: int = 1
    subspaces: int = 20
    p_values: tuple = (0.3, 0.5, 0.7)
    tolerances: Tolerances = field(default_factory=Tolerances)

    def grid(self):
        """Return the uniform time grid."""
        return TimeGrid.uniform(self.t_end, self.steps)

    def dynamics(self):
        """Return the model parameter object (PauliRates, ManiscalcoParams or CompositionParams)."""
        if self.model == 'pauli':
            return PauliRates(self.params['gamma1'], self.params['gamma2'], self.params['gamma3'])
        if self.model == 'maniscalco':
            return ManiscalcoParams(self.params.get('omega', Zero()), self.params['gamma_plus'],
                                    self.params['gamma_minus'], self.params.get('gamma3', Zero()))
        if self.model == 'composition':
            return CompositionParams(self.params['p'])
        raise ValueError('%s scenarios have no quantum dynamics' % self.model)

    def classical_chain(self):
        """Return (matrix, steps) of a classical scenario."""
        return np.array(self.params['matrix'], dtype=float), int(self.params.get('steps', 10))

    def with_overrides(self, seed=None, tol_rank=None, threshold=None):
        """Return a copy with command line overrides applied."""
        scenario = self
        if seed is not None:
            scenario = replace(scenario, seed=int(seed))
        tolerances = scenario.tolerances
        if tol_rank is not None:
            tolerances = replace(tolerances, rank=float(tol_rank))
        if threshold is not None:
            tolerances = replace(tolerances, threshold=float(threshold))
        return replace(scenario, tolerances=tolerances)


def _parse_bool(text):
    lowered = text.lower()
    if lowered in _TRUE:
        return True
    if lowered in _FALSE:
        return False
    raise ValueError('expected true or false, got %r' % text)


def _parse_int(minimum):
    def parse(text):
        value = int(text)
        if value < minimum:
            raise ValueError('must be at least %d' % minimum)
        return value
    return parse


def _parse_positive(text):
    value = float(text)
    if not value > 0:
        raise ValueError('must be positive')
    return value


def _parse_choice(choices):
    def parse(text):
        if text not in choices:
            raise ValueError('must be one of %s' % ', '.join(choices))
        return text
    return parse


def _parse_analyses(text):
    names = [name.strip() for name in text.split(',') if name.strip()]
    if names == ['all']:
        return ANALYSES
    unknown = [name for name in names if name not in ANALYSES]
    if unknown:
        raise ValueError('unknown analyses %s (known: %s)' % (', '.join(unknown), ', '.join(ANALYSES)))
    return tuple(name for name in ANALYSES if name in names)


def _parse_p_values(text):
    values = tuple(float(v) for v in text.split(',') if v.strip())
    if not values or any(not 0.0 < v < 1.0 for v in values):
        raise ValueError('p values must lie strictly between 0 and 1')
    return values


def _parse_matrix(text):
    rows = [[float(x) for x in row.replace(',', ' ').split()] for row in text.split(';') if row.strip()]
    matrix = np.array(rows, dtype=float)
    if not is_column_stochastic(matrix) or matrix.shape[0] > 3:
        raise ValueError('classical matrix must be column-stochastic of size at most 3')
    return tuple(tuple(row) for row in rows)


# scenario attribute, parser
GENERAL_KEYS = {
    'grid.t_end': ('t_end', _parse_positive),
    'grid.steps': ('steps', _parse_int(MIN_STEPS)),
    'source': ('source', _parse_choice(SOURCES)),
    'analyses': ('analyses', _parse_analyses),
    'sampler.n_pairs': ('n_pairs', _parse_int(0)),
    'sampler.ancilla_dim': ('ancilla_dim', _parse_choice(('1', '2', '3'))),
    'sampler.biased': ('biased', _parse_bool),
    'sampler.seed': ('seed', _parse_int(0)),
    'sampler.workers': ('workers', _parse_int(1)),
    'certify.subspaces': ('subspaces', _parse_int(0)),
    'certify.p_values': ('p_values', _parse_p_values),
}

TOLERANCE_KEYS = {
    'tol.rank': 'rank',
    'tol.cp': 'cp',
    'tol.tp': 'tp',
    'tol.threshold': 'threshold',
}


def _model_value(model, name, text):
    if model == 'composition':
        return make_ramp(text)
    if model == 'classical':
        return _parse_matrix(text) if name == 'matrix' else _parse_int(1)(text)
    return make_rate(text)


def _read_lines(text, issues):
    """Return {key: (lineno, value)} for every assignment line."""
    entries = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split('#', 1)[0].strip()
        if not line:
            continue
        if '=' not in line:
            issues.append(ScenarioIssue(lineno, 'BadValue', 'expected "key = value", got %r' % line))
            continue
        key, value = (part.strip() for part in line.split('=', 1))
        if key in entries:
            issues.append(ScenarioIssue(lineno, 'BadValue', 'duplicate key %r (first on line %d)' % (
                key, entries[key][0])))
            continue
        entries[key] = (lineno, value)
    return entries


def parse_scenario(text):
    """
    Parse scenario text.

    :param text: scenario file contents
    :return: Scenario with defaults applied
    :raises ScenarioError: with every UnknownKey, BadValue and MissingRequired issue found
    """
    issues = []
    entries = _read_lines(text, issues)
    model = None
    if 'model' not in entries:
        issues.append(ScenarioIssue(None, 'MissingRequired', 'key "model" is required'))
    else:
        lineno, value = entries['model']
        if value in MODELS:
            model = value
        else:
            issues.append(ScenarioIssue(lineno, 'UnknownKey', 'unknown model %r (known: %s)' % (
                value, ', '.join(MODELS))))

    settings = {}
    tolerances = {}
    params = {}
    for key, (lineno, value) in entries.items():
        if key == 'model':
            continue
        try:
            if key in GENERAL_KEYS:
                attribute, parse = GENERAL_KEYS[key]
                settings[attribute] = parse(value)
            elif key in TOLERANCE_KEYS:
                tolerances[TOLERANCE_KEYS[key]] = _parse_positive(value)
            elif '.' in key and key.split('.', 1)[0] in MODEL_KEYS:
                section, name = key.split('.', 1)
                if name not in MODEL_KEYS[section]:
                    issues.append(ScenarioIssue(lineno, 'UnknownKey', 'unknown key %r' % key))
                elif model is not None and section != model:
                    issues.append(ScenarioIssue(lineno, 'UnknownKey', 'key %r does not apply to model %s' % (
                        key, model)))
                elif model is not None:
                    params[name] = _model_value(model, name, value)
            else:
                issues.append(ScenarioIssue(lineno, 'UnknownKey', 'unknown key %r' % key))
        except (ValueError, UnknownBuiltin) as err:
            issues.append(ScenarioIssue(lineno, 'BadValue', '%s: %s' % (key, err)))

    if model is not None:
        for name, (required, default) in MODEL_KEYS[model].items():
            if name in params or '%s.%s' % (model, name) in entries:
                continue
            if required:
                issues.append(ScenarioIssue(None, 'MissingRequired', 'key "%s.%s" is required for model %s' % (
                    model, name, model)))
            else:
                params[name] = _model_value(model, name, default)

    if issues:
        issues.sort(key=lambda issue: (issue.lineno is None, issue.lineno or 0))
        raise ScenarioError(issues)
    if 'ancilla_dim' in settings:
        settings['ancilla_dim'] = int(settings['ancilla_dim'])
    scenario = Scenario(model, params, tolerances=Tolerances(**tolerances), **settings)
    logger.debug('parsed %s scenario, analyses: %s', model, ', '.join(scenario.analyses) or 'none')
    return scenario


def _format_float(value):
    return repr(float(value))


def print_scenario(scenario):
    """Return scenario text that :func:`parse_scenario` reads back into an equal Scenario."""
    lines = ['model = %s' % scenario.model]
    for name in MODEL_KEYS[scenario.model]:
        if name not in scenario.params:
            continue
        value = scenario.params[name]
        if name == 'matrix':
            text = '; '.join(' '.join(_format_float(x) for x in row) for row in value)
        elif name == 'steps':
            text = str(value)
        else:
            text = value.spec()
        lines.append('%s.%s = %s' % (scenario.model, name, text))
    lines.extend([
        'grid.t_end = %s' % _format_float(scenario.t_end),
        'grid.steps = %d' % scenario.steps,
        'source = %s' % scenario.source,
        'analyses = %s' % ', '.join(scenario.analyses),
        'sampler.n_pairs = %d' % scenario.n_pairs,
        'sampler.ancilla_dim = %d' % scenario.ancilla_dim,
        'sampler.biased = %s' % ('true' if scenario.biased else 'false'),
        'sampler.seed = %d' % scenario.seed,
        'sampler.workers = %d' % scenario.workers,
        'certify.subspaces = %d' % scenario.subspaces,
        'certify.p_values = %s' % ', '.join(_format_float(p) for p in scenario.p_values),
    ])
    for key, attribute in TOLERANCE_KEYS.items():
        lines.append('%s = %s' % (key, _format_float(getattr(scenario.tolerances, attribute))))
    return '\n'.join(lines) + '\n'
