# -*- coding: utf-8 -*-

"""Named time-dependent rate and ramp functions.

Scenarios never carry code: every rate gamma(t) and every composition ramp
p(t) is one of the built-ins registered here and is written as
``name`` or ``name(arg, arg, ...)``. A leading ``-`` negates a rate.
"""

import logging
import math
import re

import numpy as np
from class_registry import ClassRegistry

from qdiv.exceptions import UnknownBuiltin

logger = logging.getLogger(__name__)

H_RATE = 1e-5

ratedex = ClassRegistry('name')
rampdex = ClassRegistry('name')

_SPEC_RE = re.compile(r'^\s*(?P<neg>-)?\s*(?P<name>[a-z][a-z0-9_]*)\s*(?:\((?P<args>[^()]*)\))?\s*$')


def central_difference(fn, t, h=H_RATE):
    """Return (fn(t + h) - fn(t - h)) / 2h, one-sided at t < h."""
    if t < h:
        return (fn(t + h) - fn(t)) / h
    return (fn(t + h) - fn(t - h)) / (2 * h)


def _format_number(value):
    return repr(float(value))


class Builtin():
    """Common behaviour of named built-ins: canonical spec text and equality."""

    name = None

    def __init__(self, *args):  # noqa: D107
        self.args = tuple(float(a) for a in args)

    def spec(self):
        """Return the canonical text form that :func:`make_rate` parses back."""
        if not self.args:
            return self.name
        return '%s(%s)' % (self.name, ', '.join(_format_number(a) for a in self.args))

    def __eq__(self, other):  # noqa: D105
        return type(self) is type(other) and self.args == other.args

    def __hash__(self):  # noqa: D105
        return hash((type(self).__name__, self.args))

    def __repr__(self):  # noqa: D105
        return '<%s %s>' % (type(self).__name__, self.spec())


class Rate(Builtin):
    """A rate gamma(t) with its integral Gamma(t) = int_0^t gamma."""

    blowup_time = None

    def rate(self, t):
        """Return gamma(t)."""
        raise NotImplementedError('Must be implemented in subclass.')

    def integral(self, t):
        """Return Gamma(t), +inf from the blow-up time on."""
        raise NotImplementedError('Must be implemented in subclass.')

    def __call__(self, t):
        """Return gamma(t)."""
        return self.rate(t)

    def is_constant(self):
        """Return True for rates that do not depend on time."""
        return False


@ratedex.register
class Zero(Rate):
    """gamma(t) = 0."""

    name = 'zero'

    def __init__(self):  # noqa: D107
        super().__init__()

    def rate(self, t):  # noqa: D102
        return 0.0

    def integral(self, t):  # noqa: D102
        return 0.0

    def is_constant(self):  # noqa: D102
        return True

    @property
    def value(self):
        """Return the constant value."""
        return 0.0


@ratedex.register
class Constant(Rate):
    """gamma(t) = c."""

    name = 'constant'

    def __init__(self, value):  # noqa: D107
        super().__init__(value)
        self.value = self.args[0]

    def rate(self, t):  # noqa: D102
        return self.value

    def integral(self, t):  # noqa: D102
        return self.value * t

    def is_constant(self):  # noqa: D102
        return True


@ratedex.register
class Step(Rate):
    """gamma(t) = before for t < at, after from ``at`` on."""

    name = 'step'

    def __init__(self, before, after, at):  # noqa: D107
        super().__init__(before, after, at)
        self.before, self.after, self.at = self.args

    def rate(self, t):  # noqa: D102
        return self.before if t < self.at else self.after

    def integral(self, t):  # noqa: D102
        return self.before * min(t, self.at) + self.after * max(t - self.at, 0.0)


@ratedex.register
class Tanh(Rate):
    """gamma(t) = scale tanh(t)."""

    name = 'tanh'
    sign = 1.0

    def __init__(self, scale=1.0):  # noqa: D107
        super().__init__(scale)
        self.scale = self.sign * self.args[0]

    def rate(self, t):  # noqa: D102
        return self.scale * math.tanh(t)

    def integral(self, t):  # noqa: D102
        # log cosh t without overflow
        return self.scale * (float(np.logaddexp(t, -t)) - math.log(2.0))


@ratedex.register
class NegTanh(Tanh):
    """gamma(t) = -scale tanh(t), the eternally negative dephasing rate."""

    name = 'neg_tanh'
    sign = -1.0


@ratedex.register
class Sin(Rate):
    """gamma(t) = amplitude sin(frequency t)."""

    name = 'sin'
    sign = 1.0

    def __init__(self, amplitude=1.0, frequency=1.0):  # noqa: D107
        super().__init__(amplitude, frequency)
        self.amplitude = self.sign * self.args[0]
        self.frequency = self.args[1]

    def rate(self, t):  # noqa: D102
        return self.amplitude * math.sin(self.frequency * t)

    def integral(self, t):  # noqa: D102
        return self.amplitude * (1.0 - math.cos(self.frequency * t)) / self.frequency


@ratedex.register
class NegSin(Sin):
    """gamma(t) = -amplitude sin(frequency t)."""

    name = 'neg_sin'
    sign = -1.0


@ratedex.register
class Polynomial(Rate):
    """gamma(t) = c0 + c1 t + c2 t^2 + ..."""

    name = 'polynomial'

    def __init__(self, *coefficients):  # noqa: D107
        if not coefficients:
            raise TypeError('polynomial needs at least one coefficient')
        super().__init__(*coefficients)
        self.poly = np.polynomial.Polynomial(self.args)
        self.antiderivative = self.poly.integ(lbnd=0.0)

    def rate(self, t):  # noqa: D102
        return float(self.poly(t))

    def integral(self, t):  # noqa: D102
        return float(self.antiderivative(t))

    def is_constant(self):  # noqa: D102
        return all(c == 0.0 for c in self.args[1:])

    @property
    def value(self):
        """Return the constant term."""
        return self.args[0]


@ratedex.register
class Blowup(Rate):
    """gamma(t) = scale / (at - t); Gamma is infinite from ``at`` on."""

    name = 'blowup'

    def __init__(self, at, scale=1.0):  # noqa: D107
        super().__init__(at, scale)
        self.at, self.scale = self.args
        if self.at <= 0:
            raise TypeError('blow-up time must be positive')
        self.blowup_time = self.at

    def rate(self, t):  # noqa: D102
        if t >= self.at:
            return math.inf
        return self.scale / (self.at - t)

    def integral(self, t):  # noqa: D102
        if t >= self.at:
            return math.inf
        return -self.scale * math.log1p(-t / self.at)


class Negated(Rate):
    """Negation of another rate, written with a leading ``-``."""

    def __init__(self, inner):  # noqa: D107
        super().__init__()
        self.inner = inner
        self.name = '-' + inner.name
        self.blowup_time = inner.blowup_time

    def spec(self):  # noqa: D102
        return '-' + self.inner.spec()

    def rate(self, t):  # noqa: D102
        return -self.inner.rate(t)

    def integral(self, t):  # noqa: D102
        return -self.inner.integral(t)

    def is_constant(self):  # noqa: D102
        return self.inner.is_constant()

    @property
    def value(self):
        """Return the negated constant value."""
        return -self.inner.value

    def __eq__(self, other):  # noqa: D105
        return isinstance(other, Negated) and self.inner == other.inner

    def __hash__(self):  # noqa: D105
        return hash(('-', self.inner))


class Ramp(Builtin):
    """A mixing probability p(t) with p(0) = 0, reaching 1 at ``t_star``."""

    t_star = None

    def value(self, t):
        """Return p(t)."""
        raise NotImplementedError('Must be implemented in subclass.')

    def derivative(self, t):
        """Return dp/dt, by central difference unless a subclass knows better."""
        return central_difference(self.value, t)

    def __call__(self, t):
        """Return p(t)."""
        return self.value(t)


@rampdex.register
class Frozen(Ramp):
    """p(t) = 0, the map stays unitary."""

    name = 'frozen'

    def __init__(self):  # noqa: D107
        super().__init__()

    def value(self, t):  # noqa: D102
        return 0.0

    def derivative(self, t):  # noqa: D102
        return 0.0


@rampdex.register
class LinearRamp(Ramp):
    """p(t) = min(t / t_star, 1)."""

    name = 'ramp'

    def __init__(self, t_star):  # noqa: D107
        super().__init__(t_star)
        self.t_star = self.args[0]
        if self.t_star <= 0:
            raise TypeError('t_star must be positive')

    def value(self, t):  # noqa: D102
        return min(t / self.t_star, 1.0)

    def derivative(self, t):  # noqa: D102
        return 1.0 / self.t_star if t < self.t_star else 0.0


@rampdex.register
class SmoothRamp(Ramp):
    """p(t) = sin^2(pi t / (2 t_star)) before t_star, 1 after."""

    name = 'smooth'

    def __init__(self, t_star):  # noqa: D107
        super().__init__(t_star)
        self.t_star = self.args[0]
        if self.t_star <= 0:
            raise TypeError('t_star must be positive')

    def value(self, t):  # noqa: D102
        if t >= self.t_star:
            return 1.0
        return math.sin(0.5 * math.pi * t / self.t_star) ** 2

    def derivative(self, t):  # noqa: D102
        if t >= self.t_star:
            return 0.0
        return 0.5 * math.pi / self.t_star * math.sin(math.pi * t / self.t_star)


@rampdex.register
class Wobble(Ramp):
    """
    p(t) = s + a sin(2 pi s) / (2 pi) with s = t / t_star, 1 after t_star.

    For amplitude a > 1 the ramp decreases on part of (0, t_star), which
    breaks CP-divisibility; p stays inside [0, 1] for a < 4.7.
    """

    name = 'wobble'

    def __init__(self, t_star, amplitude):  # noqa: D107
        super().__init__(t_star, amplitude)
        self.t_star, self.amplitude = self.args
        if self.t_star <= 0:
            raise TypeError('t_star must be positive')

    def value(self, t):  # noqa: D102
        if t >= self.t_star:
            return 1.0
        s = t / self.t_star
        return s + self.amplitude * math.sin(2 * math.pi * s) / (2 * math.pi)

    def derivative(self, t):  # noqa: D102
        if t >= self.t_star:
            return 0.0
        s = t / self.t_star
        return (1.0 + self.amplitude * math.cos(2 * math.pi * s)) / self.t_star


def _parse_spec(text):
    match = _SPEC_RE.match(text or '')
    if not match:
        raise UnknownBuiltin('cannot parse built-in %r' % (text,))
    args = []
    if match.group('args') is not None and match.group('args').strip():
        for arg in match.group('args').split(','):
            try:
                args.append(float(arg))
            except ValueError:
                raise UnknownBuiltin('argument %r of %r is not a number' % (arg.strip(), text)) from None
    return bool(match.group('neg')), match.group('name'), args


def _instantiate(registry, kind, name, args):
    try:
        return registry.get(name, *args)
    except KeyError:
        raise UnknownBuiltin('unknown %s built-in %r (known: %s)' % (
            kind, name, ', '.join(sorted(registry.keys())))) from None
    except TypeError as err:
        raise UnknownBuiltin('bad arguments for %s %r: %s' % (kind, name, err)) from None


def make_rate(text):
    """Build a rate from its spec text, e.g. ``constant(1)`` or ``-tanh``."""
    negate, name, args = _parse_spec(text)
    rate = _instantiate(ratedex, 'rate', name, args)
    return Negated(rate) if negate else rate


def make_ramp(text):
    """Build a composition ramp from its spec text, e.g. ``ramp(2)``."""
    negate, name, args = _parse_spec(text)
    if negate:
        raise UnknownBuiltin('ramps cannot be negated: %r' % (text,))
    return _instantiate(rampdex, 'ramp', name, args)
