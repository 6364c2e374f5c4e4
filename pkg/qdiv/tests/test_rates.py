# -*- coding: utf-8 -*-
"""Tests for rate and ramp built-ins."""

import math

import pytest
from scipy.integrate import quad

from qdiv.exceptions import UnknownBuiltin
from qdiv.rates import Blowup, Constant, Negated, NegTanh, Tanh, Zero, make_ramp, make_rate


@pytest.mark.parametrize('text', [
    'zero', 'constant(1.5)', 'step(1.0, -0.5, 2.0)', 'tanh(2.0)', 'neg_tanh', 'sin(1.0, 2.0)',
    'neg_sin', 'polynomial(1.0, 0.0, -0.5)', 'blowup(3.0, 2.0)', '-tanh', '-constant(0.25)',
])
def test_rate_text_round_trip(text):
    """The canonical text parses back to an equal rate."""
    rate = make_rate(text)
    assert rate == make_rate(rate.spec())
    assert hash(rate) == hash(make_rate(rate.spec()))


def test_defaults_and_negation():
    """Omitted arguments take their defaults, a leading minus negates."""
    assert Tanh(1.0) == make_rate('tanh')
    assert Negated(Tanh()) == make_rate('-tanh')
    assert '-tanh(1.0)' == make_rate('-tanh').spec()
    assert make_rate('neg_tanh')(0.5) == pytest.approx(-math.tanh(0.5))
    assert NegTanh() != Negated(Tanh())


@pytest.mark.parametrize('text', ['tanh(0.7)', 'sin(1.0, 2.0)', 'polynomial(0.5, 1.0, -0.25)',
                                  'step(1.0, -1.0, 0.4)', '-sin'])
def test_integral_matches_quadrature(text):
    """Closed-form integrals agree with numerical quadrature."""
    rate = make_rate(text)
    for t in (0.3, 1.0, 2.5):
        value, _ = quad(rate, 0.0, t, points=[0.4] if 'step' in text else None)
        assert rate.integral(t) == pytest.approx(value, abs=1e-9)


def test_constant_flags():
    """Constant rates know their value."""
    assert Zero().is_constant()
    assert 0.0 == Zero().value
    assert 2.0 == Constant(2).value
    assert make_rate('polynomial(3.0)').is_constant()
    assert -3.0 == make_rate('-polynomial(3.0)').value
    assert not make_rate('tanh').is_constant()


def test_blowup():
    """A blow-up rate has an infinite integral from its blow-up time on."""
    rate = Blowup(1.0)
    assert 1.0 == rate.blowup_time
    assert rate.integral(0.5) == pytest.approx(math.log(2.0))
    assert math.isinf(rate.integral(1.0))
    assert math.isinf(rate(1.5))


@pytest.mark.parametrize('text', ['cosh', 'tanh(', 'constant(a)', 'constant', 'blowup(-1)', ''])
def test_unknown_builtin(text):
    """Unknown names and bad arguments raise UnknownBuiltin."""
    with pytest.raises(UnknownBuiltin):
        make_rate(text)


def test_ramps():
    """Ramps start at 0 and saturate at t_star."""
    ramp = make_ramp('ramp(2.0)')
    assert 2.0 == ramp.t_star
    assert 0.5 == ramp(1.0)
    assert 1.0 == ramp(3.0)
    smooth = make_ramp('smooth(1.0)')
    assert smooth(0.0) == pytest.approx(0.0)
    assert smooth(0.5) == pytest.approx(0.5)
    assert smooth.derivative(0.5) == pytest.approx(0.5 * math.pi)
    wobble = make_ramp('wobble(1.0, 2.0)')
    assert wobble.derivative(0.5) < 0
    assert make_ramp('frozen').t_star is None
    with pytest.raises(UnknownBuiltin):
        make_ramp('-ramp(1.0)')
    with pytest.raises(UnknownBuiltin):
        make_ramp('tanh')
