# -*- coding: utf-8 -*-
"""Tests for the model families."""

import math

import numpy as np
import pytest

from qdiv.exceptions import DegenerateTime, GeneratorSingular, NegativeWeight
from qdiv.models import (
    CompositionParams, ManiscalcoParams, PauliRates, commutator_defect, composition_generator,
    composition_map, composition_propagator, maniscalco_damping_basis, maniscalco_map, pauli_map,
    pauli_rate_conditions, pauli_weights, rank_one_collapse_params,
)
from qdiv.opcore import SIGMA1
from qdiv.propagation import TimeGrid, integrate
from qdiv.rates import make_ramp, make_rate
from qdiv.superop import is_cp, is_tp, pauli_coordinates, rank_profile


def _pauli(*specs):
    return PauliRates(*(make_rate(s) for s in specs))


def _maniscalco(omega, gamma_plus, gamma_minus, gamma3='zero'):
    return ManiscalcoParams(make_rate(omega), make_rate(gamma_plus), make_rate(gamma_minus), make_rate(gamma3))


def test_pauli_constant_rates():
    """Constant rates give exponentially decaying Pauli eigenvalues."""
    rates = _pauli('constant(1.0)', 'constant(0.5)', 'constant(0.2)')
    t = 0.7
    coordinates = pauli_coordinates(pauli_map(rates, t))
    expected = [1.0, math.exp(-0.7 * t), math.exp(-1.2 * t), math.exp(-1.5 * t)]
    assert np.allclose(np.diag(coordinates), expected)
    assert pauli_map(rates, 0.0).close_to(np.eye(4))
    assert min(pauli_weights(rates, t)) >= 0


def test_eternal_model_weights():
    """The eternally negative rate keeps the map CP with a vanishing weight."""
    rates = _pauli('constant(1.0)', 'constant(1.0)', 'neg_tanh')
    for t in (0.1, 1.0, 3.0):
        weights = pauli_weights(rates, t)
        assert weights[3] == pytest.approx(0.0, abs=1e-12)
        assert is_cp(pauli_map(rates, t)).ok
    conditions = pauli_rate_conditions(rates, 1.0)
    assert not conditions.cp
    assert conditions.p


def test_pauli_map_not_cp():
    """Strongly negative rates break complete positivity of the map itself."""
    rates = _pauli('zero', 'zero', '-constant(1.0)')
    assert 'NegativeWeight' in pauli_map(rates, 1.0).notes
    with pytest.raises(NegativeWeight):
        pauli_map(rates, 1.0, strict=True)


@pytest.mark.parametrize('rates', [
    _pauli('constant(1.0)', 'constant(1.0)', 'neg_tanh'),
    _pauli('zero', 'tanh', 'sin(0.5, 2.0)'),
])
def test_pauli_generator_integrates_to_map(rates):
    """Integrating the generator reproduces the closed form."""
    traj = integrate(rates.generator_at, TimeGrid.uniform(2.0, 100))
    for k in (10, 50, 100):
        assert np.allclose(traj.maps[k], rates.map_at(traj.times[k]).matrix, atol=1e-8)


def test_maniscalco_map_is_cptp():
    """Positive rates give CPTP maps."""
    m = _maniscalco('constant(1.0)', 'constant(1.0)', 'constant(0.5)', 'constant(0.2)')
    for t in (0.2, 1.0, 3.0):
        s = maniscalco_map(m, t)
        assert is_tp(s)
        assert is_cp(s).ok


@pytest.mark.parametrize('m', [
    _maniscalco('constant(1.0)', 'constant(1.0)', 'constant(0.5)', 'constant(0.2)'),
    _maniscalco('zero', 'tanh', 'tanh(0.5)', 'zero'),
    _maniscalco('sin', 'constant(1.0)', 'tanh', 'constant(0.1)'),
])
def test_maniscalco_generator_integrates_to_map(m):
    """The generator and the closed form describe the same dynamics."""
    traj = integrate(m.generator_at, TimeGrid.uniform(1.5, 150))
    for k in (30, 150):
        assert np.allclose(traj.maps[k], maniscalco_map(m, traj.times[k]).matrix, atol=1e-7)


def test_damping_basis():
    """Eigen-operators and duals pair to the identity and diagonalise the map."""
    m = _maniscalco('constant(1.0)', 'constant(1.0)', 'constant(0.5)', 'constant(0.2)')
    basis = maniscalco_damping_basis(m, 1.0)
    assert np.allclose(basis.pairing(), np.eye(4), atol=1e-10)
    s = maniscalco_map(m, 1.0)
    for x, value in zip(basis.X, basis.eigenvalues):
        assert np.allclose(s.apply(x), value * x, atol=1e-12)
    with pytest.raises(DegenerateTime):
        maniscalco_damping_basis(m, 0.0)


def test_damping_basis_bilinear_pairing():
    """The bilinear basis pairs through Tr(X Y) and shares the eigenvalues."""
    m = _maniscalco('constant(1.0)', 'constant(1.0)', 'constant(0.5)', 'constant(0.2)')
    basis = maniscalco_damping_basis(m, 1.0, pairing='bilinear')
    assert np.allclose(basis.pairing(), np.eye(4), atol=1e-10)
    assert np.isclose(np.trace(basis.X[0]).real, 2.0)
    s = maniscalco_map(m, 1.0)
    for x, value in zip(basis.X, basis.eigenvalues):
        assert np.allclose(s.apply(x), value * x, atol=1e-12)
    with pytest.raises(ValueError):
        maniscalco_damping_basis(m, 1.0, pairing='frobenius')


def test_commutator_defect():
    """Maps commute exactly when their fixed points agree."""
    proportional = _maniscalco('zero', 'tanh', 'tanh(0.5)')
    assert commutator_defect(proportional, 0.5, 1.5) < 1e-8
    mismatched = _maniscalco('zero', 'constant(1.0)', 'tanh')
    assert commutator_defect(mismatched, 0.5, 1.5) > 1e-4


def test_rank_one_collapse():
    """From t2 on every state is sent to |0><0|."""
    m = rank_one_collapse_params(1.0)
    assert [1.0] == m.singular_times()
    assert 4 == rank_profile(maniscalco_map(m, 0.5)).rank
    collapsed = maniscalco_map(m, 1.0)
    assert 1 == rank_profile(collapsed).rank
    assert np.allclose(collapsed.apply(np.diag([0.2, 0.8])), np.diag([1.0, 0.0]))
    staged = rank_one_collapse_params(1.0, 0.5)
    assert 2 == rank_profile(maniscalco_map(staged, 0.7)).rank


def test_composition_map():
    """The map loses rank at t_star and keeps rotating afterwards."""
    c = CompositionParams(make_ramp('ramp(1.0)'))
    assert [1.0] == c.singular_times()
    assert 4 == rank_profile(composition_map(c, 0.5)).rank
    assert 2 == rank_profile(composition_map(c, 1.0)).rank
    assert 2 == rank_profile(composition_map(c, 1.4)).rank
    assert is_cp(composition_map(c, 0.5)).ok


@pytest.mark.parametrize('s, t', [(0.2, 0.6), (0.6, 1.0), (1.0, 1.5), (0.3, 1.7)])
def test_composition_propagator(s, t):
    """The closed-form propagator composes with Lambda_s into Lambda_t."""
    c = CompositionParams(make_ramp('ramp(1.0)'))
    v = composition_propagator(c, t, s)
    assert (v @ composition_map(c, s)).close_to(composition_map(c, t), atol=1e-12)
    assert is_cp(v).ok


def test_composition_generator():
    """The generator is singular from t_star on."""
    c = CompositionParams(make_ramp('ramp(1.0)'))
    traj = integrate(c.generator_at, TimeGrid.uniform(0.9, 90))
    assert np.allclose(traj.maps[-1], composition_map(c, 0.9).matrix, atol=1e-7)
    assert np.allclose(composition_generator(c, 0.3, numeric=True).matrix,
                       composition_generator(c, 0.3).matrix, atol=1e-6)
    with pytest.raises(GeneratorSingular):
        composition_generator(c, 1.0)


def test_unitary_composition():
    """A frozen ramp is a pure rotation about sigma_2."""
    c = CompositionParams(make_ramp('frozen'))
    s = composition_map(c, math.pi / 4)
    assert np.allclose(s.apply(SIGMA1), -np.diag([1.0, -1.0]), atol=1e-12)
