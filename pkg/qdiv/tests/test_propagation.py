# -*- coding: utf-8 -*-
"""Tests for trajectories, propagators and divisibility classification."""

import math

import numpy as np
import pytest

from qdiv.exceptions import InvalidTP, NonTPDrift, NotDivisible, NotStochasticInput, RateBlowUpInsideStep
from qdiv.models import CompositionParams, PauliRates
from qdiv.propagation import (
    MapTrajectory, TimeGrid, analytic_trajectory, classical_pdiv, classify, first_singular_time,
    image_profile, integrate, limit_projector, power_chain, propagator,
)
from qdiv.rates import make_ramp, make_rate
from qdiv.superop import Superoperator, dephasing_projector, is_cp


def _pauli(*specs):
    return PauliRates(*(make_rate(s) for s in specs))


def _trajectory(dynamics, t_end=2.0, steps=20):
    grid = TimeGrid.uniform(t_end, steps).including(dynamics.singular_times())
    return analytic_trajectory(dynamics.map_at, grid)


def test_time_grid():
    """Grids start at 0 and find their points."""
    grid = TimeGrid.uniform(2.0, 20)
    assert 21 == len(grid)
    assert grid.step == pytest.approx(0.1)
    assert 10 == grid.index_of(1.0)
    assert grid.index_of(1.05) is None
    assert 22 == len(grid.including([1.05, 5.0]))
    assert grid is grid.including([1.0])
    with pytest.raises(ValueError):
        TimeGrid([0.1, 0.2])
    with pytest.raises(ValueError):
        TimeGrid([0.0, 0.2, 0.2])


def test_trajectory_must_start_at_identity():
    """A trajectory starts at the identity and stays trace preserving."""
    grid = TimeGrid([0.0, 1.0])
    with pytest.raises(InvalidTP):
        MapTrajectory(grid, [dephasing_projector().matrix, np.eye(4)])
    with pytest.raises(InvalidTP):
        MapTrajectory(grid, [np.eye(4), 2 * np.eye(4)])


def test_cp_divisible_pauli():
    """Nonnegative rates are CP-divisible with full image everywhere."""
    traj = _trajectory(_pauli('constant(1.0)', 'constant(0.5)', 'constant(0.2)'))
    report = classify(traj)
    assert 'CP-divisible' == report.verdict
    assert not report.cp_violations()
    profile = image_profile(traj)
    assert {4} == set(profile.dims)
    assert profile.non_increasing
    assert first_singular_time(traj) is None


def test_eternal_model_is_p_divisible_only():
    """A permanently negative rate keeps positivity but not complete positivity."""
    traj = _trajectory(_pauli('constant(1.0)', 'constant(1.0)', 'neg_tanh'))
    report = classify(traj)
    assert 'P-divisible-only' == report.verdict
    assert len(report.cp_violations()) == len(report.intervals) - 1
    assert report.intervals[0].cp
    assert report.min_choi_eig() < -1e-3
    assert all(r.p_div for r in report.intervals)


def test_classify_with_workers():
    """Threaded classification gives the same records."""
    traj = _trajectory(_pauli('constant(1.0)', 'constant(1.0)', 'neg_tanh'))
    serial = classify(traj)
    threaded = classify(traj, workers=3)
    assert [r.cp for r in serial.intervals] == [r.cp for r in threaded.intervals]
    assert serial.verdict == threaded.verdict


def test_integrated_matches_analytic():
    """The integrated trajectory gets the same verdict."""
    rates = _pauli('constant(1.0)', 'constant(1.0)', 'neg_tanh')
    traj = integrate(rates.generator_at, TimeGrid.uniform(2.0, 20))
    assert 'generator-integrated' == traj.source
    assert 'P-divisible-only' == classify(traj).verdict


def test_dephasing_blowup():
    """Complete dephasing at t = 1 drops the image to the diagonal and stays divisible."""
    rates = _pauli('zero', 'zero', 'blowup(1.0)')
    traj = _trajectory(rates)
    assert [4] * 10 + [2] * 11 == traj.ranks()
    report = classify(traj)
    assert 'CP-divisible' == report.verdict
    assert 2 == report.intervals[-1].domain_rank
    profile = image_profile(traj)
    assert profile.non_increasing
    assert profile.dims_allowed()
    assert (0.9, 1.0) == pytest.approx(first_singular_time(traj))
    limit = limit_projector(rates.map_at, 1.0)
    assert limit.projector.close_to(dephasing_projector(), atol=1e-9)
    assert is_cp(limit.projector).ok


def test_blowup_then_negative_rate():
    """A negative rate after a Gamma1 blow-up regains x-distinguishability on the rank-2 image."""
    rates = _pauli('blowup(1.0)', 'step(1.0, -1.0, 1.0)', 'zero')
    traj = _trajectory(rates)
    assert [4] * 10 + [2] * 11 == traj.ranks()
    assert all(is_cp(traj.map(k)).ok for k in range(len(traj)))
    report = classify(traj)
    assert 'divisible-not-P' == report.verdict
    assert all(r.kernel_ok for r in report.intervals)
    assert all(r.cp for r in report.intervals if r.t <= 1.0 + 1e-9)
    after = [r for r in report.intervals if r.s >= 1.0 - 1e-9]
    assert 10 == len(after)
    assert all(2 == r.domain_rank and not r.p_div for r in after)


def test_rate_blowup_inside_step():
    """Integration refuses to step across a blow-up."""
    rates = _pauli('zero', 'zero', 'blowup(0.55)')
    with pytest.raises(RateBlowUpInsideStep):
        integrate(rates.generator_at, TimeGrid.uniform(1.0, 10))


def test_integrated_trace_drift():
    """Integrated maps may drift from trace preservation up to the drift tolerance."""
    def leaking(eps):
        return lambda t: Superoperator(-eps * np.eye(4))
    traj = integrate(leaking(2e-8), TimeGrid.uniform(1.0, 10))
    assert 'generator-integrated' == traj.source
    assert 1e-7 == traj.tp_tol
    with pytest.raises(NonTPDrift):
        integrate(leaking(1e-6), TimeGrid.uniform(1.0, 10))
    with pytest.raises(InvalidTP):
        MapTrajectory(traj.grid, traj.maps)


def test_not_divisible():
    """A map that revives a killed coherence has no propagator."""
    traj = MapTrajectory(TimeGrid([0.0, 0.5, 1.0]), [np.eye(4), dephasing_projector().matrix, np.eye(4)])
    with pytest.raises(NotDivisible):
        propagator(traj, 1, 2)
    report = classify(traj)
    assert 'not-divisible' == report.verdict
    assert not report.intervals[1].kernel_ok
    assert math.isnan(report.intervals[1].min_choi_eig)
    assert not image_profile(traj).non_increasing


def test_composition_crossing_t_star():
    """After t_star the image rotates, yet every propagator stays CPTP."""
    traj = _trajectory(CompositionParams(make_ramp('ramp(1.0)')))
    report = classify(traj)
    assert 'CP-divisible' == report.verdict
    profile = image_profile(traj)
    assert not profile.non_increasing
    assert profile.first_violation == pytest.approx(1.1)
    assert {2, 4} == set(profile.dims)


@pytest.mark.parametrize('dynamics', [
    _pauli('constant(1.0)', 'constant(1.0)', 'neg_tanh'),
    CompositionParams(make_ramp('ramp(1.0)')),
], ids=['eternal', 'composition'])
@pytest.mark.parametrize('r, s, t', [(0, 5, 15), (3, 12, 20), (10, 14, 19), (0, 10, 20)])
def test_propagators_compose(dynamics, r, s, t):
    """V_{t,s} V_{s,r} = V_{t,r}, also across a rank drop."""
    traj = _trajectory(dynamics)
    direct = propagator(traj, r, t).V
    chained = propagator(traj, s, t).V @ propagator(traj, r, s).V
    assert chained.close_to(direct, atol=1e-8)


def test_decreasing_ramp_breaks_positivity():
    """A ramp that moves back towards the identity is divisible but not P-divisible."""
    traj = _trajectory(CompositionParams(make_ramp('wobble(1.0, 2.0)')))
    report = classify(traj)
    assert 'divisible-not-P' == report.verdict
    bad = [r for r in report.intervals if not r.p_div]
    assert bad
    assert all(0.3 - 1e-9 <= r.s and r.t <= 0.7 + 1e-9 for r in bad)
    assert bad[0].witness_state is not None


def test_classical_power_chain():
    """Powers of an invertible stochastic matrix are P-divisible."""
    verdict = classical_pdiv(power_chain([[0.9, 0.2], [0.1, 0.8]], 5))
    assert verdict.p_div
    assert verdict.contraction_ok
    assert verdict.consistent()
    assert 5 == len(verdict.intermediates)


@pytest.mark.parametrize('chain', [
    [np.eye(2), np.full((2, 2), 0.5), np.eye(2)],
    [np.eye(2), np.array([[0.9, 0.2], [0.1, 0.8]]), np.array([[0.95, 0.1], [0.05, 0.9]])],
])
def test_classical_not_p_divisible(chain):
    """Chains that regain distinguishability fail both checks."""
    verdict = classical_pdiv(chain)
    assert not verdict.p_div
    assert not verdict.contraction_ok
    assert verdict.consistent()


def test_classical_singular_chain():
    """A singular step can still have a stochastic intermediate."""
    collapse = np.array([[1.0, 1.0], [0.0, 0.0]])
    verdict = classical_pdiv([np.eye(2), np.full((2, 2), 0.5), collapse])
    assert verdict.p_div
    assert verdict.consistent()


def test_classical_input_checks():
    """Non-stochastic and oversized matrices are refused."""
    with pytest.raises(NotStochasticInput):
        classical_pdiv([np.array([[0.5, 0.2], [0.6, 0.8]])])
    with pytest.raises(NotStochasticInput):
        classical_pdiv([np.eye(4)])


def test_classical_random_power_chains():
    """Powers of random 3x3 stochastic matrices pass both checks, however ill conditioned."""
    rng = np.random.default_rng(11)
    for _ in range(50):
        matrix = rng.dirichlet(np.ones(3), size=3).T
        verdict = classical_pdiv(power_chain(matrix, 5))
        assert verdict.p_div
        assert verdict.contraction_ok
        assert verdict.consistent()


def test_classical_random_chains_agree():
    """Both checks agree on random 3x3 chains, and some of them are not P-divisible."""
    rng = np.random.default_rng(12)
    verdicts = []
    for _ in range(300):
        a, b = (rng.dirichlet(np.ones(3), size=3).T for _ in range(2))
        verdicts.append(classical_pdiv([np.eye(3), a, b]))
    assert all(v.consistent() for v in verdicts)
    assert any(not v.p_div for v in verdicts)
    assert any(v.p_div for v in verdicts)


def test_classical_growth_is_exact():
    """The reported growth is twice the negative mass of the worst intermediate column."""
    a = np.array([[0.9, 0.2], [0.1, 0.8]])
    b = np.array([[0.95, 0.1], [0.05, 0.9]])
    verdict = classical_pdiv([a, b])
    s = verdict.intermediates[0]
    negative = np.sum(np.clip(s, None, 0.0), axis=0)
    assert verdict.worst_growth == pytest.approx(-2 * negative.min(), abs=1e-12)
