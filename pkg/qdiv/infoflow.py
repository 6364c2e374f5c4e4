# -*- coding: utf-8 -*-

"""
Information flow between an open qubit and its environment.

The distinguishability N(t) = ||(id_d (x) Lambda_t)(p1 rho1 - p2 rho2)||_1
of a pair of states decreases under every P-divisible (d = 1) or
CP-divisible (d = 2) evolution. Its time derivative sigma is the
information flow; sigma > 0 is backflow of information into the system.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from qdiv.exceptions import DimensionMismatch, InvalidStatePair, OffGridTime, StepTooSmall
from qdiv.opcore import TAU_HERM, is_density, projector, random_pure_states, trace_norm
from qdiv.superop import TOL_RANK, Superoperator

logger = logging.getLogger(__name__)

ANCILLA_DIMS = (1, 2, 3)
BACKFLOW_THRESHOLD = 1e-7
BIASED_WEIGHTS = tuple(round(0.1 * k, 1) for k in range(1, 10))
CHUNK_SIZE = 64


@dataclass(frozen=True, eq=False)
class StatePair():
    """Two states of system (x) ancilla with prior probabilities p1, p2."""

    rho1: np.ndarray
    rho2: np.ndarray
    p1: float = 0.5
    ancilla_dim: int = 1
    label: str = ''

    def __post_init__(self):  # noqa: D105
        if self.ancilla_dim not in ANCILLA_DIMS:
            raise InvalidStatePair('ancilla dimension must be one of %s, got %r' % (ANCILLA_DIMS, self.ancilla_dim))
        if not 0.0 <= self.p1 <= 1.0:
            raise InvalidStatePair('p1 must lie in [0, 1], got %g' % self.p1)
        dim = 2 * self.ancilla_dim
        for name in ('rho1', 'rho2'):
            rho = np.array(getattr(self, name), dtype=complex)
            if rho.shape != (dim, dim):
                raise InvalidStatePair('%s has shape %s, expected %dx%d for ancilla dimension %d' % (
                    name, rho.shape, dim, dim, self.ancilla_dim))
            if not is_density(rho, TAU_HERM):
                raise InvalidStatePair('%s is not a density matrix' % name)
            rho.setflags(write=False)
            object.__setattr__(self, name, rho)

    @property
    def p2(self):
        """Return 1 - p1."""
        return 1.0 - self.p1

    def operator(self):
        """Return the Helstrom operator p1 rho1 - p2 rho2."""
        return self.p1 * self.rho1 - self.p2 * self.rho2

    def swapped(self):
        """Return the pair with (rho1, p1) and (rho2, p2) exchanged."""
        return StatePair(self.rho2, self.rho1, self.p2, self.ancilla_dim, self.label)

    def with_weight(self, p1):
        """Return the same states with prior ``p1``."""
        return StatePair(self.rho1, self.rho2, p1, self.ancilla_dim, self.label)


@dataclass(frozen=True)
class FlowSample():
    """Information flow estimate at one grid time, tagged with the prior and the ancilla."""

    t: float
    value: float
    p1: float = 0.5
    ancilla_dim: int = 1


def apply_extended(s, x, ancilla_dim):
    """
    Return (id_d (x) S) X for an operator or a stack of operators.

    The ancilla is the first tensor factor, so X is a d x d array of 2x2
    system blocks and S acts on every block.
    """
    matrix = s.matrix if isinstance(s, Superoperator) else np.asarray(s, dtype=complex)
    x = np.asarray(x, dtype=complex)
    d = ancilla_dim
    n = 2 * d
    if x.shape[-2:] != (n, n):
        raise DimensionMismatch('operator of shape %s does not fit ancilla dimension %d' % (x.shape, d))
    lead = x.shape[:-2]
    blocks = x.reshape(lead + (d, 2, d, 2)).swapaxes(-3, -2).reshape(lead + (d, d, 4))
    out = (blocks @ matrix.T).reshape(lead + (d, d, 2, 2))
    return out.swapaxes(-3, -2).reshape(lead + (n, n))


def _grid_index(traj, t):
    k = traj.grid.index_of(t)
    if k is None:
        raise OffGridTime('t=%g is not a grid point' % t)
    return k


def biased_norm(traj, pair, t):
    """Return ||(id_d (x) Lambda_t)(p1 rho1 - p2 rho2)||_1 at grid time ``t``."""
    k = _grid_index(traj, t)
    return trace_norm(apply_extended(traj.maps[k], pair.operator(), pair.ancilla_dim))


def guessing_probability(traj, pair, t):
    """Return the optimal probability of telling rho1 from rho2 at time t, (1 + N) / 2."""
    return 0.5 * (1.0 + biased_norm(traj, pair, t))


def norm_curves(traj, operators, ancilla_dim):
    """
    Return the trace norms of (id_d (x) Lambda_t) X for every operator and every grid time.

    :param traj: MapTrajectory
    :param operators: stack of Hermitian operators on system (x) ancilla
    :param ancilla_dim: ancilla dimension d
    :return: array of shape (len(operators), len(traj))
    """
    operators = np.asarray(operators, dtype=complex)
    d = ancilla_dim
    n = 2 * d
    blocks = operators.reshape((-1, d, 2, d, 2)).swapaxes(-3, -2).reshape((-1, d, d, 4))
    out = np.einsum('kij,pabj->kpabi', traj.maps, blocks).reshape((len(traj), -1, d, d, 2, 2))
    out = out.swapaxes(-3, -2).reshape((len(traj), -1, n, n))
    return np.asarray(trace_norm(out)).T


def _one_sided_rule(ranks, k, lo, hi):
    """Return the pair of indices to difference at k, or None across a rank change."""
    left = lo is not None and ranks[lo] == ranks[k]
    right = hi is not None and ranks[hi] == ranks[k]
    if left and right:
        return lo, hi
    if right:
        return k, hi
    if left:
        return lo, k
    return None


def sigma_table(times, curves, ranks):
    """
    Differentiate norm curves on the grid.

    Central differences between neighbouring grid points where the map rank
    does not change, one-sided ones next to a rank change, NaN where neither
    side has the rank of the current point.
    """
    curves = np.atleast_2d(curves)
    table = np.full(curves.shape, math.nan)
    last = len(times) - 1
    for k in range(len(times)):
        rule = _one_sided_rule(ranks, k, k - 1 if k > 0 else None, k + 1 if k < last else None)
        if rule is None:
            continue
        a, b = rule
        table[:, k] = (curves[:, b] - curves[:, a]) / (times[b] - times[a])
    return table


def sigma(traj, pair, t, h=None, tol_rank=TOL_RANK):
    """
    Estimate the information flow of ``pair`` at grid time ``t``.

    :param traj: MapTrajectory
    :param pair: StatePair
    :param t: grid time
    :param h: difference step, a multiple of the grid step; the neighbouring
        grid points are used when omitted
    :return: FlowSample, or None when t sits on a rank change with no
        matching side
    """
    k = _grid_index(traj, t)
    times = traj.times
    if h is None:
        lo = k - 1 if k > 0 else None
        hi = k + 1 if k < len(times) - 1 else None
    else:
        if h < traj.grid.step * (1.0 - 1e-9):
            raise StepTooSmall('h=%g is below the grid step %g' % (h, traj.grid.step))
        inside_lo = t - h >= -1e-12
        inside_hi = t + h <= traj.grid.t_end + 1e-12
        lo = traj.grid.index_of(t - h) if inside_lo else None
        hi = traj.grid.index_of(t + h) if inside_hi else None
        if (inside_lo and lo is None) or (inside_hi and hi is None):
            raise OffGridTime('t=%g +- h=%g is not on the grid' % (t, h))
    ranks = traj.ranks(tol_rank)
    rule = _one_sided_rule(ranks, k, lo, hi)
    if rule is None:
        logger.debug('no flow sample at t=%g: rank changes on both sides', t)
        return None
    a, b = rule
    na, nb = (biased_norm(traj, pair, times[j]) for j in (a, b))
    return FlowSample(float(t), float((nb - na) / (times[b] - times[a])), pair.p1, pair.ancilla_dim)


def _ket(*amplitudes):
    v = np.array(amplitudes, dtype=complex)
    return v / np.linalg.norm(v)


_PAULI_PAIRS = (
    ('z', _ket(1, 0), _ket(0, 1)),
    ('x', _ket(1, 1), _ket(1, -1)),
    ('y', _ket(1, 1j), _ket(1, -1j)),
)


def _bell_kets(ancilla_dim):
    """Return the four Bell states on ancilla levels {0, 1}, ancilla first."""
    n = 2 * ancilla_dim

    def ket(terms):
        v = np.zeros(n, dtype=complex)
        for (a, s), amplitude in terms:
            v[2 * a + s] = amplitude
        return v / np.linalg.norm(v)

    return {
        'phi_plus': ket([((0, 0), 1), ((1, 1), 1)]),
        'phi_minus': ket([((0, 0), 1), ((1, 1), -1)]),
        'psi_plus': ket([((0, 1), 1), ((1, 0), 1)]),
        'psi_minus': ket([((0, 1), 1), ((1, 0), -1)]),
    }


def fixed_pairs(ancilla_dim=1):
    """
    Return deterministic pairs with p1 = 1/2.

    Without ancilla these are the eigenstate pairs of sigma_3, sigma_1 and
    sigma_2. With an ancilla the same pairs are tensored with the ancilla
    state |0>, and the pairs of distinct Bell states are added.
    """
    pairs = []
    ancilla0 = np.zeros(ancilla_dim, dtype=complex)
    ancilla0[0] = 1.0
    for label, a, b in _PAULI_PAIRS:
        pairs.append(StatePair(projector(np.kron(ancilla0, a)), projector(np.kron(ancilla0, b)),
                               0.5, ancilla_dim, label))
    if ancilla_dim > 1:
        bell = _bell_kets(ancilla_dim)
        names = sorted(bell)
        for i, first in enumerate(names):
            for second in names[i + 1:]:
                pairs.append(StatePair(projector(bell[first]), projector(bell[second]),
                                       0.5, ancilla_dim, '%s/%s' % (first, second)))
    return pairs


def random_pair(seed, index, ancilla_dim):
    """Return the Haar-random pure pair number ``index``, drawn from its own generator."""
    rng = np.random.default_rng([seed, index])
    kets = random_pure_states(rng, 2, 2 * ancilla_dim)
    return StatePair(projector(kets[0]), projector(kets[1]), 0.5, ancilla_dim, 'random-%d' % index)


@dataclass(frozen=True, eq=False)
class BackflowReport():
    """Largest information flow found over all hunted pairs and grid times."""

    max_sigma: float
    argmax_t: float
    argmax_pair: StatePair
    argmax_id: str
    samples_used: int
    threshold: float
    seed: int
    config: dict
    times: np.ndarray = field(repr=False)
    pair_ids: tuple = field(repr=False)
    norms: np.ndarray = field(repr=False)
    sigmas: np.ndarray = field(repr=False)

    @property
    def detected(self):
        """Return True if some sigma exceeds the threshold."""
        return self.max_sigma > self.threshold

    def rows(self):
        """Yield (t, sigma, pair id) for every evaluated sample; NaN where no flow is reported."""
        for p, pair_id in enumerate(self.pair_ids):
            for k, t in enumerate(self.times):
                yield float(t), float(self.sigmas[p, k]), pair_id

    def curve(self, pair_id):
        """Return (t, N(t), sigma(t)) rows of one hunted pair."""
        p = self.pair_ids.index(pair_id)
        return [(float(t), float(self.norms[p, k]), float(self.sigmas[p, k])) for k, t in enumerate(self.times)]


def _pair_id(pair, biased):
    return '%s-p%.1f' % (pair.label, pair.p1) if biased else pair.label


def hunt_backflow(traj, n_pairs=100, ancilla_dim=1, biased=False, seed=0, workers=1,
                  threshold=BACKFLOW_THRESHOLD, tol_rank=TOL_RANK):
    """
    Search for information backflow with fixed pairs and random pure pairs.

    Every pair is evaluated at p1 in {0.1, ..., 0.9} when ``biased``, at
    p1 = 1/2 otherwise, on every grid time. Random pair i comes from
    ``default_rng([seed, i])`` so the result does not depend on ``workers``.
    """
    if ancilla_dim not in ANCILLA_DIMS:
        raise InvalidStatePair('ancilla dimension must be one of %s, got %r' % (ANCILLA_DIMS, ancilla_dim))
    base = fixed_pairs(ancilla_dim) + [random_pair(seed, i, ancilla_dim) for i in range(n_pairs)]
    weights = BIASED_WEIGHTS if biased else (0.5,)
    pairs = [pair.with_weight(p1) for pair in base for p1 in weights]
    operators = np.array([pair.operator() for pair in pairs])
    times = np.array(traj.times)
    ranks = traj.ranks(tol_rank)

    chunks = [operators[i:i + CHUNK_SIZE] for i in range(0, len(operators), CHUNK_SIZE)]

    def evaluate(chunk):
        return norm_curves(traj, chunk, ancilla_dim)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            parts = list(executor.map(evaluate, chunks))
    else:
        parts = [evaluate(chunk) for chunk in chunks]
    norms = np.concatenate(parts)
    sigmas = sigma_table(times, norms, ranks)

    finite = np.where(np.isnan(sigmas), -math.inf, sigmas)
    p, k = np.unravel_index(int(np.argmax(finite)), finite.shape)
    max_sigma = float(finite[p, k])
    config = {'n_pairs': n_pairs, 'ancilla_dim': ancilla_dim, 'biased': biased, 'seed': seed}
    pair_ids = tuple(_pair_id(pair, biased) for pair in pairs)
    report = BackflowReport(max_sigma, float(times[k]), pairs[p], pair_ids[p], int(norms.size), threshold,
                            seed, config, times, pair_ids, norms, sigmas)
    logger.info('backflow hunt: max sigma %.3e at t=%g (%s), %d samples, ancilla %d, %s',
                max_sigma, report.argmax_t, report.argmax_id, report.samples_used, ancilla_dim,
                'biased' if biased else 'unbiased')
    return report
