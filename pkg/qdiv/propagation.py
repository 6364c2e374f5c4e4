# -*- coding: utf-8 -*-

"""Trajectories of dynamical maps, their propagators and divisibility verdicts."""

import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import expm, null_space
from scipy.optimize import linprog

from qdiv.certify import AUInstance, alberti_uhlmann
from qdiv.exceptions import (
    InvalidTP, NonTPDrift, NotDivisible, NotStochasticInput, RateBlowUp, RateBlowUpInsideStep,
)
from qdiv.opcore import KET0, KET1, bloch_vector, projector, vec
from qdiv.superop import (
    TAU_CP, TAU_TP, TOL_RANK, Superoperator, apply, is_cp, is_positive_map, is_tp, rank_profile,
    pseudo_inverse, sampler_states, tp_defect, tp_defect_on,
)

logger = logging.getLogger(__name__)

NON_TP_DRIFT = 1e-7
DOMAIN_TP = 1e-8
IMAGE_TOL = 1e-6
SPANNING_PAIR_TOL = 1e-6
STOCHASTIC_TOL = 1e-10

# commutator-free fourth order scheme: Gauss nodes and exponent weights
_C1 = 0.5 - math.sqrt(3) / 6
_C2 = 0.5 + math.sqrt(3) / 6
_B1 = 0.25 + math.sqrt(3) / 6
_B2 = 0.25 - math.sqrt(3) / 6

VERDICTS = ('CP-divisible', 'P-divisible-only', 'divisible-not-P', 'not-divisible')


@dataclass(frozen=True)
class Tolerances():
    """Tolerance set used by classification and backflow detection."""

    rank: float = TOL_RANK
    cp: float = TAU_CP
    tp: float = TAU_TP
    threshold: float = 1e-7
    domain_tp: float = DOMAIN_TP


@dataclass(frozen=True, eq=False)
class TimeGrid():
    """Monotone list of times starting at 0."""

    points: np.ndarray

    def __post_init__(self):  # noqa: D105
        points = np.array(self.points, dtype=float)
        if points.ndim != 1 or len(points) < 2:
            raise ValueError('a time grid needs at least two points')
        if points[0] != 0.0:
            raise ValueError('a time grid starts at 0, got %g' % points[0])
        if np.any(np.diff(points) <= 0):
            raise ValueError('grid points must be strictly increasing')
        points.setflags(write=False)
        object.__setattr__(self, 'points', points)

    @classmethod
    def uniform(cls, t_end, steps):
        """Return ``steps`` equal intervals on [0, t_end]."""
        if t_end <= 0 or steps < 1:
            raise ValueError('need t_end > 0 and steps >= 1')
        return cls(np.linspace(0.0, t_end, steps + 1))

    def including(self, times):
        """Return a grid that also contains ``times`` (blow-up instants) inside the range."""
        extra = [t for t in times if 0 < t < self.t_end and self.index_of(t) is None]
        if not extra:
            return self
        return TimeGrid(np.sort(np.concatenate([self.points, extra])))

    @property
    def t_end(self):
        """Return the last time."""
        return float(self.points[-1])

    @property
    def steps(self):
        """Return the number of intervals."""
        return len(self.points) - 1

    @property
    def step(self):
        """Return the smallest interval length (the grid resolution)."""
        return float(np.min(np.diff(self.points)))

    def is_uniform(self):
        """Return True if all intervals have the same length."""
        diffs = np.diff(self.points)
        return bool(np.allclose(diffs, diffs[0], rtol=1e-9, atol=0))

    def index_of(self, t, rtol=1e-9):
        """Return the index of grid point ``t`` or None."""
        k = int(np.searchsorted(self.points, t))
        for j in (k - 1, k):
            if 0 <= j < len(self.points) and abs(self.points[j] - t) <= rtol * max(1.0, abs(t)):
                return j
        return None

    def __len__(self):  # noqa: D105
        return len(self.points)


@dataclass(frozen=True, eq=False)
class MapTrajectory():
    """Dynamical map Lambda_t sampled on a time grid."""

    grid: TimeGrid
    maps: np.ndarray
    source: str = 'analytic'
    tp_tol: float = TAU_TP
    _profiles: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):  # noqa: D105
        maps = np.array(self.maps, dtype=complex)
        if maps.shape != (len(self.grid), 4, 4):
            raise ValueError('expected %d maps of shape 4x4, got %s' % (len(self.grid), maps.shape))
        if np.max(np.abs(maps[0] - np.eye(4))) > 1e-12:
            raise InvalidTP('a dynamical map starts at the identity')
        for k, matrix in enumerate(maps):
            if tp_defect(matrix) > self.tp_tol:
                raise InvalidTP('map at t=%g is not trace preserving' % self.grid.points[k])
        maps.setflags(write=False)
        object.__setattr__(self, 'maps', maps)

    @property
    def times(self):
        """Return the grid points."""
        return self.grid.points

    def __len__(self):  # noqa: D105
        return len(self.grid)

    def map(self, k):
        """Return Lambda at grid index k."""
        return Superoperator(self.maps[k])

    def rank_profiles(self, tol_rank=TOL_RANK):
        """Return the rank profile of every map, computed once per tolerance."""
        if tol_rank not in self._profiles:
            self._profiles[tol_rank] = [rank_profile(m, tol_rank) for m in self.maps]
        return self._profiles[tol_rank]

    def ranks(self, tol_rank=TOL_RANK):
        """Return the rank of every map."""
        return [p.rank for p in self.rank_profiles(tol_rank)]


def cf4_step(generator, t, h):
    """Return the commutator-free fourth order step map from t to t + h."""
    a1 = generator(t + _C1 * h).matrix
    a2 = generator(t + _C2 * h).matrix
    return expm(h * (_B2 * a1 + _B1 * a2)) @ expm(h * (_B1 * a1 + _B2 * a2))


def integrate(generator, grid, drift_tol=NON_TP_DRIFT):
    """
    Integrate a time-local generator into a trajectory.

    :param generator: callable t -> Superoperator
    :param grid: TimeGrid; blow-up instants must not lie inside an interval
    :param drift_tol: allowed trace-preservation defect before NonTPDrift
    """
    current = np.eye(4, dtype=complex)
    maps = [current]
    points = grid.points
    for k in range(grid.steps):
        t, h = points[k], points[k + 1] - points[k]
        try:
            step = cf4_step(generator, t, h)
        except RateBlowUp as err:
            raise RateBlowUpInsideStep('generator singular inside [%g, %g]: %s' % (t, t + h, err)) from err
        current = step @ current
        drift = tp_defect(current)
        if drift > drift_tol:
            raise NonTPDrift('trace defect %g at t=%g, reduce the step' % (drift, t + h))
        maps.append(current)
    logger.debug('integrated %d steps up to t=%g', grid.steps, grid.t_end)
    return MapTrajectory(grid, np.array(maps), 'generator-integrated', drift_tol)


def analytic_trajectory(map_at, grid):
    """Evaluate a closed-form map on every grid point."""
    return MapTrajectory(grid, np.array([map_at(t).matrix for t in grid.points]), 'analytic')


@dataclass(frozen=True, eq=False)
class Propagator():
    """Intermediate map V_{t,s} with the rank profile of Lambda_s as its domain."""

    V: Superoperator
    domain: object
    kernel_ok: bool
    s: float
    t: float


def kernel_contained(profile_s, later, tol_rank=TOL_RANK):
    """Return True if Ker(Lambda_s) is annihilated by ``later`` within ``tol_rank``."""
    matrix = later.matrix if isinstance(later, Superoperator) else np.asarray(later)
    scale = max(np.linalg.norm(matrix, 2), 1.0)
    return all(np.linalg.norm(matrix @ vec(k)) <= tol_rank * scale for k in profile_s.kernel_basis)


def propagator(traj, s_index, t_index, tol_rank=TOL_RANK):
    """
    Return V_{t,s} with Lambda_t = V_{t,s} Lambda_s.

    For invertible Lambda_s this is Lambda_t Lambda_s^-1. Otherwise the
    kernel of Lambda_s has to stay in the kernel of Lambda_t, and V is the
    canonical extension Lambda_t pinv(Lambda_s): the true propagator on
    Im(Lambda_s), zero on its orthocomplement.
    """
    if s_index > t_index:
        raise ValueError('propagator needs s <= t, got indices %d > %d' % (s_index, t_index))
    s, t = float(traj.times[s_index]), float(traj.times[t_index])
    lam_s, lam_t = traj.maps[s_index], traj.maps[t_index]
    profile = traj.rank_profiles(tol_rank)[s_index]
    if profile.rank == 4:
        v = np.linalg.solve(lam_s.T, lam_t.T).T
        return Propagator(Superoperator(v), profile, True, s, t)
    if not kernel_contained(profile, lam_t, tol_rank):
        raise NotDivisible('Ker(Lambda_%g) is not contained in Ker(Lambda_%g)' % (s, t), s, t)
    v = lam_t @ pseudo_inverse(lam_s, tol_rank, profile).matrix
    return Propagator(Superoperator(v), profile, True, s, t)


@dataclass(frozen=True, eq=False)
class IntervalRecord():
    """Classification of one grid interval [s, t]."""

    s: float
    t: float
    kernel_ok: bool
    cp: bool
    p_div: bool
    min_choi_eig: float
    domain_rank: int
    witness: str = None
    witness_state: np.ndarray = None


@dataclass(frozen=True, eq=False)
class DivisibilityReport():
    """Per-interval records and the overall verdict."""

    intervals: tuple
    verdict: str

    def cp_violations(self):
        """Return the intervals whose propagator is not CP."""
        return [r for r in self.intervals if not r.cp]

    def min_choi_eig(self):
        """Return the smallest Choi eigenvalue over all intervals with a propagator."""
        values = [r.min_choi_eig for r in self.intervals if not math.isnan(r.min_choi_eig)]
        return min(values) if values else math.nan


def overall_verdict(records):
    """Aggregate interval flags; the worst interval decides."""
    if not all(r.kernel_ok for r in records):
        return 'not-divisible'
    if all(r.cp for r in records):
        return 'CP-divisible'
    if all(r.p_div for r in records):
        return 'P-divisible-only'
    return 'divisible-not-P'


def spanning_image_pair(lam_s, tol=SPANNING_PAIR_TOL):
    """
    Return two input states whose images under ``lam_s`` span its image.

    The images of |0> and |1> are used unless they nearly coincide; then the
    two sampler states whose images lie farthest apart (the endpoints of
    the image segment in the Bloch ball) are used.
    """
    inputs = projector(np.array([KET0, KET1]))
    images = apply(lam_s, inputs)
    bloch = bloch_vector(images)
    if 0.5 * np.linalg.norm(bloch[0] - bloch[1]) >= tol:
        return inputs[0], inputs[1]
    samples = sampler_states()
    bloch = bloch_vector(apply(lam_s, samples))
    first = int(np.argmax(np.linalg.norm(bloch - bloch[0], axis=1)))
    second = int(np.argmax(np.linalg.norm(bloch - bloch[first], axis=1)))
    return samples[first], samples[second]


def _classify_interval(traj, k, tol):
    s, t = float(traj.times[k]), float(traj.times[k + 1])
    try:
        prop = propagator(traj, k, k + 1, tol.rank)
    except NotDivisible:
        rank = traj.rank_profiles(tol.rank)[k].rank
        return IntervalRecord(s, t, False, False, False, math.nan, rank, 'kernel of Lambda_s not contained')
    v, domain = prop.V, prop.domain
    tp_ok = tp_defect_on(v, domain.image_basis) <= tol.domain_tp
    choi_check = is_cp(v, tol.cp)
    if domain.rank == 4:
        positivity = is_positive_map(v, tol.cp)
        tp_ok = tp_ok and is_tp(v, tol.tp)
        cp = choi_check.ok and tp_ok
        p_div = positivity.ok and tp_ok
        witness, state = None, None
        if not p_div:
            witness, state = 'negative output %.3e' % positivity.min_eig, positivity.worst_state
        elif not cp:
            witness = 'negative Choi eigenvalue %.3e' % choi_check.min_eig
        return IntervalRecord(s, t, True, cp, p_div, choi_check.min_eig, 4, witness, state)
    if domain.rank == 1:
        return IntervalRecord(s, t, True, tp_ok, tp_ok, choi_check.min_eig, 1)
    if domain.rank == 2:
        rho_a, rho_b = spanning_image_pair(traj.maps[k])
        instance = AUInstance(apply(traj.maps[k], rho_a), apply(traj.maps[k], rho_b),
                              apply(traj.maps[k + 1], rho_a), apply(traj.maps[k + 1], rho_b))
        result = alberti_uhlmann(instance)
        # two-state PTP extensions obey the same trace norm inequality
        cp = result.feasible and tp_ok
        witness = None if cp else 'AU margin %.3e at delta %.3e' % (result.margin, result.worst_delta)
        return IntervalRecord(s, t, True, cp, cp, choi_check.min_eig, 2, witness)
    positivity = is_positive_map(v, tol.cp)
    return IntervalRecord(s, t, True, choi_check.ok and tp_ok, positivity.ok and tp_ok,
                          choi_check.min_eig, domain.rank, 'rank-3 domain, canonical extension tested')


def classify(traj, tolerances=None, workers=1):
    """
    Classify every consecutive grid interval of a trajectory.

    :param traj: MapTrajectory
    :param tolerances: Tolerances, defaults when omitted
    :param workers: number of threads classifying intervals
    """
    tol = tolerances or Tolerances()
    traj.rank_profiles(tol.rank)
    indices = range(len(traj) - 1)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as executor:
            records = list(executor.map(lambda k: _classify_interval(traj, k, tol), indices))
    else:
        records = [_classify_interval(traj, k, tol) for k in indices]
    verdict = overall_verdict(records)
    logger.info('divisibility verdict: %s (%d intervals, %d not CP)',
                verdict, len(records), sum(1 for r in records if not r.cp))
    return DivisibilityReport(tuple(records), verdict)


@dataclass(frozen=True, eq=False)
class ImageProfile():
    """Image dimension at every grid point and the subspace chain check."""

    times: tuple
    dims: tuple
    non_increasing: bool
    first_violation: float = None

    def dims_allowed(self):
        """Return True if every dimension is 1, 2 or 4."""
        return set(self.dims) <= {1, 2, 4}


def image_profile(traj, tol_rank=TOL_RANK):
    """Return image dimensions and whether Im(Lambda_t) stays inside Im(Lambda_s) for s < t."""
    profiles = traj.rank_profiles(tol_rank)
    first_violation = None
    for k in range(1, len(profiles)):
        earlier = profiles[k - 1].image_projector()
        for basis in profiles[k].image_basis:
            b = vec(basis)
            if np.linalg.norm(b - earlier @ b) > IMAGE_TOL:
                first_violation = float(traj.times[k])
                break
        if first_violation is not None:
            break
    return ImageProfile(tuple(float(t) for t in traj.times), tuple(p.rank for p in profiles),
                        first_violation is None, first_violation)


def first_singular_time(traj, tol_rank=TOL_RANK):
    """Return (t_prev, t1) bracketing the first grid point where Lambda is not invertible, or None."""
    for k, rank in enumerate(traj.ranks(tol_rank)):
        if rank < 4:
            return (float(traj.times[k - 1]) if k else 0.0, float(traj.times[k]))
    return None


@dataclass(frozen=True, eq=False)
class LimitProjector():
    """Extrapolated lim_{eps -> 0} V_{t1, t1 - eps}."""

    projector: Superoperator
    residual: float
    image: object


def limit_projector(map_at, t1, factors=(1e-2, 1e-3, 1e-4), tol_rank=TOL_RANK):
    """
    Extrapolate the propagator across the first singular instant ``t1``.

    V_{t1, t1 - eps} is evaluated at eps = f t1 for the three ``factors``
    (ratio 10 between consecutive ones) and combined with two levels of
    Richardson extrapolation. The residual is the change made by the last level.
    """
    ratios = [factors[k] / factors[k + 1] for k in range(len(factors) - 1)]
    if len(factors) != 3 or not np.allclose(ratios, 10.0):
        raise ValueError('limit projector expects three factors with ratio 10')
    lam1 = map_at(t1).matrix
    v1, v2, v3 = (lam1 @ np.linalg.inv(map_at(t1 - f * t1).matrix) for f in factors)
    r1 = (10.0 * v2 - v1) / 9.0
    r2 = (10.0 * v3 - v2) / 9.0
    limit = (100.0 * r2 - r1) / 99.0
    residual = float(np.max(np.abs(limit - r2)))
    logger.debug('limit projector at t1=%g, residual %g', t1, residual)
    return LimitProjector(Superoperator(limit), residual, rank_profile(lam1, tol_rank))


# classical stochastic chains


@dataclass(frozen=True, eq=False)
class ClassicalVerdict():
    """Divisibility of a chain of column-stochastic matrices."""

    p_div: bool
    contraction_ok: bool
    intermediates: tuple
    worst_growth: float

    def consistent(self):
        """Return True if both verdicts agree, as they must for d <= 3."""
        return self.p_div == self.contraction_ok


def is_column_stochastic(matrix, tol=STOCHASTIC_TOL):
    """Return True for nonnegative square matrices whose columns sum to one."""
    matrix = np.asarray(matrix, dtype=float)
    return (matrix.ndim == 2 and matrix.shape[0] == matrix.shape[1]
            and bool(np.all(matrix >= -tol)) and bool(np.allclose(matrix.sum(axis=0), 1.0, atol=tol, rtol=0)))


def _significant_svd(a, tol_rank=TOL_RANK):
    """Split ``a`` into its image basis, singular values, row basis and kernel basis."""
    u, values, vh = np.linalg.svd(a)
    r = int(np.sum(values > tol_rank * values[0]))
    return u[:, :r], values[:r], vh[:r].T, vh[r:].T


def _pair_tolerance(values):
    # entry accuracy of a solve against a matrix with these singular values
    return max(STOCHASTIC_TOL, 100 * np.finfo(float).eps * values[0] / values[-1])


def _kernel_leak(b, kernel):
    if not kernel.size:
        return 0.0
    return float(np.max(np.linalg.norm(b @ kernel, axis=0)))


def _stochastic_extension(basis, targets):
    """Return a column-stochastic S with S basis = targets, or None."""
    d, r = basis.shape
    # unknown S is flattened row-major: S[i, j] -> x[i * d + j]
    eq_rows, eq_rhs = [], []
    for i in range(d):
        for j in range(r):
            row = np.zeros(d * d)
            row[i * d:(i + 1) * d] = basis[:, j]
            eq_rows.append(row)
            eq_rhs.append(targets[i, j])
    for j in range(d):
        row = np.zeros(d * d)
        row[j::d] = 1.0
        eq_rows.append(row)
        eq_rhs.append(1.0)
    result = linprog(np.zeros(d * d), A_eq=np.array(eq_rows), b_eq=np.array(eq_rhs),
                     bounds=[(0, None)] * (d * d), method='highs')
    if result.status != 0:
        return None
    return result.x.reshape(d, d)


def _intermediate(a, b, tol_rank=TOL_RANK):
    """Return (found, S) for a column-stochastic S with S a = b on the numerical image of a."""
    d = a.shape[0]
    basis, values, right, kernel = _significant_svd(a, tol_rank)
    if _kernel_leak(b, kernel) > d * tol_rank * values[0]:
        return False, None
    if len(values) == d:
        s = np.linalg.solve(a.T, b.T).T
        tol = _pair_tolerance(values)
        ok = bool(np.all(s >= -tol)) and bool(np.allclose(s.sum(axis=0), 1.0, atol=tol, rtol=0))
        return ok, s
    s = _stochastic_extension(basis, (b @ right) / values)
    return s is not None, s


def _l1_ball_points(basis):
    """
    Return points of {u in span(basis): ||u||_1 = 1} containing every vertex of that section.

    A vertex of the section lies on a face of the cross-polytope of
    dimension at most d - r, so it is a convex combination of at most
    d - r + 1 signed unit vectors with distinct indices.
    """
    d, r = basis.shape
    normal = null_space(basis.T) if r < d else np.zeros((d, 0))
    points = []
    for size in range(1, d - r + 2):
        for support in itertools.combinations(range(d), size):
            for signs in itertools.product((1.0, -1.0), repeat=size):
                corners = np.zeros((d, size))
                corners[list(support), list(range(size))] = signs
                lhs = np.vstack([normal.T @ corners, np.ones((1, size))])
                rhs = np.zeros(len(lhs))
                rhs[-1] = 1.0
                weights = np.linalg.lstsq(lhs, rhs, rcond=None)[0]
                if np.all(weights >= -1e-12) and np.allclose(lhs @ weights, rhs, atol=1e-10):
                    points.append(corners @ weights)
    return np.array(points)


def _l1_growth(a, b, tol_rank=TOL_RANK):
    """
    Return (contracts, growth): the largest ||b x||_1 - ||a x||_1 over ||a x||_1 = 1.

    The maximum of the convex function x -> ||b x||_1 over the preimage of
    the L1 ball is reached at a vertex of the ball's section with Im(a).
    A kernel vector of ``a`` that ``b`` does not annihilate makes the
    growth unbounded; its image norm is reported instead.
    """
    d = a.shape[0]
    basis, values, right, kernel = _significant_svd(a, tol_rank)
    leak = _kernel_leak(b, kernel)
    if leak > d * tol_rank * values[0]:
        return False, leak
    points = _l1_ball_points(basis)
    preimages = right @ ((basis.T @ points.T) / values[:, None])
    growth = float(np.max(np.sum(np.abs(b @ preimages), axis=0) - np.sum(np.abs(a @ preimages), axis=0)))
    return growth <= 2 * _pair_tolerance(values), growth


def classical_pdiv(chain, tol_rank=TOL_RANK):
    """
    Decide P-divisibility of a classical chain two ways.

    ``p_div`` asks for a stochastic intermediate matrix between every pair
    of consecutive chain elements; ``contraction_ok`` asks that the L1 norm
    of T_k x never grows from one chain element to the next, for every
    real vector x. Every x is a positive multiple of some x p1 - (1 - x) p2,
    so for d <= 3 both verdicts agree.
    """
    chain = [np.asarray(m, dtype=float) for m in chain]
    if not chain:
        raise NotStochasticInput('empty chain')
    d = chain[0].shape[0] if chain[0].ndim == 2 else 0
    for k, matrix in enumerate(chain):
        if not is_column_stochastic(matrix) or matrix.shape != (d, d) or d > 3:
            raise NotStochasticInput('chain element %d is not a column-stochastic matrix of size <= 3' % k)
    p_div = contraction_ok = True
    intermediates = []
    worst = -math.inf
    for a, b in zip(chain, chain[1:]):
        ok, s = _intermediate(a, b, tol_rank)
        p_div = p_div and ok
        intermediates.append(s)
        contracts, growth = _l1_growth(a, b, tol_rank)
        contraction_ok = contraction_ok and contracts
        worst = max(worst, growth)
    if p_div != contraction_ok:
        logger.warning('classical verdicts disagree: stochastic intermediates %s, L1 contraction %s',
                       p_div, contraction_ok)
    return ClassicalVerdict(p_div, contraction_ok, tuple(intermediates), worst)


def power_chain(matrix, steps):
    """Return [M^0, M^1, ..., M^steps]."""
    matrix = np.asarray(matrix, dtype=float)
    chain = [np.eye(matrix.shape[0])]
    for _ in range(steps):
        chain.append(matrix @ chain[-1])
    return chain
