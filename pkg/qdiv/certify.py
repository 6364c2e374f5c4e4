# -*- coding: utf-8 -*-

"""Structural certificates for qubit maps.

* the Alberti-Uhlmann test deciding whether a CPTP map sends one pair of
  qubit states to another;
* the canonical form of a 3-dimensional subspace spanned by density
  matrices and the proof that no CPTP projector onto it exists;
* existence of a positive trace preserving projector (only on operator
  systems, p = 1/2);
* the geometric shape of the pure output of a map.
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import null_space
from scipy.optimize import minimize_scalar

from qdiv.exceptions import CertificateError, DegenerateSpan, NotDensitySpanned, NotThreeDimensional
from qdiv.opcore import (
    PAULI, SIGMA0, bloch_vector, dagger, eigvalsh, hermitian_eigen, is_density, projector,
    random_density_matrix, random_pure_states, trace_norm, vec,
)
from qdiv.superop import (
    Superoperator, apply, choi, is_cp, is_positive_map, is_tp, sampler_states, unitary_map,
)

logger = logging.getLogger(__name__)

AU_TOL = 1e-9
AU_GRID = np.logspace(-4, 4, 200)
GRAM_TOL = 1e-10
EIGEN_ZERO_TOL = 1e-9
P_HALF_TOL = 1e-9
PURITY_TOL = 1e-9
CLUSTER_RADIUS = 1e-6
PLANE_TOL = 1e-6
SCAN_SEED = 271828

AUResult = namedtuple('AUResult', ['feasible', 'worst_delta', 'margin', 'biased_margin'])


@dataclass(frozen=True, eq=False)
class AUInstance():
    """Source pair (sigma1, sigma2) and target pair (sigma1p, sigma2p) of qubit states."""

    sigma1: np.ndarray
    sigma2: np.ndarray
    sigma1p: np.ndarray
    sigma2p: np.ndarray

    def __post_init__(self):  # noqa: D105
        for name in ('sigma1', 'sigma2', 'sigma1p', 'sigma2p'):
            state = np.array(getattr(self, name), dtype=complex)
            if state.shape != (2, 2) or not is_density(state, 1e-8):
                raise CertificateError('%s is not a qubit density matrix' % name)
            object.__setattr__(self, name, state)

    def swapped(self):
        """Return the instance with the roles of the two states exchanged."""
        return AUInstance(self.sigma2, self.sigma1, self.sigma2p, self.sigma1p)


def au_margin(inst, delta):
    """Return ||s1 - d s2||_1 - ||s1' - d s2'||_1 for one delta or an array of deltas."""
    deltas = np.atleast_1d(np.asarray(delta, dtype=float))[:, None, None]
    lhs = trace_norm(inst.sigma1[None] - deltas * inst.sigma2[None])
    rhs = trace_norm(inst.sigma1p[None] - deltas * inst.sigma2p[None])
    margin = lhs - rhs
    return float(margin[0]) if np.ndim(delta) == 0 else margin


def alberti_uhlmann(inst, tol=AU_TOL):
    """
    Decide whether a CPTP map sends sigma_i to sigma_i' (i = 1, 2).

    The margin is minimised over a log grid of 200 deltas in [1e-4, 1e4]
    and refined by bounded golden-section search (Brent) between the grid
    neighbours of the grid minimum.
    """
    margins = au_margin(inst, AU_GRID)
    k = int(np.argmin(margins))
    margin, worst = float(margins[k]), float(AU_GRID[k])
    lower = math.log(AU_GRID[max(k - 1, 0)])
    upper = math.log(AU_GRID[min(k + 1, len(AU_GRID) - 1)])
    refined = minimize_scalar(lambda x: au_margin(inst, math.exp(x)), bounds=(lower, upper),
                              method='bounded', options={'xatol': 1e-10})
    if refined.success and refined.fun < margin:
        margin, worst = float(refined.fun), math.exp(float(refined.x))
    return AUResult(margin >= -tol, worst, margin, margin / (1.0 + worst))


def extendability(inputs, outputs, tol=AU_TOL):
    """
    Return True if the map inputs[i] -> outputs[i] extends to a CPTP map.

    :param inputs: two states spanning the domain
    :param outputs: their images
    """
    a, b = (np.asarray(x, dtype=complex) for x in inputs)
    gram = np.real(np.array([[np.trace(a @ a), np.trace(a @ b)], [np.trace(b @ a), np.trace(b @ b)]]))
    if np.linalg.det(gram) < GRAM_TOL:
        raise DegenerateSpan('inputs are nearly linearly dependent (Gram determinant %g)' % np.linalg.det(gram))
    return alberti_uhlmann(AUInstance(a, b, outputs[0], outputs[1]), tol).feasible


def _pauli_coords(states):
    return np.real(np.einsum('kij,aji->ka', np.asarray(states, dtype=complex), np.array(PAULI)))


@dataclass(frozen=True, eq=False)
class DensitySubspace():
    """Three independent density matrices with their canonical form."""

    spanning_states: tuple
    p: float
    offdiag: tuple
    basis: np.ndarray
    lam: float
    K: np.ndarray

    def canonical_states(self):
        """Return the spanning states written in the K eigenbasis."""
        return tuple(dagger(self.basis) @ rho @ self.basis for rho in self.spanning_states)

    def to_original(self):
        """Return the unitary map taking canonical-basis operators back to the original basis."""
        return unitary_map(self.basis)

    def span_residual(self, operator):
        """Return the distance of ``operator`` from the complex span of the states."""
        span = np.array([vec(s) for s in self.spanning_states]).T
        target = vec(np.asarray(operator, dtype=complex))
        coefficients = np.linalg.lstsq(span, target, rcond=None)[0]
        return float(np.linalg.norm(span @ coefficients - target))


def canonicalize_subspace(states):
    """
    Bring three density matrices to their common-diagonal form.

    K is the Hermitian operator orthogonal to the span. In the eigenbasis of
    K (sign fixed so that lambda_0 >= |lambda_1|) every state has diagonal
    (p, 1 - p) with p = lambda / (lambda - 1), lambda = lambda_1 / lambda_0.
    """
    states = [np.asarray(s, dtype=complex) for s in states]
    if len(states) != 3:
        raise NotThreeDimensional('need exactly three states, got %d' % len(states))
    coords = _pauli_coords(states)
    gram = coords @ coords.T / 2.0
    if np.linalg.det(gram) < GRAM_TOL:
        raise NotThreeDimensional('states are not linearly independent (Gram determinant %g)'
                                  % np.linalg.det(gram))
    kernel = null_space(coords)
    if kernel.shape[1] != 1:
        raise NotThreeDimensional('span has dimension %d' % (4 - kernel.shape[1]))
    k_operator = 0.5 * np.tensordot(kernel[:, 0], np.array(PAULI), axes=1)
    values, vectors = hermitian_eigen(k_operator)
    if values[0] + values[1] < 0:
        k_operator = -k_operator
        values, vectors = -values[::-1], vectors[:, ::-1]
    scale = max(abs(values[0]), abs(values[1]))
    if min(abs(values[0]), abs(values[1])) < EIGEN_ZERO_TOL * scale or values[0] * values[1] > 0:
        raise NotDensitySpanned('orthogonal operator has eigenvalues %s' % (values,))
    lam = float(values[1] / values[0])
    p = lam / (lam - 1.0)
    canonical = [dagger(vectors) @ rho @ vectors for rho in states]
    offdiag = tuple(complex(c[0, 1]) for c in canonical)
    for c in canonical:
        if abs(c[0, 0] - p) > 1e-8:
            raise NotDensitySpanned('state diagonal %s does not match p=%g' % (np.diag(c), p))
    logger.debug('canonical subspace p=%g lambda=%g', p, lam)
    return DensitySubspace(tuple(states), p, offdiag, vectors, lam, k_operator)


def random_density_subspace(rng, max_tries=1000):
    """Draw three random density matrices away from the degenerate edges of the canonical form."""
    for _ in range(max_tries):
        states = [random_density_matrix(rng) for _ in range(3)]
        coords = _pauli_coords(states)
        if np.linalg.det(coords @ coords.T / 2.0) < 1e-6:
            continue
        try:
            sub = canonicalize_subspace(states)
        except NotDensitySpanned:
            continue
        if 0.05 <= sub.p <= 0.95:
            return sub
    raise CertificateError('no valid random subspace in %d tries' % max_tries)


def diagonal_subspace(p, coherence=0.2, u=None):
    """
    Return the subspace spanned by three states with diagonal (p, 1 - p).

    The states carry coherences 0, ``coherence`` and ``1j * coherence``,
    optionally rotated by the unitary ``u``.
    """
    z = np.diag([p, 1.0 - p]).astype(complex)
    states = [z, z + coherence * PAULI[1], z + coherence * PAULI[2]]
    if u is not None:
        states = [u @ s @ dagger(u) for s in states]
    return canonicalize_subspace(states)


def pure_family(sub, thetas):
    """Return the pure states sqrt(p)|0> + sqrt(1-p) e^(i theta)|1> of the canonical basis, in the original basis."""
    thetas = np.asarray(thetas, dtype=float)
    kets = np.stack([np.full(thetas.shape, math.sqrt(sub.p)),
                     math.sqrt(1.0 - sub.p) * np.exp(1j * thetas)], axis=-1)
    return projector(kets @ sub.basis.T)


@dataclass(frozen=True, eq=False)
class PureOutputScan():
    """Pure states reached by a map and the shape they form on the Bloch sphere."""

    pure_count: int
    classification: str
    points: np.ndarray
    plane_residual: float = math.nan
    plane_offset: float = math.nan

    @property
    def great_circle(self):
        """Return True for a circle whose plane passes through the origin."""
        return self.classification == 'circle' and self.plane_offset < PLANE_TOL


def _distinct(points, radius=CLUSTER_RADIUS):
    kept = np.empty((0, 3))
    for point in np.reshape(points, (-1, 3)):
        if not len(kept) or np.min(np.linalg.norm(kept - point, axis=1)) > radius:
            kept = np.vstack([kept, point])
    return kept


def pure_output_scan(s, n_samples=600, extra_inputs=None, seed=SCAN_SEED):
    """
    Collect the pure outputs of ``s`` and classify their shape.

    :param s: trace preserving superoperator
    :param n_samples: seeded Haar-random inputs added to the 20x20 Bloch grid
    :param extra_inputs: optional extra input states (density matrices)
    :param seed: seed of the random inputs
    """
    inputs = [sampler_states(0), projector(random_pure_states(np.random.default_rng(seed), n_samples, 2))]
    if extra_inputs is not None:
        inputs.append(np.asarray(extra_inputs, dtype=complex).reshape(-1, 2, 2))
    inputs = np.concatenate(inputs)
    r = bloch_vector(apply(s, inputs))
    purity = 0.5 * (1.0 + np.sum(r ** 2, axis=1))
    pure = purity > 1.0 - PURITY_TOL
    points = r[pure]
    distinct = _distinct(points)
    if len(distinct) <= 2:
        return PureOutputScan(int(pure.sum()), '≤2 points', points)
    centre = distinct.mean(axis=0)
    normal = np.linalg.svd(distinct - centre)[2][-1]
    residual = float(np.max(np.abs((distinct - centre) @ normal)))
    offset = float(abs(centre @ normal))
    if residual < PLANE_TOL:
        shape = 'circle'
    elif pure.all():
        shape = 'full sphere'
    else:
        shape = 'other'
    return PureOutputScan(int(pure.sum()), shape, points, residual, offset)


@dataclass(frozen=True, eq=False)
class ProjectorReport():
    """Outcome of a projector existence check on a density subspace."""

    cptp_feasible: bool
    ptp_feasible: bool
    witness: dict
    operator_system: bool
    projector: Superoperator = None
    checks: dict = field(default_factory=dict)
    scan: PureOutputScan = None


def _candidate_map(q1, w1, q2, w2):
    """Return the map fixing |0><1|, |1><0| with the given images of |0><0| and |1><1|."""
    images = [
        np.array([[q1, w1], [np.conj(w1), 1 - q1]]),
        np.array([[0, 1], [0, 0]]),
        np.array([[0, 0], [1, 0]]),
        np.array([[1 - q2, w2], [np.conj(w2), q2]]),
    ]
    return Superoperator(np.array([vec(np.asarray(m, dtype=complex)) for m in images]).T)


def is_operator_system(sub, tol=P_HALF_TOL):
    """Return True if the span contains the identity and is closed under conjugate transpose."""
    contains_identity = sub.span_residual(SIGMA0) < tol
    vectors = [vec(s) for s in sub.spanning_states] + [vec(dagger(s)) for s in sub.spanning_states]
    closed = np.linalg.matrix_rank(np.array(vectors), tol=1e-9) == 3
    return bool(contains_identity and closed)


def cptp_projector_feasibility(sub, grid=11):
    """
    Show that no CPTP projector onto the subspace exists.

    In the canonical basis a projector fixes |0><1| and |1><0|, so its Choi
    matrix holds the 2x2 block [[q1, 1], [1, q2]] and positivity needs
    q1 q2 >= 1. A trace preserving projector sends |0><0| and |1><1| to
    unit-trace elements of the subspace, whose diagonal is (p, 1 - p), so
    q1 q2 = p (1 - p) <= 1/4. The witness carries q1 q2 and the block
    determinant read off the candidate projector. The numerical part scans
    (q1, q2, w1, w2) candidates of trace preserving maps fixing the
    coherences and records the largest minimal Choi eigenvalue found away
    from the identity q1 = q2 = 1.
    """
    qs = np.linspace(0.0, 1.0, grid)
    phases = np.exp(2j * np.pi * np.arange(4) / 4)
    chois = []
    for q1 in qs:
        for q2 in qs:
            if q1 == 1.0 and q2 == 1.0:
                continue
            w1s = [0.0] + list(0.5 * math.sqrt(q1 * (1 - q1)) * phases)
            w2s = [0.0] + list(0.5 * math.sqrt(q2 * (1 - q2)) * phases)
            chois.extend(choi(_candidate_map(q1, w1, q2, w2)) for w1 in w1s for w2 in w2s)
    best = float(np.max(eigvalsh(np.array(chois))[:, -1]))
    k_unit = sub.K / np.linalg.norm(sub.K)
    h_operator = sub.K / float(np.real(hermitian_eigen(sub.K).values[0]))
    identity_residual = abs(complex(np.trace(dagger(k_unit) @ h_operator)))
    family = pure_family(sub, np.linspace(0, 2 * math.pi, 16, endpoint=False))
    q1, q2, coherence = _choi_block(sub)
    witness = {
        'q1q2': q1 * q2,
        'choi_block_det': q1 * q2 - abs(coherence) ** 2,
        'max_min_choi_eig': best,
        'identity_residual': identity_residual,
        'pure_family_residual': max(sub.span_residual(psi) for psi in family),
    }
    if best >= -1e-9:
        logger.warning('candidate projector with nonnegative Choi spectrum found: %g', best)
    return ProjectorReport(False, abs(sub.p - 0.5) < P_HALF_TOL, witness, is_operator_system(sub))


def candidate_projector(sub):
    """
    Return the trace preserving projector onto the subspace with s = 0.

    In the canonical basis it maps A to Tr(A) Z + A_01 |0><1| + A_10 |1><0|
    with Z = diag(p, 1 - p).
    """
    z = np.diag([sub.p, 1.0 - sub.p]).astype(complex)
    images = [z, np.array([[0, 1], [0, 0]], dtype=complex), np.array([[0, 0], [1, 0]], dtype=complex), z]
    canonical = Superoperator(np.array([vec(m) for m in images]).T)
    return sub.to_original() @ canonical @ unitary_map(dagger(sub.basis))


def _canonical_images(sub):
    """Return the candidate projector's images of |0><0|, |1><1| and |0><1|, in the canonical basis."""
    pi = unitary_map(dagger(sub.basis)) @ candidate_projector(sub) @ sub.to_original()
    units = (np.diag([1.0, 0.0]), np.diag([0.0, 1.0]), np.array([[0.0, 1.0], [0.0, 0.0]]))
    return [pi.apply(np.asarray(u, dtype=complex)) for u in units]


def _choi_block(sub):
    """Return (q1, q2, c) of the Choi block [[q1, c], [c*, q2]] on |00>, |11>."""
    img0, img1, img01 = _canonical_images(sub)
    return float(np.real(img0[0, 0])), float(np.real(img1[1, 1])), complex(img01[0, 1])


def ptp_projector_existence(sub):
    """
    Decide whether a positive trace preserving projector onto the subspace exists.

    Positivity on |+> and |-> in the canonical basis needs |r + s|^2 and
    |r - s|^2 <= p(1 - p) with |r| = 1/2, so s = 0 and p = 1/2. The witness
    carries the s offset of the candidate and the positivity gap
    p(1 - p) - max(|r + s|, |r - s|)^2. When it exists the projector is the
    disk projector of the canonical basis.
    """
    plus = np.array([[0.5, 0.5], [0.5, 0.5]], dtype=complex)
    img0, img1, img01 = _canonical_images(sub)
    mixed = 0.5 * (img0 + img1)
    r, s = 0.5 * img01[0, 1], mixed[0, 1]
    z_plus = mixed + np.array([[0, r], [np.conj(r), 0]])
    witness = {
        's_offset': float(abs(s)),
        'positivity_gap': float(np.real(mixed[0, 0] * mixed[1, 1])) - max(abs(r + s), abs(r - s)) ** 2,
        'p_deviation': abs(sub.p - 0.5),
        'candidate_min_eig': float(eigvalsh(z_plus)[-1]),
    }
    feasible = witness['p_deviation'] < P_HALF_TOL
    operator_system = is_operator_system(sub)
    if not feasible:
        return ProjectorReport(False, False, witness, operator_system)
    pi = candidate_projector(sub)
    rotated_plus = sub.basis @ plus @ dagger(sub.basis)
    equator = sub.basis @ np.stack([np.full(64, 1 / math.sqrt(2)),
                                    np.exp(2j * np.pi * np.arange(64) / 64) / math.sqrt(2)])
    checks = {
        'positive': is_positive_map(pi).ok,
        'tp': is_tp(pi),
        'cp': is_cp(pi).ok,
        'idempotent': float(np.max(np.abs(pi.matrix @ pi.matrix - pi.matrix))) <= 1e-10,
        'plus_output_min_eig': float(eigvalsh(pi.apply(rotated_plus))[-1]),
    }
    scan = pure_output_scan(pi, extra_inputs=projector(equator.T))
    return ProjectorReport(False, True, witness, operator_system, pi, checks, scan)
