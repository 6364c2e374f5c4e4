# -*- coding: utf-8 -*-

"""Superoperator calculus on qubit operators.

A superoperator is the 4x4 matrix acting on row-stacked 2x2 operators
(see :func:`qdiv.opcore.vec`). The module offers map application and
composition, the Choi transform, the CP/TP/positivity predicates, the
Hilbert-Schmidt rank profile and the pseudo-inverse, plus the handful of
named maps the divisibility examples are built from.
"""

import logging
from collections import namedtuple
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from qdiv.exceptions import DimensionMismatch, EmptyKrausList, InvalidTP
from qdiv.opcore import (
    PAULI, dagger, eigvalsh, hermitian_eigen, projector, random_pure_states, unvec, vec,
)

logger = logging.getLogger(__name__)

TAU_TP = 1e-9
TAU_CP = 1e-9
TOL_RANK = 1e-8

SAMPLER_GRID = 20
SAMPLER_RANDOM = 600
SAMPLER_SEED = 4711

_TRACE_ROW = vec(np.eye(2, dtype=complex))

CPCheck = namedtuple('CPCheck', ['ok', 'min_eig'])
PositivityCheck = namedtuple('PositivityCheck', ['ok', 'min_eig', 'worst_state'])


@dataclass(frozen=True, eq=False)
class Superoperator():
    """Linear map on 2x2 operators, stored as a 4x4 matrix on vec'd operators."""

    matrix: np.ndarray
    notes: tuple = field(default=())

    def __post_init__(self):  # noqa: D105
        matrix = np.array(self.matrix, dtype=complex)
        if matrix.shape != (4, 4):
            raise DimensionMismatch('superoperator matrix must be 4x4, got %s' % (matrix.shape,))
        matrix.setflags(write=False)
        object.__setattr__(self, 'matrix', matrix)

    def apply(self, m):
        """Apply the map to an operator or a stack of operators."""
        return apply(self, m)

    def __matmul__(self, other):  # noqa: D105
        return compose(self, other)

    def close_to(self, other, atol=1e-12):
        """Return True if both matrices agree entrywise within ``atol``."""
        return bool(np.max(np.abs(self.matrix - _matrix(other))) <= atol)

    @classmethod
    def identity(cls):
        """Return the identity map."""
        return cls(np.eye(4, dtype=complex))

    @classmethod
    def zero(cls):
        """Return the zero map (a generator with all rates zero)."""
        return cls(np.zeros((4, 4), dtype=complex))


def _matrix(s):
    return s.matrix if isinstance(s, Superoperator) else np.asarray(s, dtype=complex)


def apply(s, m):
    """Return unvec(S vec(M)) for one operator or a stack of operators."""
    m = np.asarray(m, dtype=complex)
    if m.shape[-2:] != (2, 2):
        raise DimensionMismatch('superoperators act on 2x2 operators, got %s' % (m.shape,))
    return unvec(vec(m) @ _matrix(s).T)


def compose(a, b):
    """Return the map ``a`` after ``b``."""
    return Superoperator(_matrix(a) @ _matrix(b))


def from_kraus(ops, weights=None):
    """
    Build sum_k w_k K_k . K_k^dagger as a superoperator.

    Weights may be negative, which yields Hermiticity preserving maps that
    are not CP (used for the disk projector).

    :param ops: list of 2x2 Kraus operators
    :param weights: real weights, all 1 when omitted
    """
    ops = [np.asarray(op, dtype=complex) for op in ops]
    if not ops:
        raise EmptyKrausList('from_kraus needs at least one operator')
    if weights is None:
        weights = [1.0] * len(ops)
    if len(weights) != len(ops):
        raise DimensionMismatch('%d weights for %d Kraus operators' % (len(weights), len(ops)))
    matrix = np.zeros((4, 4), dtype=complex)
    for weight, op in zip(weights, ops):
        if op.shape != (2, 2):
            raise DimensionMismatch('Kraus operators must be 2x2, got %s' % (op.shape,))
        matrix += float(weight) * np.kron(op, np.conj(op))
    return Superoperator(matrix)


def choi(s):
    """Return the Choi matrix sum_ij |i><j| (x) S(|i><j|)."""
    blocks = _matrix(s).reshape(2, 2, 2, 2)
    return blocks.transpose(2, 0, 3, 1).reshape(4, 4)


def is_cp(s, tol=TAU_CP):
    """Test complete positivity through the smallest Choi eigenvalue."""
    min_eig = float(eigvalsh(choi(s))[-1])
    return CPCheck(min_eig >= -tol, min_eig)


def tp_defect(s):
    """Return max_alpha |Tr S(sigma_alpha) - Tr sigma_alpha|."""
    return float(np.max(np.abs(_TRACE_ROW @ _matrix(s) - _TRACE_ROW)))


def is_tp(s, tol=TAU_TP):
    """Test trace preservation on the Pauli basis."""
    return tp_defect(s) <= tol


def tp_defect_on(s, basis):
    """Return the largest trace defect of ``s`` over the operators in ``basis``."""
    if not len(basis):
        return 0.0
    basis = np.asarray(basis, dtype=complex)
    out = apply(s, basis)
    return float(np.max(np.abs(np.trace(out, axis1=-2, axis2=-1) - np.trace(basis, axis1=-2, axis2=-1))))


@lru_cache(maxsize=None)
def _sampler_kets(n_random, seed):
    n = SAMPLER_GRID
    theta = np.pi * np.arange(n) / n
    phi = 2 * np.pi * np.arange(n) / n
    th, ph = np.meshgrid(theta, phi, indexing='ij')
    grid = np.stack([np.cos(th / 2).ravel(), (np.exp(1j * ph) * np.sin(th / 2)).ravel()], axis=1)
    rng = np.random.default_rng(seed)
    kets = np.concatenate([grid, random_pure_states(rng, n_random, 2)])
    kets.setflags(write=False)
    return kets


def sampler_states(n_random=SAMPLER_RANDOM, seed=SAMPLER_SEED):
    """
    Return the pure states tested by the positivity sampler.

    A 20x20 Bloch grid (polar angles j pi/20, so the equator is included)
    followed by ``n_random`` seeded Haar-random states.
    """
    return projector(_sampler_kets(n_random, seed))


def is_positive_map(s, tol=TAU_CP, samples=None):
    """
    Test positivity on sampled pure states.

    :param s: superoperator
    :param tol: allowed negativity of output eigenvalues
    :param samples: stack of input states, :func:`sampler_states` by default
    :return: PositivityCheck with the worst input state
    """
    if samples is None:
        samples = sampler_states()
    outputs = apply(s, samples)
    outputs = 0.5 * (outputs + dagger(outputs))
    least = eigvalsh(outputs)[:, -1]
    worst = int(np.argmin(least))
    min_eig = float(least[worst])
    return PositivityCheck(min_eig >= -tol, min_eig, np.array(samples[worst]))


@dataclass(frozen=True, eq=False)
class RankProfile():
    """Hilbert-Schmidt decomposition of a superoperator."""

    rank: int
    image_basis: list
    kernel_basis: list
    singular_values: np.ndarray
    left: np.ndarray
    right: np.ndarray

    def image_projector(self):
        """Return the orthogonal projector onto vec(Im) as a 4x4 matrix."""
        u = self.left[:, :self.rank]
        return u @ dagger(u)

    def kernel_projector(self):
        """Return the orthogonal projector onto vec(Ker) as a 4x4 matrix."""
        v = self.right[:, self.rank:]
        return v @ dagger(v)


def rank_profile(s, tol_rank=TOL_RANK):
    """
    Compute rank, image and kernel of ``s``.

    Singular values come from the Hermitian eigen kernel applied to M^dagger M;
    the rank counts singular values above ``tol_rank`` times the largest.
    """
    m = _matrix(s)
    right = hermitian_eigen(dagger(m) @ m).vectors
    # singular values as ||M v||, accurate down to machine precision
    sv = np.linalg.norm(m @ right, axis=0)
    order = np.argsort(-sv, kind='stable')
    sv, right = sv[order], right[:, order]
    if sv[0] == 0.0:
        raise InvalidTP('zero map has no image')
    rank = int(np.sum(sv > tol_rank * sv[0]))
    left = np.zeros((4, 4), dtype=complex)
    left[:, :rank] = (m @ right[:, :rank]) / sv[:rank]
    if rank < 4:
        # complete the image basis to a unitary with the orthocomplement
        complement = np.eye(4, dtype=complex) - left[:, :rank] @ dagger(left[:, :rank])
        values_c, vectors_c = hermitian_eigen(complement)
        left[:, rank:] = vectors_c[:, :4 - rank]
    image = [unvec(left[:, k]) for k in range(rank)]
    kernel = [unvec(right[:, k]) for k in range(rank, 4)]
    return RankProfile(rank, image, kernel, sv, left, right)


def pseudo_inverse(s, tol_rank=TOL_RANK, profile=None):
    """Moore-Penrose pseudo-inverse built from the rank profile."""
    profile = profile or rank_profile(s, tol_rank)
    r = profile.rank
    v = profile.right[:, :r]
    u = profile.left[:, :r]
    return Superoperator(v @ np.diag(1.0 / profile.singular_values[:r]) @ dagger(u))


def pauli_coordinates(s):
    """Return the real 4x4 matrix T[a, b] = Tr(sigma_a S(sigma_b)) / 2."""
    outputs = apply(s, np.array(PAULI))
    return np.real(np.einsum('aij,bji->ab', np.array(PAULI), outputs)) / 2.0


def from_pauli_coordinates(t):
    """Inverse of :func:`pauli_coordinates`."""
    vs = vec(np.array(PAULI))
    return Superoperator(np.einsum('ab,ai,bj->ij', np.asarray(t, dtype=complex), vs, np.conj(vs)) / 2.0)


def hamiltonian_superop(h):
    """Return the matrix of rho -> -i[H, rho]."""
    h = np.asarray(h, dtype=complex)
    one = np.eye(2, dtype=complex)
    return -1j * (np.kron(h, one) - np.kron(one, h.T))


def dissipator_superop(a):
    """Return the matrix of rho -> A rho A^dagger - {A^dagger A, rho}/2."""
    a = np.asarray(a, dtype=complex)
    one = np.eye(2, dtype=complex)
    ada = dagger(a) @ a
    return np.kron(a, np.conj(a)) - 0.5 * (np.kron(ada, one) + np.kron(one, ada.T))


def pauli_weights_from_eigenvalues(l1, l2, l3):
    """Return (p0, p1, p2, p3) of the Pauli-diagonal map with eigenvalues 1, l1, l2, l3."""
    return (0.25 * (1 + l1 + l2 + l3),
            0.25 * (1 + l1 - l2 - l3),
            0.25 * (1 - l1 + l2 - l3),
            0.25 * (1 - l1 - l2 + l3))


def pauli_diagonal(l1, l2, l3):
    """Return the map sigma_k -> l_k sigma_k, identity fixed."""
    return from_kraus(PAULI, pauli_weights_from_eigenvalues(l1, l2, l3))


def unitary_map(u):
    """Return rho -> U rho U^dagger."""
    return from_kraus([u])


def transpose_map():
    """Return rho -> rho^T, positive but not CP."""
    return Superoperator(np.eye(4, dtype=complex)[[0, 2, 1, 3]])


def dephasing_projector():
    """Return the CPTP projector onto diagonal operators (sigma_1, sigma_2 -> 0)."""
    return pauli_diagonal(0.0, 0.0, 1.0)


def half_depolarizer():
    """Return the CPTP map sigma_1,2 -> sigma_1,2 / 2, sigma_3 -> 0 with 3-dimensional range."""
    return pauli_diagonal(0.5, 0.5, 0.0)


def disk_projector():
    """Return the PTP projector of the Bloch ball onto the equatorial disk (not CP)."""
    return pauli_diagonal(1.0, 1.0, 0.0)
