# -*- coding: utf-8 -*-

"""Complex linear algebra for the small fixed dimensions of qubit maps.

Everything here works on dense numpy arrays of dimension 2, 4, 6 or 8. The
Hermitian eigen kernel is a cyclic Jacobi sweep that is applied to a whole
stack of matrices at once, so the trace norms of thousands of sampled
operators cost a handful of vectorised rotations.
"""

import logging
import math
from collections import namedtuple

import numpy as np

from qdiv.exceptions import DimensionMismatch, DimensionOverflow, NonHermitianInput

logger = logging.getLogger(__name__)

TAU_HERM = 1e-10
TAU_EIG = 1e-9
JACOBI_OFF_TOL = 1e-14
JACOBI_MAX_SWEEPS = 50
SUPPORTED_DIMS = (2, 4, 6, 8)

SIGMA0 = np.eye(2, dtype=complex)
SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)
PAULI = (SIGMA0, SIGMA1, SIGMA2, SIGMA3)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)

EigenDecomposition = namedtuple('EigenDecomposition', ['values', 'vectors'])


def _check_square(m):
    if m.ndim < 2 or m.shape[-1] != m.shape[-2]:
        raise DimensionMismatch('expected square matrices, got shape %s' % (m.shape,))
    if m.shape[-1] not in SUPPORTED_DIMS:
        raise DimensionOverflow('dimension %d not in %s' % (m.shape[-1], SUPPORTED_DIMS))


def dagger(m):
    """Return the conjugate transpose of a matrix or a stack of matrices."""
    return np.conj(np.swapaxes(m, -1, -2))


def is_hermitian(m, tol=TAU_HERM):
    """
    Check that every matrix in ``m`` equals its conjugate transpose.

    The tolerance is absolute, scaled by the largest entry magnitude.

    :param m: matrix or stack of matrices
    :param tol: relative tolerance
    """
    m = np.asarray(m)
    scale = np.max(np.abs(m)) if m.size else 0.0
    return bool(np.max(np.abs(m - dagger(m)), initial=0.0) <= tol * scale)


def _off_diagonal_mass(a):
    n = a.shape[-1]
    mask = ~np.eye(n, dtype=bool)
    return np.sqrt(np.sum(np.abs(a[:, mask]) ** 2, axis=1))


def _rotate(a, v, p, q):
    """Apply one complex Jacobi rotation in the (p, q) plane to every matrix of the stack."""
    app = a[:, p, p].real
    aqq = a[:, q, q].real
    apq = a[:, p, q]
    phase = np.exp(1j * np.angle(apq))
    theta = 0.5 * np.arctan2(2.0 * np.abs(apq), app - aqq)
    # keep the rotation angle small; tan(2 theta) is pi/2 periodic
    theta = np.where(theta > math.pi / 4, theta - math.pi / 2, theta)
    theta = np.where(theta < -math.pi / 4, theta + math.pi / 2, theta)
    c = np.cos(theta)[:, None]
    s = np.sin(theta)[:, None]
    phase = phase[:, None]
    upp, uqp, upq, uqq = phase * c, s, -phase * s, c

    col_p = a[:, :, p] * upp + a[:, :, q] * uqp
    col_q = a[:, :, p] * upq + a[:, :, q] * uqq
    a[:, :, p] = col_p
    a[:, :, q] = col_q
    row_p = np.conj(upp) * a[:, p, :] + np.conj(uqp) * a[:, q, :]
    row_q = np.conj(upq) * a[:, p, :] + np.conj(uqq) * a[:, q, :]
    a[:, p, :] = row_p
    a[:, q, :] = row_q
    a[:, p, q] = 0.0
    a[:, q, p] = 0.0

    vcol_p = v[:, :, p] * upp + v[:, :, q] * uqp
    vcol_q = v[:, :, p] * upq + v[:, :, q] * uqq
    v[:, :, p] = vcol_p
    v[:, :, q] = vcol_q


def _jacobi(stack):
    """Diagonalise a stack of Hermitian matrices with cyclic Jacobi sweeps."""
    stack = np.asarray(stack, dtype=complex)
    batch_shape = stack.shape[:-2]
    n = stack.shape[-1]
    a = stack.reshape(-1, n, n)
    a = 0.5 * (a + dagger(a))
    v = np.array(np.broadcast_to(np.eye(n, dtype=complex), a.shape))
    scale = np.linalg.norm(a.reshape(a.shape[0], -1), axis=1)
    pairs = [(p, q) for p in range(n - 1) for q in range(p + 1, n)]
    for sweep in range(JACOBI_MAX_SWEEPS):
        if np.all(_off_diagonal_mass(a) <= JACOBI_OFF_TOL * scale):
            break
        for p, q in pairs:
            _rotate(a, v, p, q)
    else:
        logger.debug('Jacobi stopped after %d sweeps, off-diagonal mass %g',
                     JACOBI_MAX_SWEEPS, float(np.max(_off_diagonal_mass(a))))
    values = np.real(np.diagonal(a, axis1=1, axis2=2))
    order = np.argsort(-values, axis=1, kind='stable')
    values = np.take_along_axis(values, order, axis=1)
    v = np.take_along_axis(v, order[:, None, :], axis=2)
    return values.reshape(batch_shape + (n,)), v.reshape(batch_shape + (n, n))


def hermitian_eigen(m, tol=TAU_HERM):
    """
    Return the eigendecomposition of a Hermitian matrix (or stack).

    Values are real and sorted descending, vectors are the orthonormal
    columns of ``vectors``.

    :param m: Hermitian matrix or stack of Hermitian matrices
    :param tol: Hermiticity tolerance
    """
    m = np.asarray(m, dtype=complex)
    _check_square(m)
    if not is_hermitian(m, tol):
        raise NonHermitianInput('matrix is not Hermitian within %g' % tol)
    values, vectors = _jacobi(m)
    return EigenDecomposition(values, vectors)


def eigvalsh(m, tol=TAU_HERM):
    """Return descending eigenvalues of a Hermitian matrix (or stack)."""
    return hermitian_eigen(m, tol).values


def trace_norm(m, tol=TAU_HERM):
    """
    Return the trace norm, the sum of absolute eigenvalues.

    A stack of matrices yields an array of norms.
    """
    norms = np.sum(np.abs(eigvalsh(m, tol)), axis=-1)
    if np.ndim(norms) == 0:
        return float(norms)
    return norms


def kron(a, b):
    """Kronecker product restricted to results of dimension 4, 6 or 8."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.ndim != 2 or b.ndim != 2:
        raise DimensionMismatch('kron expects two matrices')
    dim = a.shape[0] * b.shape[0]
    if dim not in SUPPORTED_DIMS[1:]:
        raise DimensionOverflow('kron result of dimension %d is not supported' % dim)
    return np.kron(a, b)


def vec(m):
    """Stack the rows of ``m`` into a vector, vec(|i><j|) = |i>|j>."""
    m = np.asarray(m)
    return m.reshape(m.shape[:-2] + (-1,))


def unvec(v):
    """Inverse of :func:`vec`."""
    v = np.asarray(v)
    n = math.isqrt(v.shape[-1])
    if n * n != v.shape[-1]:
        raise DimensionMismatch('vector length %d is not a square' % v.shape[-1])
    return v.reshape(v.shape[:-1] + (n, n))


def partial_trace(m, subsystem, dims):
    """
    Trace out one factor of a bipartite operator.

    :param m: operator on C^dims[0] (x) C^dims[1]
    :param subsystem: 0 to trace out the first factor, 1 for the second
    :param dims: pair of factor dimensions
    """
    m = np.asarray(m, dtype=complex)
    dim_a, dim_b = dims
    if m.shape != (dim_a * dim_b, dim_a * dim_b):
        raise DimensionMismatch('shape %s does not match dims %s' % (m.shape, dims))
    blocks = m.reshape(dim_a, dim_b, dim_a, dim_b)
    if subsystem == 0:
        return np.einsum('ijik->jk', blocks)
    if subsystem == 1:
        return np.einsum('ijkj->ik', blocks)
    raise DimensionMismatch('subsystem must be 0 or 1, got %r' % (subsystem,))


def projector(ket):
    """Return |ket><ket| for a vector or a stack of vectors."""
    ket = np.asarray(ket, dtype=complex)
    return ket[..., :, None] * np.conj(ket[..., None, :])


def random_pure_states(rng, count, dim):
    """Draw ``count`` Haar-random unit vectors from normalised complex Gaussians."""
    z = rng.standard_normal((count, dim)) + 1j * rng.standard_normal((count, dim))
    return z / np.linalg.norm(z, axis=1, keepdims=True)


def random_density_matrix(rng, dim=2):
    """Draw a full-rank density matrix from the Hilbert-Schmidt ensemble."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_unitary(rng, dim=2):
    """Draw a Haar-random unitary via QR of a Ginibre matrix."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    d = np.diagonal(r)
    return q * (d / np.abs(d))


def bloch_vector(rho):
    """Return the Bloch vectors (Tr rho sigma_k)_k of one state or a stack."""
    rho = np.asarray(rho, dtype=complex)
    return np.stack([np.real(np.einsum('...ij,ji->...', rho, s)) for s in PAULI[1:]], axis=-1)


def from_bloch(r):
    """Return the qubit operator (1 + r.sigma)/2."""
    r = np.asarray(r, dtype=float)
    return 0.5 * (SIGMA0 + np.tensordot(r, np.array(PAULI[1:]), axes=([-1], [0])))


def is_density(rho, tol=TAU_HERM):
    """Check that ``rho`` is a Hermitian, unit-trace, positive semidefinite matrix."""
    rho = np.asarray(rho, dtype=complex)
    if not is_hermitian(rho, tol) or abs(np.trace(rho) - 1.0) > tol:
        return False
    return bool(eigvalsh(rho, tol)[-1] >= -tol)
