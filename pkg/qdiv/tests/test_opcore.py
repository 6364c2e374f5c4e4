# -*- coding: utf-8 -*-
"""Tests for the operator kernel."""

import numpy as np
import pytest

from qdiv.exceptions import DimensionMismatch, DimensionOverflow, NonHermitianInput
from qdiv.opcore import (
    KET0, KET1, PAULI, SIGMA0, bloch_vector, dagger, eigvalsh, from_bloch, hermitian_eigen, is_density,
    kron, partial_trace, projector, random_density_matrix, random_pure_states, random_unitary, trace_norm, unvec,
    vec,
)


def _random_hermitian(rng, count, dim):
    g = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
    return g + dagger(g)


@pytest.mark.parametrize('sigma', PAULI[1:])
def test_pauli_spectrum(sigma):
    """Pauli matrices have eigenvalues 1 and -1."""
    assert np.allclose(eigvalsh(sigma), [1.0, -1.0], atol=1e-13)


@pytest.mark.parametrize('dim', [2, 4, 6, 8])
def test_eigen_matches_numpy(dim):
    """The Jacobi kernel agrees with LAPACK and reconstructs the matrix."""
    stack = _random_hermitian(np.random.default_rng(dim), 5, dim)
    values, vectors = hermitian_eigen(stack)
    expected = np.linalg.eigvalsh(stack)[:, ::-1]
    assert np.allclose(values, expected, atol=1e-10)
    rebuilt = vectors @ (values[..., None] * dagger(vectors))
    assert np.allclose(rebuilt, stack, atol=1e-10)
    identity = dagger(vectors) @ vectors
    assert np.allclose(identity, np.eye(dim), atol=1e-10)


def test_non_hermitian_rejected():
    """Non-Hermitian input raises."""
    with pytest.raises(NonHermitianInput):
        eigvalsh(np.array([[0, 1], [0, 0]], dtype=complex))


@pytest.mark.parametrize('shape', [(3, 3), (16, 16)])
def test_unsupported_dimension(shape):
    """Only dimensions 2, 4, 6 and 8 are supported."""
    with pytest.raises(DimensionOverflow):
        eigvalsh(np.eye(shape[0]))


def test_kron_overflow():
    """Products beyond dimension 8 are refused."""
    assert (4, 4) == kron(SIGMA0, PAULI[1]).shape
    with pytest.raises(DimensionOverflow):
        kron(np.eye(4), np.eye(4))


def test_trace_norm():
    """Orthogonal pure states are at trace distance one."""
    plus = projector(np.array([1, 1]) / np.sqrt(2))
    minus = projector(np.array([1, -1]) / np.sqrt(2))
    assert trace_norm(plus - minus) == pytest.approx(2.0, abs=1e-12)
    stack = trace_norm(np.array([plus - minus, 0.5 * (plus - minus), plus - plus]))
    assert np.allclose(stack, [2.0, 1.0, 0.0], atol=1e-12)


@pytest.mark.parametrize('dim', [2, 4])
def test_trace_norm_is_a_unitarily_invariant_norm(dim):
    """Subadditivity and invariance under U . U^dagger on random Hermitian pairs."""
    rng = np.random.default_rng(100 + dim)
    a = _random_hermitian(rng, 200, dim)
    b = _random_hermitian(rng, 200, dim)
    assert np.all(trace_norm(a + b) <= trace_norm(a) + trace_norm(b) + 1e-10)
    u = np.array([random_unitary(rng, dim) for _ in range(200)])
    assert np.allclose(trace_norm(u @ a @ dagger(u)), trace_norm(a), atol=1e-10)


def test_partial_trace_of_bell_state():
    """Tracing out half of a Bell state leaves the maximally mixed state."""
    bell = projector(np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert np.allclose(partial_trace(bell, 0, (2, 2)), SIGMA0 / 2)
    assert np.allclose(partial_trace(bell, 1, (2, 2)), SIGMA0 / 2)


def test_partial_trace_of_product():
    """Tr_A (a (x) b) = Tr(a) b."""
    a = np.diag([0.25, 0.75]).astype(complex)
    b = projector(KET1)
    product = kron(a, b)
    assert np.allclose(partial_trace(product, 0, (2, 2)), b)
    assert np.allclose(partial_trace(product, 1, (2, 2)), a)
    with pytest.raises(DimensionMismatch):
        partial_trace(product, 1, (2, 3))


def test_vec_is_row_major():
    """vec(|0><1|) is the second basis vector."""
    ket_bra = np.outer(KET0, KET1)
    assert np.array_equal(vec(ket_bra), [0, 1, 0, 0])
    assert np.array_equal(unvec(vec(ket_bra)), ket_bra)


def test_random_states():
    """Sampled states are valid density matrices."""
    rng = np.random.default_rng(0)
    for _ in range(10):
        assert is_density(random_density_matrix(rng))
    kets = random_pure_states(rng, 10, 4)
    assert np.allclose(np.linalg.norm(kets, axis=1), 1.0)
    assert not is_density(np.diag([1.5, -0.5]))


def test_bloch_vector():
    """Bloch vectors and states convert into each other."""
    r = np.array([0.3, -0.2, 0.5])
    rho = from_bloch(r)
    assert is_density(rho)
    assert np.allclose(bloch_vector(rho), r)
    assert np.allclose(bloch_vector(projector(KET0)), [0, 0, 1])
