# -*- coding: utf-8 -*-

"""Built-in qubit dynamical map families and their closed-form solutions.

Three families are provided:

* Pauli (random unitary) dynamics with rates gamma_1..3 on the channels
  L_k(rho) = (sigma_k rho sigma_k - rho) / 2;
* the non-commutative amplitude/phase damping family whose evolution is
  the 4x4 matrix N_t on (rho_00, rho_01, rho_10, rho_11), with its damping
  basis;
* the rotating composition U_t o Psi_t with Psi_t = (1 - p) id + p Phi and
  Phi the dephasing projector.

Every family exposes ``map_at(t)``, ``generator_at(t)`` and
``singular_times()`` so that :mod:`qdiv.propagation` can treat them alike.
"""

import cmath
import logging
import math
from collections import namedtuple
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from qdiv.exceptions import (
    DegenerateTime, GeneratorSingular, NegativeWeight, QuadratureFailure, RateBlowUp,
)
from qdiv.opcore import PAULI, SIGMA0, SIGMA2, SIGMA3, dagger
from qdiv.rates import Blowup, Zero, central_difference
from qdiv.superop import (
    Superoperator, dephasing_projector, dissipator_superop, from_kraus, hamiltonian_superop,
    pauli_weights_from_eigenvalues, unitary_map,
)

logger = logging.getLogger(__name__)

NEGATIVE_WEIGHT_TOL = 1e-12
QUAD_EPSABS = 1e-10
QUAD_MAX_ERROR = 1e-9
DEGENERATE_GAMMA = 1e-12

HILBERT_SCHMIDT = 'hilbert-schmidt'
BILINEAR = 'bilinear'

SIGMA_PLUS = np.array([[0, 1], [0, 0]], dtype=complex)
SIGMA_MINUS = np.array([[0, 0], [1, 0]], dtype=complex)

RateConditions = namedtuple('RateConditions', ['cp', 'p'])
ManiscalcoIntegrals = namedtuple('ManiscalcoIntegrals', ['Gamma', 'G', 'Gamma3', 'Omega'])


def _check_blowups(rates, t):
    for rate in rates:
        if rate.blowup_time is not None and t >= rate.blowup_time:
            raise RateBlowUp('rate %s is singular at t=%g (blow-up at %g)' % (
                rate.spec(), t, rate.blowup_time))


def _singular_times(rates):
    return sorted({rate.blowup_time for rate in rates if rate.blowup_time is not None})


def _exp_neg(x):
    """Return exp(-x) with exp(-inf) = 0 exactly."""
    return 0.0 if math.isinf(x) and x > 0 else math.exp(-x)


# Pauli channels


@dataclass(frozen=True)
class PauliRates():
    """Rates of the three Pauli dephasing channels."""

    gamma1: object
    gamma2: object
    gamma3: object

    def rates(self):
        """Return (gamma1, gamma2, gamma3)."""
        return (self.gamma1, self.gamma2, self.gamma3)

    def integrals(self, t):
        """Return (Gamma1, Gamma2, Gamma3) at t, +inf after a blow-up."""
        return tuple(rate.integral(t) for rate in self.rates())

    def singular_times(self):
        """Return the sorted blow-up times of all channels."""
        return _singular_times(self.rates())

    def map_at(self, t):
        """Return Lambda_t."""
        return pauli_map(self, t)

    def generator_at(self, t):
        """Return L_t."""
        return pauli_generator(self, t)


def pauli_generator(r, t):
    """Return sum_k gamma_k(t) L_k as a superoperator."""
    _check_blowups(r.rates(), t)
    matrix = np.zeros((4, 4), dtype=complex)
    for rate, sigma in zip(r.rates(), PAULI[1:]):
        matrix += rate(t) * 0.5 * dissipator_superop(sigma)
    return Superoperator(matrix)


def pauli_eigenvalues(r, t):
    """Return (lambda1, lambda2, lambda3) with lambda_i = exp(-Gamma_j - Gamma_k)."""
    g1, g2, g3 = r.integrals(t)
    return (_exp_neg(g2 + g3), _exp_neg(g1 + g3), _exp_neg(g1 + g2))


def pauli_weights(r, t):
    """Return the Kraus weights (p0, p1, p2, p3) of Lambda_t."""
    return pauli_weights_from_eigenvalues(*pauli_eigenvalues(r, t))


def pauli_map(r, t, strict=False):
    """
    Return the Pauli dynamical map at time t.

    A negative Kraus weight means the map is not CP at t. The map is still
    returned, carrying the note ``NegativeWeight``, unless ``strict`` is set.
    """
    weights = pauli_weights(r, t)
    notes = ()
    if min(weights) < -NEGATIVE_WEIGHT_TOL:
        if strict:
            raise NegativeWeight('Pauli weights %s at t=%g' % (weights, t))
        logger.warning('Pauli map is not CP at t=%g, weights %s', t, weights)
        notes = ('NegativeWeight',)
    return Superoperator(from_kraus(PAULI, weights).matrix, notes)


def pauli_rate_conditions(r, t):
    """Return the rate criteria: CP-divisible needs gamma_k >= 0, P-divisible gamma_j + gamma_k >= 0."""
    g = [rate(t) for rate in r.rates()]
    return RateConditions(all(x >= 0 for x in g),
                          g[0] + g[1] >= 0 and g[0] + g[2] >= 0 and g[1] + g[2] >= 0)


# amplitude/phase damping family


@dataclass(frozen=True)
class ManiscalcoParams():
    """Frequency and rates of the non-commutative damping family."""

    omega: object
    gamma_plus: object
    gamma_minus: object
    gamma3: object

    def rates(self):
        """Return (omega, gamma_plus, gamma_minus, gamma3)."""
        return (self.omega, self.gamma_plus, self.gamma_minus, self.gamma3)

    def singular_times(self):
        """Return the sorted blow-up times of all rates."""
        return _singular_times(self.rates())

    def map_at(self, t):
        """Return Lambda_t."""
        return maniscalco_map(self, t)

    def generator_at(self, t):
        """Return L_t."""
        return maniscalco_generator(self, t)


def rank_one_collapse_params(t2, t1=None):
    """
    Rates for which Gamma(t2) is infinite while G(t2) stays finite.

    gamma_plus = 2 / (t2 - t) and gamma_minus = 0 give Gamma(t) =
    -ln(1 - t / t2) and G = 0, so from t2 on every state is sent to
    |0><0|. With ``t1`` set, gamma3 blows up at t1 first and the image
    drops to dimension 2 before it drops to 1.
    """
    gamma3 = Blowup(t1) if t1 is not None else Zero()
    return ManiscalcoParams(Zero(), Blowup(t2, 2.0), Zero(), gamma3)


def _quad(fn, upper):
    if upper <= 0:
        return 0.0
    value, error = quad(fn, 0.0, upper, epsabs=QUAD_EPSABS, limit=200)
    if error > QUAD_MAX_ERROR or not math.isfinite(value):
        raise QuadratureFailure('integral up to %g has error estimate %g' % (upper, error))
    return value


def _is_zero_rate(rate):
    return rate.is_constant() and getattr(rate, 'value', None) == 0.0


def maniscalco_integrals(m, t):
    """
    Return Gamma, G, Gamma3 and Omega at time t.

    Gamma, Gamma3 and Omega use the closed-form integrals of the rate
    built-ins. G = int_0^t exp(Gamma) gamma_minus / 2 has a closed form for
    constant rates and is integrated numerically otherwise.
    """
    gamma_p, gamma_m = m.gamma_plus, m.gamma_minus
    big_gamma = 0.5 * (gamma_p.integral(t) + gamma_m.integral(t))
    gamma3 = m.gamma3.integral(t)
    omega = 2.0 * m.omega.integral(t)
    if _is_zero_rate(gamma_m):
        g = 0.0
    elif gamma_p.is_constant() and gamma_m.is_constant():
        c = 0.5 * (gamma_p.value + gamma_m.value)
        g = 0.5 * gamma_m.value * (math.expm1(c * t) / c if c != 0 else t)
    else:
        upper = t
        singular = _singular_times([gamma_p, gamma_m])
        if singular and singular[0] <= t:
            upper = singular[0]

        def integrand(tau):
            return math.exp(0.5 * (gamma_p.integral(tau) + gamma_m.integral(tau))) * gamma_m(tau)

        g = 0.5 * _quad(integrand, upper)
    return ManiscalcoIntegrals(big_gamma, g, gamma3, omega)


def _coherence_factor(integrals):
    exponent = 0.5 * integrals.Gamma + integrals.Gamma3
    if math.isinf(exponent) and exponent > 0:
        return 0j
    return cmath.exp(complex(-exponent, integrals.Omega))


def maniscalco_map(m, t):
    """Return the 4x4 evolution matrix N_t of the damping family."""
    integrals = maniscalco_integrals(m, t)
    decay = _exp_neg(integrals.Gamma)
    pumped = decay * integrals.G if decay else 0.0
    coherence = _coherence_factor(integrals)
    matrix = np.array([
        [1.0 - pumped, 0, 0, 1.0 - decay - pumped],
        [0, coherence, 0, 0],
        [0, 0, np.conj(coherence), 0],
        [pumped, 0, 0, decay + pumped],
    ], dtype=complex)
    return Superoperator(matrix)


def maniscalco_eigenvalues(m, t):
    """Return (1, lambda1, lambda2, lambda3) of N_t."""
    integrals = maniscalco_integrals(m, t)
    coherence = _coherence_factor(integrals)
    return (1.0 + 0j, coherence, np.conj(coherence), complex(_exp_neg(integrals.Gamma)))


def maniscalco_generator(m, t):
    """
    Return the time-local generator of the damping family.

    L_t = omega i[sigma_3, .] + gamma_+ D[sigma_+]/2 + gamma_- D[sigma_-]/2
    + gamma_3 (sigma_3 . sigma_3 - id)/2.
    """
    _check_blowups(m.rates(), t)
    matrix = hamiltonian_superop(-m.omega(t) * SIGMA3)
    matrix = matrix + 0.5 * m.gamma_plus(t) * dissipator_superop(SIGMA_PLUS)
    matrix = matrix + 0.5 * m.gamma_minus(t) * dissipator_superop(SIGMA_MINUS)
    matrix = matrix + 0.5 * m.gamma3(t) * dissipator_superop(SIGMA3)
    return Superoperator(matrix)


@dataclass(frozen=True, eq=False)
class DampingBasis():
    """Right eigen-operators X, dual operators Y and eigenvalues of a map."""

    X: tuple
    Y: tuple
    eigenvalues: tuple
    kind: str = HILBERT_SCHMIDT

    def pairing(self):
        """Return the matrix of Tr(X_a Y_b^dagger), or Tr(X_a Y_b) for the bilinear kind."""
        conj = dagger if self.kind == HILBERT_SCHMIDT else (lambda y: y)
        return np.array([[np.trace(x @ conj(y)) for y in self.Y] for x in self.X])


def maniscalco_damping_basis(m, t, pairing=HILBERT_SCHMIDT):
    """
    Return the damping basis of N_t.

    X_0(t) is the fixed point, X_1 = |0><1|, X_2 = |1><0|, X_3 = sigma_3.
    The duals Y_beta satisfy Tr(X_alpha Y_beta^dagger) = delta: Y_0 is the
    identity, Y_1 = X_1, Y_2 = X_2 and Y_3(t) is diagonal.

    :param pairing: 'hilbert-schmidt' or 'bilinear'. The bilinear basis
        pairs through Tr(X Y) with a trace-2 X_0, Y_0 = 1/2 and Y_1, Y_2 swapped.
    """
    if pairing not in (HILBERT_SCHMIDT, BILINEAR):
        raise ValueError('unknown pairing %r' % pairing)
    integrals = maniscalco_integrals(m, t)
    if integrals.Gamma < DEGENERATE_GAMMA:
        raise DegenerateTime('Gamma(%g) = %g, damping basis undefined' % (t, integrals.Gamma))
    decay = _exp_neg(integrals.Gamma)
    pumped = decay * integrals.G if decay else 0.0
    norm = 1.0 - decay
    x0 = np.diag([1.0 - decay - pumped, pumped]).astype(complex) / norm
    x1 = np.array([[0, 1], [0, 0]], dtype=complex)
    x2 = np.array([[0, 0], [1, 0]], dtype=complex)
    y3 = np.diag([pumped, decay + pumped - 1.0]).astype(complex) / norm
    eigenvalues = maniscalco_eigenvalues(m, t)
    if pairing == BILINEAR:
        return DampingBasis((2.0 * x0, x1, x2, SIGMA3.copy()),
                            (SIGMA0 / 2.0, x2.copy(), x1.copy(), y3), eigenvalues, BILINEAR)
    return DampingBasis((x0, x1, x2, SIGMA3.copy()),
                        (SIGMA0.copy(), x1.copy(), x2.copy(), y3), eigenvalues)


def commutator_defect(m, s, t):
    """Return max |Lambda_t Lambda_s - Lambda_s Lambda_t| over the matrix entries."""
    a = maniscalco_map(m, t).matrix
    b = maniscalco_map(m, s).matrix
    return float(np.max(np.abs(a @ b - b @ a)))


# rotating composition


@dataclass(frozen=True)
class CompositionParams():
    """Mixing ramp p(t) of the rotating composition."""

    p: object

    @property
    def t_star(self):
        """Return the time from which p = 1, or None."""
        return self.p.t_star

    def singular_times(self):
        """Return [t_star] when the ramp saturates."""
        return [self.t_star] if self.t_star is not None else []

    def map_at(self, t):
        """Return Lambda_t."""
        return composition_map(self, t)

    def generator_at(self, t):
        """Return L_t."""
        return composition_generator(self, t)


def rotation(t):
    """Return U_t = exp(-i sigma_2 t)."""
    return math.cos(t) * SIGMA0 - 1j * math.sin(t) * SIGMA2


def rotation_map(t):
    """Return rho -> U_t rho U_t^dagger."""
    return unitary_map(rotation(t))


def rotating_operator(t):
    """Return X(t) = U_t sigma_3 U_t^dagger."""
    c, s = math.cos(2 * t), math.sin(2 * t)
    return np.array([[c, s], [s, -c]], dtype=complex)


def mixing_map(c, t):
    """Return Psi_t = (1 - p(t)) id + p(t) Phi."""
    p = c.p(t)
    return Superoperator((1.0 - p) * np.eye(4) + p * dephasing_projector().matrix)


def composition_map(c, t):
    """Return Lambda_t = U_t o Psi_t."""
    return rotation_map(t) @ mixing_map(c, t)


def generator_prefactor(c, t, numeric=False):
    """Return dp/dt / (1 - p); ``numeric`` uses the central difference with step h_rate."""
    p = c.p(t)
    if p >= 1.0 or (c.t_star is not None and t >= c.t_star):
        raise GeneratorSingular('p(%g) = %g, generator undefined from t_star on' % (t, p))
    pdot = central_difference(c.p, t) if numeric else c.p.derivative(t)
    return pdot / (1.0 - p)


def composition_generator(c, t, numeric=False):
    """Return L_t = -i[sigma_2, .] + p'/(1 - p) (U_t Phi U_t^-1 - id)."""
    prefactor = generator_prefactor(c, t, numeric)
    rotated = rotation_map(t) @ dephasing_projector() @ rotation_map(-t)
    return Superoperator(hamiltonian_superop(SIGMA2) + prefactor * (rotated.matrix - np.eye(4)))


def composition_propagator(c, t, s):
    """
    Return the closed-form propagator V_{t,s} = U_t W_{t,s} U_s^-1.

    W_{t,s} = Psi_t Psi_s^-1 while s < t_star and Phi afterwards.
    """
    if s > t:
        raise ValueError('propagator needs s <= t, got s=%g t=%g' % (s, t))
    phi = dephasing_projector()
    if c.t_star is None or s < c.t_star:
        p = c.p(s)
        inverse = Superoperator((np.eye(4) - p * phi.matrix) / (1.0 - p))
        inner = mixing_map(c, t) @ inverse
    else:
        inner = phi
    return rotation_map(t) @ inner @ rotation_map(-s)
