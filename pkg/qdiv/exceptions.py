# -*- coding: utf-8 -*-

"""Exceptions raised by the qdiv library."""


class QdivError(Exception):
    """Base class for all qdiv errors."""


class LinearAlgebraError(QdivError):
    """Invalid input to a small-matrix kernel."""


class NonHermitianInput(LinearAlgebraError):
    """Matrix is not Hermitian within tolerance."""


class DimensionOverflow(LinearAlgebraError):
    """Operation would leave the supported dimensions."""


class DimensionMismatch(LinearAlgebraError):
    """Operand dimensions do not fit together."""


class MapError(QdivError):
    """Invalid superoperator."""


class EmptyKrausList(MapError):
    """No Kraus operators were given."""


class InvalidTP(MapError):
    """Map is the zero map, or trace preservation cannot hold."""


class ModelError(QdivError):
    """A model cannot be evaluated at the requested time."""


class UnknownBuiltin(ModelError):
    """Rate or ramp built-in does not exist or got bad arguments."""


class RateBlowUp(ModelError):
    """Generator requested at or after a rate blow-up time."""


class NegativeWeight(ModelError):
    """Pauli weight below zero: the map is not CP at that instant."""


class QuadratureFailure(ModelError):
    """Numerical integral error estimate is above tolerance."""


class DegenerateTime(ModelError):
    """Damping basis requested where Gamma(t) vanishes."""


class GeneratorSingular(ModelError):
    """Composition generator requested at or after t_star."""


class PropagationError(QdivError):
    """Trajectory construction or propagator failure."""


class RateBlowUpInsideStep(PropagationError):
    """A rate blows up strictly inside an integration step."""


class NonTPDrift(PropagationError):
    """Integrated map drifted away from trace preservation."""


class NotDivisible(PropagationError):
    """Kernel of the earlier map is not contained in the later kernel."""

    def __init__(self, message, s=None, t=None):  # noqa: D107
        super().__init__(message)
        self.s = s
        self.t = t


class NotStochasticInput(PropagationError):
    """Classical chain contains a matrix that is not column-stochastic."""


class FlowError(QdivError):
    """Information flow evaluation failure."""


class OffGridTime(FlowError):
    """Time is not a point of the trajectory grid."""


class StepTooSmall(FlowError):
    """Difference step is below the grid resolution."""


class InvalidStatePair(FlowError):
    """State pair violates its invariants."""


class CertificateError(QdivError):
    """Structural certificate cannot be computed for the input."""


class DegenerateSpan(CertificateError):
    """Spanning inputs are nearly linearly dependent."""


class NotThreeDimensional(CertificateError):
    """States do not span a 3-dimensional subspace."""


class NotDensitySpanned(CertificateError):
    """Orthogonal operator has a vanishing eigenvalue."""


class ScenarioIssue():
    """One problem found while parsing a scenario file."""

    def __init__(self, lineno, kind, message):  # noqa: D107
        self.lineno = lineno
        self.kind = kind
        self.message = message

    def __str__(self):  # noqa: D105
        if self.lineno is None:
            return '%s: %s' % (self.kind, self.message)
        return 'line %d: %s: %s' % (self.lineno, self.kind, self.message)

    def __repr__(self):  # noqa: D105
        return 'ScenarioIssue(%r, %r, %r)' % (self.lineno, self.kind, self.message)


class ScenarioError(QdivError):
    """Scenario text is invalid; carries every issue found."""

    def __init__(self, issues):  # noqa: D107
        self.issues = list(issues)
        super().__init__('\n'.join(str(issue) for issue in self.issues))

    def kinds(self):
        """Return the set of issue kinds."""
        return {issue.kind for issue in self.issues}


class AnalysisError(QdivError):
    """Error raised by an analysis, with scenario context attached."""

    def __init__(self, analysis, model, cause):  # noqa: D107
        self.analysis = analysis
        self.model = model
        self.cause = cause
        super().__init__('%s analysis on %s model failed: %s: %s' % (
            analysis, model, type(cause).__name__, cause))
