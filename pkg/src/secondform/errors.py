"""Exception hierarchy for the geometry engine.

Every failure mode raised by the numerical pipelines derives from
:class:`GeometryError`, so callers (and the scenario runner) can distinguish
"the input is outside the class this operation handles" from genuine bugs.
"""


class GeometryError(Exception):
    """Base class for all geometric/numerical failures."""


class DegenerateMetric(GeometryError):
    """Ambient metric determinant below the nondegeneracy floor."""


class OutOfDomain(GeometryError):
    """Requested point lies outside the chart's domain box."""


class InsufficientSmoothness(GeometryError):
    """A Taylor order was requested that the input cannot supply."""


class UnsupportedSignature(GeometryError):
    """Metric signature outside the supported index set."""


class LeftDomain(GeometryError):
    """An integrated path exited the chart domain."""


class StepFailure(GeometryError):
    """Step-size control of an integrator or limit probe failed."""


class DegenerateImmersion(GeometryError):
    """Immersion Jacobian lost rank at a sampled parameter point."""


class NullNormal(GeometryError):
    """Normal direction is null with respect to the ambient metric."""


class DegenerateInducedMetric(GeometryError):
    """Induced first fundamental form is degenerate."""


class BadParameters(GeometryError):
    """Parameters of a standard immersion outside their validity range."""


class SingularShapeOperator(GeometryError):
    """Shape operator not invertible (some principal curvature ~ 0)."""


class DegenerateII(GeometryError):
    """Second fundamental form fails to be a semi-Riemannian metric."""


class NonDiagonalizableA(GeometryError):
    """Shape operator has no real eigenbasis at the requested tolerance."""


class ConjugatePoint(GeometryError):
    """Exponential map is not a diffeomorphism at the requested radius."""


class BadDirection(GeometryError):
    """Direction vector is not a unit vector for the metric at hand."""


class JetTooShallow(GeometryError):
    """Curvature jet lacks the derivative order a series needs."""


class DimensionTooSmall(GeometryError):
    """Operation undefined below a minimal dimension."""


class LeftEpsilonClass(GeometryError):
    """A deformation left the class of nondegenerate-II hypersurfaces."""


class NotFrenet(GeometryError):
    """Curve acceleration is null or zero, so no Frenet frame exists."""


class NotUnitSpeed(GeometryError):
    """Curve is not parametrized by arclength."""


class BlowUp(GeometryError):
    """ODE solution left the admissible range."""


class ScenarioError(GeometryError):
    """Scenario file is malformed or references unknown checks."""
