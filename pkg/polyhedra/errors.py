"""
Exception hierarchy for the polyhedra package.
"""


class PolyhedraError(Exception):
    """Base class of every error raised by the package."""


class InvalidParameters(PolyhedraError):
    pass


class ConfigurationError(PolyhedraError):
    pass


# geometry core
class NonManifoldEdge(PolyhedraError):
    pass


class OrientationMismatch(PolyhedraError):
    pass


class DegenerateFace(PolyhedraError):
    pass


class DegenerateTriangle(PolyhedraError):
    pass


# constructors
class UnreachableConfiguration(PolyhedraError):
    pass


class InvalidTangentConfig(PolyhedraError):
    pass


# flex engine
class CombinatoricsMismatch(PolyhedraError):
    pass


class NoConvergence(PolyhedraError):
    pass


class SingularJacobian(PolyhedraError):
    pass


class KernelDimensionUnexpected(PolyhedraError):
    pass


class WrongBranch(PolyhedraError):
    pass


# invariants
class DegenerateEdge(PolyhedraError):
    pass


class BranchAmbiguity(PolyhedraError):
    pass


class RadiusTooLarge(PolyhedraError):
    pass


class FunctionalUndefined(PolyhedraError):
    pass


# relations
class PrecisionExhausted(PolyhedraError):
    pass


class PoleArgument(PolyhedraError):
    pass


class InconsistentAssignment(PolyhedraError):
    pass


# steffen
class IncongruentFaces(PolyhedraError):
    pass


class OrientationConflict(PolyhedraError):
    pass


class FacesDoNotCoincide(PolyhedraError):
    pass


class NonManifoldResult(PolyhedraError):
    pass


class PointNotInterior(PolyhedraError):
    pass


class CouplingUnsolvable(PolyhedraError):
    pass
