"""Exception taxonomy shared by every module."""


class AlmostFlatError(Exception):
    """Base class for all library errors."""


class InvalidMatrix(AlmostFlatError):
    """Matrix has non-finite entries or a shape that makes no sense."""


class SingularPolar(AlmostFlatError):
    """Polar decomposition requested for a (near-)singular matrix."""


class NotPositiveDefinite(AlmostFlatError):
    """Hermitian functional calculus requested outside the PD cone."""


class NotSkewHermitian(AlmostFlatError):
    """exp_skew received a matrix that is not skew-Hermitian."""


class LogBranchCut(AlmostFlatError):
    """A unitary has an eigenvalue too close to -1 for the principal log."""


class NotConnected(AlmostFlatError):
    """Complex (or its Y-subcomplex) is not connected."""


class NotFillable(AlmostFlatError):
    """A nerve loop is not null-homotopic in the 2-skeleton."""


class DimMismatch(AlmostFlatError):
    """Fiber dimensions or covers do not match."""


class EpsilonTooLarge(AlmostFlatError):
    """Measured defect violates the smallness precondition of a construction."""


class NotNormalized(AlmostFlatError):
    """Cocycle is not normalized on the spanning tree."""


class NotIntertwiner(AlmostFlatError):
    """A claimed exact intertwiner fails its residual check."""


class NotKillable(AlmostFlatError):
    """Zero-rank quadruple whose morphism is not the identity."""


class ComplexMismatch(AlmostFlatError):
    """Two objects live over different complexes or covers."""


class StabilizedRep(AlmostFlatError):
    """Operation requires an unstabilized (m = 0) relative representation."""


class OracleIncomplete(AlmostFlatError):
    """Word oracle cannot normalize a required product."""


class NotCylinder(AlmostFlatError):
    """Complex does not carry the expected cylinder layer structure."""


class NoBoundary(AlmostFlatError):
    """Double of a pair requires a nonempty proper subcomplex Y."""


class BadCovering(AlmostFlatError):
    """Covering data is not a genuine covering of simplicial complexes."""


class NotSimplicial(AlmostFlatError):
    """Vertex map does not send simplices to simplices."""


class CannotExtend(AlmostFlatError):
    """Subcover extension failed (some added set is not trivializable)."""


class ClassUnresolved(AlmostFlatError):
    """K-class readout residue too large; flatness too coarse for an integer."""


class NotSurface(AlmostFlatError):
    """Pair is not a coherently orientable 2-dimensional relative cycle."""


class UnknownFamily(AlmostFlatError):
    """Instance generator asked for a family that does not exist."""


class SchemaError(AlmostFlatError):
    """Instance document violates its schema."""
