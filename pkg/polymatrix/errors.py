"""Exception hierarchy for the polymatrix analysis toolkit."""

from typing import Any, Optional


class PolymatrixError(Exception):
    """Base class for every domain error raised by the package."""


class GameSpecError(PolymatrixError):
    """Malformed game description: bad groups, bad matrix shape or a non-rational entry."""


class FaceError(PolymatrixError):
    """A face selection that misses a group entirely."""


class DegenerateCornerError(PolymatrixError):
    """A branch corner whose pivot character vanishes."""


class StructuralSetError(PolymatrixError):
    """An edge set that does not meet every heteroclinic cycle."""


class ItineraryError(PolymatrixError):
    """Edges that do not chain into a heteroclinic path, or branches that do not compose."""


class DomainError(PolymatrixError):
    """A point outside the domain an operation is defined on."""


class LevelSetDimensionError(PolymatrixError):
    """A level section whose dimension is not two."""

    def __init__(self, dimension: int, message: Optional[str] = None):
        self.dimension = dimension
        super().__init__(message or f"level section has dimension {dimension}, expected 2")


class ConstraintError(PolymatrixError):
    """A Dirac constraint that is not second class."""


class AdjacencyError(PolymatrixError):
    """Two vertices that are not joined by an edge."""


class HamiltonianDomainError(DomainError):
    """A Hamiltonian evaluated on the boundary of the polytope."""


class SaturationError(DomainError):
    """A rescaling chart evaluated where the logarithm saturates."""


class TubeOverlapError(PolymatrixError):
    """Vertex tubes that intersect for the requested delta."""


class IntegrationError(PolymatrixError):
    """Numerical integration failure: step underflow or loss of the simplex envelope."""


class VerificationError(PolymatrixError):
    """A certificate check that failed; the witness pinpoints the failure."""

    def __init__(self, message: str, witness: Any = None):
        self.witness = witness
        super().__init__(message)
