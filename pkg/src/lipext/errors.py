"""Exception taxonomy for the whole package."""

from __future__ import annotations


class LipextError(Exception):
    """Base class for all package errors."""


class FieldMismatch(LipextError):
    """Two objects built over different scalar fields were combined."""


class FieldUnsupported(LipextError):
    """The requested value is not representable in the active field."""


class ParseError(LipextError):
    """A scalar literal or input document could not be parsed."""


# -- metric-space validation ------------------------------------------------

class MetricError(LipextError):
    """A distance matrix violates a metric axiom."""


class NotSymmetric(MetricError):
    def __init__(self, i: int, j: int):
        super().__init__(f"d[{i}][{j}] != d[{j}][{i}]")
        self.indices = (i, j)


class NonzeroDiagonal(MetricError):
    def __init__(self, i: int):
        super().__init__(f"d[{i}][{i}] != 0")
        self.index = i


class NonPositiveDistance(MetricError):
    def __init__(self, i: int, j: int):
        super().__init__(f"d[{i}][{j}] <= 0 for distinct points")
        self.indices = (i, j)


class TriangleViolation(MetricError):
    """d(i, j) > d(i, k) + d(k, j)."""

    def __init__(self, i: int, j: int, k: int):
        super().__init__(f"d[{i}][{j}] > d[{i}][{k}] + d[{k}][{j}]")
        self.indices = (i, j, k)


class SinglePoint(MetricError):
    """Operation requires at least two points."""


class InvalidSize(LipextError):
    """A size parameter is out of range for the construction."""


class DisconnectedTree(LipextError):
    """Edge list does not form a connected acyclic graph."""


class NegativeWeight(LipextError):
    """Tree edge weight must be strictly positive."""


class NotATree(LipextError):
    """Graph handed to a tree operation is not a tree."""


# -- free space / subspaces -------------------------------------------------

class SamePoint(LipextError):
    """Molecule endpoints must be distinct."""


class TooLarge(LipextError):
    """Instance exceeds the configured enumeration cap."""


class OddVertexCount(LipextError):
    """Ball vertex set is not symmetric; signals an enumeration bug."""


class NotASubset(LipextError):
    """X is not an isometric subset of Y."""


class BasepointMismatch(LipextError):
    """Pointed spaces do not share their basepoint."""


# -- polyhedral linear algebra ----------------------------------------------

class DimensionMismatch(LipextError):
    """Matrix or vector dimensions are incompatible."""


class NotSquare(LipextError):
    """Operation requires a square matrix."""


class VerticesUnavailable(LipextError):
    """Operator-ball vertices are required but cannot be enumerated."""


class RankDeficient(LipextError):
    """Supplied basis columns are linearly dependent."""


# -- linear programming ------------------------------------------------------

class LpError(LipextError):
    """Malformed LP or solver failure."""


class NumericFailure(LpError):
    """Float-mode solve lost feasibility beyond tolerance."""


class PricerStall(LpError):
    """Column generation pricer repeated a known column."""


# -- certificates -------------------------------------------------------------

class NotInvariant(LipextError):
    """Certificate matrix does not map the subspace into itself."""


class ZeroNuclearNorm(LipextError):
    """Certificate matrix has zero nuclear norm."""


class InfeasiblePattern(LipextError):
    """No diagonal scaling makes the sign pattern a valid certificate."""


class BadDimensions(LipextError):
    """Constant formula called with dimensions out of range."""


class AssertionFailed(LipextError):
    """A reproduction target did not match its expected value."""
