"""Exception hierarchy shared across the package.

``DomainError`` marks a violated mathematical precondition or invariant and
maps to CLI exit code 1.  ``FileFormatError`` marks unparseable input files
and maps to exit code 2, so bad geometry and bad files stay distinguishable.
"""


class DomainError(Exception):
    """A mathematical precondition or invariant was violated."""


class FileFormatError(Exception):
    """An input file could not be parsed into the expected schema."""


# --- finite metric spaces ---------------------------------------------------

class MetricError(DomainError):
    """The distance table is not a metric."""


class TooFewPoints(MetricError):
    pass


class NonzeroDiagonal(MetricError):
    pass


class AsymmetryError(MetricError):
    pass


class NonpositiveDistance(MetricError):
    pass


class TriangleError(MetricError):
    def __init__(self, i: int, j: int, k: int, lhs: float, rhs: float):
        self.witness = (i, j, k)
        super().__init__(
            f"triangle inequality fails at ({i},{j},{k}): "
            f"d[{i}][{k}]={lhs} > d[{i}][{j}]+d[{j}][{k}]={rhs}"
        )


class BadCount(DomainError):
    pass


class BadExponent(DomainError):
    pass


class UnknownPoint(DomainError):
    pass


# --- fillings ---------------------------------------------------------------

class TauTooSmall(DomainError):
    pass


class HeightBandEmpty(DomainError):
    pass


class DisconnectedGraph(DomainError):
    pass


class UnknownVertex(DomainError):
    pass


class UnknownAnchor(DomainError):
    pass


# --- hyperbolicity scans ----------------------------------------------------

class TooLargeForExhaustive(DomainError):
    pass


# --- hyperbolic cone --------------------------------------------------------

class NonpositiveScale(DomainError):
    pass


# --- quasi-symmetric maps ---------------------------------------------------

class BadArgument(DomainError):
    pass


class NoThetaUnderCap(DomainError):
    pass


# --- extension pipeline and analysis ----------------------------------------

class DegeneratePoint(DomainError):
    pass


class EmptyMap(DomainError):
    pass


class BadParams(DomainError):
    pass


class OmegaDirectionViolated(DomainError):
    pass
