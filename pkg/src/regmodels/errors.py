"""Exception hierarchy.

Every error raised on purpose by the package derives from RegModelsError,
and each class carries the CLI exit code it maps to.
"""


class RegModelsError(Exception):
    exit_code = 4


class InvalidInput(RegModelsError):
    exit_code = 2


class ParseError(InvalidInput):
    pass


class ReducibleInput(InvalidInput):
    """A factor turned out to be reducible over the p-adic completion."""


class RequiresResidueExtension(RegModelsError):
    """The computation needs residue field F_{p^m} with m > 1."""

    exit_code = 3


class NotKeyPolynomial(InvalidInput):
    pass


class InvalidAugmentation(InvalidInput):
    pass


class DegenerateLattice(InvalidInput):
    pass


class StructureViolation(RegModelsError):
    """An internal invariant failed; this points at a bug, not bad input."""


class BranchMeetsCrossing(StructureViolation):
    pass


class NonTermination(StructureViolation):
    pass


class NotPartitioned(StructureViolation):
    pass
