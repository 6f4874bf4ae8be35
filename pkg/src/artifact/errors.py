"""Exception hierarchy shared by every module.

Errors that mean "retry with more digits" derive from ``PrecisionError`` so
drivers can catch them in one place; everything else describes bad input or a
violated mathematical invariant.
"""


class ArtifactError(Exception):
    """Base class for all library errors."""


class PrecisionError(ArtifactError):
    """Base for failures that more p-adic precision may cure."""


class PrecisionExhausted(PrecisionError):
    pass


class NotInvertibleToPrecision(PrecisionError):
    pass


class BudgetExceeded(ArtifactError):
    def __init__(self, required, budget):
        super().__init__(
            f"enumeration needs {required} residue classes, budget is {budget}"
        )
        self.required = required
        self.budget = budget


class InputError(ArtifactError):
    """Base for malformed or out-of-scope input."""


class PrimeMismatch(InputError):
    pass


class NotIrreducible(InputError):
    pass


class NotEisenstein(InputError):
    pass


class UnsupportedTower(InputError):
    pass


class NotGalois(InputError):
    pass


class NoPthRootsOfUnity(InputError):
    pass


class InvalidJump(InputError):
    pass


class InvalidProfile(InputError):
    pass


class InvalidData(InputError):
    pass


class GcdViolation(InputError):
    pass


class UnsupportedBase(InputError):
    pass


class NotGenerator(ArtifactError):
    pass


class SearchExhausted(ArtifactError):
    pass


class InvariantViolation(ArtifactError):
    pass
