"""Exception types shared across the package."""


class CocycleError(Exception):
    """Base class for all cocyclekit errors."""


class InvalidCocycle(CocycleError):
    """Cocycle data violates an invariant (probabilities, ranks, stochasticity)."""


class ZeroMatrix(CocycleError):
    """Operation requires a nonzero matrix."""


class NotRankOne(CocycleError):
    """Operation requires a rank-one matrix."""


class Degenerate(CocycleError):
    """Numerically degenerate input (e.g. image vector below tolerance)."""


class NotPrimitive(CocycleError):
    """Stochastic matrix is not primitive."""


class Inadmissible(CocycleError):
    """Word contains a forbidden transition or an out-of-range symbol."""


class SingularComponent(CocycleError):
    """Operation requires all components invertible."""


class NoSingularSymbol(CocycleError):
    """Operation requires at least one singular symbol."""


class NullWord(CocycleError):
    """A finite admissible word with zero matrix product was encountered."""

    def __init__(self, word, message=None):
        self.word = word
        super().__init__(message or f"null word {word}")


class UndefinedPoint(CocycleError):
    """Observable has no value at a required point."""


class NotAllRankOne(CocycleError):
    """Operation requires every component to be rank-one."""


class NoCone(CocycleError):
    """Operation requires a verified invariant multi-cone."""


class BadTruncation(CocycleError):
    """Truncation level does not dominate the cocycle's uniform bound."""


class ZeroVariance(CocycleError):
    """CLT normalization requires positive variance."""


class DivergentObservable(CocycleError):
    """An atom sits on a kernel, so the integrand is -inf there."""


class BranchLimitExceeded(CocycleError):
    """Branch/word enumeration exceeded its hard cap; use a sampling engine."""
