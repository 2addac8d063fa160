"""Exception hierarchy shared by all steklab modules."""


class SteklabError(Exception):
    """Base class for every error raised by steklab."""


# mesh-core
class ParseError(SteklabError, ValueError):
    pass


class NonManifoldError(SteklabError, ValueError):
    pass


class EmptyBoundaryError(SteklabError, ValueError):
    pass


class InvalidParameter(SteklabError, ValueError):
    pass


class DegenerateSimplex(SteklabError, ValueError):
    pass


# fem / eigensolver
class ZeroBoundaryNorm(SteklabError, ArithmeticError):
    pass


class ConvergenceFailure(SteklabError, RuntimeError):
    pass


class DimensionMismatch(SteklabError, ValueError):
    pass


class SingularInteriorBlock(SteklabError, ArithmeticError):
    pass


class HasBoundaryError(SteklabError, ValueError):
    pass


# metric invariants
class ComponentNotFound(SteklabError, KeyError):
    pass


class DisconnectedGraph(SteklabError, ValueError):
    pass


class InsufficientSamples(SteklabError, ValueError):
    pass


class HypothesisViolated(SteklabError, ValueError):
    """Some closed ball is heavier than the separated-family hypothesis allows.

    ``witness`` is the offending point index and ``mass`` its ball mass.
    """

    def __init__(self, message, witness=None, mass=None, limit=None):
        super().__init__(message)
        self.witness = witness
        self.mass = mass
        self.limit = limit


class ConstructionShortfall(SteklabError, RuntimeError):
    """The greedy separated-family construction could not certify its output.

    ``partial`` holds whatever family was built before giving up.
    """

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


# bounds engine
class MissingInvariant(SteklabError, ValueError):
    pass


class SeparationInfeasible(SteklabError, ValueError):
    pass


class NotEnoughFunctions(SteklabError, ValueError):
    pass


class EmptySubset(SteklabError, ValueError):
    pass


class OverlappingSubsets(SteklabError, ValueError):
    pass


# harness
class ConfigError(SteklabError, ValueError):
    pass
