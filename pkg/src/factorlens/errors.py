"""Exception types shared across the engine."""


class FactorLensError(Exception):
    """Base class for every error raised by this package."""


class MissingFile(FactorLensError):
    pass


class MissingDay(FactorLensError):
    pass


class UnknownFactor(FactorLensError):
    pass


class UnknownStock(FactorLensError):
    pass


class UnknownDataset(FactorLensError):
    pass


class MalformedRow(FactorLensError):
    pass


class InvalidConfig(FactorLensError):
    pass


class DimensionMismatch(FactorLensError):
    pass


class NonFiniteInput(FactorLensError):
    pass


class TooFewSamples(FactorLensError):
    pass


class IndivisiblePeriod(FactorLensError):
    pass


class InsufficientHistory(FactorLensError):
    pass


class UnknownCycle(FactorLensError):
    pass


class EmptyScope(FactorLensError):
    pass


class InvalidSpec(FactorLensError):
    pass


class HorizonExceedsData(FactorLensError):
    pass
