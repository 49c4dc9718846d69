"""Exception hierarchy shared across the package."""


class ThermospinError(Exception):
    """Base class for all package errors."""


class InvalidLattice(ThermospinError):
    pass


class MissingField(ThermospinError):
    pass


class NonBipartite(ThermospinError):
    pass


class TooLarge(ThermospinError):
    pass


class WindowViolation(ThermospinError):
    pass


class NonPositiveTemperature(ThermospinError):
    pass


class BadTarget(ThermospinError):
    pass


class UnsupportedModel(ThermospinError):
    pass


class BadSchedule(ThermospinError):
    pass


class NonPositiveX(ThermospinError):
    pass


class NegativeArgument(ThermospinError):
    """Series sum for the partition function is non-positive at some T."""

    def __init__(self, temperature, message=None):
        self.temperature = temperature
        super().__init__(message or f"non-positive series sum at T={temperature}")


class ProtocolInvalid(ThermospinError):
    pass


class ReferenceNotEigenstate(ThermospinError):
    pass


class BadProductState(ThermospinError):
    pass


class NotInvertibleByRzFlip(ThermospinError):
    pass


class DegenerateEstimator(ThermospinError):
    pass


class TotalDepolarization(ThermospinError):
    pass


class DegeneratePair(ThermospinError):
    pass


class DivByZeroEstimation(ThermospinError):
    pass


class TooFewValues(ThermospinError):
    pass


class ParseError(ThermospinError):
    pass


class ValidationError(ThermospinError):
    pass
