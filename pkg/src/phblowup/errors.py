"""Exception types raised across the package."""


class BlowupError(Exception):
    """Base class for all package errors."""


class HyperbolicityError(BlowupError):
    pass


class SlackError(BlowupError):
    pass


class RangeError(BlowupError, ValueError):
    pass


class ExceptionalPointError(BlowupError):
    pass


class TangencyError(BlowupError):
    pass


class DomainEscape(BlowupError):
    pass


class LogError(BlowupError):
    pass


class AtlasError(BlowupError):
    pass


class GlueError(BlowupError):
    pass


class PartitionError(BlowupError):
    pass


class SamplingError(BlowupError):
    def __init__(self, message, achievable=None):
        super().__init__(message)
        self.achievable = achievable


class ConvergenceError(BlowupError):
    pass


class ConfigError(BlowupError):
    pass
